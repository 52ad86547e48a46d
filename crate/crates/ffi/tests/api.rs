use std::f64::consts::PI;
use std::ffi::CStr;
use std::ptr;

use synsq_ffi::*;

fn tone(freq: f64, n: usize, dt: f64) -> Vec<f64> {
    (0..n).map(|m| (2.0 * PI * freq * m as f64 * dt).cos()).collect()
}

fn last_error() -> String {
    let p = synsq_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn analyze_with(values: &[f64], dt: f64, config: Option<&SynsqConfig>) -> *mut SynsqAnalysis {
    let mut h = ptr::null_mut();
    let cfg = config.map_or(ptr::null(), |c| c as *const _);
    let status = unsafe { synsq_analyze(values.as_ptr(), values.len(), 0.0, dt, cfg, &mut h) };
    assert_eq!(status, SynsqStatus::Ok, "{}", last_error());
    assert!(!h.is_null());
    h
}

#[test]
fn tone_peaks_at_its_frequency() {
    let dt = 1.0 / 64.0;
    let values = tone(5.0, 512, dt);
    let h = analyze_with(&values, dt, None);
    unsafe {
        let bins = synsq_analysis_bins(h);
        let len = synsq_analysis_len(h);
        assert_eq!(len, 512);
        assert!(synsq_analysis_gamma(h) >= 0.0);
        let mut freqs = vec![0.0; bins];
        assert_eq!(synsq_analysis_frequencies(h, freqs.as_mut_ptr(), bins), SynsqStatus::Ok);
        let mut mags = vec![0.0; bins * len];
        assert_eq!(synsq_analysis_magnitudes(h, mags.as_mut_ptr(), mags.len()), SynsqStatus::Ok);
        let col = len / 2;
        let peak = (0..bins)
            .max_by(|&a, &b| mags[a * len + col].total_cmp(&mags[b * len + col]))
            .unwrap();
        assert!((freqs[peak] / 5.0 - 1.0).abs() < 0.03, "peak at {}", freqs[peak]);
        synsq_analysis_free(h);
    }
}

#[test]
fn decompose_recovers_a_tone() {
    let dt = 1.0 / 64.0;
    let values = tone(4.0, 1024, dt);
    let h = analyze_with(&values, dt, None);
    let mut comp = vec![0.0; 1024];
    let mut ridge = vec![0usize; 1024];
    let status = unsafe {
        synsq_analysis_decompose(h, ptr::null(), 1, comp.as_mut_ptr(), 1024, ridge.as_mut_ptr(), 1024)
    };
    assert_eq!(status, SynsqStatus::Ok, "{}", last_error());
    let range = 102..922;
    let err: f64 = range.clone().map(|m| (comp[m] - values[m]).powi(2)).sum::<f64>().sqrt()
        / range.clone().map(|m| values[m].powi(2)).sum::<f64>().sqrt();
    assert!(err < 0.05, "relative error {err}");
    assert!(ridge.windows(2).all(|w| w[0].abs_diff(w[1]) <= 3));
    unsafe { synsq_analysis_free(h) };
}

#[test]
fn band_inversion_reports_clamping() {
    let dt = 0.01;
    let values = tone(3.0, 256, dt);
    let h = analyze_with(&values, dt, None);
    let mut out = vec![0.0; 256];
    let mut clamped = 0;
    unsafe {
        let s = synsq_analysis_invert_band(h, 0.0, 1e6, out.as_mut_ptr(), 256, &mut clamped);
        assert_eq!(s, SynsqStatus::Ok);
        assert_eq!(clamped, 1);
        let s = synsq_analysis_invert_band(h, 2.0, 4.0, out.as_mut_ptr(), 256, &mut clamped);
        assert_eq!(s, SynsqStatus::Ok);
        assert_eq!(clamped, 0);
        synsq_analysis_free(h);
    }
}

#[test]
fn configs_are_validated() {
    let values = tone(3.0, 256, 0.01);
    let mut config = synsq_config_default();
    assert_eq!(config.n_v, 32);
    config.n_v = 0;
    let mut h = ptr::null_mut();
    let s = unsafe { synsq_analyze(values.as_ptr(), 256, 0.0, 0.01, &config, &mut h) };
    assert_eq!(s, SynsqStatus::InvalidArgument);
    assert!(h.is_null());
    assert!(last_error().contains("voices"));

    let mut config = synsq_config_default();
    config.wavelet = SynsqWavelet::Bump;
    config.mu = 1.0;
    config.sigma = 2.0;
    let s = unsafe { synsq_analyze(values.as_ptr(), 256, 0.0, 0.01, &config, &mut h) };
    assert_eq!(s, SynsqStatus::InvalidArgument);

    let mut config = synsq_config_default();
    config.wavelet = SynsqWavelet::Morlet;
    config.mu = 1.0;
    config.n_v = 16;
    let h = analyze_with(&values, 0.01, Some(&config));
    unsafe { synsq_analysis_free(h) };
}

#[test]
fn null_pointers_and_short_buffers_are_errors() {
    let mut h = ptr::null_mut();
    let s = unsafe { synsq_analyze(ptr::null(), 10, 0.0, 1.0, ptr::null(), &mut h) };
    assert_eq!(s, SynsqStatus::NullPointer);
    let values = [0.0; 8];
    let s = unsafe { synsq_analyze(values.as_ptr(), 8, 0.0, 1.0, ptr::null(), ptr::null_mut()) };
    assert_eq!(s, SynsqStatus::NullPointer);
    unsafe {
        assert_eq!(synsq_analysis_bins(ptr::null()), 0);
        assert!(synsq_analysis_gamma(ptr::null()).is_nan());
        let mut buf = [0.0; 4];
        assert_eq!(
            synsq_analysis_frequencies(ptr::null(), buf.as_mut_ptr(), 4),
            SynsqStatus::NullPointer
        );
        synsq_analysis_free(ptr::null_mut());
    }

    let h = analyze_with(&tone(3.0, 128, 0.01), 0.01, None);
    let mut buf = [0.0; 4];
    let s = unsafe { synsq_analysis_frequencies(h, buf.as_mut_ptr(), 4) };
    assert_eq!(s, SynsqStatus::BufferTooSmall);
    assert!(last_error().contains("needed"));
    let s = unsafe { synsq_analysis_len(h) };
    assert_eq!(s, 128);
    unsafe { synsq_analysis_free(h) };
}

#[test]
fn success_clears_the_error_message() {
    let mut h = ptr::null_mut();
    let s = unsafe { synsq_analyze(ptr::null(), 1, 0.0, 1.0, ptr::null(), &mut h) };
    assert_ne!(s, SynsqStatus::Ok);
    assert!(!synsq_last_error_message().is_null());
    let h = analyze_with(&tone(2.0, 128, 0.05), 0.05, None);
    assert!(synsq_last_error_message().is_null());
    unsafe { synsq_analysis_free(h) };
}
