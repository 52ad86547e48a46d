use std::f64::consts::PI;

use synsq::io::{read_sst_archive, write_sst_archive};
use synsq::pipeline::{denoise, plane_ridges};
use synsq::testsignals::gen_fig1;
use synsq::{analyze, Gamma, Pad, PipelineConfig, SynsqError, UniformSeries, WaveletSpec};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn analysis_does_not_depend_on_worker_count() {
    let (series, _) = gen_fig1(1024).unwrap();
    let config = PipelineConfig::default();
    let one = in_pool(1, || analyze(&series, &config).unwrap());
    let four = in_pool(4, || analyze(&series, &config).unwrap());
    assert_eq!(one.gamma, four.gamma);
    assert_eq!(one.sst.t.as_slice(), four.sst.t.as_slice());
    let parts_one = in_pool(1, || one.decompose(&config, 1).unwrap());
    let parts_four = in_pool(4, || four.decompose(&config, 1).unwrap());
    assert_eq!(parts_one[0].series.values(), parts_four[0].series.values());
}

#[test]
fn archive_round_trip_is_exact() {
    let (series, _) = gen_fig1(256).unwrap();
    let analysis = analyze(&series, &PipelineConfig::default()).unwrap();
    let mut text = Vec::new();
    write_sst_archive(&mut text, &analysis.sst, analysis.gamma).unwrap();
    let (sst, gamma) = read_sst_archive(std::str::from_utf8(&text).unwrap()).unwrap();
    assert_eq!(gamma, analysis.gamma);
    assert_eq!(sst.t.as_slice(), analysis.sst.t.as_slice());
    assert_eq!(sst.freqs(), analysis.sst.freqs());
    assert_eq!(sst.wavelet, analysis.sst.wavelet);
    assert_eq!((sst.t0, sst.dt, sst.n_v), (analysis.sst.t0, analysis.sst.dt, analysis.sst.n_v));
    let config = PipelineConfig::default();
    assert_eq!(
        plane_ridges(&sst, &config, 1).unwrap(),
        analysis.ridges(&config, 1).unwrap()
    );
}

#[test]
fn constant_input_gives_an_empty_plane() {
    let series = UniformSeries::new(0.0, 0.1, vec![2.5; 300]).unwrap();
    let analysis = analyze(&series, &PipelineConfig::default()).unwrap();
    let peak = analysis.sst.t.as_slice().iter().map(|c| c.norm()).fold(0.0, f64::max);
    assert!(peak < 1e-10, "{peak}");
}

#[test]
fn plane_is_cropped_to_the_input_window() {
    let series = UniformSeries::new(3.0, 0.5, (0..300).map(|m| (m as f64 * 0.7).sin()).collect()).unwrap();
    for pad in [Pad::Auto, Pad::Fixed(0), Pad::Fixed(17)] {
        let config = PipelineConfig { pad, ..PipelineConfig::default() };
        let analysis = analyze(&series, &config).unwrap();
        assert_eq!(analysis.sst.len(), 300);
        assert_eq!(analysis.sst.t0, 3.0);
        assert_eq!(analysis.sst.times()[299], 3.0 + 299.0 * 0.5);
    }
}

#[test]
fn denoising_removes_noise_and_keeps_the_tone() {
    let n = 2048;
    let dt = 1.0 / 256.0;
    let clean: Vec<f64> = (0..n).map(|m| (2.0 * PI * 10.0 * m as f64 * dt).cos()).collect();
    let series = UniformSeries::new(0.0, dt, clean.clone()).unwrap();
    let noisy = synsq::signal::add_white_noise(&series, 0.5, 11).unwrap();
    let err = |x: &[f64]| {
        let range = 200..n - 200;
        range.clone().map(|m| (x[m] - clean[m]).powi(2)).sum::<f64>().sqrt()
            / range.map(|m| clean[m].powi(2)).sum::<f64>().sqrt()
    };
    let before = err(noisy.values());
    let (auto, gamma) = denoise(&noisy, &PipelineConfig::default()).unwrap();
    assert!(gamma > 0.0);
    assert!(err(auto.values()) < before);
    // About four times the rms of |W| for this noise level.
    let fixed = PipelineConfig { gamma: Gamma::Fixed(0.1), ..PipelineConfig::default() };
    let (strong, _) = denoise(&noisy, &fixed).unwrap();
    assert!(err(strong.values()) < 0.25 * before, "{} vs {before}", err(strong.values()));
}

#[test]
fn invalid_configs_are_rejected() {
    let (series, _) = gen_fig1(128).unwrap();
    let bad = PipelineConfig { n_v: 0, ..PipelineConfig::default() };
    assert!(matches!(analyze(&series, &bad), Err(SynsqError::InvalidArgument(_))));

    let analysis = analyze(&series, &PipelineConfig::default()).unwrap();
    let mut window = PipelineConfig::default();
    window.ridge.freq_range = Some((1e5, 2e5));
    assert!(analysis.ridges(&window, 1).is_err());
    window.ridge.freq_range = Some((3.0, 1.0));
    assert!(analysis.ridges(&window, 1).is_err());

    let pad = PipelineConfig { pad: Pad::Fixed(128), ..PipelineConfig::default() };
    assert!(analyze(&series, &pad).is_err());
    assert!("-1".parse::<Gamma>().is_err());
    assert!(WaveletSpec::bump(1.0, 2.0).is_err());
}
