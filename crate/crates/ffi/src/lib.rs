//! C ABI over the synsq analysis pipeline.
//!
//! Every function returns a [`SynsqStatus`]; on failure the message is kept
//! per thread and can be read with [`synsq_last_error_message`]. Handles are
//! opaque and must be released with [`synsq_analysis_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use synsq::pipeline::plane_decompose;
use synsq::reconstruct::invert_frequency_band;
use synsq::{
    analyze, Analysis, Gamma, Pad, PipelineConfig, RidgeParams, SynsqError, UniformSeries,
    WaveletKind, WaveletSpec,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynsqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Parse = 4,
    NoRidge = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynsqWavelet {
    Bump = 0,
    Morlet = 1,
    MexicanHat = 2,
}

/// Analysis settings. Start from [`synsq_config_default`].
///
/// `gamma < 0` selects the automatic threshold, `pad < 0` automatic padding,
/// `band_halfwidth == 0` the voice-dependent default, and `freq_lo == freq_hi`
/// searches the whole plane for ridges.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SynsqConfig {
    pub n_v: usize,
    pub wavelet: SynsqWavelet,
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub pad: i64,
    pub smoothness: f64,
    pub jump_cap: usize,
    pub band_halfwidth: usize,
    pub freq_lo: f64,
    pub freq_hi: f64,
}

/// Opaque result of [`synsq_analyze`].
pub struct SynsqAnalysis {
    inner: Analysis,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: SynsqStatus, msg: impl Into<String>) -> SynsqStatus {
    set_error(msg.into());
    status
}

fn status_of(err: &SynsqError) -> SynsqStatus {
    match err {
        SynsqError::InvalidArgument(_) => SynsqStatus::InvalidArgument,
        SynsqError::Numerical(_) => SynsqStatus::Numerical,
        SynsqError::Parse { .. } => SynsqStatus::Parse,
        SynsqError::NoRidge => SynsqStatus::NoRidge,
        SynsqError::Io(_) => SynsqStatus::Io,
    }
}

fn guard(body: impl FnOnce() -> Result<(), SynsqStatus>) -> SynsqStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SynsqStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(SynsqStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, SynsqStatus>;
}

impl<T> OrStatus<T> for synsq::Result<T> {
    fn or_status(self) -> Result<T, SynsqStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn input<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], SynsqStatus> {
    if data.is_null() {
        return Err(fail(SynsqStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn output<'a, T>(
    data: *mut T,
    cap: usize,
    need: usize,
    what: &str,
) -> Result<&'a mut [T], SynsqStatus> {
    if data.is_null() {
        return Err(fail(SynsqStatus::NullPointer, format!("{what} is null")));
    }
    if cap < need {
        return Err(fail(
            SynsqStatus::BufferTooSmall,
            format!("{what} holds {cap} values, {need} needed"),
        ));
    }
    Ok(slice::from_raw_parts_mut(data, need))
}

unsafe fn handle<'a>(h: *const SynsqAnalysis) -> Result<&'a Analysis, SynsqStatus> {
    h.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| fail(SynsqStatus::NullPointer, "analysis handle is null"))
}

fn pipeline_config(c: &SynsqConfig) -> synsq::Result<PipelineConfig> {
    let kind = match c.wavelet {
        SynsqWavelet::Bump => WaveletKind::Bump,
        SynsqWavelet::Morlet => WaveletKind::Morlet,
        SynsqWavelet::MexicanHat => WaveletKind::MexicanHat,
    };
    let config = PipelineConfig {
        n_v: c.n_v,
        wavelet: WaveletSpec::new(kind, c.mu, c.sigma)?,
        gamma: if c.gamma < 0.0 {
            Gamma::Auto
        } else {
            Gamma::Fixed(c.gamma)
        },
        pad: if c.pad < 0 {
            Pad::Auto
        } else {
            Pad::Fixed(c.pad as usize)
        },
        ridge: RidgeParams {
            smoothness: c.smoothness,
            jump_cap: c.jump_cap,
            band_halfwidth: (c.band_halfwidth > 0).then_some(c.band_halfwidth),
            components: 1,
            freq_range: (c.freq_lo != c.freq_hi).then_some((c.freq_lo, c.freq_hi)),
        },
    };
    config.validate()?;
    Ok(config)
}

/// Library defaults: bump wavelet (mu 5, sigma 1), 32 voices, automatic
/// threshold and padding.
#[no_mangle]
pub extern "C" fn synsq_config_default() -> SynsqConfig {
    let d = PipelineConfig::default();
    SynsqConfig {
        n_v: d.n_v,
        wavelet: SynsqWavelet::Bump,
        mu: d.wavelet.mu(),
        sigma: d.wavelet.sigma(),
        gamma: -1.0,
        pad: -1,
        smoothness: d.ridge.smoothness,
        jump_cap: d.ridge.jump_cap,
        band_halfwidth: 0,
        freq_lo: 0.0,
        freq_hi: 0.0,
    }
}

/// Message of the last failure on this thread, or null. Valid until the next
/// call into the library from the same thread.
#[no_mangle]
pub extern "C" fn synsq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Synchrosqueezes `len` samples spaced `dt` apart, starting at `t0`.
///
/// # Safety
/// `values` must point to `len` readable doubles, `config` may be null (for
/// defaults) or point to a valid config, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn synsq_analyze(
    values: *const f64,
    len: usize,
    t0: f64,
    dt: f64,
    config: *const SynsqConfig,
    out: *mut *mut SynsqAnalysis,
) -> SynsqStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(SynsqStatus::NullPointer, "output handle pointer is null"));
        }
        *out = ptr::null_mut();
        let values = input(values, len, "values")?;
        let config = match config.as_ref() {
            Some(c) => pipeline_config(c).or_status()?,
            None => PipelineConfig::default(),
        };
        let series = UniformSeries::new(t0, dt, values.to_vec()).or_status()?;
        let inner = analyze(&series, &config).or_status()?;
        *out = Box::into_raw(Box::new(SynsqAnalysis { inner }));
        Ok(())
    })
}

/// Releases a handle from [`synsq_analyze`]. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn synsq_analysis_free(h: *mut SynsqAnalysis) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of frequency bins (rows); 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn synsq_analysis_bins(h: *const SynsqAnalysis) -> usize {
    h.as_ref().map_or(0, |h| h.inner.sst.n_bins())
}

/// Number of time columns; 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn synsq_analysis_len(h: *const SynsqAnalysis) -> usize {
    h.as_ref().map_or(0, |h| h.inner.sst.len())
}

/// Threshold the analysis used; NaN for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn synsq_analysis_gamma(h: *const SynsqAnalysis) -> f64 {
    h.as_ref().map_or(f64::NAN, |h| h.inner.gamma)
}

/// Writes the bin centre frequencies, lowest first.
///
/// # Safety
/// `h` must be a live handle and `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn synsq_analysis_frequencies(
    h: *const SynsqAnalysis,
    out: *mut f64,
    cap: usize,
) -> SynsqStatus {
    guard(|| {
        let a = handle(h)?;
        let freqs = a.sst.freqs();
        output(out, cap, freqs.len(), "frequency buffer")?.copy_from_slice(&freqs);
        Ok(())
    })
}

/// Writes `|T|` row-major, `bins x len`, lowest frequency first.
///
/// # Safety
/// `h` must be a live handle and `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn synsq_analysis_magnitudes(
    h: *const SynsqAnalysis,
    out: *mut f64,
    cap: usize,
) -> SynsqStatus {
    guard(|| {
        let a = handle(h)?;
        let (rows, cols) = (a.sst.n_bins(), a.sst.len());
        let out = output(out, cap, rows * cols, "magnitude buffer")?;
        for l in 0..rows {
            for (dst, c) in out[l * cols..(l + 1) * cols].iter_mut().zip(a.sst.t.row(l)) {
                *dst = c.norm();
            }
        }
        Ok(())
    })
}

/// Extracts `count` ridges and recovers a component around each.
///
/// `components` receives `count x len` samples and `ridge_bins` (if not
/// null) `count x len` bin indices, both row-major with the lowest-frequency
/// component first.
///
/// # Safety
/// `h` must be a live handle, `config` null or valid, and the buffers must
/// hold `components_cap` and `ridge_cap` elements.
#[no_mangle]
pub unsafe extern "C" fn synsq_analysis_decompose(
    h: *const SynsqAnalysis,
    config: *const SynsqConfig,
    count: usize,
    components: *mut f64,
    components_cap: usize,
    ridge_bins: *mut usize,
    ridge_cap: usize,
) -> SynsqStatus {
    guard(|| {
        let a = handle(h)?;
        let config = match config.as_ref() {
            Some(c) => pipeline_config(c).or_status()?,
            None => PipelineConfig::default(),
        };
        let len = a.sst.len();
        let out = output(components, components_cap, count * len, "component buffer")?;
        let bins = if ridge_bins.is_null() {
            None
        } else {
            Some(output(ridge_bins, ridge_cap, count * len, "ridge buffer")?)
        };
        let parts = plane_decompose(&a.sst, a.r_psi, &config, count).or_status()?;
        for (k, part) in parts.iter().enumerate() {
            out[k * len..(k + 1) * len].copy_from_slice(part.series.values());
        }
        if let Some(bins) = bins {
            for (k, part) in parts.iter().enumerate() {
                bins[k * len..(k + 1) * len].copy_from_slice(&part.ridge.bin_path);
            }
        }
        Ok(())
    })
}

/// Inverts every bin with centre frequency in `[lo, hi]`, clamped to the
/// plane. `clamped` (if not null) is set to 1 when clamping happened.
///
/// # Safety
/// `h` must be a live handle, `out` must hold `cap` doubles and `clamped`
/// must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn synsq_analysis_invert_band(
    h: *const SynsqAnalysis,
    lo: f64,
    hi: f64,
    out: *mut f64,
    cap: usize,
    clamped: *mut i32,
) -> SynsqStatus {
    guard(|| {
        let a = handle(h)?;
        let out = output(out, cap, a.sst.len(), "output buffer")?;
        let inv = invert_frequency_band(&a.sst, lo, hi, a.r_psi).or_status()?;
        out.copy_from_slice(inv.series.values());
        if let Some(flag) = clamped.as_mut() {
            *flag = inv.clamped as i32;
        }
        Ok(())
    })
}
