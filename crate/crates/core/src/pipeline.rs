//! End-to-end analysis: padding, transform, masking, reassignment and
//! cropping back to the input window.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rustfft::num_complex::Complex64;

use rayon::prelude::*;

use crate::cwt::{octaves_for_len, scale_grid, CwtRow, RowTransform};
use crate::error::{invalid, Result, SynsqError};
use crate::grid::Matrix;
use crate::phase::{omega_at, universal_threshold};
use crate::reconstruct::{
    default_band_halfwidth, extract_ridges_in, invert_partition, Ridge, DEFAULT_JUMP_CAP,
};
use crate::signal::{PadPlan, UniformSeries};
use crate::squeeze::{reassignment_weights, FrequencyBins, SstPlane};
use crate::wavelets::WaveletSpec;

/// Threshold on `|W|` below which coefficients are discarded.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Gamma {
    /// MAD-based universal threshold from the finest octave.
    #[default]
    Auto,
    Fixed(f64),
}

impl FromStr for Gamma {
    type Err = SynsqError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Gamma::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => Ok(Gamma::Fixed(v)),
            _ => invalid(format!("gamma must be `auto` or a non-negative number, got `{s}`")),
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Auto => f.write_str("auto"),
            Gamma::Fixed(v) => write!(f, "{v}"),
        }
    }
}

/// Reflection padding ahead of the transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Pad {
    /// Half the series length on each side.
    #[default]
    Auto,
    Fixed(usize),
}

impl FromStr for Pad {
    type Err = SynsqError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Pad::Auto);
        }
        s.parse::<usize>()
            .map(Pad::Fixed)
            .map_err(|_| SynsqError::InvalidArgument(format!("pad must be `auto` or a count, got `{s}`")))
    }
}

impl fmt::Display for Pad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pad::Auto => f.write_str("auto"),
            Pad::Fixed(v) => write!(f, "{v}"),
        }
    }
}

/// Ridge extraction settings.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeParams {
    /// Jump penalty as a fraction of the plane's mean per-column peak energy.
    pub smoothness: f64,
    pub jump_cap: usize,
    /// `None` picks [`default_band_halfwidth`] for the voice count.
    pub band_halfwidth: Option<usize>,
    pub components: usize,
    /// Frequency window `(lo, hi)` searched for ridges; `None` searches the
    /// whole plane.
    pub freq_range: Option<(f64, f64)>,
}

impl Default for RidgeParams {
    fn default() -> Self {
        Self {
            smoothness: 2.0,
            jump_cap: DEFAULT_JUMP_CAP,
            band_halfwidth: None,
            components: 1,
            freq_range: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub n_v: usize,
    pub wavelet: WaveletSpec,
    pub gamma: Gamma,
    pub pad: Pad,
    pub ridge: RidgeParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            n_v: 32,
            wavelet: WaveletSpec::default(),
            gamma: Gamma::Auto,
            pad: Pad::Auto,
            ridge: RidgeParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_v == 0 {
            return invalid("voices per octave must be at least 1");
        }
        if !(self.ridge.smoothness >= 0.0) {
            return invalid("ridge smoothness must be non-negative");
        }
        if self.ridge.jump_cap == 0 {
            return invalid("ridge jump cap must be at least 1");
        }
        if let Some((lo, hi)) = self.ridge.freq_range {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                return invalid(format!("ridge frequency window [{lo}, {hi}] is not valid"));
            }
        }
        Ok(())
    }

    pub fn band_halfwidth(&self) -> usize {
        self.ridge
            .band_halfwidth
            .unwrap_or_else(|| default_band_halfwidth(self.n_v))
    }

    fn pad_plan(&self, len: usize) -> Result<PadPlan> {
        match self.pad {
            Pad::Auto => PadPlan::auto(len),
            Pad::Fixed(p) => PadPlan::new(len, p),
        }
    }
}

/// Output of [`analyze`]: the synchrosqueezed plane restricted to the input
/// window, and the quantities needed to invert it.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub sst: SstPlane,
    pub gamma: f64,
    pub pad: PadPlan,
    pub r_psi: Complex64,
}

impl Analysis {
    /// Ridges of the `count` strongest components, using the configured
    /// ridge parameters.
    pub fn ridges(&self, config: &PipelineConfig, count: usize) -> Result<Vec<Ridge>> {
        plane_ridges(&self.sst, config, count)
    }

    /// Extracts `count` ridges and inverts each over its share of the
    /// bands, so that no bin contributes to two components.
    pub fn decompose(&self, config: &PipelineConfig, count: usize) -> Result<Vec<Component>> {
        plane_decompose(&self.sst, self.r_psi, config, count)
    }
}

/// Ridge extraction on a plane that may come from an archive rather than a
/// fresh analysis. The default band half-width follows the plane's voices.
pub fn plane_ridges(sst: &SstPlane, config: &PipelineConfig, count: usize) -> Result<Vec<Ridge>> {
    config.validate()?;
    let rows = ridge_rows(sst, config.ridge.freq_range)?;
    let penalty = absolute_smoothness(sst, rows.clone(), config.ridge.smoothness);
    let halfwidth = config
        .ridge
        .band_halfwidth
        .unwrap_or_else(|| default_band_halfwidth(sst.n_v));
    extract_ridges_in(sst, rows, count, penalty, config.ridge.jump_cap, halfwidth)
}

pub fn plane_decompose(
    sst: &SstPlane,
    r_psi: Complex64,
    config: &PipelineConfig,
    count: usize,
) -> Result<Vec<Component>> {
    let ridges = plane_ridges(sst, config, count)?;
    let series = invert_partition(sst, &ridges, r_psi)?;
    Ok(ridges
        .into_iter()
        .zip(series)
        .map(|(ridge, series)| Component { ridge, series })
        .collect())
}

/// A ridge together with the signal recovered around it.
#[derive(Clone, Debug)]
pub struct Component {
    pub ridge: Ridge,
    pub series: UniformSeries,
}

/// Bins whose centre frequency lies in `range`, or every bin for `None`.
pub fn ridge_rows(sst: &SstPlane, range: Option<(f64, f64)>) -> Result<RangeInclusive<usize>> {
    let last = sst.n_bins() - 1;
    let Some((lo, hi)) = range else {
        return Ok(0..=last);
    };
    let freqs = sst.freqs();
    let first = freqs.iter().position(|&f| f >= lo);
    let end = freqs.iter().rposition(|&f| f <= hi);
    match (first, end) {
        (Some(a), Some(b)) if a <= b => Ok(a..=b),
        _ => invalid(format!(
            "no frequency bin lies in [{lo}, {hi}]; the plane covers [{}, {}]",
            sst.bins.w_min, sst.bins.w_max
        )),
    }
}

/// Converts a relative smoothness into the absolute penalty used by
/// [`crate::reconstruct::extract_ridge`]: the relative value times the mean
/// over columns of the largest `|T|^2` among `rows`.
pub fn absolute_smoothness(sst: &SstPlane, rows: RangeInclusive<usize>, relative: f64) -> f64 {
    let n = sst.len().max(1);
    let peak_mean = (0..sst.len())
        .map(|m| {
            rows.clone()
                .map(|l| sst.t[(l, m)].norm_sqr())
                .fold(0.0, f64::max)
        })
        .sum::<f64>()
        / n as f64;
    relative * peak_mean
}

/// Streams the CWT of the padded series in batches of `n_v` scales,
/// calling `visit(first_scale, rows, gamma)` in ascending scale order, and
/// returns the threshold.
fn stream_transform(
    series: &UniformSeries,
    config: &PipelineConfig,
    plan: &PadPlan,
    mut visit: impl FnMut(usize, &[CwtRow], f64),
) -> Result<f64> {
    let padded = plan.apply(series)?;
    let rt = RowTransform::new(&padded, &config.wavelet, config.n_v)?;
    let n_scales = rt.scales().len();
    let batch = config.n_v.min(n_scales);
    let compute = |start: usize| -> Vec<CwtRow> {
        (start..(start + batch).min(n_scales))
            .into_par_iter()
            .map(|j| rt.row(j))
            .collect()
    };
    let first = compute(0);
    let gamma = match config.gamma {
        Gamma::Auto => {
            let finest: Vec<&[Complex64]> = first.iter().map(|r| r.w.as_slice()).collect();
            universal_threshold(&finest)?
        }
        Gamma::Fixed(v) => v,
    };
    if !(gamma >= 0.0) {
        return invalid(format!("threshold must be non-negative, got {gamma}"));
    }
    visit(0, &first, gamma);
    drop(first);
    let mut start = batch;
    while start < n_scales {
        let rows = compute(start);
        visit(start, &rows, gamma);
        start += rows.len();
    }
    Ok(gamma)
}

/// Runs the full analysis on a uniformly sampled series.
///
/// Scales are produced in batches and squeezed straight into the columns of
/// the input window, so the full `W` and `dW` planes are never held in
/// memory. Each column still accumulates scales in ascending order, which
/// makes the result identical to chaining [`crate::cwt::forward`],
/// [`crate::phase::phase_transform`], [`crate::squeeze::synchrosqueeze`]
/// and [`SstPlane::crop`].
pub fn analyze(series: &UniformSeries, config: &PipelineConfig) -> Result<Analysis> {
    config.validate()?;
    let r_psi = config.wavelet.admissibility_constant()?;
    let plan = config.pad_plan(series.len())?;
    let padded_len = plan.padded_len();
    let dt = series.dt();
    let n_scales = octaves_for_len(padded_len)? * config.n_v;
    let bins = FrequencyBins::new(padded_len, n_scales, dt)?;
    let weights = reassignment_weights(&scale_grid(padded_len, config.n_v, dt)?, config.n_v);
    let mut columns = vec![vec![Complex64::new(0.0, 0.0); bins.count]; series.len()];
    let gamma = stream_transform(series, config, &plan, |start, rows, gamma| {
        columns.par_iter_mut().enumerate().for_each(|(c, column)| {
            let m = c + plan.left;
            for (i, row) in rows.iter().enumerate() {
                if let Some(omega) = omega_at(row.w[m], row.dw[m], gamma) {
                    column[bins.index_unchecked(omega)] += row.w[m] * weights[start + i];
                }
            }
        });
    })?;
    let mut t = Matrix::filled(bins.count, series.len(), Complex64::new(0.0, 0.0));
    for (m, column) in columns.into_iter().enumerate() {
        for (l, v) in column.into_iter().enumerate() {
            t[(l, m)] = v;
        }
    }
    Ok(Analysis {
        sst: SstPlane {
            bins,
            t0: series.t0(),
            dt,
            n_v: config.n_v,
            wavelet: config.wavelet.clone(),
            t,
        },
        gamma,
        pad: plan,
        r_psi,
    })
}

/// Hard-threshold wavelet shrinkage: zero every coefficient with
/// `|W| <= gamma` and invert the remaining CWT over all scales.
pub fn denoise(series: &UniformSeries, config: &PipelineConfig) -> Result<(UniformSeries, f64)> {
    config.validate()?;
    let r_psi = config.wavelet.admissibility_constant()?;
    let plan = config.pad_plan(series.len())?;
    let weights = reassignment_weights(
        &scale_grid(plan.padded_len(), config.n_v, series.dt())?,
        config.n_v,
    );
    let mut acc = vec![Complex64::new(0.0, 0.0); series.len()];
    let gamma = stream_transform(series, config, &plan, |start, rows, gamma| {
        acc.par_iter_mut().enumerate().for_each(|(c, a)| {
            let m = c + plan.left;
            for (i, row) in rows.iter().enumerate() {
                let w = row.w[m];
                if w.norm() > gamma {
                    *a += w * weights[start + i];
                }
            }
        });
    })?;
    let scale = 2.0 / r_psi;
    let values = acc.into_iter().map(|a| (scale * a).re).collect();
    Ok((series.with_values(values)?, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_gamma_and_pad() {
        assert_eq!("auto".parse::<Gamma>().unwrap(), Gamma::Auto);
        assert_eq!("1e-5".parse::<Gamma>().unwrap(), Gamma::Fixed(1e-5));
        assert!("-1".parse::<Gamma>().is_err());
        assert!("x".parse::<Gamma>().is_err());
        assert_eq!("AUTO".parse::<Pad>().unwrap(), Pad::Auto);
        assert_eq!("12".parse::<Pad>().unwrap(), Pad::Fixed(12));
        assert!("-3".parse::<Pad>().is_err());
    }

    #[test]
    fn analysis_covers_input_window() {
        let values: Vec<f64> = (0..300).map(|m| (m as f64 * 0.3).sin()).collect();
        let s = UniformSeries::new(2.0, 0.1, values).unwrap();
        let config = PipelineConfig {
            n_v: 8,
            ..Default::default()
        };
        let a = analyze(&s, &config).unwrap();
        assert_eq!(a.sst.len(), 300);
        assert!((a.sst.t0 - 2.0).abs() < 1e-12);
        assert_eq!(a.pad.padded_len(), 1024);
        assert_eq!(a.sst.n_bins(), 9 * 8);
    }

    #[test]
    fn rejects_invalid_config() {
        let s = UniformSeries::new(0.0, 1.0, vec![0.0; 64]).unwrap();
        let config = PipelineConfig {
            n_v: 0,
            ..Default::default()
        };
        assert!(analyze(&s, &config).is_err());
    }

    fn chirp(n: usize) -> UniformSeries {
        let values = (0..n)
            .map(|m| {
                let t = m as f64 / n as f64;
                (40.0 * t + 60.0 * t * t).sin() + 0.3 * (300.0 * t).cos()
            })
            .collect();
        UniformSeries::new(0.5, 1.0 / n as f64, values).unwrap()
    }

    #[test]
    fn streamed_analysis_matches_chained_stages() {
        use crate::cwt::forward;
        use crate::phase::{default_threshold, phase_transform};
        use crate::squeeze::synchrosqueeze;

        let s = chirp(300);
        for gamma in [Gamma::Auto, Gamma::Fixed(1e-3)] {
            let config = PipelineConfig {
                n_v: 16,
                gamma,
                ..Default::default()
            };
            let plan = config.pad_plan(s.len()).unwrap();
            let plane = forward(&plan.apply(&s).unwrap(), &config.wavelet, config.n_v).unwrap();
            let g = match gamma {
                Gamma::Auto => default_threshold(&plane).unwrap(),
                Gamma::Fixed(v) => v,
            };
            let phase = phase_transform(&plane, g).unwrap();
            let chained = synchrosqueeze(&plane, &phase)
                .unwrap()
                .crop(plan.left, plan.original_len)
                .unwrap();
            let streamed = analyze(&s, &config).unwrap();
            assert_eq!(streamed.gamma, g);
            assert_eq!(streamed.sst.bins, chained.bins);
            assert_eq!(streamed.sst.t.as_slice(), chained.t.as_slice());
            assert!((streamed.sst.t0 - chained.t0).abs() < 1e-12);
        }
    }

    #[test]
    fn denoise_with_zero_threshold_inverts_whole_transform() {
        use crate::cwt::forward;

        let s = chirp(256);
        let config = PipelineConfig {
            n_v: 16,
            gamma: Gamma::Fixed(0.0),
            ..Default::default()
        };
        let plan = config.pad_plan(s.len()).unwrap();
        let plane = forward(&plan.apply(&s).unwrap(), &config.wavelet, config.n_v).unwrap();
        let r_psi = config.wavelet.admissibility_constant().unwrap();
        let weights = reassignment_weights(&plane.scales, config.n_v);
        let (out, gamma) = denoise(&s, &config).unwrap();
        assert_eq!(gamma, 0.0);
        for (c, v) in out.values().iter().enumerate() {
            let m = c + plan.left;
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, w) in weights.iter().enumerate() {
                acc += plane.w[(j, m)] * *w;
            }
            let expect = (2.0 / r_psi * acc).re;
            assert!((v - expect).abs() <= 1e-12, "{v} vs {expect}");
        }
    }
}
