//! Time-series containers, boundary padding, spline resampling, noise and
//! robust statistics.

mod spline;

pub use spline::CubicSpline;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};

/// Uniformly sampled real signal. Sample `m` sits at `t0 + m * dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformSeries {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl UniformSeries {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return invalid(format!("sample spacing must be positive and finite, got {dt}"));
        }
        if !t0.is_finite() {
            return invalid("time origin must be finite");
        }
        if values.is_empty() {
            return invalid("series must contain at least one sample");
        }
        Ok(Self { t0, dt, values })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, m: usize) -> f64 {
        self.t0 + m as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|m| self.time(m)).collect()
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.t0, self.dt, values)
    }

    /// Sub-series of `len` samples starting at sample `start`.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if len == 0 || start + len > self.len() {
            return invalid(format!(
                "window [{start}, {}) outside series of length {}",
                start + len,
                self.len()
            ));
        }
        Self::new(self.time(start), self.dt, self.values[start..start + len].to_vec())
    }
}

/// Irregularly sampled real signal with strictly increasing sample times.
#[derive(Clone, Debug, PartialEq)]
pub struct NonuniformSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl NonuniformSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return invalid(format!(
                "{} sample times but {} values",
                times.len(),
                values.len()
            ));
        }
        if times.len() < 4 {
            return invalid(format!(
                "cubic spline needs at least 4 samples, got {}",
                times.len()
            ));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return invalid("sample times and values must be finite");
        }
        if let Some(w) = times.windows(2).position(|w| w[1] <= w[0]) {
            return invalid(format!(
                "sample times must be strictly increasing (index {})",
                w + 1
            ));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest gap between consecutive sample times.
    pub fn max_gap(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// True when the sample times form a uniform grid to within `rel_tol` of the mean step.
    pub fn uniform_step(&self, rel_tol: f64) -> Option<f64> {
        let n = self.len();
        let step = (self.times[n - 1] - self.times[0]) / (n - 1) as f64;
        let uniform = self
            .times
            .iter()
            .enumerate()
            .all(|(m, &t)| (t - (self.times[0] + m as f64 * step)).abs() <= rel_tol * step);
        uniform.then_some(step)
    }
}

/// Extends `values` by mirror reflection about the edge samples, without
/// repeating them: `[1,2,3]` padded by 2 on each side is `[3,2,1,2,3,2,1]`.
pub fn reflect_extend(values: &[f64], left: usize, right: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if n == 0 {
        return invalid("cannot reflect an empty series");
    }
    if (left > 0 && left >= n) || (right > 0 && right >= n) {
        return invalid(format!(
            "reflection pad ({left}, {right}) must be shorter than the series ({n})"
        ));
    }
    let mut out = Vec::with_capacity(n + left + right);
    out.extend((1..=left).rev().map(|k| values[k]));
    out.extend_from_slice(values);
    out.extend((1..=right).map(|k| values[n - 1 - k]));
    Ok(out)
}

/// Reflect-pads `pad_len` samples on both sides; the time origin moves back
/// by `pad_len * dt`.
pub fn pad_reflect(series: &UniformSeries, pad_len: usize) -> Result<UniformSeries> {
    if pad_len > 0 && pad_len >= series.len() {
        return invalid(format!(
            "pad length {pad_len} must be smaller than the series length {}",
            series.len()
        ));
    }
    let values = reflect_extend(series.values(), pad_len, pad_len)?;
    UniformSeries::new(
        series.t0() - pad_len as f64 * series.dt(),
        series.dt(),
        values,
    )
}

/// Padding applied ahead of the transform, and the window that recovers the
/// original samples afterwards.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PadPlan {
    /// Symmetric reflection applied first.
    pub pad: usize,
    pub left: usize,
    pub right: usize,
    pub original_len: usize,
}

impl PadPlan {
    /// Reflect `pad` samples each side, then keep reflecting until the
    /// length has the form `2^(L+1)` with `L >= 1`.
    pub fn new(original_len: usize, pad: usize) -> Result<Self> {
        if original_len < 2 {
            return invalid(format!(
                "series of length {original_len} is too short to transform"
            ));
        }
        if pad > 0 && pad >= original_len {
            return invalid(format!(
                "pad length {pad} must be smaller than the series length {original_len}"
            ));
        }
        let first = original_len + 2 * pad;
        let target = first.next_power_of_two().max(4);
        let extra = target - first;
        if extra >= first {
            return invalid(format!(
                "series of length {original_len} is too short to extend to {target} samples"
            ));
        }
        let left = pad + extra / 2;
        let right = pad + extra - extra / 2;
        Ok(Self {
            pad,
            left,
            right,
            original_len,
        })
    }

    /// Default plan: half the series length on each side.
    pub fn auto(original_len: usize) -> Result<Self> {
        Self::new(original_len, original_len / 2)
    }

    pub fn padded_len(&self) -> usize {
        self.left + self.original_len + self.right
    }

    pub fn apply(&self, series: &UniformSeries) -> Result<UniformSeries> {
        if series.len() != self.original_len {
            return invalid("pad plan built for a different series length");
        }
        let first = reflect_extend(series.values(), self.pad, self.pad)?;
        let values = reflect_extend(&first, self.left - self.pad, self.right - self.pad)?;
        UniformSeries::new(
            series.t0() - self.left as f64 * series.dt(),
            series.dt(),
            values,
        )
    }
}

/// Resamples onto the uniform grid `times[0] + m * dt` covering
/// `[times[0], times[last]]` through the not-a-knot cubic spline interpolant.
pub fn spline_resample(series: &NonuniformSeries, dt: f64) -> Result<UniformSeries> {
    if !(dt > 0.0) || !dt.is_finite() {
        return invalid(format!("resampling step must be positive, got {dt}"));
    }
    let spline = CubicSpline::not_a_knot(series.times(), series.values())?;
    let t0 = series.times()[0];
    let span = series.times()[series.len() - 1] - t0;
    // Tolerate grids whose last point lands within rounding of the final sample.
    let count = (span / dt * (1.0 + 1e-12) + 1e-9).floor() as usize + 1;
    let values = (0..count)
        .map(|m| spline.eval(t0 + m as f64 * dt))
        .collect();
    UniformSeries::new(t0, dt, values)
}

/// Adds i.i.d. zero-mean Gaussian noise of standard deviation `sigma`, drawn
/// deterministically from `seed`.
pub fn add_white_noise(series: &UniformSeries, sigma: f64, seed: u64) -> Result<UniformSeries> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return invalid(format!("noise level must be non-negative, got {sigma}"));
    }
    if sigma == 0.0 {
        return Ok(series.clone());
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| crate::SynsqError::InvalidArgument(e.to_string()))?;
    let mut rng = StdRng::seed_from_u64(seed);
    let values = series
        .values()
        .iter()
        .map(|v| v + normal.sample(&mut rng))
        .collect();
    series.with_values(values)
}

/// Median; even-length input averages the two central order statistics.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return invalid("median of an empty list");
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Median absolute deviation from the median.
pub fn mad(values: &[f64]) -> Result<f64> {
    let center = median(values)?;
    let deviations: Vec<f64> = values.iter().map(|v| (v - center).abs()).collect();
    median(&deviations)
}

/// Ratio between the MAD and the standard deviation of a Gaussian.
pub const MAD_TO_SIGMA: f64 = 1.4826;
