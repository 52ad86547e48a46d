//! Log-spaced frequency divisions and the reassignment of CWT coefficients
//! into them.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::cwt::{octaves_for_len, CwtPlane};
use crate::error::{invalid, Result};
use crate::grid::Matrix;
use crate::phase::PhasePlane;
use crate::wavelets::WaveletSpec;

/// Geometric frequency grid `w_l = 2^(l * step) * w_min`, `l = 0..count`,
/// running from `1 / (n dt)` to the Nyquist frequency `1 / (2 dt)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyBins {
    pub w_min: f64,
    pub w_max: f64,
    /// `log2` spacing between neighbouring bins.
    pub step: f64,
    pub count: usize,
}

impl FrequencyBins {
    pub fn new(n: usize, count: usize, dt: f64) -> Result<Self> {
        octaves_for_len(n)?;
        if count < 2 {
            return invalid(format!("need at least two frequency bins, got {count}"));
        }
        if !(dt > 0.0) {
            return invalid(format!("time step must be positive, got {dt}"));
        }
        Ok(Self {
            w_min: 1.0 / (n as f64 * dt),
            w_max: 1.0 / (2.0 * dt),
            step: (n as f64 / 2.0).log2() / (count - 1) as f64,
            count,
        })
    }

    pub fn frequency(&self, l: usize) -> f64 {
        if l + 1 == self.count {
            return self.w_max;
        }
        self.w_min * 2f64.powf(l as f64 * self.step)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.count).map(|l| self.frequency(l)).collect()
    }

    /// Nearest log-spaced bin, clamped to the grid. Ties round away from zero.
    pub fn index(&self, omega: f64) -> Result<usize> {
        if !(omega > 0.0) || !omega.is_finite() {
            return invalid(format!("frequency must be positive and finite, got {omega}"));
        }
        Ok(self.index_unchecked(omega))
    }

    pub(crate) fn index_unchecked(&self, omega: f64) -> usize {
        let pos = ((omega / self.w_min).log2() / self.step).round();
        pos.clamp(0.0, (self.count - 1) as f64) as usize
    }
}

/// `frequency_bins(n, n_a, dt)` as a plain list.
pub fn frequency_bins(n: usize, n_a: usize, dt: f64) -> Result<Vec<f64>> {
    Ok(FrequencyBins::new(n, n_a, dt)?.frequencies())
}

/// Synchrosqueezed coefficients on the `(frequency bin, time)` grid, plus
/// what inversion needs to know about the analysis.
#[derive(Clone, Debug)]
pub struct SstPlane {
    pub bins: FrequencyBins,
    pub t0: f64,
    pub dt: f64,
    pub n_v: usize,
    pub wavelet: WaveletSpec,
    pub t: Matrix<Complex64>,
}

impl SstPlane {
    pub fn freqs(&self) -> Vec<f64> {
        self.bins.frequencies()
    }

    pub fn len(&self) -> usize {
        self.t.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.t.cols() == 0
    }

    pub fn n_bins(&self) -> usize {
        self.t.rows()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|m| self.t0 + m as f64 * self.dt).collect()
    }

    /// Keeps the time columns `[start, start + len)`.
    pub fn crop(&self, start: usize, len: usize) -> Result<SstPlane> {
        if len == 0 || start + len > self.len() {
            return invalid(format!(
                "crop window [{start}, {}) outside {} columns",
                start + len,
                self.len()
            ));
        }
        Ok(SstPlane {
            t0: self.t0 + start as f64 * self.dt,
            t: self.t.columns(start, len),
            wavelet: self.wavelet.clone(),
            ..*self
        })
    }

    /// Same plane with new coefficients.
    pub fn with_coefficients(&self, t: Matrix<Complex64>) -> Result<SstPlane> {
        if t.shape() != self.t.shape() {
            return invalid("coefficient matrix shape differs from the plane");
        }
        Ok(SstPlane {
            t,
            wavelet: self.wavelet.clone(),
            ..*self
        })
    }

    pub fn magnitudes(&self) -> Matrix<f64> {
        self.t.map(|c| c.norm())
    }
}

/// `(ln 2 / n_v) a_j^(-1/2)` for every scale.
pub fn reassignment_weights(scales: &[f64], n_v: usize) -> Vec<f64> {
    scales.iter().map(|a| LN_2 / n_v as f64 / a.sqrt()).collect()
}

/// Reassigns every unmasked coefficient `W(a_j, t_m)` to the bin of
/// `omega(a_j, t_m)`, weighted by `(ln 2 / n_v) a_j^(-1/2)`.
///
/// Columns are independent and run in parallel; within a column scales are
/// accumulated in ascending order so the result does not depend on the
/// worker count.
pub fn synchrosqueeze(cwt: &CwtPlane, phase: &PhasePlane) -> Result<SstPlane> {
    if phase.omega.shape() != cwt.w.shape() || phase.mask.shape() != cwt.w.shape() {
        return invalid("phase plane shape differs from the CWT plane");
    }
    let (n_scales, n) = cwt.w.shape();
    let bins = FrequencyBins::new(n, n_scales, cwt.dt)?;
    let weights = reassignment_weights(&cwt.scales, cwt.n_v);

    let columns: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|m| {
            let mut column = vec![Complex64::new(0.0, 0.0); bins.count];
            for (j, weight) in weights.iter().enumerate() {
                if !phase.mask[(j, m)] {
                    continue;
                }
                let l = bins.index_unchecked(phase.omega[(j, m)]);
                column[l] += cwt.w[(j, m)] * weight;
            }
            column
        })
        .collect();

    let mut t = Matrix::filled(bins.count, n, Complex64::new(0.0, 0.0));
    for (m, column) in columns.into_iter().enumerate() {
        for (l, v) in column.into_iter().enumerate() {
            t[(l, m)] = v;
        }
    }
    Ok(SstPlane {
        bins,
        t0: cwt.t0,
        dt: cwt.dt,
        n_v: cwt.n_v,
        wavelet: cwt.wavelet.clone(),
        t,
    })
}
