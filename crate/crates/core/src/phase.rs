//! Phase transform and coefficient masking.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::cwt::CwtPlane;
use crate::error::{invalid, Result};
use crate::grid::Matrix;
use crate::signal::{mad, MAD_TO_SIGMA};

/// Marker stored where the phase transform is not defined.
pub const MASKED: f64 = f64::NAN;

/// Instantaneous-frequency estimates `omega` on the CWT grid and the mask of
/// coefficients on which they can be trusted.
#[derive(Clone, Debug)]
pub struct PhasePlane {
    pub omega: Matrix<f64>,
    pub mask: Matrix<bool>,
    pub gamma: f64,
}

impl PhasePlane {
    pub fn masked_count(&self) -> usize {
        self.mask.as_slice().iter().filter(|&&m| m).count()
    }
}

/// `1.4826 * sqrt(2 ln n) * MAD(|W|)` over the first octave (the `n_v`
/// smallest scales).
pub fn default_threshold(plane: &CwtPlane) -> Result<f64> {
    let rows = plane.n_v.min(plane.w.rows());
    let finest: Vec<&[Complex64]> = (0..rows).map(|j| plane.w.row(j)).collect();
    universal_threshold(&finest)
}

/// The threshold of [`default_threshold`] computed from the finest rows
/// directly; `n` is the row length.
pub fn universal_threshold(finest: &[&[Complex64]]) -> Result<f64> {
    let n = finest.first().map_or(0, |r| r.len());
    if n == 0 {
        return invalid("threshold needs at least one scale row");
    }
    let magnitudes: Vec<f64> = finest
        .iter()
        .flat_map(|row| row.iter().map(|c| c.norm()))
        .collect();
    Ok(MAD_TO_SIGMA * (2.0 * (n as f64).ln()).sqrt() * mad(&magnitudes)?)
}

/// Phase-transform value of one coefficient, or `None` where it is masked:
/// `|W| <= gamma`, or an estimate that is non-positive or not finite.
#[inline]
pub fn omega_at(w: Complex64, dw: Complex64, gamma: f64) -> Option<f64> {
    let power = w.norm_sqr();
    if !(power.sqrt() > gamma) {
        return None;
    }
    // Im(dW conj(W)) / |W|^2 avoids forming the quotient directly.
    let value = (dw * w.conj()).im / (2.0 * PI * power);
    (value.is_finite() && value > 0.0).then_some(value)
}

/// `omega = Im(dW / W) / (2 pi)` wherever `|W| > gamma`. Entries whose
/// estimate is non-positive or non-finite are masked out as well.
pub fn phase_transform(plane: &CwtPlane, gamma: f64) -> Result<PhasePlane> {
    if !(gamma >= 0.0) {
        return invalid(format!("threshold must be non-negative, got {gamma}"));
    }
    let (rows, cols) = plane.w.shape();
    let mut omega = Matrix::filled(rows, cols, MASKED);
    let mut mask = Matrix::filled(rows, cols, false);
    for (idx, (w, dw)) in plane
        .w
        .as_slice()
        .iter()
        .zip(plane.dw.as_slice())
        .enumerate()
    {
        if let Some(value) = omega_at(*w, *dw, gamma) {
            omega.as_mut_slice()[idx] = value;
            mask.as_mut_slice()[idx] = true;
        }
    }
    Ok(PhasePlane { omega, mask, gamma })
}
