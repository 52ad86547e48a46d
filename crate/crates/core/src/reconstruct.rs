//! Ridge extraction on the synchrosqueezed plane and band-limited inversion
//! back to time-domain components.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{invalid, Result, SynsqError};
use crate::grid::Matrix;
use crate::signal::UniformSeries;
use crate::squeeze::SstPlane;

/// One bin index per time column, and how many bins on either side of it
/// belong to the component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ridge {
    pub bin_path: Vec<usize>,
    pub band_halfwidth: usize,
}

impl Ridge {
    pub fn frequencies(&self, sst: &SstPlane) -> Vec<f64> {
        self.bin_path.iter().map(|&l| sst.bins.frequency(l)).collect()
    }

    pub fn with_band_halfwidth(mut self, band_halfwidth: usize) -> Self {
        self.band_halfwidth = band_halfwidth;
        self
    }

    fn band(&self, m: usize, n_bins: usize) -> RangeInclusive<usize> {
        let center = self.bin_path[m];
        center.saturating_sub(self.band_halfwidth)..=(center + self.band_halfwidth).min(n_bins - 1)
    }
}

/// Four bins at 32 voices per octave, proportionally for other voice counts.
pub fn default_band_halfwidth(n_v: usize) -> usize {
    ((4 * n_v + 16) / 32).max(1)
}

/// Default cap on the per-column bin jump.
pub const DEFAULT_JUMP_CAP: usize = 3;

/// Path maximising `sum |T(l_m, m)|^2 - smoothness * sum (l_{m+1} - l_m)^2`
/// subject to `|l_{m+1} - l_m| <= jump_cap`, by dynamic programming over
/// the columns. Ties go to the lower bin.
pub fn extract_ridge(sst: &SstPlane, smoothness: f64, jump_cap: usize) -> Result<Ridge> {
    let energy = sst.t.map(|c| c.norm_sqr());
    let bin_path = best_path(&energy, smoothness, jump_cap)?;
    Ok(Ridge {
        bin_path,
        band_halfwidth: default_band_halfwidth(sst.n_v),
    })
}

/// Extracts `count` ridges by repeatedly taking the best path and zeroing
/// its band before searching again.
///
/// Peeled paths may hop between components where their energies cross, so
/// the bins found in each column are sorted and the `k`-th ridge returned
/// is the `k`-th lowest in every column. Ridges come back in ascending
/// frequency order.
pub fn extract_ridges(
    sst: &SstPlane,
    count: usize,
    smoothness: f64,
    jump_cap: usize,
    band_halfwidth: usize,
) -> Result<Vec<Ridge>> {
    let last = sst.n_bins().saturating_sub(1);
    extract_ridges_in(sst, 0..=last, count, smoothness, jump_cap, band_halfwidth)
}

/// [`extract_ridges`] restricted to the bins in `rows`. Returned paths use
/// indices of the full plane.
pub fn extract_ridges_in(
    sst: &SstPlane,
    rows: RangeInclusive<usize>,
    count: usize,
    smoothness: f64,
    jump_cap: usize,
    band_halfwidth: usize,
) -> Result<Vec<Ridge>> {
    if rows.is_empty() || *rows.end() >= sst.n_bins() {
        return invalid(format!(
            "bin window {rows:?} does not fit a plane with {} bins",
            sst.n_bins()
        ));
    }
    let offset = *rows.start();
    let n_bins = rows.end() - offset + 1;
    let cols = sst.len();
    let mut energy = Matrix::filled(n_bins, cols, 0.0);
    for l in 0..n_bins {
        for (e, c) in energy.row_mut(l).iter_mut().zip(sst.t.row(l + offset)) {
            *e = c.norm_sqr();
        }
    }
    let mut paths = Vec::with_capacity(count);
    for _ in 0..count {
        let path = best_path(&energy, smoothness, jump_cap)?;
        for (m, &center) in path.iter().enumerate() {
            let lo = center.saturating_sub(band_halfwidth);
            let hi = (center + band_halfwidth).min(n_bins - 1);
            for l in lo..=hi {
                energy[(l, m)] = 0.0;
            }
        }
        paths.push(path);
    }
    for m in 0..cols {
        let mut column: Vec<usize> = paths.iter().map(|p| p[m]).collect();
        column.sort_unstable();
        for (path, l) in paths.iter_mut().zip(column) {
            path[m] = l;
        }
    }
    Ok(paths
        .into_iter()
        .map(|path| Ridge {
            bin_path: path.into_iter().map(|l| l + offset).collect(),
            band_halfwidth,
        })
        .collect())
}

/// Dynamic-programming core of [`extract_ridge`], exposed for testing
/// against brute force.
pub fn best_path(energy: &Matrix<f64>, smoothness: f64, jump_cap: usize) -> Result<Vec<usize>> {
    if !(smoothness >= 0.0) {
        return invalid(format!("smoothness must be non-negative, got {smoothness}"));
    }
    if jump_cap == 0 {
        return invalid("jump cap must be at least 1");
    }
    let (n_bins, n) = energy.shape();
    if n_bins == 0 || n == 0 || energy.as_slice().iter().all(|&e| e == 0.0) {
        return Err(SynsqError::NoRidge);
    }
    let penalty = |d: usize| {
        if d == 0 {
            0.0
        } else {
            smoothness * (d * d) as f64
        }
    };

    let mut score: Vec<f64> = (0..n_bins).map(|l| energy[(l, 0)]).collect();
    let mut back = Matrix::filled(n_bins, n, 0usize);
    let mut next = vec![0.0; n_bins];
    for m in 1..n {
        for l in 0..n_bins {
            let lo = l.saturating_sub(jump_cap);
            let hi = (l + jump_cap).min(n_bins - 1);
            let mut best = f64::NEG_INFINITY;
            let mut arg = lo;
            for (prev, &prev_score) in score.iter().enumerate().take(hi + 1).skip(lo) {
                let s = prev_score - penalty(l.abs_diff(prev));
                if s > best {
                    best = s;
                    arg = prev;
                }
            }
            next[l] = energy[(l, m)] + best;
            back[(l, m)] = arg;
        }
        std::mem::swap(&mut score, &mut next);
    }

    let mut l = 0;
    for (cand, &s) in score.iter().enumerate() {
        if s > score[l] {
            l = cand;
        }
    }
    let mut path = vec![0; n];
    for m in (0..n).rev() {
        path[m] = l;
        if m > 0 {
            l = back[(l, m)];
        }
    }
    Ok(path)
}

/// Objective value of a path under the ridge criterion.
pub fn path_score(energy: &Matrix<f64>, path: &[usize], smoothness: f64) -> f64 {
    let gain: f64 = path.iter().enumerate().map(|(m, &l)| energy[(l, m)]).sum();
    let cost: f64 = path
        .windows(2)
        .map(|w| {
            let d = w[0].abs_diff(w[1]);
            if d == 0 {
                0.0
            } else {
                smoothness * (d * d) as f64
            }
        })
        .sum();
    gain - cost
}

fn invert_rows(
    sst: &SstPlane,
    r_psi: Complex64,
    rows: impl Fn(usize) -> RangeInclusive<usize> + Sync,
    keep: impl Fn(usize, usize) -> bool + Sync,
) -> Result<UniformSeries> {
    if r_psi.norm() == 0.0 || !r_psi.re.is_finite() || !r_psi.im.is_finite() {
        return invalid("admissibility constant must be finite and non-zero");
    }
    let scale = 2.0 / r_psi;
    let values: Vec<f64> = (0..sst.len())
        .into_par_iter()
        .map(|m| {
            let sum: Complex64 = rows(m).filter(|&l| keep(l, m)).map(|l| sst.t[(l, m)]).sum();
            (scale * sum).re
        })
        .collect();
    UniformSeries::new(sst.t0, sst.dt, values)
}

/// `f_k(t_m) = Re(2 / R_psi * sum of T over the ridge band at t_m)`.
pub fn invert_band(sst: &SstPlane, ridge: &Ridge, r_psi: Complex64) -> Result<UniformSeries> {
    if ridge.bin_path.len() != sst.len() {
        return invalid(format!(
            "ridge covers {} columns, plane has {}",
            ridge.bin_path.len(),
            sst.len()
        ));
    }
    if ridge.bin_path.iter().any(|&l| l >= sst.n_bins()) {
        return invalid("ridge bin outside the frequency grid");
    }
    let n_bins = sst.n_bins();
    invert_rows(sst, r_psi, |m| ridge.band(m, n_bins), |_, _| true)
}

/// Inverts several ridges at once with disjoint bands: a bin inside more
/// than one band goes to the ridge whose path is closest, and ties go to
/// the earlier ridge.
pub fn invert_partition(
    sst: &SstPlane,
    ridges: &[Ridge],
    r_psi: Complex64,
) -> Result<Vec<UniformSeries>> {
    for ridge in ridges {
        if ridge.bin_path.len() != sst.len() || ridge.bin_path.iter().any(|&l| l >= sst.n_bins()) {
            return invalid("ridge does not fit the plane");
        }
    }
    let n_bins = sst.n_bins();
    let owner = |l: usize, m: usize| {
        ridges
            .iter()
            .enumerate()
            .filter(|(_, r)| r.band(m, n_bins).contains(&l))
            .min_by_key(|(_, r)| l.abs_diff(r.bin_path[m]))
            .map(|(k, _)| k)
    };
    (0..ridges.len())
        .map(|k| {
            let ridge = &ridges[k];
            invert_rows(sst, r_psi, |m| ridge.band(m, n_bins), |l, m| owner(l, m) == Some(k))
        })
        .collect()
}

/// Inversion over the whole frequency axis.
pub fn invert_all(sst: &SstPlane, r_psi: Complex64) -> Result<UniformSeries> {
    let last = sst.n_bins() - 1;
    invert_rows(sst, r_psi, |_| 0..=last, |_, _| true)
}

/// Result of inverting over a fixed frequency interval.
#[derive(Clone, Debug)]
pub struct BandInversion {
    pub series: UniformSeries,
    /// Effective interval after clamping to the plane's frequency range.
    pub lo: f64,
    pub hi: f64,
    pub clamped: bool,
}

/// Inverts over every bin whose centre frequency lies in `[lo, hi]`,
/// clamping the interval to the plane's range.
pub fn invert_frequency_band(
    sst: &SstPlane,
    lo: f64,
    hi: f64,
    r_psi: Complex64,
) -> Result<BandInversion> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return invalid(format!("frequency band [{lo}, {hi}] is empty or not finite"));
    }
    let (w_min, w_max) = (sst.bins.w_min, sst.bins.w_max);
    let clamped = lo < w_min || hi > w_max;
    let (clo, chi) = (lo.clamp(w_min, w_max), hi.clamp(w_min, w_max));
    let freqs = sst.freqs();
    let first = freqs.iter().position(|&f| f >= clo * (1.0 - 1e-12));
    let last = freqs.iter().rposition(|&f| f <= chi * (1.0 + 1e-12));
    let series = match (first, last) {
        (Some(a), Some(b)) if a <= b => invert_rows(sst, r_psi, |_| a..=b, |_, _| true)?,
        _ => UniformSeries::new(sst.t0, sst.dt, vec![0.0; sst.len()])?,
    };
    Ok(BandInversion {
        series,
        lo: clo,
        hi: chi,
        clamped,
    })
}
