//! FFT-based forward CWT on the dyadic-log scale grid, with the time
//! derivative of the coefficients computed spectrally.
//!
//! Frequencies are cyclic and physical: bin `m` sits at `m / (n dt)` for
//! `m <= n/2` and wraps to negative frequencies above that. The wavelets are
//! one-sided, so the negative half of every multiplier vanishes.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};
use crate::grid::Matrix;
use crate::signal::UniformSeries;
use crate::wavelets::WaveletSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Wavelet coefficients `W` and their time derivative `dW` on the
/// `(scale, time)` grid.
#[derive(Clone, Debug)]
pub struct CwtPlane {
    pub scales: Vec<f64>,
    pub t0: f64,
    pub dt: f64,
    pub n_v: usize,
    pub wavelet: WaveletSpec,
    pub w: Matrix<Complex64>,
    pub dw: Matrix<Complex64>,
}

impl CwtPlane {
    pub fn len(&self) -> usize {
        self.w.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.w.cols() == 0
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|m| self.t0 + m as f64 * self.dt).collect()
    }

    /// Number of octaves `L`, from `n = 2^(L+1)`.
    pub fn octaves(&self) -> usize {
        self.scales.len() / self.n_v
    }
}

/// `L` such that `n = 2^(L+1)` with `L >= 1`.
pub fn octaves_for_len(n: usize) -> Result<usize> {
    if n < 4 || !n.is_power_of_two() {
        return invalid(format!(
            "transform length must be 2^(L+1) with L >= 1, got {n}"
        ));
    }
    Ok(n.trailing_zeros() as usize - 1)
}

/// Scales `a_j = 2^(j / n_v) * dt` for `j = 1..=L * n_v`.
pub fn scale_grid(n: usize, n_v: usize, dt: f64) -> Result<Vec<f64>> {
    let octaves = octaves_for_len(n)?;
    if n_v == 0 {
        return invalid("voices per octave must be at least 1");
    }
    if !(dt > 0.0) {
        return invalid(format!("time step must be positive, got {dt}"));
    }
    Ok((1..=octaves * n_v)
        .map(|j| 2f64.powf(j as f64 / n_v as f64) * dt)
        .collect())
}

/// Signed cyclic frequency of DFT bin `m` in cycles per sample.
fn bin_frequency(m: usize, n: usize) -> f64 {
    if m <= n / 2 {
        m as f64 / n as f64
    } else {
        m as f64 / n as f64 - 1.0
    }
}

/// Spectrum of one series plus an inverse FFT plan, for evaluating CWT
/// rows one scale at a time.
pub struct RowTransform {
    scales: Vec<f64>,
    spectrum: Vec<Complex64>,
    inverse: Arc<dyn Fft<f64>>,
    spec: WaveletSpec,
    dt: f64,
}

impl RowTransform {
    pub fn new(series: &UniformSeries, spec: &WaveletSpec, n_v: usize) -> Result<Self> {
        let n = series.len();
        let dt = series.dt();
        let scales = scale_grid(n, n_v, dt)?;
        let mut planner = FftPlanner::<f64>::new();
        let mut spectrum: Vec<Complex64> = series
            .values()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        planner.plan_fft_forward(n).process(&mut spectrum);
        Ok(Self {
            scales,
            spectrum,
            inverse: planner.plan_fft_inverse(n),
            spec: spec.clone(),
            dt,
        })
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.spectrum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectrum.is_empty()
    }

    /// `W` and `dW` at scale index `j`.
    pub fn row(&self, j: usize) -> CwtRow {
        let n = self.len();
        let scale = self.scales[j];
        let inv_n = 1.0 / n as f64;
        let root = scale.sqrt();
        let mut w = vec![ZERO; n];
        let mut dw = vec![ZERO; n];
        for m in 0..=n / 2 {
            let xi = bin_frequency(m, n) / self.dt;
            let psi = self.spec.eval_fourier(scale * xi);
            if psi == ZERO {
                continue;
            }
            let c = self.spectrum[m] * (root * inv_n) * psi.conj();
            w[m] = c;
            dw[m] = Complex64::new(0.0, 2.0 * PI * xi) * c;
        }
        let mut scratch = vec![ZERO; self.inverse.get_inplace_scratch_len()];
        self.inverse.process_with_scratch(&mut w, &mut scratch);
        self.inverse.process_with_scratch(&mut dw, &mut scratch);
        CwtRow { w, dw }
    }
}

/// Forward CWT of a series of length `2^(L+1)`. Scales are processed in
/// parallel; each row's result depends only on its own scale.
pub fn forward(series: &UniformSeries, spec: &WaveletSpec, n_v: usize) -> Result<CwtPlane> {
    let rt = RowTransform::new(series, spec, n_v)?;
    let rows: Vec<CwtRow> = (0..rt.scales().len())
        .into_par_iter()
        .map(|j| rt.row(j))
        .collect();
    let (w_rows, d_rows): (Vec<_>, Vec<_>) = rows.into_iter().map(|r| (r.w, r.dw)).unzip();
    Ok(CwtPlane {
        scales: rt.scales,
        t0: series.t0(),
        dt: series.dt(),
        n_v,
        wavelet: spec.clone(),
        w: Matrix::from_rows(w_rows),
        dw: Matrix::from_rows(d_rows),
    })
}

/// One row of the CWT and of its time derivative.
#[derive(Clone, Debug)]
pub struct CwtRow {
    pub w: Vec<Complex64>,
    pub dw: Vec<Complex64>,
}

/// Reference evaluation of one CWT row by explicit `O(n^2)` DFT sums.
pub fn cwt_direct_dft(series: &UniformSeries, spec: &WaveletSpec, scale: f64) -> Result<CwtRow> {
    let n = series.len();
    octaves_for_len(n)?;
    let dt = series.dt();
    let f = series.values();

    // Exact twiddles indexed by (k * m) mod n.
    let twiddle: Vec<Complex64> = (0..n)
        .map(|r| Complex64::from_polar(1.0, -2.0 * PI * r as f64 / n as f64))
        .collect();

    let spectrum: Vec<Complex64> = (0..n)
        .map(|k| {
            (0..n)
                .map(|m| twiddle[(k * m) % n] * f[m])
                .sum::<Complex64>()
        })
        .collect();

    let mut mult_w = vec![ZERO; n];
    let mut mult_d = vec![ZERO; n];
    for k in 0..n {
        let cycles = if 2 * k <= n { k as f64 } else { k as f64 - n as f64 };
        let xi = cycles / (n as f64 * dt);
        let psi = scale.sqrt() * spec.eval_fourier(scale * xi).conj();
        mult_w[k] = spectrum[k] * psi;
        mult_d[k] = spectrum[k] * psi * Complex64::new(0.0, 2.0 * PI * xi);
    }

    let inverse = |coeffs: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|m| {
                (0..n)
                    .map(|k| coeffs[k] * twiddle[(k * m) % n].conj())
                    .sum::<Complex64>()
                    / n as f64
            })
            .collect()
    };
    Ok(CwtRow {
        w: inverse(&mult_w),
        dw: inverse(&mult_d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelets::WaveletKind;

    #[test]
    fn scale_grid_examples() {
        let s = scale_grid(8, 2, 1.0).unwrap();
        let expect = [2f64.sqrt(), 2.0, 2f64.powf(1.5), 4.0];
        assert_eq!(s.len(), 4);
        for (a, b) in s.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(scale_grid(4, 1, 0.5).unwrap(), vec![1.0]);
        assert_eq!(scale_grid(1024, 32, 0.1).unwrap().len(), 9 * 32);
    }

    #[test]
    fn scale_grid_rejects_bad_lengths() {
        for n in [0, 1, 2, 3, 6, 100] {
            assert!(scale_grid(n, 4, 1.0).is_err(), "n={n}");
        }
        assert!(scale_grid(8, 0, 1.0).is_err());
    }

    #[test]
    fn forward_of_zero_is_zero() {
        let s = UniformSeries::new(0.0, 0.01, vec![0.0; 64]).unwrap();
        let plane = forward(&s, &WaveletSpec::default(), 8).unwrap();
        assert_eq!(plane.w.shape(), (5 * 8, 64));
        assert_eq!(plane.dw.shape(), (5 * 8, 64));
        assert!(plane.w.as_slice().iter().all(|c| *c == ZERO));
        assert!(plane.dw.as_slice().iter().all(|c| *c == ZERO));
    }

    #[test]
    fn constant_input_is_annihilated() {
        let s = UniformSeries::new(0.0, 1.0, vec![3.7; 256]).unwrap();
        for kind in [WaveletKind::Bump, WaveletKind::MexicanHat, WaveletKind::Morlet] {
            let plane = forward(&s, &WaveletSpec::default_for(kind), 4).unwrap();
            let worst = plane.w.as_slice().iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(worst <= 1e-10, "{kind}: {worst}");
        }
    }

    #[test]
    fn pure_tone_has_constant_magnitude_rows() {
        let n = 1024;
        let dt = 1.0 / 1024.0;
        let alpha = 50.0;
        let values = (0..n).map(|m| (2.0 * PI * alpha * m as f64 * dt).cos()).collect();
        let s = UniformSeries::new(0.0, dt, values).unwrap();
        let spec = WaveletSpec::default();
        let plane = forward(&s, &spec, 16).unwrap();
        let mut best = (0, 0.0);
        for (j, row) in plane.w.iter_rows().enumerate() {
            let mags: Vec<f64> = row.iter().map(|c| c.norm()).collect();
            let max = mags.iter().cloned().fold(0.0, f64::max);
            let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(max - min <= 1e-9 * max.max(1.0), "row {j} not constant");
            if max > best.1 {
                best = (j, max);
            }
        }
        let expected_scale = spec.center() / alpha;
        let ratio = plane.scales[best.0] / expected_scale;
        assert!((ratio.log2()).abs() <= 1.0 / 16.0 + 1e-9, "ratio {ratio}");
    }

    #[test]
    fn impulse_response_row() {
        let n = 32;
        let mut values = vec![0.0; n];
        values[0] = 1.0;
        let s = UniformSeries::new(0.0, 0.5, values).unwrap();
        let spec = WaveletSpec::default();
        let scale = 2.0;
        let row = cwt_direct_dft(&s, &spec, scale).unwrap();
        // With a unit impulse the spectrum is all ones, so the row is the
        // inverse DFT of the multiplier itself.
        for m in 0..n {
            let mut acc = ZERO;
            for k in 0..=n / 2 {
                let xi = k as f64 / (n as f64 * 0.5);
                let c = scale.sqrt() * spec.eval_fourier(scale * xi).conj();
                acc += c * Complex64::from_polar(1.0, 2.0 * PI * (k * m) as f64 / n as f64);
            }
            acc /= n as f64;
            assert!((row.w[m] - acc).norm() < 1e-14);
        }
    }
}
