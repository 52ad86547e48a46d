//! Synthetic intrinsic-mode-type signals with exact instantaneous
//! frequencies and amplitudes.
//!
//! Phases are stored in cycles, so every component is
//! `A(t) cos(2 pi phi(t))` and `phi'(t)` is in cycles per time unit. Formulas
//! written with a raw radian argument are divided by `2 pi` on the way in.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{invalid, Result};
use crate::signal::{add_white_noise, NonuniformSeries, UniformSeries};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Ground truth for one component.
#[derive(Clone)]
pub struct ComponentTruth {
    pub name: &'static str,
    pub amplitude: RealFn,
    /// Phase in cycles.
    pub phase: RealFn,
    /// Exact derivative of `phase`.
    pub if_curve: RealFn,
}

impl fmt::Debug for ComponentTruth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComponentTruth").field("name", &self.name).finish()
    }
}

impl ComponentTruth {
    fn new(
        name: &'static str,
        amplitude: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phase: impl Fn(f64) -> f64 + Send + Sync + 'static,
        if_curve: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name,
            amplitude: Arc::new(amplitude),
            phase: Arc::new(phase),
            if_curve: Arc::new(if_curve),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.amplitude)(t) * (2.0 * PI * (self.phase)(t)).cos()
    }

    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        (self.if_curve)(t)
    }

    pub fn sample(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&t| self.eval(t)).collect()
    }
}

/// Sum of the components at `t`.
pub fn superpose(components: &[ComponentTruth], t: f64) -> f64 {
    components.iter().map(|c| c.eval(t)).sum()
}

/// Smallest `(phi'_k - phi'_{k-1}) / (phi'_k + phi'_{k-1})` over `times`,
/// with components ordered by their mean instantaneous frequency.
pub fn separation(components: &[ComponentTruth], times: &[f64]) -> f64 {
    let mut order: Vec<&ComponentTruth> = components.iter().collect();
    let mean_if = |c: &ComponentTruth| {
        times.iter().map(|&t| c.instantaneous_frequency(t)).sum::<f64>() / times.len() as f64
    };
    order.sort_by(|a, b| mean_if(a).total_cmp(&mean_if(b)));
    let mut worst = f64::INFINITY;
    for pair in order.windows(2) {
        for &t in times {
            let (lo, hi) = (
                pair[0].instantaneous_frequency(t),
                pair[1].instantaneous_frequency(t),
            );
            worst = worst.min((hi - lo) / (hi + lo));
        }
    }
    worst
}

fn uniform_grid(n: usize, span: f64) -> (f64, Vec<f64>) {
    let dt = span / n as f64;
    (dt, (0..n).map(|m| m as f64 * dt).collect())
}

fn sample_uniform(n: usize, components: &[ComponentTruth]) -> Result<UniformSeries> {
    let (dt, times) = uniform_grid(n, 10.0);
    UniformSeries::new(0.0, dt, times.iter().map(|&t| superpose(components, t)).collect())
}

/// The chirp `(1 + 0.6 cos 2t) cos(4 pi t + 1.2 t^2)` on `[0, 10)`.
///
/// The argument is read as radians, so the instantaneous frequency is
/// `2 + 1.2 t / pi` cycles per unit time.
pub fn gen_fig1(n: usize) -> Result<(UniformSeries, ComponentTruth)> {
    if n < 64 {
        return invalid(format!("need at least 64 samples, got {n}"));
    }
    let truth = ComponentTruth::new(
        "chirp",
        |t| 1.0 + 0.6 * (2.0 * t).cos(),
        |t| 2.0 * t + 0.6 * t * t / PI,
        |t| 2.0 + 1.2 * t / PI,
    );
    let series = sample_uniform(n, std::slice::from_ref(&truth))?;
    Ok((series, truth))
}

/// The three AM/FM components `s1`, `s2`, `s3`.
pub fn s123_components() -> Vec<ComponentTruth> {
    vec![
        ComponentTruth::new(
            "s1",
            |t| 1.0 + 0.2 * t.cos(),
            |t| 2.0 * t + 0.3 * t.cos(),
            |t| 2.0 - 0.3 * t.sin(),
        ),
        ComponentTruth::new(
            "s2",
            |t| (1.0 + 0.3 * (2.0 * t).cos()) * (-t / 15.0).exp(),
            |t| 2.4 * t + 0.5 * t.powf(1.2) + 0.3 * t.sin(),
            |t| 2.4 + 0.6 * t.powf(0.2) + 0.3 * t.cos(),
        ),
        ComponentTruth::new(
            "s3",
            |_| 1.0,
            |t| 5.3 * t + 0.2 * t.powf(1.3),
            |t| 5.3 + 0.26 * t.powf(0.3),
        ),
    ]
}

/// `s1 + s2 + s3` on `[0, 10)` with optional white noise of standard
/// deviation `sigma`.
pub fn gen_s123(n: usize, sigma: f64, seed: u64) -> Result<(UniformSeries, Vec<ComponentTruth>)> {
    if n < 64 {
        return invalid(format!("need at least 64 samples, got {n}"));
    }
    let components = s123_components();
    let clean = sample_uniform(n, &components)?;
    Ok((add_white_noise(&clean, sigma, seed)?, components))
}

/// The three components of the irregular-sampling experiment.
pub fn nonuniform_components() -> Vec<ComponentTruth> {
    vec![
        ComponentTruth::new(
            "f1",
            |t| 1.0 + 0.5 * t.cos(),
            |t| 2.0 * t,
            |_| 2.0,
        ),
        ComponentTruth::new(
            "f2",
            |t| 2.0 * (-0.1 * t).exp(),
            |t| 3.0 * t + 0.25 * (1.4 * t).sin(),
            |t| 3.0 + 0.35 * (1.4 * t).cos(),
        ),
        ComponentTruth::new(
            "f3",
            |t| 1.0 + 0.5 * (2.5 * t).cos(),
            |t| 5.0 * t + 2.0 * t.powf(1.3),
            |t| 5.0 + 2.6 * t.powf(0.3),
        ),
    ]
}

/// Base step and jitter of the perturbed sample times.
pub const NONUNIFORM_STEP: f64 = 11.0 / 300.0;
pub const NONUNIFORM_JITTER: f64 = 11.0 / 310.0;

/// Samples at `t'_m = step * m + jitter * u_m`, `u_m ~ U[0, 1]`, for every
/// `m` with `step * m <= 10`.
pub fn gen_nonuniform(seed: u64) -> Result<(NonuniformSeries, Vec<ComponentTruth>)> {
    let components = nonuniform_components();
    let mut rng = StdRng::seed_from_u64(seed);
    let count = (10.0 / NONUNIFORM_STEP).floor() as usize + 1;
    let times: Vec<f64> = (0..count)
        .map(|m| NONUNIFORM_STEP * m as f64 + NONUNIFORM_JITTER * rng.random::<f64>())
        .collect();
    let values = times.iter().map(|&t| superpose(&components, t)).collect();
    Ok((NonuniformSeries::new(times, values)?, components))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivative(c: &ComponentTruth, range: (f64, f64)) {
        let h = 1e-4;
        for i in 0..=50 {
            let t = range.0 + (range.1 - range.0) * i as f64 / 50.0;
            let fd = ((c.phase)(t + h) - (c.phase)(t - h)) / (2.0 * h);
            let exact = c.instantaneous_frequency(t);
            assert!(
                (fd - exact).abs() <= 1e-6 * exact.abs(),
                "{} at t={t}: {fd} vs {exact}",
                c.name
            );
        }
    }

    #[test]
    fn if_curves_are_phase_derivatives() {
        let (_, chirp) = gen_fig1(64).unwrap();
        check_derivative(&chirp, (0.0, 10.0));
        // t^0.2 and t^0.3 terms make the third derivative blow up at 0.
        for c in s123_components().iter().chain(&nonuniform_components()) {
            check_derivative(c, (0.5, 10.0));
        }
    }

    #[test]
    fn fig1_values() {
        let (s, truth) = gen_fig1(1024).unwrap();
        assert!((s.values()[0] - 1.6).abs() < 1e-15);
        assert_eq!(truth.instantaneous_frequency(0.0), 2.0);
        assert!(s.values().iter().all(|v| v.abs() <= 1.6 + 1e-12));
        assert!(gen_fig1(63).is_err());
    }

    #[test]
    fn s3_at_one_is_minus_one() {
        let s3 = &s123_components()[2];
        assert!((s3.eval(1.0) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn s123_snr() {
        let (clean, _) = gen_s123(2048, 0.0, 0).unwrap();
        let power = clean.values().iter().map(|v| v * v).sum::<f64>() / clean.len() as f64;
        let snr = 10.0 * (power / 2.4).log10();
        assert!((snr + 2.6).abs() < 0.1, "snr {snr}");
    }

    #[test]
    fn s1_envelope() {
        let (_, comps) = gen_s123(2048, 0.0, 0).unwrap();
        for i in 0..2048 {
            let t = i as f64 * 10.0 / 2048.0;
            let a = (comps[0].amplitude)(t);
            assert!((0.8..=1.2).contains(&a));
        }
        let (a, _) = gen_s123(2048, 0.0, 1).unwrap();
        let (b, _) = gen_s123(2048, 0.0, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nonuniform_sampling_statistics() {
        let (s, comps) = gen_nonuniform(5).unwrap();
        let inside = s.times().iter().filter(|t| (2.0..=8.0).contains(*t)).count();
        assert!((155..=175).contains(&inside), "{inside}");
        let rate = (s.len() - 1) as f64 / (s.times()[s.len() - 1] - s.times()[0]);
        assert!((rate - 27.2).abs() < 0.05 * 27.2, "rate {rate}");
        let top = comps[2].instantaneous_frequency(8.0);
        assert!((top - 9.85).abs() < 0.01 * 9.85, "{top}");
    }

    #[test]
    fn components_are_separated() {
        let times: Vec<f64> = (0..1000).map(|i| i as f64 * 0.01).collect();
        assert!(separation(&s123_components(), &times) > 0.0);
        assert!(separation(&nonuniform_components(), &times) > 0.0);
    }
}
