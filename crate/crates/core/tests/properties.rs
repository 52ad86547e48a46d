use std::f64::consts::PI;

use proptest::prelude::*;
use synsq::cwt::forward;
use synsq::phase::{phase_transform, universal_threshold};
use synsq::reconstruct::invert_all;
use synsq::signal::{pad_reflect, spline_resample, PadPlan};
use synsq::squeeze::{reassignment_weights, synchrosqueeze};
use synsq::{Complex64, NonuniformSeries, UniformSeries, WaveletSpec};

fn series_strategy(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, len)
}

fn chirpish(n: usize, dt: f64) -> UniformSeries {
    let values = (0..n)
        .map(|m| {
            let t = m as f64 * dt;
            (2.0 * PI * (4.0 * t + 0.8 * t * t)).cos() + 0.5 * (2.0 * PI * 13.0 * t).sin()
        })
        .collect();
    UniformSeries::new(0.0, dt, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reflect_pad_then_crop_is_identity(values in series_strategy(2..80), frac in 0.0f64..1.0) {
        let n = values.len();
        let pad = ((n - 1) as f64 * frac) as usize;
        let series = UniformSeries::new(1.5, 0.25, values.clone()).unwrap();
        let padded = pad_reflect(&series, pad).unwrap();
        prop_assert_eq!(padded.len(), n + 2 * pad);
        prop_assert_eq!(&padded.values()[pad..pad + n], values.as_slice());
        prop_assert!((padded.t0() - (1.5 - 0.25 * pad as f64)).abs() < 1e-12);
        for k in 1..=pad {
            prop_assert_eq!(padded.values()[pad - k], values[k]);
            prop_assert_eq!(padded.values()[pad + n - 1 + k], values[n - 1 - k]);
        }
    }

    #[test]
    fn pad_plan_reaches_a_power_of_two(values in series_strategy(3..300)) {
        let n = values.len();
        let series = UniformSeries::new(0.0, 1.0, values.clone()).unwrap();
        let plan = PadPlan::auto(n).unwrap();
        let padded = plan.apply(&series).unwrap();
        prop_assert!(padded.len().is_power_of_two());
        prop_assert_eq!(&padded.values()[plan.left..plan.left + n], values.as_slice());
    }

    #[test]
    fn spline_reproduces_cubics(
        c in prop::array::uniform4(-3.0f64..3.0),
        gaps in prop::collection::vec(0.05f64..1.0, 4..20),
    ) {
        let mut times = vec![0.0];
        for g in &gaps {
            times.push(times.last().unwrap() + g);
        }
        let p = |t: f64| c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t;
        let values = times.iter().map(|&t| p(t)).collect();
        let series = NonuniformSeries::new(times, values).unwrap();
        let dense = spline_resample(&series, 0.01).unwrap();
        let scale = 1.0 + dense.times().iter().map(|&t| p(t).abs()).fold(0.0, f64::max);
        for (t, v) in dense.times().iter().zip(dense.values()) {
            prop_assert!((v - p(*t)).abs() <= 1e-9 * scale, "t={} got {} want {}", t, v, p(*t));
        }
    }

    #[test]
    fn threshold_scales_and_ignores_order(
        values in prop::collection::vec((-4.0f64..4.0, -4.0f64..4.0), 8..64),
        c in 0.01f64..100.0,
        rot in 0usize..64,
    ) {
        let row: Vec<Complex64> = values.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let scaled: Vec<Complex64> = row.iter().map(|z| z * c).collect();
        let mut rotated = row.clone();
        rotated.rotate_left(rot % row.len());
        let g = universal_threshold(&[&row]).unwrap();
        let gs = universal_threshold(&[&scaled]).unwrap();
        let gr = universal_threshold(&[&rotated]).unwrap();
        prop_assert!((gs - c * g).abs() <= 1e-12 * gs.max(1e-300));
        prop_assert_eq!(g, gr);
    }

    #[test]
    fn transform_is_linear(
        x in series_strategy(64..65),
        y in series_strategy(64..65),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
    ) {
        let spec = WaveletSpec::default();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
        let wx = forward(&UniformSeries::new(0.0, 1.0, x).unwrap(), &spec, 8).unwrap();
        let wy = forward(&UniformSeries::new(0.0, 1.0, y).unwrap(), &spec, 8).unwrap();
        let wc = forward(&UniformSeries::new(0.0, 1.0, combo).unwrap(), &spec, 8).unwrap();
        let scale = wx.w.as_slice().iter().chain(wy.w.as_slice()).map(|z| z.norm()).fold(1e-300, f64::max);
        for i in 0..wc.w.as_slice().len() {
            let want = wx.w.as_slice()[i] * alpha + wy.w.as_slice()[i] * beta;
            prop_assert!((wc.w.as_slice()[i] - want).norm() <= 1e-12 * scale * 8.0);
        }
    }

    #[test]
    fn circular_shift_shifts_every_row(x in series_strategy(64..65), shift in 0usize..64) {
        let spec = WaveletSpec::morlet(1.0).unwrap();
        let mut shifted = x.clone();
        shifted.rotate_right(shift);
        let w = forward(&UniformSeries::new(0.0, 1.0, x).unwrap(), &spec, 4).unwrap();
        let ws = forward(&UniformSeries::new(0.0, 1.0, shifted).unwrap(), &spec, 4).unwrap();
        let scale = w.w.as_slice().iter().map(|z| z.norm()).fold(1e-300, f64::max);
        for j in 0..w.scales.len() {
            for m in 0..64 {
                let d = ws.w[(j, (m + shift) % 64)] - w.w[(j, m)];
                prop_assert!(d.norm() <= 1e-12 * scale * 8.0);
            }
        }
    }

    #[test]
    fn phase_ignores_amplitude_scaling(c in 0.01f64..100.0) {
        let series = chirpish(256, 1.0 / 64.0);
        let scaled = series.with_values(series.values().iter().map(|v| v * c).collect()).unwrap();
        let spec = WaveletSpec::default();
        let p = phase_transform(&forward(&series, &spec, 16).unwrap(), 1e-3).unwrap();
        let ps = phase_transform(&forward(&scaled, &spec, 16).unwrap(), 1e-3 * c).unwrap();
        let (rows, cols) = p.omega.shape();
        let mut differing_masks = 0;
        for l in 0..rows {
            for m in 0..cols {
                if p.mask[(l, m)] != ps.mask[(l, m)] {
                    differing_masks += 1;
                } else if p.mask[(l, m)] {
                    let (a, b) = (p.omega[(l, m)], ps.omega[(l, m)]);
                    prop_assert!((a - b).abs() <= 1e-9 * a.abs());
                }
            }
        }
        // Coefficients sitting exactly on the threshold may flip under rounding.
        prop_assert!(differing_masks <= rows * cols / 1000);
    }

    #[test]
    fn inversion_does_not_depend_on_wavelet_norm(k in 0.1f64..10.0) {
        let series = chirpish(256, 1.0 / 64.0);
        let base = WaveletSpec::default();
        let scaled = base.with_norm(base.norm() * k).unwrap();
        let run = |spec: &WaveletSpec| {
            let cwt = forward(&series, spec, 16).unwrap();
            let phase = phase_transform(&cwt, 0.0).unwrap();
            let sst = synchrosqueeze(&cwt, &phase).unwrap();
            invert_all(&sst, spec.admissibility_constant().unwrap()).unwrap()
        };
        let a = run(&base);
        let b = run(&scaled);
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }
}

#[test]
fn synchrosqueezing_conserves_each_column() {
    let series = chirpish(512, 1.0 / 128.0);
    let spec = WaveletSpec::bump(4.0, 1.2).unwrap();
    let cwt = forward(&series, &spec, 16).unwrap();
    let phase = phase_transform(&cwt, 1e-4).unwrap();
    let sst = synchrosqueeze(&cwt, &phase).unwrap();
    let weights = reassignment_weights(&cwt.scales, 16);
    for m in 0..series.len() {
        let mut expected = Complex64::new(0.0, 0.0);
        let mut budget = 0.0;
        for (j, w) in weights.iter().enumerate() {
            if phase.mask[(j, m)] {
                expected += cwt.w[(j, m)] * w;
                budget += (cwt.w[(j, m)] * w).norm();
            }
        }
        let got: Complex64 = (0..sst.n_bins()).map(|l| sst.t[(l, m)]).sum();
        assert!(
            (got - expected).norm() <= 2.0 * weights.len() as f64 * f64::EPSILON * budget,
            "column {m}"
        );
    }
}

#[test]
fn masked_omega_of_a_tone_sits_on_the_tone() {
    let n = 1024;
    let values = (0..n).map(|m| (2.0 * PI * 50.0 * m as f64 / 1024.0).cos()).collect();
    let series = UniformSeries::new(0.0, 1.0 / 1024.0, values).unwrap();
    let cwt = forward(&series, &WaveletSpec::default(), 32).unwrap();
    let phase = phase_transform(&cwt, 1e-3).unwrap();
    let (rows, cols) = phase.omega.shape();
    let kept: Vec<f64> = (0..rows)
        .flat_map(|l| (0..cols).map(move |m| (l, m)))
        .filter(|&(l, m)| phase.mask[(l, m)])
        .map(|(l, m)| phase.omega[(l, m)])
        .collect();
    assert!(!kept.is_empty());
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    assert!((mean / 50.0 - 1.0).abs() < 0.01, "mean omega {mean}");
}
