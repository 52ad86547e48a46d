//! Metric suites shared by the `bench` subcommand and the acceptance tests.
//!
//! Every function here returns plain numbers; pass/fail thresholds live with
//! the callers.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::ops::Range;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{invalid, Result, SynsqError};
use crate::io::ingest;
use crate::pipeline::{analyze, denoise, Pad, PipelineConfig};
use crate::reconstruct::invert_all;
use crate::signal::{mad, UniformSeries, MAD_TO_SIGMA};
use crate::squeeze::SstPlane;
use crate::testsignals::{gen_nonuniform, gen_s123, ComponentTruth};

/// Noise variance of the noisy three-component experiment.
pub const S123_NOISE_VARIANCE: f64 = 2.4;

/// Index range of the middle `keep` fraction of `n` samples.
pub fn central(n: usize, keep: f64) -> Range<usize> {
    let drop = ((1.0 - keep.clamp(0.0, 1.0)) * n as f64 / 2.0).round() as usize;
    drop.min(n / 2)..n - drop.min(n / 2)
}

/// `||estimate - truth|| / ||truth||` over `range`.
pub fn relative_rmse(estimate: &[f64], truth: &[f64], range: Range<usize>) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in range {
        num += (estimate[i] - truth[i]).powi(2);
        den += truth[i].powi(2);
    }
    (num / den).sqrt()
}

/// Largest `|estimate - truth| / |truth|` over `range`.
pub fn max_relative_deviation(estimate: &[f64], truth: &[f64], range: Range<usize>) -> f64 {
    range
        .map(|i| ((estimate[i] - truth[i]) / truth[i]).abs())
        .fold(0.0, f64::max)
}

pub fn median_of(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// `cos(2 pi freq t)` sampled at rate `fs`, starting at `t = 0`.
pub fn tone(freq: f64, n: usize, fs: f64) -> Result<UniformSeries> {
    let values = (0..n).map(|m| (2.0 * PI * freq * m as f64 / fs).cos()).collect();
    UniformSeries::new(0.0, 1.0 / fs, values)
}

/// Smallest fraction, over the columns in `columns`, of `sum_l |T|` that
/// lies within `radius` bins of the bin containing `freq`.
pub fn concentration(sst: &SstPlane, freq: f64, radius: usize, columns: Range<usize>) -> Result<f64> {
    let center = sst.bins.index(freq)?;
    let lo = center.saturating_sub(radius);
    let hi = (center + radius).min(sst.n_bins() - 1);
    let mut worst = f64::INFINITY;
    for m in columns {
        let total: f64 = (0..sst.n_bins()).map(|l| sst.t[(l, m)].norm()).sum();
        let near: f64 = (lo..=hi).map(|l| sst.t[(l, m)].norm()).sum();
        worst = worst.min(if total > 0.0 { near / total } else { 0.0 });
    }
    Ok(worst)
}

/// Settings used for the three-component experiments: bands of 12 bins
/// each side, split between neighbouring ridges, searched below 12 Hz.
pub fn s123_config() -> PipelineConfig {
    let mut config = PipelineConfig::default();
    config.ridge.band_halfwidth = Some(12);
    config.ridge.freq_range = Some((0.5, 12.0));
    config
}

/// Per-component scores of one decomposition run, in ascending frequency
/// order.
#[derive(Clone, Debug)]
pub struct DecompositionScore {
    /// Relative RMSE of each recovered component.
    pub rmse: Vec<f64>,
    /// Largest relative deviation of each ridge frequency from the true IF.
    pub if_deviation: Vec<f64>,
}

/// Decomposes `series` into `truths.len()` components and scores them on
/// the middle `keep` fraction of the samples.
pub fn score_decomposition(
    series: &UniformSeries,
    truths: &[ComponentTruth],
    config: &PipelineConfig,
    keep: f64,
) -> Result<DecompositionScore> {
    let analysis = analyze(series, config)?;
    let components = analysis.decompose(config, truths.len())?;
    let times = series.times();
    let range = central(times.len(), keep);
    let mut rmse = Vec::new();
    let mut if_deviation = Vec::new();
    for (component, truth) in components.iter().zip(truths) {
        let exact = truth.sample(&times);
        rmse.push(relative_rmse(component.series.values(), &exact, range.clone()));
        let freqs = component.ridge.frequencies(&analysis.sst);
        let true_if: Vec<f64> = times.iter().map(|&t| truth.instantaneous_frequency(t)).collect();
        if_deviation.push(max_relative_deviation(&freqs, &true_if, range.clone()));
    }
    Ok(DecompositionScore { rmse, if_deviation })
}

/// Scores the three-component signal with `n = 2048` at noise level
/// `sigma`. With `denoise_first` the input is hard-thresholded before the
/// analysis.
pub fn s123_score(sigma: f64, seed: u64, denoise_first: bool, keep: f64) -> Result<DecompositionScore> {
    let config = s123_config();
    let (series, truths) = gen_s123(2048, sigma, seed)?;
    let series = if denoise_first {
        denoise(&series, &config)?.0
    } else {
        series
    };
    score_decomposition(&series, &truths, &config, keep)
}

/// Two unit tones at 3 Hz and 7 Hz on `[0, 10)` with `n = 1024`.
pub fn two_tone() -> Result<UniformSeries> {
    let n = 1024;
    let dt = 10.0 / n as f64;
    let values = (0..n)
        .map(|m| {
            let t = m as f64 * dt;
            (2.0 * PI * 3.0 * t).cos() + (2.0 * PI * 7.0 * t).cos()
        })
        .collect();
    UniformSeries::new(0.0, dt, values)
}

/// Adds a fixed bounded perturbation scaled to each sup-norm in `levels`
/// to [`two_tone`] and returns, per level, the larger over both components
/// of the relative RMSE between the components recovered with and without
/// the perturbation (central 90%).
pub fn perturbation_errors(levels: &[f64], seed: u64) -> Result<Vec<f64>> {
    let clean = two_tone()?;
    let config = PipelineConfig::default();
    let reference = analyze(&clean, &config)?.decompose(&config, 2)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let pattern: Vec<f64> = (0..clean.len()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let peak = pattern.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let range = central(clean.len(), 0.9);
    levels
        .iter()
        .map(|&eps| {
            let values = clean
                .values()
                .iter()
                .zip(&pattern)
                .map(|(v, p)| v + eps * p / peak)
                .collect();
            let perturbed = clean.with_values(values)?;
            let parts = analyze(&perturbed, &config)?.decompose(&config, 2)?;
            Ok(parts
                .iter()
                .zip(&reference)
                .map(|(p, r)| relative_rmse(p.series.values(), r.series.values(), range.clone()))
                .fold(0.0, f64::max))
        })
        .collect()
}

/// Ridge tracking on the irregularly sampled experiment.
#[derive(Clone, Debug)]
pub struct NonuniformScore {
    pub times: Vec<f64>,
    /// `deviation[k][m]`: ridge bin minus true-IF bin for component `k`.
    pub deviation: Vec<Vec<i64>>,
}

impl NonuniformScore {
    /// Columns in `range` where some component is off by more than
    /// `tolerance` bins, as times.
    pub fn violations(&self, tolerance: i64, range: Range<usize>) -> Vec<f64> {
        range
            .filter(|&m| self.deviation.iter().any(|d| d[m].abs() > tolerance))
            .map(|m| self.times[m])
            .collect()
    }
}

/// Runs the irregular-sampling experiment: spline resampling at the mean
/// step, then a three-ridge decomposition.
pub fn nonuniform_score(seed: u64) -> Result<NonuniformScore> {
    let (samples, truths) = gen_nonuniform(seed)?;
    let series = ingest(samples.times().to_vec(), samples.values().to_vec(), None)?.series;
    let config = PipelineConfig::default();
    let analysis = analyze(&series, &config)?;
    let components = analysis.decompose(&config, truths.len())?;
    let times = analysis.sst.times();
    let bins = &analysis.sst.bins;
    let mut deviation = Vec::new();
    for (component, truth) in components.iter().zip(&truths) {
        let d = times
            .iter()
            .zip(&component.ridge.bin_path)
            .map(|(&t, &l)| Ok(l as i64 - bins.index(truth.instantaneous_frequency(t))? as i64))
            .collect::<Result<Vec<i64>>>()?;
        deviation.push(d);
    }
    Ok(NonuniformScore { times, deviation })
}

/// `1.4826 * MAD` of `n` samples of zero-mean Gaussian noise.
pub fn mad_sigma_estimate(n: usize, sigma: f64, seed: u64) -> Result<f64> {
    let zero = UniformSeries::new(0.0, 1.0, vec![0.0; n])?;
    let noise = crate::signal::add_white_noise(&zero, sigma, seed)?;
    Ok(MAD_TO_SIGMA * mad(noise.values())?)
}

/// Fastest of `repeats` single-threaded runs of [`analyze`] on a chirp of
/// length `n`.
pub fn analysis_time(n: usize, n_v: usize, repeats: usize) -> Result<Duration> {
    let dt = 1.0 / n as f64;
    let values = (0..n)
        .map(|m| {
            let t = m as f64 * dt;
            (2.0 * PI * (0.05 * n as f64 * t + 0.1 * n as f64 * t * t)).cos()
        })
        .collect();
    let series = UniformSeries::new(0.0, dt, values)?;
    let config = PipelineConfig {
        n_v,
        ..PipelineConfig::default()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| SynsqError::Numerical(e.to_string()))?;
    pool.install(|| {
        let mut best = Duration::MAX;
        for _ in 0..repeats.max(1) {
            let start = Instant::now();
            analyze(&series, &config)?;
            best = best.min(start.elapsed());
        }
        Ok(best)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Tone,
    Robustness,
    Scaling,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Tone => "tone",
            Suite::Robustness => "robustness",
            Suite::Scaling => "scaling",
        })
    }
}

impl FromStr for Suite {
    type Err = SynsqError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tone" => Ok(Suite::Tone),
            "robustness" => Ok(Suite::Robustness),
            "scaling" => Ok(Suite::Scaling),
            other => invalid(format!(
                "unknown suite '{other}' (expected tone, robustness or scaling)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub suite: Suite,
    pub metrics: Vec<Metric>,
}

impl Report {
    fn push(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push(Metric {
            name: name.into(),
            value,
        });
    }

    pub fn text(&self) -> String {
        let width = self.metrics.iter().map(|m| m.name.len()).max().unwrap_or(0);
        let mut out = format!("suite {}\n", self.suite);
        for m in &self.metrics {
            out += &format!("  {:width$}  {:.6e}\n", m.name, m.value);
        }
        out
    }

    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "suite,metric,value")?;
        for m in &self.metrics {
            writeln!(out, "{},{},{:e}", self.suite, m.name, m.value)?;
        }
        Ok(())
    }
}

/// Runs one benchmark suite.
pub fn run(suite: Suite) -> Result<Report> {
    let mut report = Report {
        suite,
        metrics: Vec::new(),
    };
    match suite {
        Suite::Tone => {
            let series = tone(50.0, 1024, 1024.0)?;
            let config = PipelineConfig::default();
            let analysis = analyze(&series, &config)?;
            let columns = central(series.len(), 0.9);
            report.push(
                "tone50_min_mass_within_3_bins_reflect",
                concentration(&analysis.sst, 50.0, 3, columns.clone())?,
            );
            let circular = PipelineConfig {
                pad: Pad::Fixed(0),
                ..config.clone()
            };
            report.push(
                "tone50_min_mass_within_3_bins_circular",
                concentration(&analyze(&series, &circular)?.sst, 50.0, 3, columns.clone())?,
            );
            let part = analysis.decompose(&config, 1)?;
            report.push(
                "tone50_band_rmse",
                relative_rmse(part[0].series.values(), series.values(), columns.clone()),
            );
            let two = two_tone()?;
            let full = invert_all(&analyze(&two, &config)?.sst, analysis.r_psi)?;
            report.push(
                "two_tone_full_inversion_rmse",
                relative_rmse(full.values(), two.values(), central(two.len(), 0.9)),
            );
        }
        Suite::Robustness => {
            let clean = s123_score(0.0, 0, false, 0.9)?;
            for (k, e) in clean.rmse.iter().enumerate() {
                report.push(format!("s{}_clean_rmse", k + 1), *e);
            }
            let sigma = S123_NOISE_VARIANCE.sqrt();
            let baseline = s123_score(0.0, 0, true, 0.8)?;
            let runs = (1..=10)
                .map(|seed| s123_score(sigma, seed, true, 0.8))
                .collect::<Result<Vec<_>>>()?;
            report.push("s2_clean_rmse_central80", baseline.rmse[1]);
            report.push(
                "s2_noisy_rmse_median",
                median_of(runs.iter().map(|r| r.rmse[1]).collect()),
            );
            report.push(
                "s3_noisy_if_deviation_median",
                median_of(runs.iter().map(|r| r.if_deviation[2]).collect()),
            );
            let levels = [0.01, 0.02, 0.04];
            for (eps, err) in levels.iter().zip(perturbation_errors(&levels, 7)?) {
                report.push(format!("perturbation_{eps}_error"), err);
            }
            let estimates = (1..=10)
                .map(|seed| mad_sigma_estimate(4096, 1.0, seed))
                .collect::<Result<Vec<_>>>()?;
            report.push("mad_sigma_estimate_median", median_of(estimates));
        }
        Suite::Scaling => {
            let mut previous: Option<f64> = None;
            for exp in 10..=14 {
                let secs = analysis_time(1 << exp, 32, 3)?.as_secs_f64();
                report.push(format!("analyze_seconds_n{}", 1 << exp), secs);
                if let Some(p) = previous {
                    report.push(format!("ratio_n{}_over_half", 1 << exp), secs / p);
                }
                previous = Some(secs);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_range_drops_both_ends() {
        assert_eq!(central(100, 0.9), 5..95);
        assert_eq!(central(100, 0.8), 10..90);
        assert_eq!(central(10, 1.0), 0..10);
    }

    #[test]
    fn rmse_and_median() {
        let t = [1.0, -1.0, 1.0, -1.0];
        let e = [1.1, -0.9, 1.0, -1.0];
        assert!((relative_rmse(&e, &t, 0..4) - (0.02f64 / 4.0).sqrt()).abs() < 1e-12);
        assert_eq!(median_of(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_of(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!((max_relative_deviation(&e, &t, 0..4) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Tone, Suite::Robustness, Suite::Scaling] {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("speed".parse::<Suite>().is_err());
    }
}
