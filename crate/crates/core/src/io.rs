//! Text and image formats: two-column CSV series, SST magnitude CSV, the
//! complex SST archive read back by `reconstruct`, PGM heatmaps and flat
//! `key=value` config files.

use std::fmt::Write as _;
use std::io::{self, Write};

use rustfft::num_complex::Complex64;

use crate::error::{invalid, Result, SynsqError};
use crate::grid::Matrix;
use crate::signal::{spline_resample, NonuniformSeries, UniformSeries};
use crate::squeeze::{FrequencyBins, SstPlane};
use crate::testsignals::ComponentTruth;
use crate::wavelets::{WaveletKind, WaveletSpec};

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(SynsqError::Parse {
        line,
        msg: msg.into(),
    })
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split([',', ';', '\t', ' '])
        .map(str::trim)
        .filter(|f| !f.is_empty())
        .collect()
}

/// Parses `time,value` rows. Blank lines and `#` comments are skipped; the
/// first data line may be a header.
pub fn parse_samples(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut seen_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = split_fields(line);
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse::<f64>().ok()).collect();
        match parsed {
            Some(nums) if nums.len() == 2 => {
                if !nums.iter().all(|v| v.is_finite()) {
                    return parse_err(line_no, "non-finite number");
                }
                times.push(nums[0]);
                values.push(nums[1]);
                seen_data = true;
            }
            Some(nums) => {
                return parse_err(line_no, format!("expected 2 columns, found {}", nums.len()))
            }
            None if !seen_data && times.is_empty() && fields.len() == 2 => {
                // Header line.
                seen_data = true;
            }
            None => return parse_err(line_no, format!("cannot parse `{line}` as two numbers")),
        }
    }
    if times.is_empty() {
        return parse_err(0, "no samples found");
    }
    Ok((times, values))
}

/// A parsed input series, and whether it had to be resampled.
#[derive(Clone, Debug)]
pub struct Ingested {
    pub series: UniformSeries,
    pub resampled: bool,
}

/// Turns raw samples into a uniform series. Irregular time stamps go through
/// the not-a-knot spline onto a grid of step `resample_dt` (default: the mean
/// sample spacing).
pub fn ingest(times: Vec<f64>, values: Vec<f64>, resample_dt: Option<f64>) -> Result<Ingested> {
    if times.len() < 2 {
        return invalid("need at least two samples");
    }
    if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
        return invalid(format!("time stamps must increase strictly (row {})", i + 2));
    }
    let n = times.len();
    let mean_step = (times[n - 1] - times[0]) / (n - 1) as f64;
    let uniform = times
        .iter()
        .enumerate()
        .all(|(m, &t)| (t - (times[0] + m as f64 * mean_step)).abs() <= 1e-9 * mean_step.max(t.abs()));
    match resample_dt {
        None if uniform => Ok(Ingested {
            series: UniformSeries::new(times[0], mean_step, values)?,
            resampled: false,
        }),
        dt => {
            let dt = dt.unwrap_or(mean_step);
            let raw = NonuniformSeries::new(times, values)?;
            Ok(Ingested {
                series: spline_resample(&raw, dt)?,
                resampled: true,
            })
        }
    }
}

pub fn read_series(path: &std::path::Path, resample_dt: Option<f64>) -> Result<Ingested> {
    let text = std::fs::read_to_string(path)?;
    let (t, v) = parse_samples(&text)?;
    ingest(t, v, resample_dt)
}

pub fn write_series_csv(mut out: impl Write, series: &UniformSeries) -> io::Result<()> {
    writeln!(out, "time,value")?;
    for (m, v) in series.values().iter().enumerate() {
        writeln!(out, "{},{}", series.time(m), v)?;
    }
    Ok(())
}

pub fn write_samples_csv(mut out: impl Write, times: &[f64], values: &[f64]) -> io::Result<()> {
    writeln!(out, "time,value")?;
    for (t, v) in times.iter().zip(values) {
        writeln!(out, "{t},{v}")?;
    }
    Ok(())
}

/// Truth sidecar: `time, if_1, amp_1, if_2, amp_2, ...` preceded by `#` notes.
pub fn write_truth_csv(
    mut out: impl Write,
    times: &[f64],
    components: &[ComponentTruth],
    notes: &[&str],
) -> io::Result<()> {
    for note in notes {
        writeln!(out, "# {note}")?;
    }
    let mut header = String::from("time");
    for c in components {
        write!(header, ",if_{0},amp_{0}", c.name).expect("string write");
    }
    writeln!(out, "{header}")?;
    for &t in times {
        let mut row = format!("{t}");
        for c in components {
            write!(row, ",{},{}", c.instantaneous_frequency(t), (c.amplitude)(t))
                .expect("string write");
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Magnitude matrix: first row holds the times, first column the frequencies.
pub fn write_sst_magnitude_csv(mut out: impl Write, sst: &SstPlane) -> io::Result<()> {
    let mut line = String::from("freq\\time");
    for t in sst.times() {
        write!(line, ",{t}").expect("string write");
    }
    writeln!(out, "{line}")?;
    for (l, f) in sst.freqs().iter().enumerate() {
        line.clear();
        write!(line, "{f}").expect("string write");
        for v in sst.t.row(l) {
            write!(line, ",{}", v.norm()).expect("string write");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Ridge path as `time,frequency`.
pub fn write_ridge_csv(mut out: impl Write, times: &[f64], freqs: &[f64]) -> io::Result<()> {
    writeln!(out, "time,frequency")?;
    for (t, f) in times.iter().zip(freqs) {
        writeln!(out, "{t},{f}")?;
    }
    Ok(())
}

/// Dynamic range of the heatmap in decibels below the peak.
pub const PGM_RANGE_DB: f64 = 80.0;

/// 8-bit binary PGM (P5) of `20 log10(|T| / max |T|)`, mapping
/// `[-PGM_RANGE_DB, 0]` dB linearly to `[0, 255]`. Row 0 is the highest
/// frequency; columns are time.
pub fn sst_pgm(sst: &SstPlane) -> Vec<u8> {
    let mags = sst.magnitudes();
    let peak = mags.as_slice().iter().cloned().fold(0.0, f64::max);
    let (rows, cols) = mags.shape();
    let mut out = format!(
        "P5\n# synsq log-magnitude: pixel = round(255 * (1 + dB / {PGM_RANGE_DB})), dB = 20 log10(|T| / {peak:e}); top row = highest frequency\n{cols} {rows}\n255\n"
    )
    .into_bytes();
    for l in (0..rows).rev() {
        for &v in mags.row(l) {
            let px = if peak > 0.0 && v > 0.0 {
                let db = 20.0 * (v / peak).log10();
                (255.0 * (1.0 + db / PGM_RANGE_DB)).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            out.push(px);
        }
    }
    out
}

const ARCHIVE_MAGIC: &str = "# synsq-sst v1";

/// Writes the complex plane with enough metadata to invert it later.
/// Floats use Rust's shortest round-trip formatting, so a read-back is exact.
pub fn write_sst_archive(mut out: impl Write, sst: &SstPlane, gamma: f64) -> io::Result<()> {
    let w = &sst.wavelet;
    writeln!(out, "{ARCHIVE_MAGIC}")?;
    writeln!(out, "wavelet={}", w.kind())?;
    writeln!(out, "mu={}", w.mu())?;
    writeln!(out, "sigma={}", w.sigma())?;
    writeln!(out, "norm={}", w.norm())?;
    writeln!(out, "n_v={}", sst.n_v)?;
    writeln!(out, "t0={}", sst.t0)?;
    writeln!(out, "dt={}", sst.dt)?;
    writeln!(out, "w_min={}", sst.bins.w_min)?;
    writeln!(out, "w_max={}", sst.bins.w_max)?;
    writeln!(out, "step={}", sst.bins.step)?;
    writeln!(out, "gamma={gamma}")?;
    writeln!(out, "rows={}", sst.n_bins())?;
    writeln!(out, "cols={}", sst.len())?;
    writeln!(out, "data")?;
    let mut line = String::new();
    for l in 0..sst.n_bins() {
        line.clear();
        for (i, c) in sst.t.row(l).iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            write!(line, "{} {}", c.re, c.im).expect("string write");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads an archive written by [`write_sst_archive`]; returns the plane and
/// the threshold it was computed with.
pub fn read_sst_archive(text: &str) -> Result<(SstPlane, f64)> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == ARCHIVE_MAGIC => {}
        _ => return parse_err(1, "not a synsq SST archive"),
    }
    let mut meta = std::collections::HashMap::new();
    for (idx, line) in lines.by_ref() {
        let line = line.trim();
        if line == "data" {
            break;
        }
        let Some((k, v)) = line.split_once('=') else {
            return parse_err(idx + 1, format!("expected key=value, got `{line}`"));
        };
        meta.insert(k.trim().to_string(), (idx + 1, v.trim().to_string()));
    }
    let get = |key: &str| -> Result<&(usize, String)> {
        meta.get(key).ok_or_else(|| SynsqError::Parse {
            line: 0,
            msg: format!("archive is missing `{key}`"),
        })
    };
    let num = |key: &str| -> Result<f64> {
        let (line, v) = get(key)?;
        v.parse().map_err(|_| SynsqError::Parse {
            line: *line,
            msg: format!("bad number for `{key}`"),
        })
    };
    let count = |key: &str| -> Result<usize> {
        let (line, v) = get(key)?;
        v.parse().map_err(|_| SynsqError::Parse {
            line: *line,
            msg: format!("bad count for `{key}`"),
        })
    };
    let kind: WaveletKind = get("wavelet")?.1.parse()?;
    let wavelet = WaveletSpec::new(kind, num("mu")?, num("sigma")?)?.with_norm(num("norm")?)?;
    let (rows, cols) = (count("rows")?, count("cols")?);
    if rows < 2 || cols == 0 {
        return parse_err(0, "archive plane is empty");
    }
    let bins = FrequencyBins {
        w_min: num("w_min")?,
        w_max: num("w_max")?,
        step: num("step")?,
        count: rows,
    };
    let mut data = Vec::with_capacity(rows * cols);
    for (idx, line) in lines.take(rows) {
        let nums: Vec<&str> = line.split_ascii_whitespace().collect();
        if nums.len() != 2 * cols {
            return parse_err(idx + 1, format!("expected {} numbers, found {}", 2 * cols, nums.len()));
        }
        for pair in nums.chunks(2) {
            let re = pair[0].parse::<f64>();
            let im = pair[1].parse::<f64>();
            match (re, im) {
                (Ok(re), Ok(im)) => data.push(Complex64::new(re, im)),
                _ => return parse_err(idx + 1, "bad coefficient"),
            }
        }
    }
    if data.len() != rows * cols {
        return parse_err(0, "archive is truncated");
    }
    let plane = SstPlane {
        bins,
        t0: num("t0")?,
        dt: num("dt")?,
        n_v: count("n_v")?,
        wavelet,
        t: Matrix::from_vec(rows, cols, data),
    };
    Ok((plane, num("gamma")?))
}

/// Flat `key=value` config; `#` starts a comment line.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return parse_err(idx + 1, format!("expected key=value, got `{line}`"));
        };
        let key = k.trim();
        if key.is_empty() {
            return parse_err(idx + 1, "empty key");
        }
        out.push((key.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_and_without_header() {
        let (t, v) = parse_samples("time,value\n0,1\n0.5,2\n").unwrap();
        assert_eq!(t, vec![0.0, 0.5]);
        assert_eq!(v, vec![1.0, 2.0]);
        let (t, _) = parse_samples("# note\n\n1 2\n3 4\n").unwrap();
        assert_eq!(t, vec![1.0, 3.0]);
    }

    #[test]
    fn reports_line_numbers() {
        match parse_samples("t,v\n0,1\n1,x\n") {
            Err(SynsqError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_samples("0,1,2\n") {
            Err(SynsqError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_samples(""), Err(SynsqError::Parse { .. })));
    }

    #[test]
    fn ingest_detects_uniform_grid() {
        let t: Vec<f64> = (0..10).map(|m| 1.0 + m as f64 * 0.1).collect();
        let got = ingest(t, vec![0.0; 10], None).unwrap();
        assert!(!got.resampled);
        assert!((got.series.dt() - 0.1).abs() < 1e-12);

        let t = vec![0.0, 0.1, 0.25, 0.3, 0.42, 0.5];
        let got = ingest(t, vec![1.0; 6], Some(0.05)).unwrap();
        assert!(got.resampled);
        assert_eq!(got.series.len(), 11);
        assert!(ingest(vec![0.0, 0.0, 1.0], vec![0.0; 3], None).is_err());
    }

    #[test]
    fn config_lines() {
        let c = parse_config("# c\nn_v = 16\nwavelet=morlet\n").unwrap();
        assert_eq!(c, vec![("n_v".into(), "16".into()), ("wavelet".into(), "morlet".into())]);
        assert!(parse_config("n_v 16").is_err());
    }
}
