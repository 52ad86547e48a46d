use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use synsq::bench::{self, central, relative_rmse, Suite};
use synsq::io::{
    ingest, parse_config, parse_samples, read_sst_archive, sst_pgm, write_ridge_csv, write_samples_csv,
    write_series_csv, write_sst_archive, write_sst_magnitude_csv, write_truth_csv,
};
use synsq::pipeline::{denoise, plane_decompose};
use synsq::reconstruct::{invert_all, invert_frequency_band};
use synsq::signal::add_white_noise;
use synsq::testsignals::{gen_fig1, gen_nonuniform, gen_s123, ComponentTruth};
use synsq::{
    analyze, Gamma, Pad, PipelineConfig, RidgeParams, SynsqError, WaveletKind, WaveletSpec,
};

/// Wavelet synchrosqueezing from the command line.
///
/// Every analysis flag can also be set through a `SYNSQ_` environment
/// variable or a `key=value` line in the file given to `--config`. A flag
/// beats the environment, which beats the config file.
#[derive(Parser, Debug)]
#[command(name = "synsq", version, about)]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Options {
    /// Flat key=value file with defaults for the flags below.
    #[arg(long, global = true, env = "SYNSQ_CONFIG")]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "SYNSQ_THREADS")]
    threads: Option<usize>,
    /// Voices per octave.
    #[arg(long, global = true, env = "SYNSQ_N_V")]
    n_v: Option<usize>,
    /// Mother wavelet: bump, morlet or mexican-hat.
    #[arg(long, global = true, env = "SYNSQ_WAVELET")]
    wavelet: Option<String>,
    #[arg(long, global = true, env = "SYNSQ_MU", allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, global = true, env = "SYNSQ_SIGMA", allow_negative_numbers = true)]
    sigma: Option<f64>,
    /// Coefficient threshold: `auto` or a number.
    #[arg(long, global = true, env = "SYNSQ_GAMMA")]
    gamma: Option<String>,
    /// Reflection padding per side: `auto` or a sample count.
    #[arg(long, global = true, env = "SYNSQ_PAD")]
    pad: Option<String>,
    /// Ridge jump penalty relative to the mean column peak energy.
    #[arg(long, global = true, env = "SYNSQ_SMOOTHNESS")]
    smoothness: Option<f64>,
    /// Largest bin jump between neighbouring columns.
    #[arg(long, global = true, env = "SYNSQ_JUMP_CAP")]
    jump_cap: Option<usize>,
    /// Bins on either side of a ridge that belong to its component.
    #[arg(long, global = true, env = "SYNSQ_BAND_HALFWIDTH")]
    band_halfwidth: Option<usize>,
    /// Number of ridges to extract.
    #[arg(long, global = true, env = "SYNSQ_COMPONENTS")]
    components: Option<usize>,
    /// Frequency window `lo:hi` searched for ridges.
    #[arg(long, global = true, env = "SYNSQ_FREQ_RANGE")]
    freq_range: Option<String>,
    /// Step of the uniform grid for irregularly sampled input.
    #[arg(long, global = true, env = "SYNSQ_RESAMPLE_DT")]
    resample_dt: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic test signal and its truth sidecar.
    Synth(SynthArgs),
    /// Synchrosqueeze a `time,value` CSV.
    Analyze(AnalyzeArgs),
    /// Recover components from an SST archive written by `analyze`.
    Reconstruct(ReconstructArgs),
    /// Hard-threshold the wavelet coefficients and invert.
    Denoise(DenoiseArgs),
    /// Run a benchmark suite.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SignalKind {
    Fig1,
    S123,
    Nonuniform,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum)]
    signal: SignalKind,
    /// Sample count (ignored by `nonuniform`).
    #[arg(long, default_value_t = 2048)]
    n: usize,
    /// Standard deviation of added white noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV.
    #[arg(short, long)]
    output: PathBuf,
    /// Truth sidecar (default: `<output stem>.truth.csv`).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Also write each noise-free component as a column of this CSV.
    #[arg(long)]
    components_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    input: PathBuf,
    /// Output prefix: writes `<prefix>.csv`, `<prefix>.pgm` and `<prefix>.sst`.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    /// Archive written by `analyze`.
    archive: PathBuf,
    /// Invert over `lo:hi` or `full` instead of following ridges.
    #[arg(long)]
    band: Option<String>,
    /// Output prefix for the component and ridge CSVs.
    #[arg(short, long)]
    output: PathBuf,
    /// CSV of reference components (`time,c1,c2,...`) to score against.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DenoiseArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// `tone`, `robustness`, `scaling` or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Metrics CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

const CONFIG_KEYS: &[&str] = &[
    "threads",
    "n_v",
    "wavelet",
    "mu",
    "sigma",
    "gamma",
    "pad",
    "smoothness",
    "jump_cap",
    "band_halfwidth",
    "components",
    "freq_range",
    "resample_dt",
];

/// Flag and environment values, with the config file as fallback.
struct Settings {
    opts: Options,
    file: HashMap<String, String>,
}

impl Settings {
    fn load(opts: Options) -> Result<Self, SynsqError> {
        let mut file = HashMap::new();
        if let Some(path) = &opts.config {
            let text = fs::read_to_string(path).map_err(|e| {
                SynsqError::InvalidArgument(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (key, value) in parse_config(&text)? {
                let key = key.replace('-', "_");
                if !CONFIG_KEYS.contains(&key.as_str()) {
                    return Err(SynsqError::InvalidArgument(format!(
                        "unknown config key `{key}` in {}",
                        path.display()
                    )));
                }
                file.insert(key, value);
            }
        }
        Ok(Self { opts, file })
    }

    fn pick<T>(&self, flag: &Option<T>, key: &str) -> Result<Option<T>, SynsqError>
    where
        T: FromStr + Clone,
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(Some(v.clone()));
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                SynsqError::InvalidArgument(format!("config key `{key}` = `{raw}`: {e}"))
            }),
        }
    }

    fn threads(&self) -> Result<Option<usize>, SynsqError> {
        self.pick(&self.opts.threads, "threads")
    }

    fn resample_dt(&self) -> Result<Option<f64>, SynsqError> {
        self.pick(&self.opts.resample_dt, "resample_dt")
    }

    fn pipeline(&self) -> Result<PipelineConfig, SynsqError> {
        let o = &self.opts;
        let defaults = PipelineConfig::default();
        let kind = match self.pick(&o.wavelet, "wavelet")? {
            Some(name) => WaveletKind::from_str(&name)?,
            None => defaults.wavelet.kind(),
        };
        let family = WaveletSpec::default_for(kind);
        let mu = self.pick(&o.mu, "mu")?.unwrap_or(family.mu());
        let sigma = self.pick(&o.sigma, "sigma")?.unwrap_or(family.sigma());
        let gamma = match self.pick(&o.gamma, "gamma")? {
            Some(g) => Gamma::from_str(&g)?,
            None => defaults.gamma,
        };
        let pad = match self.pick(&o.pad, "pad")? {
            Some(p) => Pad::from_str(&p)?,
            None => defaults.pad,
        };
        let base = RidgeParams::default();
        let ridge = RidgeParams {
            smoothness: self.pick(&o.smoothness, "smoothness")?.unwrap_or(base.smoothness),
            jump_cap: self.pick(&o.jump_cap, "jump_cap")?.unwrap_or(base.jump_cap),
            band_halfwidth: self
                .pick(&o.band_halfwidth, "band_halfwidth")?
                .or(base.band_halfwidth),
            components: self.pick(&o.components, "components")?.unwrap_or(base.components),
            freq_range: match self.pick(&o.freq_range, "freq_range")? {
                Some(r) => Some(parse_interval(&r)?),
                None => base.freq_range,
            },
        };
        let config = PipelineConfig {
            n_v: self.pick(&o.n_v, "n_v")?.unwrap_or(defaults.n_v),
            wavelet: WaveletSpec::new(kind, mu, sigma)?,
            gamma,
            pad,
            ridge,
        };
        config.validate()?;
        Ok(config)
    }
}

fn parse_interval(text: &str) -> Result<(f64, f64), SynsqError> {
    let bad = || SynsqError::InvalidArgument(format!("expected `lo:hi`, got `{text}`"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

fn create(path: &Path) -> Result<BufWriter<File>, SynsqError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn synth(args: &SynthArgs) -> Result<(), SynsqError> {
    let (times, values, components, notes): (Vec<f64>, Vec<f64>, Vec<ComponentTruth>, Vec<&str>) =
        match args.signal {
            SignalKind::Fig1 => {
                let (series, truth) = gen_fig1(args.n)?;
                let series = add_white_noise(&series, args.noise, args.seed)?;
                let note = "phase argument 4 pi t + 1.2 t^2 read as radians; IF = 2 + 1.2 t / pi";
                (series.times(), series.into_values(), vec![truth], vec![note])
            }
            SignalKind::S123 => {
                let (series, truths) = gen_s123(args.n, args.noise, args.seed)?;
                (series.times(), series.into_values(), truths, vec![])
            }
            SignalKind::Nonuniform => {
                let (series, truths) = gen_nonuniform(args.seed)?;
                let mut values = series.values().to_vec();
                if args.noise > 0.0 {
                    let noise = synsq::UniformSeries::new(0.0, 1.0, vec![0.0; values.len()])?;
                    let noise = add_white_noise(&noise, args.noise, args.seed)?;
                    for (v, e) in values.iter_mut().zip(noise.values()) {
                        *v += e;
                    }
                }
                (series.times().to_vec(), values, truths, vec![])
            }
        };
    let mut out = create(&args.output)?;
    write_samples_csv(&mut out, &times, &values)?;
    out.flush()?;

    let truth_path = args
        .truth
        .clone()
        .unwrap_or_else(|| args.output.with_extension("truth.csv"));
    let mut out = create(&truth_path)?;
    write_truth_csv(&mut out, &times, &components, &notes)?;
    out.flush()?;

    if let Some(path) = &args.components_out {
        let mut out = create(path)?;
        let names: Vec<&str> = components.iter().map(|c| c.name).collect();
        writeln!(out, "time,{}", names.join(","))?;
        for &t in &times {
            let row: Vec<String> = components.iter().map(|c| c.eval(t).to_string()).collect();
            writeln!(out, "{t},{}", row.join(","))?;
        }
        out.flush()?;
    }
    eprintln!(
        "wrote {} samples to {} and truth to {}",
        times.len(),
        args.output.display(),
        truth_path.display()
    );
    Ok(())
}

fn read_text(path: &Path) -> Result<String, SynsqError> {
    fs::read_to_string(path)
        .map_err(|e| SynsqError::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

fn load_input(settings: &Settings, path: &Path) -> Result<synsq::UniformSeries, SynsqError> {
    let (times, values) = parse_samples(&read_text(path)?)?;
    let ingested = ingest(times, values, settings.resample_dt()?)?;
    if ingested.resampled {
        eprintln!(
            "note: irregular time stamps resampled by cubic spline to dt = {}",
            ingested.series.dt()
        );
    }
    Ok(ingested.series)
}

fn analyze_cmd(settings: &Settings, args: &AnalyzeArgs) -> Result<(), SynsqError> {
    let config = settings.pipeline()?;
    let csv_path = with_suffix(&args.output, ".csv");
    if fs::canonicalize(&csv_path).ok() == fs::canonicalize(&args.input).ok() && csv_path.exists() {
        return Err(SynsqError::InvalidArgument(format!(
            "output {} would overwrite the input",
            csv_path.display()
        )));
    }
    let series = load_input(settings, &args.input)?;
    let analysis = analyze(&series, &config)?;
    let sst = &analysis.sst;

    let mut out = create(&csv_path)?;
    write_sst_magnitude_csv(&mut out, sst)?;
    out.flush()?;
    fs::write(with_suffix(&args.output, ".pgm"), sst_pgm(sst))?;
    let mut out = create(&with_suffix(&args.output, ".sst"))?;
    write_sst_archive(&mut out, sst, analysis.gamma)?;
    out.flush()?;
    eprintln!(
        "{} bins x {} columns, frequencies {:.6e}..{:.6e}, gamma {:.6e}",
        sst.n_bins(),
        sst.len(),
        sst.bins.w_min,
        sst.bins.w_max,
        analysis.gamma
    );
    Ok(())
}

/// Reads `time,c1,c2,...` reference columns.
fn read_reference(path: &Path) -> Result<Vec<Vec<f64>>, SynsqError> {
    let text = read_text(path)?;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let Ok(fields) = fields else {
            if columns.is_empty() {
                continue;
            }
            return Err(SynsqError::Parse {
                line: idx + 1,
                msg: format!("cannot parse `{line}`"),
            });
        };
        if columns.is_empty() {
            columns = vec![Vec::new(); fields.len().saturating_sub(1)];
        }
        if fields.len() != columns.len() + 1 {
            return Err(SynsqError::Parse {
                line: idx + 1,
                msg: format!("expected {} fields", columns.len() + 1),
            });
        }
        for (col, v) in columns.iter_mut().zip(&fields[1..]) {
            col.push(*v);
        }
    }
    Ok(columns)
}

fn reconstruct_cmd(settings: &Settings, args: &ReconstructArgs) -> Result<(), SynsqError> {
    let text = read_text(&args.archive)?;
    let (sst, _gamma) = read_sst_archive(&text)?;
    let r_psi = sst.wavelet.admissibility_constant()?;
    let mut recovered = Vec::new();

    match args.band.as_deref() {
        Some("full") => {
            let series = invert_all(&sst, r_psi)?;
            let mut out = create(&with_suffix(&args.output, ".full.csv"))?;
            write_series_csv(&mut out, &series)?;
            out.flush()?;
            recovered.push(series);
        }
        Some(band) => {
            let (lo, hi) = parse_interval(band)?;
            let inv = invert_frequency_band(&sst, lo, hi, r_psi)?;
            if inv.clamped {
                eprintln!(
                    "warning: band [{lo}, {hi}] clamped to the plane's range [{}, {}]",
                    inv.lo, inv.hi
                );
            }
            let mut out = create(&with_suffix(&args.output, ".band.csv"))?;
            write_series_csv(&mut out, &inv.series)?;
            out.flush()?;
            recovered.push(inv.series);
        }
        None => {
            let config = settings.pipeline()?;
            let parts = plane_decompose(&sst, r_psi, &config, config.ridge.components)?;
            let times = sst.times();
            for (k, part) in parts.into_iter().enumerate() {
                let mut out = create(&with_suffix(&args.output, &format!(".comp{}.csv", k + 1)))?;
                write_series_csv(&mut out, &part.series)?;
                out.flush()?;
                let mut out = create(&with_suffix(&args.output, &format!(".ridge{}.csv", k + 1)))?;
                write_ridge_csv(&mut out, &times, &part.ridge.frequencies(&sst))?;
                out.flush()?;
                recovered.push(part.series);
            }
        }
    }
    eprintln!("wrote {} series with prefix {}", recovered.len(), args.output.display());

    if let Some(path) = &args.reference {
        let reference = read_reference(path)?;
        let range = central(sst.len(), 0.9);
        for (k, (got, want)) in recovered.iter().zip(&reference).enumerate() {
            if want.len() != got.len() {
                return Err(SynsqError::InvalidArgument(format!(
                    "reference column {} has {} samples, expected {}",
                    k + 1,
                    want.len(),
                    got.len()
                )));
            }
            println!(
                "component {} relative rmse (central 90%): {:.6}",
                k + 1,
                relative_rmse(got.values(), want, range.clone())
            );
        }
    }
    Ok(())
}

fn denoise_cmd(settings: &Settings, args: &DenoiseArgs) -> Result<(), SynsqError> {
    let config = settings.pipeline()?;
    let series = load_input(settings, &args.input)?;
    let (clean, gamma) = denoise(&series, &config)?;
    let mut out = create(&args.output)?;
    write_series_csv(&mut out, &clean)?;
    out.flush()?;
    eprintln!("threshold {gamma:.6e}");
    Ok(())
}

fn bench_cmd(args: &BenchArgs) -> Result<(), SynsqError> {
    let suites = if args.suite.eq_ignore_ascii_case("all") {
        vec![Suite::Tone, Suite::Robustness, Suite::Scaling]
    } else {
        vec![args.suite.parse()?]
    };
    let mut csv = match &args.csv {
        Some(path) => Some(create(path)?),
        None => None,
    };
    for (i, suite) in suites.into_iter().enumerate() {
        let report = bench::run(suite)?;
        print!("{}", report.text());
        if let Some(out) = csv.as_mut() {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            let text = String::from_utf8(buf).expect("csv is utf-8");
            let body = if i == 0 { text.as_str() } else { text.split_once('\n').map_or("", |(_, b)| b) };
            out.write_all(body.as_bytes())?;
        }
    }
    if let Some(mut out) = csv {
        out.flush()?;
    }
    Ok(())
}

fn exit_code(err: &SynsqError) -> u8 {
    match err {
        SynsqError::Numerical(_) | SynsqError::NoRidge => 3,
        SynsqError::InvalidArgument(_) | SynsqError::Parse { .. } | SynsqError::Io(_) => 2,
    }
}

fn run(cli: Cli) -> Result<(), SynsqError> {
    let settings = Settings::load(cli.opts)?;
    if let Some(n) = settings.threads()? {
        if n == 0 {
            return Err(SynsqError::InvalidArgument("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| SynsqError::InvalidArgument(format!("cannot size thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Synth(args) => synth(args),
        Command::Analyze(args) => analyze_cmd(&settings, args),
        Command::Reconstruct(args) => reconstruct_cmd(&settings, args),
        Command::Denoise(args) => denoise_cmd(&settings, args),
        Command::Bench(args) => bench_cmd(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
