//! Command-line surface: `threshold`, `fer`, `simulate`, `perfplot` and `validate`.
//!
//! Every command writes its files first and prints a short summary afterwards.
//! Exit codes: 0 success, 1 usage or validation error, 2 numerical failure,
//! 3 failed acceptance check.

pub mod config;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::channel::Snr;
use crate::codecs::{uncoded_detection_probability, uncoded_error_probability, SchemeSpec};
use crate::error::{Error, Result};
use crate::fer_model::{
    approx_fer, exact_fer, exact_fer_from_samples, normalized_detection_curve, write_value_csv,
    DetectionCurve,
};
use crate::montecarlo::{binomial_ci, measure_awgn_fer, measure_qsf_fer, FerCurve};
use crate::numerics::QuadratureConfig;
use crate::threshold::{
    format_significant, waterfall_from_fer_samples, waterfall_from_pd, WaterfallThreshold,
};
use crate::validation::{self, Scope};

pub use config::{Experiment, ExperimentConfig, ReportFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "waterfall",
    version,
    about = "Waterfall thresholds and quasi-static fading FER"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the plan's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the report format.
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Waterfall threshold of the configured scheme.
    Threshold {
        #[command(flatten)]
        common: Common,
        /// Reuse a stored AWGN FER curve instead of simulating.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Approximate and exact average FER over an average-SNR range.
    Fer {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        avg_start_db: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        avg_stop_db: Option<f64>,
        #[arg(long)]
        avg_points: Option<usize>,
    },
    /// Monte-Carlo FER on the quasi-static fading channel.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Normalized detection curves `pd/g^2` and the `1/g^2` envelope.
    Perfplot {
        #[command(flatten)]
        common: Common,
    },
    /// Runs the acceptance checks and prints a table.
    Validate {
        /// Checked for validity before anything runs.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Include the Monte-Carlo checks (several minutes).
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write `validation.csv` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
    }
}

struct Context {
    exp: Experiment,
    out_dir: PathBuf,
    format: ReportFormat,
}

impl Context {
    fn new(common: &Common) -> Result<Self> {
        let mut exp = Experiment::from_path(&common.config)?;
        if let Some(seed) = common.seed {
            exp.plan = exp.plan.with_seed(seed);
        }
        let out_dir = common
            .out
            .clone()
            .unwrap_or_else(|| exp.config.output.directory.clone());
        let format = common.format.unwrap_or(exp.config.output.format);
        fs::create_dir_all(&out_dir)
            .map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
        Ok(Self {
            exp,
            out_dir,
            format,
        })
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.out_dir.join(name);
        File::create(&path)
            .map(BufWriter::new)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Threshold { common, curve } => {
            cmd_threshold(&Context::new(&common)?, curve.as_deref(), stdout)
        }
        Command::Fer {
            common,
            curve,
            avg_start_db,
            avg_stop_db,
            avg_points,
        } => {
            let ctx = Context::new(&common)?;
            let a = &ctx.exp.config.average;
            let grid = ctx.exp.config.average_grid(
                avg_start_db.unwrap_or(a.start_db),
                avg_stop_db.unwrap_or(a.stop_db),
                avg_points.unwrap_or(a.points),
            )?;
            cmd_fer(&ctx, curve.as_deref(), &grid, stdout)
        }
        Command::Simulate { common } => cmd_simulate(&Context::new(&common)?, stdout),
        Command::Perfplot { common } => cmd_perfplot(&Context::new(&common)?, stdout),
        Command::Validate {
            config,
            full,
            seed,
            out,
        } => cmd_validate(config.as_deref(), full, seed, out.as_deref(), stdout),
    }
}

/// Threshold together with the curve it came from.
struct ThresholdRun {
    threshold: WaterfallThreshold,
    curve: FerCurve,
    frames_total: u64,
}

fn compute_threshold(
    ctx: &Context,
    scheme: &SchemeSpec,
    stored: Option<&Path>,
) -> Result<ThresholdRun> {
    let len = scheme.frame_length();
    if ctx.exp.is_uncoded() && stored.is_none() {
        let threshold = waterfall_from_pd(
            |g| uncoded_detection_probability(snr_of(g), len),
            &QuadratureConfig::default(),
        )?;
        let curve = FerCurve::analytic(ctx.exp.plan.snr_grid(), |g| {
            uncoded_error_probability(snr_of(g), len)
        })?;
        return Ok(ThresholdRun {
            threshold,
            curve,
            frames_total: 0,
        });
    }
    let curve = match stored {
        Some(path) => {
            let file =
                File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            FerCurve::read_csv(file)?
        }
        None => measure_awgn_fer(scheme, &ctx.exp.plan)?,
    };
    let threshold = waterfall_from_fer_samples(&curve)?;
    let frames_total = curve.total_frames();
    Ok(ThresholdRun {
        threshold,
        curve,
        frames_total,
    })
}

fn write_threshold_report(ctx: &Context, run: &ThresholdRun, name: &str) -> Result<()> {
    let th = &run.threshold;
    match ctx.format {
        ReportFormat::Structured => {
            let mut out = ctx.create(&format!("{name}.txt"))?;
            writeln!(out, "scheme = {}", ctx.exp.scheme.name())?;
            th.write_record(&mut out)?;
            writeln!(out, "frames_total = {}", run.frames_total)?;
            out.flush()?;
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(ctx.create(&format!("{name}.csv"))?);
            w.write_record([
                "method",
                "gamma_w_db",
                "gamma_w_linear",
                "k_index",
                "frames_total",
            ])
            .map_err(csv_error)?;
            w.write_record([
                th.method.to_string(),
                format_significant(th.gamma_w.db(), 4),
                th.gamma_w.linear().to_string(),
                th.k_index
                    .map_or_else(|| "none".to_string(), |k| k.to_string()),
                run.frames_total.to_string(),
            ])
            .map_err(csv_error)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn summary(stdout: &mut dyn Write, scheme: &SchemeSpec, th: &WaterfallThreshold) -> Result<()> {
    writeln!(
        stdout,
        "{}: gamma_w = {} dB ({})",
        scheme.name(),
        format_significant(th.gamma_w.db(), 4),
        th.method
    )?;
    Ok(())
}

fn cmd_threshold(ctx: &Context, stored: Option<&Path>, stdout: &mut dyn Write) -> Result<i32> {
    let run = compute_threshold(ctx, &ctx.exp.scheme, stored)?;
    let mut out = ctx.create("fer_curve.csv")?;
    run.curve.write_csv(&mut out)?;
    out.flush()?;
    write_threshold_report(ctx, &run, "threshold")?;
    summary(stdout, &ctx.exp.scheme, &run.threshold)?;
    Ok(EXIT_OK)
}

fn cmd_fer(
    ctx: &Context,
    stored: Option<&Path>,
    grid: &[Snr],
    stdout: &mut dyn Write,
) -> Result<i32> {
    let run = compute_threshold(ctx, &ctx.exp.scheme, stored)?;
    let len = ctx.exp.scheme.frame_length();
    let cfg = QuadratureConfig::default();
    let mut w = csv::Writer::from_writer(ctx.create("fer.csv")?);
    w.write_record(["avg_snr_db", "fer_approx", "fer_exact"])
        .map_err(csv_error)?;
    for &avg in grid {
        let approx = approx_fer(avg, &run.threshold);
        let exact = if ctx.exp.is_uncoded() && stored.is_none() {
            exact_fer(|g| uncoded_error_probability(snr_of(g), len), avg, &cfg)?
        } else {
            exact_fer_from_samples(&run.curve, avg)?.fer
        };
        w.write_record([avg.db().to_string(), approx.to_string(), exact.to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;
    write_threshold_report(ctx, &run, "threshold")?;
    summary(stdout, &ctx.exp.scheme, &run.threshold)?;
    writeln!(
        stdout,
        "{} average SNR points written to fer.csv",
        grid.len()
    )?;
    Ok(EXIT_OK)
}

fn cmd_simulate(ctx: &Context, stdout: &mut dyn Write) -> Result<i32> {
    let sim = &ctx.exp.config.simulate;
    let curve = measure_qsf_fer(
        &ctx.exp.scheme,
        &ctx.exp.average_grid,
        sim.frames_per_point,
        ctx.exp.plan.seed(),
    )?;
    let mut w = csv::Writer::from_writer(ctx.create("qsf_fer.csv")?);
    w.write_record(["avg_snr_db", "frames", "errors", "fer", "ci_low", "ci_high"])
        .map_err(csv_error)?;
    for p in curve.points() {
        let (lo, hi) = binomial_ci(p.errors, p.frames, sim.confidence)?;
        w.write_record([
            p.snr.db().to_string(),
            p.frames.to_string(),
            p.errors.to_string(),
            p.fer.to_string(),
            lo.to_string(),
            hi.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    writeln!(
        stdout,
        "{}: {} frames over {} average SNR points written to qsf_fer.csv",
        ctx.exp.scheme.name(),
        curve.total_frames(),
        curve.len()
    )?;
    Ok(EXIT_OK)
}

fn cmd_perfplot(ctx: &Context, stdout: &mut dyn Write) -> Result<i32> {
    let mut areas = vec![];
    let mut envelope = None;
    for len in ctx.exp.perfplot_lengths() {
        let scheme = ctx.exp.config.scheme_with_length(len)?;
        let detection = if ctx.exp.is_uncoded() {
            DetectionCurve::analytic(ctx.exp.plan.snr_grid(), |g| {
                uncoded_detection_probability(snr_of(g), len)
            })?
        } else {
            let curve = measure_awgn_fer(&scheme, &ctx.exp.plan)?;
            let mut out = ctx.create(&format!("fer_curve_L{len}.csv"))?;
            curve.write_csv(&mut out)?;
            out.flush()?;
            DetectionCurve::from_fer_curve(&curve)?
        };
        let curves = normalized_detection_curve(&detection)?;
        let mut out = ctx.create(&format!("normalized_L{len}.csv"))?;
        write_value_csv(&mut out, "pd/gamma^2", &curves.normalized)?;
        out.flush()?;
        areas.push((len, curves.area(), curves.envelope_area()));
        envelope.get_or_insert(curves.envelope);
    }
    let mut out = ctx.create("envelope.csv")?;
    write_value_csv(
        &mut out,
        "1/gamma^2",
        envelope.as_deref().unwrap_or_default(),
    )?;
    out.flush()?;

    let mut w = csv::Writer::from_writer(ctx.create("areas.csv")?);
    w.write_record(["frame_length", "area", "envelope_area"])
        .map_err(csv_error)?;
    for &(len, area, env) in &areas {
        w.write_record([len.to_string(), area.to_string(), env.to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;
    for (len, area, env) in areas {
        writeln!(stdout, "L={len}: area {area:.6} of envelope {env:.6}")?;
    }
    Ok(EXIT_OK)
}

fn cmd_validate(
    config: Option<&Path>,
    full: bool,
    seed: u64,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    if let Some(path) = config {
        Experiment::from_path(path)?;
    }
    let scope = if full { Scope::Full } else { Scope::Analytic };
    let outcomes = validation::run_all(scope, seed);
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join("validation.csv");
        let file =
            File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["id", "check", "passed", "measured", "expected", "seconds"])
            .map_err(csv_error)?;
        for o in &outcomes {
            w.write_record([
                o.id.to_string(),
                o.title.to_string(),
                o.passed.to_string(),
                o.measured.clone(),
                o.expected.clone(),
                o.elapsed.as_secs_f64().to_string(),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
    }
    validation::write_table(&mut *stdout, &outcomes)?;
    Ok(if outcomes.iter().all(|o| o.passed) {
        EXIT_OK
    } else {
        EXIT_ACCEPTANCE
    })
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn snr_of(g: f64) -> Snr {
    Snr::from_linear(g).expect("quadrature nodes are nonnegative")
}
