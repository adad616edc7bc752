//! The `gmsd` command-line front end.
//!
//! Exit codes: 0 success, 2 I/O or unreadable input (including malformed
//! manifests), 3 validation failure (mismatched sizes, bad parameters).
//! Argument parsing errors use clap's own exit code, which is also 2.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bench::{self, BenchOptions};
use crate::error::{Error, Result};
use crate::eval::{self, GroupBy, LogisticForm, ReportRow};
use crate::gmsd::{self, Metric, MetricConfig, Psnr, DEFAULT_C};
use crate::image::{self, DistortionKind, DistortionSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "gmsd",
    version,
    about = "Gradient magnitude similarity deviation image quality toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score a distorted image against its reference.
    Score(ScoreArgs),
    /// Evaluate a metric against subjective scores listed in a manifest.
    Evaluate(EvaluateArgs),
    /// Write a synthetically distorted copy of an image.
    Distort(DistortArgs),
    /// SROCC of GMSD across a range of stability constants.
    Sweep(SweepArgs),
    /// Time a metric across image sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Gmsd,
    Gmsm,
    Psnr,
    MseSd,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Gmsd => Metric::Gmsd,
            MetricArg::Gmsm => Metric::Gmsm,
            MetricArg::Psnr => Metric::Psnr,
            MetricArg::MseSd => Metric::MseSd,
        }
    }
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Stability constant for images normalized to [0, 1].
    #[arg(long, default_value_t = DEFAULT_C)]
    pub c: f64,
    /// Skip the 2x2 average and downsample step.
    #[arg(long)]
    pub no_downsample: bool,
}

impl KernelArgs {
    fn config(&self) -> MetricConfig {
        MetricConfig {
            c: self.c,
            downsample: !self.no_downsample,
            ..MetricConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    pub reference: PathBuf,
    pub distorted: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::Gmsd)]
    pub metric: MetricArg,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Write the GMS map as a PGM image (gmsd and gmsm only).
    #[arg(long, value_name = "PATH")]
    pub dump_map: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupArg {
    None,
    Distortion,
    Dataset,
}

impl From<GroupArg> for GroupBy {
    fn from(g: GroupArg) -> Self {
        match g {
            GroupArg::None => GroupBy::None,
            GroupArg::Distortion => GroupBy::DistortionType,
            GroupArg::Dataset => GroupBy::DatasetId,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogisticArg {
    Standard,
    Literal,
}

impl From<LogisticArg> for LogisticForm {
    fn from(l: LogisticArg) -> Self {
        match l {
            LogisticArg::Standard => LogisticForm::Standard,
            LogisticArg::Literal => LogisticForm::Literal,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::Gmsd)]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value_t = GroupArg::None)]
    pub group_by: GroupArg,
    #[arg(long, value_enum, default_value_t = LogisticArg::Standard)]
    pub logistic: LogisticArg,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Awn,
    Blur,
    Contrast,
}

impl From<KindArg> for DistortionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Awn => DistortionKind::Awn,
            KindArg::Blur => DistortionKind::GaussianBlur,
            KindArg::Contrast => DistortionKind::ContrastScale,
        }
    }
}

#[derive(Debug, Args)]
pub struct DistortArgs {
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub c_min: f64,
    #[arg(long)]
    pub c_max: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long)]
    pub log_scale: bool,
    #[arg(long)]
    pub no_downsample: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated sizes, each WxH or a single side length.
    #[arg(long, value_delimiter = ',', value_parser = parse_size, default_value = "256,512,1024")]
    pub sizes: Vec<(usize, usize)>,
    #[arg(long, default_value_t = 7)]
    pub repeats: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::Gmsd)]
    pub metric: MetricArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also time the row-parallel kernel and report both runs.
    #[arg(long)]
    pub parallel: bool,
    /// Write `pixels,seconds` rows of the sequential run to this file.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid size {s:?}"))
    };
    match s.split_once(['x', 'X']) {
        Some((w, h)) => Ok((parse(w)?, parse(h)?)),
        None => {
            let n = parse(s)?;
            Ok((n, n))
        }
    }
}

/// Formats with six significant digits, keeping trailing zeros.
pub fn format_sig6(v: f64) -> String {
    if !v.is_finite() {
        return if v > 0.0 {
            "inf".into()
        } else {
            format!("{v}")
        };
    }
    if v == 0.0 {
        return "0.000000".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // rounding can carry into a new digit (9.999995 -> 10.00000)
    let rounded: f64 = s.parse().unwrap_or(v);
    if rounded.abs().log10().floor() as i32 > magnitude && decimals > 0 {
        format!("{v:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_io() {
                EXIT_IO
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    let text = match command {
        Command::Score(a) => score(a)?,
        Command::Evaluate(a) => evaluate(a)?,
        Command::Distort(a) => distort(a)?,
        Command::Sweep(a) => sweep(a)?,
        Command::Bench(a) => bench(a)?,
    };
    out.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: "<stdout>".into(),
        source,
    })
}

fn to_json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn score(a: ScoreArgs) -> Result<String> {
    let metric = Metric::from(a.metric);
    let reference = image::load_image(&a.reference)?;
    let distorted = image::load_image(&a.distorted)?;
    let mut config = a.kernel.config();
    config.validate()?;

    let value = match metric {
        Metric::Gmsd | Metric::Gmsm => {
            config.retain_map = a.dump_map.is_some();
            let result = gmsd::gmsd_index(&reference, &distorted, &config)?;
            if let (Some(path), Some(map)) = (&a.dump_map, &result.map) {
                image::save_gray(&map.to_image(), path)?;
            }
            if metric == Metric::Gmsd {
                result.gmsd
            } else {
                result.gmsm
            }
        }
        Metric::Psnr | Metric::MseSd => {
            if a.dump_map.is_some() {
                return Err(Error::InvalidParameter(
                    "--dump-map is only available for gmsd and gmsm".into(),
                ));
            }
            if metric == Metric::Psnr {
                match gmsd::psnr(&reference, &distorted)? {
                    Psnr::Decibels(db) => db,
                    Psnr::Infinite => f64::INFINITY,
                }
            } else {
                gmsd::mse_sd_index(&reference, &distorted)?
            }
        }
    };

    if a.json {
        Ok(to_json(&json!({
            "metric": metric.name(),
            "score": value.is_finite().then_some(value),
            "infinite": value.is_infinite(),
            "width": reference.width(),
            "height": reference.height(),
            "c": config.c,
            "downsample": config.downsample,
        })))
    } else {
        Ok(format!("{}\n", format_sig6(value)))
    }
}

fn evaluate(a: EvaluateArgs) -> Result<String> {
    let records = eval::read_manifest(&a.manifest)?;
    let config = a.kernel.config();
    config.validate()?;
    let groups = eval::evaluate(
        &records,
        a.metric.into(),
        &config,
        a.group_by.into(),
        a.logistic.into(),
    )?;
    let rows: Vec<ReportRow> = groups.iter().map(ReportRow::from).collect();
    Ok(if a.json {
        to_json(&rows)
    } else {
        eval::format_table(&rows)
    })
}

fn distort(a: DistortArgs) -> Result<String> {
    let spec = DistortionSpec::new(a.kind.into(), a.level, a.seed)?;
    let input = image::load_image(&a.input)?;
    let output = image::apply_distortion(&input, &spec)?;
    image::save_gray(&output, &a.out)?;
    Ok(String::new())
}

fn sweep(a: SweepArgs) -> Result<String> {
    let cs = eval::c_ladder(a.c_min, a.c_max, a.steps, a.log_scale)?;
    let records = eval::read_manifest(&a.manifest)?;
    let config = MetricConfig {
        downsample: !a.no_downsample,
        ..MetricConfig::default()
    };
    let points = eval::sweep_c(&records, &cs, &config)?;
    if a.json {
        return Ok(to_json(&points));
    }
    let mut s = String::from("c,srocc\n");
    for p in &points {
        s.push_str(&format!("{:e},{}\n", p.c, format_sig6(p.srocc)));
    }
    Ok(s)
}

fn bench(a: BenchArgs) -> Result<String> {
    let metric = Metric::from(a.metric);
    let opts = BenchOptions {
        repeats: a.repeats,
        seed: a.seed,
        parallel: false,
    };
    let mut reports = vec![bench::bench_metric(metric, &a.sizes, &opts)?];
    if a.parallel {
        reports.push(bench::bench_metric(
            metric,
            &a.sizes,
            &BenchOptions {
                parallel: true,
                ..opts
            },
        )?);
    }
    if let Some(path) = &a.csv {
        std::fs::write(path, reports[0].to_csv()).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
    }
    if a.json {
        return Ok(to_json(&reports));
    }
    let mut s = String::new();
    for r in &reports {
        s.push_str(&format!(
            "{} ({}), median of {} repeats\n",
            r.metric,
            if r.parallel { "parallel" } else { "sequential" },
            r.repeats
        ));
        for ((w, h), t) in r.image_sizes.iter().zip(&r.median_times) {
            s.push_str(&format!("  {w:>5}x{h:<5} {} s\n", format_sig6(*t)));
        }
        s.push_str(&format!(
            "  scaling exponent {}\n  {}\n",
            format_sig6(r.scaling_exponent),
            r.op_budget
        ));
    }
    Ok(s)
}
