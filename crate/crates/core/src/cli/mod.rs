//! Command-line front end: `dist`, `sweep`, `check` and `figure`.

pub mod checks;
pub mod figures;
pub mod output;
pub mod scenario;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::channels::{Detector, DistinguishabilityAngle, RotatedBeam};
use crate::error::Error;
use crate::numeric::{parse_rational, Rational};
use crate::state::{BeamSplitter, FockPair};
use checks::Suite;
use figures::FigureId;
use output::{envelope, series_csv, Cell, Manifest, Series};
use scenario::{parse_angle, Scenario, SourceQuality};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Caps the worker pool used by sweeps, figures and checks.
pub const THREADS_ENV: &str = "HOMLEAP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "homleap", version, about = "Multiphoton Hong-Ou-Mandel interference as a one-step quantum walk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Output distribution of Δ_out for one setting
    Dist(DistArgs),
    /// Distributions over a grid of one parameter
    Sweep(SweepArgs),
    /// Run a verification suite
    Check(CheckArgs),
    /// Write figure data and a gnuplot script
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Mode {
    Exact,
    #[default]
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Beam {
    #[default]
    A,
    B,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, value_enum, default_value_t = Mode::Float)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (directory for `figure`); stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value file; flags given on the command line win
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Setting {
    /// Total photon number S = K + L
    #[arg(long)]
    pub s: u32,
    /// Input difference Δ = K - L
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub delta: i64,
    /// Reflectivity, decimal or fraction
    #[arg(long, default_value = "1/2")]
    pub r: String,
    /// Distinguishability angle in radians (`pi/6` accepted)
    #[arg(long, default_value = "0")]
    pub y: String,
    /// Beam whose polarization is rotated by y
    #[arg(long, value_enum, default_value_t = Beam::A)]
    pub rotated: Beam,
    /// Source parameter η of both degraded Fock inputs
    #[arg(long, conflicts_with = "purity")]
    pub eta: Option<String>,
    /// Joint purity of the input; η is solved for
    #[arg(long)]
    pub purity: Option<f64>,
    /// Detector efficiency
    #[arg(long, default_value = "1")]
    pub eta_det: String,
    /// Detector count resolution (bin width in Δ_out)
    #[arg(long, default_value_t = 1)]
    pub bin: u32,
}

#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    #[command(flatten)]
    pub setting: Setting,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    R,
    Y,
    Eta,
    #[value(name = "eta_det", alias = "eta-det")]
    EtaDet,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::R => "r",
            SweepParam::Y => "y",
            SweepParam::Eta => "eta",
            SweepParam::EtaDet => "eta_det",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Parameter to vary
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// Comma-separated grid
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<String>,
    #[command(flatten)]
    pub setting: Setting,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub id: FigureId,
    #[command(flatten)]
    pub common: Common,
}

/// Parse, run and report. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let raw: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let expanded = match with_config(&raw) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            return EXIT_INVALID;
        }
    };
    let cli = match Cli::try_parse_from(&expanded) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    configure_threads();
    let command: Vec<String> = raw.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(&cli.command, command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_INVALID
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Splice `--key=value` pairs from a `--config` file in right after the
/// subcommand so that later command-line flags override them.
fn with_config(raw: &[OsString]) -> anyhow::Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in raw.iter().enumerate() {
        let a = a.to_string_lossy();
        if a == "--config" {
            path = raw.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(raw.to_vec());
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {}", path.display()))?;
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), lineno + 1);
        };
        let key = key.trim().replace('_', "-");
        if key == "config" {
            bail!("{}:{}: config files cannot nest", path.display(), lineno + 1);
        }
        let flag = format!("--{key}");
        let given = raw.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag || a.starts_with(&format!("{flag}="))
        });
        if !given {
            extra.push(OsString::from(format!("{flag}={}", value.trim())));
        }
    }
    let at = raw.len().min(2);
    let mut out = raw[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&raw[at..]);
    Ok(out)
}

fn dispatch(command: &Command, argv: Vec<String>, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    match command {
        Command::Dist(args) => {
            let sc = scenario(&args.setting)?;
            let series = vec![compute_series(&sc, Vec::new(), args.common.mode)?];
            let params = setting_params(&args.setting);
            emit_series(&args.common, argv, params, &series, false, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Sweep(args) => {
            let mut params = setting_params(&args.setting);
            params.insert("param".into(), args.param.name().into());
            params.insert("values".into(), args.values.join(","));
            let series = sweep(args)?;
            emit_series(&args.common, argv, params, &series, true, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Check(args) => {
            let rows = checks::run(args.suite)?;
            let pass = rows.iter().all(|r| r.pass);
            let text = match args.common.format {
                Format::Csv => {
                    let columns: Vec<String> = ["suite", "check", "max_deviation", "tolerance", "pass"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect();
                    let body: Vec<Vec<String>> = rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.suite.to_string(),
                                r.check.to_string(),
                                output::Cell::float(r.max_deviation).text,
                                output::Cell::float(r.tolerance).text,
                                r.pass.to_string(),
                            ]
                        })
                        .collect();
                    output::csv(&columns, &body)
                }
                Format::Json => {
                    let items: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|r| {
                            serde_json::json!({
                                "suite": r.suite,
                                "check": r.check,
                                "max_deviation": r.max_deviation,
                                "tolerance": r.tolerance,
                                "pass": r.pass,
                            })
                        })
                        .collect();
                    serde_json::to_string_pretty(&serde_json::json!({ "pass": pass, "checks": items }))? + "\n"
                }
            };
            write_text(args.common.out.as_deref(), &text, stdout)?;
            Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Figure(args) => {
            if args.common.mode == Mode::Exact {
                bail!(Error::range("mode", "figures are computed in float mode"));
            }
            let dir = args.common.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let written = write_figure(args.id, &dir, argv)?;
            for path in written {
                writeln!(stdout, "{}", path.display())?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn scenario(setting: &Setting) -> anyhow::Result<Scenario> {
    let pair = FockPair::new(setting.s, setting.delta)?;
    let bs = BeamSplitter::parse(&setting.r)?;
    let mut sc = Scenario::pure(pair, bs);
    sc.angle = DistinguishabilityAngle::new(parse_angle(&setting.y)?)?;
    sc.rotated = match setting.rotated {
        Beam::A => RotatedBeam::A,
        Beam::B => RotatedBeam::B,
    };
    sc.source = match (&setting.eta, setting.purity) {
        (Some(eta), _) => SourceQuality::Eta(parse_rational(eta)?),
        (None, Some(p)) => SourceQuality::Purity(p),
        (None, None) => SourceQuality::Pure,
    };
    sc.detector = Detector::from_rational(parse_rational(&setting.eta_det)?, setting.bin)?;
    Ok(sc)
}

fn setting_params(setting: &Setting) -> BTreeMap<String, String> {
    let mut p = BTreeMap::new();
    p.insert("s".into(), setting.s.to_string());
    p.insert("delta".into(), setting.delta.to_string());
    p.insert("r".into(), setting.r.clone());
    p.insert("y".into(), setting.y.clone());
    p.insert("rotated".into(), format!("{:?}", setting.rotated).to_lowercase());
    if let Some(eta) = &setting.eta {
        p.insert("eta".into(), eta.clone());
    }
    if let Some(purity) = setting.purity {
        p.insert("purity".into(), purity.to_string());
    }
    p.insert("eta_det".into(), setting.eta_det.clone());
    p.insert("bin".into(), setting.bin.to_string());
    p
}

fn compute_series(sc: &Scenario, params: Vec<(String, Cell)>, mode: Mode) -> anyhow::Result<Series> {
    Ok(match mode {
        Mode::Exact => Series::from_masses(params, &sc.compute::<Rational>()?),
        Mode::Float => Series::from_masses(params, &sc.compute::<f64>()?),
    })
}

fn sweep(args: &SweepArgs) -> anyhow::Result<Vec<Series>> {
    let base = scenario(&args.setting)?;
    let points: Vec<(Scenario, Cell)> = args
        .values
        .iter()
        .map(|v| -> anyhow::Result<(Scenario, Cell)> {
            let v = v.trim();
            let mut sc = base.clone();
            match args.param {
                SweepParam::R => sc.bs = BeamSplitter::parse(v)?,
                SweepParam::Y => sc.angle = DistinguishabilityAngle::new(parse_angle(v)?)?,
                SweepParam::Eta => sc.source = SourceQuality::Eta(parse_rational(v)?),
                SweepParam::EtaDet => sc.detector = Detector::from_rational(parse_rational(v)?, args.setting.bin)?,
            }
            Ok((sc, Cell::text(v)))
        })
        .collect::<anyhow::Result<_>>()?;
    let name = args.param.name().to_string();
    points
        .into_par_iter()
        .map(|(sc, cell)| compute_series(&sc, vec![(name.clone(), cell)], args.common.mode))
        .collect()
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Exact => "exact",
        Mode::Float => "float",
    }
}

fn emit_series(
    common: &Common,
    argv: Vec<String>,
    params: BTreeMap<String, String>,
    series: &[Series],
    with_moments: bool,
    stdout: &mut dyn Write,
) -> anyhow::Result<()> {
    match common.format {
        Format::Csv => {
            let text = series_csv(series, with_moments);
            write_text(common.out.as_deref(), &text, stdout)?;
            if let Some(path) = &common.out {
                let manifest = Manifest::new(argv, params, mode_name(common.mode), text.as_bytes());
                write_manifest(&manifest_path(path), &manifest)?;
            }
        }
        Format::Json => {
            let (_, text) = envelope(argv, params, mode_name(common.mode), series);
            write_text(common.out.as_deref(), &text, stdout)?;
        }
    }
    Ok(())
}

fn manifest_path(data: &Path) -> PathBuf {
    let mut name = data.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    data.with_file_name(name)
}

fn write_manifest(path: &Path, manifest: &Manifest) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(manifest)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => stdout.write_all(text.as_bytes()).context("writing to stdout"),
    }
}

/// Writes `<id>.csv`, `<id>.gp` and `<id>.csv.manifest.json` into `dir`.
pub fn write_figure(id: FigureId, dir: &Path, argv: Vec<String>) -> anyhow::Result<Vec<PathBuf>> {
    let fig = figures::build(id)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let data = dir.join(format!("{}.csv", id.name()));
    let script = dir.join(format!("{}.gp", id.name()));
    fs::write(&data, &fig.csv).with_context(|| format!("writing {}", data.display()))?;
    fs::write(&script, &fig.script).with_context(|| format!("writing {}", script.display()))?;
    let mut params = BTreeMap::new();
    params.insert("figure".to_string(), id.name().to_string());
    let manifest = Manifest::new(argv, params, "float", fig.csv.as_bytes());
    let man = manifest_path(&data);
    write_manifest(&man, &manifest)?;
    Ok(vec![data, script, man])
}

