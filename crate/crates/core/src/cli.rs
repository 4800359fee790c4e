//! Command-line front end.
//!
//! Every flag can also be set in a TOML file passed with `--config`, using
//! the flag's long name as the key (`w1 = 15`, `z-match = 0.2`, ...).
//! Values given on the command line take precedence over the file.
//!
//! Exit status is 0 on success, 1 for invalid input and 2 when a numerical
//! step did not converge (any partial output is still written and flagged).

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::eigensolver::{assemble_wavefunction, evaluate_wronskian, find_eigenvalues, SolveOptions};
use crate::error::Error;
use crate::frobenius::{SBranch, SSign};
use crate::model::{energy_search_ceiling, WellParameters};
use crate::numeric::linspace;
use crate::oracle::fd_spectrum_adaptive;
use crate::qes::{solve_w2_for_termination_in, DEFAULT_W2_CAP};
use crate::threshold::{threshold_scan, ThresholdMap, DEFAULT_RANGE, DEFAULT_RESOLUTION, W1_PRESETS};

pub const THREADS_ENV: &str = "HEUNWELL_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "heunwell",
    version,
    about = "Bound states of the hyperbolic asymmetric double well"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound-state energies from zeros of the Wronskian.
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Solve {
        #[command(flatten)]
        well: WellArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Tabulates the normalized Wronskian against E.
    #[command(allow_negative_numbers = true, args_override_self = true)]
    WronskianSweep {
        #[command(flatten)]
        well: WellArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        e_min: Option<f64>,
        /// Defaults to the top of the bound-state window.
        #[arg(long)]
        e_max: Option<f64>,
        #[arg(long, default_value_t = 500)]
        points: usize,
    },
    /// Normalized wavefunctions of the bound states.
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Wavefunction {
        #[command(flatten)]
        well: WellArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        io: IoArgs,
        /// Only this level, indexed in ascending E (0 = least bound).
        #[arg(long)]
        level: Option<usize>,
        /// Sample spacing in z.
        #[arg(long)]
        wave_step: Option<f64>,
    },
    /// Bound-state counts over (w2, w3) and the curves where levels appear.
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Threshold {
        #[command(flatten)]
        well: WellArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, default_value_t = DEFAULT_RANGE.0)]
        w2_min: f64,
        #[arg(long, default_value_t = DEFAULT_RANGE.1)]
        w2_max: f64,
        #[arg(long, default_value_t = DEFAULT_RANGE.0)]
        w3_min: f64,
        #[arg(long, default_value_t = DEFAULT_RANGE.1)]
        w3_max: f64,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
        /// With CSV output, also write the curve polylines here.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Wells with a polynomial (quasi-exactly solvable) state.
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Qes {
        #[command(flatten)]
        well: WellArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        io: IoArgs,
        /// Polynomial degree N.
        #[arg(long, default_value_t = 0)]
        order: usize,
        #[arg(long, value_enum, default_value_t = SignArg::Both)]
        s_sign: SignArg,
        /// Search w2 in [-w2-cap, w2-cap].
        #[arg(long, default_value_t = DEFAULT_W2_CAP)]
        w2_cap: f64,
    },
    /// Finite-difference spectrum next to the Wronskian spectrum.
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Oracle {
        #[command(flatten)]
        well: WellArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        io: IoArgs,
        #[arg(short = 'k', long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0.005)]
        h: f64,
        #[arg(long, default_value_t = 25.0)]
        z_span: f64,
        #[arg(long, default_value_t = 4000.0)]
        max_span: f64,
    },
}

/// Either the dimensionless strengths or the dimensional ones with a width.
#[derive(Debug, Clone, Default, Args)]
pub struct WellArgs {
    #[arg(long)]
    pub w1: Option<f64>,
    #[arg(long)]
    pub w2: Option<f64>,
    #[arg(long)]
    pub w3: Option<f64>,
    #[arg(long)]
    pub v1: Option<f64>,
    #[arg(long)]
    pub v2: Option<f64>,
    #[arg(long)]
    pub v3: Option<f64>,
    #[arg(long)]
    pub length: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub z_match: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub refine_tol: Option<f64>,
    #[arg(long)]
    pub e_floor: Option<f64>,
    /// Upper end of the energy scan.
    #[arg(long)]
    pub ceiling: Option<f64>,
    #[arg(long, value_enum)]
    pub s_branch: Option<BranchArg>,
    #[arg(long)]
    pub max_terms: Option<usize>,
    #[arg(long)]
    pub tail_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct IoArgs {
    /// TOML file with default values for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
    Both,
}

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::Config(_) => 1,
            Error::NotConverged { .. } | Error::MatchFailure(_) => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::config(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Self::config(format!("csv error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::config(format!("json error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the tool on `argv` (program name first), printing to stdout and
/// stderr. Returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    run_with(argv, &mut io::stdout())
}

/// As [`run`], with the primary stdout stream redirected to `out`.
pub fn run_with<I, T>(argv: I, out: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match parse_with_config(&argv) {
        Ok(Some(cli)) => cli,
        Ok(None) => return 0,
        Err(f) => {
            eprintln!("heunwell: {}", f.message);
            return f.code;
        }
    };
    let result = thread_pool().and_then(|pool| match pool {
        Some(pool) => pool.install(|| execute(&cli.command, out)),
        None => execute(&cli.command, out),
    });
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("heunwell: {}", f.message);
            f.code
        }
    }
}

fn thread_pool() -> CliResult<Option<rayon::ThreadPool>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize =
        raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Failure::config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Failure::config(format!("cannot start {n} worker threads: {e}")))
}

/// Parses `argv`, then re-parses with the config file's entries inserted
/// ahead of the user's flags so that the latter override them.
/// `Ok(None)` means help or version was printed.
fn parse_with_config(argv: &[String]) -> CliResult<Option<Cli>> {
    let first = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => return clap_outcome(e),
    };
    let Some(path) = first.command.io().config.clone() else {
        return Ok(Some(first));
    };

    let sub = first.command.name();
    let injected = config_arguments(&path, sub)?;
    let mut merged = argv[..2].to_vec();
    merged.extend(injected);
    merged.extend_from_slice(&argv[2..]);
    match Cli::try_parse_from(&merged) {
        Ok(cli) => Ok(Some(cli)),
        Err(e) => clap_outcome(e),
    }
}

fn clap_outcome(e: clap::Error) -> CliResult<Option<Cli>> {
    use clap::error::ErrorKind;
    match e.kind() {
        ErrorKind::DisplayHelp
        | ErrorKind::DisplayVersion
        | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = e.print();
            Ok(None)
        }
        _ => Err(Failure::config(
            e.render()
                .to_string()
                .trim_end()
                .trim_start_matches("error: ")
                .to_string(),
        )),
    }
}

/// Turns `key = value` pairs into `--key=value` arguments, rejecting keys
/// that are not flags of `subcommand`.
fn config_arguments(path: &Path, subcommand: &str) -> CliResult<Vec<String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| Failure::config(format!("config {}: {e}", path.display())))?;

    let cmd = Cli::command();
    let sub = cmd.find_subcommand(subcommand).expect("parsed subcommand exists");
    let known: Vec<&str> = sub.get_arguments().filter_map(|a| a.get_long()).collect();

    let mut args = Vec::new();
    for (key, value) in &table {
        if key == "config" || !known.contains(&key.as_str()) {
            return Err(Failure::config(format!(
                "config {}: unknown key {key:?} for {subcommand}",
                path.display()
            )));
        }
        let text = match value {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            other => {
                return Err(Failure::config(format!(
                    "config {}: key {key:?} must be a number or string, got {other}",
                    path.display()
                )))
            }
        };
        args.push(format!("--{key}={text}"));
    }
    Ok(args)
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::WronskianSweep { .. } => "wronskian-sweep",
            Command::Wavefunction { .. } => "wavefunction",
            Command::Threshold { .. } => "threshold",
            Command::Qes { .. } => "qes",
            Command::Oracle { .. } => "oracle",
        }
    }

    fn parts(&self) -> (&WellArgs, &SolverArgs, &IoArgs) {
        match self {
            Command::Solve { well, solver, io }
            | Command::WronskianSweep { well, solver, io, .. }
            | Command::Wavefunction { well, solver, io, .. }
            | Command::Threshold { well, solver, io, .. }
            | Command::Qes { well, solver, io, .. }
            | Command::Oracle { well, solver, io, .. } => (well, solver, io),
        }
    }

    fn io(&self) -> &IoArgs {
        self.parts().2
    }
}

impl WellArgs {
    /// The full triple, from exactly one of the two parameterizations.
    pub fn resolve(&self) -> CliResult<WellParameters> {
        let w = [self.w1, self.w2, self.w3];
        let v = [self.v1, self.v2, self.v3, self.length];
        let any_w = w.iter().any(Option::is_some);
        let any_v = v.iter().any(Option::is_some);
        match (any_w, any_v) {
            (true, true) => Err(Failure::config(
                "give either --w1/--w2/--w3 or --v1/--v2/--v3/--length, not both",
            )),
            (true, false) => match w {
                [Some(w1), Some(w2), Some(w3)] => Ok(WellParameters::new(w1, w2, w3)?),
                _ => Err(Failure::config("--w1, --w2 and --w3 are all required")),
            },
            (false, true) => match v {
                [Some(v1), Some(v2), Some(v3), Some(l)] => {
                    Ok(WellParameters::from_dimensional(v1, v2, v3, l)?)
                }
                _ => Err(Failure::config("--v1, --v2, --v3 and --length are all required")),
            },
            (false, false) => Err(Failure::config(
                "missing well parameters: give --w1 --w2 --w3 or --v1 --v2 --v3 --length",
            )),
        }
    }

    /// Dimensionless `w1` and `w3` for commands that determine `w2`
    /// themselves, or only `w1` when `with_w3` is false.
    fn partial(&self, command: &str, with_w3: bool) -> CliResult<(Option<f64>, Option<f64>)> {
        if self.w2.is_some() || self.v2.is_some() {
            return Err(Failure::config(format!("{command} does not take w2")));
        }
        if !with_w3 && (self.w3.is_some() || self.v3.is_some()) {
            return Err(Failure::config(format!("{command} does not take w3")));
        }
        let dimensional = self.v1.is_some() || self.v3.is_some() || self.length.is_some();
        if dimensional && (self.w1.is_some() || self.w3.is_some()) {
            return Err(Failure::config(
                "give either dimensionless or dimensional parameters, not both",
            ));
        }
        if !dimensional {
            return Ok((self.w1, self.w3));
        }
        let l = self
            .length
            .ok_or_else(|| Failure::config("--length is required with --v1/--v3"))?;
        let p = WellParameters::from_dimensional(self.v1.unwrap_or(0.0), 0.0, self.v3.unwrap_or(0.0), l)?;
        Ok((self.v1.map(|_| p.w1), self.v3.map(|_| p.w3)))
    }
}

impl SolverArgs {
    pub fn options(&self) -> CliResult<SolveOptions> {
        let mut o = SolveOptions::default();
        if let Some(v) = self.z_match {
            o.z_match = v;
        }
        if let Some(v) = self.grid_points {
            o.grid_points = v;
        }
        if let Some(v) = self.refine_tol {
            o.refine_tol = v;
        }
        if let Some(v) = self.e_floor {
            o.e_floor = v;
        }
        o.ceiling_override = self.ceiling;
        if let Some(b) = self.s_branch {
            o.s_branch = match b {
                BranchArg::Plus => SBranch::Plus,
                BranchArg::Minus => SBranch::Minus,
                BranchArg::Balanced => SBranch::Balanced,
            };
        }
        if let Some(v) = self.max_terms {
            o.series.max_terms = v;
        }
        if let Some(v) = self.tail_tol {
            o.series.tail_tol = v;
        }
        o.validate()?;
        Ok(o)
    }
}

fn execute(command: &Command, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let (well, solver, io) = command.parts();
    let opts = solver.options()?;
    match command {
        Command::Solve { .. } => solve(&well.resolve()?, &opts, io, out),
        Command::WronskianSweep {
            e_min, e_max, points, ..
        } => sweep(&well.resolve()?, &opts, io, out, *e_min, *e_max, *points),
        Command::Wavefunction { level, wave_step, .. } => {
            let mut opts = opts;
            if let Some(step) = wave_step {
                opts.wave_step = *step;
                opts.validate()?;
            }
            wavefunctions(&well.resolve()?, &opts, io, out, *level)
        }
        Command::Threshold {
            w2_min,
            w2_max,
            w3_min,
            w3_max,
            resolution,
            curves,
            ..
        } => {
            let (w1, _) = well.partial("threshold", false)?;
            let w1s = match w1 {
                Some(w1) => vec![w1],
                None => W1_PRESETS.to_vec(),
            };
            let scan = ThresholdScan {
                w2: (*w2_min, *w2_max),
                w3: (*w3_min, *w3_max),
                resolution: *resolution,
            };
            threshold(&w1s, &scan, &opts, io, out, curves.as_deref())
        }
        Command::Qes {
            order,
            s_sign,
            w2_cap,
            ..
        } => {
            let (w1, w3) = well.partial("qes", true)?;
            let (Some(w1), Some(w3)) = (w1, w3) else {
                return Err(Failure::config("qes needs w1 and w3 (or v1, v3 and length)"));
            };
            qes(w1, w3, *order, *s_sign, *w2_cap, &opts, io, out)
        }
        Command::Oracle {
            k,
            h,
            z_span,
            max_span,
            ..
        } => oracle(&well.resolve()?, &opts, io, out, *k, *h, *z_span, *max_span),
    }
}

/// Writes `text` to `--output` when given, otherwise to `out`.
fn emit(io: &IoArgs, out: &mut (dyn Write + Send), text: &str) -> CliResult<()> {
    match &io.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display()))),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn csv_text<R, I>(header: &[&str], rows: I) -> CliResult<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::config(format!("csv error: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_text<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

#[derive(Serialize)]
struct SolveReport<'a> {
    well: &'a WellParameters,
    options: &'a SolveOptions,
    #[serde(flatten)]
    result: &'a crate::eigensolver::EigenResult,
}

fn solve(
    p: &WellParameters,
    opts: &SolveOptions,
    io: &IoArgs,
    out: &mut (dyn Write + Send),
) -> CliResult<()> {
    let res = find_eigenvalues(p, opts)?;
    warn_all(&res.diagnostics.warnings);
    if res.is_empty() {
        writeln!(out, "no bound states")?;
    } else {
        for (n, e) in res.energies.iter().enumerate() {
            writeln!(out, "E{n} = {e:.10}")?;
        }
    }
    let Some(path) = &io.output else { return Ok(()) };
    let text = match io.format {
        Format::Json => json_text(&SolveReport {
            well: p,
            options: opts,
            result: &res,
        })?,
        Format::Csv => csv_text(
            &["n", "E"],
            res.energies
                .iter()
                .enumerate()
                .map(|(n, &e)| vec![n.to_string(), num(e)]),
        )?,
    };
    fs::write(path, text).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct SweepPoint {
    #[serde(rename = "E")]
    energy: f64,
    #[serde(rename = "W")]
    normalized: Option<f64>,
    #[serde(rename = "W_raw")]
    raw: Option<f64>,
    terms_left: Option<usize>,
    terms_right: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn sweep(
    p: &WellParameters,
    opts: &SolveOptions,
    io: &IoArgs,
    out: &mut (dyn Write + Send),
    e_min: Option<f64>,
    e_max: Option<f64>,
    points: usize,
) -> CliResult<()> {
    let lo = e_min.unwrap_or(opts.e_floor);
    let hi = e_max
        .or(opts.ceiling_override)
        .unwrap_or_else(|| energy_search_ceiling(p));
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(Failure::config(format!(
            "sweep needs 0 < e-min < e-max and points >= 2, got [{lo}, {hi}] with {points} points"
        )));
    }
    let rows: Vec<SweepPoint> = linspace(lo, hi, points)
        .par_iter()
        .map(
            |&energy| match evaluate_wronskian(p, energy, opts.z_match, opts.s_branch, &opts.series) {
                Ok(w) => SweepPoint {
                    energy,
                    normalized: Some(w.normalized),
                    raw: Some(w.raw),
                    terms_left: Some(w.terms_left),
                    terms_right: Some(w.terms_right),
                    error: None,
                },
                Err(e) => SweepPoint {
                    energy,
                    normalized: None,
                    raw: None,
                    terms_left: None,
                    terms_right: None,
                    error: Some(e.to_string()),
                },
            },
        )
        .collect();

    let text = match io.format {
        Format::Json => json_text(&rows)?,
        Format::Csv => csv_text(
            &["E", "W"],
            rows.iter().map(|r| vec![num(r.energy), opt_num(r.normalized)]),
        )?,
    };
    emit(io, out, &text)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        return Err(Failure::numeric(format!(
            "{failed} of {points} sweep points failed; their W is left empty"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct LevelReport<'a> {
    n: usize,
    #[serde(flatten)]
    wave: &'a crate::eigensolver::Wavefunction,
}

fn wavefunctions(
    p: &WellParameters,
    opts: &SolveOptions,
    io: &IoArgs,
    out: &mut (dyn Write + Send),
    level: Option<usize>,
) -> CliResult<()> {
    let res = find_eigenvalues(p, opts)?;
    warn_all(&res.diagnostics.warnings);
    let levels: Vec<usize> = match level {
        Some(n) if n >= res.len() => {
            return Err(Failure::config(format!(
                "level {n} requested but only {} bound states",
                res.len()
            )))
        }
        Some(n) => vec![n],
        None => (0..res.len()).collect(),
    };
    if levels.is_empty() {
        eprintln!("no bound states");
    }
    let waves = levels
        .iter()
        .map(|&n| assemble_wavefunction(p, res.energies[n], opts))
        .collect::<crate::error::Result<Vec<_>>>()?;

    let text = match io.format {
        Format::Json => {
            let report: Vec<LevelReport> = levels
                .iter()
                .zip(&waves)
                .map(|(&n, wave)| LevelReport { n, wave })
                .collect();
            json_text(&report)?
        }
        Format::Csv => {
            let rows = levels.iter().zip(&waves).flat_map(|(&n, w)| {
                w.z.iter()
                    .zip(&w.psi)
                    .map(move |(&z, &psi)| vec![n.to_string(), num(w.energy), num(z), num(psi)])
            });
            csv_text(&["n", "E", "z", "psi"], rows)?
        }
    };
    emit(io, out, &text)
}

struct ThresholdScan {
    w2: (f64, f64),
    w3: (f64, f64),
    resolution: usize,
}

fn threshold(
    w1s: &[f64],
    scan: &ThresholdScan,
    opts: &SolveOptions,
    io: &IoArgs,
    out: &mut (dyn Write + Send),
    curves_path: Option<&Path>,
) -> CliResult<()> {
    let maps: Vec<ThresholdMap> = w1s
        .iter()
        .map(|&w1| threshold_scan(w1, scan.w2, scan.w3, scan.resolution, opts))
        .collect::<crate::error::Result<_>>()?;

    let text = match io.format {
        Format::Json => json_text(&maps)?,
        Format::Csv => {
            let rows = maps.iter().flat_map(|m| {
                m.w2_axis.iter().enumerate().flat_map(move |(i, &w2)| {
                    m.w3_axis.iter().enumerate().map(move |(j, &w3)| {
                        vec![
                            num(m.w1),
                            num(w2),
                            num(w3),
                            m.counts[i][j].map(|c| c.to_string()).unwrap_or_default(),
                        ]
                    })
                })
            });
            csv_text(&["w1", "w2", "w3", "count"], rows)?
        }
    };
    emit(io, out, &text)?;

    if let Some(path) = curves_path {
        let mut rows = Vec::new();
        for m in &maps {
            for (c, curve) in m.critical_curves.iter().enumerate() {
                for &(w2, w3) in &curve.points {
                    rows.push(vec![
                        num(m.w1),
                        c.to_string(),
                        curve.emerging_level.to_string(),
                        curve.critical.to_string(),
                        num(w2),
                        num(w3),
                    ]);
                }
            }
        }
        let text = csv_text(&["w1", "curve", "level", "critical", "w2", "w3"], rows)?;
        fs::write(path, text)
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))?;
    }

    let failed: usize = maps.iter().map(|m| m.failures.len()).sum();
    if failed > 0 {
        let mut msg = format!("{failed} grid nodes failed; their count is left empty");
        if let Some(f) = maps.iter().flat_map(|m| &m.failures).next() {
            let _ = write!(msg, " (first: {})", f.message);
        }
        return Err(Failure::numeric(msg));
    }
    Ok(())
}

#[derive(Serialize)]
struct QesRow {
    order: usize,
    s_sign: SSign,
    w1: f64,
    w2: f64,
    w3: f64,
    #[serde(rename = "E")]
    energy: f64,
    residual: f64,
    polynomial: Vec<f64>,
    /// Closest level found by the Wronskian solver.
    #[serde(rename = "E_solver")]
    solver_energy: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn qes(
    w1: f64,
    w3: f64,
    order: usize,
    sign: SignArg,
    w2_cap: f64,
    opts: &SolveOptions,
    io: &IoArgs,
    out: &mut (dyn Write + Send),
) -> CliResult<()> {
    if !(w1 > 0.0) {
        return Err(Failure::config(format!("qes needs w1 > 0, got {w1}")));
    }
    if !(w2_cap > 0.0) {
        return Err(Failure::config(format!("w2-cap must be > 0, got {w2_cap}")));
    }
    let signs = match sign {
        SignArg::Plus => vec![SSign::Plus],
        SignArg::Minus => vec![SSign::Minus],
        SignArg::Both => vec![SSign::Plus, SSign::Minus],
    };
    let mut rows = Vec::new();
    for s in signs {
        let solutions = match solve_w2_for_termination_in(w1, w3, order, s, w2_cap) {
            Ok(v) => v,
            // No admissible exponent on this branch.
            Err(Error::Domain(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        for sol in solutions {
            let spectrum = find_eigenvalues(&sol.well, opts)?;
            let solver_energy = spectrum
                .energies
                .iter()
                .copied()
                .min_by(|a, b| (a - sol.energy).abs().total_cmp(&(b - sol.energy).abs()));
            rows.push(QesRow {
                order,
                s_sign: s,
                w1,
                w2: sol.well.w2,
                w3,
                energy: sol.energy,
                residual: sol.residual,
                polynomial: sol.polynomial,
                solver_energy,
            });
        }
    }
    if rows.is_empty() {
        writeln!(out, "no polynomial states")?;
        return Ok(());
    }
    let text = match io.format {
        Format::Json => json_text(&rows)?,
        Format::Csv => csv_text(
            &["order", "s", "w1", "w2", "w3", "E", "residual", "E_solver"],
            rows.iter().map(|r| {
                vec![
                    r.order.to_string(),
                    match r.s_sign {
                        SSign::Plus => "+".into(),
                        SSign::Minus => "-".into(),
                    },
                    num(r.w1),
                    num(r.w2),
                    num(r.w3),
                    num(r.energy),
                    num(r.residual),
                    opt_num(r.solver_energy),
                ]
            }),
        )?,
    };
    emit(io, out, &text)
}

#[derive(Serialize)]
struct OracleRow {
    n: usize,
    #[serde(rename = "E")]
    wronskian: Option<f64>,
    #[serde(rename = "E_oracle")]
    oracle: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn oracle(
    p: &WellParameters,
    opts: &SolveOptions,
    io: &IoArgs,
    out: &mut (dyn Write + Send),
    k: usize,
    h: f64,
    z_span: f64,
    max_span: f64,
) -> CliResult<()> {
    if k == 0 {
        return Err(Failure::config("-k must be >= 1"));
    }
    if !(h > 0.0 && z_span > 0.0 && max_span >= z_span) {
        return Err(Failure::config(format!(
            "oracle needs h > 0 and 0 < z-span <= max-span, got h={h}, z-span={z_span}, max-span={max_span}"
        )));
    }
    let fd = fd_spectrum_adaptive(p, h, z_span, max_span, k)?;
    let res = find_eigenvalues(p, opts)?;
    warn_all(&res.diagnostics.warnings);
    let n = fd.len().max(res.len().min(k));
    let rows: Vec<OracleRow> = (0..n)
        .map(|i| OracleRow {
            n: i,
            wronskian: res.energies.get(i).copied(),
            oracle: fd.get(i).copied(),
        })
        .collect();
    if rows.is_empty() {
        writeln!(out, "no bound states")?;
        return Ok(());
    }
    let text = match io.format {
        Format::Json => json_text(&rows)?,
        Format::Csv => csv_text(
            &["n", "E", "E_oracle"],
            rows.iter()
                .map(|r| vec![r.n.to_string(), opt_num(r.wronskian), opt_num(r.oracle)]),
        )?,
    };
    emit(io, out, &text)?;
    if fd.len() != res.len().min(k) {
        return Err(Failure::numeric(format!(
            "level counts differ: Wronskian solver {} vs oracle {}",
            res.len(),
            fd.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let code = run_with(args.iter().copied(), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn solve_prints_reference_levels() {
        let (code, text) = run_capture(&["heunwell", "solve", "--w1", "15", "--w2", "12", "--w3", "1"]);
        assert_eq!(code, 0);
        assert!(
            text.contains("E0 = 0.311") && text.contains("E1 = 2.434") && text.contains("E2 = 3.875"),
            "{text}"
        );
    }

    #[test]
    fn solve_without_states() {
        let (code, text) = run_capture(&["heunwell", "solve", "--w1", "0", "--w2", "5", "--w3", "0"]);
        assert_eq!(code, 0);
        assert_eq!(text.trim(), "no bound states");
    }

    #[test]
    fn mixed_parameterizations_are_rejected() {
        let (code, _) = run_capture(&[
            "heunwell", "solve", "--w1", "1", "--w2", "1", "--w3", "1", "--length", "2",
        ]);
        assert_eq!(code, 1);
        let (code, _) = run_capture(&["heunwell", "solve", "--w1", "1", "--w2", "1"]);
        assert_eq!(code, 1);
        let (code, _) = run_capture(&["heunwell", "solve", "--w1", "-1", "--w2", "1", "--w3", "0"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn dimensional_input_matches_dimensionless() {
        let a = run_capture(&["heunwell", "solve", "--w1", "15", "--w2", "12", "--w3", "1"]);
        let b = run_capture(&[
            "heunwell", "solve", "--v1", "3.75", "--v2", "3", "--v3", "0.25", "--length", "2",
        ]);
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_term_cap_is_non_convergence() {
        let (code, _) = run_capture(&[
            "heunwell",
            "solve",
            "--w1",
            "15",
            "--w2",
            "12",
            "--w3",
            "1",
            "--max-terms",
            "5",
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn oracle_columns_match() {
        let (code, text) = run_capture(&[
            "heunwell", "oracle", "--w1", "0", "--w2", "-12", "--w3", "0", "-k", "3",
        ]);
        assert_eq!(code, 0, "{text}");
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,E,E_oracle");
        assert_eq!(lines.len(), 4);
        for (line, exact) in lines[1..].iter().zip([1.0, 4.0, 9.0]) {
            let cols: Vec<f64> = line.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
            assert!(
                (cols[0] - exact).abs() < 1e-6 && (cols[1] - exact).abs() < 1e-4,
                "{line}"
            );
        }
    }

    #[test]
    fn config_keys_are_flag_names() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("well.toml");
        fs::write(&cfg, "w1 = 15\nw2 = 12.0\nw3 = 1\nz-match = 0.3\n").unwrap();
        let cfg = cfg.to_str().unwrap();
        let (code, text) = run_capture(&["heunwell", "solve", "--config", cfg]);
        assert_eq!(code, 0);
        assert!(text.contains("E2 = 3.875"), "{text}");
        // command line wins over the file
        let (code, text) = run_capture(&[
            "heunwell", "solve", "--config", cfg, "--w2", "5", "--w1", "0", "--w3", "0",
        ]);
        assert_eq!(code, 0);
        assert_eq!(text.trim(), "no bound states");

        fs::write(dir.path().join("bad.toml"), "w1 = 1\nresolution = 3\n").unwrap();
        let bad = dir.path().join("bad.toml");
        let (code, _) = run_capture(&["heunwell", "solve", "--config", bad.to_str().unwrap()]);
        assert_eq!(code, 1);
    }

    #[test]
    fn unknown_flag_is_a_config_error() {
        let (code, _) = run_capture(&["heunwell", "solve", "--w9", "1"]);
        assert_eq!(code, 1);
        let (code, _) = run_capture(&[
            "heunwell",
            "solve",
            "--w1",
            "1",
            "--w2",
            "1",
            "--w3",
            "1",
            "--z-match",
            "9",
        ]);
        assert_eq!(code, 1);
    }

    #[test]
    fn every_flag_is_a_valid_config_key() {
        let cmd = Cli::command();
        for sub in cmd.get_subcommands() {
            for arg in sub.get_arguments() {
                if let Some(long) = arg.get_long() {
                    assert!(
                        long.chars()
                            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-'),
                        "{long}"
                    );
                }
            }
        }
        Cli::command().debug_assert();
    }
}
