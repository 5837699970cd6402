//! Command-line front end for `cayley-gibbs`.
//!
//! ```text
//! cayley-gibbs <command> --model <path> [--n <radius>] [--tol <x>] [--max-den <N>]
//!     [--starts <N>] [--seed <N>] [--cap <N>] [--fields <path>] [--out <path>]
//!     [--format json|csv]
//! ```
//!
//! Reports are JSON with `"schema": 1`, sorted keys and every float written
//! with 17 significant digits, so equal inputs give byte-identical output.
//! Exit codes: 0 success, 2 a check failed, 3 invalid input.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};
use thiserror::Error;

use cayley_gibbs::classifier::{
    classify_with, finite_volume_spectrum, potts_theta, Classification, ClassifyOptions, Evidence, Generator, Lattice,
    Verdict,
};
use cayley_gibbs::fields::{
    check_unordered, complete_fields, fixed_point_residual, propagate_fields, random_boundary, ti_fixed_points,
    FixedPointOptions,
};
use cayley_gibbs::measures::{consistency_residual, correlation_profile, write_correlation_csv};
use cayley_gibbs::model::Provenance;
use cayley_gibbs::scalar::format_rational;
use cayley_gibbs::schema::{model_to_value, parse_field_file, parse_model};
use cayley_gibbs::{Ball, LambdaModel};

pub const SCHEMA_VERSION: u64 = 1;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 2;
pub const EXIT_INVALID_INPUT: u8 = 3;

/// Every default in one place; all of them are echoed in each report.
pub mod defaults {
    pub const CONSISTENCY_TOL: f64 = 1e-10;
    pub const COMMENSURABILITY_TOL: f64 = 1e-9;
    pub const UNORDERED_TOL: f64 = 1e-12;
    pub const FIXED_POINT_TOL: f64 = 1e-12;
    pub const LATTICE_TOL: f64 = 1e-9;
    pub const MAX_DEN: u64 = 1_000_000;
    pub const CAP: usize = 1 << 20;
    pub const STARTS: usize = 32;
    pub const SEED: u64 = 42;
    pub const CONSISTENCY_N: usize = 2;
    pub const SPECTRUM_N: usize = 2;
    pub const CORRELATIONS_N: usize = 3;
    /// Random boundary fields for `verify-consistency` without `--fields`.
    pub const BOUNDARY_HALF_WIDTH: f64 = 2.0;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Classify,
    CheckUnordered,
    SolveFields,
    VerifyConsistency,
    Spectrum,
    Correlations,
    MarkovCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::CheckUnordered => "check-unordered",
            Command::SolveFields => "solve-fields",
            Command::VerifyConsistency => "verify-consistency",
            Command::Spectrum => "spectrum",
            Command::Correlations => "correlations",
            Command::MarkovCheck => "markov-check",
        }
    }

    fn default_tol(self) -> Option<f64> {
        match self {
            Command::Classify | Command::MarkovCheck => Some(defaults::COMMENSURABILITY_TOL),
            Command::CheckUnordered => Some(defaults::UNORDERED_TOL),
            Command::SolveFields => Some(defaults::FIXED_POINT_TOL),
            Command::VerifyConsistency => Some(defaults::CONSISTENCY_TOL),
            Command::Spectrum => Some(defaults::LATTICE_TOL),
            Command::Correlations => None,
        }
    }

    fn default_n(self) -> Option<usize> {
        match self {
            Command::VerifyConsistency => Some(defaults::CONSISTENCY_N),
            Command::Spectrum => Some(defaults::SPECTRUM_N),
            Command::Correlations => Some(defaults::CORRELATIONS_N),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "cayley-gibbs", version, about = "Gibbs measures and factor types for lambda-models on Cayley trees")]
pub struct Args {
    pub command: Command,
    /// Model definition (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Ball radius.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_den: Option<u64>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest number of configurations to enumerate.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Field file (JSON map vertex word to coordinates) for verify-consistency.
    #[arg(long)]
    pub fields: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Fully resolved run settings.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model_path: PathBuf,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub max_den: u64,
    pub starts: usize,
    pub seed: u64,
    pub cap: usize,
    pub fields: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Defaults for `command`.
    pub fn new(command: Command, model_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            model_path: model_path.into(),
            n: command.default_n(),
            tol: command.default_tol(),
            max_den: defaults::MAX_DEN,
            starts: defaults::STARTS,
            seed: defaults::SEED,
            cap: defaults::CAP,
            fields: None,
            out: None,
            format: Format::Json,
        }
    }

    pub fn from_args(args: Args) -> Result<Self, CliError> {
        let mut c = RunConfig::new(args.command, args.model);
        if args.n.is_some() {
            c.n = args.n;
        }
        if args.tol.is_some() {
            c.tol = args.tol;
        }
        c.max_den = args.max_den.unwrap_or(c.max_den);
        c.starts = args.starts.unwrap_or(c.starts);
        c.seed = args.seed.unwrap_or(c.seed);
        c.cap = args.cap.unwrap_or(c.cap);
        c.fields = args.fields;
        c.out = args.out;
        c.format = args.format;
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
            }
        }
        if self.cap == 0 || self.max_den == 0 || self.starts == 0 {
            return Err(CliError::Usage("--cap, --max-den and --starts must be at least 1".into()));
        }
        if self.format == Format::Csv && self.command != Command::Correlations {
            return Err(CliError::Usage(format!("--format csv is only available for correlations, not {}", self.command.name())));
        }
        if self.fields.is_some() && self.command != Command::VerifyConsistency {
            return Err(CliError::Usage("--fields is only used by verify-consistency".into()));
        }
        if self.command == Command::VerifyConsistency && self.n == Some(0) {
            return Err(CliError::Usage("verify-consistency needs --n of at least 1".into()));
        }
        Ok(())
    }

    fn tol(&self) -> f64 {
        self.tol.or(self.command.default_tol()).unwrap_or(f64::NAN)
    }

    fn n(&self) -> usize {
        self.n.or(self.command.default_n()).unwrap_or(0)
    }

    fn settings(&self) -> Value {
        let mut s = Map::new();
        s.insert("cap".into(), self.cap.into());
        s.insert("max_den".into(), self.max_den.into());
        s.insert("seed".into(), self.seed.into());
        s.insert("starts".into(), self.starts.into());
        if let Some(n) = self.n {
            s.insert("n".into(), n.into());
        }
        if let Some(t) = self.tol {
            s.insert("tol".into(), float(t));
        }
        Value::Object(s)
    }
}

fn defaults_value() -> Value {
    json!({
        "boundary_half_width": float(defaults::BOUNDARY_HALF_WIDTH),
        "cap": defaults::CAP,
        "commensurability_tol": float(defaults::COMMENSURABILITY_TOL),
        "consistency_n": defaults::CONSISTENCY_N,
        "consistency_tol": float(defaults::CONSISTENCY_TOL),
        "correlations_n": defaults::CORRELATIONS_N,
        "fixed_point_tol": float(defaults::FIXED_POINT_TOL),
        "lattice_tol": float(defaults::LATTICE_TOL),
        "max_den": defaults::MAX_DEN,
        "seed": defaults::SEED,
        "spectrum_n": defaults::SPECTRUM_N,
        "starts": defaults::STARTS,
        "unordered_tol": float(defaults::UNORDERED_TOL),
    })
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Model(#[from] cayley_gibbs::Error),
    #[error("{0}")]
    Usage(String),
}

/// A finished report and the exit code it implies.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub exit: u8,
}

/// Floats as numbers; non-finite values become `null`.
fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| float(x)).collect())
}

/// Pretty JSON with floats in `{:.16e}`.
struct ReportFormatter(PrettyFormatter<'static>);

impl Formatter for ReportFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn render(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ReportFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn generator_value(g: &Generator) -> Value {
    match g {
        Generator::Rational(r) => Value::String(format_rational(r)),
        Generator::LogOf(_) | Generator::Float(_) => float(g.value()),
    }
}

fn evidence_value(c: &Classification, opts: &ClassifyOptions) -> Value {
    match &c.evidence {
        Evidence::Exact => json!({ "route": "exact-rational" }),
        Evidence::Multiplicative(a) => {
            let mut e = json!({
                "route": "multiplicative",
                "basis": a.basis.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "exponent_vectors": a.vectors,
                "rank": a.rank,
            });
            if let Lattice::Geometric { alpha, exponents } = &a.lattice {
                e["alpha"] = Value::String(format_rational(alpha));
                e["ratio_exponents"] = json!(exponents);
            }
            e
        }
        Evidence::Float(found) => {
            let mut e = json!({
                "route": "continued-fraction",
                "max_den": opts.max_den,
                "tol": float(opts.tol),
            });
            if let Some(f) = found {
                e["base"] = float(f.base);
                e["lcm"] = f.lcm.into();
                e["relations"] = Value::Array(f.relations.iter().map(|&(p, s)| json!([p.to_string(), s])).collect());
            }
            e
        }
    }
}

fn classification_value(c: &Classification, model: &LambdaModel, opts: &ClassifyOptions) -> Value {
    let mut out = json!({
        "verdict": c.verdict.label(),
        "generator": c.generator.as_ref().map_or(Value::Null, generator_value),
        "generator_value": c.generator.as_ref().map_or(Value::Null, |g| float(g.value())),
        "gamma": c.gamma.map_or(Value::Null, float),
        "multipliers": c.multipliers().iter().map(|(ijkl, m)| json!([ijkl[0], ijkl[1], ijkl[2], ijkl[3], m])).collect::<Vec<_>>(),
        "caveat": c.caveat,
        "confidence": c.confidence.label(),
        "low_confidence": c.low_confidence,
        "evidence": evidence_value(c, opts),
        "difference_set": {
            "kind": c.deltas.kind(),
            "values": floats(&c.deltas.to_f64()),
        },
    });
    if let Some(g) = &c.generator {
        out["generator_text"] = Value::String(g.to_string());
    }
    if let Some(exact) = c.deltas.exact_strings() {
        out["difference_set"]["exact"] = json!(exact);
    }
    if let Provenance::Potts { j } = model.provenance() {
        out["potts_theta"] = potts_theta(model.q(), j.to_f64(), model.beta().to_f64()).map_or(Value::Null, float);
    }
    out
}

/// Witness `alpha` with the exponents, or the reason no `alpha` exists.
fn markov_condition_detail(c: &Classification) -> Value {
    match (&c.evidence, c.verdict) {
        (_, Verdict::TraceII1) => json!({ "alpha": Value::Null, "reason": "all ratios equal 1" }),
        (Evidence::Multiplicative(a), Verdict::TypeIIIFamily) => match &a.lattice {
            Lattice::Geometric { alpha, exponents } => json!({
                "alpha": format_rational(alpha),
                "alpha_value": float(c.gamma.unwrap_or(f64::NAN)),
                "ratio_exponents": exponents,
                "meaning": "p_11 / p_ij = alpha^e_ij, rows and columns counted from 1",
            }),
            _ => Value::Null,
        },
        (Evidence::Multiplicative(a), _) => json!({
            "reason": "the prime exponent vectors of the ratios span more than one direction",
            "rank": a.rank,
        }),
        (_, Verdict::TypeIIIFamily) => json!({
            "alpha_value": c.gamma.map_or(Value::Null, float),
            "exponents_vs_entry_00": c.exponents,
        }),
        _ => json!({ "reason": "no integer relation between the log-ratios within max_den and tol" }),
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })
}

/// Runs one command and renders its report.
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let model = parse_model(&read(&config.model_path)?)?;
    let q = model.q();
    let classify_opts = ClassifyOptions { max_den: config.max_den, tol: config.tol() };
    let mut csv = None;
    let (result, passed) = match config.command {
        Command::Classify => {
            let c = classify_with(&model, &classify_opts)?;
            (classification_value(&c, &model, &classify_opts), true)
        }
        Command::MarkovCheck => {
            if !matches!(model.provenance(), Provenance::Markov { .. }) {
                return Err(CliError::Usage("markov-check needs a model of kind markov".into()));
            }
            let c = classify_with(&model, &classify_opts)?;
            let holds = c.verdict != Verdict::Incommensurable;
            let mut r = classification_value(&c, &model, &classify_opts);
            r["condition"] = json!({
                "holds": holds,
                "statement": "every ratio p_11/p_ij is an integer power of one alpha in (0, 1)",
            });
            r["condition"][if holds { "witness" } else { "refutation" }] = markov_condition_detail(&c);
            (r, holds)
        }
        Command::CheckUnordered => {
            let c = check_unordered(&model, config.tol())?;
            let r = json!({ "holds": c.holds, "residual": float(c.residual), "log_row_sums": floats(&c.log_row_sums) });
            (r, c.holds)
        }
        Command::SolveFields => {
            let opts =
                FixedPointOptions { starts: config.starts, tol: config.tol(), seed: config.seed, ..Default::default() };
            let s = ti_fixed_points(&model, &opts)?;
            let residuals: Vec<f64> = s.solutions.iter().map(|h| fixed_point_residual(&model, h)).collect();
            let r = json!({
                "count": s.solutions.len(),
                "solutions": s.solutions.iter().map(|h| floats(h)).collect::<Vec<_>>(),
                "residuals": floats(&residuals),
                "contains_zero": s.contains_zero(),
                "non_converged": s.non_converged,
                "attempts": s.attempts,
                "damping": float(opts.damping),
                "max_iter": opts.max_iter,
                "dedup_radius": float(opts.dedup_radius),
                "start_box": float(opts.start_box),
            });
            (r, true)
        }
        Command::VerifyConsistency => {
            let n = config.n();
            let ball = Ball::new(model.k(), n)?;
            let (fields, source) = match &config.fields {
                Some(path) => {
                    let known = parse_field_file(&read(path)?, &ball, q - 1)?;
                    (complete_fields(&model, &ball, &known)?, "file")
                }
                None => {
                    let boundary = random_boundary(&ball, q, config.seed, defaults::BOUNDARY_HALF_WIDTH);
                    (propagate_fields(&model, &ball, &boundary)?, "random-boundary")
                }
            };
            let tol = config.tol();
            let mut levels = Vec::new();
            let mut worst: f64 = 0.0;
            let mut pass = true;
            for m in 1..=n {
                let r = consistency_residual(&model, &fields, m, config.cap)?;
                worst = worst.max(r);
                pass &= r <= tol;
                levels.push(json!({ "level": m, "residual": float(r), "pass": r <= tol }));
            }
            (json!({ "source": source, "levels": levels, "max_residual": float(worst), "pass": pass }), pass)
        }
        Command::Spectrum => {
            let ball = Ball::new(model.k(), config.n())?;
            let s = finite_volume_spectrum(&model, &ball, config.cap)?;
            let c = classify_with(&model, &ClassifyOptions { max_den: config.max_den, tol: defaults::COMMENSURABILITY_TOL })?;
            let levels = |sp: &cayley_gibbs::classifier::Spectrum| {
                Value::Array(sp.levels.iter().map(|&(e, m)| json!([float(e), m])).collect())
            };
            let mut r = json!({
                "levels": levels(&s),
                "mirrored_levels": levels(&s.mirrored()),
                "configurations": s.total_multiplicity(),
                "verdict": c.verdict.label(),
            });
            let mut pass = true;
            if let Some(g) = &c.generator {
                let scale = s.levels.iter().map(|l| l.0.abs()).fold(1.0, f64::max);
                let defect = s.lattice_defect(g.value());
                pass = defect <= config.tol() * scale;
                r["lattice"] = json!({ "generator_value": float(g.value()), "defect": float(defect), "pass": pass });
            }
            (r, pass)
        }
        Command::Correlations => {
            let points = correlation_profile(&model, config.n())?;
            if config.format == Format::Csv {
                let mut buf = Vec::new();
                write_correlation_csv(&mut buf, &points).expect("in-memory write");
                csv = Some(String::from_utf8(buf).expect("ASCII"));
            }
            let decreasing = points.windows(2).all(|w| w[1].max_defect < w[0].max_defect);
            let r = json!({
                "points": points.iter().map(|p| json!({ "distance": p.distance, "max_defect": float(p.max_defect) })).collect::<Vec<_>>(),
                "strictly_decreasing": decreasing,
            });
            (r, true)
        }
    };
    let exit = if passed { EXIT_OK } else { EXIT_CHECK_FAILED };
    if let Some(csv) = csv {
        return Ok(Outcome { report: csv, exit });
    }
    let report = json!({
        "schema": SCHEMA_VERSION,
        "command": config.command.name(),
        "model": model_to_value(&model),
        "settings": config.settings(),
        "defaults": defaults_value(),
        "status": if passed { "ok" } else { "check-failed" },
        "result": result,
    });
    Ok(Outcome { report: render(&report), exit })
}

/// Parses arguments, runs, writes the report and returns the exit code.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = RunConfig::from_args(args).and_then(|config| {
        let outcome = run(&config)?;
        match &config.out {
            Some(path) => fs::write(path, &outcome.report).map_err(|source| CliError::Write { path: path.clone(), source })?,
            None => print!("{}", outcome.report),
        }
        Ok(outcome)
    });
    match outcome {
        Ok(o) => o.exit,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID_INPUT
        }
    }
}
