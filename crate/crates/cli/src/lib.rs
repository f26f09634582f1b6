//! Command-line front end for the qentropy library.
//!
//! Every JSON document written here carries `"schema": "qentropy/1"` and
//! prints floats with 17 significant digits.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use qentropy::bounds::{self, BoundReport};
use qentropy::dist::ProbDist;
use qentropy::divergence::{self, ConvexGenerator};
use qentropy::entropy;
use qentropy::joint;
use qentropy::qmath::EntropicIndex;
use qentropy::quasilinear::{self, GeneratorPsi};
use qentropy::verify::{self, Profile, VerifyConfig, VerifyReport};
use qentropy::CHECK_TOL;

pub mod input;
pub mod output;

pub use input::{parse_document, read_dist, read_document, read_joint, Document};
pub use output::to_line;

pub const SCHEMA: &str = "qentropy/1";

/// Environment variable that replaces the default check tolerance.
pub const TOL_ENV: &str = "QENTROPY_CHECK_TOL";

/// Exit status for usage and input errors.
pub const EXIT_USAGE: u8 = 1;
/// Exit status when a bound or verification case fails.
pub const EXIT_FAILED: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}: {message}")]
    Input {
        path: String,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Invalid {
        path: String,
        source: qentropy::Error,
    },

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] qentropy::Error),
}

const INPUT_HELP: &str = "\
Input files:
  JSON   {\"weights\": [0.25, 0.75]}
  JSON   {\"dims\": [2, 2], \"cells\": [0.25, 0.25, 0.25, 0.25]}   (joint, row-major)
  CSV    one weight per line, optional header line \"weight\", '#' starts a comment

Exit status: 0 success, 1 usage or input error, 2 bound or verification failure.
Set QENTROPY_CHECK_TOL to replace the default tolerance (1e-9).";

#[derive(Debug, Parser)]
#[command(name = "qentropy", version, about = "Generalized entropies, divergences and their bounds")]
#[command(after_help = INPUT_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate entropies of P and divergences of P from R
    Compute(ComputeArgs),
    /// Evaluate one bound chain on the given inputs
    Bounds(BoundsArgs),
    /// Run the randomized verification harness
    Verify(VerifyArgs),
    /// Parse a distribution file and write it back as canonical JSON
    Echo(EchoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EntropyKind {
    Tsallis,
    Shannon,
    Renyi,
    Quasilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DivergenceKind {
    Tsallis,
    Kl,
    Renyi,
    F,
    Quasilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Standard,
    Stress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundCase {
    #[value(name = "prop3.1")]
    Prop3_1,
    #[value(name = "thm3.1")]
    Thm3_1,
    #[value(name = "cor3.1")]
    Cor3_1,
    #[value(name = "thm3.2")]
    Thm3_2,
    #[value(name = "cor3.2")]
    Cor3_2,
    #[value(name = "lem4.2")]
    Lem4_2,
    #[value(name = "cf")]
    Cf,
    #[value(name = "thm4.2")]
    Thm4_2,
    #[value(name = "cor4.2")]
    Cor4_2,
    #[value(name = "prop4.1")]
    Prop4_1,
    #[value(name = "prop5.3")]
    Prop5_3,
    #[value(name = "thm5.1")]
    Thm5_1,
}

impl BoundCase {
    fn id(self) -> &'static str {
        match self {
            BoundCase::Prop3_1 => "prop3.1",
            BoundCase::Thm3_1 => "thm3.1",
            BoundCase::Cor3_1 => "cor3.1",
            BoundCase::Thm3_2 => "thm3.2",
            BoundCase::Cor3_2 => "cor3.2",
            BoundCase::Lem4_2 => "lem4.2",
            BoundCase::Cf => "cf",
            BoundCase::Thm4_2 => "thm4.2",
            BoundCase::Cor4_2 => "cor4.2",
            BoundCase::Prop4_1 => "prop4.1",
            BoundCase::Prop5_3 => "prop5.3",
            BoundCase::Thm5_1 => "thm5.1",
        }
    }
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Distribution P
    pub p: PathBuf,
    /// Reference distribution R, needed for divergences
    pub r: Option<PathBuf>,
    /// Entropies of P to evaluate (repeatable or comma separated)
    #[arg(long, value_enum, value_delimiter = ',')]
    pub entropy: Vec<EntropyKind>,
    /// Divergences of P from R to evaluate (repeatable or comma separated)
    #[arg(long, value_enum, value_delimiter = ',')]
    pub divergence: Vec<DivergenceKind>,
    /// Entropic index q >= 0
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<f64>,
    /// Generator label for quasilinear quantities: identity, log, lnq, power
    #[arg(long)]
    pub psi: Option<String>,
    /// Convex generator label for the f-divergence: tsallis, xlogx, neglog, neglnq
    #[arg(long = "f")]
    pub f: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputFormat,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Which chain to evaluate
    #[arg(long, value_enum)]
    pub case: BoundCase,
    /// Distribution P (a joint document for prop5.3 and thm5.1)
    pub p: PathBuf,
    /// Reference distribution R, for the two-distribution cases
    pub r: Option<PathBuf>,
    /// Entropic index q >= 0
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<f64>,
    /// Generator label: identity, log, lnq, power
    #[arg(long)]
    pub psi: Option<String>,
    /// Convex generator label: tsallis, xlogx, neglog, neglnq
    #[arg(long = "f")]
    pub f: Option<String>,
    /// Points x_j for prop3.1, lem4.2 and cf (comma separated)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xs: Vec<f64>,
    /// Skip the hypothesis checks and mark the result informational
    #[arg(long)]
    pub override_hypothesis: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputFormat,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Case id to run (repeatable)
    #[arg(long = "case")]
    pub cases: Vec<String>,
    /// Run every registered case
    #[arg(long, conflicts_with = "cases")]
    pub all: bool,
    /// List the registered cases and exit
    #[arg(long, conflicts_with_all = ["cases", "all"])]
    pub list: bool,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Indices to run at instead of the default grid (comma separated)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q: Vec<f64>,
    /// Allow indices outside a case's hypothesis; such reports are informational
    #[arg(long)]
    pub override_hypothesis: bool,
    #[arg(long, value_enum, default_value = "standard")]
    pub profile: ProfileArg,
    /// Worker threads; defaults to all cores
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 16)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputFormat,
}

#[derive(Debug, Args)]
pub struct EchoArgs {
    pub file: PathBuf,
}

/// The check tolerance, from [`TOL_ENV`] when set.
pub fn check_tolerance() -> Result<Option<f64>, CliError> {
    match std::env::var(TOL_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Usage(format!("{TOL_ENV}: {e}"))),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t >= 0.0 => Ok(Some(t)),
            _ => Err(CliError::Usage(format!(
                "{TOL_ENV} must be a finite non-negative number, got {s:?}"
            ))),
        },
    }
}

/// Runs a parsed command, writing its report to `out`. Returns the exit status.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match cli.command {
        Command::Compute(a) => cmd_compute(&a, out),
        Command::Bounds(a) => cmd_bounds(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Echo(a) => cmd_echo(&a, out),
    }
}

fn document(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m
}

fn index(q: Option<f64>, what: &str) -> Result<EntropicIndex, CliError> {
    let q = q.ok_or_else(|| CliError::Usage(format!("{what} needs --q")))?;
    EntropicIndex::new(q).map_err(|e| CliError::Usage(e.to_string()))
}

/// q when given, otherwise 1 for generators that do not depend on it.
fn index_or_one(q: Option<f64>) -> Result<EntropicIndex, CliError> {
    match q {
        Some(v) => EntropicIndex::new(v).map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(EntropicIndex::ONE),
    }
}

fn psi_for(label: Option<&str>, q: Option<f64>, what: &str) -> Result<GeneratorPsi, CliError> {
    let label = label.ok_or_else(|| CliError::Usage(format!("{what} needs --psi")))?;
    let qi = if matches!(label, "lnq" | "power") {
        index(q, &format!("--psi {label}"))?
    } else {
        index_or_one(q)?
    };
    GeneratorPsi::from_label(label, qi).map_err(|e| CliError::Usage(e.to_string()))
}

fn f_for(label: Option<&str>, q: Option<f64>, what: &str) -> Result<ConvexGenerator, CliError> {
    let label = label.ok_or_else(|| CliError::Usage(format!("{what} needs --f")))?;
    let qi = if matches!(label, "tsallis" | "neglnq") {
        index(q, &format!("--f {label}"))?
    } else {
        index_or_one(q)?
    };
    ConvexGenerator::from_label(label, qi).map_err(|e| CliError::Usage(e.to_string()))
}

fn reference(r: Option<&Path>, what: &str) -> Result<ProbDist, CliError> {
    let path = r.ok_or_else(|| CliError::Usage(format!("{what} needs a reference distribution R")))?;
    read_dist(path)
}

/// Core errors that stem from how the inputs were combined are usage errors.
fn usage(e: qentropy::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn emit(out: &mut dyn Write, doc: &Value) -> Result<(), CliError> {
    writeln!(out, "{}", to_line(doc))?;
    Ok(())
}

fn fmt_num(x: f64) -> String {
    format!("{x:.10e}")
}

fn cmd_compute(a: &ComputeArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    if a.entropy.is_empty() && a.divergence.is_empty() {
        return Err(CliError::Usage(
            "compute needs at least one --entropy or --divergence".into(),
        ));
    }
    let p = read_dist(&a.p)?;
    let r = if a.divergence.is_empty() {
        None
    } else {
        Some(reference(a.r.as_deref(), "--divergence")?)
    };

    let mut results = Vec::new();
    let mut push = |quantity: &str, params: Value, value: f64| {
        results.push(json!({"quantity": quantity, "params": params, "value": value}));
    };

    for kind in &a.entropy {
        match kind {
            EntropyKind::Shannon => push("shannon_entropy", json!({}), entropy::shannon_entropy(&p)),
            EntropyKind::Tsallis => {
                let q = index(a.q, "--entropy tsallis")?;
                push("tsallis_entropy", json!({"q": q.value()}), entropy::tsallis_entropy(&p, q));
            }
            EntropyKind::Renyi => {
                let q = index(a.q, "--entropy renyi")?;
                push("renyi_entropy", json!({"q": q.value()}), entropy::renyi_entropy(&p, q));
            }
            EntropyKind::Quasilinear => {
                let q = index(a.q, "--entropy quasilinear")?;
                let psi = psi_for(a.psi.as_deref(), a.q, "--entropy quasilinear")?;
                let v = quasilinear::tsallis_quasilinear_entropy(&psi, &p, q).map_err(usage)?;
                push(
                    "tsallis_quasilinear_entropy",
                    json!({"q": q.value(), "psi": psi.label()}),
                    v,
                );
            }
        }
    }

    if let Some(r) = &r {
        for kind in &a.divergence {
            match kind {
                DivergenceKind::Kl => {
                    let v = divergence::kl_divergence(&p, r).map_err(usage)?;
                    push("kl_divergence", json!({}), v);
                }
                DivergenceKind::Tsallis => {
                    let q = index(a.q, "--divergence tsallis")?;
                    let v = divergence::tsallis_relative(&p, r, q).map_err(usage)?;
                    push("tsallis_relative", json!({"q": q.value()}), v);
                }
                DivergenceKind::Renyi => {
                    let q = index(a.q, "--divergence renyi")?;
                    let v = divergence::renyi_relative(&p, r, q).map_err(usage)?;
                    push("renyi_relative", json!({"q": q.value()}), v);
                }
                DivergenceKind::F => {
                    let f = f_for(a.f.as_deref(), a.q, "--divergence f")?;
                    let v = divergence::f_divergence(&f, &p, r).map_err(usage)?;
                    push("f_divergence", json!({"f": f.label(), "q": a.q}), v);
                }
                DivergenceKind::Quasilinear => {
                    let q = index(a.q, "--divergence quasilinear")?;
                    let psi = psi_for(a.psi.as_deref(), a.q, "--divergence quasilinear")?;
                    let v = quasilinear::tsallis_quasilinear_relative(&psi, &p, r, q)
                        .map_err(usage)?;
                    push(
                        "tsallis_quasilinear_relative",
                        json!({"q": q.value(), "psi": psi.label()}),
                        v,
                    );
                }
            }
        }
    }

    match a.output {
        OutputFormat::Json => {
            let mut doc = document("compute");
            let mut inputs = Map::new();
            inputs.insert("p".into(), json!(a.p.display().to_string()));
            if let (Some(path), true) = (&a.r, r.is_some()) {
                inputs.insert("r".into(), json!(path.display().to_string()));
            }
            doc.insert("inputs".into(), Value::Object(inputs));
            doc.insert("results".into(), Value::Array(results));
            emit(out, &Value::Object(doc))?;
        }
        OutputFormat::Table => {
            for row in &results {
                let params = row["params"]
                    .as_object()
                    .map(|m| {
                        m.iter()
                            .filter(|(_, v)| !v.is_null())
                            .map(|(k, v)| format!("{k}={}", v.to_string().trim_matches('"')))
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .unwrap_or_default();
                writeln!(
                    out,
                    "{:<30} {:<20} {}",
                    row["quantity"].as_str().unwrap_or_default(),
                    params,
                    fmt_num(row["value"].as_f64().unwrap_or(f64::NAN))
                )?;
            }
        }
    }
    Ok(0)
}

/// The outcome of one `bounds` case before formatting.
struct BoundOutcome {
    report: BoundReport,
    constants: Value,
    /// Secondary chains that must also hold.
    parts: Vec<(&'static str, BoundReport)>,
}

impl BoundOutcome {
    fn single(report: BoundReport, constants: Value) -> Self {
        BoundOutcome {
            report,
            constants,
            parts: Vec::new(),
        }
    }

    /// `lhs <= rhs` as a chain with lower = value = lhs.
    fn inequality(lhs: f64, rhs: f64, constants: Value) -> Self {
        Self::single(BoundReport::new(lhs, lhs, rhs), constants)
    }

    /// `lhs = rhs` as a chain with both bounds at rhs.
    fn identity(lhs: f64, rhs: f64, constants: Value) -> Self {
        Self::single(BoundReport::new(rhs, lhs, rhs), constants)
    }
}

fn need_xs(a: &BoundsArgs, len: usize) -> Result<&[f64], CliError> {
    if a.xs.is_empty() {
        return Err(CliError::Usage(format!("case {} needs --xs", a.case.id())));
    }
    if a.xs.len() != len {
        return Err(CliError::Usage(format!(
            "--xs has {} points but P has {len} weights",
            a.xs.len()
        )));
    }
    Ok(&a.xs)
}

fn ratio_constants(p: &ProbDist, r: &ProbDist) -> Result<Value, CliError> {
    let (lo, hi) = bounds::ratio_extremes(p, r).map_err(usage)?;
    Ok(json!({"min_ratio": lo, "max_ratio": hi}))
}

fn evaluate_bound(a: &BoundsArgs) -> Result<BoundOutcome, CliError> {
    let case = a.case.id();
    let validated = !a.override_hypothesis;
    Ok(match a.case {
        BoundCase::Prop3_1 => {
            let p = read_dist(&a.p)?;
            let r = reference(a.r.as_deref(), case)?;
            let f = f_for(a.f.as_deref(), a.q, case)?;
            let psi = psi_for(a.psi.as_deref(), a.q, case)?;
            let xs = need_xs(a, p.len())?;
            let eval = |x: f64| f.eval(x);
            let report = if validated {
                bounds::ratio_sandwich_validated(eval, &psi, xs, &p, &r)
            } else {
                bounds::ratio_sandwich(eval, &psi, xs, &p, &r)
            }
            .map_err(usage)?;
            BoundOutcome::single(report, ratio_constants(&p, &r)?)
        }
        BoundCase::Thm3_1 => {
            let r = read_dist(&a.p)?;
            let q = index(a.q, case)?;
            let psi = psi_for(a.psi.as_deref(), a.q, case)?;
            let report = if validated {
                bounds::quasilinear_vs_tsallis_bounds_validated(&psi, &r, q)
            } else {
                bounds::quasilinear_vs_tsallis_bounds(&psi, &r, q)
            }
            .map_err(usage)?;
            let n = r.len() as f64;
            BoundOutcome::single(report, json!({"n_min_r": n * r.min(), "n_max_r": n * r.max()}))
        }
        BoundCase::Cor3_1 => {
            let r = read_dist(&a.p)?;
            let q = index(a.q, case)?;
            let n = r.len() as f64;
            BoundOutcome::single(
                bounds::refined_maxent_bounds(&r, q),
                json!({"n_min_r": n * r.min(), "n_max_r": n * r.max()}),
            )
        }
        BoundCase::Thm3_2 => {
            let p = read_dist(&a.p)?;
            let r = reference(a.r.as_deref(), case)?;
            let f = f_for(a.f.as_deref(), a.q, case)?;
            let report = bounds::f_divergence_sandwich(&f, &p, &r).map_err(usage)?;
            BoundOutcome::single(report, ratio_constants(&p, &r)?)
        }
        BoundCase::Cor3_2 => {
            let p = read_dist(&a.p)?;
            let r = reference(a.r.as_deref(), case)?;
            let report = bounds::reverse_kl_sandwich(&p, &r).map_err(usage)?;
            BoundOutcome::single(report, ratio_constants(&p, &r)?)
        }
        BoundCase::Lem4_2 => {
            let p = read_dist(&a.p)?;
            let xs = need_xs(a, p.len())?;
            let (pairwise, variance) = bounds::pairwise_spread_forms(xs, &p).map_err(usage)?;
            BoundOutcome::identity(pairwise, variance, json!({}))
        }
        BoundCase::Cf => {
            let p = read_dist(&a.p)?;
            let xs = need_xs(a, p.len())?;
            let report = bounds::cartwright_field(xs, &p).map_err(usage)?;
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            BoundOutcome::single(report, json!({"min_x": lo, "max_x": hi}))
        }
        BoundCase::Thm4_2 | BoundCase::Cor4_2 => {
            let p = read_dist(&a.p)?;
            let r = reference(a.r.as_deref(), case)?;
            let q = if a.case == BoundCase::Cor4_2 {
                EntropicIndex::ONE
            } else {
                index(a.q, case)?
            };
            let range = bounds::tightest_constants(&p, &r, q).map_err(usage)?;
            let chain = if a.case == BoundCase::Cor4_2 {
                bounds::shannon_cross_entropy_sandwich(&p, &r, range.m, range.big_m)
            } else {
                bounds::tsallis_cross_entropy_sandwich(&p, &r, q, range.m, range.big_m)
            }
            .map_err(usage)?;
            BoundOutcome {
                report: chain.combined,
                constants: json!({
                    "m": range.m, "M": range.big_m, "interval": [range.lo, range.hi],
                }),
                parts: vec![("cross", chain.cross), ("own", chain.own)],
            }
        }
        BoundCase::Prop4_1 => {
            let p = read_dist(&a.p)?;
            let r = reference(a.r.as_deref(), case)?;
            let (lhs, rhs) = divergence::complement_cross_entropy(&p, &r).map_err(usage)?;
            BoundOutcome::inequality(lhs, rhs, json!({}))
        }
        BoundCase::Prop5_3 => {
            let j = read_joint(&a.p)?;
            let q = index(a.q, case)?;
            if validated && q.value() < 1.0 {
                return Err(CliError::Usage(format!(
                    "{case} is only claimed for q >= 1; pass --override-hypothesis to evaluate anyway"
                )));
            }
            let (cond, plain) = joint::conditioning_reduces_entropy_check(&j, q).map_err(usage)?;
            BoundOutcome::inequality(cond, plain, json!({}))
        }
        BoundCase::Thm5_1 => {
            let j = read_joint(&a.p)?;
            let q = index(a.q, case)?;
            let report = joint::han_sandwich(&j, q).map_err(usage)?;
            BoundOutcome::single(report, json!({"axes": j.axis_count()}))
        }
    })
}

fn report_value(r: &BoundReport) -> Value {
    serde_json::to_value(r).expect("BoundReport serializes")
}

fn cmd_bounds(a: &BoundsArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let tol = check_tolerance()?.unwrap_or(CHECK_TOL);
    let outcome = evaluate_bound(a)?;
    let holds = outcome.report.holds(tol) && outcome.parts.iter().all(|(_, r)| r.holds(tol));

    match a.output {
        OutputFormat::Json => {
            let mut doc = document("bounds");
            doc.insert("case".into(), json!(a.case.id()));
            doc.insert("q".into(), json!(a.q));
            doc.insert("report".into(), report_value(&outcome.report));
            if !outcome.parts.is_empty() {
                let parts: Map<String, Value> = outcome
                    .parts
                    .iter()
                    .map(|(k, r)| (k.to_string(), report_value(r)))
                    .collect();
                doc.insert("parts".into(), Value::Object(parts));
            }
            doc.insert("constants".into(), outcome.constants);
            doc.insert("tolerance".into(), json!(tol));
            doc.insert("holds".into(), json!(holds));
            doc.insert("informational".into(), json!(a.override_hypothesis));
            emit(out, &Value::Object(doc))?;
        }
        OutputFormat::Table => {
            writeln!(out, "{:<10} {:>18} {:>18} {:>18}", "chain", "lower", "value", "upper")?;
            let mut rows = vec![(a.case.id(), outcome.report)];
            rows.extend(outcome.parts.iter().copied());
            for (name, r) in rows {
                writeln!(
                    out,
                    "{:<10} {:>18} {:>18} {:>18}",
                    name,
                    fmt_num(r.lower),
                    fmt_num(r.value),
                    fmt_num(r.upper)
                )?;
            }
            writeln!(out, "holds: {holds}")?;
        }
    }
    Ok(if holds { 0 } else { EXIT_FAILED })
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    if a.list {
        for case in verify::registry() {
            let range = case.q_range.map_or_else(|| "-".to_string(), |r| r.to_string());
            writeln!(out, "{:<8} {:<12} {}", case.id, range, case.summary)?;
        }
        return Ok(0);
    }
    if a.cases.is_empty() && !a.all {
        return Err(CliError::Usage(
            "verify needs --case <id>, --all or --list".into(),
        ));
    }
    let config = VerifyConfig {
        trials: a.trials,
        seed: a.seed,
        n_range: (a.n_min, a.n_max),
        q_grid: (!a.q.is_empty()).then(|| a.q.clone()),
        profile: match a.profile {
            ProfileArg::Standard => Profile::Standard,
            ProfileArg::Stress => Profile::Stress,
        },
        tolerance: check_tolerance()?,
        override_hypothesis: a.override_hypothesis,
        threads: a.threads,
    };
    let reports: Vec<VerifyReport> = if a.all {
        verify::run_all(&config).map_err(usage)?
    } else {
        // resolve every id first so a typo fails before any work is done
        for id in &a.cases {
            verify::find_case(id).map_err(usage)?;
        }
        a.cases
            .iter()
            .map(|id| verify::run_case(id, &config))
            .collect::<Result<_, _>>()
            .map_err(usage)?
    };

    match a.output {
        OutputFormat::Json => {
            for report in &reports {
                let mut doc = Map::new();
                doc.insert("schema".into(), json!(SCHEMA));
                if let Value::Object(fields) = serde_json::to_value(report).expect("report serializes") {
                    doc.extend(fields);
                }
                doc.insert("passed".into(), json!(report.passed()));
                emit(out, &Value::Object(doc))?;
            }
        }
        OutputFormat::Table => {
            writeln!(
                out,
                "{:<8} {:>8} {:>10} {:>18}  status",
                "case", "trials", "violations", "worst"
            )?;
            for r in &reports {
                let status = match (r.passed(), r.informational) {
                    (_, true) => "INFO",
                    (true, false) => "PASS",
                    (false, false) => "FAIL",
                };
                writeln!(
                    out,
                    "{:<8} {:>8} {:>10} {:>18}  {status}",
                    r.case,
                    r.trials,
                    r.violations,
                    fmt_num(r.worst_violation)
                )?;
            }
        }
    }
    Ok(if reports.iter().all(VerifyReport::passed) { 0 } else { EXIT_FAILED })
}

fn cmd_echo(a: &EchoArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let mut doc = Map::new();
    doc.insert("schema".into(), json!(SCHEMA));
    match read_document(&a.file)? {
        Document::Weights(w) => {
            let p = ProbDist::new(w).map_err(|source| CliError::Invalid {
                path: a.file.display().to_string(),
                source,
            })?;
            doc.insert("weights".into(), json!(p.weights()));
        }
        Document::Joint { .. } => {
            let j = read_joint(&a.file)?;
            doc.insert("dims".into(), json!(j.dims()));
            doc.insert("cells".into(), json!(j.cells()));
        }
    }
    emit(out, &Value::Object(doc))?;
    Ok(0)
}
