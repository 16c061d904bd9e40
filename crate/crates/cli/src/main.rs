//! `dagg`: aggregate, count and verify linear Diophantine systems given as
//! JSON files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dagg_core::aggregation::{
    aggregate_bounded_explicit, aggregate_strong, aggregate_weak, pointed_window,
};
use dagg_core::counting::{count_solutions, CountLimits, CountResult, MethodChoice};
use dagg_core::oracle::{Certificate, Enumerator};
use dagg_core::{
    AggregationKind, AggregationMatrix, DiophantineSystem, Error, IntMatrix, RatMatrix,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Deserialize;
use serde_json::{json, Value};

const EXIT_PARSE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;
const EXIT_WINDOW: u8 = 4;

#[derive(Parser)]
#[command(
    name = "dagg",
    version,
    about = "Aggregate and count linear Diophantine systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an aggregation matrix T for the system.
    Aggregate {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Strong)]
        mode: Mode,
        /// Use the closed form (1/q_1, ..., 1/q_{m-1}, -1); needs "u".
        #[arg(long)]
        explicit: bool,
    },
    /// Count the nonnegative integer solutions.
    Count {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Aggregate, then compare solution sets by enumeration.
    Verify {
        file: PathBuf,
        /// Upper corner of the enumeration box, one value or one per variable.
        #[arg(long, value_delimiter = ',')]
        window: Option<Vec<u64>>,
        /// Use this T instead of aggregating: entries separated by ',',
        /// rows by ';', each an integer or "p/q".
        #[arg(long = "force-T")]
        force_t: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strong,
    Weak,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Dp,
    Spectral,
    Both,
}

/// `{"A": [[...]], "b": [...], "u": [...]}`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    #[serde(rename = "A")]
    a: Vec<Vec<Value>>,
    b: Vec<Value>,
    #[serde(default)]
    u: Option<Vec<Value>>,
}

struct Failure {
    code: u8,
    message: String,
    report: Option<Value>,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
            report: None,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InfeasibleByLattice => EXIT_INFEASIBLE,
            Error::WindowTooLarge { .. }
            | Error::DegreeOverflow { .. }
            | Error::PrecisionLoss { .. } => EXIT_WINDOW,
            Error::DimensionMismatch(_)
            | Error::RankDeficient { .. }
            | Error::InvalidSystem(_)
            | Error::InvalidCoefficients(_)
            | Error::SingularMatrix => EXIT_PARSE,
            _ => EXIT_UNSUPPORTED,
        };
        Self {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

fn integer(v: &Value) -> Result<BigInt, Failure> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.as_u64().map(BigInt::from))
            .ok_or_else(|| Failure::parse(format!("{n} is not an integer"))),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::parse(format!("{s:?} is not an integer"))),
        other => Err(Failure::parse(format!("{other} is not an integer"))),
    }
}

fn integers(vs: &[Value]) -> Result<Vec<BigInt>, Failure> {
    vs.iter().map(integer).collect()
}

fn load(path: &Path) -> Result<DiophantineSystem, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    let file: SystemFile = serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    let rows = file
        .a
        .iter()
        .map(|r| integers(r))
        .collect::<Result<Vec<_>, _>>()?;
    let a = IntMatrix::from_rows(rows)?;
    let b = integers(&file.b)?;
    let u = file.u.as_deref().map(integers).transpose()?;
    Ok(DiophantineSystem::new(a, b, u)?)
}

fn int_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

fn ints_json(xs: &[BigInt]) -> Value {
    Value::Array(xs.iter().map(int_json).collect())
}

fn rational_json(x: &BigRational) -> Value {
    json!(format!("{}/{}", x.numer(), x.denom()))
}

fn matrix_json(t: &RatMatrix) -> Value {
    Value::Array(
        (0..t.rows())
            .map(|i| Value::Array(t.row(i).iter().map(rational_json).collect()))
            .collect(),
    )
}

fn kind_name(kind: AggregationKind) -> &'static str {
    match kind {
        AggregationKind::Strong => "strong",
        AggregationKind::Weak => "weak",
    }
}

fn aggregation_report(agg: &AggregationMatrix) -> Value {
    let p = agg.provenance();
    let h = if p.separating.is_empty() {
        Value::Null
    } else {
        Value::Array(p.separating.iter().map(|h| ints_json(h)).collect())
    };
    json!({
        "kind": kind_name(agg.kind()),
        "k": agg.size(),
        "T": matrix_json(agg.t()),
        "bounds": agg.introduced_bounds().map_or(Value::Null, ints_json),
        "provenance": {
            "M": p.bound.as_ref().map_or(Value::Null, int_json),
            "C": p.threshold.as_ref().map_or(Value::Null, int_json),
            "q": ints_json(&p.moduli),
            "h": h,
            "r": p.lineality_dim,
        },
        "verdict": "ok",
    })
}

fn infeasible_report(mut failure: Failure, report: Value) -> Failure {
    if failure.code == EXIT_INFEASIBLE {
        failure.report = Some(report);
    }
    failure
}

fn cmd_aggregate(file: &Path, mode: Mode, explicit: bool) -> Result<Value, Failure> {
    let sys = load(file)?;
    let agg = match (mode, explicit) {
        (Mode::Strong, true) => {
            if sys.upper_bounds().is_none() {
                return Err(Failure {
                    code: EXIT_UNSUPPORTED,
                    message: "--explicit needs upper bounds \"u\"".into(),
                    report: None,
                });
            }
            aggregate_bounded_explicit(&sys)
        }
        (Mode::Strong, false) => aggregate_strong(&sys),
        (Mode::Weak, _) => aggregate_weak(&sys),
    };
    let kind = match mode {
        Mode::Strong => "strong",
        Mode::Weak => "weak",
    };
    agg.map(|a| aggregation_report(&a)).map_err(|e| {
        infeasible_report(
            e.into(),
            json!({
                "kind": kind,
                "k": null,
                "T": null,
                "bounds": null,
                "provenance": null,
                "verdict": "infeasible",
            }),
        )
    })
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Dp => "dp",
        Method::Spectral => "spectral",
        Method::Both => "both",
    }
}

fn cmd_count(file: &Path, method: Method) -> Result<Value, Failure> {
    let sys = load(file)?;
    let choice = match method {
        Method::Dp => MethodChoice::Dp,
        Method::Spectral => MethodChoice::Spectral,
        Method::Both => MethodChoice::Both,
    };
    let result = count_solutions(&sys, choice, &CountLimits::default())?;
    let error_bound = result
        .spectral
        .as_ref()
        .and_then(|r: &CountResult| r.error_bound)
        .filter(|b| b.is_finite());
    Ok(json!({
        "count": result.count.as_ref().map_or(Value::Null, int_json),
        "method": method_name(method),
        "error_bound": error_bound,
        "methods_agree": result.methods_agree(),
        "feasible": result.feasible,
    }))
}

fn parse_t(csv: &str, m: usize) -> Result<RatMatrix, Failure> {
    let rows = csv
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|e| {
                    let e = e.trim().trim_matches('"');
                    e.parse::<BigRational>()
                        .map_err(|_| Failure::parse(format!("bad entry {e:?} in --force-T")))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let t = RatMatrix::from_rows(rows)?;
    if t.cols() != m {
        return Err(Failure::parse(format!(
            "--force-T has {} columns, the system has {m} rows",
            t.cols()
        )));
    }
    Ok(t)
}

fn cmd_verify(
    file: &Path,
    window: Option<Vec<u64>>,
    force_t: Option<&str>,
) -> Result<Value, Failure> {
    let sys = load(file)?;
    let n = sys.cols();
    let window: Option<Vec<BigInt>> = match window {
        None => None,
        Some(w) if w.len() == 1 => Some(vec![BigInt::from(w[0]); n]),
        Some(w) if w.len() == n => Some(w.into_iter().map(BigInt::from).collect()),
        Some(w) => {
            return Err(Failure::parse(format!(
                "--window has {} entries, the system has {n} variables",
                w.len()
            )))
        }
    };
    let infeasible =
        json!({"equal": null, "counterexample": null, "window": null, "verdict": "infeasible"});
    // A forced T still takes its default window from the constructed one.
    let (t, agg) = match force_t {
        Some(csv) => (parse_t(csv, sys.rows())?, aggregate_strong(&sys).ok()),
        None => {
            let agg =
                aggregate_strong(&sys).map_err(|e| infeasible_report(e.into(), infeasible))?;
            (agg.t().clone(), Some(agg))
        }
    };
    let window = window
        .or_else(|| sys.upper_bounds().map(<[BigInt]>::to_vec))
        .or_else(|| agg.as_ref().and_then(|a| pointed_window(&sys, a)))
        .ok_or_else(|| Failure {
            code: EXIT_WINDOW,
            message: "no finite window covers this system; pass --window".into(),
            report: None,
        })?;
    let cert = Enumerator::from_env().certify_matrix(&sys, &t, &window)?;
    let counterexample = match &cert {
        Certificate::Equal => Value::Null,
        Certificate::CounterexampleFound(x) => ints_json(x),
    };
    Ok(json!({
        "equal": cert.is_equal(),
        "counterexample": counterexample,
        "k": t.rows(),
        "T": matrix_json(&t),
        "window": ints_json(&window),
        "verdict": "ok",
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Aggregate {
            file,
            mode,
            explicit,
        } => cmd_aggregate(file, *mode, *explicit),
        Command::Count { file, method } => cmd_count(file, *method),
        Command::Verify {
            file,
            window,
            force_t,
        } => cmd_verify(file, window.clone(), force_t.as_deref()),
    };
    match outcome {
        Ok(report) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("serializable")
            );
            ExitCode::SUCCESS
        }
        Err(f) => {
            if let Some(report) = f.report {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("serializable")
                );
            }
            eprintln!("dagg: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
