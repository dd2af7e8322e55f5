//! `powerseq` command-line runner.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use powerseq::circlemeasure::{fourier_coefficient, unitary_power_verdict, CircleMeasure, Coefficient, UnitaryModel};
use powerseq::linalg::op_norm;
use powerseq::opcore::{power_log_norms, to_dense_cmat, DenseMatrix, Dim, OperatorExpr};
use powerseq::powerdyn::{classify_power_sequence, projection_diagnostics, Tolerances, Window};
use powerseq::random::{self, trial_rng};
use powerseq::semispectral::{
    spectral_measure_of_normal, stability_verdict, strong_convergence_criterion, uniform_stability_series,
};
use powerseq::shiftlab::{inflation_norm_profile, InflationParams, Theta};
use powerseq::suites::{run_suite, Suite, SuiteConfig};
use powerseq::Error;

#[derive(Parser)]
#[command(name = "powerseq", version, about = "Power sequences of structured operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for randomized constructions and suites.
    #[arg(long, global = true, default_value_t = random::DEFAULT_SEED)]
    seed: u64,
    /// JSON output path (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// CSV trace output path.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an operator document, or build a random one with known structure.
    Construct {
        #[arg(long, conflicts_with = "random")]
        op: Option<PathBuf>,
        #[arg(long, value_enum)]
        random: Option<RandomKind>,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        rank: usize,
    },
    /// `log ||T^n||` for an operator, or the inflation profile for `--theta`.
    NormProfile {
        #[arg(long, conflicts_with = "theta")]
        op: Option<PathBuf>,
        #[arg(long)]
        theta: Option<String>,
        #[arg(long, default_value_t = 3)]
        x1: u64,
        #[arg(long, default_value_t = 5000)]
        n_max: u64,
    },
    /// Classify the power sequence of an operator.
    Classify {
        #[arg(long)]
        op: PathBuf,
        #[arg(long, default_value_t = 200)]
        n_max: u64,
        /// Limit tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Leading basis vectors observed for infinite operators.
        #[arg(long, default_value_t = 16)]
        window: usize,
        /// Trace written to `--csv`.
        #[arg(long, value_enum, default_value_t = TraceKind::Norm)]
        trace: TraceKind,
    },
    /// Idempotency, self-adjointness and numerical radius of a projection.
    DiagnoseProjection {
        #[arg(long)]
        op: PathBuf,
        /// Operator the projection should commute with (defaults to the projection).
        #[arg(long)]
        with: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Fourier coefficients `int z^k dmu` of a circle measure.
    MeasureFourier {
        /// Measure JSON file, or `lebesgue` / `cantor`.
        #[arg(long)]
        measure: String,
        /// Indices: `a..b`, `b^i..b^j` or a comma-separated list.
        #[arg(long, allow_hyphen_values = true)]
        k: String,
    },
    /// Weak-convergence verdict for a unitary given by circle measures.
    UnitaryVerdict {
        /// Unitary model JSON file.
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 2000)]
        k_max: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Spectral data and stability verdicts of a normal matrix.
    Spectral {
        #[arg(long)]
        op: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Run a randomized or structured property suite.
    VerifySuite {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value = "2")]
        theta: String,
        #[arg(long)]
        n_max: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RandomKind {
    Convergent,
    Idempotent,
    Normal,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceKind {
    Norm,
    Strong,
    Weak,
    Limit,
    PowerNorm,
}

impl TraceKind {
    fn name(self) -> &'static str {
        match self {
            TraceKind::Norm => "norm",
            TraceKind::Strong => "strong",
            TraceKind::Weak => "weak",
            TraceKind::Limit => "limit",
            TraceKind::PowerNorm => "power_norm",
        }
    }
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Every JSON artifact: the command, the seed, and the result.
#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    command: String,
    seed: u64,
    result: T,
}

#[derive(Serialize, Deserialize)]
struct Constructed {
    operator: OperatorExpr<f64>,
    dim: Dim,
    norm: Option<f64>,
    /// Known structure of a random construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truth: Option<Value>,
}

#[derive(Serialize, Deserialize)]
struct FourierRow {
    k: i64,
    re: f64,
    im: f64,
    abs: f64,
    error: f64,
}

enum Failure {
    Input(Error),
    Io(String, std::io::Error),
    /// Property assertions failed; the envelope was already written.
    Assertion(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(names)) => {
            let err = json!({"error": {"kind": "assertion_failed", "failed": names}});
            eprintln!("{err}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("{}", json!({"error": {"kind": e.kind(), "message": e.to_string()}}));
            ExitCode::from(2)
        }
        Err(Failure::Io(path, e)) => {
            eprintln!("{}", json!({"error": {"kind": "io", "path": path, "message": e.to_string()}}));
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.display().to_string(), e))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Input(Error::Parse(format!("{}: {e}", path.display()))))
}

/// Write `contents` to `path` through a temporary file in the same directory.
fn write_atomic(path: &Path, contents: &str) -> Outcome {
    let io = |e: std::io::Error| Failure::Io(path.display().to_string(), e);
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit<T: Serialize>(common: &Common, command: &str, result: T) -> Outcome {
    let env = Envelope {
        command: command.to_string(),
        seed: common.seed,
        result,
    };
    let text = serde_json::to_string_pretty(&env).expect("results serialize") + "\n";
    match &common.out {
        Some(p) => write_atomic(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_csv(common: &Common, csv: &str) -> Outcome {
    match &common.csv {
        Some(p) => write_atomic(p, csv),
        None => Ok(()),
    }
}

fn parse_theta(s: &str) -> Result<Theta, Failure> {
    if s == "inf" || s == "infinity" {
        return Ok(Theta::Infinite);
    }
    s.parse::<f64>()
        .ok()
        .filter(|t| *t > 1.0 && t.is_finite())
        .map(Theta::Finite)
        .ok_or_else(|| Failure::Input(Error::InvalidArgument(format!("theta must be > 1 or `inf`, got {s:?}"))))
}

/// `a..b` (inclusive), `b^i..b^j`, or `k1,k2,...`.
fn parse_k_spec(s: &str) -> Result<Vec<i64>, Failure> {
    let bad = || Failure::Input(Error::Parse(format!("bad index spec {s:?}")));
    let int = |t: &str| t.trim().parse::<i64>().map_err(|_| bad());
    if let Some((a, b)) = s.split_once("..") {
        if let (Some((base, i)), Some((base2, j))) = (a.split_once('^'), b.split_once('^')) {
            let (base, i, j) = (int(base)?, int(i)?, int(j)?);
            if base != int(base2)? || i < 0 || j < i {
                return Err(bad());
            }
            return (i..=j)
                .map(|e| u32::try_from(e).ok().and_then(|e| base.checked_pow(e)).ok_or_else(bad))
                .collect();
        }
        let (a, b) = (int(a)?, int(b)?);
        if b < a || b - a > 1_000_000 {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(int).collect()
}

fn load_measure(spec: &str) -> Result<CircleMeasure, Failure> {
    let path = Path::new(spec);
    match spec {
        "lebesgue" if !path.exists() => Ok(CircleMeasure::lebesgue()),
        "cantor" if !path.exists() => Ok(CircleMeasure::cantor()),
        _ => {
            let mu: CircleMeasure = parse_json(path)?;
            mu.validate()?;
            Ok(mu)
        }
    }
}

fn finite_matrix(op: &OperatorExpr<f64>) -> Result<powerseq::linalg::CMat, Failure> {
    if !op.dim().is_finite() {
        return Err(Failure::Input(Error::Unsupported(
            "this command needs a finite-dimensional operator".into(),
        )));
    }
    Ok(to_dense_cmat(op)?)
}

fn run(cli: Cli) -> Outcome {
    let common = cli.common;
    match cli.command {
        Command::Construct { op, random, dim, rank } => construct(&common, op, random, dim, rank),
        Command::NormProfile { op, theta, x1, n_max } => {
            if let Some(path) = op {
                let op: OperatorExpr<f64> = parse_json(&path)?;
                let logs = power_log_norms(&op, n_max)?;
                let mut csv = String::from("n,log_norm\n");
                for (i, l) in logs.iter().enumerate() {
                    csv.push_str(&format!("{},{l}\n", i + 1));
                }
                emit_csv(&common, &csv)?;
                let finite: Vec<f64> = logs.iter().copied().filter(|l| l.is_finite()).collect();
                return emit(
                    &common,
                    "norm-profile",
                    json!({
                        "n_max": n_max,
                        "min_log_norm": finite.iter().copied().fold(f64::INFINITY, f64::min),
                        "max_log_norm": finite.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                        "last_root": logs.last().map(|l| (l / n_max as f64).exp()),
                    }),
                );
            }
            let theta = parse_theta(theta.as_deref().unwrap_or("2"))?;
            let prof = inflation_norm_profile(&InflationParams::new(x1, theta), n_max)?;
            emit_csv(&common, &prof.to_csv())?;
            emit(
                &common,
                "norm-profile",
                json!({
                    "n_max": n_max,
                    "liminf_est": prof.liminf_est.exp(),
                    "limsup_est": prof.limsup_est.exp(),
                    "plateau_values": prof.plateau_values().iter().map(|p| (p.0, p.1.exp())).collect::<Vec<_>>(),
                    "segments": prof.segments,
                }),
            )
        }
        Command::Classify { op, n_max, tol, window, trace } => {
            let op: OperatorExpr<f64> = parse_json(&op)?;
            let tol = Tolerances {
                limit: tol,
                ..Tolerances::default()
            };
            let window = match op.dim() {
                Dim::Finite(_) => Window::Full,
                Dim::Infinite => Window::Indices((0..window).collect()),
            };
            let report = classify_power_sequence(&op, &window, n_max, &tol)?;
            emit_csv(&common, &report.trace_csv(trace.name())?)?;
            emit(&common, "classify", report)
        }
        Command::DiagnoseProjection { op, with, tol } => {
            let p_op: OperatorExpr<f64> = parse_json(&op)?;
            let p = finite_matrix(&p_op)?;
            let t = match with {
                Some(path) => parse_json::<OperatorExpr<f64>>(&path)?,
                None => p_op,
            };
            let tol = Tolerances {
                limit: tol,
                ..Tolerances::default()
            };
            emit(&common, "diagnose-projection", projection_diagnostics(&p, &t, &tol)?)
        }
        Command::MeasureFourier { measure, k } => {
            let mu = load_measure(&measure)?;
            let rows: Vec<FourierRow> = parse_k_spec(&k)?
                .into_iter()
                .map(|k| {
                    let Coefficient { value, error } = fourier_coefficient(&mu, k);
                    FourierRow {
                        k,
                        re: value.re,
                        im: value.im,
                        abs: value.norm(),
                        error,
                    }
                })
                .collect();
            let mut csv = String::from("k,re,im,abs,error\n");
            for r in &rows {
                csv.push_str(&format!("{},{},{},{},{}\n", r.k, r.re, r.im, r.abs, r.error));
            }
            emit_csv(&common, &csv)?;
            emit(&common, "measure-fourier", rows)
        }
        Command::UnitaryVerdict { measure, k_max, tol } => {
            let model: UnitaryModel = parse_json(&measure)?;
            emit(&common, "unitary-verdict", unitary_power_verdict(&model, k_max, tol)?)
        }
        Command::Spectral { op, tol } => {
            let op: OperatorExpr<f64> = parse_json(&op)?;
            let m = finite_matrix(&op)?;
            let spectral = spectral_measure_of_normal(&m, tol)?;
            let verdict = stability_verdict(&m, tol)?;
            let strong = strong_convergence_criterion(&m, tol).ok();
            let series = if verdict.uniform.holds {
                uniform_stability_series(&m, None, tol).ok()
            } else {
                None
            };
            emit(
                &common,
                "spectral",
                json!({"spectral": spectral, "verdict": verdict, "strong": strong, "series": series}),
            )
        }
        Command::VerifySuite { suite, trials, theta, n_max } => {
            let cfg = SuiteConfig {
                seed: common.seed,
                trials,
                theta: parse_theta(&theta)?,
                n_max,
            };
            let report = run_suite(suite, &cfg)?;
            for a in &report.artifacts {
                emit_csv(&common, &a.csv)?;
            }
            let failed: Vec<String> = report.failed_checks().into_iter().map(String::from).collect();
            emit(&common, "verify-suite", &report)?;
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Assertion(failed))
            }
        }
    }
}

fn construct(common: &Common, op: Option<PathBuf>, kind: Option<RandomKind>, dim: usize, rank: usize) -> Outcome {
    let (operator, truth) = match (op, kind) {
        (Some(path), _) => (parse_json::<OperatorExpr<f64>>(&path)?, None),
        (None, Some(kind)) => {
            if dim == 0 || rank > dim {
                return Err(Failure::Input(Error::InvalidArgument(format!(
                    "need 0 <= rank <= dim and dim >= 1, got rank {rank}, dim {dim}"
                ))));
            }
            let mut rng = trial_rng(common.seed, 0);
            let dense = |m: &powerseq::linalg::CMat| DenseMatrix::<f64>::from_cmat(m);
            match kind {
                RandomKind::Convergent => {
                    let c = random::constructed_convergent(&mut rng, dim, rank, false, 0.9);
                    let truth = json!({"limit": dense(&c.p)?, "similarity": dense(&c.s)?, "rank": rank, "rho_l": c.rho_l});
                    (OperatorExpr::finite(dense(&c.t)?), Some(truth))
                }
                RandomKind::Idempotent => {
                    let oblique = 0 < rank && rank < dim;
                    let p = random::idempotent(&mut rng, dim, rank, oblique);
                    (OperatorExpr::finite(dense(&p)?), Some(json!({"rank": rank, "oblique": oblique})))
                }
                RandomKind::Normal => {
                    let spectrum = random::normal_spectrum(&mut rng, dim);
                    let m = random::normal_with(&mut rng, &spectrum);
                    let eig: Vec<[f64; 2]> = spectrum.iter().map(|z| [z.re, z.im]).collect();
                    (OperatorExpr::finite(dense(&m)?), Some(json!({"eigenvalues": eig})))
                }
            }
        }
        (None, None) => {
            return Err(Failure::Input(Error::InvalidArgument("construct needs --op or --random".into())));
        }
    };
    operator.validate()?;
    let dim = operator.dim();
    let norm = match dim {
        Dim::Finite(_) => Some(op_norm(&to_dense_cmat(&operator)?)),
        Dim::Infinite => power_log_norms(&operator, 1).ok().and_then(|l| l.first().map(|x| x.exp())),
    };
    emit(
        common,
        "construct",
        Constructed {
            operator,
            dim,
            norm,
            truth,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ks(s: &str) -> Vec<i64> {
        parse_k_spec(s).ok().unwrap()
    }

    #[test]
    fn k_specs() {
        assert_eq!(ks("-2..2"), vec![-2, -1, 0, 1, 2]);
        assert_eq!(ks("3^0..3^3"), vec![1, 3, 9, 27]);
        assert_eq!(ks("1,5,-7"), vec![1, 5, -7]);
        assert!(parse_k_spec("3^0..2^4").is_err());
        assert!(parse_k_spec("5..1").is_err());
        assert!(parse_k_spec("x").is_err());
    }

    #[test]
    fn theta_values() {
        assert!(matches!(parse_theta("2"), Ok(Theta::Finite(t)) if t == 2.0));
        assert!(matches!(parse_theta("inf"), Ok(Theta::Infinite)));
        assert!(parse_theta("1").is_err());
    }
}
