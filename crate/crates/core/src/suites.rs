//! Randomized and structured property suites. Each suite returns named
//! checks; a suite passes iff every check passes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::circlemeasure::{
    component_trace, fourier_coefficient, fourier_coefficient_in, rational_rotations, unitary_power_verdict, Angle,
    CircleMeasure, Role, UnitaryModel,
};
use crate::error::{Error, Result};
use crate::linalg::{self, mat_pow, op_norm, subspace_distance, CMat};
use crate::opcore::{DiagonalSeq, OperatorExpr};
use crate::powerdyn::{
    classify_dense, classify_power_sequence, identity_part_split, kernels, numerical_radius, similarity_orthogonalize,
    KernelRelation, SplitKind, Tolerances, Verdict, Window,
};
use crate::random::{self, trial_rng};
use crate::scalar::{PosReal, Rat};
use crate::semispectral::{
    moment_identity_residual, normal_stability_split, spectral_measure_of_normal, stability_verdict,
    strong_convergence_criterion, two_isometry_moment_residual, uniform_stability_series,
};
use crate::shiftlab::{
    coadjoint_unit_eigenvector, coadjoint_witness, inflation_norm_profile, shift_power_norm, BergerMoments,
    InflationParams, TailVerdict, Theta, WeightFormula, WeightRule,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    T1,
    #[serde(rename = "pytxly")]
    Pytxly,
    L1,
    #[serde(rename = "limyng")]
    Limyng,
    #[serde(rename = "prichyr")]
    Prichyr,
    #[serde(rename = "serzcw")]
    Serzcw,
    #[serde(rename = "pvzxk")]
    Pvzxk,
    T2,
    #[serde(rename = "sec5")]
    Sec5,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::T1,
        Suite::Pytxly,
        Suite::L1,
        Suite::Limyng,
        Suite::Prichyr,
        Suite::Serzcw,
        Suite::Pvzxk,
        Suite::T2,
        Suite::Sec5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::T1 => "T1",
            Suite::Pytxly => "pytxly",
            Suite::L1 => "L1",
            Suite::Limyng => "limyng",
            Suite::Prichyr => "prichyr",
            Suite::Serzcw => "serzcw",
            Suite::Pvzxk => "pvzxk",
            Suite::T2 => "T2",
            Suite::Sec5 => "sec5",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides the suite's default trial count.
    pub trials: Option<usize>,
    /// Inflation ratio for `serzcw`.
    pub theta: Theta,
    /// Overrides the suite's default horizon.
    pub n_max: Option<u64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: random::DEFAULT_SEED,
            trials: None,
            theta: Theta::Finite(2.0),
            n_max: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity, where one applies.
    pub worst: Option<f64>,
    pub bound: Option<f64>,
    pub detail: String,
}

impl Check {
    fn flag(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            worst: None,
            bound: None,
            detail: detail.into(),
        }
    }

    /// Passes iff `worst <= bound`.
    fn at_most(name: &str, worst: f64, bound: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: worst <= bound,
            worst: Some(worst),
            bound: Some(bound),
            detail: detail.into(),
        }
    }

    /// Passes iff no trial failed; `failures` lists offending trial indices.
    fn all(name: &str, failures: &[usize], total: usize) -> Self {
        let shown: Vec<String> = failures.iter().take(10).map(|i| i.to_string()).collect();
        Check::flag(
            name,
            failures.is_empty(),
            if failures.is_empty() {
                format!("{total}/{total} trials")
            } else {
                format!("{} of {total} trials fail (first: {})", failures.len(), shown.join(", "))
            },
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    pub csv: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<Check>,
    /// Observations recorded without assertion.
    pub records: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub artifacts: Vec<Artifact>,
    pub elapsed_ms: u128,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut report = SuiteReport {
        suite,
        seed: cfg.seed,
        trials: 0,
        checks: Vec::new(),
        records: BTreeMap::new(),
        artifacts: Vec::new(),
        elapsed_ms: 0,
    };
    match suite {
        Suite::T1 => t1(cfg, &mut report)?,
        Suite::Pytxly => pytxly(cfg, &mut report)?,
        Suite::L1 => l1(cfg, &mut report)?,
        Suite::Limyng => limyng(cfg, &mut report)?,
        Suite::Prichyr => prichyr(cfg, &mut report)?,
        Suite::Serzcw => serzcw(cfg, &mut report)?,
        Suite::Pvzxk => pvzxk(cfg, &mut report)?,
        Suite::T2 => t2(cfg, &mut report)?,
        Suite::Sec5 => sec5(cfg, &mut report)?,
    }
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

fn failures(flags: impl IntoIterator<Item = bool>) -> Vec<usize> {
    flags.into_iter().enumerate().filter(|(_, ok)| !ok).map(|(i, _)| i).collect()
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Constructed convergent matrices: T1, pytxly, L1

const CONSTRUCTED_TRIALS: usize = 200;
const CONSTRUCTED_N_MAX: u64 = 5000;

struct ConstructedTrial {
    t: CMat,
    verdict: Verdict,
    limit: Option<CMat>,
    detected_n: Option<u64>,
    /// `||T^n - P_true||` at the detected `n`.
    truth_residual: f64,
    limit_vs_truth: f64,
    idempotency: f64,
    commutation: f64,
    range_vs_kernel: f64,
    self_adjointness: f64,
    relation: KernelRelation,
    invariance: f64,
    synyr_q_defect: f64,
    /// `||R^n - Q||` against `cond(S) ||T^n - P|| + 1e-10`.
    synyr_excess: f64,
    unitary_similarity: bool,
}

fn constructed_trial(seed: u64, i: usize) -> Result<ConstructedTrial> {
    let mut rng = trial_rng(seed, i as u64);
    let n = rng.random_range(1..=8usize);
    let k = rng.random_range(0..=n);
    let unitary = rng.random_bool(0.5);
    let c = random::constructed_convergent(&mut rng, n, k, unitary, 0.9);
    let tol = Tolerances::default();
    let report = classify_dense(&c.t, CONSTRUCTED_N_MAX, &tol)?;
    let limit = report.limit.as_ref().and_then(|l| l.dense()).cloned();
    let mut out = ConstructedTrial {
        t: c.t.clone(),
        verdict: report.verdict,
        limit: limit.clone(),
        detected_n: report.detected_n,
        truth_residual: f64::INFINITY,
        limit_vs_truth: f64::INFINITY,
        idempotency: f64::INFINITY,
        commutation: f64::INFINITY,
        range_vs_kernel: f64::INFINITY,
        self_adjointness: f64::INFINITY,
        relation: KernelRelation::Incomparable,
        invariance: f64::INFINITY,
        synyr_q_defect: f64::INFINITY,
        synyr_excess: f64::INFINITY,
        unitary_similarity: unitary,
    };
    let k = kernels(&c.t, &tol)?;
    out.relation = k.relation;
    out.invariance = k.invariance_defect;
    let (Some(p), Some(dn)) = (limit, report.detected_n) else {
        return Ok(out);
    };
    let tn = mat_pow(&c.t, dn);
    out.truth_residual = op_norm(&(&tn - &c.p));
    out.limit_vs_truth = op_norm(&(&p - &c.p));
    out.idempotency = op_norm(&(&p * &p - &p));
    out.commutation = op_norm(&(&c.t * &p - &p * &c.t));
    out.range_vs_kernel = subspace_distance(&linalg::range_basis(&p, tol.rank), &k.fixed);
    out.self_adjointness = op_norm(&(&p - p.adjoint()));
    let o = similarity_orthogonalize(&c.t, &p, &tol)?;
    out.synyr_q_defect = op_norm(&(&o.q - o.q.adjoint()));
    let cond = op_norm(&o.s) * op_norm(&o.s.clone().try_inverse().unwrap_or_else(|| o.s.clone()));
    let rn = mat_pow(&o.r, dn);
    out.synyr_excess = op_norm(&(rn - &o.q)) - (cond * op_norm(&(&tn - &p)) + 1e-10);
    Ok(out)
}

fn constructed_trials(cfg: &SuiteConfig) -> Result<Vec<ConstructedTrial>> {
    let trials = cfg.trials.unwrap_or(CONSTRUCTED_TRIALS);
    (0..trials).into_par_iter().map(|i| constructed_trial(cfg.seed, i)).collect()
}

fn t1(cfg: &SuiteConfig, r: &mut SuiteReport) -> Result<()> {
    let trials = constructed_trials(cfg)?;
    r.trials = trials.len();
    let total = trials.len();
    r.checks.push(Check::all(
        "norm_convergent",
        &failures(trials.iter().map(|t| t.verdict == Verdict::NormConvergent)),
        total,
    ));
    r.checks.push(Check::at_most(
        "residual_at_detected_n",
        max_of(trials.iter().map(|t| t.truth_residual)),
        1e-8,
        "||T^n - P|| at the detected n, P from the construction",
    ));
    r.checks.push(Check::at_most(
        "limit_matches_construction",
        max_of(trials.iter().map(|t| t.limit_vs_truth)),
        1e-8,
        "||P_computed - P_constructed||",
    ));
    r.checks.push(Check::at_most(
        "idempotent",
        max_of(trials.iter().map(|t| t.idempotency)),
        1e-8,
        "||P^2 - P||",
    ));
    r.checks.push(Check::at_most(
        "commutes",
        max_of(trials.iter().map(|t| t.commutation)),
        1e-8,
        "||TP - PT||",
    ));
    r.checks.push(Check::at_most(
        "range_equals_fixed_space",
        max_of(trials.iter().map(|t| t.range_vs_kernel)),
        1e-6,
        "sine of the largest angle between R(P) and N(I - T)",
    ));
    r.checks.push(Check::at_most(
        "similar_limit_orthogonal",
        max_of(trials.iter().map(|t| t.synyr_q_defect)),
        1e-8,
        "||Q - Q*|| for Q = S^{-1} P S",
    ));
    r.checks.push(Check::at_most(
        "similar_powers_converge",
        max_of(trials.iter().map(|t| t.synyr_excess)),
        0.0,
        "||R^n - Q|| minus cond(S) ||T^n - P|| + 1e-10",
    ));
    let detected: Vec<u64> = trials.iter().filter_map(|t| t.detected_n).collect();
    r.records.insert("max_detected_n".into(), json!(detected.iter().max()));
    Ok(())
}

fn pytxly(cfg: &SuiteConfig, r: &mut SuiteReport) -> Result<()> {
    let trials = constructed_trials(cfg)?;
    r.trials = trials.len();
    let tol = Tolerances::default();
    let mut flags = Vec::new();
    let (mut orth, mut oblique) = (0usize, 0usize);
    let mut mynied: BTreeMap<String, usize> = BTreeMap::new();
    for t in &trials {
        let orthogonal = t.self_adjointness <= 1e-8;
        let equal = t.relation == KernelRelation::Equal;
        let reduces = t.invariance <= tol.subspace;
        flags.push(t.limit.is_some() && orthogonal == equal && equal == reduces);
        if orthogonal {
            orth += 1;
        } else {
            oblique += 1;
        }
        // conditions of the open remark, recorded only
        let w = numerical_radius(&t.t, 360, 40).value;
        let key = format!(
            "w<=1:{} reduces:{} unitary_similarity:{}",
            w <= 1.0 + 1e-9,
            reduces,
            t.unitary_similarity
        );
        *mynied.entry(key).or_default() += 1;
    }
    r.checks.push(Check::all(
        "orthogonal_iff_kernels_equal_iff_reducing",
        &failures(flags),
        trials.len(),
    ));
    r.checks.push(Check::flag(
        "both_cases_exercised",
        orth > 0 && oblique > 0,
        format!("{orth} orthogonal, {oblique} oblique limits"),
    ));
    r.records.insert("remark_conditions".into(), json!(mynied));
    Ok(())
}

fn l1(cfg: &SuiteConfig, r: &mut SuiteReport) -> Result<()> {
    let trials = constructed_trials(cfg)?;
    r.trials = trials.len();
    let mut flags = Vec::new();
    let mut triggered = 0usize;
    for t in &trials {
        let (Some(p), Some(dn)) = (&t.limit, t.detected_n) else {
            flags.push(true);
            continue;
        };
        // trailing window well past the detected index
        let start = 2 * dn + 10;
        let mut pw = mat_pow(&t.t, start);
        let mut min_norm = f64::INFINITY;
        for _ in 0..10 {
            min_norm = min_norm.min(op_norm(&pw));
            pw = &pw * &t.t;
        }
        if min_norm <= 1.0 + 1e-9 {
            triggered += 1;
            flags.push(op_norm(&(p - p.adjoint())) <= 1e-6);
        } else {
            flags.push(true);
        }
    }
    r.checks.push(Check::all("liminf_norm_le_1_forces_orthogonal_limit", &failures(flags), trials.len()));
    r.checks.push(Check::flag(
        "hypothesis_exercised",
        triggered > 0,
        format!("{triggered} trials with trailing min ||T^n|| <= 1 + 1e-9"),
    ));
    Ok(())
}

// ---------------------------------------------------------------------------

/// Horizon reaching the fifth plateau of the default inflation layout.
pub const LIMYNG_N_MAX: u64 = 270_000;

fn limyng(cfg: &SuiteConfig, r: &mut SuiteReport) -> Result<()> {
    let trials = cfg.trials.unwrap_or(200);
    r.trials = trials;
    let results: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.seed, i as u64);
            let n = rng.random_range(1..=8usize);
            let rho = if rng.random_bool(0.5) {
                rng.random_range(0.0..0.9)
            } else {
                rng.random_range(1.1..1.5)
            };
            let m = random::with_spectral_radius(&mut rng, n, rho);
            let tail = op_norm(&mat_pow(&m, 1000));
            (random::spectral_radius(&m) < 1.0, tail <= 1e-6)
        })
        .collect();
    r.checks.push(Check::all(
        "radius_below_1_iff_norms_vanish",
        &failures(results.iter().map(|(a, b)| a == b)),
        trials,
    ));

    let n_max = cfg.n_max.unwrap_or(LIMYNG_N_MAX);
    let prof = inflation_norm_profile(&InflationParams::new(3, Theta::Finite(2.0)), n_max)?;
    let min_log = prof.entries.iter().map(|e| e.log_norm).fold(f64::INFINITY, f64::min);
    let r_est = prof
        .entries
        .iter()
        .map(|e| e.log_norm / e.n as f64)
        .fold(f64::INFINITY, f64::min)
        .exp();
    r.checks.push(Check::flag(
        "inflation_norms_at_least_1",
        min_log >= 0.0,
        format!("min log ||T^n|| = {min_log:e}"),
    ));
    r.checks.push(Check::at_most(
        "inflation_radius_is_1",
        r_est - 1.0,
        1e-6,
        format!("1 <= r(T) <= min_n ||T^n||^(1/n) over n <= {n_max}"),
    ));
    r.records.insert("liminf_est".into(), json!(prof.liminf_est.exp()));
    r.records.insert("radius_upper_bound".into(), json!(r_est));
    Ok(())
}

// ---------------------------------------------------------------------------

fn prichyr(cfg: &SuiteConfig, r: &mut SuiteReport) -> Result<()> {
    let trials = cfg.trials.unwrap_or(500);
    r.trials = trials;
    let tol = 1e-6;
    let rows: Vec<(bool, bool, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.seed, i as u64);
            let n = rng.random_range(1..=8usize);
            let k = rng.random_range(0..=n);
            let oblique = 0 < k && k < n && rng.random_bool(0.5);
            let p = random::idempotent(&mut rng, n, k, oblique);
            let sa = op_norm(&(&p - p.adjoint())) <= tol;
            let w = numerical_radius(&p, 720, 60).value;
            (sa, w <= 1.0 + tol, op_norm(&(&p * &p - &p)))
        })
        .collect();
    r.checks.push(Check::all(
        "self_adjoint_iff_numerical_radius_le_1",
        &failures(rows.iter().map(|(a, b, _)| a == b)),
        trials,
    ));
    r.checks.push(Check::at_most(
        "inputs_idempotent",
        max_of(rows.iter().map(|x| x.2)),
        1e-8,
        "||P^2 - P|| of generated idempotents",
    ));
    let orth = rows.iter().filter(|x| x.0).count();
    r.records.insert("orthogonal".into(), json!(orth));
    r.records.insert("oblique".into(), json!(trials - orth));

    // power inequality w(M^n) <= w(M)^n
    let excess: Vec<f64> = (0..trials.min(100))
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.seed ^ 0xB5, i as u64);
            let n = rng.random_range(1..=6usize);
            let g = random::gaussian(&mut rng, n, n);
            let w = numerical_radius(&g, 720, 60);
            let m = g * linalg::c(1.0 / w.value, 0.0);
            let err = w.error_bound / w.value;
            let mut worst = f64::NEG_INFINITY;
            let mut mp = m.clone();
            for k in 1..=6 {
                let wk = numerical_radius(&mp, 720, 60).value;
                worst = worst.max(wk - (1.0 + err).powi(k));
                mp = &mp * &m;
            }
            worst
        })
        .collect();
    r.checks.push(Check::at_most(
        "numerical_radius_power_inequality",
        excess.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        0.0,
        "w(M^n) - (w(M) + grid error)^n for w(M) = 1, n <= 6",
    ));
    Ok(())
}

// ---------------------------------------------------------------------------

/// Plateau bound for the default inflation run.
pub const SERZCW_PLATEAU_BOUND: f64 = 1.06;

fn serzcw(cfg: &SuiteConfig, r: &mut SuiteReport) -> Result<()> {
    let n_max = cfg.n_max.unwrap_or(5000);
    let params = InflationParams::new(3, cfg.theta);
    let prof = inflation_norm_profile(&params, n_max)?;
    r.trials = prof.entries.len();
    let plateaus = prof.plateau_values();
    let decreasing = plateaus.windows(2).all(|w| w[1].1 < w[0].1) && plateaus.iter().all(|p| p.1 > 0.0);
    r.checks.push(Check::flag(
        "plateau_min_decreasing",
        decreasing && !plateaus.is_empty(),
        format!(
            "plateau values {:?}",
            plateaus.iter().map(|p| p.1.exp()).collect::<Vec<_>>()
        ),
    ));
    let last = plateaus.last().map_or(f64::INFINITY, |p| p.1.exp());
    r.checks.push(Check::at_most(
        "final_plateau_le_bound",
        last,
        SERZCW_PLATEAU_BOUND,
        format!("last plateau value within n <= {n_max}"),
    ));
    if let Theta::Finite(theta) = cfg.theta {
        let peak_err = max_of(prof.peak_values().map(|e| (e.log_norm - theta.ln()).abs()));
        r.checks.push(Check::at_most(
            "peaks_equal_theta",
            peak_err,
            1e-10,
            "|log ||T^n|| - log theta| over peak samples",
        ));
    }
    let min_log = prof.entries.iter().map(|e| e.log_norm).fold(f64::INFINITY, f64::min);
    r.checks.push(Check::flag(
        "root_norms_at_least_1",
        min_log >= 0.0,
        format!("min log ||T^n|| = {min_log:e}"),
    ));
    r.records.insert("liminf_est".into(), json!(prof.liminf_est.exp()));
    r.records.insert("limsup_est".into(), json!(prof.limsup_est.exp()));
    r.records.insert("segments".into(), serde_json::to_value(&prof.segments).unwrap_or(Value::Null));
    r.artifacts.push(Artifact {
        name: "norm_profile".into(),
        csv: prof.to_csv(),
    });
    Ok(())
}

// ---------------------------------------------------------------------------

fn pvzxk(cfg: &SuiteConfig, r: &mut SuiteReport) -> Result<()> {
    let rule = WeightRule::berger(BergerMoments::two_point(Rat::integer(1)))?;
    let x = coadjoint_unit_eigenvector(&rule, 200)?;
    r.trials = 1;
    r.checks.push(Check::flag(
        "coadjoint_vector_in_l2",
        x.verdict == TailVerdict::InL2,
        x.reason.clone(),
    ));
    r.checks.push(Check::at_most(
        "coadjoint_tail_bound",
        x.tail_norm_bound.unwrap_or(f64::INFINITY),
        1e-10,
        "bound on ||x_{>=200}||",
    ));
    r.checks.push(Check::at_most(
        "coadjoint_residual",
        x.residual_bound.unwrap_or(f64::INFINITY),
        x.tail_norm_bound.map_or(f64::INFINITY, |t| (shift_power_norm(&rule, 1).map_or(f64::INFINITY, |p| p.value.to_f64()) + 1.0) * t),
        "||T* x_trunc - x_trunc|| <= (||T|| + 1) tail",
    ));
    let op = OperatorExpr::<f64>::shift(rule.clone())?;
    let split = identity_part_split(&op, 10, &Tolerances::default())?;
    r.checks.push(Check::flag(
        "fixed_space_trivial",
        matches!(split.kind, SplitKind::Trivial { .. }),
        format!("{:?}", split.kind),
    ));
    let one = PosReal::one();
    let bad: Vec<usize> = (0..=100)
        .filter(|&n| coadjoint_witness(&rule, &x, n).map_or(true, |w| w.square() != one.square()))
        .collect();
    r.checks.push(Check::all("witness_exactly_1", &bad, 101));

    // further increasing weights with limit > 1
    let families = [
        WeightFormula::SqrtRational {
            a: Rat::integer(4),
            b: Rat::integer(1),
            c: Rat::integer(1),
            d: Rat::integer(1),
        },
        WeightFormula::Rational {
            a: Rat::integer(3),
            b: Rat::integer(1),
            c: Rat::integer(2),
            d: Rat::integer(1),
        },
    ];
    let mut bad = Vec::new();
    for (i, f) in families.into_iter().enumerate() {
        let rule = WeightRule::monotone(f)?;
        let x = coadjoint_unit_eigenvector(&rule, 400)?;
        let op = OperatorExpr::<f64>::shift(rule.clone())?;
        let trivial = matches!(
            identity_part_split(&op, 10, &Tolerances::default())?.kind,
            SplitKind::Trivial { .. }
        );
        let witness_ok = (0..=50).all(|n| {
            coadjoint_witness(&rule, &x, n).is_ok_and(|w| (w.to_f64() - 1.0).abs() <= 1e-12)
        });
        if !(x.verdict == TailVerdict::InL2 && trivial && witness_ok) {
            bad.push(i);
        }
    }
    r.checks.push(Check::all("monotone_fixed_space_strictly_smaller", &bad, 2));
    let _ = cfg;
    Ok(())
}

// ---------------------------------------------------------------------------

fn t2(cfg: &SuiteConfig, r: &mut SuiteReport) -> Result<()> {
    let k_max = cfg.n_max.unwrap_or(2000);
    r.trials = 1;
    let leb = CircleMeasure::lebesgue();
    let bad: Vec<usize> = (-50i64..=50)
        .filter(|&k| {
            let z = fourier_coefficient_in::<BigRational>(&leb, k).expect("exact coefficient");
            let want = if k == 0 { BigRational::one() } else { BigRational::zero() };
            z.re != want || !z.im.is_zero()
        })
        .map(|k| (k + 50) as usize)
        .collect();
    r.checks.push(Check::all("lebesgue_coefficients_exact", &bad, 101));

    let cantor = CircleMeasure::cantor();
    let c1 = fourier_coefficient(&cantor, 1).abs();
    let dev = max_of((0..=12).map(|m| (fourier_coefficient(&cantor, 3i64.pow(m)).abs() - c1).abs()));
    r.checks.push(Check::at_most("cantor_invariance", dev, 1e-10, "| |mu^(3^m)| - |mu^(1)| |, m <= 12"));
    r.checks.push(Check::flag("cantor_non_rajchman", c1 > 0.2, format!("|mu^(1)| = {c1:.12}")));

    let angles: Vec<Angle> = rational_rotations(50).into_iter().map(Angle::Rational).collect();
    let v = unitary_power_verdict(&UnitaryModel::default().push_eigenvalues(angles), k_max, 1e-9)?;
    r.checks.push(Check::flag(
        "rational_rotations_not_weakly_convergent",
        !v.weakly_convergent && v.certified,
        v.components.first().map_or(String::new(), |c| c.reason.clone()),
    ));
    let diag = OperatorExpr::<f64>::diagonal(DiagonalSeq::RationalRotations { count: Some(50) })?;
    let rep = classify_power_sequence(&diag, &Window::Full, 200, &Tolerances::default())?;
    r.checks.push(Check::flag(
        "rational_rotations_classified_bounded",
        rep.verdict == Verdict::PowerBoundedNoLimit,
        format!("{:?}", rep.verdict),
    ));

    let model = UnitaryModel::default()
        .push_measure(Role::A, leb.clone())
        .push_measure(Role::Sd, CircleMeasure::dirac(Angle::Rational(Ratio::from_integer(0))));
    let v = unitary_power_verdict(&model, k_max, 1e-9)?;
    let limit_ok = v
        .limit
        .as_ref()
        .is_some_and(|l| l.identity_on == vec![1] && l.zero_on == vec![0]);
    r.checks.push(Check::flag(
        "a_plus_sd_limit_is_sd_projection",
        v.weakly_convergent && limit_ok,
        format!("{:?}", v.limit),
    ));
    let a_trace = component_trace(&model, 0, k_max as i64)?;
    let sd_trace = component_trace(&model, 1, k_max as i64)?;
    let a_tail = max_of(a_trace.iter().skip(1).map(|c| c.abs()));
    let sd_dev = max_of(sd_trace.iter().map(|c| (c.value - num_complex::Complex64::new(1.0, 0.0)).norm()));
    r.checks.push(Check::at_most(
        "traces_match_limit",
        a_tail.max(sd_dev),
        1e-12,
        format!("<U^n 1, 1>: a-block max over 0 < n <= {k_max}, sd-block deviation from 1"),
    ));
    Ok(())
}

// ---------------------------------------------------------------------------

/// Interior eigenvalues have modulus below 0.95, so 1000 steps settle them.
const NORMAL_N_MAX: u64 = 1000;

struct NormalTrial {
    implications: bool,
    moment_residual: f64,
    spectral_defect: f64,
    series: Option<f64>,
    /// `(criterion, classify)` agreement and limit distance, for contractions.
    swcti: Option<(bool, f64)>,
    weak_matches_classify: bool,
    nyrnil: Option<(f64, bool, f64)>,
    contraction: bool,
}

fn normal_trial(seed: u64, i: usize) -> Result<NormalTrial> {
    let mut rng = trial_rng(seed, i as u64);
    let n = rng.random_range(1..=8usize);
    let spectrum = random::normal_spectrum(&mut rng, n);
    let m = random::normal_with(&mut rng, &spectrum);
    let tol = 1e-8;
    let f = spectral_measure_of_normal(&m, tol)?;
    let verdict = stability_verdict(&m, tol)?;
    let mut moment_residual = 0.0f64;
    for a in 0..=6 {
        for b in 0..=6 {
            moment_residual = moment_residual.max(moment_identity_residual(&m, &f, a, b));
        }
    }
    let spectral_defect = f.projection_defect().max(f.reconstruction_defect());
    let contraction = verdict.norm <= 1.0 + tol;
    let series = verdict.uniform.holds
        .then(|| uniform_stability_series(&m, None, 1e-8))
        .transpose()?
        .map(|s| s.partial_vs_closed.max(s.middle_vs_closed));
    let report = classify_dense(&m, NORMAL_N_MAX, &Tolerances::default())?;
    let classify_limit = report.limit.as_ref().and_then(|l| l.dense()).cloned();
    let zero_limit = report.verdict == Verdict::NormConvergent
        && classify_limit.as_ref().is_some_and(|p| op_norm(p) <= 1e-8);
    let swcti = if contraction {
        let c = strong_convergence_criterion(&m, tol)?;
        let agree = c.convergent == (report.verdict == Verdict::NormConvergent);
        let dist = match (&c.limit, &classify_limit) {
            (Some(a), Some(b)) => op_norm(&(a - b)),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        Some((agree, dist))
    } else {
        None
    };
    let nyrnil = if contraction {
        let s = normal_stability_split(&m, tol)?;
        let s_ok = s.s.nrows() == 0 || stability_verdict(&s.s, tol)?.strong.holds;
        let u_unitary = if s.u.nrows() == 0 {
            0.0
        } else {
            op_norm(&(s.u.adjoint() * &s.u - CMat::identity(s.u.nrows(), s.u.nrows())))
        };
        Some((s.reassembly_defect(&m), s_ok, u_unitary))
    } else {
        None
    };
    Ok(NormalTrial {
        implications: verdict.implications_hold(),
        moment_residual,
        spectral_defect,
        series,
        swcti,
        weak_matches_classify: verdict.weak.holds == zero_limit,
        nyrnil,
        contraction,
    })
}

fn sec5(cfg: &SuiteConfig, r: &mut SuiteReport) -> Result<()> {
    let trials = cfg.trials.unwrap_or(500);
    r.trials = trials;
    let rows: Vec<NormalTrial> = (0..trials)
        .into_par_iter()
        .map(|i| normal_trial(cfg.seed, i))
        .collect::<Result<_>>()?;
    r.checks.push(Check::all(
        "uniform_implies_strong_implies_weak",
        &failures(rows.iter().map(|t| t.implications)),
        trials,
    ));
    r.checks.push(Check::at_most(
        "moment_identity",
        max_of(rows.iter().map(|t| t.moment_residual)),
        1e-8,
        "||M*^n M^m - sum z^m conj(z)^n P_z||, m, n <= 6",
    ));
    r.checks.push(Check::at_most(
        "spectral_data_consistent",
        max_of(rows.iter().map(|t| t.spectral_defect)),
        1e-10,
        "projection and reconstruction defects",
    ));
    r.checks.push(Check::at_most(
        "series_three_way_agreement",
        max_of(rows.iter().filter_map(|t| t.series)),
        1e-8,
        "partial sum, spectral middle form and (I - M*M)^{-1}",
    ));
    r.checks.push(Check::all(
        "strong_criterion_matches_classification",
        &failures(rows.iter().map(|t| t.swcti.is_none_or(|(agree, d)| agree && d <= 1e-8))),
        trials,
    ));
    r.checks.push(Check::all(
        "weak_stability_matches_zero_limit",
        &failures(rows.iter().map(|t| t.weak_matches_classify)),
        trials,
    ));
    r.checks.push(Check::all(
        "unitary_plus_stable_split",
        &failures(
            rows.iter()
                .map(|t| t.nyrnil.is_none_or(|(re, s_ok, u)| re <= 1e-10 && s_ok && u <= 1e-10)),
        ),
        trials,
    ));
    let residual = [Rat::new(121, 100), Rat::integer(2), Rat::integer(9)]
        .iter()
        .map(|l| two_isometry_moment_residual(l, 20, 100))
        .collect::<Result<Vec<_>>>()?;
    r.checks.push(Check::at_most(
        "two_isometry_moments",
        max_of(residual),
        1e-10,
        "diag(T*^n T^n) against 1 + n diag(C), n <= 100",
    ));
    r.records.insert(
        "contractions".into(),
        json!(rows.iter().filter(|t| t.contraction).count()),
    );
    Ok(())
}
