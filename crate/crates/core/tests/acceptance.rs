//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{LN_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;

use powerseq::circlemeasure::{
    fourier_coefficient, fourier_coefficient_in, multiplication_matrix_elements, Angle, CircleMeasure,
};
use powerseq::linalg::op_norm;
use powerseq::opcore::OperatorExpr;
use powerseq::powerdyn::{identity_part_split, numerical_radius, SplitKind, Tolerances};
use powerseq::random::{idempotent, trial_rng};
use powerseq::shiftlab::{
    coadjoint_unit_eigenvector, coadjoint_witness, inflation_norm_profile, shift_power_norm, BergerMoments,
    InflationParams, TailVerdict, Theta, WeightRule,
};
use powerseq::suites::{run_suite, Suite, SuiteConfig, SuiteReport};
use powerseq::Rat;
use rand::Rng;

// pinned tolerances and budgets
const PLATEAU_BOUND: f64 = 1.06;
const PEAK_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-9;
const INFLATION_BUDGET: Duration = Duration::from_secs(10);
const T1_BUDGET: Duration = Duration::from_secs(30);
const SEC5_BUDGET: Duration = Duration::from_secs(60);
const IDEMPOTENT_TOL: f64 = 1e-6;
const COADJOINT_TAIL: f64 = 1e-10;
const TWO_ISOMETRY_TOL: f64 = 1e-10;
const CANTOR_TOL: f64 = 1e-10;
const CANTOR_FLOOR: f64 = 0.2;
const TRACE_TOL: f64 = 1e-12;

struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn suite(&mut self, r: &SuiteReport) {
        for c in r.checks.iter().filter(|c| !c.passed) {
            self.failures
                .push(format!("{}::{} (worst {:?}, bound {:?}; {})", r.suite, c.name, c.worst, c.bound, c.detail));
        }
    }
}

/// `max_s sum_{i < n} log w_{s+i}` over starts `s < starts`.
fn window_max(logw: &[f64], n: usize, starts: usize) -> f64 {
    let mut prefix = vec![0.0; logw.len() + 1];
    for (i, l) in logw.iter().enumerate() {
        prefix[i + 1] = prefix[i] + l;
    }
    (0..starts).map(|s| prefix[s + n] - prefix[s]).fold(f64::NEG_INFINITY, f64::max)
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let params = InflationParams::new(3, Theta::Finite(2.0));
    let prof = inflation_norm_profile(&params, 5000).expect("profile");
    let elapsed = start.elapsed();

    let plateaus: Vec<f64> = prof.plateau_values().iter().map(|p| p.1.exp()).collect();
    o.require(
        plateaus.windows(2).all(|w| w[1] < w[0]) && plateaus.iter().all(|&p| p > 1.0),
        format!("plateau minima not strictly decreasing above 1: {plateaus:?}"),
    );
    // plateau after segment j sits at 2^(1 / (j + 3)) for s_j = j + 2
    for (i, p) in plateaus.iter().enumerate() {
        let oracle = 2f64.powf(1.0 / (i as f64 + 4.0));
        o.require((p - oracle).abs() <= ORACLE_TOL, format!("plateau {i}: {p} vs 2^(1/{})", i + 4));
    }
    let last = plateaus.last().copied().unwrap_or(f64::INFINITY);
    o.require(last <= PLATEAU_BOUND, format!("final plateau value {last:.6} > {PLATEAU_BOUND}"));

    let peak_err = prof.peak_values().map(|e| (e.log_norm - LN_2).abs()).fold(0.0, f64::max);
    o.require(
        prof.peak_values().count() > 0 && peak_err <= PEAK_TOL,
        format!("peak log-norm deviates from log 2 by {peak_err:e}"),
    );
    o.require(
        prof.entries.iter().all(|e| e.log_norm >= 0.0),
        "some ||T^n||^(1/n) < 1",
    );

    // brute-force sliding windows over the explicit weights
    let rule = WeightRule::inflation(params).expect("rule");
    let horizon = 40_000usize;
    let logw: Vec<f64> = (0..horizon as u64 + 5000).map(|i| rule.weight(i).expect("weight").ln()).collect();
    let mut worst = 0.0f64;
    for e in prof.entries.iter().filter(|e| e.n % 37 == 1 || e.n == 5000) {
        let bf = window_max(&logw, e.n as usize, horizon);
        worst = worst.max((bf - e.log_norm).abs());
    }
    o.require(worst <= ORACLE_TOL, format!("profile vs sliding-window oracle: {worst:e}"));
    o.require(elapsed <= INFLATION_BUDGET, format!("runtime {elapsed:?}"));
    o.note(format!("final plateau {last:.6}, peak error {peak_err:.1e}, oracle gap {worst:.1e}, {elapsed:.2?}"));
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let cfg = SuiteConfig {
        trials: Some(200),
        ..SuiteConfig::default()
    };
    let t1 = run_suite(Suite::T1, &cfg).expect("T1");
    let py = run_suite(Suite::Pytxly, &cfg).expect("pytxly");
    let elapsed = start.elapsed();
    o.suite(&t1);
    o.suite(&py);
    o.require(elapsed <= T1_BUDGET, format!("runtime {elapsed:?}"));
    let worst = t1.check("residual_at_detected_n").and_then(|c| c.worst).unwrap_or(f64::NAN);
    o.note(format!("200 + 200 trials, worst ||T^n - P|| {worst:.1e}, {elapsed:.2?}"));
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    let cfg = SuiteConfig {
        trials: Some(500),
        ..SuiteConfig::default()
    };
    o.suite(&run_suite(Suite::Prichyr, &cfg).expect("prichyr"));
    // independent family, checked against w(P) = (1 + ||P||) / 2
    let mut disagreements = 0;
    let mut worst = 0.0f64;
    for i in 0..500u64 {
        let mut rng = trial_rng(0xACCE, i);
        let n = rng.random_range(2..=8usize);
        let k = rng.random_range(1..n);
        let oblique = rng.random_bool(0.5);
        let p = idempotent(&mut rng, n, k, oblique);
        let w = numerical_radius(&p, 720, 60).value;
        worst = worst.max((w - (1.0 + op_norm(&p)) / 2.0).abs());
        let sa = op_norm(&(&p - p.adjoint())) <= IDEMPOTENT_TOL;
        if sa != (w <= 1.0 + IDEMPOTENT_TOL) {
            disagreements += 1;
        }
    }
    o.require(disagreements == 0, format!("{disagreements} classification disagreements"));
    o.require(worst <= IDEMPOTENT_TOL, format!("w(P) vs (1 + ||P||)/2: {worst:e}"));
    o.note(format!("500 + 500 idempotents, closed-form gap {worst:.1e}"));
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    let rule = WeightRule::berger(BergerMoments::two_point(Rat::integer(1))).expect("rule");
    let x = coadjoint_unit_eigenvector(&rule, 200).expect("eigenvector");
    let tail = x.tail_norm_bound.unwrap_or(f64::INFINITY);
    let residual = x.residual_bound.unwrap_or(f64::INFINITY);
    o.require(x.verdict == TailVerdict::InL2, format!("verdict {:?}", x.verdict));
    o.require(tail <= COADJOINT_TAIL, format!("tail {tail:e}"));
    // (T* x)_n = lambda_n x_{n+1} = x_n, checked exactly on squares
    let broken = x
        .coeffs
        .windows(2)
        .enumerate()
        .filter(|(n, w)| {
            let lam = rule.weight(*n as u64).expect("weight");
            match (w[0].square(), w[1].square(), lam.square()) {
                (Some(a), Some(b), Some(l)) => *a != b * l,
                _ => true,
            }
        })
        .count();
    o.require(broken == 0, format!("{broken} coordinates with (T* x)_n != x_n"));
    // x_n = (m_0 / m_n)^(1/2) with m_n = (1 + 4^n) / 2
    let coeff_err = x
        .coeffs
        .iter()
        .enumerate()
        .take(60)
        .map(|(n, c)| {
            let oracle = (2.0 / (1.0 + 4f64.powi(n as i32))).sqrt();
            ((c.to_f64() - oracle) / oracle).abs()
        })
        .fold(0.0, f64::max);
    o.require(coeff_err <= 1e-12, format!("coefficients vs closed form: {coeff_err:e}"));
    let limit_gap = (rule.weight(200).expect("weight").to_f64() - 2.0).abs();
    o.require(limit_gap <= 1e-12, format!("lambda_200 - 2 = {limit_gap:e}"));

    let op = OperatorExpr::<f64>::shift(rule.clone()).expect("shift");
    let split = identity_part_split(&op, 10, &Tolerances::default()).expect("split");
    o.require(matches!(split.kind, SplitKind::Trivial { .. }), "N(I - T) not certified trivial");
    let one = BigRational::one();
    let bad = (0..=100usize)
        .filter(|&n| coadjoint_witness(&rule, &x, n).map_or(true, |w| w.square() != Some(&one)))
        .count();
    o.require(bad == 0, format!("{bad} witness values differ from 1"));
    o.suite(&run_suite(Suite::Pvzxk, &SuiteConfig::default()).expect("pvzxk"));
    o.note(format!("T* x = x exactly, tail {tail:.1e}, truncation residual {residual:.1e}, witness exact for n <= 100"));
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    for lambda_sq in [Rat::new(121, 100), Rat::integer(2), Rat::integer(9)] {
        let c = lambda_sq.to_f64() - 1.0;
        let rule = WeightRule::two_isometry(lambda_sq.clone()).expect("rule");
        // exact product of squared weights against 1 + n (lambda^2 - 1)
        let mut prod = BigRational::one();
        let mut worst = 0.0f64;
        for k in 0..10_000u64 {
            let w = rule.weight(k).expect("weight");
            match w.square() {
                Some(sq) => prod *= sq,
                None => {
                    o.require(false, format!("weight {k} not exact"));
                    break;
                }
            }
            let n = k + 1;
            let lhs = powerseq::scalar::rational_to_f64(&prod);
            worst = worst.max((lhs - (1.0 + n as f64 * c)).abs() / (1.0 + n as f64 * c));
        }
        o.require(worst <= TWO_ISOMETRY_TOL, format!("lambda^2 = {lambda_sq}: product residual {worst:e}"));

        let mut prev_root = f64::INFINITY;
        for n in (1..=10_000u64).step_by(97).chain([10_000]) {
            let pn = shift_power_norm(&rule, n).expect("norm");
            let oracle = (1.0 + n as f64 * c).sqrt();
            let v = pn.value.to_f64();
            o.require(
                ((v - oracle) / oracle).abs() <= TWO_ISOMETRY_TOL && pn.attained_at == Some(0),
                format!("lambda^2 = {lambda_sq}, n = {n}: ||T^n|| = {v} vs {oracle}, attained at {:?}", pn.attained_at),
            );
            let root = v.powf(1.0 / n as f64);
            o.require(
                (1.0..=oracle.powf(1.0 / n as f64) + 1e-15).contains(&root) && root <= prev_root + 1e-15,
                format!("root trace at n = {n}: {root}"),
            );
            prev_root = root;
        }
        o.require(prev_root - 1.0 <= 1e-3, format!("||T^n||^(1/n) at n = 10^4 is {prev_root}"));
        let big = shift_power_norm(&rule, 10_000).expect("norm").value.to_f64();
        o.require(big >= 10.0, format!("||T^10000|| = {big}, not growing"));
    }
    o.note("lambda in {1.1, sqrt 2, 3}, n <= 10^4");
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let leb = CircleMeasure::lebesgue();
    let exact_bad = (-200i64..=200)
        .filter(|&k| {
            let z = fourier_coefficient_in::<BigRational>(&leb, k).expect("exact");
            let want = if k == 0 { BigRational::one() } else { BigRational::from_integer(0.into()) };
            z.re != want || z.im != BigRational::from_integer(0.into())
        })
        .count();
    o.require(exact_bad == 0, format!("{exact_bad} Lebesgue coefficients not exact"));

    let cantor = CircleMeasure::cantor();
    let oracle: f64 = (1..60).map(|m| (2.0 * PI / 3f64.powi(m)).cos().abs()).product();
    let c1 = fourier_coefficient(&cantor, 1).abs();
    o.require((c1 - oracle).abs() <= CANTOR_TOL, format!("|mu^(1)| = {c1} vs cosine product {oracle}"));
    let inv = (0..=12u32)
        .map(|m| (fourier_coefficient(&cantor, 3i64.pow(m)).abs() - c1).abs())
        .fold(0.0, f64::max);
    o.require(inv <= CANTOR_TOL, format!("Cantor invariance defect {inv:e}"));
    o.require(c1 > CANTOR_FLOOR, format!("|mu^(1)| = {c1}"));

    // <U^n 1, 1> on the atom at 1/2 alternates in sign
    let half = CircleMeasure::dirac(Angle::rational(1, 2));
    let alternates = (1..=100i64).all(|n| {
        let v = fourier_coefficient(&half, n).value;
        (v - Complex64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).norm() <= 1e-12
    });
    o.require(alternates, "atom at 1/2 does not alternate");

    let t2 = run_suite(
        Suite::T2,
        &SuiteConfig {
            n_max: Some(2000),
            ..SuiteConfig::default()
        },
    )
    .expect("T2");
    o.suite(&t2);

    // <U^n f, g> for f = g = 1 + z: Lebesgue part vanishes for n >= 2, atom at 1 stays |f(1)|^2
    let f = [(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(1.0, 0.0))];
    let at_one = CircleMeasure::dirac(Angle::rational(0, 1));
    let mut worst = 0.0f64;
    for n in 2..=2000 {
        let a = multiplication_matrix_elements(&leb, n, &f, &f).value.norm();
        let s = multiplication_matrix_elements(&at_one, n, &f, &f).value;
        worst = worst.max(a).max((s - Complex64::new(4.0, 0.0)).norm());
    }
    o.require(worst <= TRACE_TOL, format!("matrix-element traces deviate by {worst:e}"));
    o.note(format!("|mu^(1)| = {c1:.12}, invariance {inv:.1e}, traces to k = 2000"));
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let r = run_suite(
        Suite::Sec5,
        &SuiteConfig {
            trials: Some(500),
            ..SuiteConfig::default()
        },
    )
    .expect("sec5");
    let elapsed = start.elapsed();
    o.suite(&r);
    o.require(elapsed <= SEC5_BUDGET, format!("runtime {elapsed:?}"));
    let m = r.check("moment_identity").and_then(|c| c.worst).unwrap_or(f64::NAN);
    let s = r.check("series_three_way_agreement").and_then(|c| c.worst).unwrap_or(f64::NAN);
    o.note(format!("500 normal matrices, moment {m:.1e}, series {s:.1e}, {elapsed:.2?}"));
    o
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("inflation norm profile", criterion_1),
        ("limit projections of constructed matrices", criterion_2),
        ("idempotents: self-adjoint iff w(P) <= 1", criterion_3),
        ("Berger shift coadjoint eigenvector", criterion_4),
        ("2-isometry norms", criterion_5),
        ("circle measures and unitary verdicts", criterion_6),
        ("normal matrix stability suite", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        let status = if o.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("{status} criterion {}: {name} [{}]", i + 1, o.notes.join("; "));
        for msg in &o.failures {
            println!("       - {msg}");
        }
        if !o.failures.is_empty() {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
