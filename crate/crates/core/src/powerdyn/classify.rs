//! Classification of power sequences `T, T^2, T^3, ...`.

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs, op_norm, CMat};
use crate::opcore::{
    apply, basis_vector, inner, matrix_element_power, power_log_norms, to_dense_cmat, Dim, OperatorExpr,
    Precision, Vector,
};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NormConvergent,
    StrongConvergentEvidence,
    WeakConvergentEvidence,
    PowerBoundedNoLimit,
    UnboundedPowers,
    Undetermined,
}

impl Verdict {
    pub fn is_convergent(self) -> bool {
        matches!(
            self,
            Verdict::NormConvergent | Verdict::StrongConvergentEvidence | Verdict::WeakConvergentEvidence
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Cauchy threshold on successive defects.
    pub cauchy: f64,
    /// Number of consecutive indices the Cauchy threshold must hold for.
    pub stable_run: usize,
    /// `||T^n - P||` at which the limit counts as reached.
    pub limit: f64,
    /// Relative singular-value threshold for rank decisions.
    pub rank: f64,
    /// Subspace comparisons (inclusion and invariance defects).
    pub subspace: f64,
    /// Power norms above this are reported as unbounded.
    pub unbounded: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            cauchy: 1e-9,
            stable_run: 10,
            limit: 1e-8,
            rank: 1e-10,
            subspace: 1e-6,
            unbounded: 1e6,
        }
    }
}

/// Indices examined for an infinite-dimensional operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Full,
    Indices(Vec<usize>),
}

impl Window {
    pub fn range(end: usize) -> Self {
        Window::Indices((0..end).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Limit {
    Dense {
        #[serde(with = "linalg::cmat_serde")]
        matrix: CMat,
    },
    /// `<T^n e_k, e_l>` at row `l`, column `k` for `k, l` in `indices`.
    Window {
        indices: Vec<usize>,
        n: u64,
        #[serde(with = "linalg::cmat_serde")]
        elements: CMat,
    },
}

impl Limit {
    pub fn dense(&self) -> Option<&CMat> {
        match self {
            Limit::Dense { matrix } => Some(matrix),
            Limit::Window { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub verdict: Verdict,
    pub limit: Option<Limit>,
    /// First `n` from which `||T^n - P|| <= limit tolerance` for the rest of the trace.
    pub detected_n: Option<u64>,
    pub reason: String,
    /// Exact statement backing the verdict, when structure allows one.
    pub certificate: Option<String>,
    /// `||T^{n+1} - T^n||`.
    pub norm_defects: Vec<(u64, f64)>,
    /// `max_k ||T^{n+1} e_k - T^n e_k||` over the examined basis vectors.
    pub strong_defects: Vec<(u64, f64)>,
    /// `max_{k,l} |<(T^{n+1} - T^n) e_k, e_l>|`.
    pub weak_defects: Vec<(u64, f64)>,
    /// `||T^n - P||` once a limit is known.
    pub limit_residuals: Vec<(u64, f64)>,
    /// `||T^n||`.
    pub power_norms: Vec<(u64, f64)>,
}

impl ConvergenceReport {
    /// CSV with columns `n,defect` for the named trace.
    pub fn trace_csv(&self, trace: &str) -> Result<String> {
        let rows = match trace {
            "norm" => &self.norm_defects,
            "strong" => &self.strong_defects,
            "weak" => &self.weak_defects,
            "limit" => &self.limit_residuals,
            "power_norm" => &self.power_norms,
            other => return Err(Error::InvalidArgument(format!("unknown trace {other:?}"))),
        };
        let mut out = String::from("n,defect\n");
        for (n, d) in rows {
            out.push_str(&format!("{n},{d:e}\n"));
        }
        Ok(out)
    }

    fn empty(verdict: Verdict, reason: String) -> Self {
        ConvergenceReport {
            verdict,
            limit: None,
            detected_n: None,
            reason,
            certificate: None,
            norm_defects: Vec::new(),
            strong_defects: Vec::new(),
            weak_defects: Vec::new(),
            limit_residuals: Vec::new(),
            power_norms: Vec::new(),
        }
    }
}

/// First index of a run of `run` consecutive entries at most `tol`, provided
/// the run reaches the end of the trace.
fn cauchy_start(trace: &[(u64, f64)], tol: f64, run: usize) -> Option<u64> {
    let tail = trace.iter().rev().take_while(|(_, d)| *d <= tol).count();
    (tail >= run.max(1)).then(|| trace[trace.len() - tail].0)
}

/// Bounded-trend test: the second half never exceeds the first half by a relative margin.
fn looks_bounded(norms: &[(u64, f64)]) -> bool {
    if norms.len() < 2 {
        return false;
    }
    let half = norms.len() / 2;
    let first = norms[..half].iter().map(|x| x.1).fold(0.0, f64::max);
    let second = norms[half..].iter().map(|x| x.1).fold(0.0, f64::max);
    second <= first * (1.0 + 1e-6) + 1e-12
}

fn to_c64<S: Scalar>(z: &Complex<S>) -> Complex64 {
    Complex64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())
}

pub fn classify_power_sequence<S: Scalar>(
    op: &OperatorExpr<S>,
    window: &Window,
    n_max: u64,
    tol: &Tolerances,
) -> Result<ConvergenceReport> {
    if n_max < 2 {
        return Err(Error::InvalidArgument("n_max must be at least 2".into()));
    }
    op.validate()?;
    match op.dim() {
        Dim::Finite(0) => Err(Error::InvalidArgument("window is empty".into())),
        Dim::Finite(_) => classify_dense(&to_dense_cmat(op)?, n_max, tol),
        Dim::Infinite => match window {
            Window::Full => Err(Error::InvalidArgument(
                "an infinite-dimensional operator needs an index window".into(),
            )),
            Window::Indices(ix) if ix.is_empty() => Err(Error::InvalidArgument("window is empty".into())),
            Window::Indices(ix) => classify_structured(op, ix, n_max, tol),
        },
    }
}

/// Dense-path classification of a finite matrix.
pub fn classify_dense(m: &CMat, n_max: u64, tol: &Tolerances) -> Result<ConvergenceReport> {
    let d = m.nrows();
    if d == 0 {
        return Err(Error::InvalidArgument("window is empty".into()));
    }
    let mut report = ConvergenceReport::empty(Verdict::Undetermined, String::new());
    let mut powers = Vec::with_capacity(n_max as usize + 1);
    let mut p = m.clone();
    for n in 1..=n_max {
        let norm = op_norm(&p);
        report.power_norms.push((n, norm));
        if !norm.is_finite() || norm > tol.unbounded {
            report.verdict = Verdict::UnboundedPowers;
            report.reason = format!("||T^{n}|| = {norm:e} exceeds the bound {:e}", tol.unbounded);
            return Ok(report);
        }
        let next = &p * m;
        let diff = &next - &p;
        report.norm_defects.push((n, op_norm(&diff)));
        let col = diff.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
        report.strong_defects.push((n, col));
        report.weak_defects.push((n, max_abs(&diff)));
        powers.push(p);
        p = next;
        if cauchy_start(&report.norm_defects, tol.cauchy, tol.stable_run).is_some() {
            break;
        }
    }
    let Some(start) = cauchy_start(&report.norm_defects, tol.cauchy, tol.stable_run) else {
        if looks_bounded(&report.power_norms) {
            report.verdict = Verdict::PowerBoundedNoLimit;
            report.reason = format!(
                "power norms bounded by {:.6} but ||T^(n+1) - T^n|| does not settle below {:e}",
                report.power_norms.iter().map(|x| x.1).fold(0.0, f64::max),
                tol.cauchy
            );
        } else {
            report.verdict = Verdict::Undetermined;
            report.reason = format!("no Cauchy run and no evident bound within n_max = {n_max}");
        }
        return Ok(report);
    };
    let limit = square_to_limit(&powers[start as usize - 1]);
    for (i, pn) in powers.iter().enumerate() {
        report.limit_residuals.push((i as u64 + 1, op_norm(&(pn - &limit))));
    }
    // keep stepping until the residual itself is below the limit tolerance
    let mut n = powers.len() as u64;
    while n < n_max && report.limit_residuals.last().is_some_and(|x| x.1 > tol.limit) {
        n += 1;
        report.limit_residuals.push((n, op_norm(&(&p - &limit))));
        p = &p * m;
    }
    let tail = report
        .limit_residuals
        .iter()
        .rev()
        .take_while(|(_, r)| *r <= tol.limit)
        .count();
    report.detected_n = (tail > 0).then(|| report.limit_residuals[report.limit_residuals.len() - tail].0);
    report.verdict = Verdict::NormConvergent;
    report.reason = format!(
        "||T^(n+1) - T^n|| <= {:e} for {} consecutive n from {start}; limit by repeated squaring",
        tol.cauchy, tol.stable_run
    );
    report.limit = Some(Limit::Dense { matrix: limit });
    Ok(report)
}

/// `lim P^(2^j)` for `P` close to an idempotent limit.
fn square_to_limit(p: &CMat) -> CMat {
    let mut cur = p.clone();
    let mut last = f64::INFINITY;
    for _ in 0..64 {
        let next = &cur * &cur;
        let step = op_norm(&(&next - &cur));
        cur = next;
        if step <= 1e-15 * (1.0 + op_norm(&cur)) || step >= last {
            break;
        }
        last = step;
    }
    cur
}

fn classify_structured<S: Scalar>(
    op: &OperatorExpr<S>,
    window: &[usize],
    n_max: u64,
    tol: &Tolerances,
) -> Result<ConvergenceReport> {
    let w = window.len();
    let mut report = ConvergenceReport::empty(Verdict::Undetermined, String::new());
    let logs = power_log_norms(op, n_max)?;
    report.power_norms = logs.iter().enumerate().map(|(i, l)| (i as u64 + 1, l.exp())).collect();
    if let Some(&(n, norm)) = report.power_norms.iter().find(|(_, v)| !v.is_finite() || *v > tol.unbounded) {
        report.verdict = Verdict::UnboundedPowers;
        report.reason = format!("||T^{n}|| = {norm:e} exceeds the bound {:e}", tol.unbounded);
        return Ok(report);
    }

    let elements = |n: u64| -> Result<CMat> {
        let mut m = CMat::zeros(w, w);
        for (a, &k) in window.iter().enumerate() {
            for (b, &l) in window.iter().enumerate() {
                m[(b, a)] = to_c64(&matrix_element_power(op, n, k, l)?);
            }
        }
        Ok(m)
    };
    let mut prev = elements(1)?;
    for n in 1..n_max {
        let next = elements(n + 1)?;
        report.weak_defects.push((n, max_abs(&(&next - &prev))));
        prev = next;
    }
    let last_elements = prev;

    report.strong_defects = strong_trace(op, window, n_max).unwrap_or_default();

    let zero_norm_run = report
        .power_norms
        .iter()
        .rev()
        .take_while(|(_, v)| *v <= tol.cauchy)
        .count();
    let window_max = *window.iter().max().expect("window is non-empty");
    if let OperatorExpr::WeightedShift(_) = op {
        report.certificate = Some(format!(
            "<T^n e_k, e_l> = 0 exactly for n > l - k; every element on the window vanishes for n > {window_max}"
        ));
    }
    let limit = Limit::Window {
        indices: window.to_vec(),
        n: n_max,
        elements: last_elements,
    };

    if zero_norm_run >= tol.stable_run {
        report.verdict = Verdict::NormConvergent;
        report.reason = format!("||T^n|| <= {:e} on the last {zero_norm_run} powers", tol.cauchy);
        report.limit = Some(Limit::Window {
            indices: window.to_vec(),
            n: n_max,
            elements: CMat::zeros(w, w),
        });
        return Ok(report);
    }
    if let Some(start) = cauchy_start(&report.strong_defects, tol.cauchy, tol.stable_run) {
        report.verdict = Verdict::StrongConvergentEvidence;
        report.reason = format!("window vectors T^n e_k Cauchy from n = {start} (evidence on {w} indices)");
        report.detected_n = Some(start);
        report.limit = Some(limit);
        return Ok(report);
    }
    if let Some(start) = cauchy_start(&report.weak_defects, tol.cauchy, tol.stable_run) {
        report.verdict = Verdict::WeakConvergentEvidence;
        report.reason = format!("window matrix elements Cauchy from n = {start} (evidence on {w} indices)");
        report.detected_n = Some(start);
        report.limit = Some(limit);
        return Ok(report);
    }
    if looks_bounded(&report.power_norms) {
        report.verdict = Verdict::PowerBoundedNoLimit;
        report.reason = "power norms bounded; window matrix elements do not settle".into();
    } else {
        report.reason = format!("no Cauchy run and no evident bound within n_max = {n_max}");
    }
    Ok(report)
}

/// `max_k ||T^{n+1} e_k - T^n e_k||` over window vectors, when the action is available.
fn strong_trace<S: Scalar>(op: &OperatorExpr<S>, window: &[usize], n_max: u64) -> Result<Vec<(u64, f64)>> {
    let precision = Precision::for_scalar::<S>();
    let mut vs: Vec<Vector<S>> = window.iter().map(|&k| basis_vector::<S>(k)).collect();
    vs = vs.iter().map(|v| apply(op, v, &precision)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..n_max {
        let mut worst = 0.0f64;
        for v in vs.iter_mut() {
            let next = apply(op, v, &precision)?;
            let mut diff = next.clone();
            for (i, z) in v.iter() {
                let e = diff.entry(*i).or_insert_with(|| Complex::new(S::zero(), S::zero()));
                *e = e.clone() - z.clone();
            }
            let sq = to_c64(&inner(op, &diff, &diff)?).re.max(0.0);
            worst = worst.max(sq.sqrt());
            *v = next;
        }
        out.push((n, worst));
    }
    Ok(out)
}
