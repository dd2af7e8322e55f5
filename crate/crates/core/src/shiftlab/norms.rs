//! Power norms `||T^k|| = sup_n lambda_n ... lambda_{n+k-1}` of weighted shifts,
//! inflation norm profiles and spectral-radius traces.

use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::inflation::{InflationLayout, InflationParams, Regime};
use super::weights::{two_isometry_norm_sq, Direction, WeightRule};
use crate::error::{Error, Result};
use crate::scalar::PosReal;

/// `||T^k||` together with an index `n` where the supremum is attained.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerNorm {
    pub value: PosReal,
    /// `None` when the supremum is only approached as `n -> inf`.
    pub attained_at: Option<u64>,
}

impl PowerNorm {
    pub fn log(&self) -> f64 {
        self.value.ln()
    }
}

/// Exact `||T^k||` for a weighted shift.
pub fn shift_power_norm(rule: &WeightRule, k: u64) -> Result<PowerNorm> {
    if k == 0 {
        return Ok(PowerNorm {
            value: PosReal::one(),
            attained_at: Some(0),
        });
    }
    match rule {
        WeightRule::ExplicitThenConstant { prefix, .. } => {
            // every window starting at or after the prefix is tail^k
            let mut best: Option<(PosReal, u64)> = None;
            for n in 0..=prefix.len() as u64 {
                let p = rule.product(n, k)?;
                if best.as_ref().is_none_or(|(b, _)| p.cmp_value(b).is_gt()) {
                    best = Some((p, n));
                }
            }
            let (value, n) = best.expect("scan is non-empty");
            Ok(PowerNorm {
                value,
                attained_at: Some(n),
            })
        }
        WeightRule::MonotoneToLimit {
            formula,
            limit,
            direction,
        } => match direction {
            Direction::Increasing => {
                let first = rule.product(0, k)?;
                let lim = PosReal::Log(limit.ln()).powu(k);
                // constant sequences attain the limit immediately
                let attained = (formula.weight(0)?.to_f64() == *limit).then_some(0);
                Ok(PowerNorm {
                    value: if attained.is_some() { first } else { lim },
                    attained_at: attained,
                })
            }
            Direction::Decreasing => Ok(PowerNorm {
                value: rule.product(0, k)?,
                attained_at: Some(0),
            }),
        },
        WeightRule::Inflation(params) => inflation_power_norm(params, k),
        WeightRule::TwoIsometry { lambda_sq } => {
            // (1 + (n+k)c)/(1 + nc) decreases in n
            Ok(PowerNorm {
                value: PosReal::from_square(two_isometry_norm_sq(lambda_sq, k))?,
                attained_at: Some(0),
            })
        }
        WeightRule::Berger(m) => {
            // m_{n+k}/m_n increases in n towards (sup supp)^k
            if m.is_point_mass() {
                return Ok(PowerNorm {
                    value: rule.product(0, k)?,
                    attained_at: Some(0),
                });
            }
            let sup = m.support_sup();
            if k > u32::MAX as u64 {
                return Err(Error::InvalidArgument(format!("power {k} too large")));
            }
            Ok(PowerNorm {
                value: PosReal::from_square(num_traits::pow(sup, k as usize))?,
                attained_at: None,
            })
        }
    }
}

fn inflation_power_norm(params: &InflationParams, k: u64) -> Result<PowerNorm> {
    let layout = InflationLayout::covering(params, k)?;
    let (e, regime, j) = layout.power_norm_exponent(k)?;
    let log = layout.log_of(&e);
    let segs = layout.segments();
    let seg = &segs[j - 1];
    let mut candidates = vec![seg.start];
    if regime == Regime::Plateau {
        candidates.insert(0, segs[j].start);
    } else if let Some(n) = (seg.start + seg.t - 1).checked_sub(k) {
        // ends just before the closing q_j^{-s_j}
        candidates.push(n);
    }
    candidates.push(0);
    let attained_at = candidates.into_iter().chain(0..seg.start + seg.t).find(|&n| {
        layout
            .window_exponents(n, k)
            .map(|w| (layout.log_of(&w) - log).abs() < 1e-12)
            .unwrap_or(false)
    });
    Ok(PowerNorm {
        value: if e.is_trivial() {
            PosReal::one()
        } else {
            PosReal::Log(log)
        },
        attained_at,
    })
}

/// One row of a norm profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub n: u64,
    pub log_norm: f64,
    pub regime: Regime,
    pub j: usize,
}

/// Segment data reported with a profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentBounds {
    pub j: usize,
    pub m: u64,
    pub l: u64,
    pub t: u64,
    pub x: u64,
    pub s: u64,
    /// `log q_j`.
    pub log_q: f64,
}

/// `||T^n||` for `1 <= n <= n_max` of an inflation shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormProfile {
    pub entries: Vec<ProfileEntry>,
    pub segments: Vec<SegmentBounds>,
    /// Minimum log-norm over plateau samples.
    pub liminf_est: f64,
    /// Maximum log-norm over peak samples.
    pub limsup_est: f64,
}

impl NormProfile {
    /// Distinct plateau log-values in order of appearance, one per segment.
    pub fn plateau_values(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for e in self.entries.iter().filter(|e| e.regime == Regime::Plateau) {
            if out.last().is_none_or(|&(j, _)| j != e.j) {
                out.push((e.j, e.log_norm));
            }
        }
        out
    }

    /// Running minimum over plateau samples, sampled at each plateau entry.
    pub fn plateau_running_min(&self) -> Vec<(u64, f64)> {
        let mut cur = f64::INFINITY;
        self.entries
            .iter()
            .filter(|e| e.regime == Regime::Plateau)
            .map(|e| {
                cur = cur.min(e.log_norm);
                (e.n, cur)
            })
            .collect()
    }

    pub fn peak_values(&self) -> impl Iterator<Item = &ProfileEntry> {
        self.entries.iter().filter(|e| e.regime == Regime::Peak)
    }

    /// CSV with columns `n,log_norm,regime,j`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,log_norm,regime,j\n");
        for e in &self.entries {
            out.push_str(&format!("{},{:e},{},{}\n", e.n, e.log_norm, e.regime.as_str(), e.j));
        }
        out
    }
}

/// Norm profile from the piecewise closed form.
pub fn inflation_norm_profile(params: &InflationParams, n_max: u64) -> Result<NormProfile> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let layout = InflationLayout::covering(params, n_max)?;
    let entries: Vec<ProfileEntry> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let (e, regime, j) = layout.power_norm_exponent(n)?;
            Ok(ProfileEntry {
                n,
                log_norm: layout.log_of(&e),
                regime,
                j,
            })
        })
        .collect::<Result<_>>()?;
    let liminf_est = entries
        .iter()
        .filter(|e| e.regime == Regime::Plateau)
        .map(|e| e.log_norm)
        .fold(f64::INFINITY, f64::min);
    let limsup_est = entries
        .iter()
        .filter(|e| e.regime == Regime::Peak)
        .map(|e| e.log_norm)
        .fold(f64::NEG_INFINITY, f64::max);
    let segments = layout
        .segments()
        .iter()
        .map(|s| SegmentBounds {
            j: s.j,
            m: s.m,
            l: s.l,
            t: s.t,
            x: s.x,
            s: s.s,
            log_q: s.eps,
        })
        .collect();
    Ok(NormProfile {
        entries,
        segments,
        liminf_est,
        limsup_est,
    })
}

/// `inf_{n <= n_max} ||T^n||^{1/n}` together with the full trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub estimate: f64,
    /// `||T^n||^{1/n}` for `n = 1, ..., n_max`.
    pub trace: Vec<f64>,
}

impl RadiusEstimate {
    pub fn from_log_norms(log_norms: &[f64]) -> Self {
        let trace: Vec<f64> = log_norms
            .iter()
            .enumerate()
            .map(|(i, &l)| (l / (i + 1) as f64).exp())
            .collect();
        let estimate = trace.iter().copied().fold(f64::INFINITY, f64::min);
        RadiusEstimate { estimate, trace }
    }
}

/// Log-norms `log ||T^n||`, `n = 1..=n_max`, of a weighted shift.
pub fn shift_log_norms(rule: &WeightRule, n_max: u64) -> Result<Vec<f64>> {
    if let WeightRule::Inflation(p) = rule {
        return Ok(inflation_norm_profile(p, n_max)?
            .entries
            .into_iter()
            .map(|e| e.log_norm)
            .collect());
    }
    (1..=n_max)
        .into_par_iter()
        .map(|n| shift_power_norm(rule, n).map(|p| p.log()))
        .collect()
}

/// Tail behaviour of the co-adjoint eigenvector candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailVerdict {
    InL2,
    NotInL2,
    Undetermined,
}

/// Candidate solution of `T* x = x` with `x_0 = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoadjointEigenvector {
    /// `x_n = 1 / (lambda_0 ... lambda_{n-1})` for `n < cutoff`.
    pub coeffs: Vec<PosReal>,
    pub partial_norm_sq: f64,
    /// Bound on `||x_{>= cutoff}||` when the tail is certified.
    pub tail_norm_bound: Option<f64>,
    /// Bound on `||T* x_trunc - x_trunc||` where `x_trunc` is the stored prefix.
    pub residual_bound: Option<f64>,
    pub verdict: TailVerdict,
    pub reason: String,
}

impl CoadjointEigenvector {
    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(PosReal::to_f64).collect()
    }
}

/// Largest index scanned while waiting for monotone weights to exceed 1.
const MONOTONE_SCAN_CAP: u64 = 1_000_000;

/// Solves `T* x = x` formally and decides whether the solution lies in `l^2`.
pub fn coadjoint_unit_eigenvector(rule: &WeightRule, cutoff: usize) -> Result<CoadjointEigenvector> {
    if cutoff == 0 {
        return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
    }
    rule.validate()?;
    let weights = rule.weights(cutoff)?;
    let mut coeffs = Vec::with_capacity(cutoff);
    let mut x = PosReal::one();
    for w in &weights {
        coeffs.push(x.clone());
        x = x.mul(&w.recip());
    }
    // x now holds x_cutoff
    let partial_norm_sq: f64 = coeffs.iter().map(|c| (2.0 * c.ln()).exp()).sum();
    let sup = rule.sup_weight()?;
    let mut out = CoadjointEigenvector {
        coeffs,
        partial_norm_sq,
        tail_norm_bound: None,
        residual_bound: None,
        verdict: TailVerdict::Undetermined,
        reason: String::new(),
    };
    let not_l2 = |out: &mut CoadjointEigenvector, why: &str| {
        out.verdict = TailVerdict::NotInL2;
        out.reason = why.to_string();
    };
    let n0 = cutoff as u64;
    match rule {
        WeightRule::ExplicitThenConstant { prefix, tail } => {
            let c = tail.to_f64();
            if c <= 1.0 {
                not_l2(&mut out, "tail weight <= 1: coefficients eventually nondecreasing");
            } else {
                let p = prefix.len() as u64;
                let (head, from) = tail_head(rule, &x, n0, p.max(n0))?;
                let sq = head + (2.0 * from.ln()).exp() / (1.0 - c.powi(-2));
                certify(&mut out, sq, sup, &format!("weights equal {c} > 1 from index {}", p.max(n0)));
            }
        }
        WeightRule::MonotoneToLimit {
            formula,
            limit,
            direction,
        } => match direction {
            Direction::Increasing if *limit <= 1.0 => {
                not_l2(&mut out, "increasing weights with limit <= 1");
            }
            Direction::Increasing => {
                let mut n1 = n0;
                while formula.weight(n1)?.to_f64() <= 1.0 {
                    n1 += 1;
                    if n1 > MONOTONE_SCAN_CAP {
                        out.reason = "weights stay <= 1 over the scan".into();
                        return Ok(out);
                    }
                }
                let lmin = formula.weight(n1)?.to_f64();
                let (head, from) = tail_head(rule, &x, n0, n1)?;
                let sq = head + (2.0 * from.ln()).exp() / (1.0 - lmin.powi(-2));
                certify(&mut out, sq, sup, &format!("increasing weights exceed {lmin} from index {n1}"));
            }
            Direction::Decreasing if *limit > 1.0 => {
                let sq = (2.0 * x.ln()).exp() / (1.0 - limit.powi(-2));
                certify(&mut out, sq, sup, &format!("decreasing weights stay above {limit}"));
            }
            Direction::Decreasing if *limit < 1.0 => {
                not_l2(&mut out, "decreasing weights eventually below 1");
            }
            Direction::Decreasing => {
                out.reason = "decreasing weights with limit 1: tail not certified".into();
            }
        },
        WeightRule::Inflation(_) => {
            not_l2(&mut out, "x_n = 1 at every segment end: full segment products equal 1");
        }
        WeightRule::TwoIsometry { .. } => {
            not_l2(&mut out, "x_n^2 = 1/(1 + n(lambda^2 - 1)) is not summable");
        }
        WeightRule::Berger(m) => {
            let sup_t = m.support_sup();
            if sup_t <= BigRational::one() {
                not_l2(&mut out, "weights increase to sqrt(sup supp) <= 1");
            } else {
                let lmin_sq = m.moment(n0 + 1) / m.moment(n0);
                let mut n1 = n0;
                let mut lsq = lmin_sq;
                while lsq <= BigRational::one() {
                    n1 += 1;
                    lsq = m.moment(n1 + 1) / m.moment(n1);
                    if n1 > MONOTONE_SCAN_CAP {
                        out.reason = "weights stay <= 1 over the scan".into();
                        return Ok(out);
                    }
                }
                let lmin = crate::scalar::rational_to_f64(&lsq).sqrt();
                let (head, from) = tail_head(rule, &x, n0, n1)?;
                let sq = head + (2.0 * from.ln()).exp() / (1.0 - lmin.powi(-2));
                certify(&mut out, sq, sup, &format!("Berger weights exceed {lmin} from index {n1}"));
            }
        }
    }
    Ok(out)
}

/// Sum of `x_n^2` for `from <= n < to` and the value `x_to`.
fn tail_head(rule: &WeightRule, x_from: &PosReal, from: u64, to: u64) -> Result<(f64, PosReal)> {
    let mut x = x_from.clone();
    let mut sum = 0.0;
    for n in from..to {
        sum += (2.0 * x.ln()).exp();
        x = x.mul(&rule.weight(n)?.recip());
    }
    Ok((sum, x))
}

fn certify(out: &mut CoadjointEigenvector, tail_sq: f64, sup: f64, why: &str) {
    let tail = tail_sq.sqrt();
    out.tail_norm_bound = Some(tail);
    // the truncation defect is x_{N-1} = lambda_{N-1} x_N <= ||T|| ||x_{>=N}||
    out.residual_bound = Some((sup + 1.0) * tail);
    out.verdict = TailVerdict::InL2;
    out.reason = why.to_string();
}

/// `<T^n e_0, x>` for the co-adjoint candidate, i.e. `(lambda_0...lambda_{n-1}) x_n`.
pub fn coadjoint_witness(rule: &WeightRule, x: &CoadjointEigenvector, n: usize) -> Result<PosReal> {
    let xn = x.coeffs.get(n).ok_or(Error::IndexOutOfRange {
        index: n,
        dim: x.coeffs.len(),
    })?;
    Ok(rule.product(0, n as u64)?.mul(xn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;
    use crate::shiftlab::inflation::Theta;
    use crate::shiftlab::weights::{BergerMoments, WeightFormula};

    fn brute_log_norm(logs: &[f64], k: usize) -> f64 {
        let mut prefix = vec![0.0];
        for l in logs {
            prefix.push(prefix.last().unwrap() + l);
        }
        (0..=logs.len() - k)
            .map(|n| prefix[n + k] - prefix[n])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn inflation_norms_match_sliding_window() {
        for theta in [Theta::Finite(2.0), Theta::Finite(5.0), Theta::Infinite] {
            let p = InflationParams::new(3, theta);
            let horizon = (InflationLayout::covering(&p, 3000).unwrap().horizon() as usize).min(20_000);
            let logs: Vec<f64> = inflation_weights_log(&p, horizon);
            for k in 1..=500u64 {
                let got = shift_power_norm(&WeightRule::Inflation(p.clone()), k).unwrap();
                let want = brute_log_norm(&logs, k as usize);
                assert!((got.log() - want).abs() < 1e-12, "theta {theta:?} k {k}: {} vs {want}", got.log());
                let n = got.attained_at.unwrap_or_else(|| panic!("theta {theta:?} k {k} not attained"));
                let direct: f64 = logs[n as usize..(n + k) as usize].iter().sum();
                assert!((direct - want).abs() < 1e-12, "k {k} attained at {n}");
            }
        }
    }

    fn inflation_weights_log(p: &InflationParams, count: usize) -> Vec<f64> {
        super::super::weights::inflation_weights(p, count)
            .unwrap()
            .iter()
            .map(PosReal::ln)
            .collect()
    }

    #[test]
    fn profile_regimes_and_estimators() {
        let p = InflationParams::new(3, Theta::Finite(2.0));
        let prof = inflation_norm_profile(&p, 5000).unwrap();
        assert_eq!(prof.entries.len(), 5000);
        for e in prof.peak_values() {
            assert!((e.log_norm - 2f64.ln()).abs() < 1e-10);
        }
        let plateaus = prof.plateau_values();
        assert_eq!(plateaus.len(), 3);
        for w in plateaus.windows(2) {
            assert!(w[1].1 < w[0].1);
        }
        assert!((prof.liminf_est - 2f64.ln() / 6.0).abs() < 1e-12);
        assert!((prof.limsup_est - 2f64.ln()).abs() < 1e-12);
        assert!(prof.to_csv().starts_with("n,log_norm,regime,j\n1,"));
    }

    #[test]
    fn infinite_theta_peaks_grow() {
        let p = InflationParams::new(3, Theta::Infinite);
        let prof = inflation_norm_profile(&p, 20_000).unwrap();
        let mut last = 0.0;
        for seg in &prof.segments[..3] {
            let peak = prof.entries[(seg.m - 2) as usize].log_norm;
            assert!((peak - (seg.s as f64).sqrt()).abs() < 1e-12);
            assert!(peak > last);
            last = peak;
        }
    }

    #[test]
    fn monotone_and_constant_norms() {
        let one = shift_power_norm(&WeightRule::unweighted(), 7).unwrap();
        assert!(one.value.is_exactly_one());
        let f = WeightFormula::Rational {
            a: Rat::integer(2),
            b: Rat::integer(1),
            c: Rat::integer(1),
            d: Rat::integer(1),
        };
        let rule = WeightRule::monotone(f).unwrap();
        let pn = shift_power_norm(&rule, 5).unwrap();
        assert!((pn.log() - 5.0 * 2f64.ln()).abs() < 1e-14);
        assert_eq!(pn.attained_at, None);
        let est = RadiusEstimate::from_log_norms(&shift_log_norms(&rule, 50).unwrap());
        assert!((est.estimate - 2.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_prefix_scan() {
        let rule = WeightRule::ExplicitThenConstant {
            prefix: vec![Rat::integer(1), Rat::integer(5), Rat::new(1, 5)],
            tail: Rat::integer(2),
        };
        let p1 = shift_power_norm(&rule, 1).unwrap();
        assert_eq!(p1.value.square().unwrap(), &BigRational::from_integer(25.into()));
        assert_eq!(p1.attained_at, Some(1));
        let p3 = shift_power_norm(&rule, 3).unwrap();
        assert_eq!(p3.value.square().unwrap(), &BigRational::from_integer(64.into()));
    }

    #[test]
    fn coadjoint_geometric_case() {
        let rule = WeightRule::constant(Rat::integer(2));
        let x = coadjoint_unit_eigenvector(&rule, 60).unwrap();
        assert_eq!(x.verdict, TailVerdict::InL2);
        let total = x.partial_norm_sq + x.tail_norm_bound.unwrap().powi(2);
        assert!((total - 4.0 / 3.0).abs() < 1e-14);
        let unweighted = coadjoint_unit_eigenvector(&WeightRule::unweighted(), 10).unwrap();
        assert_eq!(unweighted.verdict, TailVerdict::NotInL2);
        for n in 0..10 {
            assert!(coadjoint_witness(&rule, &x, n).unwrap().is_exactly_one());
        }
    }

    #[test]
    fn coadjoint_berger_and_harmonic_cases() {
        let rule = WeightRule::berger(BergerMoments::two_point(Rat::integer(1))).unwrap();
        let x = coadjoint_unit_eigenvector(&rule, 200).unwrap();
        assert_eq!(x.verdict, TailVerdict::InL2);
        assert!(x.residual_bound.unwrap() < 1e-10);
        let bergman = WeightRule::berger(BergerMoments::uniform_unit()).unwrap();
        assert_eq!(coadjoint_unit_eigenvector(&bergman, 20).unwrap().verdict, TailVerdict::NotInL2);
        let two = WeightRule::two_isometry(Rat::integer(2)).unwrap();
        assert_eq!(coadjoint_unit_eigenvector(&two, 20).unwrap().verdict, TailVerdict::NotInL2);
    }
}
