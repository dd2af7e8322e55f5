//! Rajchman testing: does `mu^(k) -> 0`?

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::measure::{fourier_coefficient, self_similar_coefficient, Angle, CircleMeasure, Coefficient};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RajchmanVerdict {
    RajchmanCertified,
    NotRajchmanCertified,
    EvidenceOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RajchmanReport {
    pub verdict: RajchmanVerdict,
    pub reason: String,
    /// Coefficients along the index sequence supporting the verdict.
    pub witness: Vec<(i64, Coefficient)>,
    /// `|mu^(k)|` for `k = 1..=k_max`, filled for evidence-only verdicts.
    pub trace: Vec<(i64, f64)>,
    /// `max |mu^(k)|` over `k_max/2 < k <= k_max`, for evidence-only verdicts.
    pub tail_max: Option<f64>,
}

impl RajchmanReport {
    /// Certified, or evidence whose tail is below `tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        match self.verdict {
            RajchmanVerdict::RajchmanCertified => true,
            RajchmanVerdict::NotRajchmanCertified => false,
            RajchmanVerdict::EvidenceOnly => self.tail_max.is_some_and(|t| t <= tol),
        }
    }
}

/// Number of terms kept in a witness sequence.
const WITNESS_LEN: u32 = 12;

pub fn rajchman_test(mu: &CircleMeasure, k_max: u64, tol: f64) -> Result<RajchmanReport> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    mu.validate()?;
    let degree = mu.density.as_ref().map_or(0, |d| d.degree()) as i64;
    if mu.has_atoms() {
        return Ok(atomic_witness(mu, k_max, degree));
    }
    if let Some(s) = mu.self_similar.as_ref().filter(|s| s.mass.is_positive()) {
        if s.is_full() {
            return Ok(RajchmanReport {
                verdict: RajchmanVerdict::RajchmanCertified,
                reason: "full digit set: the self-similar part is Lebesgue measure".into(),
                witness: Vec::new(),
                trace: Vec::new(),
                tail_max: None,
            });
        }
        for k0 in 1..=k_max as i64 {
            let c = self_similar_coefficient(s, k0);
            if c.abs() - c.error > tol {
                let mut witness = Vec::new();
                let mut k = k0;
                for _ in 0..WITNESS_LEN {
                    if k > degree {
                        witness.push((k, fourier_coefficient(mu, k)));
                    }
                    match k.checked_mul(s.b as i64) {
                        Some(next) => k = next,
                        None => break,
                    }
                }
                return Ok(RajchmanReport {
                    verdict: RajchmanVerdict::NotRajchmanCertified,
                    reason: format!(
                        "mu^({k0} b^m) = mu^({k0}) for all m past the density degree, |mu^({k0})| >= {:.6}",
                        c.abs() - c.error
                    ),
                    witness,
                    trace: Vec::new(),
                    tail_max: None,
                });
            }
        }
        return Ok(evidence(mu, k_max, "no non-decaying self-similar index found below k_max"));
    }
    Ok(RajchmanReport {
        verdict: RajchmanVerdict::RajchmanCertified,
        reason: format!("trigonometric-polynomial density: mu^(k) = 0 for |k| > {degree}"),
        witness: Vec::new(),
        trace: Vec::new(),
        tail_max: None,
    })
}

fn evidence(mu: &CircleMeasure, k_max: u64, reason: &str) -> RajchmanReport {
    let trace: Vec<(i64, f64)> = (1..=k_max as i64)
        .map(|k| (k, fourier_coefficient(mu, k).abs()))
        .collect();
    let tail_max = trace
        .iter()
        .filter(|(k, _)| *k as u64 > k_max / 2)
        .map(|(_, a)| *a)
        .fold(0.0, f64::max);
    RajchmanReport {
        verdict: RajchmanVerdict::EvidenceOnly,
        reason: reason.into(),
        witness: Vec::new(),
        trace,
        tail_max: Some(tail_max),
    }
}

fn atomic_witness(mu: &CircleMeasure, k_max: u64, degree: i64) -> RajchmanReport {
    let masses: Vec<f64> = mu.atoms.iter().map(|a| a.1.to_f64()).collect();
    let sq: f64 = masses.iter().map(|m| m * m).sum();
    let common = mu.atoms.iter().try_fold(1i64, |acc, a| match a.0 {
        Angle::Rational(r) => {
            let l = acc.lcm(r.denom());
            (l <= 1_000_000_000).then_some(l)
        }
        Angle::Real(_) => None,
    });
    let (witness, detail) = match common {
        Some(l) => {
            // z^k = 1 on every atom when l | k
            let start = degree / l + 1;
            let witness = (start..start + WITNESS_LEN as i64)
                .map(|m| (m * l, fourier_coefficient(mu, m * l)))
                .collect();
            (witness, format!("atomic part equals its mass at every multiple of {l}"))
        }
        None => {
            let k_max = k_max as i64;
            let mean = (1..=k_max)
                .map(|k| fourier_coefficient(mu, k).abs().powi(2))
                .sum::<f64>()
                / k_max as f64;
            let witness = vec![(
                k_max,
                Coefficient {
                    value: num_complex::Complex::new(mean, 0.0),
                    error: 0.0,
                },
            )];
            (witness, format!("Cesaro mean of |mu^(k)|^2 up to {k_max} is {mean:.6}"))
        }
    };
    RajchmanReport {
        verdict: RajchmanVerdict::NotRajchmanCertified,
        reason: format!(
            "positive atomic mass; mean of |mu^(k)|^2 tends to sum of squared masses = {sq:.6}; {detail}"
        ),
        witness,
        trace: Vec::new(),
        tail_max: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circlemeasure::measure::{Density, SelfSimilar};
    use crate::scalar::Rat;
    use std::collections::BTreeMap;

    #[test]
    fn trig_density_is_certified() {
        let mut coeffs = BTreeMap::new();
        for j in 1..=5i64 {
            coeffs.insert(j, super::super::measure::Coeff::Real(Rat::new(1, 20)));
            coeffs.insert(-j, super::super::measure::Coeff::Real(Rat::new(1, 20)));
        }
        let mu = CircleMeasure {
            density: Some(Density {
                coeffs,
                lebesgue: Rat::integer(1),
            }),
            ..Default::default()
        };
        let r = rajchman_test(&mu, 100, 1e-9).unwrap();
        assert_eq!(r.verdict, RajchmanVerdict::RajchmanCertified);
        assert!(r.reason.contains("5"));
    }

    #[test]
    fn cantor_is_not_rajchman() {
        let r = rajchman_test(&CircleMeasure::cantor(), 10, 1e-6).unwrap();
        assert_eq!(r.verdict, RajchmanVerdict::NotRajchmanCertified);
        assert_eq!(r.witness[0].0, 1);
        assert_eq!(r.witness[3].0, 27);
        let first = r.witness[0].1.abs();
        assert!(r.witness.iter().all(|(_, c)| (c.abs() - first).abs() < 1e-12));
    }

    #[test]
    fn quarter_atom_is_periodic() {
        let r = rajchman_test(&CircleMeasure::dirac(Angle::rational(1, 4)), 10, 1e-6).unwrap();
        assert_eq!(r.verdict, RajchmanVerdict::NotRajchmanCertified);
        for (k, c) in &r.witness {
            assert_eq!(k % 4, 0);
            assert!((c.abs() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn irrational_atom_uses_cesaro_mean() {
        let mu = CircleMeasure::dirac(Angle::Real(2f64.sqrt() - 1.0));
        let r = rajchman_test(&mu, 200, 1e-6).unwrap();
        assert_eq!(r.verdict, RajchmanVerdict::NotRajchmanCertified);
        assert!((r.witness[0].1.value.re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn full_digit_set_is_lebesgue() {
        let mu = CircleMeasure {
            self_similar: Some(SelfSimilar {
                b: 4,
                digits: vec![0, 1, 2, 3],
                mass: Rat::integer(1),
            }),
            ..Default::default()
        };
        assert!(fourier_coefficient(&mu, 5).abs() < 1e-15);
        let r = rajchman_test(&mu, 10, 1e-9).unwrap();
        assert_eq!(r.verdict, RajchmanVerdict::RajchmanCertified);
    }
}
