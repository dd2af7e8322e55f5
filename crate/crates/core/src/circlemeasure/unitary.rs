//! Unitaries `U = U_a (+) U_sc (+) U_sd` given by multiplication by `z` on
//! `L^2` of circle measures.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::measure::{multiplication_matrix_elements, Angle, CircleMeasure, Coefficient};
use super::rajchman::{rajchman_test, RajchmanReport};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    A,
    Sc,
    Sd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub angle: Angle,
    #[serde(default = "one")]
    pub multiplicity: u32,
}

fn one() -> u32 {
    1
}

/// A spectral component given by a measure or, for `sd`, by eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentBody {
    Measure { measure: CircleMeasure },
    Eigenvalues { eigenvalues: Vec<Eigenvalue> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub role: Role,
    #[serde(flatten)]
    pub body: ComponentBody,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UnitaryModel {
    pub components: Vec<Component>,
}

impl UnitaryModel {
    pub fn push_measure(mut self, role: Role, measure: CircleMeasure) -> Self {
        self.components.push(Component {
            role,
            body: ComponentBody::Measure { measure },
        });
        self
    }

    pub fn push_eigenvalues(mut self, angles: impl IntoIterator<Item = Angle>) -> Self {
        self.components.push(Component {
            role: Role::Sd,
            body: ComponentBody::Eigenvalues {
                eigenvalues: angles
                    .into_iter()
                    .map(|angle| Eigenvalue { angle, multiplicity: 1 })
                    .collect(),
            },
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.components.iter().enumerate() {
            let bad = |what: &str| Err(Error::RoleMismatch(format!("component {i} ({:?}): {what}", c.role)));
            match (&c.body, c.role) {
                (ComponentBody::Eigenvalues { .. }, Role::Sd) => {}
                (ComponentBody::Eigenvalues { .. }, _) => return bad("eigenvalue lists are sd only"),
                (ComponentBody::Measure { measure }, role) => {
                    measure.validate()?;
                    match role {
                        Role::A if measure.has_atoms() || measure.has_self_similar() => {
                            return bad("a-part must be density-only")
                        }
                        Role::Sc if measure.has_atoms() || measure.has_density() => {
                            return bad("sc-part must have no atoms and no density")
                        }
                        Role::Sc if measure.self_similar.as_ref().is_some_and(|s| s.is_full()) => {
                            return bad("a full digit set is absolutely continuous")
                        }
                        Role::Sd if measure.has_density() || measure.has_self_similar() => {
                            return bad("sd-part must be atoms-only")
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentVerdict {
    pub index: usize,
    pub role: Role,
    pub weakly_convergent: bool,
    pub weakly_stable: bool,
    /// The block is the identity (sd atoms all at angle 0).
    pub identity: bool,
    /// The decision rests on exact structure rather than a finite trace.
    pub certified: bool,
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rajchman: Option<RajchmanReport>,
}

/// Weak limit of `U^n`: the orthogonal projection onto the listed blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitDescription {
    pub identity_on: Vec<usize>,
    pub zero_on: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryVerdict {
    pub weakly_convergent: bool,
    pub weakly_stable: bool,
    pub certified: bool,
    pub limit: Option<LimitDescription>,
    pub components: Vec<ComponentVerdict>,
}

/// Weak convergence of `U^n` from the spectral decomposition.
pub fn unitary_power_verdict(model: &UnitaryModel, k_max: u64, tol: f64) -> Result<UnitaryVerdict> {
    model.validate()?;
    let mut components = Vec::new();
    for (index, c) in model.components.iter().enumerate() {
        let v = match (&c.body, c.role) {
            (ComponentBody::Measure { .. }, Role::A) => ComponentVerdict {
                index,
                role: Role::A,
                weakly_convergent: true,
                weakly_stable: true,
                identity: false,
                certified: true,
                reason: "absolutely continuous: coefficients vanish past the density degree".into(),
                rajchman: None,
            },
            (ComponentBody::Measure { measure }, Role::Sc) => {
                let r = rajchman_test(measure, k_max, tol)?;
                let positive = r.is_positive(tol);
                let certified = r.verdict != super::rajchman::RajchmanVerdict::EvidenceOnly;
                ComponentVerdict {
                    index,
                    role: Role::Sc,
                    weakly_convergent: positive,
                    weakly_stable: positive,
                    identity: false,
                    certified,
                    reason: r.reason.clone(),
                    rajchman: Some(r),
                }
            }
            (body, _) => {
                let angles: Vec<Angle> = match body {
                    ComponentBody::Measure { measure } => measure.atoms.iter().map(|a| a.0).collect(),
                    ComponentBody::Eigenvalues { eigenvalues } => {
                        eigenvalues.iter().filter(|e| e.multiplicity > 0).map(|e| e.angle).collect()
                    }
                };
                let offender = angles.iter().find(|a| !a.is_zero());
                let empty = angles.is_empty();
                ComponentVerdict {
                    index,
                    role: Role::Sd,
                    weakly_convergent: offender.is_none(),
                    weakly_stable: empty,
                    identity: offender.is_none() && !empty,
                    certified: true,
                    reason: match offender {
                        Some(a) => format!("eigenvalue at angle {} != 0 rotates forever", a.turns()),
                        None if empty => "empty block".into(),
                        None => "all atoms at angle 0: the block is the identity".into(),
                    },
                    rajchman: None,
                }
            }
        };
        components.push(v);
    }
    let weakly_convergent = components.iter().all(|c| c.weakly_convergent);
    let weakly_stable = weakly_convergent && components.iter().all(|c| c.weakly_stable);
    let certified = components.iter().all(|c| c.certified);
    let limit = weakly_convergent.then(|| LimitDescription {
        identity_on: components.iter().filter(|c| c.identity).map(|c| c.index).collect(),
        zero_on: components.iter().filter(|c| !c.identity).map(|c| c.index).collect(),
    });
    Ok(UnitaryVerdict {
        weakly_convergent,
        weakly_stable,
        certified,
        limit,
        components,
    })
}

/// `<U^n 1, 1>` on one measure component for `n = 0..=n_max`.
pub fn component_trace(model: &UnitaryModel, index: usize, n_max: i64) -> Result<Vec<Coefficient>> {
    let c = model.components.get(index).ok_or(Error::IndexOutOfRange {
        index,
        dim: model.components.len(),
    })?;
    let measure = match &c.body {
        ComponentBody::Measure { measure } => measure.clone(),
        ComponentBody::Eigenvalues { eigenvalues } => CircleMeasure {
            atoms: eigenvalues
                .iter()
                .map(|e| super::measure::Atom(e.angle, crate::scalar::Rat::integer(e.multiplicity as i64)))
                .collect(),
            ..Default::default()
        },
    };
    let one = [(0i64, num_complex::Complex::new(1.0, 0.0))];
    Ok((0..=n_max)
        .map(|n| multiplication_matrix_elements(&measure, n, &one, &one))
        .collect())
}

/// The rationals of `[0, 1)` ordered by denominator: `0, 1/2, 1/3, 2/3, 1/4, 3/4, ...`.
pub fn rational_rotations(count: usize) -> Vec<Ratio<i64>> {
    let mut out = Vec::with_capacity(count);
    let mut q = 1i64;
    while out.len() < count {
        for p in 0..q {
            if out.len() == count {
                break;
            }
            if p.gcd(&q) == 1 {
                out.push(Ratio::new(p, q));
            }
        }
        q += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;

    #[test]
    fn rational_enumeration() {
        let r = rational_rotations(6);
        let want = [(0, 1), (1, 2), (1, 3), (2, 3), (1, 4), (3, 4)];
        for (got, (p, q)) in r.iter().zip(want) {
            assert_eq!(*got, Ratio::new(p, q));
        }
    }

    #[test]
    fn lebesgue_is_weakly_stable() {
        let m = UnitaryModel::default().push_measure(Role::A, CircleMeasure::lebesgue());
        let v = unitary_power_verdict(&m, 100, 1e-9).unwrap();
        assert!(v.weakly_stable && v.weakly_convergent && v.certified);
    }

    #[test]
    fn dense_rotations_do_not_converge() {
        let m = UnitaryModel::default()
            .push_eigenvalues(rational_rotations(50).into_iter().map(Angle::Rational));
        let v = unitary_power_verdict(&m, 100, 1e-9).unwrap();
        assert!(!v.weakly_convergent);
        assert!(v.limit.is_none());
    }

    #[test]
    fn identity_block_is_the_limit() {
        let sd = CircleMeasure {
            atoms: vec![super::super::measure::Atom(Angle::rational(0, 1), Rat::integer(3))],
            ..Default::default()
        };
        let m = UnitaryModel::default()
            .push_measure(Role::A, CircleMeasure::lebesgue())
            .push_measure(Role::Sd, sd);
        let v = unitary_power_verdict(&m, 100, 1e-9).unwrap();
        assert!(v.weakly_convergent && !v.weakly_stable);
        let limit = v.limit.unwrap();
        assert_eq!(limit.identity_on, vec![1]);
        assert_eq!(limit.zero_on, vec![0]);
        let t = component_trace(&m, 1, 20).unwrap();
        assert!(t.iter().all(|c| (c.value.re - 3.0).abs() < 1e-15));
    }

    #[test]
    fn cantor_sc_part_blocks_convergence() {
        let m = UnitaryModel::default().push_measure(Role::Sc, CircleMeasure::cantor());
        let v = unitary_power_verdict(&m, 100, 1e-9).unwrap();
        assert!(!v.weakly_convergent);
    }

    #[test]
    fn role_mismatch_is_rejected() {
        let m = UnitaryModel::default().push_measure(Role::A, CircleMeasure::cantor());
        assert!(matches!(unitary_power_verdict(&m, 10, 1e-9), Err(Error::RoleMismatch(_))));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"components": [
            {"role": "a", "measure": {"density": {"lebesgue": 1}}},
            {"role": "sd", "eigenvalues": [{"angle": 0, "multiplicity": 2}, {"angle": "1/3"}]}
        ]}"#;
        let m: UnitaryModel = serde_json::from_str(text).unwrap();
        assert_eq!(m.components.len(), 2);
        let back: UnitaryModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
