//! Operator expressions and their exact or precision-controlled evaluation.
//!
//! Infinite-dimensional operators are never truncated here: shift matrix
//! elements come from weight products, diagonal ones from entry powers, and
//! multiplication operators from Fourier coefficients.

mod dense;
mod doc;
mod eval;

use num_complex::Complex;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub use dense::DenseMatrix;
pub use doc::OperatorDoc;
pub use eval::{
    adjoint_apply, apply, apply_power, inner, matrix_element_power, power_log_norms, to_dense,
    to_dense_cmat,
};

use crate::circlemeasure::{rational_rotations, CircleMeasure};
use crate::error::{Error, Result};
use crate::linalg::op_norm;
use crate::scalar::{unit_root, Rat, Scalar};
use crate::shiftlab::WeightRule;

/// Finitely supported coefficient vector over the basis `{e_n}`.
pub type Vector<S> = BTreeMap<usize, Complex<S>>;

/// Dense vector as a sparse one, dropping exact zeros.
pub fn vector_from_dense<S: Scalar>(x: &[Complex<S>]) -> Vector<S> {
    x.iter()
        .enumerate()
        .filter(|(_, z)| !(z.re == S::zero() && z.im == S::zero()))
        .map(|(i, z)| (i, z.clone()))
        .collect()
}

/// `e_n`.
pub fn basis_vector<S: Scalar>(n: usize) -> Vector<S> {
    let mut v = Vector::new();
    v.insert(n, Complex::new(S::one(), S::zero()));
    v
}

/// Dimension of the index set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dim {
    Finite(usize),
    Infinite,
}

impl Dim {
    pub fn is_finite(&self) -> bool {
        matches!(self, Dim::Finite(_))
    }
}

/// Diagonal entry `modulus * e^{2 pi i turns}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagEntry {
    pub modulus: Rat,
    #[serde(with = "ratio_turns")]
    pub turns: Ratio<i64>,
}

impl DiagEntry {
    pub fn new(modulus: Rat, turns: Ratio<i64>) -> Self {
        DiagEntry { modulus, turns }
    }

    pub fn real(modulus: Rat) -> Self {
        DiagEntry::new(modulus, Ratio::from_integer(0))
    }

    pub fn unimodular(turns: Ratio<i64>) -> Self {
        DiagEntry::new(Rat::integer(1), turns)
    }

    pub fn value<S: Scalar>(&self) -> Result<Complex<S>> {
        let z = unit_root::<S>(&self.turns)?;
        let m = S::from_rational(&self.modulus.0);
        Ok(Complex::new(z.re * m.clone(), z.im * m))
    }

    /// `d^n` with the angle reduced exactly before rounding.
    pub fn power<S: Scalar>(&self, n: u64) -> Result<Complex<S>> {
        let turns = self.turns * Ratio::from_integer(i64::try_from(n).map_err(|_| Error::InvalidArgument("power too large".into()))?);
        let z = unit_root::<S>(&turns)?;
        let m = if n <= u32::MAX as u64 {
            S::from_rational(&num_traits::pow(self.modulus.0.clone(), n as usize))
        } else {
            S::from_f64_lossy(self.modulus.to_f64().powf(n as f64))
        };
        Ok(Complex::new(z.re * m.clone(), z.im * m))
    }
}

mod ratio_turns {
    use num_rational::Ratio;
    use num_traits::ToPrimitive;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::scalar::{parse_rational, ScalarRepr};

    pub fn serialize<S: Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
        if r.is_integer() {
            (*r.numer() as f64).serialize(s)
        } else {
            format!("{}/{}", r.numer(), r.denom()).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<i64>, D::Error> {
        let text = match ScalarRepr::deserialize(d)? {
            ScalarRepr::Number(x) => format!("{x}"),
            ScalarRepr::Text(t) => t,
        };
        let q = parse_rational(&text).map_err(serde::de::Error::custom)?;
        match (q.numer().to_i64(), q.denom().to_i64()) {
            (Some(n), Some(d)) => Ok(Ratio::new(n, d)),
            _ => Err(serde::de::Error::custom("angle does not fit in i64")),
        }
    }
}

/// Lazily evaluable diagonal sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DiagonalSeq {
    Finite { entries: Vec<DiagEntry> },
    /// `d_n = period[n mod p]` on an infinite index set.
    Periodic { period: Vec<DiagEntry> },
    /// Unimodular entries at the rationals `0, 1/2, 1/3, 2/3, ...`; finite
    /// when `count` is given.
    RationalRotations {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        count: Option<usize>,
    },
}

impl DiagonalSeq {
    pub fn dim(&self) -> Dim {
        match self {
            DiagonalSeq::Finite { entries } => Dim::Finite(entries.len()),
            DiagonalSeq::Periodic { .. } => Dim::Infinite,
            DiagonalSeq::RationalRotations { count } => count.map_or(Dim::Infinite, Dim::Finite),
        }
    }

    pub fn entry(&self, n: usize) -> Result<DiagEntry> {
        if let Dim::Finite(d) = self.dim() {
            if n >= d {
                return Err(Error::IndexOutOfRange { index: n, dim: d });
            }
        }
        Ok(match self {
            DiagonalSeq::Finite { entries } => entries[n].clone(),
            DiagonalSeq::Periodic { period } => period[n % period.len()].clone(),
            DiagonalSeq::RationalRotations { .. } => {
                DiagEntry::unimodular(*rational_rotations(n + 1).last().expect("n + 1 entries"))
            }
        })
    }

    /// `sup_n |d_n|`.
    pub fn sup_modulus(&self) -> f64 {
        match self {
            DiagonalSeq::Finite { entries } | DiagonalSeq::Periodic { period: entries } => {
                entries.iter().map(|e| e.modulus.to_f64()).fold(0.0, f64::max)
            }
            DiagonalSeq::RationalRotations { count: Some(0) } => 0.0,
            DiagonalSeq::RationalRotations { .. } => 1.0,
        }
    }
}

/// Closed algebra of exactly representable operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorDoc<S>", into = "OperatorDoc<S>", bound = "")]
pub enum OperatorExpr<S: Scalar> {
    FiniteMatrix(DenseMatrix<S>),
    WeightedShift(WeightRule),
    Diagonal(DiagonalSeq),
    /// Multiplication by `z` on `L^2(mu)`, spanned by the characters
    /// `z^0, z^1, z^{-1}, z^2, z^{-2}, ...` in that index order.
    MeasureMultiplication(CircleMeasure),
    /// Index routing: a finite summand comes first; two infinite summands interleave
    /// (even indices left, odd right).
    DirectSum(Box<OperatorExpr<S>>, Box<OperatorExpr<S>>),
    /// `S^{-1} T S` for a finite-dimensional `T`.
    Conjugate {
        s: DenseMatrix<S>,
        s_inv: DenseMatrix<S>,
        inner: Box<OperatorExpr<S>>,
    },
}

/// Which summand an index of a direct sum belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    Left,
    Right,
}

impl<S: Scalar> OperatorExpr<S> {
    pub fn finite(m: DenseMatrix<S>) -> Self {
        OperatorExpr::FiniteMatrix(m)
    }

    pub fn shift(rule: WeightRule) -> Result<Self> {
        rule.validate()?;
        Ok(OperatorExpr::WeightedShift(rule))
    }

    pub fn diagonal(seq: DiagonalSeq) -> Result<Self> {
        let op = OperatorExpr::Diagonal(seq);
        op.validate()?;
        Ok(op)
    }

    pub fn multiplication(mu: CircleMeasure) -> Result<Self> {
        mu.validate()?;
        Ok(OperatorExpr::MeasureMultiplication(mu))
    }

    pub fn direct_sum(left: Self, right: Self) -> Self {
        OperatorExpr::DirectSum(Box::new(left), Box::new(right))
    }

    /// `S^{-1} inner S`.
    pub fn conjugate(s: DenseMatrix<S>, inner: Self) -> Result<Self> {
        let s_inv = s.inverse()?;
        let op = OperatorExpr::Conjugate {
            s,
            s_inv,
            inner: Box::new(inner),
        };
        op.validate()?;
        Ok(op)
    }

    pub fn dim(&self) -> Dim {
        match self {
            OperatorExpr::FiniteMatrix(m) => Dim::Finite(m.dim()),
            OperatorExpr::WeightedShift(_) | OperatorExpr::MeasureMultiplication(_) => Dim::Infinite,
            OperatorExpr::Diagonal(d) => d.dim(),
            OperatorExpr::DirectSum(a, b) => match (a.dim(), b.dim()) {
                (Dim::Finite(n), Dim::Finite(m)) => Dim::Finite(n + m),
                _ => Dim::Infinite,
            },
            OperatorExpr::Conjugate { s, .. } => Dim::Finite(s.dim()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorExpr::FiniteMatrix(_) => Ok(()),
            OperatorExpr::WeightedShift(rule) => rule.validate(),
            OperatorExpr::Diagonal(d) => match d {
                DiagonalSeq::Periodic { period } if period.is_empty() => {
                    Err(Error::InvalidOperator("periodic diagonal needs a nonempty period".into()))
                }
                DiagonalSeq::Finite { entries } | DiagonalSeq::Periodic { period: entries } => {
                    match entries.iter().find(|e| e.modulus.0 < num_rational::BigRational::from_integer(0.into())) {
                        Some(e) => Err(Error::InvalidOperator(format!("negative modulus {}", e.modulus))),
                        None => Ok(()),
                    }
                }
                DiagonalSeq::RationalRotations { .. } => Ok(()),
            },
            OperatorExpr::MeasureMultiplication(mu) => mu.validate(),
            OperatorExpr::DirectSum(a, b) => {
                a.validate()?;
                b.validate()
            }
            OperatorExpr::Conjugate { s, s_inv, inner } => {
                inner.validate()?;
                match inner.dim() {
                    Dim::Finite(n) if n == s.dim() => {}
                    Dim::Finite(n) => {
                        return Err(Error::DimensionMismatch {
                            expected: s.dim(),
                            got: n,
                        })
                    }
                    Dim::Infinite => {
                        return Err(Error::InvalidOperator(
                            "conjugation needs a finite-dimensional inner operator".into(),
                        ))
                    }
                }
                let cond = op_norm(&s.to_cmat()) * op_norm(&s_inv.to_cmat());
                if !cond.is_finite() {
                    return Err(Error::InvalidOperator(format!("condition number of S is {cond}")));
                }
                Ok(())
            }
        }
    }

    /// Maps a global index to `(side, local index)` of a direct sum.
    pub(crate) fn route(left: &Self, right: &Self, i: usize) -> (Side, usize) {
        match (left.dim(), right.dim()) {
            (Dim::Finite(n), _) => {
                if i < n {
                    (Side::Left, i)
                } else {
                    (Side::Right, i - n)
                }
            }
            (Dim::Infinite, Dim::Finite(m)) => {
                if i < m {
                    (Side::Right, i)
                } else {
                    (Side::Left, i - m)
                }
            }
            (Dim::Infinite, Dim::Infinite) => {
                if i % 2 == 0 {
                    (Side::Left, i / 2)
                } else {
                    (Side::Right, i / 2)
                }
            }
        }
    }

    pub(crate) fn unroute(left: &Self, right: &Self, side: Side, j: usize) -> usize {
        match (left.dim(), right.dim(), side) {
            (Dim::Finite(_), _, Side::Left) => j,
            (Dim::Finite(n), _, Side::Right) => j + n,
            (Dim::Infinite, Dim::Finite(_), Side::Right) => j,
            (Dim::Infinite, Dim::Finite(m), Side::Left) => j + m,
            (Dim::Infinite, Dim::Infinite, Side::Left) => 2 * j,
            (Dim::Infinite, Dim::Infinite, Side::Right) => 2 * j + 1,
        }
    }
}

/// Arithmetic regime for an evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PrecisionMode {
    ExactRational,
    Float64,
    Extended { bits: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Precision {
    #[serde(flatten)]
    pub mode: PrecisionMode,
    pub tolerance: f64,
}

impl Precision {
    pub fn exact() -> Self {
        Precision {
            mode: PrecisionMode::ExactRational,
            tolerance: 0.0,
        }
    }

    pub fn float64(tolerance: f64) -> Self {
        Precision {
            mode: PrecisionMode::Float64,
            tolerance,
        }
    }

    pub fn extended(bits: u32, tolerance: f64) -> Self {
        Precision {
            mode: PrecisionMode::Extended { bits },
            tolerance,
        }
    }

    /// The natural precision of a scalar field.
    pub fn for_scalar<S: Scalar>() -> Self {
        match S::NAME {
            _ if S::EXACT => Self::exact(),
            "twofloat" => Self::extended(106, 1e-28),
            "f32" => Self::float64(1e-5),
            _ => Self::float64(1e-12),
        }
    }

    /// Checks that the mode can be carried out in the field `S`.
    pub fn check<S: Scalar>(&self) -> Result<()> {
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidPrecision(format!("tolerance {} is negative", self.tolerance)));
        }
        match self.mode {
            PrecisionMode::ExactRational => {
                if !S::EXACT {
                    return Err(Error::InvalidPrecision(format!(
                        "exact mode needs an exact field, got {}",
                        S::NAME
                    )));
                }
            }
            PrecisionMode::Float64 | PrecisionMode::Extended { .. } if self.tolerance <= 0.0 => {
                return Err(Error::InvalidPrecision("non-exact modes need a positive tolerance".into()));
            }
            PrecisionMode::Float64 => {
                if S::EXACT {
                    return Err(Error::InvalidPrecision("float64 mode with an exact field".into()));
                }
            }
            PrecisionMode::Extended { bits } => {
                let available = match S::NAME {
                    "twofloat" => 106,
                    "f64" => 53,
                    "f32" => 24,
                    _ => 0,
                };
                if bits > 106 {
                    return Err(Error::InvalidPrecision(format!("at most 106 bits are supported, got {bits}")));
                }
                if bits > available {
                    return Err(Error::InvalidPrecision(format!(
                        "{bits} bits requested but {} carries {available}",
                        S::NAME
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_exact(&self) -> bool {
        self.mode == PrecisionMode::ExactRational
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use twofloat::TwoFloat;

    #[test]
    fn precision_modes_match_fields() {
        assert!(Precision::exact().check::<BigRational>().is_ok());
        assert!(Precision::exact().check::<f64>().is_err());
        assert!(Precision::float64(1e-12).check::<f64>().is_ok());
        assert!(Precision::float64(0.0).check::<f64>().is_err());
        assert!(Precision::extended(100, 1e-25).check::<TwoFloat>().is_ok());
        assert!(Precision::extended(100, 1e-25).check::<f64>().is_err());
        assert!(Precision::extended(128, 1e-25).check::<TwoFloat>().is_err());
    }

    #[test]
    fn dims_of_sums() {
        let m = OperatorExpr::<f64>::finite(DenseMatrix::identity(3));
        let s = OperatorExpr::<f64>::shift(WeightRule::unweighted()).unwrap();
        assert_eq!(OperatorExpr::direct_sum(m.clone(), m.clone()).dim(), Dim::Finite(6));
        assert_eq!(OperatorExpr::direct_sum(m, s).dim(), Dim::Infinite);
    }

    #[test]
    fn conjugate_needs_finite_inner() {
        let s = DenseMatrix::<f64>::identity(2);
        let shift = OperatorExpr::shift(WeightRule::unweighted()).unwrap();
        assert!(OperatorExpr::conjugate(s.clone(), shift).is_err());
        let inner = OperatorExpr::finite(DenseMatrix::identity(3));
        assert!(matches!(
            OperatorExpr::conjugate(s, inner),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rotation_entries() {
        let d = DiagonalSeq::RationalRotations { count: None };
        assert_eq!(d.entry(3).unwrap().turns, Ratio::new(2, 3));
        let e = DiagEntry::unimodular(Ratio::new(1, 3));
        let z: Complex<f64> = e.power(3).unwrap();
        assert!((z - Complex::new(1.0, 0.0)).norm() < 1e-15);
    }
}
