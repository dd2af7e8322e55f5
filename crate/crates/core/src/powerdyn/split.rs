//! Identity-part split `T = I (+) L` along `N(I - T)`.

use serde::{Deserialize, Serialize};

use super::{classify_dense, kernels, Tolerances, Verdict};
use crate::error::{Error, Result};
use crate::linalg::{self, complement, range_basis, CMat};
use crate::opcore::{to_dense_cmat, DiagonalSeq, Dim, OperatorExpr};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SplitKind {
    Finite {
        /// Orthonormal basis of `N(I - T)`.
        #[serde(with = "linalg::cmat_serde")]
        h1: CMat,
        /// Orthonormal basis of the complement carrying `L`.
        #[serde(with = "linalg::cmat_serde")]
        h2: CMat,
        /// `L` in the `h2` basis.
        #[serde(with = "linalg::cmat_serde")]
        l: CMat,
    },
    /// `N(I - T) = {0}`, so `L = T` on the whole space.
    Trivial { certificate: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub kind: SplitKind,
    /// `h2` is the orthogonal complement of `h1`.
    pub orthogonal: bool,
}

impl SplitResult {
    /// `||(I - L) v||` minimum over unit `v`, i.e. the smallest singular value of `I - L`.
    pub fn l_fixed_gap(&self) -> Option<f64> {
        match &self.kind {
            SplitKind::Finite { l, .. } if l.nrows() > 0 => {
                let d = CMat::identity(l.nrows(), l.ncols()) - l;
                linalg::singular_values(&d).last().copied()
            }
            _ => None,
        }
    }
}

/// Reason `N(I - T)` is trivial for structured operators, if one is known.
fn trivial_kernel_certificate<S: Scalar>(op: &OperatorExpr<S>) -> Result<Option<String>> {
    Ok(match op {
        OperatorExpr::WeightedShift(_) => Some(
            "positive weights: T x = x forces x_0 = 0 and x_{n+1} = lambda_n x_n, so x = 0".into(),
        ),
        OperatorExpr::Diagonal(d) => {
            let entries = match d {
                DiagonalSeq::Finite { entries: e } | DiagonalSeq::Periodic { period: e } => e.clone(),
                DiagonalSeq::RationalRotations { .. } => return Ok(None),
            };
            let one = entries
                .iter()
                .any(|e| e.modulus == crate::scalar::Rat::integer(1) && *e.turns.numer() == 0);
            (!one).then(|| "no diagonal entry equals 1".to_string())
        }
        OperatorExpr::DirectSum(a, b) => match (trivial_kernel_certificate(a)?, trivial_kernel_certificate(b)?) {
            (Some(x), Some(y)) => Some(format!("both summands: {x}; {y}")),
            _ => None,
        },
        _ => None,
    })
}

/// Split along `N(I - T)`: orthogonal when the kernel reduces `T`, otherwise
/// along the limit projection of the power sequence.
pub fn identity_part_split<S: Scalar>(op: &OperatorExpr<S>, n_max: u64, tol: &Tolerances) -> Result<SplitResult> {
    op.validate()?;
    if let Dim::Infinite = op.dim() {
        return match trivial_kernel_certificate(op)? {
            Some(certificate) => Ok(SplitResult {
                kind: SplitKind::Trivial { certificate },
                orthogonal: true,
            }),
            None => Err(Error::NoKernelInfo(
                "infinite-dimensional operator without a trivial-kernel certificate".into(),
            )),
        };
    }
    let t = to_dense_cmat(op)?;
    let n = t.nrows();
    let k = kernels(&t, tol)?;
    if k.relation == super::KernelRelation::Equal && k.reduces(tol.subspace) {
        let h2 = complement(&k.fixed, n);
        let l = h2.adjoint() * &t * &h2;
        return Ok(SplitResult {
            kind: SplitKind::Finite { h1: k.fixed, h2, l },
            orthogonal: true,
        });
    }
    let report = classify_dense(&t, n_max, tol)?;
    let p = match (&report.verdict, report.limit.as_ref().and_then(|l| l.dense())) {
        (Verdict::NormConvergent, Some(p)) => p.clone(),
        _ => {
            return Err(Error::SplitUndefined(format!(
                "N(I - T) does not reduce T (invariance defect {:e}) and the power sequence is {:?}",
                k.invariance_defect, report.verdict
            )))
        }
    };
    let h1 = range_basis(&p, tol.rank);
    let h2 = range_basis(&(CMat::identity(n, n) - &p), tol.rank);
    let l = h2.adjoint() * &t * &h2;
    Ok(SplitResult {
        kind: SplitKind::Finite { h1, h2, l },
        orthogonal: false,
    })
}
