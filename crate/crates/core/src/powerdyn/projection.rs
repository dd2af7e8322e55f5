//! Projection diagnostics, kernels of `I - T` and `I - T*`, numerical radius.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{
    self, c, hermitian_part, inclusion_defect, lambda_max_hermitian, null_space, op_norm, range_basis,
    subspace_distance, CMat,
};
use crate::opcore::{matrix_element_power, to_dense_cmat, Dim, OperatorExpr};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericalRadius {
    /// Lower bound attained on the refined grid.
    pub value: f64,
    /// `||M|| pi / grid`, bounding `w(M) - value`.
    pub error_bound: f64,
}

fn rotated_lambda(m: &CMat, theta: f64) -> f64 {
    let rot = m * c(theta.cos(), theta.sin());
    lambda_max_hermitian(&hermitian_part(&rot))
}

/// `max_theta lambda_max(Re(e^{i theta} M))` over a uniform grid with golden-section refinement.
pub fn numerical_radius(m: &CMat, grid: usize, refinement: usize) -> NumericalRadius {
    if m.is_empty() {
        return NumericalRadius {
            value: 0.0,
            error_bound: 0.0,
        };
    }
    let grid = grid.max(4);
    let h = 2.0 * PI / grid as f64;
    let (mut best_t, mut best) = (0.0, f64::NEG_INFINITY);
    for i in 0..grid {
        let t = i as f64 * h;
        let v = rotated_lambda(m, t);
        if v > best {
            (best_t, best) = (t, v);
        }
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best_t - h, best_t + h);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (rotated_lambda(m, x1), rotated_lambda(m, x2));
    for _ in 0..refinement {
        if f1 > f2 {
            b = x2;
            (x2, f2) = (x1, f1);
            x1 = b - g * (b - a);
            f1 = rotated_lambda(m, x1);
        } else {
            a = x1;
            (x1, f1) = (x2, f2);
            x2 = a + g * (b - a);
            f2 = rotated_lambda(m, x2);
        }
        best = best.max(f1).max(f2);
    }
    NumericalRadius {
        value: best,
        error_bound: op_norm(m) * PI / grid as f64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionDiagnostics {
    pub idempotency_defect: f64,
    pub self_adjointness_defect: f64,
    pub numerical_radius: NumericalRadius,
    pub commutation_defect: f64,
    #[serde(with = "linalg::cmat_serde")]
    pub range_basis: CMat,
    #[serde(with = "linalg::cmat_serde")]
    pub kernel_basis: CMat,
    pub range_equals_kernel: bool,
}

/// Compression of `T` to the leading `d` coordinates.
fn compression<S: Scalar>(t: &OperatorExpr<S>, d: usize) -> Result<CMat> {
    match t.dim() {
        Dim::Finite(n) if n != d => Err(Error::DimensionMismatch { expected: n, got: d }),
        Dim::Finite(_) => to_dense_cmat(t),
        Dim::Infinite => {
            let mut m = CMat::zeros(d, d);
            for k in 0..d {
                for l in 0..d {
                    let z = matrix_element_power(t, 1, k, l)?;
                    m[(l, k)] = c(z.re.to_f64_lossy(), z.im.to_f64_lossy());
                }
            }
            Ok(m)
        }
    }
}

/// Defects of `P` as a candidate limit projection of `T`. For infinite `T`
/// the diagnostics use the compression of `T` to `P`'s index window.
pub fn projection_diagnostics<S: Scalar>(
    p: &CMat,
    t: &OperatorExpr<S>,
    tol: &Tolerances,
) -> Result<ProjectionDiagnostics> {
    if !p.is_square() {
        return Err(Error::DimensionMismatch {
            expected: p.nrows(),
            got: p.ncols(),
        });
    }
    let tm = compression(t, p.nrows())?;
    let n = p.nrows();
    let range = range_basis(p, tol.rank);
    let kernel = null_space(&(CMat::identity(n, n) - &tm), tol.rank);
    Ok(ProjectionDiagnostics {
        idempotency_defect: op_norm(&(p * p - p)),
        self_adjointness_defect: op_norm(&(p - p.adjoint())),
        numerical_radius: numerical_radius(p, 720, 60),
        commutation_defect: op_norm(&(&tm * p - p * &tm)),
        range_equals_kernel: subspace_distance(&range, &kernel) <= tol.subspace,
        range_basis: range,
        kernel_basis: kernel,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRelation {
    Equal,
    /// `N(I - T)` is a proper subset of `N(I - T*)`.
    TSideProperSubset,
    /// `N(I - T*)` is a proper subset of `N(I - T)`.
    TStarSideProperSubset,
    Incomparable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernels {
    /// Orthonormal basis of `N(I - T)`.
    #[serde(with = "linalg::cmat_serde")]
    pub fixed: CMat,
    /// Orthonormal basis of `N(I - T*)`.
    #[serde(with = "linalg::cmat_serde")]
    pub co_fixed: CMat,
    pub relation: KernelRelation,
    /// `||(I - Q*) Q||` with `Q` and `Q*` the projections onto the two kernels.
    pub fixed_in_co_fixed: f64,
    pub co_fixed_in_fixed: f64,
    /// `||(I - Q) T* Q||`: zero iff `N(I - T)` is invariant under `T*`.
    pub invariance_defect: f64,
}

impl Kernels {
    /// `N(I - T)` reduces `T`.
    pub fn reduces(&self, tol: f64) -> bool {
        self.invariance_defect <= tol
    }
}

pub fn kernels(t: &CMat, tol: &Tolerances) -> Result<Kernels> {
    if !t.is_square() {
        return Err(Error::DimensionMismatch {
            expected: t.nrows(),
            got: t.ncols(),
        });
    }
    let n = t.nrows();
    let id = CMat::identity(n, n);
    let fixed = null_space(&(&id - t), tol.rank);
    let co_fixed = null_space(&(&id - t.adjoint()), tol.rank);
    let a = inclusion_defect(&fixed, &co_fixed);
    let b = inclusion_defect(&co_fixed, &fixed);
    let (ab, ba) = (a <= tol.subspace, b <= tol.subspace);
    let relation = match (ab, ba) {
        (true, true) => KernelRelation::Equal,
        (true, false) => KernelRelation::TSideProperSubset,
        (false, true) => KernelRelation::TStarSideProperSubset,
        (false, false) => KernelRelation::Incomparable,
    };
    let q = linalg::projector(&fixed, n);
    let invariance_defect = op_norm(&((&id - &q) * t.adjoint() * &q));
    Ok(Kernels {
        fixed,
        co_fixed,
        relation,
        fixed_in_co_fixed: a,
        co_fixed_in_fixed: b,
        invariance_defect,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orthogonalized {
    /// Columns: orthonormal basis of `R(P)` followed by one of `R(I - P)`.
    #[serde(with = "linalg::cmat_serde")]
    pub s: CMat,
    /// `S^{-1} T S`.
    #[serde(with = "linalg::cmat_serde")]
    pub r: CMat,
    /// `S^{-1} P S`.
    #[serde(with = "linalg::cmat_serde")]
    pub q: CMat,
    pub rank: usize,
}

pub fn similarity_orthogonalize(t: &CMat, p: &CMat, tol: &Tolerances) -> Result<Orthogonalized> {
    if t.shape() != p.shape() || !t.is_square() {
        return Err(Error::DimensionMismatch {
            expected: t.nrows(),
            got: p.nrows(),
        });
    }
    let defect = op_norm(&(p * p - p));
    if defect > tol.limit {
        return Err(Error::NotIdempotent(defect));
    }
    let n = p.nrows();
    let range = range_basis(p, tol.rank);
    let co_range = range_basis(&(CMat::identity(n, n) - p), tol.rank);
    let s = linalg::hstack(&range, &co_range);
    if s.ncols() != n {
        return Err(Error::Constraint(format!(
            "range bases of P and I - P span {} of {n} dimensions",
            s.ncols()
        )));
    }
    let s_inv = s
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Constraint("assembled basis is singular".into()))?;
    Ok(Orthogonalized {
        r: &s_inv * t * &s,
        q: &s_inv * p * &s,
        rank: range.ncols(),
        s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real;

    #[test]
    fn numerical_radius_examples() {
        let id = CMat::identity(3, 3);
        assert!((numerical_radius(&id, 360, 40).value - 1.0).abs() < 1e-12);
        let nil = from_real(2, &[0.0, 1.0, 0.0, 0.0]);
        assert!((numerical_radius(&nil, 360, 40).value - 0.5).abs() < 1e-12);
        let h = from_real(2, &[1.0, 2.0, 2.0, -3.0]);
        // eigenvalues -1 -/+ 2 sqrt 2
        let rho = 1.0 + 2.0 * 2f64.sqrt();
        let w = numerical_radius(&h, 360, 60);
        assert!((w.value - rho).abs() < 1e-9, "{w:?}");
    }

    #[test]
    fn oblique_idempotent_has_large_numerical_radius() {
        let p = from_real(2, &[1.0, 2.0, 0.0, 0.0]);
        let t = OperatorExpr::<f64>::finite(crate::opcore::DenseMatrix::from_cmat(&p).unwrap());
        let d = projection_diagnostics(&p, &t, &Tolerances::default()).unwrap();
        assert!(d.idempotency_defect < 1e-15);
        assert!(d.self_adjointness_defect > 1.0);
        // idempotent: w(P) = (1 + ||P||) / 2
        let want = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((d.numerical_radius.value - want).abs() < 1e-9);
        let nil = from_real(2, &[0.0, 1.0, 0.0, 0.0]);
        let d = projection_diagnostics(&nil, &t, &Tolerances::default()).unwrap();
        assert!((d.idempotency_defect - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kernels_of_oblique_example() {
        let t = from_real(2, &[1.0, 1.0, 0.0, 0.5]);
        let k = kernels(&t, &Tolerances::default()).unwrap();
        assert_eq!(k.relation, KernelRelation::Incomparable);
        assert_eq!((k.fixed.ncols(), k.co_fixed.ncols()), (1, 1));
        // T* x = x: x_0 = x_0, x_0 + x_1/2 = x_1, so x = (1, 2)
        let v = k.co_fixed.column(0);
        assert!((v[1] / v[0] - c(2.0, 0.0)).norm() < 1e-12);
        assert!(!k.reduces(1e-6));
        let id = kernels(&CMat::identity(3, 3), &Tolerances::default()).unwrap();
        assert_eq!(id.relation, KernelRelation::Equal);
        assert_eq!(id.fixed.ncols(), 3);
        let d = kernels(&from_real(2, &[1.0, 0.0, 0.0, 0.5]), &Tolerances::default()).unwrap();
        assert_eq!(d.relation, KernelRelation::Equal);
        assert!(d.reduces(1e-12));
    }

    #[test]
    fn orthogonalize_oblique_pair() {
        let t = from_real(2, &[1.0, 1.0, 0.0, 0.5]);
        let p = from_real(2, &[1.0, 2.0, 0.0, 0.0]);
        let o = similarity_orthogonalize(&t, &p, &Tolerances::default()).unwrap();
        assert!(op_norm(&(&o.q - from_real(2, &[1.0, 0.0, 0.0, 0.0]))) < 1e-12);
        assert!(op_norm(&(&o.r - from_real(2, &[1.0, 0.0, 0.0, 0.5]))) < 1e-12);
        let bad = from_real(2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            similarity_orthogonalize(&t, &bad, &Tolerances::default()),
            Err(Error::NotIdempotent(_))
        ));
    }
}
