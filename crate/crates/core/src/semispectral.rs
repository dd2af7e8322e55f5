//! Spectral measures of finite normal matrices and the stability criteria
//! built on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, mat_pow, normality_defect, op_norm, range_basis, CMat};
use crate::shiftlab::two_isometry_norm_sq;
use crate::scalar::{rational_to_f64, Rat};

/// Relative tolerance for merging eigenvalues into one atom.
pub const CLUSTER_TOL: f64 = 1e-8;
/// `| |z| - 1 | <= ON_CIRCLE_TOL` counts as lying on the unit circle.
pub const ON_CIRCLE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralAtom {
    pub z: Complex64,
    pub multiplicity: usize,
    /// Orthogonal eigenprojection.
    #[serde(with = "linalg::cmat_serde")]
    pub projection: CMat,
}

impl SpectralAtom {
    pub fn on_circle(&self) -> bool {
        (self.z.norm() - 1.0).abs() <= ON_CIRCLE_TOL
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub atoms: Vec<SpectralAtom>,
    #[serde(with = "linalg::cmat_serde")]
    pub source: CMat,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.source.nrows()
    }

    /// `sum_z f(z) P_z`.
    pub fn functional(&self, f: impl Fn(Complex64) -> Complex64) -> CMat {
        let n = self.dim();
        self.atoms
            .iter()
            .fold(CMat::zeros(n, n), |acc, a| acc + &a.projection * f(a.z))
    }

    /// `||sum_z z P_z - M||`.
    pub fn reconstruction_defect(&self) -> f64 {
        op_norm(&(self.functional(|z| z) - &self.source))
    }

    /// Worst of idempotency, self-adjointness, mutual orthogonality and completeness defects.
    pub fn projection_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = op_norm(&(self.functional(|_| c(1.0, 0.0)) - CMat::identity(n, n)));
        for (i, a) in self.atoms.iter().enumerate() {
            let p = &a.projection;
            worst = worst.max(op_norm(&(p * p - p))).max(op_norm(&(p - p.adjoint())));
            for b in &self.atoms[i + 1..] {
                worst = worst.max(op_norm(&(p * &b.projection)));
            }
        }
        worst
    }

    /// `F(T)`: the spectral projection of the unit circle.
    pub fn circle_projection(&self) -> CMat {
        let n = self.dim();
        self.atoms
            .iter()
            .filter(|a| a.on_circle())
            .fold(CMat::zeros(n, n), |acc, a| acc + &a.projection)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.atoms.iter().map(|a| a.z.norm()).fold(0.0, f64::max)
    }
}

/// Unitary diagonalization of a normal matrix via the complex Schur form,
/// with eigenvalues within `CLUSTER_TOL * max(1, ||M||)` merged into one atom.
pub fn spectral_measure_of_normal(m: &CMat, tol: f64) -> Result<SpectralData> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let defect = normality_defect(m);
    if defect > tol {
        return Err(Error::NotNormal(defect));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(SpectralData {
            atoms: Vec::new(),
            source: m.clone(),
        });
    }
    let (q, t) = linalg::schur(m).ok_or_else(|| Error::Unsupported("Schur iteration did not converge".into()))?;
    let scale = op_norm(m).max(1.0);
    let mut clusters: Vec<(Complex64, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let z = t[(i, i)];
        match clusters.iter_mut().find(|(w, _)| (w - z).norm() <= CLUSTER_TOL * scale) {
            Some((_, members)) => members.push(i),
            None => clusters.push((z, vec![i])),
        }
    }
    let atoms = clusters
        .into_iter()
        .map(|(_, members)| {
            let z = members.iter().map(|&i| t[(i, i)]).sum::<Complex64>() / members.len() as f64;
            let cols: Vec<_> = members.iter().map(|&i| q.column(i).into_owned()).collect();
            let v = CMat::from_columns(&cols);
            SpectralAtom {
                z,
                multiplicity: members.len(),
                projection: &v * v.adjoint(),
            }
        })
        .collect();
    Ok(SpectralData {
        atoms,
        source: m.clone(),
    })
}

/// `||M*^n M^m - sum_z z^m conj(z)^n P_z||`.
pub fn moment_identity_residual(m: &CMat, f: &SpectralData, mm: u32, nn: u32) -> f64 {
    let lhs = mat_pow(&m.adjoint(), nn as u64) * mat_pow(m, mm as u64);
    let rhs = f.functional(|z| z.powu(mm) * z.conj().powu(nn));
    op_norm(&(lhs - rhs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub holds: bool,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub weak: Flag,
    pub strong: Flag,
    pub uniform: Flag,
    pub norm: f64,
    pub spectral_radius: f64,
    /// `||F(T)||`: 1 when some atom lies on the circle, 0 otherwise.
    pub circle_mass: f64,
}

impl StabilityVerdict {
    /// `uniform => strong => weak`.
    pub fn implications_hold(&self) -> bool {
        (!self.uniform.holds || self.strong.holds) && (!self.strong.holds || self.weak.holds)
    }
}

fn describe(zs: &[Complex64]) -> String {
    zs.iter()
        .map(|z| format!("{:.6}{:+.6}i", z.re, z.im))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn stability_verdict(m: &CMat, tol: f64) -> Result<StabilityVerdict> {
    let f = spectral_measure_of_normal(m, tol)?;
    let norm = op_norm(m);
    let on: Vec<Complex64> = f.atoms.iter().filter(|a| a.on_circle()).map(|a| a.z).collect();
    let outside: Vec<Complex64> = f
        .atoms
        .iter()
        .filter(|a| a.z.norm() > 1.0 + ON_CIRCLE_TOL)
        .map(|a| a.z)
        .collect();
    let contraction = outside.is_empty();
    let circle_mass = op_norm(&f.circle_projection());
    let weak = if !contraction {
        Flag {
            holds: false,
            reason: format!("eigenvalues outside the closed disk: {}", describe(&outside)),
        }
    } else if !on.is_empty() {
        Flag {
            holds: false,
            reason: format!(
                "atoms on the circle at {}: the circle part is a nonzero atomic measure, not Rajchman",
                describe(&on)
            ),
        }
    } else {
        Flag {
            holds: true,
            reason: "contraction with no spectral mass on the circle".into(),
        }
    };
    let strong = Flag {
        holds: weak.holds,
        reason: if weak.holds {
            "||M|| <= 1 and F(T) = 0".into()
        } else if contraction {
            format!("F(T) != 0 (atoms {})", describe(&on))
        } else {
            format!("||M|| = {norm:.6} > 1")
        },
    };
    let uniform = Flag {
        holds: contraction && on.is_empty() && f.spectral_radius() < 1.0 - ON_CIRCLE_TOL,
        reason: format!("||M|| = {norm:.9}"),
    };
    Ok(StabilityVerdict {
        weak,
        strong,
        uniform,
        norm,
        spectral_radius: f.spectral_radius(),
        circle_mass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilitySplit {
    /// Unimodular block.
    #[serde(with = "linalg::cmat_serde")]
    pub u: CMat,
    /// Strict-contraction block.
    #[serde(with = "linalg::cmat_serde")]
    pub s: CMat,
    /// Columns: orthonormal basis of the `U` block followed by the `S` block.
    #[serde(with = "linalg::cmat_serde")]
    pub basis: CMat,
    /// A nonzero unitary on a finite-dimensional space is never weakly stable.
    pub u_weakly_stable: bool,
}

impl StabilitySplit {
    /// `||basis (U (+) S) basis* - M||`.
    pub fn reassembly_defect(&self, m: &CMat) -> f64 {
        let block = linalg::block_diag(&self.u, &self.s);
        op_norm(&(&self.basis * block * self.basis.adjoint() - m))
    }
}

pub fn normal_stability_split(m: &CMat, tol: f64) -> Result<StabilitySplit> {
    let f = spectral_measure_of_normal(m, tol)?;
    let norm = op_norm(m);
    if norm > 1.0 + tol {
        return Err(Error::NotContraction(norm));
    }
    let n = m.nrows();
    let pu = f.circle_projection();
    let bu = range_basis(&pu, 1e-10);
    let bs = range_basis(&(CMat::identity(n, n) - &pu), 1e-10);
    Ok(StabilitySplit {
        u: bu.adjoint() * m * &bu,
        s: bs.adjoint() * m * &bs,
        basis: linalg::hstack(&bu, &bs),
        u_weakly_stable: bu.ncols() == 0,
    })
}

/// `sum_{|z|<1} z^n P_z` for spectral data supported in the open disk.
pub fn disk_moment_operator(f: &SpectralData, n: u32) -> Result<CMat> {
    if let Some(a) = f.atoms.iter().find(|a| a.z.norm() >= 1.0 - ON_CIRCLE_TOL) {
        return Err(Error::AtomOutsideDisk(format!("{}", a.z)));
    }
    Ok(f.functional(|z| z.powu(n)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesCheck {
    pub j_max: u32,
    /// `sum_{j <= j_max} M*^j M^j`.
    #[serde(with = "linalg::cmat_serde")]
    pub partial: CMat,
    /// `(I - M* M)^{-1}`.
    #[serde(with = "linalg::cmat_serde")]
    pub closed_form: CMat,
    /// `sum_z (1 - |z|^2)^{-1} P_z`.
    #[serde(with = "linalg::cmat_serde")]
    pub middle: CMat,
    /// `||M||^{2(j_max+1)} / (1 - ||M||^2)`.
    pub tail_bound: f64,
    pub partial_vs_closed: f64,
    pub middle_vs_closed: f64,
    pub agree: bool,
}

/// Smallest `j_max` with `r^{2(j_max+1)} / (1 - r^2) <= tol`.
pub fn geometric_j_max(r: f64, tol: f64) -> u32 {
    if r <= 0.0 {
        return 0;
    }
    let need = (tol * (1.0 - r * r)).ln() / (2.0 * r.ln()) - 1.0;
    need.ceil().max(0.0) as u32
}

/// Largest partial sum length `uniform_stability_series` will form.
pub const SERIES_MAX_TERMS: u32 = 1_000_000;

pub fn uniform_stability_series(m: &CMat, j_max: Option<u32>, tol: f64) -> Result<SeriesCheck> {
    let f = spectral_measure_of_normal(m, tol)?;
    let r = op_norm(m);
    if r >= 1.0 - ON_CIRCLE_TOL {
        return Err(Error::NotStrictContraction(r));
    }
    let n = m.nrows();
    let j_max = j_max.unwrap_or_else(|| geometric_j_max(r, tol / 10.0));
    if j_max > SERIES_MAX_TERMS {
        return Err(Error::InvalidArgument(format!(
            "series needs {j_max} terms at norm {r}; at most {SERIES_MAX_TERMS} are summed"
        )));
    }
    let gram = m.adjoint() * m;
    let mut partial = CMat::identity(n, n);
    let mut mj = CMat::identity(n, n);
    for _ in 0..j_max {
        mj = &mj * m;
        partial += mj.adjoint() * &mj;
    }
    let closed_form = (CMat::identity(n, n) - gram)
        .try_inverse()
        .ok_or(Error::NotStrictContraction(r))?;
    let middle = f.functional(|z| c(1.0 / (1.0 - z.norm_sqr()), 0.0));
    let partial_vs_closed = op_norm(&(&partial - &closed_form));
    let middle_vs_closed = op_norm(&(&middle - &closed_form));
    Ok(SeriesCheck {
        j_max,
        tail_bound: r.powi(2 * (j_max as i32 + 1)) / (1.0 - r * r),
        agree: partial_vs_closed <= tol && middle_vs_closed <= tol,
        partial_vs_closed,
        middle_vs_closed,
        partial,
        closed_form,
        middle,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongCriterion {
    pub convergent: bool,
    /// `F(T)`, the eigenprojection at 1, when the powers converge.
    #[serde(with = "linalg::opt_cmat_serde")]
    pub limit: Option<CMat>,
    /// Unimodular eigenvalues other than 1.
    pub obstructions: Vec<Complex64>,
}

/// Powers of a normal contraction converge iff every unimodular eigenvalue equals 1.
pub fn strong_convergence_criterion(m: &CMat, tol: f64) -> Result<StrongCriterion> {
    let f = spectral_measure_of_normal(m, tol)?;
    let norm = op_norm(m);
    if norm > 1.0 + tol {
        return Err(Error::NotContraction(norm));
    }
    let obstructions: Vec<Complex64> = f
        .atoms
        .iter()
        .filter(|a| a.on_circle() && (a.z - c(1.0, 0.0)).norm() > CLUSTER_TOL)
        .map(|a| a.z)
        .collect();
    let convergent = obstructions.is_empty();
    Ok(StrongCriterion {
        convergent,
        limit: convergent.then(|| f.circle_projection()),
        obstructions,
    })
}

/// `max_{k < k_max, n <= n_max} |prod_{i<n} lambda_{k+i}^2 - (1 + n (lambda_k^2 - 1))|`
/// for the 2-isometric shift with parameter `lambda_sq`: the diagonal of
/// `T*^n T^n` against `I + n C`, `C = T*T - I`.
pub fn two_isometry_moment_residual(lambda_sq: &Rat, k_max: u64, n_max: u64) -> Result<f64> {
    let a = |i: u64| -> Result<f64> { Ok(rational_to_f64(&two_isometry_norm_sq(lambda_sq, i))) };
    let mut worst = 0.0f64;
    for k in 0..k_max {
        let ak = a(k)?;
        let ck = a(k + 1)? / ak - 1.0;
        let mut prod = 1.0;
        for n in 1..=n_max {
            prod *= a(k + n)? / a(k + n - 1)?;
            worst = worst.max((prod - (1.0 + n as f64 * ck)).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cdiag, from_real};
    use std::f64::consts::PI;

    #[test]
    fn diagonal_atoms() {
        let m = cdiag(&[c(1.0, 0.0), c(0.0, 1.0), c(0.5, 0.0)]);
        let f = spectral_measure_of_normal(&m, 1e-10).unwrap();
        assert_eq!(f.atoms.len(), 3);
        assert!(f.reconstruction_defect() < 1e-12);
        assert!(f.projection_defect() < 1e-12);
        let z = cdiag(&[c(0.3, 0.4); 4]);
        let g = spectral_measure_of_normal(&z, 1e-10).unwrap();
        assert_eq!(g.atoms.len(), 1);
        assert_eq!(g.atoms[0].multiplicity, 4);
    }

    #[test]
    fn rotation_by_fifth_of_a_turn() {
        let t = 2.0 * PI / 5.0;
        let m = from_real(2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let f = spectral_measure_of_normal(&m, 1e-10).unwrap();
        assert_eq!(f.atoms.len(), 2);
        assert!(f.projection_defect() < 1e-12);
        for a in &f.atoms {
            assert!((a.z.norm() - 1.0).abs() < 1e-12 && (a.z.im.abs() - t.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_normal() {
        let m = from_real(2, &[1.0, 1.0, 0.0, 0.5]);
        assert!(matches!(spectral_measure_of_normal(&m, 1e-8), Err(Error::NotNormal(_))));
    }

    #[test]
    fn moment_residuals() {
        let m = cdiag(&[c(0.5, 0.0), c(0.0, 1.0 / 3.0), c(-0.2, 0.7)]);
        let f = spectral_measure_of_normal(&m, 1e-10).unwrap();
        for a in 0..=6 {
            for b in 0..=6 {
                assert!(moment_identity_residual(&m, &f, a, b) < 1e-12);
            }
        }
    }

    #[test]
    fn verdict_examples() {
        let v = stability_verdict(&cdiag(&[c(0.5, 0.0), c(0.0, 1.0 / 3.0)]), 1e-10).unwrap();
        assert!(v.weak.holds && v.strong.holds && v.uniform.holds);
        let v = stability_verdict(&cdiag(&[c(0.0, 1.0), c(0.5, 0.0)]), 1e-10).unwrap();
        assert!(!v.weak.holds && !v.strong.holds && !v.uniform.holds);
        assert!(v.weak.reason.contains("circle"));
        assert!(v.implications_hold());
    }

    #[test]
    fn split_examples() {
        let m = cdiag(&[c(1.0, 0.0), c(-1.0, 0.0), c(0.5, 0.0)]);
        let s = normal_stability_split(&m, 1e-10).unwrap();
        assert_eq!((s.u.nrows(), s.s.nrows()), (2, 1));
        assert!((s.s[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!(s.reassembly_defect(&m) < 1e-12);
        let m = cdiag(&[c(1.0 / 3.0, 0.0), c(0.25, 0.0)]);
        let s = normal_stability_split(&m, 1e-10).unwrap();
        assert_eq!(s.u.nrows(), 0);
        assert!(s.u_weakly_stable);
        assert!(normal_stability_split(&cdiag(&[c(2.0, 0.0)]), 1e-10).is_err());
    }

    #[test]
    fn disk_moments() {
        let f = spectral_measure_of_normal(&cdiag(&[c(0.5, 0.0), c(-0.5, 0.0)]), 1e-10).unwrap();
        for n in 0..10 {
            let d = disk_moment_operator(&f, n).unwrap();
            assert!((op_norm(&d) - 0.5f64.powi(n as i32)).abs() < 1e-14);
        }
        let zero = spectral_measure_of_normal(&cdiag(&[c(0.0, 0.0)]), 1e-10).unwrap();
        assert_eq!(op_norm(&disk_moment_operator(&zero, 1).unwrap()), 0.0);
        let on = spectral_measure_of_normal(&cdiag(&[c(1.0, 0.0)]), 1e-10).unwrap();
        assert!(disk_moment_operator(&on, 1).is_err());
    }

    #[test]
    fn series_examples() {
        let s = uniform_stability_series(&cdiag(&[c(0.5, 0.0), c(0.0, 1.0 / 3.0)]), None, 1e-10).unwrap();
        assert!(s.agree);
        assert!((s.closed_form[(0, 0)].re - 4.0 / 3.0).abs() < 1e-12);
        assert!((s.closed_form[(1, 1)].re - 9.0 / 8.0).abs() < 1e-12);
        assert!(s.tail_bound <= 1e-11);
        let z = uniform_stability_series(&CMat::zeros(2, 2), None, 1e-10).unwrap();
        assert!(op_norm(&(z.partial - CMat::identity(2, 2))) == 0.0);
        assert!(uniform_stability_series(&CMat::identity(1, 1), None, 1e-10).is_err());
    }

    #[test]
    fn strong_criterion_examples() {
        let r = strong_convergence_criterion(&cdiag(&[c(1.0, 0.0), c(0.5, 0.0)]), 1e-10).unwrap();
        assert!(r.convergent);
        assert!(op_norm(&(r.limit.unwrap() - cdiag(&[c(1.0, 0.0), c(0.0, 0.0)]))) < 1e-12);
        let t = 2.0 * PI / 7.0;
        let r = strong_convergence_criterion(&cdiag(&[c(t.cos(), t.sin()), c(0.5, 0.0)]), 1e-10).unwrap();
        assert!(!r.convergent && r.obstructions.len() == 1);
        let r = strong_convergence_criterion(&cdiag(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0 / 3.0, 0.0)]), 1e-10).unwrap();
        assert_eq!(range_basis(&r.limit.unwrap(), 1e-10).ncols(), 2);
    }

    #[test]
    fn two_isometry_diagonal() {
        assert!(two_isometry_moment_residual(&Rat::integer(2), 20, 100).unwrap() < 1e-10);
    }
}
