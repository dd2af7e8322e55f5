//! Floating-point complex linear algebra helpers on `nalgebra` matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real matrix as a complex one.
pub fn from_real(n: usize, rows: &[f64]) -> CMat {
    CMat::from_fn(n, n, |i, j| c(rows[i * n + j], 0.0))
}

pub fn cdiag(entries: &[Complex64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(entries))
}

/// Real `2n x 2m` form `[[Re, -Im], [Im, Re]]`. Its SVD carries each complex
/// singular value twice.
fn realify(m: &CMat) -> DMatrix<f64> {
    let (r, k) = m.shape();
    DMatrix::from_fn(2 * r, 2 * k, |i, j| {
        let z = m[(i % r, j % k)];
        match (i < r, j < k) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Orthonormal complex basis of the span of real vectors `[a; b] -> a + ib`
/// whose real span is closed under multiplication by `i`. Keeps `half` vectors
/// by pivoted Gram-Schmidt.
fn complexify(real: &[DVector<f64>], n: usize, half: usize) -> CMat {
    let mut pool: Vec<CVec> = real
        .iter()
        .map(|v| CVec::from_fn(n, |i, _| c(v[i], v[i + n])))
        .collect();
    let mut basis: Vec<CVec> = Vec::with_capacity(half);
    while basis.len() < half && !pool.is_empty() {
        let (best, _) = pool
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        let v = pool.swap_remove(best);
        let v = &v / c(v.norm(), 0.0);
        for w in pool.iter_mut() {
            let d = v.dotc(w);
            *w -= &v * d;
        }
        basis.push(v);
    }
    if basis.is_empty() {
        CMat::zeros(n, 0)
    } else {
        CMat::from_columns(&basis)
    }
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = realify(m).svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.into_iter().step_by(2).collect()
}

/// Largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn frob(m: &CMat) -> f64 {
    m.norm()
}

/// Orthonormal basis (as columns) of the null space of `m`; singular values
/// at most `rel * max(smax, 1)` count as zero.
pub fn null_space(m: &CMat, rel: f64) -> CMat {
    let n = m.ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let re = realify(m);
    let mut sq = DMatrix::<f64>::zeros(re.nrows().max(2 * n), 2 * n);
    sq.rows_mut(0, re.nrows()).copy_from(&re);
    let svd = sq.svd(false, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let v_t = svd.v_t.expect("requested v_t");
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= rel * smax.max(1.0))
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    complexify(&cols, n, cols.len() / 2)
}

/// Orthonormal basis (as columns) of the column space of `m`; singular values
/// below `rel * max(smax, 1)` count as zero.
pub fn range_basis(m: &CMat, rel: f64) -> CMat {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return CMat::zeros(n, 0);
    }
    let svd = realify(m).svd(true, false);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let u = svd.u.expect("requested u");
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > rel * smax.max(1.0))
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    complexify(&cols, n, cols.len() / 2)
}

/// Complex Schur form `(Q, T)` with `M = Q T Q*`. Convergence thresholds
/// are loosened from `1e-15` to `1e-12` if the iteration stalls.
pub fn schur(m: &CMat) -> Option<(CMat, CMat)> {
    [1e-15, 1e-14, 1e-13, 1e-12]
        .into_iter()
        .find_map(|eps| nalgebra::Schur::try_new(m.clone(), eps, 10_000))
        .map(|s| s.unpack())
}

/// Orthogonal projector `Q Q*` onto the span of orthonormal columns `q`.
pub fn projector(q: &CMat, n: usize) -> CMat {
    if q.ncols() == 0 {
        return CMat::zeros(n, n);
    }
    q * q.adjoint()
}

/// `||(I - P_b) a||` for orthonormal column sets: zero iff `span a` lies in `span b`.
pub fn inclusion_defect(a: &CMat, b: &CMat) -> f64 {
    if a.ncols() == 0 {
        return 0.0;
    }
    let n = a.nrows();
    let pb = projector(b, n);
    op_norm(&(a - &pb * a))
}

/// Sine of the largest principal angle between two subspaces (1 on dimension mismatch).
pub fn subspace_distance(a: &CMat, b: &CMat) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    inclusion_defect(a, b).max(inclusion_defect(b, a))
}

/// Hermitian part `(M + M*)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max_hermitian(h: &CMat) -> f64 {
    if h.is_empty() {
        return 0.0;
    }
    nalgebra::SymmetricEigen::new(h.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `M^k` by repeated squaring.
pub fn mat_pow(m: &CMat, mut k: u64) -> CMat {
    let n = m.nrows();
    let mut result = CMat::identity(n, n);
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `||M M* - M* M||`.
pub fn normality_defect(m: &CMat) -> f64 {
    let a = m.adjoint();
    op_norm(&(m * &a - &a * m))
}

/// Column concatenation.
pub fn hstack(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows().max(b.nrows());
    let mut out = CMat::zeros(n, a.ncols() + b.ncols());
    if a.ncols() > 0 {
        out.columns_mut(0, a.ncols()).copy_from(a);
    }
    if b.ncols() > 0 {
        out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    }
    out
}

/// Block diagonal `a (+) b`.
pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = CMat::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// Serde adapter writing a matrix as a list of rows of `[re, im]` pairs.
pub mod cmat_serde {
    use super::{c, CMat};
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<Se: Serializer>(m: &CMat, s: Se) -> Result<Se::Ok, Se::Error> {
        let rows: Vec<Vec<[f64; 2]>> = m
            .row_iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        Ok(CMat::from_fn(rows.len(), ncols, |i, j| c(rows[i][j][0], rows[i][j][1])))
    }
}

pub mod opt_cmat_serde {
    use super::CMat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::cmat_serde")] CMat);

    pub fn serialize<Se: Serializer>(m: &Option<CMat>, s: Se) -> Result<Se::Ok, Se::Error> {
        m.as_ref().map(|m| Wrap(m.clone())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CMat>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Orthonormal basis of the orthogonal complement of the span of orthonormal columns `q`.
pub fn complement(q: &CMat, n: usize) -> CMat {
    if q.ncols() == 0 {
        return CMat::identity(n, n);
    }
    null_space(&q.adjoint(), 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_projection_like_matrix() {
        // I - T for T = [[1,1],[0,1/2]]
        let m = from_real(2, &[0.0, -1.0, 0.0, 0.5]);
        let k = null_space(&m, 1e-10);
        assert_eq!(k.ncols(), 1);
        assert!((k[(0, 0)].norm() - 1.0).abs() < 1e-12);
        let zero = CMat::zeros(3, 3);
        assert_eq!(null_space(&zero, 1e-10).ncols(), 3);
        let wide = CMat::from_fn(1, 3, |_, j| c(if j == 0 { 1.0 } else { 0.0 }, 0.0));
        assert_eq!(null_space(&wide, 1e-10).ncols(), 2);
    }

    #[test]
    fn subspace_distance_detects_equality() {
        let a = range_basis(&from_real(2, &[1.0, 0.0, 0.0, 0.0]), 1e-10);
        let b = range_basis(&from_real(2, &[2.0, 3.0, 0.0, 0.0]), 1e-10);
        assert!(subspace_distance(&a, &b) < 1e-12);
        let c2 = range_basis(&from_real(2, &[1.0, 0.0, 1.0, 0.0]), 1e-10);
        assert!(subspace_distance(&a, &c2) > 0.5);
    }

    #[test]
    fn hermitian_lambda_max() {
        let h = from_real(2, &[2.0, 1.0, 1.0, 2.0]);
        assert!((lambda_max_hermitian(&h) - 3.0).abs() < 1e-12);
        assert!((op_norm(&h) - 3.0).abs() < 1e-12);
    }
}
