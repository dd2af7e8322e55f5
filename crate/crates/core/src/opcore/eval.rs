//! Actions, adjoints, inner products, matrix elements and power norms.

use num_complex::Complex;

use super::{DenseMatrix, Dim, OperatorExpr, Precision, Side, Vector};
use crate::circlemeasure::fourier_coefficient_in;
use crate::error::{Error, Result};
use crate::linalg::{op_norm, CMat};
use crate::scalar::{conj, PosReal, Scalar};
use crate::shiftlab::shift_log_norms;

fn is_zero<S: Scalar>(z: &Complex<S>) -> bool {
    z.re == S::zero() && z.im == S::zero()
}

fn czero<S: Scalar>() -> Complex<S> {
    Complex::new(S::zero(), S::zero())
}

fn scale<S: Scalar>(z: &Complex<S>, w: &PosReal) -> Result<Complex<S>> {
    let f: S = w.to_scalar()?;
    Ok(Complex::new(z.re.clone() * f.clone(), z.im.clone() * f))
}

fn check_support<S: Scalar>(op: &OperatorExpr<S>, x: &Vector<S>) -> Result<()> {
    if let Dim::Finite(n) = op.dim() {
        if let Some((&i, _)) = x.iter().next_back() {
            if i >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: i + 1,
                });
            }
        }
    }
    Ok(())
}

fn dense_of<S: Scalar>(x: &Vector<S>, n: usize) -> Vec<Complex<S>> {
    let mut v = vec![czero(); n];
    for (&i, z) in x {
        v[i] = z.clone();
    }
    v
}

fn split<S: Scalar>(a: &OperatorExpr<S>, b: &OperatorExpr<S>, x: &Vector<S>) -> (Vector<S>, Vector<S>) {
    let (mut l, mut r) = (Vector::new(), Vector::new());
    for (&i, z) in x {
        match OperatorExpr::route(a, b, i) {
            (Side::Left, j) => l.insert(j, z.clone()),
            (Side::Right, j) => r.insert(j, z.clone()),
        };
    }
    (l, r)
}

fn merge<S: Scalar>(a: &OperatorExpr<S>, b: &OperatorExpr<S>, l: Vector<S>, r: Vector<S>) -> Vector<S> {
    let mut out = Vector::new();
    for (j, z) in l {
        out.insert(OperatorExpr::unroute(a, b, Side::Left, j), z);
    }
    for (j, z) in r {
        out.insert(OperatorExpr::unroute(a, b, Side::Right, j), z);
    }
    out
}

fn prune<S: Scalar>(mut x: Vector<S>) -> Vector<S> {
    x.retain(|_, z| !is_zero(z));
    x
}

/// Zigzag index to Laurent exponent: `0, 1, -1, 2, -2, ...`.
pub(crate) fn laurent_exponent(i: usize) -> i64 {
    if i % 2 == 1 {
        (i as i64 + 1) / 2
    } else {
        -(i as i64) / 2
    }
}

pub(crate) fn laurent_index(p: i64) -> usize {
    if p > 0 {
        (2 * p - 1) as usize
    } else {
        (-2 * p) as usize
    }
}

fn weights_upto<S: Scalar>(rule: &crate::shiftlab::WeightRule, count: usize) -> Result<Vec<PosReal>> {
    rule.weights(count)
}

/// `T x`.
pub fn apply<S: Scalar>(op: &OperatorExpr<S>, x: &Vector<S>, precision: &Precision) -> Result<Vector<S>> {
    precision.check::<S>()?;
    apply_unchecked(op, x)
}

fn apply_unchecked<S: Scalar>(op: &OperatorExpr<S>, x: &Vector<S>) -> Result<Vector<S>> {
    check_support(op, x)?;
    Ok(match op {
        OperatorExpr::FiniteMatrix(m) => {
            let y = m.mul_vec(&dense_of(x, m.dim()));
            super::vector_from_dense(&y)
        }
        OperatorExpr::WeightedShift(rule) => {
            let top = x.keys().next_back().map_or(0, |&i| i + 1);
            let w = weights_upto::<S>(rule, top)?;
            let mut out = Vector::new();
            for (&i, z) in x {
                out.insert(i + 1, scale(z, &w[i])?);
            }
            prune(out)
        }
        OperatorExpr::Diagonal(d) => {
            let mut out = Vector::new();
            for (&i, z) in x {
                out.insert(i, d.entry(i)?.value::<S>()? * z.clone());
            }
            prune(out)
        }
        OperatorExpr::MeasureMultiplication(_) => x
            .iter()
            .map(|(&i, z)| (laurent_index(laurent_exponent(i) + 1), z.clone()))
            .collect(),
        OperatorExpr::DirectSum(a, b) => {
            let (l, r) = split(a, b, x);
            merge(a, b, apply_unchecked(a, &l)?, apply_unchecked(b, &r)?)
        }
        OperatorExpr::Conjugate { s, s_inv, inner } => {
            let n = s.dim();
            let sx = super::vector_from_dense(&s.mul_vec(&dense_of(x, n)));
            let tsx = apply_unchecked(inner, &sx)?;
            super::vector_from_dense(&s_inv.mul_vec(&dense_of(&tsx, n)))
        }
    })
}

/// `T* x`.
pub fn adjoint_apply<S: Scalar>(op: &OperatorExpr<S>, x: &Vector<S>, precision: &Precision) -> Result<Vector<S>> {
    precision.check::<S>()?;
    adjoint_unchecked(op, x)
}

fn adjoint_unchecked<S: Scalar>(op: &OperatorExpr<S>, x: &Vector<S>) -> Result<Vector<S>> {
    check_support(op, x)?;
    Ok(match op {
        OperatorExpr::FiniteMatrix(m) => super::vector_from_dense(&m.adjoint_mul_vec(&dense_of(x, m.dim()))),
        OperatorExpr::WeightedShift(rule) => {
            let top = x.keys().next_back().map_or(0, |&i| i + 1);
            let w = weights_upto::<S>(rule, top)?;
            let mut out = Vector::new();
            for (&i, z) in x {
                if i > 0 {
                    out.insert(i - 1, scale(z, &w[i - 1])?);
                }
            }
            prune(out)
        }
        OperatorExpr::Diagonal(d) => {
            let mut out = Vector::new();
            for (&i, z) in x {
                out.insert(i, conj(&d.entry(i)?.value::<S>()?) * z.clone());
            }
            prune(out)
        }
        OperatorExpr::MeasureMultiplication(_) => x
            .iter()
            .map(|(&i, z)| (laurent_index(laurent_exponent(i) - 1), z.clone()))
            .collect(),
        OperatorExpr::DirectSum(a, b) => {
            let (l, r) = split(a, b, x);
            merge(a, b, adjoint_unchecked(a, &l)?, adjoint_unchecked(b, &r)?)
        }
        OperatorExpr::Conjugate { s, s_inv, inner } => {
            // (S^{-1} T S)* = S* T* S^{-*}
            let n = s.dim();
            let y = super::vector_from_dense(&s_inv.adjoint_mul_vec(&dense_of(x, n)));
            let ty = adjoint_unchecked(inner, &y)?;
            super::vector_from_dense(&s.adjoint_mul_vec(&dense_of(&ty, n)))
        }
    })
}

/// `<x, y>` in the operator's space, linear in `x`.
pub fn inner<S: Scalar>(op: &OperatorExpr<S>, x: &Vector<S>, y: &Vector<S>) -> Result<Complex<S>> {
    check_support(op, x)?;
    check_support(op, y)?;
    match op {
        OperatorExpr::MeasureMultiplication(mu) => {
            let mut acc = czero();
            for (&i, a) in x {
                for (&j, b) in y {
                    let c = fourier_coefficient_in::<S>(mu, laurent_exponent(i) - laurent_exponent(j))?;
                    acc = acc + a.clone() * conj(b) * c;
                }
            }
            Ok(acc)
        }
        OperatorExpr::DirectSum(a, b) => {
            let (xl, xr) = split(a, b, x);
            let (yl, yr) = split(a, b, y);
            Ok(inner(a, &xl, &yl)? + inner(b, &xr, &yr)?)
        }
        _ => {
            let mut acc = czero();
            for (i, a) in x {
                if let Some(b) = y.get(i) {
                    acc = acc + a.clone() * conj(b);
                }
            }
            Ok(acc)
        }
    }
}

/// `T^n x` by repeated application.
pub fn apply_power<S: Scalar>(op: &OperatorExpr<S>, n: u64, x: &Vector<S>, precision: &Precision) -> Result<Vector<S>> {
    precision.check::<S>()?;
    let mut v = x.clone();
    for _ in 0..n {
        v = apply_unchecked(op, &v)?;
    }
    Ok(v)
}

fn check_index<S: Scalar>(op: &OperatorExpr<S>, i: usize) -> Result<()> {
    match op.dim() {
        Dim::Finite(d) if i >= d => Err(Error::IndexOutOfRange { index: i, dim: d }),
        _ => Ok(()),
    }
}

/// `<T^n e_k, e_l>`, structurally wherever the variant allows.
pub fn matrix_element_power<S: Scalar>(op: &OperatorExpr<S>, n: u64, k: usize, l: usize) -> Result<Complex<S>> {
    check_index(op, k)?;
    check_index(op, l)?;
    match op {
        OperatorExpr::WeightedShift(rule) => {
            if l as u64 != k as u64 + n {
                return Ok(czero());
            }
            let p: S = rule.product(k as u64, n)?.to_scalar()?;
            Ok(Complex::new(p, S::zero()))
        }
        OperatorExpr::Diagonal(d) => {
            if k != l {
                return Ok(czero());
            }
            d.entry(k)?.power::<S>(n)
        }
        OperatorExpr::MeasureMultiplication(mu) => {
            let e = i64::try_from(n).map_err(|_| Error::InvalidArgument("power too large".into()))?;
            fourier_coefficient_in::<S>(mu, e + laurent_exponent(k) - laurent_exponent(l))
        }
        OperatorExpr::DirectSum(a, b) => {
            let (sk, jk) = OperatorExpr::route(a, b, k);
            let (sl, jl) = OperatorExpr::route(a, b, l);
            if sk != sl {
                return Ok(czero());
            }
            match sk {
                Side::Left => matrix_element_power(a, n, jk, jl),
                Side::Right => matrix_element_power(b, n, jk, jl),
            }
        }
        OperatorExpr::FiniteMatrix(_) | OperatorExpr::Conjugate { .. } => {
            let mut v = super::basis_vector::<S>(k);
            for _ in 0..n {
                v = apply_unchecked(op, &v)?;
            }
            Ok(v.get(&l).cloned().unwrap_or_else(czero))
        }
    }
}

/// Dense matrix of a finite-dimensional operator.
pub fn to_dense<S: Scalar>(op: &OperatorExpr<S>) -> Result<DenseMatrix<S>> {
    let Dim::Finite(n) = op.dim() else {
        return Err(Error::Unsupported("infinite-dimensional operators have no dense form".into()));
    };
    if let OperatorExpr::FiniteMatrix(m) = op {
        return Ok(m.clone());
    }
    let mut m = DenseMatrix::zeros(n);
    for j in 0..n {
        let col = apply_unchecked(op, &super::basis_vector::<S>(j))?;
        for (i, z) in col {
            m.set(i, j, z);
        }
    }
    Ok(m)
}

/// Dense `f64` matrix of a finite-dimensional operator.
pub fn to_dense_cmat<S: Scalar>(op: &OperatorExpr<S>) -> Result<CMat> {
    Ok(to_dense(op)?.to_cmat())
}

/// `log ||T^n||` for `n = 1..=n_max` (`-inf` for the zero operator).
pub fn power_log_norms<S: Scalar>(op: &OperatorExpr<S>, n_max: u64) -> Result<Vec<f64>> {
    match op {
        OperatorExpr::WeightedShift(rule) => shift_log_norms(rule, n_max),
        OperatorExpr::Diagonal(d) => {
            let l = d.sup_modulus().ln();
            Ok((1..=n_max).map(|n| n as f64 * l).collect())
        }
        OperatorExpr::MeasureMultiplication(mu) => {
            let l = if mu.total_mass() > 0.0 { 0.0 } else { f64::NEG_INFINITY };
            Ok(vec![l; n_max as usize])
        }
        OperatorExpr::DirectSum(a, b) if !op.dim().is_finite() => {
            let la = power_log_norms(a, n_max)?;
            let lb = power_log_norms(b, n_max)?;
            Ok(la.into_iter().zip(lb).map(|(x, y)| x.max(y)).collect())
        }
        _ => {
            let m = to_dense_cmat(op)?;
            let mut p = m.clone();
            let mut out = Vec::with_capacity(n_max as usize);
            for _ in 0..n_max {
                out.push(op_norm(&p).ln());
                p = &p * &m;
            }
            Ok(out)
        }
    }
}
