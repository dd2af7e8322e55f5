//! Square complex matrices over any [`Scalar`] field.

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{conj, norm_sqr, Scalar, ScalarRepr};

/// Row-major square matrix with entries in `Complex<S>`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<S: Scalar> {
    n: usize,
    data: Vec<Complex<S>>,
}

fn czero<S: Scalar>() -> Complex<S> {
    Complex::new(S::zero(), S::zero())
}

fn cone<S: Scalar>() -> Complex<S> {
    Complex::new(S::one(), S::zero())
}

impl<S: Scalar> DenseMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![czero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = cone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex<S>>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn from_real_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        Self::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| Complex::new(x, S::zero())).collect())
                .collect(),
        )
    }

    pub fn diagonal(entries: Vec<Complex<S>>) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n);
        for (i, e) in entries.into_iter().enumerate() {
            m.data[i * n + i] = e;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Complex<S> {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex<S>) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<Complex<S>>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &[Complex<S>]) -> Vec<Complex<S>> {
        (0..self.n)
            .map(|i| {
                let mut acc = czero();
                for (j, xj) in x.iter().enumerate() {
                    acc = acc + self.get(i, j).clone() * xj.clone();
                }
                acc
            })
            .collect()
    }

    /// `M* x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex<S>]) -> Vec<Complex<S>> {
        (0..self.n)
            .map(|j| {
                let mut acc = czero();
                for (i, xi) in x.iter().enumerate() {
                    acc = acc + conj(self.get(i, j)) * xi.clone();
                }
                acc
            })
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.re == S::zero() && a.im == S::zero() {
                    continue;
                }
                for j in 0..n {
                    let v = out.data[i * n + j].clone() + a.clone() * other.get(k, j).clone();
                    out.data[i * n + j] = v;
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = conj(self.get(i, j));
            }
        }
        out
    }

    /// `M^k` by repeated squaring.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut result = Self::identity(self.n);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base).expect("same dimension");
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base).expect("same dimension");
            }
        }
        result
    }

    /// Gauss-Jordan inverse; pivots on the largest modulus.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .filter(|&r| norm_sqr(a.get(r, col)) != S::zero())
                .max_by(|&r1, &r2| {
                    norm_sqr(a.get(r1, col))
                        .partial_cmp(&norm_sqr(a.get(r2, col)))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .ok_or_else(|| Error::InvalidOperator("matrix is singular".into()))?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a.get(col, col).clone();
            for j in 0..n {
                a.data[col * n + j] = a.data[col * n + j].clone() / p.clone();
                inv.data[col * n + j] = inv.data[col * n + j].clone() / p.clone();
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.re == S::zero() && f.im == S::zero() {
                    continue;
                }
                for j in 0..n {
                    let av = a.data[r * n + j].clone() - f.clone() * a.data[col * n + j].clone();
                    a.data[r * n + j] = av;
                    let iv = inv.data[r * n + j].clone() - f.clone() * inv.data[col * n + j].clone();
                    inv.data[r * n + j] = iv;
                }
            }
        }
        Ok(inv)
    }

    pub fn to_cmat(&self) -> CMat {
        CMat::from_fn(self.n, self.n, |i, j| {
            let z = self.get(i, j);
            Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())
        })
    }

    pub fn from_cmat(m: &CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)];
                out.set(i, j, Complex::new(S::from_f64_lossy(z.re), S::from_f64_lossy(z.im)));
            }
        }
        Ok(out)
    }
}

/// JSON entry: a real scalar or `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum EntryRepr {
    Real(ScalarRepr),
    Complex([ScalarRepr; 2]),
}

impl<S: Scalar> Serialize for DenseMatrix<S> {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        let rows: Vec<Vec<EntryRepr>> = self
            .rows()
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|z| {
                        if z.im == S::zero() {
                            EntryRepr::Real(z.re.to_repr())
                        } else {
                            EntryRepr::Complex([z.re.to_repr(), z.im.to_repr()])
                        }
                    })
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for DenseMatrix<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<EntryRepr>>::deserialize(d)?;
        let conv = |e: &EntryRepr| -> Result<Complex<S>> {
            Ok(match e {
                EntryRepr::Real(r) => Complex::new(S::from_repr(r)?, S::zero()),
                EntryRepr::Complex([a, b]) => Complex::new(S::from_repr(a)?, S::from_repr(b)?),
            })
        };
        let rows = rows
            .iter()
            .map(|r| r.iter().map(conv).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        DenseMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}
