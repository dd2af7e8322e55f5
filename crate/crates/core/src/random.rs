//! Seeded random constructions with known ground truth.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, cdiag, op_norm, schur, CMat};

/// Default seed for reproducible suites.
pub const DEFAULT_SEED: u64 = 0x5EED_2024;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for trial `i` of a suite seeded with `seed`.
pub fn trial_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(i);
    r
}

pub fn gaussian(rng: &mut impl Rng, n: usize, m: usize) -> CMat {
    CMat::from_fn(n, m, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn unitary(rng: &mut impl Rng, n: usize) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let (q, r) = gaussian(rng, n, n).qr().unpack();
    let phases: Vec<Complex64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) }
        })
        .collect();
    q * cdiag(&phases)
}

/// `U diag(sigma) V` with singular values in `[1, cond]`.
pub fn conditioned(rng: &mut impl Rng, n: usize, cond: f64) -> CMat {
    let sig: Vec<Complex64> = (0..n).map(|_| c(rng.random_range(1.0..=cond), 0.0)).collect();
    unitary(rng, n) * cdiag(&sig) * unitary(rng, n)
}

/// Random square matrix rescaled to spectral radius `rho`.
pub fn with_spectral_radius(rng: &mut impl Rng, n: usize, rho: f64) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let g = gaussian(rng, n, n);
    let r = spectral_radius(&g);
    if r == 0.0 { g * c(0.0, 0.0) } else { g * c(rho / r, 0.0) }
}

pub fn spectral_radius(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    schur(m)
        .map(|(_, t)| t.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max))
        .unwrap_or_else(|| op_norm(m))
}

/// `T = S (I_k (+) L) S^{-1}` with ground-truth limit projection `P = S (I_k (+) 0) S^{-1}`.
#[derive(Clone, Debug)]
pub struct Constructed {
    pub t: CMat,
    pub p: CMat,
    pub s: CMat,
    pub k: usize,
    pub rho_l: f64,
    /// `S` unitary, so `P` is an orthogonal projection.
    pub unitary_similarity: bool,
}

pub fn constructed_convergent(rng: &mut impl Rng, n: usize, k: usize, unitary_similarity: bool, rho_max: f64) -> Constructed {
    assert!(k <= n);
    let rho_l = rng.random_range(0.0..rho_max);
    let l = with_spectral_radius(rng, n - k, rho_l);
    let s = if unitary_similarity { unitary(rng, n) } else { conditioned(rng, n, 4.0) };
    let s_inv = s.clone().try_inverse().expect("conditioned similarity is invertible");
    let mut inner = CMat::zeros(n, n);
    let mut proj = CMat::zeros(n, n);
    for i in 0..k {
        inner[(i, i)] = c(1.0, 0.0);
        proj[(i, i)] = c(1.0, 0.0);
    }
    inner.view_mut((k, k), (n - k, n - k)).copy_from(&l);
    Constructed {
        t: &s * inner * &s_inv,
        p: &s * proj * &s_inv,
        s,
        k,
        rho_l,
        unitary_similarity,
    }
}

/// Idempotent of rank `k`: orthogonal when `oblique` is false, otherwise
/// conjugated by a similarity with condition number at most 4 and a
/// self-adjointness defect of at least `1e-2`.
pub fn idempotent(rng: &mut impl Rng, n: usize, k: usize, oblique: bool) -> CMat {
    let mut d = CMat::zeros(n, n);
    for i in 0..k {
        d[(i, i)] = c(1.0, 0.0);
    }
    if !oblique {
        let u = unitary(rng, n);
        return &u * d * u.adjoint();
    }
    loop {
        let s = conditioned(rng, n, 4.0);
        let p = &s * &d * s.clone().try_inverse().expect("invertible");
        if op_norm(&(&p - p.adjoint())) >= 1e-2 {
            return p;
        }
    }
}

/// Normal matrix `U diag(z) U*` with the given eigenvalues.
pub fn normal_with(rng: &mut impl Rng, eigenvalues: &[Complex64]) -> CMat {
    let u = unitary(rng, eigenvalues.len());
    &u * cdiag(eigenvalues) * u.adjoint()
}

/// Eigenvalue of modulus `r` at a uniform angle.
pub fn point_on_circle(rng: &mut impl Rng, r: f64) -> Complex64 {
    Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Random spectrum for the normal-matrix suites: mostly contractions, with
/// unimodular atoms (sometimes exactly 1) and occasional eigenvalues outside the disk.
pub fn normal_spectrum(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    let mode = rng.random_range(0..4);
    (0..n)
        .map(|_| {
            let radius = match (mode, rng.random_range(0..4)) {
                (1, 0) => return c(1.0, 0.0),
                (2, 0) => 1.0,
                (3, 0) => rng.random_range(1.05..2.0),
                (3, _) => rng.random_range(0.0..0.95),
                _ => rng.random_range(0.0..0.95),
            };
            point_on_circle(rng, radius)
        })
        .collect()
}
