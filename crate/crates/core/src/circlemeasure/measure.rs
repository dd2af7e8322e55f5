//! Measures on the unit circle stored in decomposed form, and their Fourier
//! coefficients `mu^(k) = int z^k dmu(z)`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, reduce_turns, turns_sin_cos, unit_root, Rat, Scalar};

/// A point of the circle as a number of turns, `z = e^{2 pi i t}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Rational(Ratio<i64>),
    Real(f64),
}

impl Angle {
    pub fn rational(p: i64, q: i64) -> Self {
        Angle::Rational(reduce_turns(&Ratio::new(p, q)))
    }

    pub fn turns(&self) -> f64 {
        match self {
            Angle::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Angle::Real(x) => *x,
        }
    }

    /// `z^k = e^{2 pi i k t}`.
    pub fn power(&self, k: i64) -> Complex<f64> {
        match self {
            Angle::Rational(r) => {
                let d = *r.denom() as i128;
                let n = (*r.numer() as i128 * k as i128).rem_euclid(d);
                let (s, c) = turns_sin_cos(&Ratio::new(n as i64, d as i64));
                Complex::new(c, s)
            }
            Angle::Real(x) => {
                let t = (x * k as f64).rem_euclid(1.0);
                Complex::from_polar(1.0, TAU * t)
            }
        }
    }

    /// Angle is exactly `0 mod 1`.
    pub fn is_zero(&self) -> bool {
        match self {
            Angle::Rational(r) => reduce_turns(r).is_zero(),
            Angle::Real(x) => x.rem_euclid(1.0) == 0.0,
        }
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Angle::Rational(r) if r.is_integer() => s.serialize_f64(*r.numer() as f64),
            Angle::Rational(r) => s.serialize_str(&format!("{}/{}", r.numer(), r.denom())),
            Angle::Real(x) => s.serialize_f64(*x),
        }
    }
}

fn rational_angle(text: &str) -> Option<Ratio<i64>> {
    let q = parse_rational(text).ok()?;
    Some(reduce_turns(&Ratio::new(q.numer().to_i64()?, q.denom().to_i64()?)))
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct AngleVisitor;
        impl Visitor<'_> for AngleVisitor {
            type Value = Angle;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an angle in turns: a number or \"p/q\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Angle, E> {
                Ok(rational_angle(&format!("{v}"))
                    .filter(|r| *r.denom() <= 1_000_000_000)
                    .map(Angle::Rational)
                    .unwrap_or(Angle::Real(v)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Angle, E> {
                Ok(Angle::rational(v, 1))
            }
            fn visit_u64<E: de::Error>(self, _v: u64) -> std::result::Result<Angle, E> {
                Ok(Angle::rational(0, 1))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Angle, E> {
                rational_angle(v)
                    .map(Angle::Rational)
                    .ok_or_else(|| E::custom(format!("bad angle {v:?}")))
            }
        }
        d.deserialize_any(AngleVisitor)
    }
}

/// Point mass `(angle, mass)`, written in JSON as a two-element array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom(pub Angle, pub Rat);

/// A real or complex rational coefficient: `1`, `"1/2"` or `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Real(Rat),
    Complex([Rat; 2]),
}

impl Coeff {
    pub fn re_im(&self) -> (Rat, Rat) {
        match self {
            Coeff::Real(r) => (r.clone(), Rat::integer(0)),
            Coeff::Complex([a, b]) => (a.clone(), b.clone()),
        }
    }

    pub fn to_complex(&self) -> Complex<f64> {
        let (a, b) = self.re_im();
        Complex::new(a.to_f64(), b.to_f64())
    }
}

/// Absolutely continuous part with density `lebesgue + sum_j c_j z^j` against
/// normalized Lebesgue measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Density {
    #[serde(default)]
    pub coeffs: BTreeMap<i64, Coeff>,
    #[serde(default = "zero_rat")]
    pub lebesgue: Rat,
}

fn zero_rat() -> Rat {
    Rat::integer(0)
}

fn one_rat() -> Rat {
    Rat::integer(1)
}

impl Density {
    pub fn lebesgue(mass: Rat) -> Self {
        Density {
            coeffs: BTreeMap::new(),
            lebesgue: mass,
        }
    }

    /// Largest `|j|` with a nonzero coefficient.
    pub fn degree(&self) -> u64 {
        self.coeffs
            .iter()
            .filter(|(_, c)| {
                let (a, b) = c.re_im();
                !a.0.is_zero() || !b.0.is_zero()
            })
            .map(|(j, _)| j.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// `int z^k p dm = c_{-k} + lebesgue [k = 0]`, exactly.
    pub fn coefficient_exact(&self, k: i64) -> (Rat, Rat) {
        let (mut re, im) = self
            .coeffs
            .get(&-k)
            .map(Coeff::re_im)
            .unwrap_or((Rat::integer(0), Rat::integer(0)));
        if k == 0 {
            re = Rat(&re.0 + &self.lebesgue.0);
        }
        (re, im)
    }

    pub fn value_at(&self, t: f64) -> Complex<f64> {
        let mut v = Complex::new(self.lebesgue.to_f64(), 0.0);
        for (j, c) in &self.coeffs {
            v += c.to_complex() * Complex::from_polar(1.0, TAU * (*j as f64) * t);
        }
        v
    }
}

/// Self-similar measure of mass `mass`: the law of `sum_m d_m b^{-m}` with
/// digits drawn uniformly from `digits`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilar {
    pub b: u32,
    pub digits: Vec<u32>,
    #[serde(default = "one_rat")]
    pub mass: Rat,
}

impl SelfSimilar {
    pub fn cantor() -> Self {
        SelfSimilar {
            b: 3,
            digits: vec![0, 2],
            mass: Rat::integer(1),
        }
    }

    /// The digit set is all of `{0, ..., b-1}`: Lebesgue measure.
    pub fn is_full(&self) -> bool {
        let mut d = self.digits.clone();
        d.sort_unstable();
        d.dedup();
        d.len() == self.b as usize
    }
}

/// Measure on the circle as atoms + density + self-similar part.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CircleMeasure {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Density>,
    #[serde(default, rename = "selfSimilar", skip_serializing_if = "Option::is_none")]
    pub self_similar: Option<SelfSimilar>,
}

/// A Fourier coefficient with a bound on its truncation error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub value: Complex<f64>,
    pub error: f64,
}

impl Coefficient {
    pub fn abs(&self) -> f64 {
        self.value.norm()
    }
}

/// Target bound on the neglected self-similar phase sum.
const SELF_SIMILAR_ETA: f64 = 1e-17;

impl CircleMeasure {
    pub fn dirac(angle: Angle) -> Self {
        CircleMeasure {
            atoms: vec![Atom(angle, Rat::integer(1))],
            ..Default::default()
        }
    }

    pub fn lebesgue() -> Self {
        CircleMeasure {
            density: Some(Density::lebesgue(Rat::integer(1))),
            ..Default::default()
        }
    }

    pub fn cantor() -> Self {
        CircleMeasure {
            self_similar: Some(SelfSimilar::cantor()),
            ..Default::default()
        }
    }

    pub fn has_atoms(&self) -> bool {
        self.atoms.iter().any(|a| a.1.is_positive())
    }

    pub fn has_density(&self) -> bool {
        self.density
            .as_ref()
            .is_some_and(|d| d.degree() > 0 || !d.lebesgue.0.is_zero())
    }

    pub fn has_self_similar(&self) -> bool {
        self.self_similar.as_ref().is_some_and(|s| s.mass.is_positive())
    }

    /// `mu(T)`.
    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.1.to_f64()).sum();
        let dens = self.density.as_ref().map_or(0.0, |d| d.lebesgue.to_f64());
        let ss = self.self_similar.as_ref().map_or(0.0, |s| s.mass.to_f64());
        atoms + dens + ss
    }

    pub fn validate(&self) -> Result<()> {
        for Atom(a, m) in &self.atoms {
            if !m.is_positive() {
                return Err(Error::InvalidMeasure(format!("atom mass {m} must be positive")));
            }
            if let Angle::Real(x) = a {
                if !x.is_finite() {
                    return Err(Error::InvalidMeasure("atom angle must be finite".into()));
                }
            }
        }
        if let Some(d) = &self.density {
            if d.lebesgue.0 < num_rational::BigRational::zero() {
                return Err(Error::InvalidMeasure("lebesgue component must be nonnegative".into()));
            }
            for (j, c) in &d.coeffs {
                if *j == 0 {
                    let (_, im) = c.re_im();
                    if !im.0.is_zero() {
                        return Err(Error::InvalidMeasure("c_0 must be real".into()));
                    }
                    continue;
                }
                let (a, b) = c.re_im();
                let (a2, b2) = d
                    .coeffs
                    .get(&-j)
                    .map(Coeff::re_im)
                    .unwrap_or((Rat::integer(0), Rat::integer(0)));
                if a != a2 || b.0 != -b2.0.clone() {
                    return Err(Error::InvalidMeasure(format!(
                        "density is not real: c_{{-{j}}} != conj(c_{j})"
                    )));
                }
            }
            let grid = 1024.max(16 * d.degree() as usize);
            let scale: f64 = d.coeffs.values().map(|c| c.to_complex().norm()).sum::<f64>() + d.lebesgue.to_f64();
            for i in 0..grid {
                let v = d.value_at(i as f64 / grid as f64).re;
                if v < -1e-12 * scale.max(1.0) {
                    return Err(Error::InvalidMeasure(format!(
                        "density is negative ({v}) at t = {}/{grid}",
                        i
                    )));
                }
            }
        }
        if let Some(s) = &self.self_similar {
            if s.b < 2 {
                return Err(Error::InvalidMeasure(format!("base b = {} must be at least 2", s.b)));
            }
            if s.digits.is_empty() || s.digits.iter().any(|&d| d >= s.b) {
                return Err(Error::InvalidMeasure("digits must be a nonempty subset of 0..b".into()));
            }
            if !s.mass.is_positive() {
                return Err(Error::InvalidMeasure("self-similar mass must be positive".into()));
            }
        }
        Ok(())
    }

    /// Singular flags: atoms are singular; a self-similar part is taken to
    /// be singular continuous when `|D| < b` (not proven here).
    pub fn self_similar_is_singular(&self) -> bool {
        self.self_similar.as_ref().is_some_and(|s| !s.is_full())
    }
}

/// `int z^k dmu`.
pub fn fourier_coefficient(mu: &CircleMeasure, k: i64) -> Coefficient {
    let mut value = Complex::new(0.0, 0.0);
    for Atom(a, m) in &mu.atoms {
        value += a.power(k) * m.to_f64();
    }
    if let Some(d) = &mu.density {
        let (re, im) = d.coefficient_exact(k);
        value += Complex::new(re.to_f64(), im.to_f64());
    }
    let mut error = 0.0;
    if let Some(s) = &mu.self_similar {
        let c = self_similar_coefficient(s, k);
        value += c.value;
        error += c.error;
    }
    Coefficient { value, error }
}

/// `mass * prod_{m >= 1} phi(k / b^m)` with `phi(u) = |D|^{-1} sum_d e^{2 pi i u d}`.
pub fn self_similar_coefficient(s: &SelfSimilar, k: i64) -> Coefficient {
    let mass = s.mass.to_f64();
    if k == 0 {
        return Coefficient {
            value: Complex::new(mass, 0.0),
            error: 0.0,
        };
    }
    let b = s.b as i128;
    let d_max = *s.digits.iter().max().unwrap_or(&0) as f64;
    let nd = s.digits.len() as f64;
    let k_abs = (k as i128).abs() as f64;
    let mut prod = Complex::new(1.0, 0.0);
    let mut bm: i128 = 1;
    loop {
        let Some(next) = bm.checked_mul(b) else {
            break;
        };
        bm = next;
        let mut phi = Complex::new(0.0, 0.0);
        for &d in &s.digits {
            let r = (k as i128 * d as i128).rem_euclid(bm);
            let t = r as f64 / bm as f64;
            phi += Complex::from_polar(1.0, TAU * t);
        }
        prod *= phi / nd;
        let eta = TAU * k_abs * d_max / (bm as f64 * (b as f64 - 1.0));
        if eta <= SELF_SIMILAR_ETA || prod.norm() == 0.0 {
            break;
        }
    }
    let eta = TAU * k_abs * d_max / (bm as f64 * (b as f64 - 1.0));
    let error = if prod.norm() == 0.0 { 0.0 } else { mass * eta.exp_m1() };
    Coefficient {
        value: prod * mass,
        error: error.min(mass),
    }
}

/// Exact coefficient in a scalar field; self-similar parts and irrational
/// angles are only available in floating point.
pub fn fourier_coefficient_in<S: Scalar>(mu: &CircleMeasure, k: i64) -> Result<Complex<S>> {
    if !S::EXACT {
        let c = fourier_coefficient(mu, k).value;
        return Ok(Complex::new(S::from_f64_lossy(c.re), S::from_f64_lossy(c.im)));
    }
    if mu.has_self_similar() {
        return Err(Error::NotExact("self-similar Fourier coefficients are transcendental".into()));
    }
    let mut acc = Complex::new(S::zero(), S::zero());
    for Atom(a, m) in &mu.atoms {
        let Angle::Rational(r) = a else {
            return Err(Error::NotExact("real-valued atom angle".into()));
        };
        let z = unit_root::<S>(&(*r * k))?;
        let mass = S::from_rational(&m.0);
        acc = acc + Complex::new(z.re * mass.clone(), z.im * mass);
    }
    if let Some(d) = &mu.density {
        let (re, im) = d.coefficient_exact(k);
        acc = acc + Complex::new(S::from_rational(&re.0), S::from_rational(&im.0));
    }
    Ok(acc)
}

/// `<U^n f, g>` for `U` multiplication by `z` on `L^2(mu)` and trigonometric
/// polynomials `f = sum f_p z^p`, `g = sum g_q z^q`.
pub fn multiplication_matrix_elements(
    mu: &CircleMeasure,
    n: i64,
    f: &[(i64, Complex<f64>)],
    g: &[(i64, Complex<f64>)],
) -> Coefficient {
    let mut value = Complex::new(0.0, 0.0);
    let mut error = 0.0;
    for (p, fp) in f {
        for (q, gq) in g {
            let c = fourier_coefficient(mu, n + p - q);
            let w = fp * gq.conj();
            value += w * c.value;
            error += w.norm() * c.error;
        }
    }
    Coefficient { value, error }
}

/// Coefficient trace as CSV with columns `k,re,im,abs`.
pub fn coefficients_csv(rows: &[(i64, Coefficient)]) -> String {
    let mut out = String::from("k,re,im,abs\n");
    for (k, c) in rows {
        out.push_str(&format!("{k},{:e},{:e},{:e}\n", c.value.re, c.value.im, c.abs()));
    }
    out
}

/// Total mass as an exact rational.
pub fn total_mass_exact(mu: &CircleMeasure) -> num_rational::BigRational {
    let mut m = num_rational::BigRational::zero();
    for a in &mu.atoms {
        m += &a.1 .0;
    }
    if let Some(d) = &mu.density {
        m += &d.lebesgue.0;
    }
    if let Some(s) = &mu.self_similar {
        m += &s.mass.0;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn dirac_and_lebesgue() {
        let d = CircleMeasure::dirac(Angle::rational(0, 1));
        for k in [-5, 0, 3, 1000] {
            assert_eq!(fourier_coefficient(&d, k).value, Complex::new(1.0, 0.0));
        }
        let l = CircleMeasure::lebesgue();
        assert_eq!(fourier_coefficient(&l, 0).value, Complex::new(1.0, 0.0));
        for k in [-3, 1, 2, 77] {
            assert_eq!(fourier_coefficient(&l, k).value, Complex::new(0.0, 0.0));
        }
    }

    #[test]
    fn cantor_invariance() {
        let c = CircleMeasure::cantor();
        let one = fourier_coefficient(&c, 1);
        assert!(one.abs() > 0.2);
        for m in 0..=12u32 {
            let v = fourier_coefficient(&c, 3i64.pow(m));
            assert!((v.value - one.value).norm() < 1e-10, "m = {m}");
            assert!(v.error < 1e-15);
        }
        for k in 1..50 {
            let a = fourier_coefficient(&c, k).value;
            let b = fourier_coefficient(&c, 3 * k).value;
            assert!((a - b).norm() < 1e-12);
            let neg = fourier_coefficient(&c, -k).value;
            assert!((neg - a.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn cantor_coefficient_against_product_oracle() {
        // int e^{2 pi i t} dC(t) = e^{i pi} prod_m cos(2 pi / 3^m)
        let mut p = 1.0f64;
        for m in 1..60 {
            p *= (TAU / 3f64.powi(m)).cos();
        }
        let want = Complex::new(-p, 0.0);
        let got = fourier_coefficient(&CircleMeasure::cantor(), 1).value;
        assert!((got - want).norm() < 1e-14, "{got} vs {want}");
    }

    #[test]
    fn json_shape() {
        let mu: CircleMeasure = serde_json::from_str(
            r#"{"atoms": [[0.25, 0.5], ["1/3", "1/4"]],
                "density": {"coeffs": {"1": [0.125, 0], "-1": [0.125, 0]}, "lebesgue": 0.25},
                "selfSimilar": {"b": 3, "digits": [0, 2]}}"#,
        )
        .unwrap();
        assert_eq!(mu.atoms[0].0, Angle::rational(1, 4));
        assert_eq!(mu.atoms[1].0, Angle::rational(1, 3));
        mu.validate().unwrap();
        let back: CircleMeasure = serde_json::from_str(&serde_json::to_string(&mu).unwrap()).unwrap();
        assert_eq!(back, mu);
    }

    #[test]
    fn rejects_negative_density() {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(1, Coeff::Real(Rat::integer(1)));
        coeffs.insert(-1, Coeff::Real(Rat::integer(1)));
        let mu = CircleMeasure {
            density: Some(Density {
                coeffs,
                lebesgue: Rat::integer(1),
            }),
            ..Default::default()
        };
        assert!(mu.validate().is_err());
    }

    #[test]
    fn exact_coefficients() {
        let mu = CircleMeasure {
            atoms: vec![Atom(Angle::rational(1, 4), Rat::new(1, 2)), Atom(Angle::rational(0, 1), Rat::new(1, 2))],
            ..Default::default()
        };
        let c: Complex<BigRational> = fourier_coefficient_in(&mu, 1).unwrap();
        assert_eq!(c, Complex::new(BigRational::new(1.into(), 2.into()), BigRational::new(1.into(), 2.into())));
        assert!(fourier_coefficient_in::<BigRational>(&CircleMeasure::cantor(), 1).is_err());
    }

    #[test]
    fn matrix_elements_of_characters() {
        let l = CircleMeasure::lebesgue();
        let one = [(0, Complex::new(1.0, 0.0))];
        let z = [(1, Complex::new(1.0, 0.0))];
        for n in 0..5 {
            let v = multiplication_matrix_elements(&l, n, &one, &z).value;
            assert_eq!(v.re, if n == 1 { 1.0 } else { 0.0 });
        }
        let d = CircleMeasure::dirac(Angle::rational(0, 1));
        let f = [(0, Complex::new(1.0, 0.0)), (2, Complex::new(0.0, 2.0))];
        let g = [(1, Complex::new(3.0, 0.0))];
        for n in 0..5 {
            let v = multiplication_matrix_elements(&d, n, &f, &g).value;
            assert!((v - Complex::new(3.0, 6.0)).norm() < 1e-14);
        }
    }
}
