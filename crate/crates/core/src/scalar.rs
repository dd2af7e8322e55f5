//! Scalar fields the operator algebra is generic over.
//!
//! Real scalars come in three flavours: IEEE floats (`f32`, `f64`), the
//! double-double [`TwoFloat`] for extended precision, and exact
//! [`BigRational`]. Complex entries are `num_complex::Complex<S>`.
//!
//! Positive products of weights get their own type, [`PosReal`], which keeps
//! the exact square whenever every factor had a rational square and falls back
//! to a natural logarithm otherwise.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// JSON representation of a scalar: a plain number, or a string such as
/// `"3/7"`, `"0.125"` or `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarRepr {
    Number(f64),
    Text(String),
}

/// A real scalar field usable as the coefficient type of an operator.
pub trait Scalar:
    Clone + fmt::Debug + PartialEq + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    /// Arithmetic in this field is exact.
    const EXACT: bool;
    const NAME: &'static str;

    fn from_f64_lossy(x: f64) -> Self;
    fn from_rational(q: &BigRational) -> Self;
    fn to_f64_lossy(&self) -> f64;
    /// Square root if it exists in this field.
    fn checked_sqrt(&self) -> Option<Self>;
    fn to_repr(&self) -> ScalarRepr;
    fn from_repr(repr: &ScalarRepr) -> Result<Self>;

    fn magnitude(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const NAME: &'static str = "f64";

    fn from_f64_lossy(x: f64) -> Self {
        x
    }
    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
    fn checked_sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }
    fn to_repr(&self) -> ScalarRepr {
        float_repr(*self)
    }
    fn from_repr(repr: &ScalarRepr) -> Result<Self> {
        repr_to_f64(repr)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    const NAME: &'static str = "f32";

    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }
    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q) as f32
    }
    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
    fn checked_sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }
    fn to_repr(&self) -> ScalarRepr {
        float_repr(*self as f64)
    }
    fn from_repr(repr: &ScalarRepr) -> Result<Self> {
        repr_to_f64(repr).map(|x| x as f32)
    }
}

impl Scalar for TwoFloat {
    const EXACT: bool = false;
    const NAME: &'static str = "twofloat";

    fn from_f64_lossy(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn from_rational(q: &BigRational) -> Self {
        bigint_to_twofloat(q.numer()) / bigint_to_twofloat(q.denom())
    }
    fn to_f64_lossy(&self) -> f64 {
        self.hi() + self.lo()
    }
    fn checked_sqrt(&self) -> Option<Self> {
        (*self >= TwoFloat::from(0.0)).then(|| self.sqrt())
    }
    fn to_repr(&self) -> ScalarRepr {
        // hi and lo are both binary floats, so their sum is an exact rational.
        match (
            BigRational::from_f64(self.hi()),
            BigRational::from_f64(self.lo()),
        ) {
            (Some(h), Some(l)) => rational_repr(&(h + l)),
            _ => float_repr(self.hi()),
        }
    }
    fn from_repr(repr: &ScalarRepr) -> Result<Self> {
        match repr {
            ScalarRepr::Number(x) => Ok(TwoFloat::from(*x)),
            ScalarRepr::Text(s) => Ok(Self::from_rational(&parse_rational(s)?)),
        }
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const NAME: &'static str = "rational";

    fn from_f64_lossy(x: f64) -> Self {
        BigRational::from_f64(x).unwrap_or_else(BigRational::zero)
    }
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn to_f64_lossy(&self) -> f64 {
        rational_to_f64(self)
    }
    fn checked_sqrt(&self) -> Option<Self> {
        rational_sqrt(self)
    }
    fn to_repr(&self) -> ScalarRepr {
        rational_repr(self)
    }
    fn from_repr(repr: &ScalarRepr) -> Result<Self> {
        match repr {
            ScalarRepr::Number(x) => parse_rational(&format!("{x}")),
            ScalarRepr::Text(s) => parse_rational(s),
        }
    }
}

fn float_repr(x: f64) -> ScalarRepr {
    if x.is_finite() {
        ScalarRepr::Number(x)
    } else if x.is_nan() {
        ScalarRepr::Text("nan".into())
    } else if x > 0.0 {
        ScalarRepr::Text("inf".into())
    } else {
        ScalarRepr::Text("-inf".into())
    }
}

fn repr_to_f64(repr: &ScalarRepr) -> Result<f64> {
    match repr {
        ScalarRepr::Number(x) => Ok(*x),
        ScalarRepr::Text(s) => match s.trim() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            t => parse_rational(t).map(|q| rational_to_f64(&q)),
        },
    }
}

fn rational_repr(q: &BigRational) -> ScalarRepr {
    if q.is_integer() {
        if let Some(v) = q.numer().to_i64() {
            if v.unsigned_abs() < (1u64 << 53) {
                return ScalarRepr::Number(v as f64);
            }
        }
    }
    ScalarRepr::Text(format!("{}/{}", q.numer(), q.denom()))
}

fn bigint_to_twofloat(n: &BigInt) -> TwoFloat {
    let hi = n.to_f64().unwrap_or(f64::INFINITY);
    if !hi.is_finite() {
        return TwoFloat::from(hi);
    }
    let rem = n - BigInt::from_f64(hi).unwrap_or_default();
    let lo = rem.to_f64().unwrap_or(0.0);
    TwoFloat::from(hi) + TwoFloat::from(lo)
}

/// Parses `"p/q"`, a decimal such as `"-1.25e-3"`, or an integer.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        q = -q;
    }
    Ok(q)
}

/// Exact square root of a nonnegative rational, when it is rational.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| BigRational::new(n, d))
}

/// Nearest-ish `f64` for a rational of any size.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() && (v != 0.0 || q.is_zero()) {
            return v;
        }
    }
    let sign = if q.is_negative() { -1.0 } else { 1.0 };
    sign * ln_rational(&q.abs()).exp()
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().map(f64::ln).unwrap_or(f64::NAN);
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().map(f64::ln).unwrap_or(f64::NAN) + shift as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of a positive rational without overflow.
pub fn ln_rational(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n > 0.0 && d > 0.0 {
            return (n / d).ln();
        }
    }
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

/// Exact rational parameter that serializes as a JSON number when integral
/// and as `"p/q"` otherwise. JSON decimals are read back exactly.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(pub BigRational);

impl Rat {
    pub fn new(p: i64, q: i64) -> Self {
        Rat(BigRational::new(p.into(), q.into()))
    }
    pub fn integer(p: i64) -> Self {
        Rat(BigRational::from_integer(p.into()))
    }
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }
    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }
}

impl From<BigRational> for Rat {
    fn from(q: BigRational) -> Self {
        Rat(q)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Rat {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        rational_repr(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ScalarRepr::deserialize(d)?;
        BigRational::from_repr(&repr)
            .map(Rat)
            .map_err(serde::de::Error::custom)
    }
}

/// A positive real number carried either exactly, through its rational
/// square, or approximately, through its natural logarithm.
///
/// Products of exact values stay exact; anything touching a logarithm
/// becomes logarithmic.
#[derive(Clone, Debug, PartialEq)]
pub enum PosReal {
    /// The value is the positive square root of this rational.
    Exact(BigRational),
    /// The value is `exp` of this.
    Log(f64),
}

impl PosReal {
    pub fn one() -> Self {
        PosReal::Exact(BigRational::one())
    }

    pub fn from_square(square: BigRational) -> Result<Self> {
        if !square.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "square {square} is not positive"
            )));
        }
        Ok(PosReal::Exact(square))
    }

    pub fn from_rational(value: &BigRational) -> Result<Self> {
        if !value.is_positive() {
            return Err(Error::InvalidArgument(format!("{value} is not positive")));
        }
        Ok(PosReal::Exact(value * value))
    }

    pub fn from_log(log: f64) -> Self {
        PosReal::Log(log)
    }

    pub fn mul(&self, other: &PosReal) -> PosReal {
        match (self, other) {
            (PosReal::Exact(a), PosReal::Exact(b)) => PosReal::Exact(a * b),
            _ => PosReal::Log(self.ln() + other.ln()),
        }
    }

    pub fn recip(&self) -> PosReal {
        match self {
            PosReal::Exact(a) => PosReal::Exact(a.recip()),
            PosReal::Log(l) => PosReal::Log(-l),
        }
    }

    pub fn powu(&self, k: u64) -> PosReal {
        match self {
            PosReal::Exact(a) if k <= u32::MAX as u64 => {
                PosReal::Exact(num_traits::pow(a.clone(), k as usize))
            }
            _ => PosReal::Log(self.ln() * k as f64),
        }
    }

    pub fn ln(&self) -> f64 {
        match self {
            PosReal::Exact(a) => 0.5 * ln_rational(a),
            PosReal::Log(l) => *l,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            PosReal::Exact(a) => match a.to_f64() {
                Some(v) if v.is_normal() => v.sqrt(),
                _ => self.ln().exp(),
            },
            PosReal::Log(l) => l.exp(),
        }
    }

    pub fn square(&self) -> Option<&BigRational> {
        match self {
            PosReal::Exact(a) => Some(a),
            PosReal::Log(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, PosReal::Exact(_))
    }

    pub fn is_exactly_one(&self) -> bool {
        matches!(self, PosReal::Exact(a) if a.is_one())
    }

    /// Compares values exactly when both are exact, by logarithm otherwise.
    pub fn cmp_value(&self, other: &PosReal) -> Ordering {
        match (self, other) {
            (PosReal::Exact(a), PosReal::Exact(b)) => a.cmp(b),
            _ => self
                .ln()
                .partial_cmp(&other.ln())
                .unwrap_or(Ordering::Equal),
        }
    }

    /// Converts into a field element; exact fields need a rational root.
    pub fn to_scalar<S: Scalar>(&self) -> Result<S> {
        match self {
            PosReal::Exact(a) if S::EXACT => rational_sqrt(a)
                .map(|r| S::from_rational(&r))
                .ok_or_else(|| Error::NotExact(format!("sqrt({a}) is irrational"))),
            PosReal::Log(l) if S::EXACT => Err(Error::NotExact(format!(
                "exp({l}) is only known in log-space"
            ))),
            PosReal::Exact(a) => match a.to_f64() {
                Some(v) if v.is_normal() => S::from_rational(a)
                    .checked_sqrt()
                    .ok_or_else(|| Error::NotExact("negative square".into())),
                _ => Ok(S::from_f64_lossy(self.to_f64())),
            },
            PosReal::Log(_) => Ok(S::from_f64_lossy(self.to_f64())),
        }
    }
}

/// Complex conjugate for any scalar field.
pub fn conj<S: Scalar>(z: &Complex<S>) -> Complex<S> {
    Complex::new(z.re.clone(), -z.im.clone())
}

/// `|z|^2` as an element of the field.
pub fn norm_sqr<S: Scalar>(z: &Complex<S>) -> S {
    z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone()
}

/// `e^{2 pi i t}` for a rational number of turns; exact for quarter turns.
pub fn unit_root<S: Scalar>(turns: &num_rational::Ratio<i64>) -> Result<Complex<S>> {
    let t = reduce_turns(turns);
    let quarter = |n: i64| num_rational::Ratio::new(n, 4);
    let (o, z) = (S::one(), S::zero());
    if t == quarter(0) {
        Ok(Complex::new(o, z))
    } else if t == quarter(1) {
        Ok(Complex::new(z, o))
    } else if t == quarter(2) {
        Ok(Complex::new(-o, z))
    } else if t == quarter(3) {
        Ok(Complex::new(z, -o))
    } else if S::EXACT {
        Err(Error::NotExact(format!("e^(2 pi i {t}) is not rational")))
    } else {
        let (s, c) = turns_sin_cos(&t);
        Ok(Complex::new(S::from_f64_lossy(c), S::from_f64_lossy(s)))
    }
}

/// Reduces a rational angle (in turns) into `[0, 1)`.
pub fn reduce_turns(t: &num_rational::Ratio<i64>) -> num_rational::Ratio<i64> {
    let (n, d) = (*t.numer() as i128, *t.denom() as i128);
    let r = n.rem_euclid(d);
    num_rational::Ratio::new(r as i64, d as i64)
}

/// `(sin, cos)` of `2 pi t` for a rational `t`, reduced before rounding.
pub fn turns_sin_cos(t: &num_rational::Ratio<i64>) -> (f64, f64) {
    let r = reduce_turns(t);
    let mut x = *r.numer() as f64 / *r.denom() as f64;
    if x > 0.5 {
        x -= 1.0;
    }
    (std::f64::consts::TAU * x).sin_cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_rational("-3/6").unwrap(), BigRational::new((-1).into(), 2.into()));
        assert_eq!(parse_rational("1.5e2").unwrap(), BigRational::from_integer(150.into()));
        assert_eq!(parse_rational("12").unwrap(), BigRational::from_integer(12.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn json_numbers_read_back_as_short_decimals() {
        let r: Rat = serde_json::from_str("1.1").unwrap();
        assert_eq!(r, Rat::new(11, 10));
        let back = serde_json::to_string(&r).unwrap();
        assert_eq!(back, "\"11/10\"");
        let three: Rat = serde_json::from_str("3").unwrap();
        assert_eq!(serde_json::to_string(&three).unwrap(), "3.0");
    }

    #[test]
    fn rational_sqrt_only_for_squares() {
        assert_eq!(
            rational_sqrt(&BigRational::new(9.into(), 4.into())),
            Some(BigRational::new(3.into(), 2.into()))
        );
        assert_eq!(rational_sqrt(&BigRational::from_integer(2.into())), None);
    }

    #[test]
    fn posreal_exact_products_cancel() {
        let a = PosReal::from_square(BigRational::new(5.into(), 2.into())).unwrap();
        assert!(a.mul(&a.recip()).is_exactly_one());
        assert!((a.to_f64() - 2.5f64.sqrt()).abs() < 1e-15);
        let big = PosReal::from_square(num_traits::pow(BigRational::from_integer(4.into()), 600)).unwrap();
        assert!((big.ln() - 600.0 * 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn posreal_to_exact_scalar() {
        let a = PosReal::from_square(BigRational::from_integer(4.into())).unwrap();
        assert_eq!(a.to_scalar::<BigRational>().unwrap(), BigRational::from_integer(2.into()));
        let b = PosReal::from_square(BigRational::from_integer(2.into())).unwrap();
        assert!(b.to_scalar::<BigRational>().is_err());
        assert!((b.to_scalar::<f64>().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn quarter_turns_are_exact() {
        let i: Complex<BigRational> = unit_root(&num_rational::Ratio::new(5, 4)).unwrap();
        assert_eq!(i, Complex::new(BigRational::zero(), BigRational::one()));
        assert!(unit_root::<BigRational>(&num_rational::Ratio::new(1, 3)).is_err());
        let w: Complex<f64> = unit_root(&num_rational::Ratio::new(1, 3)).unwrap();
        assert!((w.re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn twofloat_round_trips_through_repr() {
        let x = TwoFloat::from(1.0) / TwoFloat::from(3.0);
        let back = TwoFloat::from_repr(&x.to_repr()).unwrap();
        assert_eq!(back, x);
    }
}
