//! Weight rules for unilateral weighted shifts `T e_n = lambda_n e_{n+1}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::inflation::{InflationLayout, InflationParams};
use crate::error::{Error, Result};
use crate::scalar::{PosReal, Rat};

/// Monotonicity of a weight formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Closed-form weight sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WeightFormula {
    /// `lambda_n = (a n + b) / (c n + d)`.
    Rational { a: Rat, b: Rat, c: Rat, d: Rat },
    /// `lambda_n^2 = (a n + b) / (c n + d)`.
    SqrtRational { a: Rat, b: Rat, c: Rat, d: Rat },
    /// `lambda_n = limit - gap * ratio^n`.
    Geometric { limit: f64, gap: f64, ratio: f64 },
}

impl WeightFormula {
    fn affine_ratio(a: &Rat, b: &Rat, c: &Rat, d: &Rat, n: u64) -> Result<BigRational> {
        let n = BigRational::from_integer(BigInt::from(n));
        let den = &c.0 * &n + &d.0;
        if den.is_zero() {
            return Err(Error::InvalidWeights(format!("formula denominator vanishes at n = {n}")));
        }
        Ok((&a.0 * &n + &b.0) / den)
    }

    pub fn weight(&self, n: u64) -> Result<PosReal> {
        let w = match self {
            WeightFormula::Rational { a, b, c, d } => {
                let v = Self::affine_ratio(a, b, c, d, n)?;
                if !v.is_positive() {
                    return Err(Error::InvalidWeights(format!("lambda_{n} = {v} is not positive")));
                }
                PosReal::Exact(&v * &v)
            }
            WeightFormula::SqrtRational { a, b, c, d } => {
                let v = Self::affine_ratio(a, b, c, d, n)?;
                if !v.is_positive() {
                    return Err(Error::InvalidWeights(format!("lambda_{n}^2 = {v} is not positive")));
                }
                PosReal::Exact(v)
            }
            WeightFormula::Geometric { limit, gap, ratio } => {
                let v = limit - gap * ratio.powf(n as f64);
                if !(v > 0.0) {
                    return Err(Error::InvalidWeights(format!("lambda_{n} = {v} is not positive")));
                }
                PosReal::Log(v.ln())
            }
        };
        Ok(w)
    }

    /// `lim lambda_n`.
    pub fn limit(&self) -> Result<f64> {
        match self {
            WeightFormula::Rational { a, b, c, d } | WeightFormula::SqrtRational { a, b, c, d } => {
                let v = if !c.0.is_zero() {
                    &a.0 / &c.0
                } else if a.0.is_zero() && !d.0.is_zero() {
                    &b.0 / &d.0
                } else {
                    return Err(Error::InvalidWeights("formula is unbounded".into()));
                };
                let v = crate::scalar::rational_to_f64(&v);
                Ok(match self {
                    WeightFormula::SqrtRational { .. } => v.sqrt(),
                    _ => v,
                })
            }
            WeightFormula::Geometric { limit, ratio, .. } => {
                if !(ratio.abs() < 1.0) {
                    return Err(Error::InvalidWeights(format!("ratio {ratio} must lie in (-1, 1)")));
                }
                Ok(*limit)
            }
        }
    }
}

/// A point mass of a Berger measure on `[0, inf)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BergerAtom(pub Rat, pub Rat);

/// Uniform measure of total mass `mass` on `[0, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformPart {
    pub upper: Rat,
    pub mass: Rat,
}

/// Moments `m_n = sum mass * t^n + mass_u * upper^n / (n + 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BergerMoments {
    /// `[point, mass]` pairs.
    #[serde(default)]
    pub atoms: Vec<BergerAtom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<UniformPart>,
}

impl BergerMoments {
    /// `1/(n+1)`: Lebesgue measure on `[0, 1]`.
    pub fn uniform_unit() -> Self {
        BergerMoments {
            atoms: Vec::new(),
            uniform: Some(UniformPart {
                upper: Rat::integer(1),
                mass: Rat::integer(1),
            }),
        }
    }

    /// Point mass at `t`.
    pub fn point(t: Rat) -> Self {
        BergerMoments {
            atoms: vec![BergerAtom(t, Rat::integer(1))],
            uniform: None,
        }
    }

    /// `(1 + c 4^n)/(1 + c)`: atoms at 1 and 4.
    pub fn two_point(c: Rat) -> Self {
        let total = &c.0 + BigRational::one();
        BergerMoments {
            atoms: vec![
                BergerAtom(Rat::integer(1), Rat(total.recip())),
                BergerAtom(Rat::integer(4), Rat(&c.0 / &total)),
            ],
            uniform: None,
        }
    }

    pub fn moment(&self, n: u64) -> BigRational {
        let mut m = BigRational::zero();
        for BergerAtom(t, w) in &self.atoms {
            m += &w.0 * num_traits::pow(t.0.clone(), n as usize);
        }
        if let Some(u) = &self.uniform {
            m += &u.mass.0 * num_traits::pow(u.upper.0.clone(), n as usize)
                / BigRational::from_integer(BigInt::from(n + 1));
        }
        m
    }

    /// Right end of the support.
    pub fn support_sup(&self) -> BigRational {
        let mut sup = BigRational::zero();
        for BergerAtom(t, w) in &self.atoms {
            if !w.0.is_zero() && t.0 > sup {
                sup = t.0.clone();
            }
        }
        if let Some(u) = &self.uniform {
            if !u.mass.0.is_zero() && u.upper.0 > sup {
                sup = u.upper.0.clone();
            }
        }
        sup
    }

    /// The measure is a single point mass (constant weights).
    pub fn is_point_mass(&self) -> bool {
        let live = self.atoms.iter().filter(|a| !a.1 .0.is_zero()).count();
        live == 1 && self.uniform.as_ref().is_none_or(|u| u.mass.0.is_zero())
    }

    /// Hankel determinants of orders 1-3 over the sampled shifts.
    pub const HANKEL_SHIFTS: [u64; 6] = [0, 1, 2, 5, 10, 25];

    pub fn validate(&self) -> Result<()> {
        let m0 = self.moment(0);
        if !m0.is_one() {
            return Err(Error::InvalidWeights(format!("Berger moments need m_0 = 1, got {m0}")));
        }
        for n in 0..=60u64 {
            let m = self.moment(n);
            if !m.is_positive() {
                return Err(Error::InvalidWeights(format!("moment m_{n} = {m} is not positive")));
            }
        }
        for &shift in &Self::HANKEL_SHIFTS {
            for order in 1..=3usize {
                let det = hankel_det(|i| self.moment(shift + i as u64), order);
                if det.is_negative() {
                    return Err(Error::InvalidWeights(format!(
                        "Hankel determinant of order {order} at shift {shift} is negative ({det})"
                    )));
                }
            }
        }
        for BergerAtom(t, w) in &self.atoms {
            if t.0.is_negative() || w.0.is_negative() {
                return Err(Error::InvalidWeights(format!(
                    "Berger atoms need t >= 0 and mass >= 0, got ({t}, {w})"
                )));
            }
        }
        if let Some(u) = &self.uniform {
            if !u.upper.0.is_positive() || u.mass.0.is_negative() {
                return Err(Error::InvalidWeights("uniform part needs upper > 0 and mass >= 0".into()));
            }
        }
        Ok(())
    }
}

/// Determinant of the Hankel matrix `[h(i + j)]_{i,j < order}`, exactly.
pub fn hankel_det(h: impl Fn(usize) -> BigRational, order: usize) -> BigRational {
    let mut a: Vec<Vec<BigRational>> = (0..order)
        .map(|i| (0..order).map(|j| h(i + j)).collect())
        .collect();
    let mut det = BigRational::one();
    for col in 0..order {
        let Some(pivot) = (col..order).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..order {
            let f = &a[r][col] / &p;
            for c in col..order {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    det
}

/// Weight sequence of a unilateral weighted shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum WeightRule {
    ExplicitThenConstant { prefix: Vec<Rat>, tail: Rat },
    MonotoneToLimit {
        formula: WeightFormula,
        limit: f64,
        direction: Direction,
    },
    Inflation(InflationParams),
    /// `sigma_n = sqrt((1 + (n+1)(lambda^2-1)) / (1 + n(lambda^2-1)))`.
    TwoIsometry { lambda_sq: Rat },
    Berger(BergerMoments),
}

/// Sampled indices used by the monotonicity and positivity spot checks.
const SPOT_CHECK: [u64; 12] = [0, 1, 2, 3, 5, 8, 13, 50, 100, 500, 1000, 10_000];

impl WeightRule {
    pub fn unweighted() -> Self {
        WeightRule::ExplicitThenConstant {
            prefix: Vec::new(),
            tail: Rat::integer(1),
        }
    }

    pub fn constant(c: Rat) -> Self {
        WeightRule::ExplicitThenConstant {
            prefix: Vec::new(),
            tail: c,
        }
    }

    pub fn monotone(formula: WeightFormula) -> Result<Self> {
        let limit = formula.limit()?;
        let w0 = formula.weight(0)?.to_f64();
        let direction = if w0 <= limit {
            Direction::Increasing
        } else {
            Direction::Decreasing
        };
        let rule = WeightRule::MonotoneToLimit {
            formula,
            limit,
            direction,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn two_isometry(lambda_sq: Rat) -> Result<Self> {
        let rule = WeightRule::TwoIsometry { lambda_sq };
        rule.validate()?;
        Ok(rule)
    }

    pub fn berger(moments: BergerMoments) -> Result<Self> {
        moments.validate()?;
        Ok(WeightRule::Berger(moments))
    }

    pub fn inflation(params: InflationParams) -> Result<Self> {
        params.validate()?;
        Ok(WeightRule::Inflation(params))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightRule::ExplicitThenConstant { prefix, tail } => {
                if let Some(bad) = prefix.iter().chain(std::iter::once(tail)).find(|w| !w.is_positive()) {
                    return Err(Error::InvalidWeights(format!("weight {bad} is not positive")));
                }
                Ok(())
            }
            WeightRule::MonotoneToLimit {
                formula,
                limit,
                direction,
            } => {
                let actual = formula.limit()?;
                if (actual - limit).abs() > 1e-12 * limit.abs().max(1.0) {
                    return Err(Error::InvalidWeights(format!(
                        "declared limit {limit} differs from formula limit {actual}"
                    )));
                }
                let mut prev: Option<f64> = None;
                for &n in &SPOT_CHECK {
                    let w = formula.weight(n)?.to_f64();
                    if let Some(p) = prev {
                        let ok = match direction {
                            Direction::Increasing => w >= p,
                            Direction::Decreasing => w <= p,
                        };
                        if !ok {
                            return Err(Error::InvalidWeights(format!(
                                "formula is not {direction:?} at n = {n}"
                            )));
                        }
                    }
                    let ok = match direction {
                        Direction::Increasing => w <= limit + 1e-12,
                        Direction::Decreasing => w >= limit - 1e-12,
                    };
                    if !ok {
                        return Err(Error::InvalidWeights(format!(
                            "lambda_{n} = {w} is on the wrong side of the limit {limit}"
                        )));
                    }
                    prev = Some(w);
                }
                Ok(())
            }
            WeightRule::Inflation(p) => p.validate(),
            WeightRule::TwoIsometry { lambda_sq } => {
                if lambda_sq.0 <= BigRational::one() {
                    return Err(Error::InvalidWeights(format!(
                        "two-isometry needs lambda > 1, got lambda^2 = {lambda_sq}"
                    )));
                }
                Ok(())
            }
            WeightRule::Berger(m) => m.validate(),
        }
    }

    /// `lambda_n`.
    pub fn weight(&self, n: u64) -> Result<PosReal> {
        match self {
            WeightRule::ExplicitThenConstant { prefix, tail } => {
                let w = prefix.get(n as usize).unwrap_or(tail);
                PosReal::from_rational(&w.0)
            }
            WeightRule::MonotoneToLimit { formula, .. } => formula.weight(n),
            WeightRule::Inflation(p) => {
                let layout = InflationLayout::covering(p, n)?;
                let (j, c) = layout.weight_exponent(n)?;
                let eps = layout.segments()[j - 1].eps;
                if c == 0 {
                    Ok(PosReal::one())
                } else {
                    Ok(PosReal::Log(c as f64 * eps))
                }
            }
            WeightRule::TwoIsometry { lambda_sq } => {
                let a = two_isometry_norm_sq(lambda_sq, n);
                let b = two_isometry_norm_sq(lambda_sq, n + 1);
                PosReal::from_square(b / a)
            }
            WeightRule::Berger(m) => PosReal::from_square(m.moment(n + 1) / m.moment(n)),
        }
    }

    /// First `count` weights.
    pub fn weights(&self, count: usize) -> Result<Vec<PosReal>> {
        if let WeightRule::Inflation(p) = self {
            let layout = InflationLayout::covering(p, count as u64)?;
            return (0..count as u64)
                .map(|n| {
                    let (j, c) = layout.weight_exponent(n)?;
                    Ok(if c == 0 {
                        PosReal::one()
                    } else {
                        PosReal::Log(c as f64 * layout.segments()[j - 1].eps)
                    })
                })
                .collect();
        }
        (0..count as u64).map(|n| self.weight(n)).collect()
    }

    /// `lambda_start * ... * lambda_{start+len-1}` computed structurally.
    pub fn product(&self, start: u64, len: u64) -> Result<PosReal> {
        if len == 0 {
            return Ok(PosReal::one());
        }
        match self {
            WeightRule::ExplicitThenConstant { prefix, tail } => {
                let end = start + len;
                let mut acc = BigRational::one();
                let in_prefix = (start.min(prefix.len() as u64))..(end.min(prefix.len() as u64));
                for i in in_prefix.clone() {
                    acc *= &prefix[i as usize].0;
                }
                let tail_count = len - (in_prefix.end - in_prefix.start);
                let t = num_traits::pow(tail.0.clone(), tail_count as usize);
                let v = acc * t;
                Ok(PosReal::Exact(&v * &v))
            }
            WeightRule::MonotoneToLimit { formula, .. } => {
                let mut acc = PosReal::one();
                for n in start..start + len {
                    acc = acc.mul(&formula.weight(n)?);
                }
                Ok(acc)
            }
            WeightRule::Inflation(p) => {
                let layout = InflationLayout::covering(p, start + len)?;
                let e = layout.window_exponents(start, len)?;
                Ok(if e.is_trivial() {
                    PosReal::one()
                } else {
                    PosReal::Log(layout.log_of(&e))
                })
            }
            WeightRule::TwoIsometry { lambda_sq } => PosReal::from_square(
                two_isometry_norm_sq(lambda_sq, start + len) / two_isometry_norm_sq(lambda_sq, start),
            ),
            WeightRule::Berger(m) => PosReal::from_square(m.moment(start + len) / m.moment(start)),
        }
    }

    /// `sup_n lambda_n`, i.e. `||T||`, as a float.
    pub fn sup_weight(&self) -> Result<f64> {
        Ok(super::norms::shift_power_norm(self, 1)?.value.to_f64())
    }
}

/// `1 + n (lambda^2 - 1)`, the squared norm of `T^n e_0` for the two-isometry.
pub fn two_isometry_norm_sq(lambda_sq: &Rat, n: u64) -> BigRational {
    BigRational::one() + BigRational::from_integer(BigInt::from(n)) * (&lambda_sq.0 - BigRational::one())
}

/// Weights `sigma_0(lambda), ..., sigma_{count-1}(lambda)`.
pub fn two_isometry_weights(lambda_sq: &Rat, count: usize) -> Result<Vec<PosReal>> {
    WeightRule::two_isometry(lambda_sq.clone())?.weights(count)
}

/// First `count` inflation weights (see [`InflationLayout`]).
pub fn inflation_weights(params: &InflationParams, count: usize) -> Result<Vec<PosReal>> {
    WeightRule::inflation(params.clone())?.weights(count)
}

/// `lambda_n = sqrt(m_{n+1} / m_n)`.
pub fn berger_weights(moments: &BergerMoments, count: usize) -> Result<Vec<PosReal>> {
    WeightRule::berger(moments.clone())?.weights(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shiftlab::inflation::Theta;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn inflation_first_block_values() {
        let p = InflationParams::new(3, Theta::Finite(2.0));
        let w = inflation_weights(&p, 20).unwrap();
        let q1 = 2f64.powf(1.0 / 3.0);
        let want = [q1, 1.0, 1.0, q1, 1.0, 1.0, q1, 1.0, 0.5];
        for (i, v) in want.iter().enumerate() {
            assert!((w[i].to_f64() - v).abs() < 1e-14, "weight {i}");
        }
        for v in &w[9..19] {
            assert!(v.is_exactly_one());
        }
        // P_2 starts with q_2 = 2^{1/4}
        assert!((w[19].to_f64() - 2f64.powf(0.25)).abs() < 1e-14);
    }

    #[test]
    fn inflation_q_count_per_segment() {
        let p = InflationParams::new(3, Theta::Finite(2.0));
        let layout = InflationLayout::with_segments(&p, 3).unwrap();
        for seg in layout.segments() {
            let count = (seg.start..seg.m)
                .filter(|&n| layout.weight_exponent(n).unwrap().1 == 1)
                .count() as u64;
            assert_eq!(count, seg.s);
            let last = layout.weight_exponent(seg.m - 1).unwrap().1;
            assert_eq!(last, -(seg.s as i64));
        }
    }

    #[test]
    fn two_isometry_sqrt2_weights() {
        let w = two_isometry_weights(&Rat::integer(2), 6).unwrap();
        for (n, v) in w.iter().enumerate() {
            assert_eq!(v.square().unwrap(), &rat(n as i64 + 2, n as i64 + 1));
        }
        let rule = WeightRule::two_isometry(Rat::integer(2)).unwrap();
        assert_eq!(rule.product(0, 7).unwrap().square().unwrap(), &rat(8, 1));
        assert!(WeightRule::two_isometry(Rat::integer(1)).is_err());
    }

    #[test]
    fn two_isometry_near_one_is_almost_isometric() {
        let w = two_isometry_weights(&Rat::new(1_000_001, 1_000_000), 3).unwrap();
        for v in w {
            assert!((v.to_f64() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn berger_examples() {
        let bergman = berger_weights(&BergerMoments::uniform_unit(), 5).unwrap();
        for (n, v) in bergman.iter().enumerate() {
            assert_eq!(v.square().unwrap(), &rat(n as i64 + 1, n as i64 + 2));
        }
        let point = berger_weights(&BergerMoments::point(Rat::new(9, 4)), 4).unwrap();
        for v in point {
            assert_eq!(v.square().unwrap(), &rat(9, 4));
        }
        let two = berger_weights(&BergerMoments::two_point(Rat::integer(3)), 40).unwrap();
        for pair in two.windows(2) {
            assert!(pair[0].cmp_value(&pair[1]).is_lt());
        }
        assert!((two[39].to_f64() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn berger_rejects_signed_measures() {
        let bad = BergerMoments {
            atoms: vec![
                BergerAtom(Rat::integer(1), Rat::new(6, 5)),
                BergerAtom(Rat::integer(2), Rat::new(-2, 5)),
                BergerAtom(Rat::integer(3), Rat::new(1, 5)),
            ],
            uniform: None,
        };
        let err = bad.validate().unwrap_err();
        assert!(err.to_string().contains("Hankel"), "{err}");
        let nonpositive = BergerMoments {
            atoms: vec![
                BergerAtom(Rat::integer(1), Rat::new(3, 2)),
                BergerAtom(Rat::integer(2), Rat::new(-1, 2)),
            ],
            uniform: None,
        };
        assert!(nonpositive.validate().is_err());
        let unnormalised = BergerMoments {
            atoms: vec![BergerAtom(Rat::integer(1), Rat::integer(2))],
            uniform: None,
        };
        assert!(unnormalised.validate().is_err());
    }

    #[test]
    fn hankel_det_of_two_atoms() {
        // m_n = (1 + 4^n) / 2: order-2 determinant is (4 - 1)^2 / 4 = 9/4.
        let m = BergerMoments::two_point(Rat::integer(1));
        assert_eq!(hankel_det(|i| m.moment(i as u64), 2), rat(9, 4));
        assert_eq!(hankel_det(|i| m.moment(i as u64), 3), rat(0, 1));
    }

    #[test]
    fn monotone_rule_validation() {
        let f = WeightFormula::Rational {
            a: Rat::integer(2),
            b: Rat::integer(1),
            c: Rat::integer(1),
            d: Rat::integer(1),
        };
        let rule = WeightRule::monotone(f.clone()).unwrap();
        assert!(matches!(
            rule,
            WeightRule::MonotoneToLimit { direction: Direction::Increasing, limit, .. } if limit == 2.0
        ));
        let wrong = WeightRule::MonotoneToLimit {
            formula: f,
            limit: 2.0,
            direction: Direction::Decreasing,
        };
        assert!(wrong.validate().is_err());
    }

    #[test]
    fn explicit_products() {
        let rule = WeightRule::ExplicitThenConstant {
            prefix: vec![Rat::integer(2), Rat::integer(3)],
            tail: Rat::new(1, 2),
        };
        assert_eq!(rule.product(0, 1).unwrap().square().unwrap(), &rat(4, 1));
        assert_eq!(rule.product(0, 3).unwrap().square().unwrap(), &rat(9, 1));
        assert_eq!(rule.product(1, 3).unwrap().square().unwrap(), &rat(9, 16));
        assert!(WeightRule::constant(Rat::integer(0)).validate().is_err());
    }

    #[test]
    fn json_schema_for_inflation() {
        let rule: WeightRule = serde_json::from_str(
            r#"{"variant": "inflation", "s": [3, 4, 5], "x1": 3, "theta": 2, "padding": "minimal"}"#,
        )
        .unwrap();
        match &rule {
            WeightRule::Inflation(p) => {
                assert_eq!(p.s.as_deref(), Some(&[3u64, 4, 5][..]));
                assert_eq!(p.theta, Theta::Finite(2.0));
            }
            other => panic!("unexpected {other:?}"),
        }
        let back: WeightRule = serde_json::from_str(&serde_json::to_string(&rule).unwrap()).unwrap();
        assert_eq!(back, rule);
        let inf: WeightRule =
            serde_json::from_str(r#"{"variant": "inflation", "x1": 3, "theta": "inf"}"#).unwrap();
        assert!(matches!(inf, WeightRule::Inflation(InflationParams { theta: Theta::Infinite, .. })));
    }
}
