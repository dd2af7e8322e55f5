//! Weight sequences produced by the inflation method.
//!
//! The weights are laid out as `P_1, Q_1, P_2, Q_2, ...`. Segment `P_j`
//! consists of `s_j` blocks of length `x_j`; every block starts with `q_j`
//! followed by ones, and the very last entry of `P_j` is `q_j^{-s_j}`.
//! Segment `Q_j` is `l_j` ones. Writing `t_j = s_j x_j` and
//! `m_j = t_j + sum_{i<j} (t_i + l_i)`, the integers must satisfy
//! `l_j > m_j` and `x_{j+1} > m_j + l_j`.
//!
//! Every weight is an integer power of some `q_j = exp(eps_j)`, so window
//! products are tracked as integer exponent vectors and only turned into a
//! logarithm at the very end.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Target value of `limsup ||T^n||`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Theta {
    Finite(f64),
    Infinite,
}

impl Serialize for Theta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Theta::Finite(v) => s.serialize_f64(*v),
            Theta::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Theta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ThetaVisitor;
        impl Visitor<'_> for ThetaVisitor {
            type Value = Theta;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number greater than 1 or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Theta, E> {
                if v.is_infinite() && v > 0.0 {
                    Ok(Theta::Infinite)
                } else {
                    Ok(Theta::Finite(v))
                }
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Theta, E> {
                Ok(Theta::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Theta, E> {
                Ok(Theta::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Theta, E> {
                match v.trim() {
                    "inf" | "infinity" | "+inf" => Ok(Theta::Infinite),
                    other => other
                        .parse::<f64>()
                        .map(|x| self.visit_f64::<E>(x).unwrap_or(Theta::Finite(x)))
                        .map_err(|_| E::custom(format!("bad theta {other:?}"))),
                }
            }
        }
        d.deserialize_any(ThetaVisitor)
    }
}

/// How `l_j` and `x_{j+1}` are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Padding {
    /// Smallest admissible integers: `l_j = m_j + 1`, `x_{j+1} = m_j + l_j + 1`.
    #[default]
    Minimal,
    /// Minimal choice plus fixed slack.
    Slack { extra_l: u64, extra_x: u64 },
}

/// Parameters of the inflation construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InflationParams {
    /// Block counts `s_1, s_2, ...`; `s_j = j + 2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<u64>>,
    pub x1: u64,
    pub theta: Theta,
    #[serde(default)]
    pub padding: Padding,
}

impl InflationParams {
    pub fn new(x1: u64, theta: Theta) -> Self {
        InflationParams {
            s: None,
            x1,
            theta,
            padding: Padding::Minimal,
        }
    }

    pub fn with_s(mut self, s: Vec<u64>) -> Self {
        self.s = Some(s);
        self
    }

    /// `s_j` for 1-based `j`, or `None` past the end of an explicit list.
    pub fn s_at(&self, j: usize) -> Option<u64> {
        match &self.s {
            Some(list) => list.get(j - 1).copied(),
            None => Some(j as u64 + 2),
        }
    }

    /// `eps_j = log q_j`.
    pub fn eps(&self, s_j: u64) -> f64 {
        match self.theta {
            Theta::Finite(theta) => theta.ln() / s_j as f64,
            Theta::Infinite => 1.0 / (s_j as f64).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x1 <= 2 {
            return Err(Error::Constraint(format!("x1 = {} must exceed 2", self.x1)));
        }
        if let Theta::Finite(theta) = self.theta {
            if !(theta.is_finite() && theta > 1.0) {
                return Err(Error::Constraint(format!("theta = {theta} must lie in (1, inf]")));
            }
        }
        if let Some(list) = &self.s {
            if list.is_empty() {
                return Err(Error::Constraint("s must not be empty".into()));
            }
            for (i, &v) in list.iter().enumerate() {
                if v <= 2 {
                    return Err(Error::Constraint(format!("s_{} = {v} must exceed 2", i + 1)));
                }
                if i > 0 && v <= list[i - 1] {
                    return Err(Error::Constraint(format!(
                        "s must be strictly increasing (s_{} = {}, s_{} = {v})",
                        i,
                        list[i - 1],
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One `P_j Q_j` pair of the weight sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub j: usize,
    pub s: u64,
    pub x: u64,
    pub t: u64,
    pub l: u64,
    pub m: u64,
    /// Index of the first weight of `P_j`; equals `m - t`.
    pub start: u64,
    pub eps: f64,
}

impl Segment {
    /// One past the last index of `Q_j`.
    pub fn end(&self) -> u64 {
        self.m + self.l
    }
}

/// Sparse integer exponent vector `{(j, c_j)}` representing `prod q_j^{c_j}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QExponents(pub Vec<(usize, i64)>);

impl QExponents {
    pub fn single(j: usize, c: i64) -> Self {
        QExponents(vec![(j, c)])
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&(_, c)| c == 0)
    }
}

/// Generated prefix of the inflation construction.
#[derive(Clone, Debug)]
pub struct InflationLayout {
    params: InflationParams,
    segments: Vec<Segment>,
}

impl InflationLayout {
    /// Generates segments until index `horizon` is covered and one further
    /// segment exists (its `q` sets the last plateau value).
    pub fn covering(params: &InflationParams, horizon: u64) -> Result<Self> {
        params.validate()?;
        let mut layout = InflationLayout {
            params: params.clone(),
            segments: Vec::new(),
        };
        layout.push_segment()?;
        while layout.segments.last().map(|s| s.end()).unwrap_or(0) <= horizon {
            layout.push_segment()?;
        }
        // One more for q_{j+1}, when the s sequence allows it.
        if params.s_at(layout.segments.len() + 1).is_some() {
            layout.push_segment()?;
        }
        Ok(layout)
    }

    /// Generates exactly the first `count` segments.
    pub fn with_segments(params: &InflationParams, count: usize) -> Result<Self> {
        params.validate()?;
        let mut layout = InflationLayout {
            params: params.clone(),
            segments: Vec::new(),
        };
        for _ in 0..count {
            layout.push_segment()?;
        }
        Ok(layout)
    }

    fn push_segment(&mut self) -> Result<()> {
        let j = self.segments.len() + 1;
        let s = self.params.s_at(j).ok_or_else(|| {
            Error::Constraint(format!("explicit s list exhausted at segment {j}"))
        })?;
        let overflow = || Error::Constraint(format!("segment {j} overflows u64"));
        let (extra_l, extra_x) = match self.params.padding {
            Padding::Minimal => (0, 0),
            Padding::Slack { extra_l, extra_x } => (extra_l, extra_x),
        };
        let (x, prev_end) = match self.segments.last() {
            None => (self.params.x1, 0),
            Some(prev) => {
                let x = prev
                    .end()
                    .checked_add(1 + extra_x)
                    .ok_or_else(overflow)?;
                (x, prev.end())
            }
        };
        let t = s.checked_mul(x).ok_or_else(overflow)?;
        let m = t.checked_add(prev_end).ok_or_else(overflow)?;
        let l = m.checked_add(1 + extra_l).ok_or_else(overflow)?;
        m.checked_add(l).ok_or_else(overflow)?;
        let seg = Segment {
            j,
            s,
            x,
            t,
            l,
            m,
            start: prev_end,
            eps: self.params.eps(s),
        };
        self.check_segment(&seg)?;
        self.segments.push(seg);
        Ok(())
    }

    fn check_segment(&self, seg: &Segment) -> Result<()> {
        let fail = |what: String| Err(Error::Constraint(format!("segment {}: {what}", seg.j)));
        if seg.x <= 2 || seg.t <= 2 || seg.l <= 2 {
            return fail(format!("x = {}, t = {}, l = {} must exceed 2", seg.x, seg.t, seg.l));
        }
        if seg.t != seg.s * seg.x {
            return fail("t != s x".into());
        }
        if seg.l <= seg.m {
            return fail(format!("l = {} must exceed m = {}", seg.l, seg.m));
        }
        if let Some(prev) = self.segments.last() {
            if seg.x <= prev.m + prev.l {
                return fail(format!("x = {} must exceed m + l = {}", seg.x, prev.m + prev.l));
            }
            if !(seg.eps < prev.eps) {
                return fail("q_j must be strictly decreasing".into());
            }
        }
        if !(seg.eps > 0.0) {
            return fail("q_j must exceed 1".into());
        }
        Ok(())
    }

    pub fn params(&self) -> &InflationParams {
        &self.params
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Number of weights fully determined by the generated segments.
    pub fn horizon(&self) -> u64 {
        self.segments.last().map(|s| s.end()).unwrap_or(0)
    }

    fn segment_index_of(&self, n: u64) -> Option<usize> {
        let idx = self.segments.partition_point(|s| s.end() <= n);
        (idx < self.segments.len()).then_some(idx)
    }

    /// `lambda_n` as `(j, c)` meaning `q_j^c` (`c = 0` is a unit weight).
    pub fn weight_exponent(&self, n: u64) -> Result<(usize, i64)> {
        let idx = self.segment_index_of(n).ok_or_else(|| self.horizon_error(n))?;
        let seg = &self.segments[idx];
        if n >= seg.m {
            return Ok((seg.j, 0));
        }
        let pos = n - seg.start;
        if pos == seg.t - 1 {
            Ok((seg.j, -(seg.s as i64)))
        } else if pos % seg.x == 0 {
            Ok((seg.j, 1))
        } else {
            Ok((seg.j, 0))
        }
    }

    fn horizon_error(&self, n: u64) -> Error {
        Error::Constraint(format!(
            "index {n} lies beyond the generated horizon {}",
            self.horizon()
        ))
    }

    /// Exponents of `lambda_start ... lambda_{start+len-1}`.
    pub fn window_exponents(&self, start: u64, len: u64) -> Result<QExponents> {
        if len == 0 {
            return Ok(QExponents::default());
        }
        let end = start + len; // exclusive
        if end > self.horizon() {
            return Err(self.horizon_error(end - 1));
        }
        let mut out = Vec::new();
        for seg in &self.segments {
            if seg.m <= start || seg.start >= end {
                continue;
            }
            let a = start.max(seg.start) - seg.start;
            let b = end.min(seg.m) - seg.start; // exclusive, relative
            // block starts are multiples of x in [a, b)
            let starts = b.div_ceil(seg.x) - a.div_ceil(seg.x);
            let mut c = starts as i64;
            if a <= seg.t - 1 && seg.t - 1 < b {
                c -= seg.s as i64;
            }
            if c != 0 {
                out.push((seg.j, c));
            }
        }
        Ok(QExponents(out))
    }

    pub fn log_of(&self, e: &QExponents) -> f64 {
        e.0.iter()
            .map(|&(j, c)| c as f64 * self.segments[j - 1].eps)
            .sum()
    }

    /// Closed form of `||T^k||` as an exponent vector together with its regime
    /// and the governing segment index.
    pub fn power_norm_exponent(&self, k: u64) -> Result<(QExponents, Regime, usize)> {
        if k == 0 {
            return Ok((QExponents::default(), Regime::Ramp, 0));
        }
        // segment j governs k in (end_{j-1}, end_j]
        let idx = self
            .segment_index_of(k - 1)
            .ok_or_else(|| self.horizon_error(k))?;
        let seg = &self.segments[idx];
        if k >= seg.m {
            let next = self.segments.get(idx + 1).ok_or_else(|| {
                Error::Constraint(format!(
                    "plateau of segment {} needs q_{}, which is not generated",
                    seg.j,
                    seg.j + 1
                ))
            })?;
            return Ok((QExponents::single(next.j, 1), Regime::Plateau, seg.j));
        }
        let blocks = k.div_ceil(seg.x).min(seg.s);
        let regime = if k + seg.x > seg.m {
            Regime::Peak
        } else {
            Regime::Ramp
        };
        Ok((QExponents::single(seg.j, blocks as i64), regime, seg.j))
    }
}

/// Which branch of the piecewise norm formula an index falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `m_j <= n <= m_j + l_j`: `||T^n|| = q_{j+1}`.
    Plateau,
    /// `m_j - x_j + 1 <= n < m_j`: `||T^n|| = q_j^{s_j}`.
    Peak,
    Ramp,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Plateau => "plateau",
            Regime::Peak => "peak",
            Regime::Ramp => "ramp",
        }
    }
}
