//! Number types used throughout the crate.
//!
//! Every algorithm is generic over [`Scalar`]: [`Exact`] (64-bit rationals)
//! for rank-mode schedules, where all identities hold with zero tolerance,
//! and `f64` for exponential-mode schedules.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{contract, Error, Result};
use crate::model::CutSchedule;

/// Exact rational arithmetic.
pub type Exact = Ratio<i64>;

pub trait Scalar:
    Copy
    + PartialOrd
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    /// True when comparisons are exact and tolerances are zero.
    const EXACT: bool;

    fn from_int(x: i64) -> Self;
    fn ratio(num: i64, den: i64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;

    /// Comparison slack for quantities of magnitude `scale`.
    fn slack(scale: Self) -> Self;

    /// Cut times of a schedule in this number type.
    fn times(schedule: &CutSchedule) -> Result<Vec<Self>>;

    /// Inverse of [`Scalar::times`].
    fn into_schedule(times: &[Self]) -> Result<CutSchedule>;

    fn to_json(self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;

    /// Text form used in CSV dumps.
    fn render(self) -> String;

    fn zero() -> Self {
        Self::from_int(0)
    }

    fn one() -> Self {
        Self::from_int(1)
    }

    /// `count / n`, the mass of `count` vertices.
    fn mass(count: usize, n: usize) -> Self {
        Self::ratio(count as i64, n as i64)
    }

    fn midpoint(a: Self, b: Self) -> Self {
        (a + b) / Self::from_int(2)
    }

    /// The vertex count `c` with `self == c / n`, if there is one.
    fn to_count(self, n: usize) -> Option<usize>;

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn from_int(x: i64) -> Self {
        Ratio::from_integer(x)
    }

    fn ratio(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }

    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn abs(self) -> Self {
        Signed::abs(&self)
    }

    fn slack(_scale: Self) -> Self {
        <Ratio<i64> as Zero>::zero()
    }

    fn times(schedule: &CutSchedule) -> Result<Vec<Self>> {
        match schedule {
            CutSchedule::Rank(r) => Ok(r.iter().map(|&x| Ratio::from_integer(x as i64)).collect()),
            CutSchedule::Exponential(_) => Err(Error::RanksRequired),
        }
    }

    fn into_schedule(times: &[Self]) -> Result<CutSchedule> {
        times
            .iter()
            .map(|t| {
                if t.is_integer() && *t.numer() > 0 && *t.numer() <= u32::MAX as i64 {
                    Ok(*t.numer() as u32)
                } else {
                    Err(contract(format!("time {t} is not a positive integer rank")))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(CutSchedule::Rank)
    }

    fn to_json(self) -> Value {
        Value::String(self.render())
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(x) => x
                .as_i64()
                .map(Ratio::from_integer)
                .ok_or_else(|| Error::Malformed(format!("{x} is not an integer"))),
            Value::String(s) => parse_ratio(s),
            other => Err(Error::Malformed(format!("expected a rational, got {other}"))),
        }
    }

    fn render(self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn to_count(self, n: usize) -> Option<usize> {
        let c = self * Ratio::from_integer(n as i64);
        (c.is_integer() && *c.numer() >= 0).then(|| *c.numer() as usize)
    }
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_ratio(s: &str) -> Result<Exact> {
    let bad = || Error::Malformed(format!("`{s}` is not a rational"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: i64 = p.parse().map_err(|_| bad())?;
    let q: i64 = q.parse().map_err(|_| bad())?;
    if q == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(p, q))
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(x: i64) -> Self {
        x as f64
    }

    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn slack(scale: Self) -> Self {
        1e-12 * f64::abs(scale)
    }

    fn times(schedule: &CutSchedule) -> Result<Vec<Self>> {
        Ok(match schedule {
            CutSchedule::Rank(r) => r.iter().map(|&x| x as f64).collect(),
            CutSchedule::Exponential(t) => t.clone(),
        })
    }

    fn into_schedule(times: &[Self]) -> Result<CutSchedule> {
        Ok(CutSchedule::Exponential(times.to_vec()))
    }

    fn to_json(self) -> Value {
        serde_json::Number::from_f64(self).map_or(Value::Null, Value::Number)
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(x) => x.as_f64().ok_or_else(|| Error::Malformed(format!("bad number {x}"))),
            Value::String(s) => parse_ratio(s).map(Scalar::to_f64),
            other => Err(Error::Malformed(format!("expected a number, got {other}"))),
        }
    }

    fn render(self) -> String {
        format!("{self}")
    }

    fn to_count(self, n: usize) -> Option<usize> {
        let c = self * n as f64;
        let r = c.round();
        ((c - r).abs() <= 1e-6 && r >= 0.0).then_some(r as usize)
    }
}
