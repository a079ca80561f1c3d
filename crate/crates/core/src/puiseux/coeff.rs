use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{BigRational, One, Zero};

use crate::rational::{big_from_f64, big_from_q, big_to_f64, format_big, parse_big, q_to_f64, Q};

/// Coefficient field of the series types: exact rationals or floats.
pub trait SeriesCoeff:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Whether arithmetic in this field is exact.
    const EXACT: bool;

    fn to_f64(&self) -> f64;
    fn from_i64(v: i64) -> Self;
    fn from_q(v: Q) -> Self;
    fn from_big(v: &BigRational) -> Self;
    fn from_f64(v: f64) -> Self;
    fn encode(&self) -> String;
    fn decode(s: &str) -> Option<Self>;

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl SeriesCoeff for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_q(v: Q) -> Self {
        q_to_f64(v)
    }
    fn from_big(v: &BigRational) -> Self {
        big_to_f64(v)
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn encode(&self) -> String {
        format!("{self}")
    }
    fn decode(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl SeriesCoeff for BigRational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        big_to_f64(self)
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }
    fn from_q(v: Q) -> Self {
        big_from_q(v)
    }
    fn from_big(v: &BigRational) -> Self {
        v.clone()
    }
    fn from_f64(v: f64) -> Self {
        big_from_f64(v)
    }
    fn encode(&self) -> String {
        format_big(self)
    }
    fn decode(s: &str) -> Option<Self> {
        parse_big(s)
    }
}
