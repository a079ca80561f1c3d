use std::collections::BTreeMap;

use num::Zero;

use super::coeff::SeriesCoeff;
use super::series::check_exponent;
use crate::error::{Error, Result};
use crate::rational::{q_to_f64, Q};

/// Truncated univariate Puiseux series `Σ_{q ≤ Q} c_q t^q` over a field.
#[derive(Debug, Clone, PartialEq)]
pub struct UniSeries<C> {
    pub truncation: Q,
    terms: BTreeMap<Q, C>,
}

impl<C: SeriesCoeff> UniSeries<C> {
    pub fn zero(truncation: Q) -> Self {
        Self { truncation, terms: BTreeMap::new() }
    }

    pub fn constant(truncation: Q, c: C) -> Self {
        let mut s = Self::zero(truncation);
        s.add_term(Q::zero(), c);
        s
    }

    pub fn monomial(truncation: Q, q: Q, c: C) -> Self {
        let mut s = Self::zero(truncation);
        s.add_term(q, c);
        s
    }

    /// Adds `c t^q`; terms above the truncation are discarded.
    pub fn add_term(&mut self, q: Q, c: C) {
        if q > self.truncation || c.is_zero() {
            return;
        }
        let v = self.terms.remove(&q).unwrap_or_else(C::zero) + c;
        if !v.is_zero() {
            self.terms.insert(q, v);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Q, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, q: Q) -> C {
        self.terms.get(&q).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<(Q, C)> {
        self.terms.iter().next().map(|(q, c)| (*q, c.clone()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.truncation.min(other.truncation));
        for (q, c) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(*q, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-C::one()))
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self::zero(self.truncation);
        for (q, c) in &self.terms {
            out.add_term(*q, c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero(self.truncation.min(other.truncation));
        for (qa, ca) in &self.terms {
            for (qb, cb) in &other.terms {
                let q = *qa + *qb;
                if q > out.truncation {
                    continue;
                }
                check_exponent(q)?;
                out.add_term(q, ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::constant(self.truncation, C::one());
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `1 / s` for a series with nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coeff(Q::zero());
        if c0.is_zero() || self.terms.keys().next().is_some_and(|q| *q < Q::zero()) {
            return Err(Error::InvalidArgument("reciprocal needs a nonzero constant term".into()));
        }
        let inv0 = C::one() / c0.clone();
        // 1/(c0 (1 + u)) = inv0 Σ (-u)^k with u of positive order.
        let mut u = self.scale(&inv0);
        u.terms.remove(&Q::zero());
        let Some((qmin, _)) = u.leading() else {
            return Ok(Self::constant(self.truncation, inv0));
        };
        let steps = (q_to_f64(self.truncation) / q_to_f64(qmin)).floor() as u32;
        let neg_u = u.scale(&-C::one());
        let mut acc = Self::constant(self.truncation, C::one());
        let mut power = acc.clone();
        for _ in 0..steps {
            power = power.mul(&neg_u)?;
            acc = acc.add(&power);
        }
        Ok(acc.scale(&inv0))
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|(q, c)| c.to_f64() * t.powf(q_to_f64(*q))).sum()
    }

    pub fn to_f64_series(&self) -> UniSeries<f64> {
        UniSeries { truncation: self.truncation, terms: self.terms.iter().map(|(q, c)| (*q, c.to_f64())).collect() }
    }
}
