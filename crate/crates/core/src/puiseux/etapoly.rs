use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::coeff::SeriesCoeff;

/// Polynomial in the transversal variables `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaPoly<C = f64> {
    pub dim: usize,
    terms: BTreeMap<Vec<u32>, C>,
}

fn degree(e: &[u32]) -> i32 {
    e.iter().sum::<u32>() as i32
}

impl<C: SeriesCoeff> EtaPoly<C> {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: C) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    /// The coordinate function `η_k`.
    pub fn var(dim: usize, k: usize) -> Self {
        let mut e = vec![0; dim];
        e[k] = 1;
        Self::monomial(e, C::one())
    }

    pub fn monomial(exp: Vec<u32>, c: C) -> Self {
        let mut p = Self::zero(exp.len());
        p.add_term(exp, c);
        p
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: C) {
        debug_assert_eq!(e.len(), self.dim);
        if c.is_zero() {
            return;
        }
        let v = self.terms.remove(&e).unwrap_or_else(C::zero) + c;
        if !v.is_zero() {
            self.terms.insert(e, v);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> C {
        self.terms.get(&vec![0; self.dim]).cloned().unwrap_or_else(C::zero)
    }

    pub fn coeff(&self, e: &[u32]) -> C {
        self.terms.get(e).cloned().unwrap_or_else(C::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// `Σ |c_α| δ^{|α|}`, the sup-majorant on the cube `|η_i| ≤ δ`.
    pub fn norm(&self, delta: f64) -> f64 {
        self.terms.iter().map(|(e, c)| c.abs_f64() * delta.powi(degree(e))).sum()
    }

    pub fn eval(&self, eta: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64() * e.iter().zip(eta).map(|(&k, x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-C::one()))
    }

    /// Product with every monomial of total degree above `cap` moved into
    /// the returned overflow norm (measured with `delta`).
    pub fn mul_capped(&self, other: &Self, cap: u32, delta: f64) -> (Self, f64) {
        let mut out = Self::zero(self.dim);
        let mut dropped = BTreeMap::<Vec<u32>, C>::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let c = ca.clone() * cb.clone();
                if e.iter().sum::<u32>() > cap {
                    let v = dropped.remove(&e).unwrap_or_else(C::zero) + c;
                    dropped.insert(e, v);
                } else {
                    out.add_term(e, c);
                }
            }
        }
        let overflow = dropped.iter().map(|(e, c)| c.abs_f64() * delta.powi(degree(e))).sum();
        (out, overflow)
    }

    pub fn derivative(&self, k: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[k] > 0 {
                let mut d = e.clone();
                d[k] -= 1;
                out.add_term(d, c.clone() * C::from_i64(e[k] as i64));
            }
        }
        out
    }

    /// Drops coefficients with `|c| ≤ tol`, returning the dropped norm.
    pub fn prune(&mut self, tol: f64, delta: f64) -> f64 {
        let mut lost = 0.0;
        self.terms.retain(|e, c| {
            let keep = c.abs_f64() > tol;
            if !keep {
                lost += c.abs_f64() * delta.powi(degree(e));
            }
            keep
        });
        lost
    }

    pub fn to_f64(&self) -> EtaPoly<f64> {
        let mut out = EtaPoly::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.to_f64());
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    coeff: String,
    exp: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    dim: usize,
    terms: Vec<TermRepr>,
}

impl<C: SeriesCoeff> Serialize for EtaPoly<C> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyRepr {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, c)| TermRepr { coeff: c.encode(), exp: e.clone() }).collect(),
        }
        .serialize(s)
    }
}

impl<'de, C: SeriesCoeff> Deserialize<'de> for EtaPoly<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = PolyRepr::deserialize(d)?;
        let mut p = Self::zero(r.dim);
        for t in r.terms {
            if t.exp.len() != r.dim {
                return Err(D::Error::custom("exponent length does not match dim"));
            }
            let c = C::decode(&t.coeff).ok_or_else(|| D::Error::custom(format!("bad coefficient {}", t.coeff)))?;
            p.add_term(t.exp, c);
        }
        Ok(p)
    }
}
