use num::{Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{ExponentVector, Polynomial};
use crate::rational::{big_from_q, q_to_f64, qi, Q};

/// Quasihomogeneity type `(σ, m)` of a face.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightVector {
    #[serde(with = "crate::rational::serde_q::vec")]
    pub sigma: Vec<Q>,
    #[serde(with = "crate::rational::serde_q")]
    pub weighted_degree: Q,
}

impl WeightVector {
    pub fn new(sigma: Vec<Q>, weighted_degree: Q) -> Result<Self> {
        if sigma.is_empty() || sigma.iter().any(|s| !s.is_positive()) {
            return Err(Error::InvalidArgument(format!("weights must be positive: {sigma:?}")));
        }
        if !weighted_degree.is_positive() {
            return Err(Error::InvalidArgument("weighted degree must be positive".into()));
        }
        Ok(Self { sigma, weighted_degree })
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn degree_of(&self, e: &ExponentVector) -> Q {
        e.0.iter()
            .zip(&self.sigma)
            .fold(Q::zero(), |acc, (&k, s)| acc + *s * qi(k as i64))
    }

    pub fn min_weight(&self) -> Q {
        *self.sigma.iter().min().expect("nonempty weights")
    }

    /// Rescaled so that the smallest weight is 1.
    pub fn normalized(&self) -> Self {
        let mn = self.min_weight();
        Self {
            sigma: self.sigma.iter().map(|s| *s / mn).collect(),
            weighted_degree: self.weighted_degree / mn,
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.min_weight().is_one()
    }

    /// Index of a coordinate of smallest weight (the first one on ties).
    pub fn argmin(&self) -> usize {
        let mn = self.min_weight();
        self.sigma.iter().position(|s| *s == mn).unwrap_or(0)
    }

    pub fn sigma_f64(&self) -> Vec<f64> {
        self.sigma.iter().map(|s| q_to_f64(*s)).collect()
    }
}

/// `S_{t,σ}(x) = (t^{σ_1} x_1, …, t^{σ_{n+1}} x_{n+1})`.
pub fn scaling_apply(w: &WeightVector, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    if t <= 0.0 {
        return Err(Error::InvalidArgument(format!("scaling parameter must be positive, got {t}")));
    }
    if x.len() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), got: x.len() });
    }
    Ok(x.iter()
        .zip(&w.sigma)
        .map(|(xi, s)| t.powf(q_to_f64(*s)) * xi)
        .collect())
}

/// The Euler field `E = Σ σ_j x_j ∂_j` applied to `p`.
pub fn euler_apply(w: &WeightVector, p: &Polynomial) -> Polynomial {
    let mut out = Polynomial::zero(p.dim());
    for (e, c) in p.terms() {
        out.add_term(e.clone(), c * big_from_q(w.degree_of(e)));
    }
    out
}

/// `φ(x) = Σ_j x_j^{e_j}` with even exponents `e_j = 2 k m / σ_j`, where
/// `k ≥ 1` is the least integer making every exponent an even integer. The
/// function is quasihomogeneous of type `(σ, 2km)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrieskornFunction {
    #[serde(with = "crate::rational::serde_q::vec")]
    pub sigma: Vec<Q>,
    /// Quasihomogeneous degree `2km`.
    #[serde(with = "crate::rational::serde_q")]
    pub degree: Q,
    pub exponents: Vec<u32>,
}

impl BrieskornFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.exponents).map(|(xi, &e)| xi.powi(e as i32)).sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.exponents)
            .map(|(xi, &e)| e as f64 * xi.powi(e as i32 - 1))
            .collect()
    }

    pub fn to_polynomial(&self) -> Polynomial {
        let dim = self.exponents.len();
        let mut p = Polynomial::zero(dim);
        for (j, &e) in self.exponents.iter().enumerate() {
            let mut v = vec![0; dim];
            v[j] = e;
            p.add_term(ExponentVector(v), num::BigRational::one());
        }
        p
    }
}

pub fn phi_gamma(w: &WeightVector) -> Result<BrieskornFunction> {
    let m = w.weighted_degree;
    // k must clear the denominators of every m/σ_j.
    let mut k: i64 = 1;
    for s in &w.sigma {
        let r = m / *s;
        k = k.lcm(r.denom());
    }
    let mut exponents = Vec::with_capacity(w.dim());
    for s in &w.sigma {
        let e = qi(2 * k) * m / *s;
        if !e.is_integer() || e.numer() % 2 != 0 || !e.is_positive() {
            return Err(Error::InvalidArgument(format!("non-integer Brieskorn exponent {e}")));
        }
        exponents.push(e.to_integer().to_u32().ok_or_else(|| Error::Other("exponent overflow".into()))?);
    }
    Ok(BrieskornFunction { sigma: w.sigma.clone(), degree: qi(2 * k) * m, exponents })
}
