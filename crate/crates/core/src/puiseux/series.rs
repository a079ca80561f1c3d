use std::collections::BTreeMap;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::coeff::SeriesCoeff;
use super::etapoly::EtaPoly;
use crate::error::{Error, Result};
use crate::newton::ExponentLattice;
use crate::rational::{q_to_f64, qi, Q};

/// Largest exponent denominator the ring accepts.
pub const DENOMINATOR_CAP: i64 = 512;
/// Default bound on the total `η`-degree of coefficients.
pub const DEFAULT_ETA_CAP: u32 = 16;

/// The domain `(0, ε] × [-δ, δ]^d` of a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeDomain {
    pub eta_dim: usize,
    pub delta: f64,
    pub epsilon: f64,
}

impl CubeDomain {
    pub fn new(eta_dim: usize, delta: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !(delta >= 0.0) || !epsilon.is_finite() || !delta.is_finite() {
            return Err(Error::InvalidArgument(format!("bad domain: epsilon {epsilon}, delta {delta}")));
        }
        Ok(Self { eta_dim, delta, epsilon })
    }

    pub fn contains(&self, r: f64, eta: &[f64]) -> bool {
        eta.len() == self.eta_dim
            && r >= 0.0
            && r <= self.epsilon * (1.0 + 1e-12)
            && eta.iter().all(|x| x.abs() <= self.delta * (1.0 + 1e-12))
    }

    pub fn is_within(&self, other: &Self) -> bool {
        self.eta_dim == other.eta_dim && self.delta <= other.delta && self.epsilon <= other.epsilon
    }
}

/// `sup_{q > q0} q θ^q`, used for Cauchy-type estimates of derivatives of
/// the omitted tail after shrinking the domain by `θ`.
fn derivative_gain(q0: f64, theta: f64) -> f64 {
    if theta >= 1.0 {
        return f64::INFINITY;
    }
    let qstar = 1.0 / (1.0 / theta).ln();
    let q = q0.max(qstar);
    q * theta.powf(q)
}

/// Truncated series `Σ_{q ≤ Q} f_q(η) r^q` with a certified bound on the
/// omitted part, measured in the norm `Σ_q ‖f_q‖ ε^q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "C: SeriesCoeff")]
pub struct PuiseuxSeries<C = f64> {
    pub domain: CubeDomain,
    #[serde(with = "crate::rational::serde_q")]
    pub truncation: Q,
    pub tail_bound: f64,
    pub eta_cap: u32,
    #[serde(with = "term_list")]
    terms: BTreeMap<Q, EtaPoly<C>>,
}

impl<C: SeriesCoeff> PuiseuxSeries<C> {
    pub fn zero(domain: CubeDomain, truncation: Q) -> Self {
        Self { domain, truncation, tail_bound: 0.0, eta_cap: DEFAULT_ETA_CAP, terms: BTreeMap::new() }
    }

    pub fn constant(domain: CubeDomain, truncation: Q, c: C) -> Self {
        let mut s = Self::zero(domain, truncation);
        if !c.is_zero() {
            s.terms.insert(Q::zero(), EtaPoly::constant(domain.eta_dim, c));
        }
        s
    }

    /// `c(η) r^q`.
    pub fn monomial(domain: CubeDomain, truncation: Q, q: Q, c: EtaPoly<C>) -> Result<Self> {
        Self::from_terms(domain, truncation, [(q, c)])
    }

    /// Builds a series; terms above the truncation order go into the tail.
    pub fn from_terms<I>(domain: CubeDomain, truncation: Q, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Q, EtaPoly<C>)>,
    {
        let mut s = Self::zero(domain, truncation);
        for (q, c) in terms {
            check_exponent(q)?;
            if c.dim != domain.eta_dim {
                return Err(Error::DimensionMismatch { expected: domain.eta_dim, got: c.dim });
            }
            s.push(q, c);
        }
        Ok(s)
    }

    pub fn with_eta_cap(mut self, cap: u32) -> Self {
        self.eta_cap = cap;
        self
    }

    /// Treats the retained terms as an exact finite sum and raises the
    /// truncation order; the previous tail bound is discarded.
    pub fn as_exact_sum(&self, truncation: Q) -> Self {
        let mut out = self.clone();
        out.truncation = truncation.max(self.truncation);
        out.tail_bound = 0.0;
        out
    }

    /// The `r^0` coefficient evaluated at `η = 0`.
    pub fn constant_value(&self) -> C {
        self.terms.get(&Q::zero()).map(|c| c.constant_term()).unwrap_or_else(C::zero)
    }

    pub fn with_tail(mut self, tail: f64) -> Self {
        self.tail_bound += tail;
        self
    }

    fn push(&mut self, q: Q, c: EtaPoly<C>) {
        if c.is_zero() {
            return;
        }
        if q > self.truncation {
            self.tail_bound += c.norm(self.domain.delta) * self.domain.epsilon.powf(q_to_f64(q));
            return;
        }
        let e = self.terms.entry(q).or_insert_with(|| EtaPoly::zero(c.dim));
        *e = e.add(&c);
        if e.is_zero() {
            self.terms.remove(&q);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Q, &EtaPoly<C>)> {
        self.terms.iter()
    }

    pub fn exponents(&self) -> Vec<Q> {
        self.terms.keys().copied().collect()
    }

    pub fn coefficient(&self, q: Q) -> Option<&EtaPoly<C>> {
        self.terms.get(&q)
    }

    pub fn leading_exponent(&self) -> Option<Q> {
        self.terms.keys().next().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ_q ‖f_q‖_Ω ε^q` over the retained terms.
    pub fn norm(&self) -> f64 {
        let d = &self.domain;
        self.terms
            .iter()
            .map(|(q, c)| c.norm(d.delta) * d.epsilon.powf(q_to_f64(*q)))
            .sum()
    }

    pub fn norm_with_tail(&self) -> f64 {
        self.norm() + self.tail_bound
    }

    fn same_domain(&self, other: &Self) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        Ok(())
    }

    /// Lowers the truncation order, moving the cut terms into the tail.
    pub fn truncate(&self, truncation: Q) -> Self {
        let mut out = Self { terms: BTreeMap::new(), truncation, ..self.clone() };
        for (q, c) in &self.terms {
            out.push(*q, c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_domain(other)?;
        let t = self.truncation.min(other.truncation);
        let mut out = self.truncate(t);
        out.tail_bound += other.tail_bound;
        out.eta_cap = self.eta_cap.min(other.eta_cap);
        for (q, c) in &other.terms {
            out.push(*q, c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-C::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self { terms: BTreeMap::new(), tail_bound: self.tail_bound * s.abs_f64(), ..self.clone() };
        for (q, c) in &self.terms {
            out.push(*q, c.scale(s));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_domain(other)?;
        let d = self.domain;
        let t = self.truncation.min(other.truncation);
        let cap = self.eta_cap.min(other.eta_cap);
        let (na, nb) = (self.norm(), other.norm());
        let (ta, tb) = (self.tail_bound, other.tail_bound);
        let mut out = Self::zero(d, t).with_eta_cap(cap);
        out.tail_bound = na * tb + nb * ta + ta * tb;
        for (qa, ca) in &self.terms {
            for (qb, cb) in &other.terms {
                let q = *qa + *qb;
                check_exponent(q)?;
                let weight = d.epsilon.powf(q_to_f64(q));
                if q > t {
                    out.tail_bound += ca.norm(d.delta) * cb.norm(d.delta) * weight;
                    continue;
                }
                let (p, over) = ca.mul_capped(cb, cap, d.delta);
                out.tail_bound += over * weight;
                out.push(q, p);
            }
        }
        if !C::EXACT {
            out.tail_bound += 4.0 * f64::EPSILON * na * nb;
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::constant(self.domain, self.truncation, C::one()).with_eta_cap(self.eta_cap);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Multiplies by `r^q`; the result must keep nonnegative exponents.
    pub fn shift(&self, q: Q) -> Result<Self> {
        let mut out = Self::zero(self.domain, self.truncation + q).with_eta_cap(self.eta_cap);
        for (e, c) in &self.terms {
            let ne = *e + q;
            check_exponent(ne)?;
            out.terms.insert(ne, c.clone());
        }
        // The tail sits above the old truncation, so its exponents shift too.
        let factor = self.domain.epsilon.powf(q_to_f64(q));
        out.tail_bound = self.tail_bound * factor.max(0.0);
        Ok(out)
    }

    /// Restriction to a smaller domain.
    pub fn restrict(&self, domain: CubeDomain) -> Result<Self> {
        if !domain.is_within(&self.domain) {
            return Err(Error::DomainMismatch);
        }
        let mut out = self.clone();
        out.domain = domain;
        // The tail norm is monotone in (ε, δ).
        Ok(out)
    }

    /// The retained part at `(r, η)`; the true value differs by at most
    /// `tail_bound`. At `r = 0` this is the `r^0` coefficient.
    pub fn eval(&self, r: f64, eta: &[f64]) -> Result<f64> {
        if eta.len() != self.domain.eta_dim {
            return Err(Error::DimensionMismatch { expected: self.domain.eta_dim, got: eta.len() });
        }
        if !self.domain.contains(r, eta) {
            return Err(Error::OutOfDomain(format!("r = {r}, eta = {eta:?}")));
        }
        Ok(self.eval_unchecked(r, eta))
    }

    pub fn eval_unchecked(&self, r: f64, eta: &[f64]) -> f64 {
        self.terms.iter().map(|(q, c)| c.eval(eta) * r.powf(q_to_f64(*q))).sum()
    }

    /// Checks every retained exponent against a lattice.
    pub fn check_lattice(&self, lattice: &ExponentLattice) -> Result<()> {
        match self.terms.keys().find(|q| !lattice.contains(**q)) {
            Some(q) => Err(Error::LatticeMismatch(q.to_string())),
            None => Ok(()),
        }
    }

    pub fn to_f64(&self) -> PuiseuxSeries<f64> {
        PuiseuxSeries {
            domain: self.domain,
            truncation: self.truncation,
            tail_bound: self.tail_bound,
            eta_cap: self.eta_cap,
            terms: self.terms.iter().map(|(q, c)| (*q, c.to_f64())).collect(),
        }
    }

    /// `r ∂_r`, defined on the domain with `ε` shrunk by `theta`. For an
    /// exact series (`tail_bound == 0`) `theta = 1` is allowed.
    pub fn euler_derivative(&self, theta: f64) -> Result<Self> {
        let domain = self.shrunk(theta, 1.0)?;
        let mut out = Self::zero(domain, self.truncation).with_eta_cap(self.eta_cap);
        for (q, c) in &self.terms {
            if !q.is_zero() {
                out.terms.insert(*q, c.scale(&C::from_q(*q)));
            }
        }
        if self.tail_bound > 0.0 {
            out.tail_bound = self.tail_bound * derivative_gain(q_to_f64(self.truncation), theta);
        }
        Ok(out)
    }

    /// `∂_r`. Fails if a term `r^q` with `0 < q < 1` is present, since the
    /// derivative would leave the ring.
    pub fn r_derivative(&self, theta: f64) -> Result<Self> {
        if let Some(q) = self.terms.keys().find(|q| q.is_positive() && **q < qi(1)) {
            return Err(Error::NegativeExponent(format!("d/dr of r^{q}")));
        }
        if self.tail_bound > 0.0 && self.truncation < qi(1) {
            return Err(Error::NegativeExponent(format!("tail above order {} may hold r^q with q < 1", self.truncation)));
        }
        let domain = self.shrunk(theta, 1.0)?;
        let mut out = Self::zero(domain, self.truncation - qi(1)).with_eta_cap(self.eta_cap);
        for (q, c) in &self.terms {
            if !q.is_zero() {
                out.terms.insert(*q - qi(1), c.scale(&C::from_q(*q)));
            }
        }
        if self.tail_bound > 0.0 {
            let rho = domain.epsilon;
            out.tail_bound = self.tail_bound * derivative_gain(q_to_f64(self.truncation), theta) / rho;
        }
        Ok(out)
    }

    /// `∂_{η_k}` on the cube shrunk by `theta`.
    pub fn eta_derivative(&self, k: usize, theta: f64) -> Result<Self> {
        if k >= self.domain.eta_dim {
            return Err(Error::VariableOutOfRange { index: k, dim: self.domain.eta_dim });
        }
        let domain = self.shrunk(1.0, theta)?;
        let mut out = Self::zero(domain, self.truncation).with_eta_cap(self.eta_cap);
        for (q, c) in &self.terms {
            let d = c.derivative(k);
            if !d.is_zero() {
                out.terms.insert(*q, d);
            }
        }
        if self.tail_bound > 0.0 {
            let rho = domain.delta;
            out.tail_bound = self.tail_bound * derivative_gain(0.0, theta) / rho;
        }
        Ok(out)
    }

    fn shrunk(&self, theta_r: f64, theta_eta: f64) -> Result<CubeDomain> {
        for t in [theta_r, theta_eta] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidArgument(format!("shrink factor {t} not in (0, 1]")));
            }
        }
        if self.tail_bound > 0.0 && (theta_r == 1.0 && theta_eta == 1.0) {
            return Err(Error::InvalidArgument("differentiating a series with a tail needs a shrink factor below 1".into()));
        }
        let d = self.domain;
        CubeDomain::new(d.eta_dim, d.delta * theta_eta, d.epsilon * theta_r)
    }

    /// Substitutes a fixed `η`, leaving a series in `r` alone.
    pub fn at_eta(&self, eta: &[f64]) -> Result<Vec<(Q, f64)>> {
        if eta.len() != self.domain.eta_dim {
            return Err(Error::DimensionMismatch { expected: self.domain.eta_dim, got: eta.len() });
        }
        Ok(self.terms.iter().map(|(q, c)| (*q, c.eval(eta))).collect())
    }
}

pub(crate) fn check_exponent(q: Q) -> Result<()> {
    if q.is_negative() {
        return Err(Error::NegativeExponent(format!("exponent {q}")));
    }
    if *q.denom() > DENOMINATOR_CAP {
        return Err(Error::DenominatorCap(*q.denom(), DENOMINATOR_CAP));
    }
    Ok(())
}

mod term_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{EtaPoly, SeriesCoeff};
    use crate::rational::Q;

    #[derive(Serialize, Deserialize)]
    #[serde(bound = "C: SeriesCoeff")]
    struct Term<C> {
        #[serde(with = "crate::rational::serde_q")]
        exp: Q,
        coeff: EtaPoly<C>,
    }

    pub fn serialize<S: Serializer, C: SeriesCoeff>(m: &BTreeMap<Q, EtaPoly<C>>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Term<C>> = m.iter().map(|(q, c)| Term { exp: *q, coeff: c.clone() }).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, C: SeriesCoeff>(d: D) -> Result<BTreeMap<Q, EtaPoly<C>>, D::Error> {
        let v = Vec::<Term<C>>::deserialize(d)?;
        Ok(v.into_iter().map(|t| (t.exp, t.coeff)).collect())
    }
}
