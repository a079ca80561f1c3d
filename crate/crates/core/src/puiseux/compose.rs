use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{One, Zero};

use super::coeff::SeriesCoeff;
use super::series::PuiseuxSeries;
use crate::error::{Error, Result};
use crate::rational::{q_to_f64, qi, Q};

type TailFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A convergent power series `g(u) = Σ g_β u^β` given by a Taylor
/// polynomial, its polydisc of validity and a majorant for the omitted
/// coefficients: `tail(ρ) ≥ Σ_{β omitted} |g_β| ρ^β`.
#[derive(Clone)]
pub struct PowerSeriesGerm<C = f64> {
    pub nvars: usize,
    pub coeffs: BTreeMap<Vec<u32>, C>,
    pub radius: Vec<f64>,
    tail: TailFn,
}

impl<C: fmt::Debug> fmt::Debug for PowerSeriesGerm<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PowerSeriesGerm")
            .field("nvars", &self.nvars)
            .field("coeffs", &self.coeffs)
            .field("radius", &self.radius)
            .finish()
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::InvalidArgument(format!("series radius {radius} not in (0, 1)")));
    }
    Ok(())
}

impl<C: SeriesCoeff> PowerSeriesGerm<C> {
    pub fn new<F>(coeffs: BTreeMap<Vec<u32>, C>, radius: Vec<f64>, tail: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let nvars = radius.len();
        if let Some(e) = coeffs.keys().find(|e| e.len() != nvars) {
            return Err(Error::DimensionMismatch { expected: nvars, got: e.len() });
        }
        Ok(Self { nvars, coeffs, radius, tail: Arc::new(tail) })
    }

    /// A polynomial: exact, valid on any polydisc.
    pub fn polynomial(coeffs: BTreeMap<Vec<u32>, C>, nvars: usize) -> Result<Self> {
        Self::new(coeffs, vec![f64::INFINITY; nvars], |_| 0.0)
    }

    /// `g(u) = u`.
    pub fn identity() -> Self {
        Self::polynomial(BTreeMap::from([(vec![1], C::one())]), 1).expect("one variable")
    }

    /// `1 / (1 - u)` up to degree `order`, on `|u| ≤ radius < 1`.
    pub fn geometric(order: u32, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        let coeffs = (0..=order).map(|k| (vec![k], C::one())).collect();
        Self::new(coeffs, vec![radius], move |rho| {
            let r = rho[0];
            if r >= 1.0 { f64::INFINITY } else { r.powi(order as i32 + 1) / (1.0 - r) }
        })
    }

    /// `(1 + u)^a` up to degree `order ≥ a`, on `|u| ≤ radius < 1`.
    pub fn binomial(a: Q, order: u32, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        if qi(order as i64) < a {
            return Err(Error::InvalidArgument(format!("binomial order {order} below exponent {a}")));
        }
        let mut coeffs = BTreeMap::new();
        let mut c = Q::one();
        for k in 0..=order {
            coeffs.insert(vec![k], C::from_q(c));
            c = c * (a - qi(k as i64)) / qi(k as i64 + 1);
        }
        // For k ≥ a the ratios |a - k| / (k + 1) are at most 1.
        let next = q_to_f64(c).abs();
        Self::new(coeffs, vec![radius], move |rho| {
            let r = rho[0];
            if r >= 1.0 { f64::INFINITY } else { next * r.powi(order as i32 + 1) / (1.0 - r) }
        })
    }

    /// `exp(u)` up to degree `order`.
    pub fn exponential(order: u32, radius: f64) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        let mut c = Q::one();
        for k in 0..=order {
            coeffs.insert(vec![k], C::from_q(c));
            c /= qi(k as i64 + 1);
        }
        let next = q_to_f64(c);
        Self::new(coeffs, vec![radius], move |rho| next * rho[0].powi(order as i32 + 1) * rho[0].exp())
    }

    pub fn tail(&self, rho: &[f64]) -> f64 {
        (self.tail)(rho)
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(e, c)| c.to_f64() * e.iter().zip(u).map(|(&k, v)| v.powi(k as i32)).product::<f64>())
            .sum()
    }
}

/// `g(F_1, …, F_k)` for series `F_j` whose norms (including tails) lie in
/// the polydisc of `g`. Powers are memoized and multiplied in the ring.
pub fn compose_analytic<C: SeriesCoeff>(germ: &PowerSeriesGerm<C>, args: &[PuiseuxSeries<C>]) -> Result<PuiseuxSeries<C>> {
    if args.len() != germ.nvars {
        return Err(Error::DimensionMismatch { expected: germ.nvars, got: args.len() });
    }
    let Some(first) = args.first() else {
        return Err(Error::InvalidArgument("composition needs at least one argument".into()));
    };
    let norms: Vec<f64> = args.iter().map(|a| a.norm_with_tail()).collect();
    for (index, (&norm, &radius)) in norms.iter().zip(&germ.radius).enumerate() {
        if norm > radius {
            return Err(Error::PolydiscViolation { index, norm, radius });
        }
    }
    let truncation = args.iter().map(|a| a.truncation).min().unwrap();
    let cap = args.iter().map(|a| a.eta_cap).min().unwrap();
    let one = PuiseuxSeries::constant(first.domain, truncation, C::one()).with_eta_cap(cap);
    let mut powers: Vec<Vec<PuiseuxSeries<C>>> = args.iter().map(|_| vec![one.clone()]).collect();
    let mut out = PuiseuxSeries::zero(first.domain, truncation).with_eta_cap(cap);
    for (beta, c) in &germ.coeffs {
        if c.is_zero() {
            continue;
        }
        let mut term = one.clone();
        for (j, &k) in beta.iter().enumerate() {
            while powers[j].len() <= k as usize {
                let next = powers[j].last().unwrap().mul(&args[j])?;
                powers[j].push(next);
            }
            if k > 0 {
                term = term.mul(&powers[j][k as usize])?;
            }
        }
        out = out.add(&term.scale(c))?;
    }
    out.tail_bound += germ.tail(&norms);
    Ok(out)
}

/// `1 / s` through the geometric series in `1 - s/c`, where `c` is the
/// constant term of the `r^0` coefficient. The remainder may depend on `η`
/// as long as its norm stays below 1.
pub fn reciprocal<C: SeriesCoeff>(s: &PuiseuxSeries<C>) -> Result<PuiseuxSeries<C>> {
    let c0 = s
        .coefficient(Q::zero())
        .map(|c| c.constant_term())
        .filter(|c| !c.is_zero())
        .ok_or_else(|| Error::InvalidArgument("reciprocal needs a nonzero constant term".into()))?;
    let inv0 = C::one() / c0;
    let one = PuiseuxSeries::constant(s.domain, s.truncation, C::one()).with_eta_cap(s.eta_cap);
    let v = one.sub(&s.scale(&inv0))?;
    if v.is_zero() && v.tail_bound == 0.0 {
        return Ok(one.scale(&inv0));
    }
    let rho = v.norm_with_tail();
    if !(rho < 1.0) {
        return Err(Error::NoContraction(rho));
    }
    let by_r = match v.exponents().into_iter().find(|q| *q > Q::zero()) {
        Some(q1) => (q_to_f64(s.truncation) / q_to_f64(q1)).floor() as u32,
        None => 0,
    };
    // An r^0 part only shrinks geometrically; stop once ρ^k is at rounding level.
    let by_eta = match v.leading_exponent() {
        Some(q0) if q0.is_zero() => ((f64::EPSILON.ln() / rho.ln()).ceil() as u32).clamp(1, 64),
        _ => 0,
    };
    let order = by_r.max(by_eta);
    let germ = PowerSeriesGerm::geometric(order, rho.max(f64::MIN_POSITIVE))?;
    Ok(compose_analytic(&germ, &[v])?.scale(&inv0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puiseux::{CubeDomain, EtaPoly};
    use crate::rational::{big, q};
    use num::BigRational;

    #[test]
    fn sqrt_of_one_plus_r() {
        let d = CubeDomain::new(0, 0.0, 0.1).unwrap();
        let y = PuiseuxSeries::monomial(d, qi(3), qi(1), EtaPoly::constant(0, big(1, 1))).unwrap();
        let g = PowerSeriesGerm::<BigRational>::binomial(q(1, 2), 10, 0.5).unwrap();
        let s = compose_analytic(&g, &[y]).unwrap();
        let coeffs: Vec<_> = s.terms().map(|(_, c)| c.constant_term()).collect();
        assert_eq!(coeffs, vec![big(1, 1), big(1, 2), big(-1, 8), big(1, 16)]);
        for r in [0.0, 0.01, 0.05, 0.1] {
            let err = (s.eval(r, &[]).unwrap() - (1.0 + r).sqrt()).abs();
            assert!(err <= s.tail_bound + 1e-15, "r = {r}: {err} vs {}", s.tail_bound);
        }
    }

    #[test]
    fn geometric_in_half_powers() {
        let d = CubeDomain::new(0, 0.0, 0.25).unwrap();
        let y = PuiseuxSeries::monomial(d, qi(2), q(1, 2), EtaPoly::constant(0, big(1, 1))).unwrap();
        let g = PowerSeriesGerm::<BigRational>::geometric(4, 0.9).unwrap();
        let s = compose_analytic(&g, &[y]).unwrap();
        assert_eq!(s.exponents(), vec![qi(0), q(1, 2), qi(1), q(3, 2), qi(2)]);
    }

    #[test]
    fn exact_reciprocal() {
        let d = CubeDomain::new(0, 0.0, 0.1).unwrap();
        let s = PuiseuxSeries::from_terms(
            d,
            qi(3),
            [(qi(0), EtaPoly::constant(0, big(2, 1))), (qi(1), EtaPoly::constant(0, big(1, 1)))],
        )
        .unwrap();
        let inv = reciprocal(&s).unwrap();
        let prod = s.mul(&inv).unwrap();
        assert_eq!(prod.exponents(), vec![qi(0)]);
        assert_eq!(prod.constant_value(), big(1, 1));
        for r in [0.01, 0.1] {
            assert!((inv.eval(r, &[]).unwrap() - 1.0 / (2.0 + r)).abs() <= inv.tail_bound);
        }
    }

    #[test]
    fn polydisc_violation() {
        let d = CubeDomain::new(0, 0.0, 1.0).unwrap();
        let y = PuiseuxSeries::monomial(d, qi(4), q(1, 2), EtaPoly::constant(0, 2.0)).unwrap();
        let g = PowerSeriesGerm::geometric(8, 0.9).unwrap();
        assert!(matches!(compose_analytic(&g, &[y]), Err(Error::PolydiscViolation { index: 0, .. })));
    }
}
