use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{qi, Q};

/// `P = r^β ∂_θ^γ ∂_r^d R_α(λ)^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventFactor {
    pub m: i64,
    #[serde(with = "crate::rational::serde_q")]
    pub beta: Q,
    pub gamma: Vec<u32>,
    pub d: i64,
    #[serde(with = "crate::rational::serde_q")]
    pub alpha: Q,
}

impl ResolventFactor {
    /// `β ≥ 0` and `β/α + d/2 ≤ 1`.
    pub fn in_bounded_family(&self) -> bool {
        self.beta >= qi(0) && self.beta / self.alpha + Q::new(self.d, 2) <= qi(1)
    }
}

/// Index and, for `β > 0`, degree `deg₊` of a resolvent factor.
///
/// `ind = m - β/α + d/2` for `β ≤ 0` and `m - d/2` for `β > 0`;
/// `deg₊ = β - d + 1`.
pub fn resolvent_index(f: &ResolventFactor) -> Result<(Q, Option<Q>)> {
    if f.alpha <= qi(0) {
        return Err(Error::InvalidArgument("α must be positive".into()));
    }
    let m = qi(f.m);
    let half_d = Q::new(f.d, 2);
    if f.beta <= qi(0) {
        Ok((m - f.beta / f.alpha + half_d, None))
    } else {
        Ok((m - half_d, Some(f.beta - qi(f.d) + qi(1))))
    }
}

/// `λ`-exponent of `‖r^{-β} Δ_k ∂_r^d R_α(λ)‖`: `-1 + β/α + d/2`.
///
/// Here `β` enters with the opposite sign to [`resolvent_index`].
pub fn bound_exponent(beta: Q, d: i64, alpha: Q) -> Result<Q> {
    if alpha <= qi(0) {
        return Err(Error::InvalidArgument("α must be positive".into()));
    }
    Ok(qi(-1) + beta / alpha + Q::new(d, 2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannExponent {
    /// `κ = 1 - β/α`, `β = max μ`.
    #[serde(with = "crate::rational::serde_q")]
    pub kappa: Q,
    /// `λ`-exponent of the `j`-th product: `-(1 + jκ)`.
    #[serde(with = "crate::rational::serde_q")]
    pub lambda_exponent: Q,
    /// `-(p + j - (n+5)/2) + 1/α`.
    #[serde(with = "crate::rational::serde_q")]
    pub bound_exponent: Q,
}

/// Exponents of the `j`-th Neumann term after `p` differentiations.
pub fn neumann_term_exponent(j: u32, p: u32, mu: &[Q], alpha: Q, n: u32) -> Result<NeumannExponent> {
    if alpha <= qi(0) {
        return Err(Error::InvalidArgument("α must be positive".into()));
    }
    let beta = mu.iter().copied().max().unwrap_or(qi(0));
    let kappa = qi(1) - beta / alpha;
    if kappa <= qi(0) {
        return Err(Error::NotSubordinate(format!("κ = {} for β = {}", kappa, beta)));
    }
    let j = qi(j as i64);
    Ok(NeumannExponent {
        kappa,
        lambda_exponent: -(qi(1) + j * kappa),
        bound_exponent: -(qi(p as i64) + j - Q::new(n as i64 + 5, 2)) + qi(1) / alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn f(m: i64, beta: Q, d: i64) -> ResolventFactor {
        ResolventFactor { m, beta, gamma: vec![], d, alpha: qi(3) }
    }

    #[test]
    fn index_examples() {
        assert_eq!(resolvent_index(&f(1, qi(0), 0)).unwrap(), (qi(1), None));
        assert_eq!(resolvent_index(&f(1, qi(-3), 0)).unwrap(), (qi(2), None));
        assert_eq!(resolvent_index(&f(2, qi(2), 1)).unwrap(), (q(3, 2), Some(qi(2))));
    }

    #[test]
    fn neumann_examples() {
        let base = neumann_term_exponent(0, 0, &[qi(1)], qi(3), 2).unwrap();
        assert_eq!(base.lambda_exponent, qi(-1));
        assert_eq!(base.kappa, q(2, 3));
        assert_eq!(neumann_term_exponent(1, 4, &[], qi(3), 2).unwrap().bound_exponent, q(-7, 6));
        assert!(matches!(neumann_term_exponent(0, 0, &[qi(3)], qi(3), 2), Err(Error::NotSubordinate(_))));
    }
}
