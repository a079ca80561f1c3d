use std::collections::BTreeSet;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Q;

/// The nonnegative integer combinations of a set of positive rational
/// generators, listed in increasing order up to a cutoff.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentLattice {
    #[serde(with = "crate::rational::serde_q::vec")]
    pub generators: Vec<Q>,
    #[serde(with = "crate::rational::serde_q")]
    pub cutoff: Q,
    #[serde(with = "crate::rational::serde_q::vec")]
    pub sequence: Vec<Q>,
}

impl ExponentLattice {
    pub fn contains(&self, q: Q) -> bool {
        self.sequence.binary_search(&q).is_ok()
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

/// Exponents `Σ n_j ν_j` with `n_j ≥ 0`, up to and including `cutoff`.
pub fn exponent_lattice(nu: &[Q], cutoff: Q) -> Result<ExponentLattice> {
    semigroup_lattice(nu, cutoff)
}

pub fn semigroup_lattice(generators: &[Q], cutoff: Q) -> Result<ExponentLattice> {
    if !cutoff.is_positive() {
        return Err(Error::InvalidArgument(format!("lattice cutoff must be positive, got {cutoff}")));
    }
    if generators.is_empty() || generators.iter().any(|g| !g.is_positive()) {
        return Err(Error::InvalidArgument("lattice generators must be positive".into()));
    }
    let gens: Vec<Q> = generators.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut seen = BTreeSet::from([Q::zero()]);
    let mut frontier = vec![Q::zero()];
    while let Some(x) = frontier.pop() {
        for g in &gens {
            let y = x + *g;
            if y <= cutoff && seen.insert(y) {
                frontier.push(y);
            }
        }
    }
    Ok(ExponentLattice { generators: gens, cutoff, sequence: seen.into_iter().collect() })
}
