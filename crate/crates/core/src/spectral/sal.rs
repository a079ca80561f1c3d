use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::{format_q, q_to_f64, Q};

/// Finitely supported `S: Q → Z₊`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MultiplicityFunction {
    pub support: BTreeMap<Q, u32>,
}

impl MultiplicityFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Q, u32)>>(pairs: I) -> Self {
        let mut s = Self::new();
        for (z, m) in pairs {
            s.insert(z, m);
        }
        s
    }

    /// Adds `m` to `S(z)`.
    pub fn insert(&mut self, z: Q, m: u32) {
        if m > 0 {
            *self.support.entry(z).or_insert(0) += m;
        }
    }

    /// `S(z)`, zero off the support.
    pub fn get(&self, z: Q) -> u32 {
        self.support.get(&z).copied().unwrap_or(0)
    }

    /// `m(S) = Σ S(z)`.
    pub fn degree(&self) -> u32 {
        self.support.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Restriction to `z < cutoff`.
    pub fn below(&self, cutoff: Q) -> Self {
        Self { support: self.support.range(..cutoff).map(|(z, m)| (*z, *m)).collect() }
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    z: String,
    multiplicity: u32,
}

impl Serialize for MultiplicityFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<Entry> = self.support.iter().map(|(z, m)| Entry { z: format_q(*z), multiplicity: *m }).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiplicityFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<Entry>::deserialize(d)?;
        let mut out = Self::new();
        for e in v {
            let z = crate::rational::parse_q(&e.z).ok_or_else(|| serde::de::Error::custom(format!("bad rational {}", e.z)))?;
            out.insert(z, e.multiplicity);
        }
        Ok(out)
    }
}

/// One term `coeff · x^z log^i x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLogTerm {
    #[serde(with = "crate::rational::serde_q")]
    pub z: Q,
    pub log_power: u32,
    pub coeff: f64,
}

/// Sorted by `(z, log power)`, equal terms merged, zeros dropped.
fn normalize(terms: Vec<PowerLogTerm>) -> Vec<PowerLogTerm> {
    let mut map: BTreeMap<(Q, u32), f64> = BTreeMap::new();
    for t in terms {
        *map.entry((t.z, t.log_power)).or_insert(0.0) += t.coeff;
    }
    map.into_iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|((z, log_power), coeff)| PowerLogTerm { z, log_power, coeff })
        .collect()
}

/// `(x∂_x - w)` applied once:
/// `x^z log^i ↦ (z - w) x^z log^i + i x^z log^{i-1}`.
pub fn euler_shift(w: Q, expansion: &[PowerLogTerm]) -> Vec<PowerLogTerm> {
    let mut out = Vec::with_capacity(2 * expansion.len());
    for t in expansion {
        let k = q_to_f64(t.z - w);
        if t.z != w {
            out.push(PowerLogTerm { coeff: k * t.coeff, ..*t });
        }
        if t.log_power > 0 {
            out.push(PowerLogTerm { z: t.z, log_power: t.log_power - 1, coeff: t.log_power as f64 * t.coeff });
        }
    }
    normalize(out)
}

/// `P_z^x[S] = Π_{z' ≤ z, z' ≠ z} (x∂_x - z')^{S(z')}`; `z = None` takes
/// every point of the support.
pub fn sal_projector_apply(s: &MultiplicityFunction, z: Option<Q>, expansion: &[PowerLogTerm]) -> Vec<PowerLogTerm> {
    let mut cur = normalize(expansion.to_vec());
    for (&w, &m) in &s.support {
        if let Some(z) = z {
            if w > z || w == z {
                continue;
            }
        }
        for _ in 0..m {
            cur = euler_shift(w, &cur);
        }
    }
    cur
}

/// Multiplicities add under `F(t) = ∫ f(x, t/x) dx/x`.
pub fn sal_convolution_exponents(s1: &MultiplicityFunction, s2: &MultiplicityFunction) -> MultiplicityFunction {
    let mut out = s1.clone();
    for (z, m) in &s2.support {
        out.insert(*z, *m);
    }
    out
}

/// `sup_t |Σ terms|` over a sample of times.
pub fn expansion_sup(expansion: &[PowerLogTerm], t: &[f64]) -> f64 {
    t.iter()
        .map(|&x| {
            expansion
                .iter()
                .map(|k| k.coeff * x.powf(q_to_f64(k.z)) * x.ln().powi(k.log_power as i32))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

/// Multiplicity function reading `S(z) = i + 1` off an expansion.
pub fn multiplicity_of(expansion: &[PowerLogTerm]) -> MultiplicityFunction {
    let mut m: BTreeMap<Q, u32> = BTreeMap::new();
    for t in expansion {
        let e = m.entry(t.z).or_insert(0);
        *e = (*e).max(t.log_power + 1);
    }
    MultiplicityFunction { support: m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn projector_examples() {
        let s = MultiplicityFunction::from_pairs([(qi(0), 1)]);
        let c = [PowerLogTerm { z: qi(0), log_power: 0, coeff: 5.0 }];
        assert!(sal_projector_apply(&s, Some(qi(1)), &c).is_empty());
        let one = [PowerLogTerm { z: qi(1), log_power: 0, coeff: 3.0 }];
        assert_eq!(sal_projector_apply(&s, Some(qi(2)), &one), one.to_vec());
        let lg = [PowerLogTerm { z: qi(1), log_power: 1, coeff: 1.0 }];
        assert_eq!(euler_shift(qi(1), &lg), vec![PowerLogTerm { z: qi(1), log_power: 0, coeff: 1.0 }]);
        let s2 = MultiplicityFunction::from_pairs([(q(1, 2), 2)]);
        let e = [PowerLogTerm { z: q(1, 2), log_power: 1, coeff: 2.0 }];
        assert!(sal_projector_apply(&s2, None, &e).is_empty());
    }

    #[test]
    fn serde_round_trip() {
        let s = MultiplicityFunction::from_pairs([(q(7, 2), 1), (qi(0), 2)]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<MultiplicityFunction>(&j).unwrap(), s);
    }
}
