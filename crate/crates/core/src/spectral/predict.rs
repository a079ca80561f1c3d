//! Predicted exponent lattice of the localized heat trace.
//!
//! Generation rule (version 1):
//! * smooth ladder `-n/2 + j`, plus `-n/2 + 1/2 + j` when the cutoff does
//!   not vanish at the outer boundary;
//! * for each face with `α > 0` and each `z ≥ 0` in the support of
//!   `S = S₁ + S₂`, the points `-(n-1)/2 + (z + q + 1)/α`, `q` running over
//!   the monoid generated by the face's radial shifts;
//! * log power at `e` is (number of sources meeting at `e`) − 1, a face
//!   counting with `max S(z)` over its representations, capped by `log_cap`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::fit::LatticePoint;
use super::sal::{sal_convolution_exponents, MultiplicityFunction};
use crate::error::{Error, Result};
use crate::rational::{qi, Q};

pub const RULE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceExponents {
    #[serde(with = "crate::rational::serde_q")]
    pub alpha: Q,
    /// Positive generators of the radial exponent monoid of the metric.
    #[serde(with = "crate::rational::serde_q::vec")]
    pub shifts: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionOptions {
    /// `ℓ = 0..=ell_max` in `S₁(ℓα)` and `S₂`.
    pub ell_max: u32,
    /// `p = 1..=p_max` in `S₂`.
    pub p_max: u32,
    /// `j = 0..=j_max` in `S₂`.
    pub j_max: u32,
    /// Largest exponent kept.
    #[serde(with = "crate::rational::serde_q")]
    pub cutoff: Q,
    /// Cutoff function nonzero at the outer boundary.
    pub boundary: bool,
    pub log_cap: u32,
}

impl Default for PredictionOptions {
    fn default() -> Self {
        Self { ell_max: 2, p_max: 2, j_max: 1, cutoff: qi(1), boundary: false, log_cap: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedExponent {
    #[serde(with = "crate::rational::serde_q")]
    pub z: Q,
    pub log_power: u32,
    pub weyl: bool,
    /// Indices of faces producing this exponent.
    pub faces: Vec<usize>,
}

/// `S₁(ℓα) = 1`, `ℓ = 0..=ell_max`.
pub fn s1(alpha: Q, ell_max: u32) -> MultiplicityFunction {
    MultiplicityFunction::from_pairs((0..=ell_max).map(|l| (qi(l as i64) * alpha, 1)))
}

/// `ℓ((3(p-1) + 2j)α/2 - 1)`.
pub fn s2_point(alpha: Q, ell: u32, p: u32, j: u32) -> Q {
    qi(ell as i64) * (qi(3 * (p as i64 - 1) + 2 * j as i64) * alpha / qi(2) - qi(1))
}

/// `S₂` from both forms of the support, `ℓ`-scaled and unscaled, merged
/// with multiplicity one per distinct point.
pub fn s2(alpha: Q, ell_max: u32, p_max: u32, j_max: u32) -> MultiplicityFunction {
    let mut pts = std::collections::BTreeSet::new();
    for p in 1..=p_max {
        for j in 0..=j_max {
            for ell in 1..=ell_max {
                pts.insert(s2_point(alpha, ell, p, j));
            }
            pts.insert((Q::new(3 * (p as i64 - 1), 2) + qi(j as i64)) * alpha - qi(1));
        }
    }
    MultiplicityFunction::from_pairs(pts.into_iter().map(|z| (z, 1)))
}

/// Sums of the generators not exceeding `bound`, including zero.
fn monoid(gens: &[Q], bound: Q) -> Vec<Q> {
    let mut out = std::collections::BTreeSet::new();
    let mut stack = vec![qi(0)];
    while let Some(x) = stack.pop() {
        if x > bound || !out.insert(x) {
            continue;
        }
        for g in gens.iter().filter(|g| **g > qi(0)) {
            stack.push(x + *g);
        }
    }
    out.into_iter().collect()
}

pub fn predicted_exponents(n: u32, faces: &[FaceExponents], opts: &PredictionOptions) -> Result<Vec<PredictedExponent>> {
    let lead = Q::new(-(n as i64), 2);
    if opts.cutoff <= lead {
        return Err(Error::InvalidArgument(format!("cutoff {} not above the leading exponent {}", opts.cutoff, lead)));
    }
    // exponent -> (weyl, per-face multiplicity)
    let mut table: BTreeMap<Q, (bool, BTreeMap<usize, u32>)> = BTreeMap::new();
    let step = if opts.boundary { Q::new(1, 2) } else { qi(1) };
    let mut e = lead;
    while e <= opts.cutoff {
        table.entry(e).or_default().0 = true;
        e += step;
    }
    let offset = Q::new(n as i64 - 1, 2);
    for (idx, face) in faces.iter().enumerate() {
        if face.alpha <= qi(0) {
            continue;
        }
        let s = sal_convolution_exponents(&s1(face.alpha, opts.ell_max), &s2(face.alpha, opts.ell_max, opts.p_max, opts.j_max));
        let zmax = (opts.cutoff + offset) * face.alpha - qi(1);
        let shifts = monoid(&face.shifts, zmax.max(qi(0)));
        for (&z, &m) in s.support.iter().filter(|(z, _)| **z >= qi(0)) {
            for &q in &shifts {
                let e = -offset + (z + q + qi(1)) / face.alpha;
                if e > opts.cutoff {
                    break;
                }
                let slot = table.entry(e).or_default().1.entry(idx).or_insert(0);
                *slot = (*slot).max(m);
            }
        }
    }
    Ok(table
        .into_iter()
        .map(|(z, (weyl, per_face))| {
            let total = weyl as u32 + per_face.values().sum::<u32>();
            PredictedExponent {
                z,
                log_power: total.saturating_sub(1).min(opts.log_cap),
                weyl,
                faces: per_face.keys().copied().collect(),
            }
        })
        .collect())
}

/// Fit dictionary from a prediction. Points shared with the smooth ladder
/// stay fixed during exponent refinement.
pub fn lattice(pred: &[PredictedExponent]) -> Vec<LatticePoint> {
    pred.iter().map(|p| LatticePoint { z: p.z, max_log: p.log_power, weyl: p.weyl }).collect()
}

/// Distance from `x` to the nearest predicted exponent.
pub fn distance_to_lattice(pred: &[PredictedExponent], x: f64) -> f64 {
    pred.iter()
        .map(|p| (crate::rational::q_to_f64(p.z) - x).abs())
        .fold(f64::INFINITY, f64::min)
}
