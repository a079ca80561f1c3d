use serde::{Deserialize, Serialize};

use super::diagram::{face_polynomial, NewtonFace};
use crate::cone::{link_solve, ChartOptions};
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::{q_to_f64, Q};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentConeReport {
    pub samples: usize,
    /// `max |f|` over the sampled cone points.
    pub residual_max: f64,
    /// `max |f| / s^{m'}` with `s` the Brieskorn radius and `m'` the least
    /// weighted degree of the remainder.
    pub residual_constant: f64,
    /// `max |f| / s^m`, which the constant bounds by `c ε^{m' - m}`.
    pub relative_residual: f64,
    #[serde(with = "crate::rational::serde_q")]
    pub m: Q,
    #[serde(with = "crate::rational::serde_q::option")]
    pub m_prime: Option<Q>,
    /// Smallest `|⟨∇f, ∇f_Γ⟩| / (|∇f| |∇f_Γ|)`.
    pub min_cosine: f64,
    /// Set when the cosine falls below `1 - ε²`.
    pub flagged: bool,
}

/// Samples `S_{s,ν} ζ(η)` for `s ∈ (0, ε]` over the link charts of the face
/// and keeps points with `|f| < δ`.
pub fn tangent_cone_check(f: &Polynomial, face: &NewtonFace, samples: usize, epsilon: f64, delta: f64) -> Result<TangentConeReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let (fg, rg) = face_polynomial(f, face)?;
    let nu = face.weight.normalized();
    let m = nu.weighted_degree;
    let m_prime = rg.terms().map(|(e, _)| nu.degree_of(e)).min();
    let charts = link_solve(f, face, &ChartOptions { delta: 0.5, epsilon, grid: 9 })?;
    let ff = f.to_float();
    let fgf = fg.to_float();
    let nodes: usize = charts.iter().map(|c| c.nodes.len()).sum();
    let levels = (samples / nodes.max(1)).max(1);
    let sig = nu.sigma_f64();
    let mut rep = TangentConeReport {
        samples: 0,
        residual_max: 0.0,
        residual_constant: 0.0,
        relative_residual: 0.0,
        m,
        m_prime,
        min_cosine: 1.0,
        flagged: false,
    };
    for chart in &charts {
        for node in &chart.nodes {
            let z = chart.zeta(&node.eta)?;
            for k in 0..levels {
                let s = epsilon * (k + 1) as f64 / levels as f64;
                let x: Vec<f64> = z.iter().zip(&sig).map(|(v, w)| s.powf(*w) * v).collect();
                let v = ff.eval(&x).abs();
                if !(v < delta) {
                    continue;
                }
                rep.samples += 1;
                rep.residual_max = rep.residual_max.max(v);
                rep.relative_residual = rep.relative_residual.max(v / s.powf(q_to_f64(m)));
                if let Some(mp) = m_prime {
                    rep.residual_constant = rep.residual_constant.max(v / s.powf(q_to_f64(mp)));
                }
                let g = ff.gradient(&x);
                let h = fgf.gradient(&x);
                let dot: f64 = g.iter().zip(&h).map(|(a, b)| a * b).sum();
                let ng = g.iter().map(|a| a * a).sum::<f64>().sqrt();
                let nh = h.iter().map(|a| a * a).sum::<f64>().sqrt();
                if ng > 0.0 && nh > 0.0 {
                    rep.min_cosine = rep.min_cosine.min(dot.abs() / (ng * nh));
                }
            }
        }
    }
    if rep.samples == 0 {
        return Err(Error::NoSamplePoints);
    }
    rep.flagged = rep.min_cosine < 1.0 - epsilon * epsilon;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::newton_diagram;
    use crate::rational::qi;

    #[test]
    fn quasihomogeneous_is_exact() {
        let f = Polynomial::parse("x1^2 - x2^3", 2).unwrap();
        let face = &newton_diagram(&f).unwrap().faces[0];
        let rep = tangent_cone_check(&f, face, 1000, 0.3, 1.0).unwrap();
        assert!(rep.residual_max < 1e-15);
        assert!((rep.min_cosine - 1.0).abs() < 1e-15);
        assert!(!rep.flagged);
    }

    #[test]
    fn quartic_perturbation() {
        let f = Polynomial::parse("x1^2 - x2^3 - x2^4", 2).unwrap();
        let face = &newton_diagram(&f).unwrap().faces[0];
        let rep = tangent_cone_check(&f, face, 1000, 0.1, 1.0).unwrap();
        // Weighted degrees 8 and 6 for σ = (3, 2), i.e. 4 and 3 once normalized.
        assert_eq!(rep.m_prime, Some(qi(4)));
        assert_eq!(rep.m, qi(3));
        assert!(rep.residual_constant > 0.0 && rep.residual_constant < 1.0);
        assert!(rep.relative_residual <= rep.residual_constant * 0.1 * (1.0 + 1e-12));
        assert!(!rep.flagged);
    }

    #[test]
    fn empty_slab() {
        let f = Polynomial::parse("x1^2 - x2^3 - x2^4", 2).unwrap();
        let face = &newton_diagram(&f).unwrap().faces[0];
        assert_eq!(tangent_cone_check(&f, face, 100, 0.1, 0.0), Err(Error::NoSamplePoints));
    }
}
