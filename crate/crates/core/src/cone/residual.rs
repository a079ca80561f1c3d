use num::{BigRational, Integer, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::roots::rational_approx;
use super::scheme::Parametrization;
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::{big_from_f64, big_to_f64, Q};

/// Validation grid: `nr` radii log-spaced over `[ε/100, ε]` and `neta`
/// points per transversal direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualGrid {
    pub nr: usize,
    pub neta: usize,
}

impl Default for ResidualGrid {
    fn default() -> Self {
        Self { nr: 32, neta: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub r: f64,
    pub eta: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max: f64,
    pub points: Vec<ResidualPoint>,
    /// Slope of `log max_η |f∘Φ|` against `log r`.
    pub decay_exponent: Option<f64>,
    /// `m + q₁` with `q₁` the first element above the truncation order of
    /// the semigroup generated by the remainder exponents.
    #[serde(with = "crate::rational::serde_q::option")]
    pub predicted_exponent: Option<Q>,
}

/// `|f(Φ(r, η))|` evaluated exactly: radii are chosen as `t^D` with `t`
/// rational and `D` clearing every exponent denominator, so the truncated
/// series are evaluated without rounding.
pub fn parametrization_residual(p: &Parametrization, f: &Polynomial, grid: &ResidualGrid) -> Result<ResidualReport> {
    if grid.nr == 0 || (p.domain().eta_dim > 0 && grid.neta == 0) {
        return Err(Error::NoSamplePoints);
    }
    let domain = p.domain();
    let mut den: i64 = 1;
    for (c, nu) in p.chi.iter().zip(&p.nu) {
        den = den.lcm(nu.denom());
        for e in c.exponents() {
            den = den.lcm(e.denom());
        }
    }
    let d = domain.eta_dim;
    let per_dim = if d <= 1 { grid.neta } else { grid.neta.min(6) };
    let line: Vec<f64> = if per_dim <= 1 {
        vec![0.0]
    } else {
        (0..per_dim).map(|k| domain.delta * (-1.0 + 2.0 * k as f64 / (per_dim - 1) as f64)).collect()
    };
    let mut etas: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..d {
        etas = etas
            .into_iter()
            .flat_map(|e| {
                line.iter().map(move |x| {
                    let mut v = e.clone();
                    v.push(*x);
                    v
                })
            })
            .collect();
    }
    match &p.chi_exact {
        Some(ex) => residual_with(p, f, grid, den, &etas, &exact_terms(ex, den)),
        None => residual_float(p, f, grid, &etas),
    }
}

/// Floating evaluation for fitted series, whose misfit dominates rounding.
fn residual_float(p: &Parametrization, f: &Polynomial, grid: &ResidualGrid, etas: &[Vec<f64>]) -> Result<ResidualReport> {
    let domain = p.domain();
    let ff = f.to_float();
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for i in 0..grid.nr {
        let r = radius(domain.epsilon, i, grid.nr);
        let mut row_max: f64 = 0.0;
        for eta in etas {
            let x = p.eval(r, eta)?;
            let v = ff.eval(&x).abs();
            row_max = row_max.max(v);
            points.push(ResidualPoint { r, eta: eta.clone(), value: v });
        }
        rows.push((r, row_max));
    }
    Ok(finish(p, points, &rows))
}

fn radius(epsilon: f64, i: usize, n: usize) -> f64 {
    let frac = if n == 1 { 1.0 } else { i as f64 / (n - 1) as f64 };
    epsilon * 10f64.powf(-2.0 * (1.0 - frac))
}

type ExactChi = Vec<Vec<(i64, Vec<(Vec<u32>, BigRational)>)>>;

fn exact_terms(ex: &[crate::puiseux::PuiseuxSeries<BigRational>], den: i64) -> ExactChi {
    ex.iter()
        .map(|c| {
            c.terms()
                .map(|(q, poly)| ((*q * den).to_integer(), poly.terms().map(|(e, v)| (e.clone(), v.clone())).collect()))
                .collect()
        })
        .collect()
}

fn residual_with(p: &Parametrization, f: &Polynomial, grid: &ResidualGrid, den: i64, etas: &[Vec<f64>], chi: &ExactChi) -> Result<ResidualReport> {
    let domain = p.domain();
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for i in 0..grid.nr {
        let r_target = radius(domain.epsilon, i, grid.nr);
        let mut t = rational_approx(r_target.powf(1.0 / den as f64), 1 << 24);
        let mut r = big_to_f64(&num::pow(t.clone(), den as usize));
        while r > domain.epsilon {
            t = t * BigRational::new(1023.into(), 1024.into());
            r = big_to_f64(&num::pow(t.clone(), den as usize));
        }
        let mut row_max: f64 = 0.0;
        for eta in etas {
            let eta_exact: Vec<BigRational> = eta.iter().map(|x| big_from_f64(*x)).collect();
            let x: Vec<BigRational> = chi
                .iter()
                .zip(&p.nu)
                .map(|(terms, nu)| {
                    let mut acc = BigRational::zero();
                    for (k, poly) in terms {
                        let mut c = BigRational::zero();
                        for (e, v) in poly {
                            let mut m = v.clone();
                            for (x, &pw) in eta_exact.iter().zip(e) {
                                if pw > 0 {
                                    m *= num::pow(x.clone(), pw as usize);
                                }
                            }
                            c += m;
                        }
                        acc += c * num::pow(t.clone(), *k as usize);
                    }
                    acc * num::pow(t.clone(), (*nu * den).to_integer() as usize)
                })
                .collect();
            let v = big_to_f64(&f.evaluate_exact(&x)?.abs());
            row_max = row_max.max(v);
            points.push(ResidualPoint { r, eta: eta.clone(), value: v });
        }
        rows.push((r, row_max));
    }
    Ok(finish(p, points, &rows))
}

fn finish(p: &Parametrization, points: Vec<ResidualPoint>, rows: &[(f64, f64)]) -> ResidualReport {
    let max = points.iter().map(|p| p.value).fold(0.0, f64::max);
    let fit: Vec<(f64, f64)> = rows.iter().filter(|(_, v)| *v > 0.0).map(|(r, v)| (r.ln(), v.ln())).collect();
    let decay_exponent = (fit.len() >= 3).then(|| {
        let n = fit.len() as f64;
        let mx = fit.iter().map(|p| p.0).sum::<f64>() / n;
        let my = fit.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = fit.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    let trunc = p.chi[p.chart.solved_indices.1].truncation;
    let predicted_exponent = next_beyond(&p.remainder_exponents, trunc).map(|q1| p.weighted_degree + q1);
    ResidualReport { max, points, decay_exponent, predicted_exponent }
}

/// Smallest semigroup element above `cutoff`.
fn next_beyond(gens: &[Q], cutoff: Q) -> Option<Q> {
    if gens.is_empty() {
        return None;
    }
    let wider = crate::newton::semigroup_lattice(gens, cutoff * 2 + gens.iter().max().copied()?).ok()?;
    wider.sequence.into_iter().find(|q| *q > cutoff)
}
