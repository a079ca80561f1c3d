use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::heat::HeatTraceSamples;
use crate::error::{Error, Result};
use crate::rational::{q_to_f64, Q};

/// One exponent of a lattice with the largest log power allowed there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    #[serde(with = "crate::rational::serde_q")]
    pub z: Q,
    pub max_log: u32,
    /// Member of the smooth ladder `-n/2 + j/2`.
    pub weyl: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTerm {
    #[serde(with = "crate::rational::serde_q")]
    pub z: Q,
    pub log_power: u32,
    pub coeff: f64,
    pub uncertainty: f64,
    /// Exponent after the nonlinear refinement (`z` when held fixed).
    pub fitted_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub terms: Vec<FitTerm>,
    /// `sup |samples - model|` on the window.
    pub residual: f64,
    /// Same, relative to the samples.
    pub relative_residual: f64,
    pub condition: f64,
    pub window: (f64, f64),
    pub predicted_lattice: Vec<LatticePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Largest admissible condition number of the scaled design matrix.
    pub max_condition: f64,
    /// Terms with `|c| < prune_sigmas · uncertainty` are dropped.
    pub prune_sigmas: f64,
    /// Fit a common shift of the non-Weyl exponents by variable projection.
    pub refine: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_condition: 1e12, prune_sigmas: 3.0, refine: true }
    }
}

impl ExpansionFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|k| k.coeff * basis(k.fitted_exponent, k.log_power, t)).sum()
    }

    pub fn term(&self, z: Q, log_power: u32) -> Option<&FitTerm> {
        self.terms.iter().find(|k| k.z == z && k.log_power == log_power)
    }

    /// Triples `(exponent, log power, coefficient)` in lattice exponents.
    pub fn triples(&self) -> Vec<(Q, u32, f64)> {
        self.terms.iter().map(|k| (k.z, k.log_power, k.coeff)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("exponent,log_power,coeff,uncertainty,fitted_exponent\n");
        for k in &self.terms {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                crate::rational::format_q(k.z),
                k.log_power,
                k.coeff,
                k.uncertainty,
                k.fitted_exponent
            ));
        }
        s
    }
}

pub(crate) fn basis(z: f64, i: u32, t: f64) -> f64 {
    t.powf(z) * t.ln().powi(i as i32)
}

struct Column {
    z: Q,
    i: u32,
    exponent: f64,
    fixed: bool,
}

struct Solved {
    coeffs: DVector<f64>,
    sigma: DVector<f64>,
    weighted_residual: DVector<f64>,
    condition: f64,
}

fn solve(cols: &[Column], t: &[f64], y: &[f64]) -> Result<Solved> {
    let (n, k) = (t.len(), cols.len());
    let mut a = DMatrix::zeros(n, k);
    let mut b = DVector::zeros(n);
    for r in 0..n {
        let w = 1.0 / y[r].abs().max(1e-300);
        b[r] = y[r] * w;
        for (c, col) in cols.iter().enumerate() {
            a[(r, c)] = basis(col.exponent, col.i, t[r]) * w;
        }
    }
    let scale: Vec<f64> = (0..k).map(|c| a.column(c).norm().max(1e-300)).collect();
    for (c, s) in scale.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let x = svd.solve(&b, 1e-300).map_err(|e| Error::Other(e.to_string()))?;
    let res = &b - &a * &x;
    let dof = (n as f64 - k as f64).max(1.0);
    let s2 = res.norm_squared() / dof;
    // Covariance diag from V S^{-2} Vᵀ.
    let v_t = svd.v_t.as_ref().unwrap();
    let sigma = DVector::from_iterator(
        k,
        (0..k).map(|c| {
            let var: f64 = (0..svd.singular_values.len())
                .map(|j| (v_t[(j, c)] / svd.singular_values[j].max(1e-300)).powi(2))
                .sum();
            (s2 * var).sqrt() / scale[c]
        }),
    );
    let coeffs = DVector::from_iterator(k, (0..k).map(|c| x[c] / scale[c]));
    Ok(Solved { coeffs, sigma, weighted_residual: res, condition })
}

/// Moves every free exponent by a common shift `δ` and minimizes the
/// weighted residual over `δ`, coefficients eliminated by least squares.
fn refine(cols: &mut [Column], t: &[f64], y: &[f64]) -> Result<()> {
    let free: Vec<usize> = (0..cols.len()).filter(|&i| !cols[i].fixed).collect();
    if free.is_empty() {
        return Ok(());
    }
    let seeds: Vec<f64> = free.iter().map(|&i| cols[i].exponent).collect();
    let cost = |cols: &mut [Column], d: f64| -> Result<f64> {
        for (&i, s) in free.iter().zip(&seeds) {
            cols[i].exponent = s + d;
        }
        Ok(solve(cols, t, y)?.weighted_residual.norm_squared())
    };
    // Coarse scan, then golden section around the best point.
    let (lo, hi, steps) = (-0.25, 0.25, 50);
    let h = (hi - lo) / steps as f64;
    let mut best = (0.0, cost(cols, 0.0)?);
    for k in 0..=steps {
        let d = lo + h * k as f64;
        let c = cost(cols, d)?;
        if c < best.1 {
            best = (d, c);
        }
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = cost(cols, x1)?;
    let mut f2 = cost(cols, x2)?;
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = cost(cols, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = cost(cols, x2)?;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    let mid = 0.5 * (a + b);
    let d = if cost(cols, mid)? <= best.1 { mid } else { best.0 };
    cost(cols, d)?;
    Ok(())
}

/// Least-squares fit of samples in `{t^z log^i t}` over the lattice.
pub fn fit_power_log(s: &HeatTraceSamples, lattice: &[LatticePoint], opts: &FitOptions) -> Result<ExpansionFit> {
    fit_series(&s.t, &s.values, lattice, opts)
}

pub fn fit_series(t: &[f64], y: &[f64], lattice: &[LatticePoint], opts: &FitOptions) -> Result<ExpansionFit> {
    let mut cols: Vec<Column> = lattice
        .iter()
        .flat_map(|p| {
            (0..=p.max_log).map(move |i| Column { z: p.z, i, exponent: q_to_f64(p.z), fixed: p.weyl || !opts.refine })
        })
        .collect();
    if cols.is_empty() {
        return Err(Error::InvalidArgument("empty dictionary".into()));
    }
    if t.len() < 3 * cols.len() {
        return Err(Error::InvalidArgument(format!("{} samples for {} dictionary terms", t.len(), cols.len())));
    }
    let mut solved = solve(&cols, t, y)?;
    if solved.condition > opts.max_condition {
        return Err(Error::IllConditioned(solved.condition));
    }
    loop {
        let cmax = solved.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
        let weakest = (0..cols.len())
            .filter(|&c| {
                let v = solved.coeffs[c].abs();
                v < opts.prune_sigmas * solved.sigma[c] || v < 1e-12 * cmax
            })
            .min_by(|&a, &b| {
                let ra = solved.coeffs[a].abs() / solved.sigma[a].max(1e-300);
                let rb = solved.coeffs[b].abs() / solved.sigma[b].max(1e-300);
                ra.partial_cmp(&rb).unwrap()
            });
        match weakest {
            Some(c) if cols.len() > 1 => {
                cols.remove(c);
                solved = solve(&cols, t, y)?;
            }
            _ => break,
        }
    }
    if opts.refine {
        refine(&mut cols, t, y)?;
        solved = solve(&cols, t, y)?;
    }
    let terms: Vec<FitTerm> = cols
        .iter()
        .enumerate()
        .map(|(c, col)| FitTerm {
            z: col.z,
            log_power: col.i,
            coeff: solved.coeffs[c],
            uncertainty: solved.sigma[c],
            fitted_exponent: col.exponent,
        })
        .collect();
    let mut fit = ExpansionFit {
        terms,
        residual: 0.0,
        relative_residual: 0.0,
        condition: solved.condition,
        window: (t.iter().cloned().fold(f64::INFINITY, f64::min), t.iter().cloned().fold(0.0, f64::max)),
        predicted_lattice: lattice.to_vec(),
    };
    for (tt, yy) in t.iter().zip(y) {
        let d = (yy - fit.eval(*tt)).abs();
        fit.residual = fit.residual.max(d);
        fit.relative_residual = fit.relative_residual.max(d / yy.abs().max(1e-300));
    }
    Ok(fit)
}

/// Changes when refitting on the lower half (in `log t`) of the window,
/// per term present in both fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfWindowCheck {
    pub per_term: Vec<TermChange>,
    pub exponent_change: f64,
    pub coeff_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermChange {
    #[serde(with = "crate::rational::serde_q")]
    pub z: Q,
    pub log_power: u32,
    pub exponent_change: f64,
    pub coeff_change: f64,
}

impl HalfWindowCheck {
    pub fn term(&self, z: Q, log_power: u32) -> Option<&TermChange> {
        self.per_term.iter().find(|c| c.z == z && c.log_power == log_power)
    }
}

pub fn half_window_check(t: &[f64], y: &[f64], fit: &ExpansionFit, opts: &FitOptions) -> Result<HalfWindowCheck> {
    let (a, b) = fit.window;
    let mid = (a * b).sqrt();
    let (th, yh): (Vec<f64>, Vec<f64>) =
        t.iter().zip(y).filter(|(x, _)| **x <= mid * (1.0 + 1e-12)).map(|(x, v)| (*x, *v)).unzip();
    let lattice: Vec<LatticePoint> = fit
        .predicted_lattice
        .iter()
        .filter(|p| fit.terms.iter().any(|k| k.z == p.z))
        .cloned()
        .collect();
    let half = fit_series(&th, &yh, &lattice, opts)?;
    let per_term: Vec<TermChange> = fit
        .terms
        .iter()
        .filter_map(|k| {
            half.term(k.z, k.log_power).map(|h| TermChange {
                z: k.z,
                log_power: k.log_power,
                exponent_change: (h.fitted_exponent - k.fitted_exponent).abs(),
                coeff_change: (h.coeff - k.coeff).abs() / k.coeff.abs().max(1e-300),
            })
        })
        .collect();
    Ok(HalfWindowCheck {
        exponent_change: per_term.iter().map(|c| c.exponent_change).fold(0.0, f64::max),
        coeff_change: per_term.iter().map(|c| c.coeff_change).fold(0.0, f64::max),
        per_term,
    })
}
