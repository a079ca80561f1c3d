use serde::{Deserialize, Serialize};

use super::tridiag::Tridiagonal;
use crate::error::{Error, Result};
use crate::metric::{ModelOperator, RadialProfile};
use crate::rational::{q_to_f64, Q};

/// Which radial operator a mode block represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RadialForm {
    /// Laplacian of `ω dr² + Σ dϑ²` from the model's radial profile.
    Metric,
    /// `-∂_r² + μ r^{-α} + c r^{-2}` on `L²(dr)`.
    Potential { c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizeOptions {
    pub n_r: usize,
    /// Angular modes `0..=modes`; nonzero modes count twice on a circle.
    pub modes: usize,
    /// Grid `r_i = ε (i/N)^grading`.
    pub grading: f64,
    pub form: RadialForm,
}

impl Default for DiscretizeOptions {
    fn default() -> Self {
        Self { n_r: 512, modes: 32, grading: 2.0, form: RadialForm::Metric }
    }
}

/// One angular mode: the tridiagonal `M^{-1/2} K M^{-1/2}` on the free nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBlock {
    /// Eigenvalue `μ` of `-Δ_k` on the link.
    pub mu: f64,
    pub multiplicity: usize,
    pub matrix: Tridiagonal,
    /// Grid indices of the unknowns.
    pub nodes: Vec<usize>,
    /// Lumped mass per unknown.
    pub mass: Vec<f64>,
    pub free_at_zero: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedOperator {
    pub alpha: Q,
    pub k: usize,
    pub epsilon: f64,
    pub grid: Vec<f64>,
    pub form: RadialForm,
    pub blocks: Vec<ModeBlock>,
    /// `√(ωΣ)` at the grid nodes (1 in potential form).
    pub density: Vec<f64>,
}

const GAUSS: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

pub fn graded_grid(epsilon: f64, n: usize, grading: f64) -> Vec<f64> {
    (0..=n).map(|i| epsilon * (i as f64 / n as f64).powf(grading)).collect()
}

/// Eigenvalues of `-Δ` on a circle of length `l`: `(2πm/l)²`, `m = 0..=modes`.
pub fn circle_modes(l: f64, modes: usize) -> Vec<(f64, usize)> {
    (0..=modes)
        .map(|m| {
            let w = 2.0 * std::f64::consts::PI * m as f64 / l;
            (w * w, if m == 0 { 1 } else { 2 })
        })
        .collect()
}

/// Coefficients `(p, q, w)` of the form `∫ p u'² + q u²` and mass `∫ w u²`.
fn coefficients(profile: &RadialProfile, form: RadialForm, alpha: f64, mu: f64, r: f64) -> (f64, f64, f64) {
    match form {
        RadialForm::Potential { c } => (1.0, mu * r.powf(-alpha) + c / (r * r), 1.0),
        RadialForm::Metric => {
            let (w, s) = profile.eval(r);
            let dens = (w * s).sqrt();
            ((s / w).sqrt(), mu * (w / s).sqrt(), dens)
        }
    }
}

/// Local power `x` in `g(r) ~ r^x` at the vertex.
fn vertex_power<F: Fn(f64) -> f64>(g: F, eps: f64) -> f64 {
    let (r1, r2) = (eps * 1e-9, eps * 1e-8);
    let (a, b) = (g(r1), g(r2));
    if a == 0.0 && b == 0.0 {
        return f64::INFINITY;
    }
    (b / a).ln() / (r2 / r1).ln()
}

pub fn assemble_mode(
    profile: &RadialProfile,
    form: RadialForm,
    alpha: f64,
    mu: f64,
    multiplicity: usize,
    grid: &[f64],
) -> ModeBlock {
    let n = grid.len() - 1;
    let eps = grid[n];
    // Friedrichs: the vertex node is kept only when it has zero capacity
    // (∫ dr/p = ∞) and the potential is integrable there.
    let pa = vertex_power(|r| coefficients(profile, form, alpha, mu, r).0, eps);
    let qb = vertex_power(|r| coefficients(profile, form, alpha, mu, r).1, eps);
    let q_zero = coefficients(profile, form, alpha, mu, eps * 1e-9).1 == 0.0;
    let free_at_zero = pa >= 1.0 - 1e-9 && (q_zero || qb > -1.0);

    let mut kd = vec![0.0; n + 1];
    let mut ko = vec![0.0; n];
    let mut m = vec![0.0; n + 1];
    for e in 0..n {
        let (x0, x1) = (grid[e], grid[e + 1]);
        let h = x1 - x0;
        for (t, wt) in GAUSS {
            let x = x0 + 0.5 * h * (t + 1.0);
            let (p, q, w) = coefficients(profile, form, alpha, mu, x);
            let jw = 0.5 * h * wt;
            let (f0, f1) = ((x1 - x) / h, (x - x0) / h);
            let d = 1.0 / h;
            kd[e] += jw * (p * d * d + q * f0 * f0);
            kd[e + 1] += jw * (p * d * d + q * f1 * f1);
            ko[e] += jw * (-p * d * d + q * f0 * f1);
            m[e] += jw * w * f0;
            m[e + 1] += jw * w * f1;
        }
    }
    let first = if free_at_zero { 0 } else { 1 };
    let nodes: Vec<usize> = (first..n).collect();
    let mass: Vec<f64> = nodes.iter().map(|&i| m[i]).collect();
    let a: Vec<f64> = nodes.iter().map(|&i| kd[i] / m[i]).collect();
    let b: Vec<f64> = nodes.windows(2).map(|w| ko[w[0]] / (m[w[0]] * m[w[1]]).sqrt()).collect();
    ModeBlock { mu, multiplicity, matrix: Tridiagonal { a, b }, nodes, mass, free_at_zero }
}

/// Per-mode tridiagonal blocks of the frozen model on a graded grid.
pub fn discretize_model(model: &ModelOperator, opts: &DiscretizeOptions) -> Result<DiscretizedOperator> {
    if opts.n_r < 64 {
        return Err(Error::GridTooCoarse(format!("N_r = {} < 64", opts.n_r)));
    }
    if !(opts.grading >= 1.0) {
        return Err(Error::InvalidArgument(format!("grading {} below 1", opts.grading)));
    }
    let op = build(model, opts, opts.n_r);
    // Doubling N_r must leave the lowest eigenvalues of the first two modes in place.
    let fine = build(model, &DiscretizeOptions { modes: opts.modes.min(1), ..opts.clone() }, 2 * opts.n_r);
    for (bc, bf) in op.blocks.iter().zip(&fine.blocks).take(2) {
        let count = bc.matrix.len().min(10);
        for j in 0..count {
            let (lc, lf) = (bc.matrix.eigenvalue(j, 1e-14), bf.matrix.eigenvalue(j, 1e-14));
            let shift = (lc - lf).abs() / lf.abs().max(1e-300);
            if shift > 5e-3 {
                return Err(Error::GridTooCoarse(format!(
                    "eigenvalue {j} of mode μ = {} moves by {:.3}% when N_r doubles",
                    bc.mu,
                    100.0 * shift
                )));
            }
        }
    }
    Ok(op)
}

pub(crate) fn build(model: &ModelOperator, opts: &DiscretizeOptions, n: usize) -> DiscretizedOperator {
    let eps = model.epsilon;
    let alpha = q_to_f64(model.alpha);
    let grid = graded_grid(eps, n, opts.grading);
    let modes = if model.k == 0 { vec![(0.0, 1)] } else { circle_modes(model.link.length, opts.modes) };
    let blocks = modes
        .iter()
        .map(|&(mu, mult)| assemble_mode(&model.profile, opts.form, alpha, mu, mult, &grid))
        .collect();
    let density = grid
        .iter()
        .map(|&r| match opts.form {
            RadialForm::Potential { .. } => 1.0,
            RadialForm::Metric if r > 0.0 => {
                let (w, s) = model.profile.eval(r);
                (w * s).sqrt()
            }
            RadialForm::Metric => 0.0,
        })
        .collect();
    DiscretizedOperator { alpha: model.alpha, k: model.k, epsilon: eps, grid, form: opts.form, blocks, density }
}
