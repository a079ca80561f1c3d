use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::discretize::{assemble_mode, graded_grid, ModeBlock, RadialForm};
use crate::error::{Error, Result};
use crate::metric::RadialProfile;

/// Nodal operators of one mode of `-∂_r² + μ r^{-α}` on `(0, ε)`:
/// everything acts on coefficient vectors `y = M^{1/2} u`.
struct ModeOperators {
    grid: Vec<f64>,
    block: ModeBlock,
    /// `M^{-1/2} K₀ M^{-1/2}` for `-∂_r²` alone.
    laplace: DMatrix<f64>,
    full: DMatrix<f64>,
}

impl ModeOperators {
    fn new(alpha: f64, mu: f64, epsilon: f64, n_r: usize) -> Self {
        let grid = graded_grid(epsilon, n_r, 2.0);
        let profile = RadialProfile::power(alpha, epsilon);
        let form = RadialForm::Potential { c: 0.0 };
        let block = assemble_mode(&profile, form, alpha, mu, 1, &grid);
        let free = assemble_mode(&profile, form, alpha, 0.0, 1, &grid);
        // Align the potential-free block on the same unknowns.
        let off = block.nodes[0] - free.nodes[0];
        let n = block.nodes.len();
        let laplace = DMatrix::from_fn(n, n, |i, j| dense(&free.matrix, i + off, j + off));
        let full = DMatrix::from_fn(n, n, |i, j| dense(&block.matrix, i, j));
        Self { grid, block, laplace, full }
    }
}

fn dense(t: &super::Tridiagonal, i: usize, j: usize) -> f64 {
    if i == j {
        t.a[i]
    } else if i + 1 == j {
        t.b[i]
    } else if j + 1 == i {
        t.b[j]
    } else {
        0.0
    }
}

/// `‖Hφ‖² + B‖φ‖² ≥ ‖∂_r²φ‖² + c‖Δ_k r^{-α}φ‖²` checked on random `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicEstimate {
    /// Largest `c` on the grid for which some grid `B` works.
    pub c: f64,
    pub b: f64,
    pub samples: usize,
    /// Smallest `B` needed at that `c` (before rounding up to the grid).
    pub b_needed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub n_r: usize,
    pub samples: usize,
    pub seed: u64,
    /// Angular modes `m = 1..=modes` used for the random vectors.
    pub modes: usize,
    /// Random vectors are combinations of this many low eigenvectors.
    pub span: usize,
    pub c_grid: Vec<f64>,
    pub b_grid: Vec<f64>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            n_r: 256,
            samples: 50,
            seed: 7,
            modes: 4,
            span: 24,
            c_grid: vec![0.99, 0.9, 0.75, 0.5, 0.25, 0.1, 0.05, 0.01],
            b_grid: (0..=12).map(|k| if k == 0 { 0.0 } else { 10f64.powf(k as f64 / 2.0) }).collect(),
        }
    }
}

/// Searches `(c, B)` for the model with link circle of length `link_length`.
pub fn basic_estimate(alpha: f64, link_length: f64, epsilon: f64, opts: &EstimateOptions) -> Result<BasicEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    // Per sample: (‖Hφ‖² - ‖∂²φ‖², ‖Pφ‖², ‖φ‖²).
    let mut rows = Vec::with_capacity(opts.samples);
    let ops: Vec<(ModeOperators, SymmetricEigen<f64, nalgebra::Dyn>)> = (1..=opts.modes.max(1))
        .map(|m| {
            let w = 2.0 * std::f64::consts::PI * m as f64 / link_length;
            let o = ModeOperators::new(alpha, w * w, epsilon, opts.n_r);
            let e = SymmetricEigen::new(o.full.clone());
            (o, e)
        })
        .collect();
    for _ in 0..opts.samples {
        let (o, e) = &ops[rng.random_range(0..ops.len())];
        let order = sorted(&e.eigenvalues);
        let n = order.len().min(opts.span);
        let mut y = DVector::zeros(o.full.nrows());
        for &k in order.iter().take(n) {
            let c: f64 = rng.random_range(-1.0..1.0);
            y += e.eigenvectors.column(k) * c;
        }
        let h = &o.full * &y;
        let a = &o.laplace * &y;
        let p = &h - &a;
        rows.push((h.norm_squared() - a.norm_squared(), p.norm_squared(), y.norm_squared()));
    }
    for &c in &opts.c_grid {
        let need = rows.iter().map(|(d, p, n)| ((c * p - d) / n).max(0.0)).fold(0.0, f64::max);
        if let Some(&b) = opts.b_grid.iter().find(|&&b| b >= need) {
            return Ok(BasicEstimate { c, b, samples: opts.samples, b_needed: need });
        }
    }
    Err(Error::Other("no (c, B) on the search grid satisfies the basic estimate".into()))
}

fn sorted(v: &DVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventDecay {
    pub beta: f64,
    pub d: u32,
    pub lambda_abs: Vec<f64>,
    pub norms: Vec<f64>,
    /// Slope of `log ‖B(λ)‖` against `log |λ|`.
    pub exponent: f64,
}

/// `‖r^{-β} Δ_k ∂_r^d (H_m - λ)^{-1}‖` on the ray `λ = |λ| e^{3πi/4}`.
///
/// With `H = V Λ Vᵀ` the resolvent is `V (Λ - λ)^{-1} Vᵀ`; the unitary
/// phases drop out of the operator norm, leaving `‖G V |Λ - λ|^{-1}‖`.
pub fn resolvent_decay(
    alpha: f64,
    mu: f64,
    epsilon: f64,
    beta: f64,
    d: u32,
    lambda_abs: &[f64],
    n_r: usize,
) -> Result<ResolventDecay> {
    if d > 1 {
        return Err(Error::InvalidArgument("only d ≤ 1 is discretized".into()));
    }
    let o = ModeOperators::new(alpha, mu, epsilon, n_r);
    let e = SymmetricEigen::new(o.full.clone());
    let g = output_map(&o, beta, d) * &e.eigenvectors * mu;
    let gram = g.transpose() * &g;
    let phase = std::f64::consts::FRAC_PI_4 * 3.0;
    let mut norms = Vec::with_capacity(lambda_abs.len());
    for &l in lambda_abs {
        let (lr, li) = (l * phase.cos(), l * phase.sin());
        let s = DVector::from_iterator(e.eigenvalues.len(), e.eigenvalues.iter().map(|v| 1.0 / ((v - lr).powi(2) + li * li).sqrt()));
        norms.push(largest_eigenvalue(&gram, &s).sqrt());
    }
    let pts: Vec<(f64, f64)> = lambda_abs.iter().zip(&norms).map(|(l, v)| (l.ln(), v.ln())).collect();
    Ok(ResolventDecay { beta, d, lambda_abs: lambda_abs.to_vec(), norms, exponent: slope(&pts) })
}

/// Map `y ↦ w` with `‖w‖` the `L²` norm of `r^{-β} ∂_r^d u`, `u = M^{-1/2} y`.
fn output_map(o: &ModeOperators, beta: f64, d: u32) -> DMatrix<f64> {
    let nodes = &o.block.nodes;
    let n = nodes.len();
    let inv_sqrt_m: Vec<f64> = o.block.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    if d == 0 {
        return DMatrix::from_fn(n, n, |i, j| if i == j { o.grid[nodes[i]].powf(-beta) } else { 0.0 });
    }
    // One row per element touching an unknown; the outer node is Dirichlet.
    let first = nodes[0];
    let last = o.grid.len() - 1;
    let elems: Vec<usize> = (first.saturating_sub(if first > 0 { 1 } else { 0 })..last).collect();
    let mut g = DMatrix::zeros(elems.len(), n);
    for (row, &el) in elems.iter().enumerate() {
        let (x0, x1) = (o.grid[el], o.grid[el + 1]);
        let h = x1 - x0;
        let w = h.sqrt() * (0.5 * (x0 + x1)).powf(-beta) / h;
        if el >= first {
            g[(row, el - first)] -= w * inv_sqrt_m[el - first];
        }
        if el + 1 < last && el + 1 >= first {
            g[(row, el + 1 - first)] += w * inv_sqrt_m[el + 1 - first];
        }
    }
    g
}

/// Largest eigenvalue of `S C S` with `S` diagonal, by power iteration.
fn largest_eigenvalue(c: &DMatrix<f64>, s: &DVector<f64>) -> f64 {
    let n = s.len();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lam = 0.0;
    for _ in 0..500 {
        let w = s.component_mul(&(c * s.component_mul(&v)));
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / nw;
        if (next - lam).abs() <= 1e-12 * next.abs() {
            return next;
        }
        lam = next;
    }
    lam
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}
