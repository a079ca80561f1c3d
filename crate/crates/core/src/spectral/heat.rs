use serde::{Deserialize, Serialize};

use super::discretize::{build, DiscretizeOptions, DiscretizedOperator, ModeBlock};
use crate::error::{Error, Result};
use crate::metric::ModelOperator;

/// Radial cutoff paired with the heat kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cutoff {
    One,
    /// 1 on `[0, inner·ε]`, 0 on `[outer·ε, ε]`, `C³` polynomial step between.
    Bump { inner: f64, outer: f64 },
}

impl Cutoff {
    pub fn bump() -> Self {
        Cutoff::Bump { inner: 0.5, outer: 0.7 }
    }

    /// Whether `χ` vanishes on a neighbourhood of `r = ε`.
    pub fn vanishes_at_boundary(&self) -> bool {
        matches!(self, Cutoff::Bump { outer, .. } if *outer < 1.0)
    }

    /// `∫ χ(r) g(r) dr` over `[0, ε]` by composite Gauss-Legendre.
    pub fn integrate<F: Fn(f64) -> f64>(&self, epsilon: f64, g: F) -> f64 {
        let n = 4000;
        let h = epsilon / n as f64;
        let nodes = [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];
        let mut s = 0.0;
        for i in 0..n {
            let a = i as f64 * h;
            for (x, w) in nodes {
                let r = a + 0.5 * h * (x + 1.0);
                s += 0.5 * h * w * self.eval(r, epsilon) * g(r);
            }
        }
        s
    }

    pub fn eval(&self, r: f64, epsilon: f64) -> f64 {
        match self {
            Cutoff::One => 1.0,
            Cutoff::Bump { inner, outer } => {
                let x = ((r / epsilon - inner) / (outer - inner)).clamp(0.0, 1.0);
                let s = x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3));
                1.0 - s
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatOptions {
    pub cutoff: Cutoff,
    /// Eigenvalues more than `spectral_depth / t_min` above the bottom of
    /// the spectrum are dropped.
    pub spectral_depth: f64,
    /// Relative bound on the neglected angular modes.
    pub tail_tolerance: f64,
    /// Grids `N_r, 2N_r, …` combined by Romberg extrapolation in `h²`
    /// (1 disables it).
    pub levels: usize,
}

impl Default for HeatOptions {
    fn default() -> Self {
        Self { cutoff: Cutoff::bump(), spectral_depth: 30.0, tail_tolerance: 1e-10, levels: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatTraceSamples {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub cutoff: Cutoff,
    /// Estimated relative contribution of the modes beyond the cutoff, per `t`.
    pub mode_tail: Vec<f64>,
    /// Relative change of the extrapolated value from the last level
    /// (zero for a single grid).
    pub refinement_change: Vec<f64>,
}

impl HeatTraceSamples {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,value,mode_tail,refinement_change\n");
        for i in 0..self.t.len() {
            s.push_str(&format!("{},{},{},{}\n", self.t[i], self.values[i], self.mode_tail[i], self.refinement_change[i]));
        }
        s
    }
}

/// `Σ_j ⟨φ_j, χ φ_j⟩ e^{-t λ_j}` for one block.
fn block_trace(block: &ModeBlock, grid: &[f64], eps: f64, cutoff: Cutoff, t: &[f64], cut: f64) -> Vec<f64> {
    let mut out = vec![0.0; t.len()];
    if block.matrix.is_empty() {
        return out;
    }
    let chi: Vec<f64> = block.nodes.iter().map(|&i| cutoff.eval(grid[i], eps)).collect();
    let trivial = chi.iter().all(|c| *c == 1.0);
    for lam in block.matrix.eigenvalues_below(cut, 1e-14) {
        let weight = if trivial {
            1.0
        } else {
            let y = block.matrix.eigenvector(lam);
            y.iter().zip(&chi).map(|(v, c)| c * v * v).sum()
        };
        for (o, &tt) in out.iter_mut().zip(t) {
            *o += weight * (-tt * lam).exp();
        }
    }
    out.iter_mut().for_each(|v| *v *= block.multiplicity as f64);
    out
}

/// Per-mode traces, one row per block.
fn mode_traces(op: &DiscretizedOperator, t: &[f64], opts: &HeatOptions) -> Vec<Vec<f64>> {
    let tmin = t.iter().cloned().fold(f64::INFINITY, f64::min);
    let floor = op
        .blocks
        .iter()
        .filter(|b| !b.matrix.is_empty())
        .map(|b| b.matrix.eigenvalue(0, 1e-12))
        .fold(f64::INFINITY, f64::min);
    let cut = floor + opts.spectral_depth / tmin;
    op.blocks
        .iter()
        .map(|b| block_trace(b, &op.grid, op.epsilon, opts.cutoff, t, cut))
        .collect()
}

fn sum_modes(rows: &[Vec<f64>], n: usize) -> Vec<f64> {
    (0..n).map(|i| rows.iter().map(|r| r[i]).sum()).collect()
}

/// Geometric tail estimate from the last two modes.
fn tail_estimate(rows: &[Vec<f64>], total: &[f64]) -> Vec<f64> {
    let k = rows.len();
    (0..total.len())
        .map(|i| {
            if k < 2 || total[i] <= 0.0 {
                return 0.0;
            }
            let (last, prev) = (rows[k - 1][i], rows[k - 2][i]);
            if last <= 0.0 {
                return 0.0;
            }
            let q = if prev > 0.0 { last / prev } else { 1.0 };
            let tail = if q < 1.0 { last * q / (1.0 - q) } else { f64::INFINITY };
            tail / total[i]
        })
        .collect()
}

/// `tr(χ e^{-tH})` of a discretized operator.
pub fn heat_trace(op: &DiscretizedOperator, t: &[f64], opts: &HeatOptions) -> Result<HeatTraceSamples> {
    if t.is_empty() || t.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidArgument("times must be positive".into()));
    }
    let rows = mode_traces(op, t, opts);
    let values = sum_modes(&rows, t.len());
    finish(t, values, &rows, vec![0.0; t.len()], opts)
}

/// Heat trace of a model extrapolated over `opts.levels` grid doublings.
pub fn model_heat_trace(
    model: &ModelOperator,
    disc: &DiscretizeOptions,
    t: &[f64],
    opts: &HeatOptions,
) -> Result<HeatTraceSamples> {
    let coarse = super::discretize_model(model, disc)?;
    if opts.levels <= 1 {
        return heat_trace(&coarse, t, opts);
    }
    let mut table: Vec<Vec<f64>> = Vec::new();
    let mut rows = mode_traces(&coarse, t, opts);
    table.push(sum_modes(&rows, t.len()));
    for l in 1..opts.levels {
        let op = build(model, disc, disc.n_r << l);
        rows = mode_traces(&op, t, opts);
        table.push(sum_modes(&rows, t.len()));
    }
    let (values, previous) = romberg(&table);
    let change = values.iter().zip(&previous).map(|(v, p)| (v - p).abs() / v.abs().max(1e-300)).collect();
    finish(t, values, &rows, change, opts)
}

/// Romberg table in `h²`; returns the final entry and the best estimate
/// without the finest grid.
fn romberg(levels: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let mut col: Vec<Vec<f64>> = levels.to_vec();
    let mut previous = col[col.len() - 2].clone();
    let mut factor = 4.0;
    while col.len() > 1 {
        previous = col[col.len() - 2].clone();
        col = col
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(f, c)| f + (f - c) / (factor - 1.0)).collect())
            .collect();
        factor *= 4.0;
    }
    (col.pop().unwrap(), previous)
}

fn finish(t: &[f64], values: Vec<f64>, rows: &[Vec<f64>], change: Vec<f64>, opts: &HeatOptions) -> Result<HeatTraceSamples> {
    let mode_tail = tail_estimate(rows, &values);
    if let Some(i) = (0..t.len()).find(|&i| mode_tail[i] > opts.tail_tolerance) {
        return Err(Error::ModeCutoff { tail: mode_tail[i] * values[i], total: values[i] });
    }
    Ok(HeatTraceSamples { t: t.to_vec(), values, cutoff: opts.cutoff, mode_tail, refinement_change: change })
}

/// Geometric grid of `n` times from `a` to `b`.
pub fn geometric_times(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Smallest angular cutoff whose first neglected mode is below `tol`
/// relative to the mode-zero trace at `t_min`. `link_length` sets `μ_m`.
pub fn modes_for_window(t_min: f64, link_length: f64, epsilon: f64, alpha: f64, tol: f64) -> usize {
    // μ_m r^{-α} at r = ε must exceed -ln(tol)/t_min.
    let need = -tol.ln() / t_min * epsilon.powf(alpha);
    let m = need.sqrt() * link_length / (2.0 * std::f64::consts::PI);
    m.ceil() as usize + 1
}
