use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::flow::NormalizedMetric;
use crate::cone::real_simple_roots;
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::{big_to_f64, q_to_f64, Q};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    /// `α` is fitted on `r ∈ [r_min, window · r_min]` of the flow grid.
    pub alpha_window: f64,
    /// `V` is sampled on `r ∈ [ε / potential_window, ε]`.
    pub potential_window: f64,
    pub tolerance: f64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self { alpha_window: 100.0, potential_window: 100.0, tolerance: 0.05 }
    }
}

/// Length of the link in the frozen angular metric `G`, where
/// `Σ̂ ≈ r^α G(θ)` near the vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub length: f64,
}

impl LinkGeometry {
    pub fn circle(length: f64) -> Self {
        Self { length }
    }
}

/// `θ`-averaged radial data of the frozen model `ω(r) dr² + Σ(r) dϑ²`,
/// `ϑ` arclength of `G`. Radii increase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub omega: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl RadialProfile {
    /// `dr² + r^α dϑ²` sampled geometrically on `[ε·1e-6, ε]`.
    pub fn power(alpha: f64, epsilon: f64) -> Self {
        let n = 64;
        let r: Vec<f64> = (0..n).map(|i| epsilon * 10f64.powf(-6.0 + 6.0 * i as f64 / (n - 1) as f64)).collect();
        let sigma = r.iter().map(|x| x.powf(alpha)).collect();
        Self { omega: vec![1.0; n], sigma, r }
    }

    /// `ω` linearly, `Σ` log-log; below the grid `ω` is held and `Σ`
    /// follows the end slope.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        (linear(&self.r, &self.omega, r), loglog(&self.r, &self.sigma, r))
    }

    pub fn epsilon(&self) -> f64 {
        *self.r.last().unwrap()
    }
}

fn bracket(xs: &[f64], x: f64) -> usize {
    match xs.iter().position(|v| *v >= x) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => xs.len() - 2,
    }
}

fn linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if xs.len() == 1 || x <= xs[0] {
        return ys[0];
    }
    let i = bracket(xs, x);
    ys[i] + (x - xs[i]) / (xs[i + 1] - xs[i]) * (ys[i + 1] - ys[i])
}

fn loglog(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n == 1 {
        return ys[0];
    }
    let i = bracket(xs, x);
    let (x0, x1) = (xs[i].ln(), xs[i + 1].ln());
    let (y0, y1) = (ys[i].ln(), ys[i + 1].ln());
    let t = (x.ln() - x0) / (x1 - x0);
    (y0 + t * (y1 - y0)).exp()
}

/// Frozen model `H = -∂_r² - Δ_k / r^α + V` read off the normalized metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOperator {
    #[serde(with = "crate::rational::serde_q")]
    pub alpha: Q,
    pub alpha_fitted: f64,
    /// Fitted exponents of the eigenvalues of `Σ̂`, increasing.
    pub direction_exponents: Vec<f64>,
    pub k: usize,
    pub epsilon: f64,
    /// `sup |r^{-e} Σ̂(r, θ) / G(θ) - 1|` over the flow grid, per direction.
    pub frozen_laplacian_error: f64,
    /// `C` with `|V| ≤ C r^{-2}` on `[ε/100, ε]`.
    pub potential_bound: f64,
    pub link: LinkGeometry,
    pub profile: RadialProfile,
}

impl ModelOperator {
    /// Pure model `-∂_r² - Δ_k/r^α` on `(0, ε)` with a circle link.
    pub fn pure(alpha: Q, k: usize, epsilon: f64, link: LinkGeometry) -> Self {
        let a = q_to_f64(alpha);
        Self {
            alpha,
            alpha_fitted: a,
            direction_exponents: vec![a; k],
            k,
            epsilon,
            frozen_laplacian_error: 0.0,
            potential_bound: 0.0,
            link,
            profile: RadialProfile::power(a, epsilon),
        }
    }
}

fn slope(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let a = sxy / sxx;
    let res = pts.iter().map(|p| (p.1 - my - a * (p.0 - mx)).abs()).fold(0.0, f64::max);
    (a, res)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Extracts `α`, `k`, the potential bound and the frozen radial profile.
/// `nu` are the normalized weights of the face; `α` is matched against the
/// exponents `ν_a + ν_b`.
pub fn model_operator(n: &NormalizedMetric, nu: &[Q], link: LinkGeometry, opts: &ModelOptions) -> Result<ModelOperator> {
    let d = n.eta_dim;
    let r_min = *n.r.last().unwrap();
    let eps = n.epsilon;
    // Increasing radii.
    let idx: Vec<usize> = (0..n.r.len()).rev().collect();
    let rs: Vec<f64> = idx.iter().map(|&i| n.r[i]).collect();
    let nl = n.lines.len() as f64;
    let omega: Vec<f64> = idx.iter().map(|&i| n.lines.iter().map(|l| l.omega[i]).sum::<f64>() / nl).collect();

    if d == 0 {
        return Ok(ModelOperator {
            alpha: Q::from_integer(0),
            alpha_fitted: 0.0,
            direction_exponents: vec![],
            k: 0,
            epsilon: eps,
            frozen_laplacian_error: 0.0,
            potential_bound: 0.0,
            link,
            profile: RadialProfile { r: rs.clone(), omega, sigma: vec![1.0; rs.len()] },
        });
    }

    let eig = |line: usize, i: usize| -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(n.sigma_hat_at(line, i)).eigenvalues.iter().cloned().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    };
    let window: Vec<usize> = (0..n.r.len()).filter(|&i| n.r[i] <= opts.alpha_window * r_min).collect();
    if window.len() < 3 {
        return Err(Error::GridTooCoarse("fewer than three radii in the α window".into()));
    }
    let mut per_dir = vec![Vec::new(); d];
    let mut worst_res: f64 = 0.0;
    for li in 0..n.lines.len() {
        for (k, dir) in per_dir.iter_mut().enumerate() {
            let pts: Vec<(f64, f64)> = window.iter().map(|&i| (n.r[i].ln(), eig(li, i)[k].ln())).collect();
            let (a, res) = slope(&pts);
            worst_res = worst_res.max(res);
            dir.push(a);
        }
    }
    // Eigenvalues ascend, so their exponents descend.
    let by_eig: Vec<f64> = per_dir.into_iter().map(median).collect();
    let mut exps = by_eig.clone();
    exps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha_fitted = *exps.last().unwrap();
    let mut candidates: Vec<Q> = Vec::new();
    for a in nu {
        for b in nu {
            candidates.push(*a + *b);
        }
    }
    let alpha = candidates
        .iter()
        .cloned()
        .min_by(|x, y| (q_to_f64(*x) - alpha_fitted).abs().partial_cmp(&(q_to_f64(*y) - alpha_fitted).abs()).unwrap())
        .filter(|a| (q_to_f64(*a) - alpha_fitted).abs() <= opts.tolerance && worst_res < opts.tolerance);
    let alpha = alpha.ok_or_else(|| Error::MixedExponents(exps.clone()))?;
    let af = q_to_f64(alpha);
    let k = exps.iter().filter(|e| (*e - af).abs() <= opts.tolerance).count();

    // Frozen metric G(θ) from the smallest radius, per eigen-direction.
    let last = n.r.len() - 1;
    let mut frozen: f64 = 0.0;
    let mut scale = vec![0.0; n.r.len()];
    for li in 0..n.lines.len() {
        let g = eig(li, last);
        for i in 0..n.r.len() {
            let e = eig(li, i);
            for kk in 0..d {
                let ratio = (e[kk] / g[kk]) * (r_min / n.r[i]).powf(by_eig[kk]);
                frozen = frozen.max((ratio - 1.0).abs());
            }
            let top = e[0] / g[0] * r_min.powf(af);
            scale[i] += top / nl;
        }
    }
    let sigma: Vec<f64> = idx.iter().map(|&i| scale[i] * omega[idx.len() - 1 - i]).collect();

    // V = p²/4 + p'/2 with p = (ln √det Σ̂)'.
    let mut c: f64 = 0.0;
    for li in 0..n.lines.len() {
        let lsig: Vec<f64> = (0..n.r.len()).map(|i| n.sigma_hat_at(li, i).determinant().ln()).collect();
        let p: Vec<Option<f64>> = (0..n.r.len())
            .map(|i| {
                if i == 0 || i + 1 == n.r.len() {
                    return None;
                }
                Some((lsig[i + 1] - lsig[i - 1]) / (n.r[i + 1] - n.r[i - 1]) / 2.0)
            })
            .collect();
        for i in 2..n.r.len().saturating_sub(2) {
            let r = n.r[i];
            if r < eps / opts.potential_window {
                continue;
            }
            let (Some(pm), Some(p0), Some(pp)) = (p[i - 1], p[i], p[i + 1]) else { continue };
            let dp = (pp - pm) / (n.r[i + 1] - n.r[i - 1]);
            let v = p0 * p0 / 4.0 + dp / 2.0;
            c = c.max(r * r * v.abs());
        }
    }

    Ok(ModelOperator {
        alpha,
        alpha_fitted,
        direction_exponents: exps,
        k,
        epsilon: eps,
        frozen_laplacian_error: frozen,
        potential_bound: c,
        link,
        profile: RadialProfile { r: rs, omega, sigma },
    })
}

/// Length of the link `{f_Γ = 0, x_i = s}` of a surface sector in the
/// frozen metric, for links that are star-shaped around the origin of the
/// two remaining coordinates.
pub fn link_length(face_poly: &Polynomial, nu: &[Q], radial: usize, sign: i32, rays: usize) -> Result<LinkGeometry> {
    if face_poly.dim() != 3 || nu.len() != 3 {
        return Err(Error::UnsupportedDimension(face_poly.dim()));
    }
    let others: Vec<usize> = (0..3).filter(|&j| j != radial).collect();
    let (a, b) = (others[0], others[1]);
    let nuf: Vec<f64> = nu.iter().map(|v| q_to_f64(*v)).collect();
    let alpha = nuf.iter().cloned().fold(f64::NEG_INFINITY, f64::max) * 2.0;
    let fast = |j: usize| (2.0 * nuf[j] - alpha).abs() < 1e-12;
    let slow = |j: usize| (nuf[j] - 1.0).abs() < 1e-12;
    let deg = face_poly.terms().map(|(e, _)| e.0[a] + e.0[b]).max().unwrap_or(0) as usize;

    let point = |psi: f64| -> Result<[f64; 3]> {
        let (c, s) = (psi.cos(), psi.sin());
        let mut coeffs = vec![0.0; deg + 1];
        for (e, v) in face_poly.terms() {
            let sgn = if sign < 0 && e.0[radial] % 2 == 1 { -1.0 } else { 1.0 };
            coeffs[(e.0[a] + e.0[b]) as usize] += sgn * big_to_f64(v) * c.powi(e.0[a] as i32) * s.powi(e.0[b] as i32);
        }
        let roots: Vec<f64> = real_simple_roots(&coeffs).into_iter().filter(|r| *r > 0.0).collect();
        if roots.len() != 1 {
            return Err(Error::Other(format!("link is not star-shaped: {} crossings on the ray at angle {psi:.4}", roots.len())));
        }
        let mut x = [0.0; 3];
        x[radial] = sign as f64;
        x[a] = roots[0] * c;
        x[b] = roots[0] * s;
        Ok(x)
    };
    let n = rays.max(16);
    let pts = (0..n)
        .map(|i| point(2.0 * std::f64::consts::PI * i as f64 / n as f64))
        .collect::<Result<Vec<_>>>()?;
    let mut length = 0.0;
    for i in 0..n {
        let (p, q) = (&pts[i], &pts[(i + 1) % n]);
        let mid: Vec<f64> = (0..3).map(|j| 0.5 * (p[j] + q[j])).collect();
        let w0: f64 = (0..3).filter(|&j| slow(j)).map(|j| mid[j] * mid[j]).sum();
        let ds: f64 = (0..3).filter(|&j| fast(j)).map(|j| (q[j] - p[j]).powi(2)).sum::<f64>().sqrt();
        length += ds / w0.sqrt();
    }
    Ok(LinkGeometry { length })
}
