use num::{BigRational, One, Zero};
use serde::{Deserialize, Serialize};

use super::roots::{exact_rational_root, horner, real_simple_roots};
use crate::error::{Error, Result};
use crate::newton::{face_polynomial, phi_gamma, BrieskornFunction, NewtonFace, WeightVector};
use crate::poly::{FloatPoly, Polynomial};
use crate::puiseux::CubeDomain;
use crate::rational::{big_to_f64, q_to_f64};

/// Sizes of the transversal chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartOptions {
    /// Half-width of the cube `Ω = [-δ, δ]^{n-1}`.
    pub delta: f64,
    /// Radial extent.
    pub epsilon: f64,
    /// Chebyshev nodes per transversal direction.
    pub grid: usize,
}

impl Default for ChartOptions {
    fn default() -> Self {
        Self { delta: 0.5, epsilon: 0.1, grid: 17 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartNode {
    pub eta: Vec<f64>,
    pub y: f64,
}

/// A chart of the link of the tangent cone `{f_Γ = 0}` near `η = 0`.
///
/// Points of the cone are written `ζ̃(η)` with `ζ̃_i = s` for the radial
/// coordinate `i`, `ζ̃_j = y(η)` for the solved coordinate `j` and the
/// remaining coordinates equal to `η`. The Brieskorn-normalized point
/// `ζ(η) = S_{λ,ν} ζ̃(η)` with `φ_Γ(ζ) = 1` is available through
/// [`LinkChart::zeta`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkChart {
    pub face: NewtonFace,
    pub face_poly: Polynomial,
    /// Weights normalized to `min ν = 1`.
    pub nu: WeightVector,
    pub eta_domain: CubeDomain,
    /// `(radial coordinate, solved coordinate)`.
    pub solved_indices: (usize, usize),
    pub eta_indices: Vec<usize>,
    pub sign: i8,
    pub branch: usize,
    pub root: f64,
    #[serde(with = "opt_big")]
    pub root_exact: Option<BigRational>,
    pub nodes: Vec<ChartNode>,
    pub brieskorn: BrieskornFunction,
    #[serde(skip)]
    float_face: Option<FloatPoly>,
}

mod opt_big {
    use num::BigRational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::rational::{format_big, parse_big};

    pub fn serialize<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        x.as_ref().map(format_big).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        let v = Option::<String>::deserialize(d)?;
        v.map(|s| parse_big(&s).ok_or_else(|| serde::de::Error::custom("bad rational"))).transpose()
    }
}

impl LinkChart {
    pub fn dim(&self) -> usize {
        self.face_poly.dim()
    }

    pub fn branch_id(&self) -> String {
        let (i, j) = self.solved_indices;
        let s = if self.sign > 0 { '+' } else { '-' };
        format!("x{}={}r/x{}#{}", i + 1, s, j + 1, self.branch)
    }

    fn float_face(&self) -> FloatPoly {
        self.float_face.clone().unwrap_or_else(|| self.face_poly.to_float())
    }

    /// Coefficients of `y ↦ f_Γ(ζ̃(y, η))`.
    pub fn univariate(&self, eta: &[f64]) -> Vec<f64> {
        univariate(&self.face_poly, self.solved_indices, &self.eta_indices, self.sign, eta)
    }

    /// Cone point with the given solved value.
    pub fn assemble(&self, y: f64, eta: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.dim()];
        z[self.solved_indices.0] = self.sign as f64;
        z[self.solved_indices.1] = y;
        for (k, &i) in self.eta_indices.iter().enumerate() {
            z[i] = eta[k];
        }
        z
    }

    /// Solved coordinate at `η`, continued from the nearest grid node.
    pub fn solve(&self, eta: &[f64]) -> Result<f64> {
        if eta.len() != self.eta_indices.len() {
            return Err(Error::DimensionMismatch { expected: self.eta_indices.len(), got: eta.len() });
        }
        let seed = self
            .nodes
            .iter()
            .min_by(|a, b| dist(&a.eta, eta).total_cmp(&dist(&b.eta, eta)))
            .expect("chart has nodes");
        continue_root(&self.face_poly, self, seed, eta)
    }

    pub fn cone_point(&self, eta: &[f64]) -> Result<Vec<f64>> {
        let y = self.solve(eta)?;
        Ok(self.assemble(y, eta))
    }

    /// The point of the link `{f_Γ = 0, φ_Γ = 1}` over `η`.
    pub fn zeta(&self, eta: &[f64]) -> Result<Vec<f64>> {
        let z = self.cone_point(eta)?;
        Ok(self.brieskorn_project(&z))
    }

    pub fn brieskorn_project(&self, z: &[f64]) -> Vec<f64> {
        let lam = self.brieskorn.eval(z).powf(-1.0 / q_to_f64(self.brieskorn.degree));
        z.iter()
            .zip(&self.brieskorn.sigma)
            .map(|(x, s)| lam.powf(q_to_f64(*s)) * x)
            .collect()
    }

    /// Unit normal `∇f_Γ / |∇f_Γ|` at `S_{r,ν} ζ̃(η)`.
    pub fn normal(&self, r: f64, eta: &[f64]) -> Result<Vec<f64>> {
        let z = self.cone_point(eta)?;
        let x: Vec<f64> = z.iter().zip(&self.nu.sigma).map(|(v, s)| r.powf(q_to_f64(*s)) * v).collect();
        normal_field(&self.float_face(), &x)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn univariate(fg: &Polynomial, (i, j): (usize, usize), eta_idx: &[usize], sign: i8, eta: &[f64]) -> Vec<f64> {
    let deg = fg.terms().map(|(e, _)| e.0[j]).max().unwrap_or(0) as usize;
    let mut c = vec![0.0; deg + 1];
    for (e, coef) in fg.terms() {
        let mut v = big_to_f64(coef);
        if e.0[i] % 2 == 1 && sign < 0 {
            v = -v;
        }
        for (k, &idx) in eta_idx.iter().enumerate() {
            v *= eta[k].powi(e.0[idx] as i32);
        }
        c[e.0[j] as usize] += v;
    }
    c
}

fn univariate_exact_at_origin(fg: &Polynomial, (i, j): (usize, usize), eta_idx: &[usize], sign: i8) -> Vec<BigRational> {
    let deg = fg.terms().map(|(e, _)| e.0[j]).max().unwrap_or(0) as usize;
    let mut c = vec![BigRational::zero(); deg + 1];
    for (e, coef) in fg.terms() {
        if eta_idx.iter().any(|&k| e.0[k] > 0) {
            continue;
        }
        let mut v = coef.clone();
        if e.0[i] % 2 == 1 && sign < 0 {
            v = -v;
        }
        c[e.0[j] as usize] += v;
    }
    c
}

/// Newton on `y ↦ f_Γ(ζ̃(y, η))` started from a solved node, with a check
/// that the solution stays on the same branch.
fn continue_root(fg: &Polynomial, chart: &LinkChart, seed: &ChartNode, eta: &[f64]) -> Result<f64> {
    let c = univariate(fg, chart.solved_indices, &chart.eta_indices, chart.sign, eta);
    let scale: f64 = c.iter().map(|v| v.abs()).sum::<f64>().max(1e-300);
    let mut y = seed.y;
    for _ in 0..100 {
        let (p, dp) = horner(&c, y);
        if dp.abs() < 1e-14 * scale {
            return Err(Error::Divergence(format!("flat link equation at eta = {eta:?}")));
        }
        let step = p / dp;
        y -= step;
        if step.abs() <= 1e-15 * (1.0 + y.abs()) {
            break;
        }
    }
    let (p, _) = horner(&c, y);
    if !y.is_finite() || p.abs() > 1e-10 * scale * (1.0 + y.abs()).powi(c.len() as i32) {
        return Err(Error::Divergence(format!("link root at eta = {eta:?} did not converge")));
    }
    // Jump check: the seed's tangent prediction must be close.
    let step = dist(&seed.eta, eta);
    if step > 0.0 {
        let c0 = univariate(fg, chart.solved_indices, &chart.eta_indices, chart.sign, &seed.eta);
        let (_, dp0) = horner(&c0, seed.y);
        let h = 1e-6;
        let mut pred = seed.y;
        for k in 0..eta.len() {
            let mut e2 = seed.eta.clone();
            e2[k] += h;
            let c2 = univariate(fg, chart.solved_indices, &chart.eta_indices, chart.sign, &e2);
            let dpe = (horner(&c2, seed.y).0 - horner(&c0, seed.y).0) / h;
            pred -= dpe / dp0 * (eta[k] - seed.eta[k]);
        }
        if (y - pred).abs() > 0.25 * (1.0 + seed.y.abs()) {
            return Err(Error::Divergence(format!("branch jump at eta = {eta:?}: {y} vs predicted {pred}")));
        }
    }
    Ok(y)
}

/// Chebyshev nodes on `[-δ, δ]`.
pub fn chebyshev_nodes(n: usize, delta: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let v = delta * (std::f64::consts::PI * (2 * i + 1) as f64 / (2 * n) as f64).cos();
            if v.abs() < 1e-15 * delta { 0.0 } else { v }
        })
        .collect()
}

/// Tensor Chebyshev grid on `[-δ, δ]^d` (the single empty point if `d = 0`).
pub fn tensor_grid(d: usize, n: usize, delta: f64) -> Vec<Vec<f64>> {
    let nodes = chebyshev_nodes(n, delta);
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| {
                nodes.iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(*x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Rejects faces whose polynomial vanishes on a coordinate hyperplane.
pub fn check_coordinate_planes(fg: &Polynomial) -> Result<()> {
    for j in 0..fg.dim() {
        if fg.terms().all(|(e, _)| e.0[j] > 0) {
            return Err(Error::CoordinatePlane(j + 1));
        }
    }
    Ok(())
}

/// All charts (sign and root branches) of the link of `{f_Γ = 0}` around
/// `η = 0`, with the radial coordinate of smallest weight and the first
/// solvable coordinate.
pub fn link_solve(f: &Polynomial, face: &NewtonFace, opts: &ChartOptions) -> Result<Vec<LinkChart>> {
    let (fg, _) = face_polynomial(f, face)?;
    check_coordinate_planes(&fg)?;
    let nu = face.weight.normalized();
    let dim = f.dim();
    if dim < 2 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let eta_dim = dim - 2;
    let domain = CubeDomain::new(eta_dim, opts.delta, opts.epsilon)?;
    let brieskorn = phi_gamma(&nu)?;
    let radial: Vec<usize> = (0..dim).filter(|&i| nu.sigma[i].is_one()).collect();
    let grid = tensor_grid(eta_dim, opts.grid.max(1), opts.delta);
    let mut last_err = None;
    for &i in &radial {
        for j in (0..dim).filter(|&j| j != i) {
            let eta_indices: Vec<usize> = (0..dim).filter(|&k| k != i && k != j).collect();
            let mut charts = Vec::new();
            for sign in [1i8, -1] {
                let exact = univariate_exact_at_origin(&fg, (i, j), &eta_indices, sign);
                let approx: Vec<f64> = exact.iter().map(big_to_f64).collect();
                for (branch, root) in real_simple_roots(&approx).into_iter().enumerate() {
                    let mut chart = LinkChart {
                        face: face.clone(),
                        face_poly: fg.clone(),
                        nu: nu.clone(),
                        eta_domain: domain,
                        solved_indices: (i, j),
                        eta_indices: eta_indices.clone(),
                        sign,
                        branch,
                        root,
                        root_exact: exact_rational_root(&exact, root),
                        nodes: vec![ChartNode { eta: vec![0.0; eta_dim], y: root }],
                        brieskorn: brieskorn.clone(),
                        float_face: Some(fg.to_float()),
                    };
                    match fill_nodes(&mut chart, &grid) {
                        Ok(()) => charts.push(chart),
                        Err(e) => last_err = Some(e),
                    }
                }
            }
            if !charts.is_empty() {
                return Ok(charts);
            }
        }
    }
    Err(last_err.unwrap_or_else(|| Error::SingularJacobian(format!("no real simple root of {fg} in any coordinate chart"))))
}

fn fill_nodes(chart: &mut LinkChart, grid: &[Vec<f64>]) -> Result<()> {
    let mut order: Vec<&Vec<f64>> = grid.iter().collect();
    order.sort_by(|a, b| norm(a).total_cmp(&norm(b)));
    for eta in order {
        if chart.nodes.iter().any(|n| dist(&n.eta, eta) == 0.0) {
            continue;
        }
        let seed = chart
            .nodes
            .iter()
            .min_by(|a, b| dist(&a.eta, eta).total_cmp(&dist(&b.eta, eta)))
            .unwrap()
            .clone();
        let y = continue_root(&chart.face_poly, chart, &seed, eta)?;
        chart.nodes.push(ChartNode { eta: eta.clone(), y });
    }
    Ok(())
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `∇f_Γ(x) / |∇f_Γ(x)|`.
pub fn normal_field(fg: &FloatPoly, x: &[f64]) -> Result<Vec<f64>> {
    let g = fg.gradient(x);
    let n = norm(&g);
    if !(n > 1e-300) {
        return Err(Error::VanishingGradient(x.to_vec()));
    }
    Ok(g.iter().map(|v| v / n).collect())
}

/// One Newton update `t - f(p + t n) / (∇f(p + t n) · n)` along a line.
pub fn newton_step(f: &FloatPoly, point: &[f64], n: &[f64], t: f64) -> Result<f64> {
    let x: Vec<f64> = point.iter().zip(n).map(|(p, v)| p + t * v).collect();
    let value = f.eval(&x);
    let d: f64 = f.gradient(&x).iter().zip(n).map(|(g, v)| g * v).sum();
    if d.abs() < 1e-14 {
        return Err(Error::SmallDerivative { value: d, at: x });
    }
    Ok(t - value / d)
}
