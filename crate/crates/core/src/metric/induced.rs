use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::cone::{tensor_grid, Parametrization};
use crate::error::{Error, Result};
use crate::puiseux::{CubeDomain, PuiseuxSeries};
use crate::rational::{q_to_f64, qi, Q};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricOptions {
    /// Shrink factor for derivatives of series carrying a tail.
    pub theta: f64,
    /// Radial sample count for the positivity checks.
    pub grid_r: usize,
    /// Samples per `η` direction.
    pub grid_eta: usize,
    pub omega_floor: f64,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self { theta: 0.9, grid_r: 16, grid_eta: 9, omega_floor: 1e-12 }
    }
}

/// `g = ω dr² + 2 β·dη dr + dηᵀ Σ dη` in the chart `x_j = r^{ν_j} χ_j(r, η)`.
///
/// With `A = diag(ν_j)` and `R = diag(r^{ν_j - 1})` the entries are
/// `ω = ‖A R χ̃‖²`, `β = r Λᵀ A R² χ̃` and `Σ = r² Λᵀ R² Λ`, where
/// `χ̃_j = χ_j + (r/ν_j) ∂_r χ_j` and `Λ_{jk} = ∂_{η_k} χ_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricData {
    #[serde(with = "crate::rational::serde_q::vec")]
    pub nu: Vec<Q>,
    pub omega: PuiseuxSeries<f64>,
    pub beta: Vec<PuiseuxSeries<f64>>,
    pub sigma: Vec<Vec<PuiseuxSeries<f64>>>,
    /// `Λ_{jk}`, one row per ambient coordinate. Empty for synthetic data.
    pub lambda: Vec<Vec<PuiseuxSeries<f64>>>,
    /// `χ̃_j`.
    pub chi_radial: Vec<PuiseuxSeries<f64>>,
    /// Smallest value of `ω` on the sample grid, tail included.
    pub omega_min: f64,
    /// Smallest eigenvalue of `Σ / r^{2 max ν}` over sampled `r > 0`.
    pub sigma_min_scaled: f64,
    /// Measured `c` in `‖R Λ v‖² ≤ c r^{2μ} ‖v‖²`, `μ = max ν - 1`.
    pub norm_constant: f64,
}

/// Values of the metric at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPoint {
    pub omega: f64,
    pub beta: DVector<f64>,
    pub sigma: DMatrix<f64>,
}

impl MetricData {
    pub fn eta_dim(&self) -> usize {
        self.beta.len()
    }

    pub fn domain(&self) -> CubeDomain {
        self.omega.domain
    }

    pub fn at(&self, r: f64, eta: &[f64]) -> Result<MetricPoint> {
        let d = self.eta_dim();
        let omega = self.omega.eval(r, eta)?;
        let mut beta = DVector::zeros(d);
        let mut sigma = DMatrix::zeros(d, d);
        for k in 0..d {
            beta[k] = self.beta[k].eval(r, eta)?;
            for l in 0..d {
                sigma[(k, l)] = self.sigma[k][l].eval(r, eta)?;
            }
        }
        Ok(MetricPoint { omega, beta, sigma })
    }

    /// Metric given directly by its entries, as used for synthetic tests.
    pub fn from_parts(
        nu: Vec<Q>,
        omega: PuiseuxSeries<f64>,
        beta: Vec<PuiseuxSeries<f64>>,
        sigma: Vec<Vec<PuiseuxSeries<f64>>>,
        opts: &MetricOptions,
    ) -> Result<Self> {
        let d = beta.len();
        if sigma.len() != d || sigma.iter().any(|row| row.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: sigma.len() });
        }
        let domain = omega.domain;
        if domain.eta_dim != d {
            return Err(Error::DimensionMismatch { expected: d, got: domain.eta_dim });
        }
        let mut m = Self {
            nu,
            omega,
            beta,
            sigma,
            lambda: Vec::new(),
            chi_radial: Vec::new(),
            omega_min: 0.0,
            sigma_min_scaled: 0.0,
            norm_constant: 0.0,
        };
        m.check(opts)?;
        Ok(m)
    }

    /// Whether every cross term is below `tol` relative to `√(‖ω‖ ‖Σ‖)`,
    /// so that rounding noise does not trigger the flow.
    pub fn beta_negligible(&self, tol: f64) -> bool {
        let sigma = self.sigma.iter().flatten().map(|s| s.norm_with_tail()).fold(0.0, f64::max);
        let scale = (self.omega.norm_with_tail() * sigma).sqrt();
        self.beta.iter().all(|b| b.norm_with_tail() <= tol * scale)
    }

    fn max_nu(&self) -> f64 {
        self.nu.iter().map(|v| q_to_f64(*v)).fold(1.0, f64::max)
    }

    fn check(&mut self, opts: &MetricOptions) -> Result<()> {
        let dom = self.domain();
        let etas = sample_eta(dom, opts.grid_eta);
        let rs: Vec<f64> = (0..opts.grid_r).map(|i| dom.epsilon * i as f64 / (opts.grid_r - 1).max(1) as f64).collect();
        let tail = self.omega.tail_bound;
        let mut omega_min = f64::INFINITY;
        let mut sigma_min = f64::INFINITY;
        let mut norm_c: f64 = 0.0;
        let numax = self.max_nu();
        for &r in &rs {
            for eta in &etas {
                let p = self.at(r, eta)?;
                omega_min = omega_min.min(p.omega - tail);
                if r > 0.0 && self.eta_dim() > 0 {
                    let eig = SymmetricEigen::new(p.sigma.clone()).eigenvalues;
                    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    sigma_min = sigma_min.min(lo / r.powf(2.0 * numax));
                    norm_c = norm_c.max(hi / (r * r) / r.powf(2.0 * (numax - 1.0)));
                }
            }
        }
        if !(omega_min > opts.omega_floor) {
            return Err(Error::DegenerateOmega(omega_min));
        }
        self.omega_min = omega_min;
        self.sigma_min_scaled = if sigma_min.is_finite() { sigma_min } else { 0.0 };
        self.norm_constant = norm_c;
        Ok(())
    }
}

pub(crate) fn sample_eta(dom: CubeDomain, n: usize) -> Vec<Vec<f64>> {
    if dom.eta_dim == 0 {
        return vec![vec![]];
    }
    let per = if dom.eta_dim > 1 { n.min(5) } else { n };
    tensor_grid(dom.eta_dim, per, dom.delta)
}

/// Assembles the induced metric from `ν` and the series `χ_j`.
pub fn induced_metric(nu: &[Q], chi: &[PuiseuxSeries<f64>], opts: &MetricOptions) -> Result<MetricData> {
    if nu.len() != chi.len() || chi.is_empty() {
        return Err(Error::DimensionMismatch { expected: nu.len(), got: chi.len() });
    }
    if nu.iter().any(|v| *v < qi(1)) {
        return Err(Error::InvalidArgument("weights must be normalized with min ν = 1".into()));
    }
    let base = chi[0].domain;
    if chi.iter().any(|c| c.domain != base) {
        return Err(Error::DomainMismatch);
    }
    let has_tail = chi.iter().any(|c| c.tail_bound > 0.0);
    let theta = if has_tail { opts.theta } else { 1.0 };
    let dom = CubeDomain::new(base.eta_dim, base.delta * theta, base.epsilon * theta)?;
    let d = dom.eta_dim;

    let mut chi_radial = Vec::with_capacity(chi.len());
    let mut lambda = Vec::with_capacity(chi.len());
    for (c, v) in chi.iter().zip(nu) {
        let e = c.euler_derivative(theta)?.restrict(dom)?;
        let inv = 1.0 / q_to_f64(*v);
        chi_radial.push(c.restrict(dom)?.add(&e.scale(&inv))?);
        let row = (0..d)
            .map(|k| c.eta_derivative(k, theta)?.restrict(dom))
            .collect::<Result<Vec<_>>>()?;
        lambda.push(row);
    }

    let trunc = chi.iter().map(|c| c.truncation).min().unwrap();
    let mut omega = PuiseuxSeries::zero(dom, trunc);
    let mut beta = vec![PuiseuxSeries::zero(dom, trunc); d];
    let mut sigma = vec![vec![PuiseuxSeries::zero(dom, trunc); d]; d];
    for (j, v) in nu.iter().enumerate() {
        let vf = q_to_f64(*v);
        let a = chi_radial[j].scale(&vf);
        omega = omega.add(&a.mul(&a)?.shift(*v + *v - qi(2))?)?;
        for k in 0..d {
            let b = a.mul(&lambda[j][k])?.shift(*v + *v - qi(1))?;
            beta[k] = beta[k].add(&b)?;
            for l in k..d {
                let s = lambda[j][k].mul(&lambda[j][l])?.shift(*v + *v)?;
                sigma[k][l] = sigma[k][l].add(&s)?;
            }
        }
    }
    for k in 0..d {
        for l in 0..k {
            sigma[k][l] = sigma[l][k].clone();
        }
    }
    let mut m = MetricData {
        nu: nu.to_vec(),
        omega,
        beta,
        sigma,
        lambda,
        chi_radial,
        omega_min: 0.0,
        sigma_min_scaled: 0.0,
        norm_constant: 0.0,
    };
    m.check(opts)?;
    Ok(m)
}

/// [`induced_metric`] of a parametrization from the Newton scheme.
pub fn parametrization_metric(p: &Parametrization, opts: &MetricOptions) -> Result<MetricData> {
    induced_metric(&p.nu, &p.chi, opts)
}
