use std::cell::RefCell;

use nalgebra::{DMatrix, DVector};
use ode_solvers::dop_shared::OutputType;
use ode_solvers::{Dopri5, System};
use serde::{Deserialize, Serialize};

use super::induced::{sample_eta, MetricData};
use crate::error::{Error, Result};
use crate::puiseux::{reciprocal, PuiseuxSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Initial values `θ` per `η` direction.
    pub lines: usize,
    /// Flow is followed down to `r_min = ratio · ε`.
    pub r_min_ratio: f64,
    /// Output radii, geometric between `ε` and `r_min`.
    pub samples: usize,
    pub rtol: f64,
    pub atol: f64,
    /// `β` counts as zero below this multiple of `√(‖ω‖ ‖Σ‖)`.
    pub beta_tolerance: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { lines: 5, r_min_ratio: 1e-4, samples: 64, rtol: 1e-11, atol: 1e-13, beta_tolerance: 1e-13 }
    }
}

/// One flow line `r ↦ η(r, θ)` with `η(ε) = θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowLine {
    pub theta: Vec<f64>,
    pub eta: Vec<Vec<f64>>,
    /// `Σ̂ = JᵀΣJ / ω̃` in flowed coordinates, row-major.
    pub sigma_hat: Vec<Vec<f64>>,
    /// `ω̃ = ω - βᵀΣ⁻¹β`, the `dr²` coefficient once the cross term is gone.
    pub omega: Vec<f64>,
    /// `φ(r) = ‖η(r) - η(r_min)‖²`.
    pub phi: Vec<f64>,
}

/// `ĝ = dr² + Σ̂(r, θ) dθ²` after removing the cross term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMetric {
    pub eta_dim: usize,
    pub epsilon: f64,
    /// Decreasing radii shared by all lines.
    pub r: Vec<f64>,
    pub lines: Vec<FlowLine>,
    pub identity_flow: bool,
    /// `Σ/ω` as series, available when the flow is the identity.
    pub sigma_hat_series: Option<Vec<Vec<PuiseuxSeries<f64>>>>,
    /// Largest `|(β + Σ η_r)ᵀ J|` on the output grid.
    pub cross_term_residual: f64,
    /// Largest change of `η` when the flow is recomputed at a 100× tighter tolerance.
    pub integration_error: f64,
    /// Fitted `a` with `φ ≤ δ r^a`; `None` when `φ ≡ 0`.
    pub lyapunov_exponent: Option<f64>,
    pub lyapunov_constant: f64,
}

impl NormalizedMetric {
    pub fn sigma_hat_at(&self, line: usize, i: usize) -> DMatrix<f64> {
        let d = self.eta_dim;
        DMatrix::from_row_slice(d, d, &self.lines[line].sigma_hat[i])
    }
}

struct CrossFlow<'a> {
    metric: &'a MetricData,
    epsilon: f64,
    failure: RefCell<Option<Error>>,
}

impl CrossFlow<'_> {
    /// `r Σ⁻¹ β` at `(r, η)`, the `s = ln(ε/r)` derivative of `η`.
    fn field(&self, r: f64, eta: &[f64]) -> Result<DVector<f64>> {
        let p = self.metric.at(r, eta)?;
        let lu = p.sigma.lu();
        let x = lu
            .solve(&p.beta)
            .ok_or_else(|| Error::SingularJacobian(format!("Σ singular at r = {r:e}")))?;
        Ok(x * r)
    }
}

impl System<f64, DVector<f64>> for &CrossFlow<'_> {
    fn system(&self, s: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let d = self.metric.eta_dim();
        let r = self.epsilon * (-s).exp();
        let eta: Vec<f64> = y.rows(0, d).iter().cloned().collect();
        let res = (|| -> Result<()> {
            let f = self.field(r, &eta)?;
            dy.rows_mut(0, d).copy_from(&f);
            let h = 1e-6;
            let mut jac = DMatrix::zeros(d, d);
            for k in 0..d {
                let mut a = eta.clone();
                let mut b = eta.clone();
                a[k] += h;
                b[k] -= h;
                let col = (self.field(r, &a)? - self.field(r, &b)?) / (2.0 * h);
                jac.set_column(k, &col);
            }
            let j = DMatrix::from_column_slice(d, d, &y.as_slice()[d..]);
            let dj = jac * j;
            dy.rows_mut(d, d * d).copy_from_slice(dj.as_slice());
            Ok(())
        })();
        if let Err(e) = res {
            dy.fill(0.0);
            self.failure.borrow_mut().get_or_insert(e);
        }
    }
}

fn integrate_line(metric: &MetricData, theta: &[f64], s_grid: &[f64], rtol: f64, atol: f64) -> Result<Vec<DVector<f64>>> {
    let d = metric.eta_dim();
    let eps = metric.domain().epsilon;
    let mut y = DVector::zeros(d + d * d);
    for k in 0..d {
        y[k] = theta[k];
        y[d + k * d + k] = 1.0;
    }
    let mut out = vec![y.clone()];
    for w in s_grid.windows(2) {
        let sys = CrossFlow { metric, epsilon: eps, failure: RefCell::new(None) };
        let mut solver = Dopri5::new(&sys, w[0], w[1], 0.0, y.clone(), rtol, atol);
        solver.set_output(OutputType::Sparse);
        let stats = solver.integrate();
        let last = solver.y_out().last().cloned();
        let failure = sys.failure.borrow_mut().take();
        match (stats, last, failure) {
            (Ok(_), Some(next), None) => y = next,
            (_, _, Some(e)) if !matches!(e, Error::OutOfDomain(_)) => return Err(e),
            _ => {
                let r0 = eps * (-w[0]).exp();
                let rate = sys.field(r0, &y.as_slice()[..d]).map(|f| f.norm()).unwrap_or(f64::INFINITY);
                return Err(Error::FlowBlowUp { r: r0, rate });
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Removes the cross term `β` by flowing `η` along `η' = -Σ⁻¹β` from
/// `r = ε` towards 0, then normalizes by the new `dr²` coefficient.
pub fn remove_cross_term(m: &MetricData, opts: &FlowOptions) -> Result<NormalizedMetric> {
    let d = m.eta_dim();
    let dom = m.domain();
    let eps = dom.epsilon;
    let r_min = eps * opts.r_min_ratio;
    let n = opts.samples.max(2);
    let s_end = (eps / r_min).ln();
    let s_grid: Vec<f64> = (0..n).map(|i| s_end * i as f64 / (n - 1) as f64).collect();
    let r: Vec<f64> = s_grid.iter().map(|s| eps * (-s).exp()).collect();
    let thetas = sample_eta(dom, opts.lines);
    let identity = m.beta_negligible(opts.beta_tolerance);

    let mut lines = Vec::with_capacity(thetas.len());
    let mut residual: f64 = 0.0;
    let mut integration_error: f64 = 0.0;
    for theta in &thetas {
        let (states, errors) = if identity || d == 0 {
            let mut y = DVector::zeros(d + d * d);
            for k in 0..d {
                y[k] = theta[k];
                y[d + k * d + k] = 1.0;
            }
            (vec![y; n], vec![DVector::zeros(d); n])
        } else {
            let coarse = integrate_line(m, theta, &s_grid, opts.rtol, opts.atol)?;
            let fine = integrate_line(m, theta, &s_grid, opts.rtol * 1e-2, opts.atol * 1e-2)?;
            let errors: Vec<DVector<f64>> = coarse.iter().zip(&fine).map(|(a, b)| a.rows(0, d) - b.rows(0, d)).collect();
            for e in &errors {
                integration_error = integration_error.max(e.amax());
            }
            (coarse, errors)
        };
        let mut line = FlowLine { theta: theta.clone(), eta: vec![], sigma_hat: vec![], omega: vec![], phi: vec![] };
        for (i, (ri, y)) in r.iter().zip(&states).enumerate() {
            let eta: Vec<f64> = y.rows(0, d).iter().cloned().collect();
            let j = DMatrix::from_column_slice(d, d, &y.as_slice()[d..]);
            let p = m.at(*ri, &eta)?;
            let (omega, sigma_hat) = if d == 0 {
                (p.omega, DMatrix::zeros(0, 0))
            } else {
                let sol = p
                    .sigma
                    .clone()
                    .lu()
                    .solve(&p.beta)
                    .ok_or_else(|| Error::SingularJacobian(format!("Σ singular at r = {ri:e}")))?;
                // The computed map differs from the exact flow by the
                // integration error e(r); the leftover cross term is Σ ė.
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                let de = (&errors[b] - &errors[a]) / (r[b] - r[a]);
                let cross = (&p.sigma * de).transpose() * &j;
                let scale = p.omega.sqrt() * (j.transpose() * &p.sigma * &j).norm().sqrt();
                residual = residual.max(cross.amax() / scale.max(f64::MIN_POSITIVE));
                let omega = p.omega - p.beta.dot(&sol);
                if !(omega > 0.0) {
                    return Err(Error::DegenerateOmega(omega));
                }
                (omega, j.transpose() * &p.sigma * &j / omega)
            };
            line.eta.push(eta);
            line.omega.push(omega);
            line.sigma_hat.push(sigma_hat.transpose().as_slice().to_vec());
        }
        let last = line.eta.last().cloned().unwrap_or_default();
        line.phi = line
            .eta
            .iter()
            .map(|e| e.iter().zip(&last).map(|(a, b)| (a - b) * (a - b)).sum())
            .collect();
        lines.push(line);
    }

    let (lyapunov_exponent, lyapunov_constant) = lyapunov_fit(&r, &lines, r_min)?;
    let sigma_hat_series = if identity && d > 0 {
        reciprocal(&m.omega).ok().and_then(|inv| {
            m.sigma
                .iter()
                .map(|row| row.iter().map(|s| s.mul(&inv)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
                .ok()
        })
    } else {
        None
    };
    Ok(NormalizedMetric {
        eta_dim: d,
        epsilon: eps,
        r,
        lines,
        identity_flow: identity,
        sigma_hat_series,
        cross_term_residual: residual,
        integration_error,
        lyapunov_exponent,
        lyapunov_constant,
    })
}

/// Least-squares slope of `ln φ` against `ln r` for `r ≥ 100 r_min`,
/// then `δ = max φ / r^a`.
fn lyapunov_fit(r: &[f64], lines: &[FlowLine], r_min: f64) -> Result<(Option<f64>, f64)> {
    let scale = lines.iter().flat_map(|l| l.phi.iter()).cloned().fold(0.0, f64::max);
    let floor = 1e-26_f64.max(scale * 1e-20);
    let mut pts = Vec::new();
    for l in lines {
        for (ri, phi) in r.iter().zip(&l.phi) {
            if *ri >= 100.0 * r_min && *phi > floor {
                pts.push((ri.ln(), phi.ln()));
            }
        }
    }
    if pts.len() < 3 {
        return Ok((None, 0.0));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let a = sxy / sxx;
    if !(a > 0.01) {
        return Err(Error::Lyapunov(format!("φ does not decay towards r = 0 (fitted exponent {a:.3})")));
    }
    let delta = pts.iter().map(|(lr, lp)| (lp - a * lr).exp()).fold(0.0, f64::max);
    Ok((Some(a), delta))
}
