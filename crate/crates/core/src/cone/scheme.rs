use nalgebra::{DMatrix, DVector};
use num::{BigRational, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::link::{link_solve, ChartOptions, LinkChart};
use crate::error::{Error, Result};
use crate::newton::{face_polynomial, semigroup_lattice, ExponentLattice, NewtonFace};
use crate::poly::Polynomial;
use crate::puiseux::{reciprocal, CubeDomain, EtaPoly, PuiseuxSeries, SeriesCoeff};
use crate::rational::{qi, Q};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeOptions {
    /// Truncation order of the `χ_k` series.
    #[serde(with = "crate::rational::serde_q")]
    pub q_max: Q,
    pub chart: ChartOptions,
    /// Largest number of `ε` halvings before giving up.
    pub max_halvings: u32,
    /// Contraction factor the shrink loop aims for.
    pub target_contraction: f64,
    /// Total degree of the fitted `η`-polynomials.
    pub eta_degree: u32,
    pub max_iterations: usize,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            q_max: qi(6),
            chart: ChartOptions::default(),
            max_halvings: 20,
            target_contraction: 0.5,
            eta_degree: 16,
            max_iterations: 60,
        }
    }
}

/// Convergence data of the Newton iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// `‖G_y(y)/G_y(0, y_0) - 1‖`, the contraction factor of the
    /// simplified Newton map on the final domain.
    pub factor: f64,
    /// Norms of the successive corrections `ζ_n`.
    pub correction_norms: Vec<f64>,
    /// `‖ζ_{n+1}‖ / ‖ζ_n‖`.
    pub ratios: Vec<f64>,
    /// Fit `‖ζ_n‖ ≤ κ n² cⁿ`.
    pub kappa: f64,
    pub c: f64,
    pub iterations: usize,
    pub halvings: u32,
    pub epsilon: f64,
}

/// `x_k = r^{ν_k} χ_k(r, η)` on one branch of one face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parametrization {
    pub branch: String,
    #[serde(with = "crate::rational::serde_q::vec")]
    pub nu: Vec<Q>,
    #[serde(with = "crate::rational::serde_q")]
    pub weighted_degree: Q,
    pub chi: Vec<PuiseuxSeries<f64>>,
    #[serde(skip)]
    pub chi_exact: Option<Vec<PuiseuxSeries<BigRational>>>,
    pub chart: LinkChart,
    pub contraction: ContractionReport,
    /// Exponents allowed in `χ`: the semigroup generated by `ν` and the
    /// remainder exponents `γ·ν - m`.
    pub dictionary: ExponentLattice,
    /// Exponents `γ·ν - m` of the remainder monomials; the solved
    /// coordinate's exponents lie in the semigroup they generate.
    #[serde(with = "crate::rational::serde_q::vec")]
    pub remainder_exponents: Vec<Q>,
    /// Whether all exponents already lie in the semigroup of `ν` alone.
    pub in_nu_lattice: bool,
    /// Leading exponent of the correction `χ_j - χ_j(0, ·)` of the solved
    /// coordinate; `None` when the face polynomial is the whole germ.
    #[serde(with = "crate::rational::serde_q::option")]
    pub perturbation_order: Option<Q>,
    /// Largest least-squares misfit of the `η`-coefficient fit (0 on the
    /// symbolic path).
    pub fit_error: f64,
    /// Filled by [`super::parametrization_residual`].
    pub residual_certificate: Option<f64>,
}

impl Parametrization {
    pub fn dim(&self) -> usize {
        self.nu.len()
    }

    pub fn domain(&self) -> CubeDomain {
        self.chi[0].domain
    }

    /// `r^{ν_k} χ_k` as a series.
    pub fn coordinate_series(&self, k: usize) -> Result<PuiseuxSeries<f64>> {
        self.chi[k].shift(self.nu[k])
    }

    pub fn coordinate_series_exact(&self, k: usize) -> Option<Result<PuiseuxSeries<BigRational>>> {
        self.chi_exact.as_ref().map(|c| c[k].shift(self.nu[k]))
    }

    /// `Φ(r, η)` from the stored series.
    pub fn eval(&self, r: f64, eta: &[f64]) -> Result<Vec<f64>> {
        self.chi
            .iter()
            .zip(&self.nu)
            .map(|(c, nu)| Ok(r.powf(crate::rational::q_to_f64(*nu)) * c.eval(r, eta)?))
            .collect()
    }
}

/// Coefficients `a_k(r)` of `G(r, y) = f(x) / r^m = Σ_k a_k(r) y^k` where
/// `x_i = s r`, `x_j = r^{ν_j} y` and the remaining `x_l = r^{ν_l} η_l`
/// with `η` fixed (`eta = Some`) or kept symbolic.
fn g_coefficients<C: SeriesCoeff>(
    f: &Polynomial,
    chart: &LinkChart,
    domain: CubeDomain,
    truncation: Q,
    eta: Option<&[f64]>,
) -> Result<Vec<PuiseuxSeries<C>>> {
    let (i, j) = chart.solved_indices;
    let nu = &chart.nu;
    let m = nu.weighted_degree;
    let deg = f.terms().map(|(e, _)| e.0[j]).max().unwrap_or(0) as usize;
    let mut out = vec![PuiseuxSeries::<C>::zero(domain, truncation); deg + 1];
    let d = domain.eta_dim;
    for (e, c) in f.terms() {
        let q = nu.degree_of(e) - m;
        let mut coeff = C::from_big(c);
        if e.0[i] % 2 == 1 && chart.sign < 0 {
            coeff = -coeff;
        }
        let poly = match eta {
            Some(eta) => {
                let mut v = coeff.to_f64();
                for (k, &idx) in chart.eta_indices.iter().enumerate() {
                    v *= eta[k].powi(e.0[idx] as i32);
                }
                EtaPoly::constant(0, C::from_f64(v))
            }
            None => {
                let exp: Vec<u32> = chart.eta_indices.iter().map(|&idx| e.0[idx]).collect();
                EtaPoly::monomial(exp, coeff)
            }
        };
        let dd = if eta.is_some() { 0 } else { d };
        debug_assert_eq!(poly.dim, dd);
        let term = PuiseuxSeries::monomial(domain, truncation, q, poly)?;
        let k = e.0[j] as usize;
        out[k] = out[k].add(&term)?;
    }
    Ok(out)
}

fn horner_series<C: SeriesCoeff>(a: &[PuiseuxSeries<C>], y: &PuiseuxSeries<C>) -> Result<(PuiseuxSeries<C>, PuiseuxSeries<C>)> {
    let mut g = PuiseuxSeries::zero(y.domain, y.truncation);
    let mut dg = PuiseuxSeries::zero(y.domain, y.truncation);
    for c in a.iter().rev() {
        dg = dg.mul(y)?.add(&g)?;
        g = g.mul(y)?.add(c)?;
    }
    Ok((g, dg))
}

struct SeriesRoot<C> {
    y: PuiseuxSeries<C>,
    factor: f64,
    norms: Vec<f64>,
}

/// Newton iteration `y ← y - G(y)/G_y(y)` in the truncated series ring.
fn series_newton<C: SeriesCoeff>(a: &[PuiseuxSeries<C>], y0: C, max_iter: usize) -> Result<SeriesRoot<C>> {
    let domain = a[0].domain;
    let trunc = a.iter().map(|s| s.truncation).min().unwrap();
    let mut y = PuiseuxSeries::constant(domain, trunc, y0);
    let mut norms = Vec::new();
    for _ in 0..max_iter {
        let (g, dg) = horner_series(a, &y)?;
        let inv = reciprocal(&dg)?;
        let delta = g.mul(&inv)?;
        let dn = delta.norm();
        y = y.sub(&delta)?;
        y.tail_bound = 0.0;
        if dn == 0.0 {
            break;
        }
        norms.push(dn);
        if dn < 1e-15 * y.norm().max(1.0) {
            break;
        }
    }
    let (_, dg) = horner_series(a, &y)?;
    let a0 = dg.constant_value();
    if a0.is_zero() {
        return Err(Error::SmallDerivative { value: 0.0, at: vec![] });
    }
    let u = dg.scale(&(C::one() / a0)).sub(&PuiseuxSeries::constant(domain, trunc, C::one()))?;
    Ok(SeriesRoot { y, factor: u.norm_with_tail(), norms })
}

/// Remainder-tail certificate `‖G(y)‖ / (|G_y(0)| (1 - c))` using the
/// series coefficients up to `wide` as exact.
fn residual_tail<C: SeriesCoeff>(a_wide: &[PuiseuxSeries<C>], y: &PuiseuxSeries<C>, factor: f64, wide: Q) -> Result<f64> {
    let yw = y.as_exact_sum(wide);
    let (g, dg) = horner_series(a_wide, &yw)?;
    let a0 = dg.constant_value().abs_f64();
    if factor >= 1.0 || a0 == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(g.norm_with_tail() / (a0 * (1.0 - factor)))
}

fn fit_kappa_c(norms: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| ((i + 1) as f64, (v / ((i + 1) as f64).powi(2)).ln()))
        .collect();
    if pts.is_empty() {
        return (0.0, 0.0);
    }
    let c = if pts.len() == 1 {
        0.5
    } else {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxy / sxx).exp().min(0.999)
    };
    let kappa = norms
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let n = (i + 1) as f64;
            v / (n * n * c.powf(n))
        })
        .fold(0.0, f64::max);
    (kappa, c)
}

fn remainder_exponents(f: &Polynomial, face: &NewtonFace, nu: &crate::newton::WeightVector) -> Result<Vec<Q>> {
    let (_, rg) = face_polynomial(f, face)?;
    let m = nu.weighted_degree;
    let mut out: Vec<Q> = rg.terms().map(|(e, _)| nu.degree_of(e) - m).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

fn dictionary(nu: &crate::newton::WeightVector, rem: &[Q], cutoff: Q) -> Result<(ExponentLattice, ExponentLattice)> {
    let mut gens: Vec<Q> = nu.sigma.clone();
    gens.extend_from_slice(rem);
    Ok((semigroup_lattice(&gens, cutoff)?, semigroup_lattice(&nu.sigma, cutoff)?))
}

/// Builds every branch parametrization of the face `Γ` of `f`.
pub fn newton_solve_series(f: &Polynomial, face: &NewtonFace, opts: &SchemeOptions) -> Result<Vec<Parametrization>> {
    let charts = link_solve(f, face, &opts.chart)?;
    charts.iter().map(|c| solve_chart(f, c, opts)).collect()
}

/// Runs the scheme on a single chart, shrinking `ε` until the Newton map
/// contracts.
pub fn solve_chart(f: &Polynomial, chart: &LinkChart, opts: &SchemeOptions) -> Result<Parametrization> {
    let mut eps = chart.eta_domain.epsilon;
    let mut last = f64::INFINITY;
    for halvings in 0..=opts.max_halvings {
        let domain = CubeDomain::new(chart.eta_domain.eta_dim, chart.eta_domain.delta, eps)?;
        match attempt(f, chart, domain, opts) {
            Ok(mut p) if p.contraction.factor < opts.target_contraction => {
                p.contraction.halvings = halvings;
                p.contraction.epsilon = eps;
                return Ok(p);
            }
            Ok(p) => last = p.contraction.factor,
            Err(Error::NoContraction(c)) => last = c,
            Err(e) => return Err(e),
        }
        eps *= 0.5;
    }
    Err(Error::NoContraction(last))
}

fn attempt(f: &Polynomial, chart: &LinkChart, domain: CubeDomain, opts: &SchemeOptions) -> Result<Parametrization> {
    let q = opts.q_max;
    let dim = f.dim();
    let (i, j) = chart.solved_indices;
    let rem = remainder_exponents(f, &chart.face, &chart.nu)?;
    let (dict, nu_lattice) = dictionary(&chart.nu, &rem, q)?;
    let wide = q + q + qi(2);
    let eta_dim = domain.eta_dim;

    let (y, y_exact, factor, norms, fit_error) = if let (0, Some(root)) = (eta_dim, chart.root_exact.clone()) {
        let a = g_coefficients::<BigRational>(f, chart, domain, q, None)?;
        let sol = series_newton(&a, root, opts.max_iterations)?;
        let a_wide = g_coefficients::<BigRational>(f, chart, domain, wide, None)?;
        let tail = residual_tail(&a_wide, &sol.y, sol.factor, wide)?;
        let y = sol.y.clone().with_tail(tail);
        (y.to_f64(), Some(y), sol.factor, sol.norms, 0.0)
    } else {
        let mut per_node = Vec::with_capacity(chart.nodes.len());
        let mut factor: f64 = 0.0;
        let mut norms: Vec<f64> = Vec::new();
        let mut tail: f64 = 0.0;
        let node_domain = CubeDomain::new(0, 0.0, domain.epsilon)?;
        for node in &chart.nodes {
            let a = g_coefficients::<f64>(f, chart, node_domain, q, Some(&node.eta))?;
            let sol = series_newton(&a, node.y, opts.max_iterations)?;
            let a_wide = g_coefficients::<f64>(f, chart, node_domain, wide, Some(&node.eta))?;
            tail = tail.max(residual_tail(&a_wide, &sol.y, sol.factor, wide)?);
            factor = factor.max(sol.factor);
            for (k, v) in sol.norms.iter().enumerate() {
                if norms.len() <= k {
                    norms.push(0.0);
                }
                norms[k] = norms[k].max(*v);
            }
            per_node.push((node.eta.clone(), sol.y));
        }
        let (y, fit_error) = fit_eta(&per_node, domain, q, opts.eta_degree)?;
        (y.with_tail(tail), None, factor, norms, fit_error)
    };

    let mut ratios = Vec::new();
    for w in norms.windows(2) {
        ratios.push(if w[0] > 0.0 { w[1] / w[0] } else { 0.0 });
    }
    let (kappa, c) = fit_kappa_c(&norms);

    for e in y.exponents() {
        if !dict.contains(e) {
            return Err(Error::LatticeMismatch(format!("exponent {e} of the solved coordinate")));
        }
    }
    let in_nu_lattice = y.exponents().iter().all(|e| nu_lattice.contains(*e));
    let y0 = y.coefficient(Q::zero()).cloned().unwrap_or_else(|| EtaPoly::zero(eta_dim));
    let correction = y.sub(&PuiseuxSeries::monomial(domain, q, Q::zero(), y0)?)?;
    let perturbation_order = correction.leading_exponent();

    let build = |solved: PuiseuxSeries<f64>| -> Result<Vec<PuiseuxSeries<f64>>> {
        (0..dim)
            .map(|k| {
                if k == i {
                    Ok(PuiseuxSeries::constant(domain, q, chart.sign as f64))
                } else if k == j {
                    Ok(solved.clone())
                } else {
                    let pos = chart.eta_indices.iter().position(|&x| x == k).unwrap();
                    PuiseuxSeries::monomial(domain, q, Q::zero(), EtaPoly::var(eta_dim, pos))
                }
            })
            .collect()
    };
    let chi = build(y)?;
    let chi_exact = match y_exact {
        Some(ye) => Some(
            (0..dim)
                .map(|k| {
                    if k == i {
                        PuiseuxSeries::constant(domain, q, BigRational::from_integer((chart.sign as i64).into()))
                    } else {
                        ye.clone()
                    }
                })
                .collect(),
        ),
        None => None,
    };

    Ok(Parametrization {
        branch: chart.branch_id(),
        nu: chart.nu.sigma.clone(),
        weighted_degree: chart.nu.weighted_degree,
        chi,
        chi_exact,
        chart: chart.clone(),
        contraction: ContractionReport {
            factor,
            ratios,
            correction_norms: norms.clone(),
            kappa,
            c,
            iterations: norms.len(),
            halvings: 0,
            epsilon: domain.epsilon,
        },
        dictionary: dict,
        remainder_exponents: rem,
        in_nu_lattice,
        perturbation_order: perturbation_order.filter(|q| q.is_positive()),
        fit_error,
        residual_certificate: None,
    })
}

/// Monomials of total degree `≤ deg` in `d` variables, graded.
fn monomials(d: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u32>| {
                let used: u32 = p.iter().sum();
                (0..=deg - used).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out.sort_by_key(|e| (e.iter().sum::<u32>(), e.clone()));
    out
}

/// Least-squares fit of every exponent's coefficient over the `η` nodes.
fn fit_eta(per_node: &[(Vec<f64>, PuiseuxSeries<f64>)], domain: CubeDomain, q: Q, degree: u32) -> Result<(PuiseuxSeries<f64>, f64)> {
    let d = domain.eta_dim;
    let mut exps: Vec<Q> = per_node.iter().flat_map(|(_, s)| s.exponents()).collect();
    exps.sort();
    exps.dedup();
    let n = per_node.len();
    let mut basis = monomials(d, degree);
    while basis.len() > n && !basis.is_empty() {
        let top = basis.iter().map(|e| e.iter().sum::<u32>()).max().unwrap();
        basis.retain(|e| e.iter().sum::<u32>() < top);
    }
    let delta = if domain.delta > 0.0 { domain.delta } else { 1.0 };
    let a = DMatrix::from_fn(n, basis.len(), |row, col| {
        basis[col]
            .iter()
            .zip(&per_node[row].0)
            .map(|(&k, x)| (x / delta).powi(k as i32))
            .product::<f64>()
    });
    let svd = a.clone().svd(true, true);
    let mut out = PuiseuxSeries::zero(domain, q);
    let mut worst: f64 = 0.0;
    for e in exps {
        let b = DVector::from_iterator(n, per_node.iter().map(|(_, s)| s.coefficient(e).map_or(0.0, |c| c.constant_term())));
        let x = svd.solve(&b, 1e-13).map_err(|m| Error::Other(m.to_string()))?;
        let resid = (&a * &x - &b).amax();
        worst = worst.max(resid);
        let mut poly = EtaPoly::zero(d);
        for (col, mono) in basis.iter().enumerate() {
            let c = x[col] / delta.powi(mono.iter().sum::<u32>() as i32);
            if c != 0.0 {
                poly.add_term(mono.clone(), c);
            }
        }
        let eps_q = domain.epsilon.powf(crate::rational::q_to_f64(e));
        out = out.add(&PuiseuxSeries::monomial(domain, q, e, poly)?.with_tail(resid * eps_q))?;
    }
    Ok((out, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::newton_diagram;
    use crate::rational::{big, q};

    #[test]
    fn cusp_with_quartic_perturbation() {
        let f = Polynomial::parse("x1^2 - x2^3 - x2^4", 2).unwrap();
        let face = &newton_diagram(&f).unwrap().faces[0];
        let ps = newton_solve_series(&f, face, &SchemeOptions::default()).unwrap();
        // x2 = r, x1 = ±r^{3/2} sqrt(1 + r).
        assert_eq!(ps.len(), 2);
        let p = ps.iter().find(|p| p.chart.root > 0.0).unwrap();
        let x1 = p.coordinate_series_exact(0).unwrap().unwrap();
        let want = [(q(3, 2), big(1, 1)), (q(5, 2), big(1, 2)), (q(7, 2), big(-1, 8)), (q(9, 2), big(1, 16))];
        for (e, c) in want {
            assert_eq!(x1.coefficient(e).unwrap().constant_term(), c);
        }
        assert_eq!(p.perturbation_order, Some(qi(1)));
        assert!(p.contraction.factor < 0.5);
        assert!(p.in_nu_lattice);
    }

    #[test]
    fn quasihomogeneous_has_no_correction() {
        let f = Polynomial::parse("x1^2 + x2^2 - x3^3", 3).unwrap();
        let face = &newton_diagram(&f).unwrap().faces[0];
        let ps = newton_solve_series(&f, face, &SchemeOptions::default()).unwrap();
        for p in &ps {
            assert_eq!(p.perturbation_order, None);
            assert_eq!(p.chi[p.chart.solved_indices.1].exponents(), vec![qi(0)]);
        }
    }
}
