use ahis_core::cone::{newton_solve_series, SchemeOptions};
use ahis_core::metric::{
    induced_metric, link_length, model_operator, parametrization_metric, remove_cross_term, FlowOptions, LinkGeometry,
    MetricData, MetricOptions, ModelOperator, ModelOptions, NormalizedMetric,
};
use ahis_core::newton::newton_diagram;
use ahis_core::puiseux::{CubeDomain, EtaPoly, PuiseuxSeries};
use ahis_core::rational::{q, qi};
use ahis_core::{Error, Polynomial};

mod common;

use common::rotation_surface;

const PI: f64 = std::f64::consts::PI;

fn sample_points(eps: f64) -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    for i in 0..=10 {
        for j in 0..=6 {
            v.push((eps * i as f64 / 10.0, -0.5 + j as f64 / 6.0));
        }
    }
    v
}

#[test]
fn cone_metric_benchmark() {
    let (nu, chi) = rotation_surface(qi(1), 1.0);
    let m = induced_metric(&nu, &chi, &MetricOptions::default()).unwrap();
    for (r, t) in sample_points(1.0) {
        let p = m.at(r, &[t]).unwrap();
        assert!((p.omega - 2.0).abs() < 1e-10, "ω({r}, {t}) = {}", p.omega);
        assert!(p.beta[0].abs() < 1e-10);
        assert!((p.sigma[(0, 0)] - r * r).abs() < 1e-10);
    }
    let n = remove_cross_term(&m, &FlowOptions::default()).unwrap();
    assert!(n.identity_flow);
    assert!(n.lyapunov_exponent.is_none());
    for line in 0..n.lines.len() {
        for (i, r) in n.r.iter().enumerate() {
            let s = n.sigma_hat_at(line, i)[(0, 0)];
            assert!((s - r * r / 2.0).abs() < 1e-10);
        }
    }
    let series = n.sigma_hat_series.as_ref().unwrap();
    assert!((series[0][0].eval(0.3, &[0.2]).unwrap() - 0.045).abs() < 1e-10);

    let model = model_operator(&n, &nu, LinkGeometry::circle(2.0 * PI / 2f64.sqrt()), &ModelOptions::default()).unwrap();
    assert_eq!(model.alpha, qi(2));
    assert_eq!(model.k, 1);
    assert!((model.alpha_fitted - 2.0).abs() < 1e-6);
    assert!(model.frozen_laplacian_error < 1e-9);
    // det Σ̂ = r²/2 gives V = -1/(4r²).
    assert!((model.potential_bound - 0.25).abs() < 1e-3, "{}", model.potential_bound);
}

#[test]
fn brieskorn_metric_benchmark() {
    let eps = 1.0;
    let (nu, chi) = rotation_surface(q(3, 2), eps);
    let m = induced_metric(&nu, &chi, &MetricOptions::default()).unwrap();
    for (r, t) in sample_points(eps) {
        let p = m.at(r, &[t]).unwrap();
        assert!((p.omega - (1.0 + 2.25 * r)).abs() < 1e-10);
        assert!(p.beta[0].abs() < 1e-10);
        assert!((p.sigma[(0, 0)] - r.powi(3)).abs() < 1e-10);
    }
    assert!((m.omega_min - 1.0).abs() < 1e-10);
    let n = remove_cross_term(&m, &FlowOptions::default()).unwrap();
    let model = model_operator(&n, &nu, LinkGeometry::circle(2.0 * PI), &ModelOptions::default()).unwrap();
    assert_eq!(model.alpha, qi(3));
    assert_eq!(model.k, 1);
    assert!((model.alpha_fitted - 3.0).abs() < 0.05);
    // det Σ̂ = r³/(1 + 9r/4): p = (3/r - a/(1 + a r))/2, V = p²/4 + p'/2.
    let a = 2.25;
    let oracle = (0..=2000)
        .map(|i| 10f64.powf(-2.0 + 2.0 * i as f64 / 2000.0))
        .map(|r: f64| {
            let p = 0.5 * (3.0 / r - a / (1.0 + a * r));
            let dp = 0.5 * (-3.0 / (r * r) + a * a / (1.0 + a * r).powi(2));
            r * r * (p * p / 4.0 + dp / 2.0).abs()
        })
        .fold(0.0, f64::max);
    assert!((model.potential_bound - oracle).abs() < 2e-3 * oracle, "{} vs {oracle}", model.potential_bound);
    let (w, s) = model.profile.eval(0.5);
    assert!((w - (1.0 + 2.25 * 0.5)).abs() < 1e-3);
    assert!((s / 0.125 - 1.0).abs() < 1e-3, "{s}");
}

#[test]
fn curve_metric_has_no_angular_part() {
    let f = Polynomial::parse("x1^2 - x2^3 - x2^4", 2).unwrap();
    let d = newton_diagram(&f).unwrap();
    let p = &newton_solve_series(&f, &d.faces[0], &SchemeOptions::default()).unwrap()[0];
    let m = parametrization_metric(p, &MetricOptions::default()).unwrap();
    assert!(m.beta.is_empty() && m.sigma.is_empty());
    let eps = m.domain().epsilon;
    for i in 1..=10 {
        let r = eps * i as f64 / 10.0;
        let h = 1e-6 * r;
        let a = p.eval(r + h, &[]).unwrap();
        let b = p.eval(r - h, &[]).unwrap();
        let fd: f64 = a.iter().zip(&b).map(|(x, y)| ((x - y) / (2.0 * h)).powi(2)).sum();
        let omega = m.at(r, &[]).unwrap().omega;
        assert!((omega - fd).abs() < 1e-6 * fd.max(1.0), "r = {r}: {omega} vs {fd}");
    }
    let n = remove_cross_term(&m, &FlowOptions::default()).unwrap();
    let model = model_operator(&n, &p.nu, LinkGeometry::circle(0.0), &ModelOptions::default()).unwrap();
    assert_eq!(model.k, 0);
    assert_eq!(model.alpha, qi(0));
}

#[test]
fn matrix_formulas_match_finite_differences() {
    let f = Polynomial::parse("x1^2 + x2^2 - x3^3 + x1^2*x3", 3).unwrap();
    let d = newton_diagram(&f).unwrap();
    let face = d.faces.iter().find(|fc| fc.dimension() == 2).unwrap();
    let params = newton_solve_series(&f, face, &SchemeOptions::default()).unwrap();
    assert!(!params.is_empty());
    for p in &params {
        let m = parametrization_metric(p, &MetricOptions::default()).unwrap();
        let dom = m.domain();
        for i in 1..=5 {
            for t in [-0.4, 0.0, 0.3] {
                let r = dom.epsilon * i as f64 / 5.0 * 0.9;
                let h = 1e-6;
                let dr: Vec<f64> = {
                    let a = p.eval(r + h * r, &[t]).unwrap();
                    let b = p.eval(r - h * r, &[t]).unwrap();
                    a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h * r)).collect()
                };
                let de: Vec<f64> = {
                    let a = p.eval(r, &[t + h]).unwrap();
                    let b = p.eval(r, &[t - h]).unwrap();
                    a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
                };
                let omega: f64 = dr.iter().map(|x| x * x).sum();
                let beta: f64 = dr.iter().zip(&de).map(|(x, y)| x * y).sum();
                let sigma: f64 = de.iter().map(|x| x * x).sum();
                let pt = m.at(r, &[t]).unwrap();
                assert!((pt.omega - omega).abs() < 1e-6, "ω {} vs {omega}", pt.omega);
                assert!((pt.beta[0] - beta).abs() < 1e-6, "β {} vs {beta}", pt.beta[0]);
                assert!((pt.sigma[(0, 0)] - sigma).abs() < 1e-6, "Σ {} vs {sigma}", pt.sigma[(0, 0)]);
                assert!(pt.sigma[(0, 0)] > 0.0);
            }
        }
        assert!(m.omega_min > 0.0 && m.sigma_min_scaled > 0.0);
    }
}

fn synthetic_cross_term(eps: f64) -> MetricData {
    let dom = CubeDomain::new(1, 0.5, eps).unwrap();
    let omega = PuiseuxSeries::constant(dom, qi(8), 2.0);
    let beta = PuiseuxSeries::monomial(dom, qi(8), qi(3), EtaPoly::var(1, 0)).unwrap();
    let sigma = PuiseuxSeries::monomial(dom, qi(8), qi(2), EtaPoly::constant(1, 1.0)).unwrap();
    MetricData::from_parts(vec![qi(1), qi(1), qi(1)], omega, vec![beta], vec![vec![sigma]], &MetricOptions::default()).unwrap()
}

#[test]
fn synthetic_cross_term_flow() {
    let eps = 0.3;
    let m = synthetic_cross_term(eps);
    let n = remove_cross_term(&m, &FlowOptions { r_min_ratio: 1e-4 / eps, ..FlowOptions::default() }).unwrap();
    assert!(!n.identity_flow);
    let r_end = *n.r.last().unwrap();
    assert!((r_end - 1e-4).abs() < 1e-12);
    // η' = -r η, so η(r) = θ exp((ε² - r²)/2) and ∂η/∂θ = exp((ε² - r²)/2).
    for line in &n.lines {
        let theta = line.theta[0];
        for (i, r) in n.r.iter().enumerate() {
            let g = ((eps * eps - r * r) / 2.0).exp();
            assert!((line.eta[i][0] - theta * g).abs() < 1e-8, "r = {r}");
            let expected = r * r * g * g / (2.0 - r.powi(4) * (theta * g).powi(2));
            let got = line.sigma_hat[i][0];
            assert!((got - expected).abs() < 1e-8 * expected.max(1e-12) + 1e-14, "Σ̂ at r = {r}: {got} vs {expected}");
        }
    }
    assert!(n.cross_term_residual <= 1e-8, "{}", n.cross_term_residual);
    assert!(n.integration_error <= 1e-8);
    // φ = |η(r) - η(r_min)|² ~ r⁴.
    let a = n.lyapunov_exponent.unwrap();
    assert!((a - 4.0).abs() < 0.2, "{a}");
    for line in &n.lines {
        for (r, phi) in n.r.iter().zip(&line.phi) {
            assert!(*phi <= n.lyapunov_constant * r.powf(a) * (1.0 + 1e-9) + 1e-30);
        }
    }
}

#[test]
fn degenerate_omega_is_rejected() {
    let dom = CubeDomain::new(0, 0.5, 0.1).unwrap();
    let zero = PuiseuxSeries::zero(dom, qi(4));
    let err = induced_metric(&[qi(1), qi(2)], &[zero.clone(), zero], &MetricOptions::default()).unwrap_err();
    assert!(matches!(err, Error::DegenerateOmega(_)));
}

#[test]
fn brieskorn_link_length_is_a_full_circle() {
    let fg = Polynomial::parse("x1^2 + x2^2 - x3^3", 3).unwrap();
    let nu = vec![q(3, 2), q(3, 2), qi(1)];
    let g = link_length(&fg, &nu, 2, 1, 4096).unwrap();
    assert!((g.length - 2.0 * PI).abs() < 1e-5, "{}", g.length);
    assert!(link_length(&fg, &nu, 2, -1, 64).is_err());
}

#[test]
fn normalized_metric_and_model_round_trip_json() {
    let (nu, chi) = rotation_surface(q(3, 2), 0.5);
    let m = induced_metric(&nu, &chi, &MetricOptions::default()).unwrap();
    let n = remove_cross_term(&m, &FlowOptions { samples: 16, ..FlowOptions::default() }).unwrap();
    let text = serde_json::to_string(&n).unwrap();
    let back: NormalizedMetric = serde_json::from_str(&text).unwrap();
    assert_eq!(back.r, n.r);
    assert_eq!(back.lines, n.lines);
    let model = model_operator(&n, &nu, LinkGeometry::circle(2.0 * PI), &ModelOptions::default()).unwrap();
    let text = serde_json::to_string(&model).unwrap();
    let back: ModelOperator = serde_json::from_str(&text).unwrap();
    assert_eq!(back, model);
}
