//! One check per acceptance criterion. Each prints a PASS/FAIL line; the
//! test fails if any criterion does.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use ahis_core::cone::{newton_solve_series, parametrization_residual, ChartOptions, Parametrization, ResidualGrid, SchemeOptions};
use ahis_core::metric::{
    induced_metric, link_length, model_operator, parametrization_metric, remove_cross_term, FlowOptions, LinkGeometry,
    MetricOptions, ModelOperator, ModelOptions,
};
use ahis_core::newton::{euler_apply, face_polynomial, newton_diagram, scaling_apply};
use ahis_core::puiseux::{compose_analytic, CubeDomain, EtaPoly, PowerSeriesGerm, PuiseuxSeries};
use ahis_core::rational::{big, big_from_f64, big_from_q, q, q_to_f64, qi};
use ahis_core::spectral::*;
use ahis_core::{BigRational, Polynomial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PI: f64 = std::f64::consts::PI;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn newton_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut compared = 0;
    while compared < 50 {
        let f = common::random_poly(&mut rng);
        let pts = f.support();
        let ipts: Vec<Vec<i128>> = pts.iter().map(|e| e.0.iter().map(|&x| x as i128).collect()).collect();
        let Some(expected) = common::oracle_faces(&ipts, f.dim()) else { continue };
        let d = newton_diagram(&f).map_err(|e| format!("{f}: {e}"))?;
        let got: BTreeSet<BTreeSet<usize>> = d
            .faces
            .iter()
            .map(|face| face.vertices.iter().map(|v| pts.iter().position(|p| p == v).unwrap()).collect())
            .collect();
        if got != expected {
            return Err(format!("face sets differ for {f}"));
        }
        compared += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 10.0, format!("50 polynomials match the oracle in {secs:.2} s"))
}

fn quasihomogeneity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut faces = 0;
    for text in ["x1^2 + x2^3", "x1^3 + x1*x2 + x2^3", "x1^2 - x2^3 - x2^4", "x1^2 + x2^2 - x3^3", "x1^4 + x1^2*x2^2*x3 + x2^5 + x3^7"] {
        let dim = if text.contains("x3") { 3 } else { 2 };
        let f = Polynomial::parse(text, dim).unwrap();
        for face in newton_diagram(&f).unwrap().faces {
            faces += 1;
            let (fg, _) = face_polynomial(&f, &face).unwrap();
            let w = &face.weight;
            let m = w.weighted_degree;
            let euler = &euler_apply(w, &fg) - &fg.scale(&big_from_q(m));
            if !euler.is_zero() {
                return Err(format!("{text}: Euler identity fails exactly"));
            }
            for _ in 0..100 {
                let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect();
                let lam: f64 = rng.random_range(0.2..2.0);
                let y = scaling_apply(w, lam, &x).unwrap();
                let scale = fg.majorant(1.5) * lam.powf(q_to_f64(m)).max(1.0);
                let err = (fg.evaluate(&y).unwrap() - lam.powf(q_to_f64(m)) * fg.evaluate(&x).unwrap()).abs() / scale;
                let e_float = euler_apply(w, &fg).evaluate(&x).unwrap() - q_to_f64(m) * fg.evaluate(&x).unwrap();
                worst = worst.max(err).max(e_float.abs() / fg.majorant(1.5));
                let num = rng.random_range(1..9);
                let lam_q = big(num, 4);
                let xq: Vec<BigRational> = x.iter().map(|v| big_from_f64(*v)).collect();
                let yq: Vec<BigRational> = xq
                    .iter()
                    .zip(&w.sigma)
                    .map(|(v, s)| v * num::pow(lam_q.clone(), s.to_integer() as usize))
                    .collect();
                let lhs = fg.evaluate_exact(&yq).unwrap();
                let rhs = fg.evaluate_exact(&xq).unwrap() * num::pow(lam_q, m.to_integer() as usize);
                if lhs != rhs {
                    return Err(format!("{text}: exact scaling identity fails"));
                }
            }
        }
    }
    check(worst <= 1e-12, format!("{faces} faces, exact identities hold, worst float error {worst:.1e}"))
}

fn puiseux_composition() -> Outcome {
    let d = CubeDomain::new(0, 0.0, 0.1).unwrap();
    let r = PuiseuxSeries::monomial(d, qi(3), qi(1), EtaPoly::constant(0, big(1, 1))).unwrap();
    let g = PowerSeriesGerm::<BigRational>::binomial(q(1, 2), 10, 0.5).unwrap();
    let s = compose_analytic(&g, &[r]).map_err(|e| e.to_string())?;
    let coeffs: Vec<BigRational> = s.terms().map(|(_, c)| c.constant_term()).collect();
    if coeffs != vec![big(1, 1), big(1, 2), big(-1, 8), big(1, 16)] {
        return Err(format!("coefficients {coeffs:?}"));
    }
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let x = 0.1 * i as f64 / 99.0;
        let err = (s.eval(x, &[]).unwrap() - (1.0 + x).sqrt()).abs();
        if err > s.tail_bound {
            return Err(format!("error {err:.2e} above tail bound {:.2e} at r = {x}", s.tail_bound));
        }
        worst = worst.max(err);
    }
    Ok(format!("coefficients (1, 1/2, -1/8, 1/16), max error {worst:.2e} <= tail {:.2e}", s.tail_bound))
}

fn cusp() -> (Parametrization, Polynomial, f64) {
    let start = Instant::now();
    let f = Polynomial::parse("x1^2 - x2^3 - x2^4", 2).unwrap();
    let face = newton_diagram(&f).unwrap().faces[0].clone();
    let ps = newton_solve_series(&f, &face, &SchemeOptions::default()).unwrap();
    let p = ps.into_iter().find(|p| p.chart.root > 0.0).unwrap();
    (p, f, start.elapsed().as_secs_f64())
}

fn newton_scheme() -> Outcome {
    let (p, f, secs) = cusp();
    let x1 = p.coordinate_series(0).map_err(|e| e.to_string())?;
    let mut c = 1.0;
    let mut worst: f64 = 0.0;
    for k in 0..4 {
        let got = x1.coefficient(q(3, 2) + qi(k)).map(|e| e.constant_term()).unwrap_or(0.0);
        worst = worst.max((got - c).abs());
        c *= (0.5 - k as f64) / (k as f64 + 1.0);
    }
    let res = parametrization_residual(&p, &f, &ResidualGrid::default()).map_err(|e| e.to_string())?;
    check(
        worst <= 1e-8 && res.max <= 1e-10 && secs < 5.0,
        format!("coefficient error {worst:.1e}, residual {:.1e}, {secs:.2} s", res.max),
    )
}

fn contraction() -> Outcome {
    let (p, _, _) = cusp();
    let c = &p.contraction;
    let worst = c.ratios.iter().cloned().fold(0.0, f64::max);
    let bound_ok = c
        .correction_norms
        .iter()
        .enumerate()
        .all(|(n, v)| *v <= c.kappa * ((n + 1) * (n + 1)) as f64 * c.c.powi(n as i32 + 1) * (1.0 + 1e-9));
    check(
        worst <= 0.5 && c.factor <= 0.5 && c.c < 1.0 && bound_ok,
        format!("max ratio {worst:.3}, factor {:.3}, κ = {:.3e}, c = {:.3}, ε = {}", c.factor, c.kappa, c.c, c.epsilon),
    )
}

fn brieskorn_model(chart_epsilon: f64) -> ModelOperator {
    let f = Polynomial::parse("x1^2 + x2^2 - x3^3", 3).unwrap();
    let face = newton_diagram(&f).unwrap().faces[0].clone();
    let opts = SchemeOptions { chart: ChartOptions { epsilon: chart_epsilon, ..Default::default() }, ..Default::default() };
    let p = &newton_solve_series(&f, &face, &opts).unwrap()[0];
    let m = parametrization_metric(p, &MetricOptions::default()).unwrap();
    let n = remove_cross_term(&m, &FlowOptions { r_min_ratio: 1e-6, samples: 128, ..Default::default() }).unwrap();
    let link = link_length(&p.chart.face_poly, &p.nu, p.chart.solved_indices.0, p.chart.sign as i32, 4096).unwrap();
    model_operator(&n, &p.nu, link, &ModelOptions::default()).unwrap()
}

fn metric_benchmarks() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let (nu, chi) = common::rotation_surface(qi(1), 1.0);
    let m = induced_metric(&nu, &chi, &MetricOptions::default()).map_err(|e| e.to_string())?;
    let n = remove_cross_term(&m, &FlowOptions::default()).map_err(|e| e.to_string())?;
    for i in 0..=10 {
        let r = i as f64 / 10.0;
        let p = m.at(r, &[0.1]).unwrap();
        worst = worst.max((p.omega - 2.0).abs()).max(p.beta[0].abs()).max((p.sigma[(0, 0)] - r * r).abs());
    }
    for (i, r) in n.r.iter().enumerate() {
        worst = worst.max((n.sigma_hat_at(0, i)[(0, 0)] - r * r / 2.0).abs());
    }
    let (nu, chi) = common::rotation_surface(q(3, 2), 1.0);
    let m = induced_metric(&nu, &chi, &MetricOptions::default()).map_err(|e| e.to_string())?;
    for i in 0..=10 {
        let r = i as f64 / 10.0;
        let p = m.at(r, &[-0.2]).unwrap();
        worst = worst.max((p.omega - (1.0 + 2.25 * r)).abs()).max(p.beta[0].abs()).max((p.sigma[(0, 0)] - r.powi(3)).abs());
    }
    let model = brieskorn_model(0.1);
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-10 && model.alpha == qi(3) && model.k == 1 && (model.alpha_fitted - 3.0).abs() < 0.05 && secs < 10.0,
        format!("identity error {worst:.1e}, α = {} (fitted {:.4}), k = {}, {secs:.2} s", model.alpha, model.alpha_fitted, model.k),
    )
}

/// `J_ν` by its power series, first zero by bisection.
fn bessel_zero(nu: f64) -> f64 {
    let j = |x: f64| {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..80 {
            term *= -(x * x / 4.0) / (k as f64 * (k as f64 + nu));
            sum += term;
        }
        sum
    };
    let mut a = nu + 0.5;
    while j(a) * j(a + 0.05) > 0.0 {
        a += 0.05;
    }
    let mut b = a + 0.05;
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if j(a) * j(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

fn spectral_oracle() -> Outcome {
    let interval = ModelOperator::pure(qi(0), 0, PI, LinkGeometry::circle(0.0));
    let d = DiscretizeOptions { n_r: 512, modes: 0, grading: 2.0, form: RadialForm::Potential { c: 0.0 } };
    let h = model_heat_trace(&interval, &d, &[0.01], &HeatOptions { cutoff: Cutoff::One, ..Default::default() }).map_err(|e| e.to_string())?;
    let theta = 0.5 * (PI / 0.01f64).sqrt() - 0.5;
    let cone = ModelOperator::pure(qi(2), 1, 1.0, LinkGeometry::circle(2.0 * PI));
    let op = discretize_model(&cone, &DiscretizeOptions { n_r: 1024, modes: 1, ..d }).map_err(|e| e.to_string())?;
    let lam = op.blocks[1].matrix.eigenvalue(0, 1e-13);
    let z = bessel_zero(1.25f64.sqrt());
    let rel = (lam / (z * z) - 1.0).abs();
    check(
        (h.values[0] - theta).abs() < 1e-3 && rel < 5e-3,
        format!("trace {:.6} vs {theta:.6}; λ₁ = {lam:.5} vs j² = {:.5} ({:.3}%)", h.values[0], z * z, 100.0 * rel),
    )
}

fn fit_round_trip() -> Outcome {
    let t = geometric_times(1e-4, 1e-1, 60);
    let y: Vec<f64> = t.iter().map(|s| 1.0 / s + 2.0 * s.powf(-1.0 / 3.0) * s.ln()).collect();
    let lat = [
        LatticePoint { z: qi(-1), max_log: 0, weyl: true },
        LatticePoint { z: qi(0), max_log: 0, weyl: true },
        LatticePoint { z: q(-1, 3), max_log: 1, weyl: false },
    ];
    let f = fit_series(&t, &y, &lat, &FitOptions::default()).map_err(|e| e.to_string())?;
    let lead = f.term(qi(-1), 0).ok_or("leading term pruned")?;
    let log = f.term(q(-1, 3), 1).ok_or("log term pruned")?;
    let ce = (lead.coeff - 1.0).abs().max((log.coeff - 2.0).abs());
    let ee = (log.fitted_exponent + 1.0 / 3.0).abs();
    let hw = half_window_check(&t, &y, &f, &FitOptions::default()).map_err(|e| e.to_string())?;
    check(
        ce <= 1e-5 && ee <= 1e-3 && hw.exponent_change < 0.02 && hw.coeff_change < 0.02,
        format!("coefficient error {ce:.1e}, exponent error {ee:.1e}, half window Δe {:.1e} Δc {:.1e}", hw.exponent_change, hw.coeff_change),
    )
}

struct BrieskornFit {
    fit: ExpansionFit,
    area_term: f64,
    predicted: Vec<PredictedExponent>,
}

fn brieskorn_fit() -> Result<BrieskornFit, String> {
    let model = brieskorn_model(1.0);
    let eps = model.epsilon;
    let (tmin, tmax) = (5e-4 * eps * eps, 1e-2 * eps * eps);
    let modes = modes_for_window(tmin, model.link.length, 0.7 * eps, 3.0, 1e-11);
    let t = geometric_times(tmin, tmax, 60);
    let disc = DiscretizeOptions { n_r: 1024, modes, ..Default::default() };
    let h = model_heat_trace(&model, &disc, &t, &HeatOptions { levels: 3, ..Default::default() }).map_err(|e| e.to_string())?;
    let cutoff = h.cutoff;
    let area = model.link.length
        * cutoff.integrate(eps, |r| {
            let (w, s) = model.profile.eval(r);
            (w * s).sqrt()
        });
    let face = FaceExponents { alpha: model.alpha, shifts: vec![qi(1)] };
    let predicted = predicted_exponents(2, &[face], &PredictionOptions::default()).map_err(|e| e.to_string())?;
    let fit = fit_power_log(&h, &lattice(&predicted), &FitOptions::default()).map_err(|e| e.to_string())?;
    Ok(BrieskornFit { fit, area_term: area / (4.0 * PI), predicted })
}

fn singular_expansion(b: &Result<BrieskornFit, String>) -> Outcome {
    let b = b.as_ref().map_err(|e| e.clone())?;
    let lead = b.fit.term(qi(-1), 0).ok_or("no t^-1 term")?;
    let rel = (lead.coeff / b.area_term - 1.0).abs();
    // Leading non-Weyl term left after the t^{-1} and t^0 terms.
    let singular = b
        .fit
        .terms
        .iter()
        .filter(|k| !b.predicted.iter().any(|p| p.weyl && p.z == k.z))
        .min_by(|x, y| x.fitted_exponent.partial_cmp(&y.fitted_exponent).unwrap())
        .ok_or("no singular term survived")?;
    let dist = distance_to_lattice(&b.predicted, singular.fitted_exponent);
    check(
        rel < 0.05 && dist < 0.05,
        format!(
            "t^-1 coefficient {:.6} vs Area/4π {:.6} ({:.2}%), leading singular exponent {:.4} at distance {dist:.4}",
            lead.coeff,
            b.area_term,
            100.0 * rel,
            singular.fitted_exponent
        ),
    )
}

fn estimates() -> Outcome {
    let b = basic_estimate(3.0, 2.0 * PI, 1.0, &EstimateOptions::default()).map_err(|e| e.to_string())?;
    let lam: Vec<f64> = (0..13).map(|k| 10f64.powf(1.0 + 0.25 * k as f64)).collect();
    let mut parts = vec![format!("(c, B) = ({}, {})", b.c, b.b)];
    let mut ok = b.c > 0.0 && b.b <= 1e6;
    for (beta, d) in [(0, 0), (1, 0), (0, 1)] {
        let r = resolvent_decay(3.0, 1.0, 2.0, beta as f64, d, &lam, 384).map_err(|e| e.to_string())?;
        let want = q_to_f64(bound_exponent(qi(beta), d as i64, qi(3)).unwrap());
        ok &= (r.exponent - want).abs() < 0.1;
        parts.push(format!("({beta},{d}): {:.3} vs {want:.3}", r.exponent));
    }
    check(ok, parts.join(", "))
}

fn sal_algebra(b: &Result<BrieskornFit, String>) -> Outcome {
    let term = |z, i, c| PowerLogTerm { z, log_power: i, coeff: c };
    let s0 = MultiplicityFunction::from_pairs([(qi(0), 1)]);
    let mut ok = sal_projector_apply(&s0, Some(qi(1)), &[term(qi(0), 0, 5.0)]).is_empty();
    ok &= sal_projector_apply(&s0, Some(qi(2)), &[term(qi(1), 0, 3.0)]) == vec![term(qi(1), 0, 3.0)];
    ok &= euler_shift(qi(1), &[term(qi(1), 1, 1.0)]) == vec![term(qi(1), 0, 1.0)];
    let one = MultiplicityFunction::from_pairs([(qi(1), 1)]);
    let two = MultiplicityFunction::from_pairs([(qi(2), 1)]);
    ok &= sal_convolution_exponents(&one, &two) == MultiplicityFunction::from_pairs([(qi(1), 1), (qi(2), 1)]);
    ok &= sal_convolution_exponents(&one, &one).get(qi(1)) == 2;
    ok &= sal_convolution_exponents(&one, &MultiplicityFunction::new()) == one;
    if !ok {
        return Err("a listed projector or convolution example fails".into());
    }
    let b = b.as_ref().map_err(|e| e.clone())?;
    let expansion: Vec<PowerLogTerm> = b.fit.triples().into_iter().map(|(z, i, c)| term(z, i, c)).collect();
    let s = multiplicity_of(&expansion);
    let left = expansion_sup(&sal_projector_apply(&s, None, &expansion), &geometric_times(b.fit.window.0, b.fit.window.1, 50));
    check(left <= b.fit.residual, format!("examples hold; projected fitted expansion sup {left:.1e} <= fit residual {:.1e}", b.fit.residual))
}

fn main() {
    let brieskorn = brieskorn_fit();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 Newton diagram oracle", newton_oracle()),
        ("2 quasihomogeneity identities", quasihomogeneity()),
        ("3 Puiseux composition certificate", puiseux_composition()),
        ("4 Newton scheme benchmark", newton_scheme()),
        ("5 contraction telemetry", contraction()),
        ("6 metric benchmarks", metric_benchmarks()),
        ("7 spectral oracle", spectral_oracle()),
        ("8 power-log fit round trip", fit_round_trip()),
        ("9 singular expansion", singular_expansion(&brieskorn)),
        ("10 estimate surrogates", estimates()),
        ("11 SAL algebra", sal_algebra(&brieskorn)),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
