use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fs;
use std::thread;

use ahis_core::cone::{
    newton_solve_series, parametrization_residual, ChartOptions, Parametrization, ResidualGrid,
    SchemeOptions,
};
use ahis_core::metric::{
    link_length, model_operator, parametrization_metric, remove_cross_term, FlowOptions,
    LinkGeometry, MetricOptions, ModelOperator, ModelOptions,
};
use ahis_core::newton::{check_singular_germ, face_polynomial, newton_diagram, NewtonFace};
use ahis_core::poly::read_polynomial;
use ahis_core::rational::{format_q, q_to_f64, qi};
use ahis_core::spectral::{
    basic_estimate, fit_power_log, geometric_times, lattice, model_heat_trace, modes_for_window,
    predicted_exponents, DiscretizeOptions, EstimateOptions, ExpansionFit, FaceExponents,
    FitOptions, HeatOptions, PredictedExponent, PredictionOptions, RULE_VERSION,
};
use ahis_core::{Polynomial, Q};

use crate::config::AnalysisConfig;
use crate::report::{
    AnalysisReport, BranchRecord, Constants, CoordinateSeries, EtaTerm, ExponentRow, FaceRecord,
    HeatSummary, ModelSummary, ParametrizationSummary, SeriesTerm, StageStatus,
};
use crate::CliError;

/// Scaled window `t/ε²` on which the discretized model trace is trusted.
const TRUSTED_WINDOW: (f64, f64) = (5e-4, 1e-2);
const LINK_RAYS: usize = 4096;

/// Reads and validates the input, then runs the enabled stages on every
/// face of the Newton diagram. Stage failures end up in the report; only
/// configuration, parse and I/O problems are errors.
pub fn run_pipeline(config: &AnalysisConfig) -> Result<AnalysisReport, CliError> {
    config.validate()?;
    let text = fs::read_to_string(&config.input).map_err(|e| CliError::io(&config.input, e))?;
    let f = read_polynomial(&text, config.dim)?;
    let mut report = AnalysisReport {
        config: config.clone(),
        polynomial: f.to_string(),
        dim: f.dim(),
        diagram: StageStatus::ok(),
        faces: Vec::new(),
    };
    if !config.stages.diagram {
        report.diagram = StageStatus::disabled();
        return Ok(report);
    }
    let diagram = match check_singular_germ(&f).and_then(|_| newton_diagram(&f)) {
        Ok(d) => d,
        Err(e) => {
            report.diagram = StageStatus::failed(e);
            return Ok(report);
        }
    };
    report.faces = thread::scope(|s| {
        let handles: Vec<_> = diagram
            .faces
            .iter()
            .enumerate()
            .map(|(i, face)| {
                (i, face, {
                    let f = &f;
                    s.spawn(move || run_face(f, i + 1, face, config))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|(i, face, h)| {
                h.join().unwrap_or_else(|_| FaceRecord {
                    parametrize: StageStatus::failed("face worker panicked"),
                    ..face_header(&f, i + 1, face)
                })
            })
            .collect()
    });
    Ok(report)
}

fn face_header(f: &Polynomial, index: usize, face: &NewtonFace) -> FaceRecord {
    let split = face_polynomial(f, face);
    FaceRecord {
        index,
        weights: face.weight.sigma.iter().map(|q| format_q(*q)).collect(),
        weighted_degree: format_q(face.weight.weighted_degree),
        vertices: face.vertices.iter().map(|v| v.0.clone()).collect(),
        face_polynomial: split
            .as_ref()
            .map(|(g, _)| g.to_string())
            .unwrap_or_default(),
        quasihomogeneous: split.as_ref().is_ok_and(|(_, rest)| rest.is_zero()),
        parametrize: StageStatus::disabled(),
        branches: Vec::new(),
    }
}

fn run_face(
    f: &Polynomial,
    index: usize,
    face: &NewtonFace,
    config: &AnalysisConfig,
) -> FaceRecord {
    let mut rec = face_header(f, index, face);
    if let Err(e) = face_polynomial(f, face) {
        rec.parametrize = StageStatus::failed(format!("face {index}: {e}"));
        return rec;
    }
    if !config.stages.parametrize {
        return rec;
    }
    let opts = SchemeOptions {
        // Validated already.
        q_max: config.q_max_value().unwrap_or(qi(6)),
        chart: ChartOptions {
            epsilon: config.epsilon,
            delta: config.delta,
            ..Default::default()
        },
        ..Default::default()
    };
    match newton_solve_series(f, face, &opts) {
        Ok(params) => {
            rec.parametrize = StageStatus::ok();
            rec.branches = params
                .iter()
                .map(|p| run_branch(f, index, p, config))
                .collect();
        }
        Err(e) => rec.parametrize = StageStatus::failed(format!("face {index}: {e}")),
    }
    rec
}

fn run_branch(
    f: &Polynomial,
    face: usize,
    p: &Parametrization,
    config: &AnalysisConfig,
) -> BranchRecord {
    let mut parametrize = StageStatus::ok();
    let mut coordinates = Vec::with_capacity(p.dim());
    for k in 0..p.dim() {
        match p.coordinate_series(k) {
            Ok(s) => coordinates.push(CoordinateSeries {
                index: k + 1,
                terms: s
                    .terms()
                    .map(|(q, c)| SeriesTerm {
                        exponent: format_q(*q),
                        coefficients: c
                            .terms()
                            .map(|(e, v)| EtaTerm {
                                powers: e.clone(),
                                coeff: *v,
                            })
                            .collect(),
                    })
                    .collect(),
            }),
            Err(e) => parametrize = StageStatus::failed(format!("face {face}, x{}: {e}", k + 1)),
        }
    }
    let residual = parametrization_residual(p, f, &ResidualGrid::default());
    if let Err(e) = &residual {
        parametrize = StageStatus::failed(format!("face {face}: residual: {e}"));
    }
    let mut rec = BranchRecord {
        face,
        branch: p.branch.clone(),
        nu: p.nu.iter().map(|q| format_q(*q)).collect(),
        parametrize,
        parametrization: ParametrizationSummary {
            coordinates,
            perturbation_order: p.perturbation_order.map(format_q),
            in_nu_lattice: p.in_nu_lattice,
            iterations: p.contraction.iterations,
            chart_epsilon: p.contraction.epsilon,
            residual_max: residual.as_ref().ok().map(|r| r.max),
            residual_decay: residual.as_ref().ok().and_then(|r| r.decay_exponent),
            residual_certificate: p.residual_certificate,
        },
        metric: StageStatus::disabled(),
        model: None,
        heat: StageStatus::disabled(),
        spectral: None,
        constants: Constants {
            contraction_factor: p.contraction.factor,
            ..Default::default()
        },
    };
    if rec.parametrize.is_failed() {
        rec.metric = StageStatus::skipped("parametrization failed");
        rec.heat = StageStatus::skipped("parametrization failed");
        return rec;
    }
    if !config.stages.metric {
        return rec;
    }
    let model = match metric_stage(p, &mut rec) {
        Ok(m) => m,
        Err(e) => {
            rec.metric = StageStatus::failed(format!("face {face}: {e}"));
            rec.heat = StageStatus::skipped("metric stage failed");
            return rec;
        }
    };
    rec.metric = StageStatus::ok();
    if !config.stages.heat {
        return rec;
    }
    if model.k == 0 || model.alpha <= qi(0) {
        rec.heat = StageStatus::skipped("link has no angular directions");
        return rec;
    }
    rec.heat = heat_stage(f.dim() - 1, p, &model, config, &mut rec)
        .unwrap_or_else(|e| StageStatus::failed(format!("face {face}: {e}")));
    rec
}

fn metric_stage(p: &Parametrization, rec: &mut BranchRecord) -> ahis_core::Result<ModelOperator> {
    if p.dim() > 3 {
        return Err(ahis_core::Error::Other(format!(
            "link geometry is implemented for surfaces only, input has {} variables",
            p.dim()
        )));
    }
    let m = parametrization_metric(p, &MetricOptions::default())?;
    let n = remove_cross_term(
        &m,
        &FlowOptions {
            r_min_ratio: 1e-6,
            samples: 128,
            ..Default::default()
        },
    )?;
    rec.constants.lyapunov_exponent = n.lyapunov_exponent;
    let link = match p.dim() {
        2 => LinkGeometry::circle(0.0),
        _ => link_length(
            &p.chart.face_poly,
            &p.nu,
            p.chart.solved_indices.0,
            p.chart.sign as i32,
            LINK_RAYS,
        )?,
    };
    let model = model_operator(&n, &p.nu, link, &ModelOptions::default())?;
    rec.constants.potential_bound = Some(model.potential_bound);
    rec.model = Some(ModelSummary {
        omega_min: m.omega_min,
        cross_term_residual: n.cross_term_residual,
        integration_error: n.integration_error,
        alpha: format_q(model.alpha),
        alpha_fitted: model.alpha_fitted,
        k: model.k,
        epsilon: model.epsilon,
        link_length: model.link.length,
        frozen_laplacian_error: model.frozen_laplacian_error,
        profile: model.profile.clone(),
    });
    Ok(model)
}

/// Radial shifts of the metric: `2ν_k - 2` and the exponents of `χ`.
fn radial_shifts(p: &Parametrization) -> Vec<Q> {
    let mut out = BTreeSet::new();
    for v in &p.nu {
        out.insert(qi(2) * *v - qi(2));
    }
    for c in &p.chi {
        out.extend(c.exponents());
    }
    out.into_iter().filter(|q| *q > qi(0)).collect()
}

fn heat_stage(
    n: usize,
    p: &Parametrization,
    model: &ModelOperator,
    config: &AnalysisConfig,
    rec: &mut BranchRecord,
) -> ahis_core::Result<StageStatus> {
    let eps = model.epsilon;
    let alpha = q_to_f64(model.alpha);
    let link = model.link.length;
    rec.constants.basic_estimate = basic_estimate(
        alpha,
        link,
        eps,
        &EstimateOptions {
            seed: config.seed,
            ..Default::default()
        },
    )
    .ok();

    let w = config.t_window;
    let lo = w.start.max(TRUSTED_WINDOW.0) * eps * eps;
    let hi = w.end.min(TRUSTED_WINDOW.1) * eps * eps;
    if lo >= hi {
        return Ok(StageStatus::failed(format!(
            "insufficient window: {}:{} does not meet the trusted range {}:{}",
            w.start, w.end, TRUSTED_WINDOW.0, TRUSTED_WINDOW.1
        )));
    }
    let modes = config
        .modes
        .max(modes_for_window(lo, link, 0.7 * eps, alpha, 1e-11));
    let disc = DiscretizeOptions {
        n_r: config.n_r,
        modes,
        ..Default::default()
    };
    let t = geometric_times(lo, hi, w.count);
    let samples = model_heat_trace(
        model,
        &disc,
        &t,
        &HeatOptions {
            levels: config.levels,
            ..Default::default()
        },
    )?;
    let area = link
        * samples.cutoff.integrate(eps, |r| {
            let (om, s) = model.profile.eval(r);
            (om * s).sqrt()
        });
    let face = FaceExponents {
        alpha: model.alpha,
        shifts: radial_shifts(p),
    };
    let predicted = predicted_exponents(n as u32, &[face], &PredictionOptions::default())?;
    let fit_opts = FitOptions {
        max_condition: config.max_condition,
        prune_sigmas: config.prune_sigmas,
        refine: true,
    };
    let fit = fit_power_log(&samples, &lattice(&predicted), &fit_opts);
    let mut summary = HeatSummary {
        window: (lo, hi),
        n_r: config.n_r,
        modes,
        levels: config.levels,
        rule_version: RULE_VERSION,
        area_term: area / (4.0 * PI),
        samples,
        fit: None,
        exponents: exponent_table(&predicted, None),
    };
    let status = match fit {
        Ok(fit) => {
            summary.exponents = exponent_table(&predicted, Some(&fit));
            summary.fit = Some(fit);
            StageStatus::ok()
        }
        Err(e) => StageStatus::failed(format!("fit: {e}")),
    };
    rec.spectral = Some(summary);
    Ok(status)
}

/// One row per predicted exponent and log power, joined with the surviving
/// fit term of the same label.
pub fn exponent_table(
    predicted: &[PredictedExponent],
    fit: Option<&ExpansionFit>,
) -> Vec<ExponentRow> {
    let mut rows = Vec::new();
    for p in predicted {
        let z = q_to_f64(p.z);
        for log_power in 0..=p.log_power {
            let fitted = fit
                .and_then(|f| f.term(p.z, log_power))
                .map(|t| t.fitted_exponent);
            rows.push(ExponentRow {
                predicted: format_q(p.z),
                predicted_value: z,
                fitted,
                abs_delta: fitted.map(|x| (x - z).abs()),
                log_power,
                weyl: p.weyl,
            });
        }
    }
    rows
}
