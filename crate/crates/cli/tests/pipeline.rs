use std::fs;
use std::path::Path;

use ahis_cli::report::exponent_csv;
use ahis_cli::{
    emit_csv, emit_json, exit_code, run_pipeline, AnalysisConfig, AnalysisReport, Stages, Status,
    TimeWindow,
};
use tempfile::TempDir;

fn config(dir: &Path, poly: &str, stages: Stages) -> AnalysisConfig {
    let input = dir.join("f.txt");
    fs::write(&input, poly).unwrap();
    AnalysisConfig {
        input,
        n_r: 256,
        stages,
        ..Default::default()
    }
}

fn run(poly: &str, stages: Stages) -> AnalysisReport {
    let dir = TempDir::new().unwrap();
    run_pipeline(&config(dir.path(), poly, stages)).unwrap()
}

/// `binom(1/2, k)`.
fn half_binomial(k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (0.5 - i as f64) / (i as f64 + 1.0))
}

#[test]
fn cusp_branch_matches_binomial_series() {
    let r = run("x1^2 - x2^3 - x2^4", Stages::up_to(2));
    assert_eq!(r.faces.len(), 1);
    let face = &r.faces[0];
    assert_eq!(face.index, 1);
    assert!(!face.quasihomogeneous);
    let upper = face
        .branches
        .iter()
        .find(|b| b.parametrization.coordinates[0].terms[0].constant() > 0.0)
        .expect("branch with x1 > 0");
    assert_eq!(upper.nu, vec!["3/2", "1"]);
    // x1 = y^{3/2} (1 + y)^{1/2} with y = x2 = r.
    let terms = &upper.parametrization.coordinates[0].terms;
    for (k, want_exp) in ["3/2", "5/2", "7/2", "9/2"].iter().enumerate() {
        assert_eq!(terms[k].exponent, *want_exp);
        assert!(
            (terms[k].constant() - half_binomial(k as u32)).abs() < 1e-8,
            "term {k}: {}",
            terms[k].constant()
        );
    }
    let x2 = &upper.parametrization.coordinates[1].terms;
    assert_eq!(x2.len(), 1);
    assert_eq!((x2[0].exponent.as_str(), x2[0].constant()), ("1", 1.0));
    assert_eq!(upper.metric.status, Status::Disabled);
    assert_eq!(exit_code(&r), 0);
}

#[test]
fn quasihomogeneous_input_has_no_perturbation() {
    let r = run("x1^2 + x2^2 - x3^3", Stages::up_to(2));
    let face = &r.faces[0];
    assert!(face.quasihomogeneous);
    assert_eq!(face.weights, vec!["3", "3", "2"]);
    assert!(!face.branches.is_empty());
    for b in &face.branches {
        assert_eq!(b.parametrization.perturbation_order, None);
        assert!(b.parametrization.residual_max.unwrap() < 1e-12);
    }
}

#[test]
fn smooth_input_is_rejected_by_the_diagram_stage() {
    let r = run("x1 + x2^2", Stages::ALL);
    assert_eq!(r.diagram.status, Status::Failed);
    assert!(r
        .diagram
        .detail
        .as_deref()
        .unwrap()
        .contains("not a singular germ"));
    assert!(r.faces.is_empty());
    assert_eq!(exit_code(&r), 3);
}

#[test]
fn faces_are_indexed_in_diagram_order() {
    let r = run("x1^4 - x1^2*x2^2 + x2^6", Stages::up_to(2));
    let idx: Vec<usize> = r.faces.iter().map(|f| f.index).collect();
    assert_eq!(idx, vec![1, 2]);
    // Each face contains a coordinate axis, which the chart construction refuses.
    for f in &r.faces {
        assert_eq!(f.parametrize.status, Status::Failed);
        assert!(f
            .parametrize
            .detail
            .as_deref()
            .unwrap()
            .starts_with(&format!("face {}:", f.index)));
    }
}

#[test]
fn full_report_round_trips_through_json_and_csv() {
    let dir = TempDir::new().unwrap();
    let r = run_pipeline(&config(dir.path(), "x1^2 + x2^2 - x3^3", Stages::ALL)).unwrap();
    assert!(
        !r.failed(),
        "{:#?}",
        r.branches().map(|b| &b.heat).collect::<Vec<_>>()
    );
    let b = &r.faces[0].branches[0];
    let model = b.model.as_ref().unwrap();
    assert_eq!((model.alpha.as_str(), model.k), ("3", 1));
    let heat = b.spectral.as_ref().unwrap();
    let fit = heat.fit.as_ref().unwrap();
    let lead = fit
        .terms
        .iter()
        .find(|t| t.z == ahis_core::rational::qi(-1))
        .unwrap();
    assert!((lead.coeff / heat.area_term - 1.0).abs() < 0.05);
    assert!(b.constants.basic_estimate.as_ref().unwrap().c > 0.0);

    let path = dir.path().join("report.json");
    emit_json(&r, &path).unwrap();
    let back: AnalysisReport = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, r);

    let files = emit_csv(&r, &dir.path().join("csv")).unwrap();
    let table = files
        .iter()
        .find(|p| p.ends_with("f1_b1_exponents.csv"))
        .unwrap();
    let text = fs::read_to_string(table).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("predicted,fitted,abs_delta,log_power"));
    assert_eq!(lines.count(), heat.exponents.len());
    assert_eq!(text, exponent_csv(&heat.exponents));
    assert!(files.iter().any(|p| p.ends_with("f1_b1_heat.csv")));
}

#[test]
fn disabling_the_spectral_stage_leaves_upstream_untouched() {
    let dir = TempDir::new().unwrap();
    let full = run_pipeline(&config(dir.path(), "x1^2 + x2^2 - x3^3", Stages::ALL)).unwrap();
    let upstream =
        run_pipeline(&config(dir.path(), "x1^2 + x2^2 - x3^3", Stages::up_to(3))).unwrap();
    assert_eq!(full.faces.len(), upstream.faces.len());
    for (a, b) in full.branches().zip(upstream.branches()) {
        assert_eq!(a.parametrization, b.parametrization);
        assert_eq!(a.model, b.model);
        assert_eq!(
            (a.parametrize.clone(), a.metric.clone()),
            (b.parametrize.clone(), b.metric.clone())
        );
        assert_eq!(
            a.constants.contraction_factor,
            b.constants.contraction_factor
        );
        assert_eq!(a.constants.lyapunov_exponent, b.constants.lyapunov_exponent);
        assert_eq!(a.constants.potential_bound, b.constants.potential_bound);
        assert_eq!(b.heat.status, Status::Disabled);
        assert!(b.spectral.is_none());
    }
}

#[test]
fn window_outside_the_trusted_range_fails_the_heat_stage() {
    let dir = TempDir::new().unwrap();
    let cfg = AnalysisConfig {
        t_window: TimeWindow {
            start: 0.05,
            end: 0.1,
            count: 8,
        },
        ..config(dir.path(), "x1^2 + x2^2 - x3^3", Stages::ALL)
    };
    let r = run_pipeline(&cfg).unwrap();
    for b in r.branches() {
        assert_eq!(b.metric.status, Status::Ok);
        assert_eq!(b.heat.status, Status::Failed);
        assert!(b
            .heat
            .detail
            .as_deref()
            .unwrap()
            .contains("insufficient window"));
    }
    assert_eq!(exit_code(&r), 3);
}

#[test]
fn invalid_configuration_is_an_error() {
    let dir = TempDir::new().unwrap();
    let cfg = AnalysisConfig {
        epsilon: 0.0,
        ..config(dir.path(), "x1^2 - x2^3", Stages::ALL)
    };
    assert_eq!(run_pipeline(&cfg).unwrap_err().exit_code(), 2);
    let cfg = AnalysisConfig {
        input: dir.path().join("missing.txt"),
        ..Default::default()
    };
    assert_eq!(run_pipeline(&cfg).unwrap_err().exit_code(), 4);
}
