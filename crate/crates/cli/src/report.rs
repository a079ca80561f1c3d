use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ahis_core::metric::RadialProfile;
use ahis_core::spectral::{BasicEstimate, ExpansionFit, HeatTraceSamples};
use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
    Skipped,
    Disabled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStatus {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl StageStatus {
    pub fn ok() -> Self {
        Self {
            status: Status::Ok,
            detail: None,
        }
    }

    pub fn failed(detail: impl ToString) -> Self {
        Self {
            status: Status::Failed,
            detail: Some(detail.to_string()),
        }
    }

    pub fn skipped(reason: impl ToString) -> Self {
        Self {
            status: Status::Skipped,
            detail: Some(reason.to_string()),
        }
    }

    pub fn disabled() -> Self {
        Self {
            status: Status::Disabled,
            detail: None,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.status == Status::Failed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub config: AnalysisConfig,
    pub polynomial: String,
    pub dim: usize,
    pub diagram: StageStatus,
    pub faces: Vec<FaceRecord>,
}

impl AnalysisReport {
    pub fn failed(&self) -> bool {
        self.diagram.is_failed()
            || self.faces.iter().any(|f| {
                f.parametrize.is_failed()
                    || f.branches.iter().any(|b| {
                        b.parametrize.is_failed() || b.metric.is_failed() || b.heat.is_failed()
                    })
            })
    }

    /// Every branch with its face index.
    pub fn branches(&self) -> impl Iterator<Item = &BranchRecord> {
        self.faces.iter().flat_map(|f| f.branches.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceRecord {
    /// 1-based position in the Newton diagram.
    pub index: usize,
    pub weights: Vec<String>,
    pub weighted_degree: String,
    pub vertices: Vec<Vec<u32>>,
    pub face_polynomial: String,
    /// The part of `f` off the face vanishes.
    pub quasihomogeneous: bool,
    pub parametrize: StageStatus,
    pub branches: Vec<BranchRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub face: usize,
    pub branch: String,
    pub nu: Vec<String>,
    pub parametrize: StageStatus,
    pub parametrization: ParametrizationSummary,
    pub metric: StageStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSummary>,
    pub heat: StageStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<HeatSummary>,
    pub constants: Constants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametrizationSummary {
    /// `x_k = Σ r^q c_q(η)`, one entry per ambient coordinate.
    pub coordinates: Vec<CoordinateSeries>,
    pub perturbation_order: Option<String>,
    pub in_nu_lattice: bool,
    pub iterations: usize,
    pub chart_epsilon: f64,
    pub residual_max: Option<f64>,
    pub residual_decay: Option<f64>,
    pub residual_certificate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateSeries {
    pub index: usize,
    pub terms: Vec<SeriesTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub exponent: String,
    pub coefficients: Vec<EtaTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaTerm {
    pub powers: Vec<u32>,
    pub coeff: f64,
}

impl SeriesTerm {
    /// Coefficient of `η⁰`.
    pub fn constant(&self) -> f64 {
        self.coefficients
            .iter()
            .find(|t| t.powers.iter().all(|&p| p == 0))
            .map_or(0.0, |t| t.coeff)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub omega_min: f64,
    pub cross_term_residual: f64,
    pub integration_error: f64,
    pub alpha: String,
    pub alpha_fitted: f64,
    pub k: usize,
    pub epsilon: f64,
    pub link_length: f64,
    pub frozen_laplacian_error: f64,
    pub profile: RadialProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatSummary {
    /// Window actually sampled, in `t`.
    pub window: (f64, f64),
    pub n_r: usize,
    pub modes: usize,
    pub levels: usize,
    pub rule_version: u32,
    /// `Area / 4π` of the cut-off model, the expected `t^{-1}` coefficient.
    pub area_term: f64,
    pub samples: HeatTraceSamples,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<ExpansionFit>,
    pub exponents: Vec<ExponentRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow {
    pub predicted: String,
    pub predicted_value: f64,
    pub fitted: Option<f64>,
    pub abs_delta: Option<f64>,
    pub log_power: u32,
    pub weyl: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub contraction_factor: f64,
    pub lyapunov_exponent: Option<f64>,
    pub potential_bound: Option<f64>,
    pub basic_estimate: Option<BasicEstimate>,
}

pub fn emit_json(report: &AnalysisReport, path: &Path) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    fs::write(path, s).map_err(|e| CliError::io(path, e))
}

pub fn exponent_csv(rows: &[ExponentRow]) -> String {
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut s = String::from("predicted,fitted,abs_delta,log_power\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.predicted,
            opt(r.fitted),
            opt(r.abs_delta),
            r.log_power
        );
    }
    s
}

fn profile_csv(p: &RadialProfile) -> String {
    let mut s = String::from("r,omega,sigma\n");
    for i in 0..p.r.len() {
        let _ = writeln!(s, "{},{},{}", p.r[i], p.omega[i], p.sigma[i]);
    }
    s
}

/// Writes the plot data of every branch into `dir`; returns the files written.
///
/// Per branch `f{face}_b{branch}`: `_exponents.csv`, `_heat.csv`, `_fit.csv`
/// and `_profile.csv`, each when the data exists.
pub fn emit_csv(report: &AnalysisReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<(), CliError> {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    for face in &report.faces {
        for (b, br) in face.branches.iter().enumerate() {
            let stem = format!("f{}_b{}", face.index, b + 1);
            if let Some(m) = &br.model {
                put(format!("{stem}_profile.csv"), profile_csv(&m.profile))?;
            }
            if let Some(h) = &br.spectral {
                put(format!("{stem}_heat.csv"), h.samples.to_csv())?;
                put(format!("{stem}_exponents.csv"), exponent_csv(&h.exponents))?;
                if let Some(fit) = &h.fit {
                    put(format!("{stem}_fit.csv"), fit.to_csv())?;
                }
            }
        }
    }
    Ok(written)
}
