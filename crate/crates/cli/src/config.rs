use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// `start:end:count`, geometric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl FromStr for TimeWindow {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("expected start:end:count, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        let count = n
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("{n:?}: {e}"))?;
        Ok(Self {
            start: num(a)?,
            end: num(b)?,
            count,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stages {
    pub diagram: bool,
    pub parametrize: bool,
    pub metric: bool,
    pub heat: bool,
}

impl Stages {
    pub const ALL: Stages = Stages {
        diagram: true,
        parametrize: true,
        metric: true,
        heat: true,
    };

    /// Every stage up to and including `last` (1 = diagram … 4 = heat).
    pub fn up_to(last: u8) -> Self {
        Stages {
            diagram: last >= 1,
            parametrize: last >= 2,
            metric: last >= 3,
            heat: last >= 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub input: PathBuf,
    /// Number of variables for text input; inferred when absent.
    pub dim: Option<usize>,
    pub epsilon: f64,
    pub delta: f64,
    /// Truncation order of the parametrization, `p/q` or an integer.
    pub q_max: String,
    pub n_r: usize,
    /// Lower bound on the angular modes; more are added when the window needs them.
    pub modes: usize,
    /// Heat-trace window in units of `ε²` of the model.
    pub t_window: TimeWindow,
    pub levels: usize,
    pub max_condition: f64,
    pub prune_sigmas: f64,
    pub seed: u64,
    pub stages: Stages,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            dim: None,
            epsilon: 0.1,
            delta: 0.5,
            q_max: "6".into(),
            n_r: 512,
            modes: 32,
            t_window: TimeWindow {
                start: 1e-4,
                end: 1e-1,
                count: 48,
            },
            levels: 2,
            max_condition: 1e12,
            prune_sigmas: 3.0,
            seed: 7,
            stages: Stages::ALL,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("max condition", self.max_condition),
            ("prune sigmas", self.prune_sigmas),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        let w = self.t_window;
        if !(w.start > 0.0 && w.start < w.end && w.end <= 1.0) {
            return bad(format!(
                "t-window {}:{} must satisfy 0 < start < end <= 1",
                w.start, w.end
            ));
        }
        if w.count < 2 {
            return bad("t-window needs at least two samples".into());
        }
        if self.n_r < 64 {
            return bad(format!("N_r = {} is below 64", self.n_r));
        }
        if self.levels == 0 {
            return bad("levels must be at least 1".into());
        }
        self.q_max_value()?;
        Ok(())
    }

    pub fn q_max_value(&self) -> Result<ahis_core::Q, CliError> {
        ahis_core::rational::parse_q(&self.q_max)
            .filter(|q| *q > ahis_core::rational::qi(0))
            .ok_or_else(|| {
                CliError::Config(format!("q-max {:?} is not a positive rational", self.q_max))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_parses() {
        let w: TimeWindow = "1e-4:1e-1:48".parse().unwrap();
        assert_eq!(
            w,
            TimeWindow {
                start: 1e-4,
                end: 1e-1,
                count: 48
            }
        );
        assert!("1:2".parse::<TimeWindow>().is_err());
    }

    #[test]
    fn validation() {
        assert!(AnalysisConfig::default().validate().is_ok());
        let c = AnalysisConfig {
            t_window: TimeWindow {
                start: 0.1,
                end: 2.0,
                count: 10,
            },
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = AnalysisConfig {
            epsilon: -1.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = AnalysisConfig {
            q_max: "x".into(),
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
