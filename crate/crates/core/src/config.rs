//! Experiment configuration.
//!
//! Configs are strict JSON: unknown keys are rejected, and every default is
//! filled in explicitly by [`ExperimentConfig::resolved`] so the manifest
//! records the effective parameters of a run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplacian::BoundaryCondition;
use crate::lattice::LatticeBox;
use crate::spectral::GridSpec;
use crate::tails::{default_radius, TailWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Ids,
    Verify,
    Tails,
    Decay,
    #[default]
    All,
}

impl Task {
    pub fn includes(self, other: Task) -> bool {
        self == other || self == Task::All
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Task::Ids => "ids",
            Task::Verify => "verify",
            Task::Tails => "tails",
            Task::Decay => "decay",
            Task::All => "all",
        };
        f.write_str(s)
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| Error::Config(format!("unknown task '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailMode {
    /// Exact d = 1 series.
    #[default]
    Analytic,
    /// Pooled Monte Carlo spectra of the configured ensemble.
    Empirical,
}

/// Tail fit mode and window of distances from the spectral edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    #[serde(default)]
    pub mode: TailMode,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for TailSpec {
    fn default() -> Self {
        TailSpec::new(TailMode::default(), TailWindow::default())
    }
}

impl TailSpec {
    pub fn new(mode: TailMode, window: TailWindow) -> Self {
        TailSpec {
            mode,
            lo: window.lo,
            hi: window.hi,
            points: window.points,
        }
    }

    pub fn window(&self) -> TailWindow {
        TailWindow {
            lo: self.lo,
            hi: self.hi,
            points: self.points,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    pub samples: usize,
    /// Half-width of the growth box; dimension dependent when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
}

impl Default for DecaySpec {
    fn default() -> Self {
        DecaySpec {
            samples: 100_000,
            radius: None,
        }
    }
}

fn one() -> usize {
    1
}

fn all_bcs() -> Vec<BoundaryCondition> {
    BoundaryCondition::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "d")]
    pub dim: usize,
    #[serde(rename = "L")]
    pub side: usize,
    pub p: f64,
    #[serde(default = "one")]
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "all_bcs")]
    pub bcs: Vec<BoundaryCondition>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tail: TailSpec,
    #[serde(default)]
    pub decay: DecaySpec,
    #[serde(default)]
    pub task: Task,
    /// Enforce p ≤ 0.45 (d = 2) and p ≤ 0.2 (d = 3).
    #[serde(default)]
    pub subcritical: bool,
    #[serde(default)]
    pub emit_graph: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

/// Caps applied to runs labelled subcritical.
pub fn subcritical_cap(dim: usize) -> Option<f64> {
    match dim {
        2 => Some(0.45),
        3 => Some(0.2),
        _ => None,
    }
}

impl ExperimentConfig {
    pub fn new(dim: usize, side: usize, p: f64, task: Task) -> Self {
        ExperimentConfig {
            dim,
            side,
            p,
            realizations: 1,
            seed: 0,
            bcs: all_bcs(),
            grid: GridSpec::default(),
            tail: TailSpec::default(),
            decay: DecaySpec::default(),
            task,
            subcritical: false,
            emit_graph: false,
            out_dir: None,
        }
    }

    /// Every violated constraint, in a fixed order.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(1..=3).contains(&self.dim) {
            v.push(format!("d must be in 1..=3, got {}", self.dim));
        }
        if self.side < 2 {
            v.push(format!("L must be at least 2, got {}", self.side));
        }
        if (1..=3).contains(&self.dim) && self.side >= 2 {
            if let Err(e) = LatticeBox::new(self.dim, self.side) {
                v.push(e.to_string());
            }
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            v.push(format!("p must lie in (0, 1), got {}", self.p));
        }
        if self.realizations < 1 {
            v.push("realizations must be at least 1".into());
        }
        if self.bcs.is_empty() {
            v.push("bcs must name at least one boundary condition".into());
        }
        let mut seen = self.bcs.clone();
        seen.sort_by_key(|b| b.tag());
        seen.dedup();
        if seen.len() != self.bcs.len() {
            v.push("bcs must not repeat".into());
        }
        if self.grid.points < 2 {
            v.push(format!(
                "grid.points must be at least 2, got {}",
                self.grid.points
            ));
        }
        if self.grid.refine > 52 {
            v.push(format!(
                "grid.refine must be at most 52, got {}",
                self.grid.refine
            ));
        }
        if self.subcritical {
            if let Some(cap) = subcritical_cap(self.dim) {
                if self.p > cap {
                    v.push(format!(
                        "subcritical run needs p <= {cap} in d = {}",
                        self.dim
                    ));
                }
            }
        }
        if self.task.includes(Task::Tails) {
            if (1..=3).contains(&self.dim) {
                if let Err(e) = self.tail.window().validate(self.dim) {
                    v.push(e.to_string());
                }
            }
            if self.tail.mode == TailMode::Analytic && self.dim != 1 {
                v.push("analytic tail mode is only available for d = 1".into());
            }
        }
        if self.task.includes(Task::Decay) {
            let ok = match self.dim {
                1 => true,
                2 => self.p < 0.4,
                3 => self.p < 0.2,
                _ => true,
            };
            if !ok {
                v.push(format!(
                    "decay needs p < 0.4 in d = 2 and p < 0.2 in d = 3, got p = {}",
                    self.p
                ));
            }
            if self.decay.samples < 1 {
                v.push("decay.samples must be at least 1".into());
            }
            if self.decay.radius == Some(0) {
                v.push("decay.radius must be positive".into());
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }

    /// Copy with every optional parameter made explicit.
    pub fn resolved(&self) -> ExperimentConfig {
        let mut c = self.clone();
        if c.decay.radius.is_none() && (1..=3).contains(&c.dim) {
            c.decay.radius = Some(default_radius(c.dim));
        }
        c
    }

    pub fn lattice(&self) -> Result<LatticeBox> {
        LatticeBox::new(self.dim, self.side)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Parses and validates a config from JSON text.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Strict parse without range validation, for callers that override
/// fields before validating.
pub fn read_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let config = read_config(path)?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config_str(r#"{"d": 1, "L": 1000, "p": 0.3, "task": "ids"}"#).unwrap();
        assert_eq!(c.realizations, 1);
        assert_eq!(c.grid, GridSpec::default());
        assert_eq!(c.bcs, BoundaryCondition::ALL.to_vec());
        assert_eq!(c.task, Task::Ids);
        assert_eq!(c.resolved().decay.radius, Some(default_radius(1)));
    }

    #[test]
    fn out_of_range_p_rejected() {
        let err = parse_config_str(r#"{"d": 1, "L": 1000, "p": 1.2, "task": "ids"}"#);
        assert!(matches!(err, Err(Error::Config(m)) if m.contains("p must lie")));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse_config_str(r#"{"d": 1, "L": 10, "p": 0.3, "colour": 1}"#).is_err());
        assert!(parse_config_str(
            r#"{"d": 1, "L": 10, "p": 0.3, "grid": {"points": 8, "refine": 1, "x": 0}}"#
        )
        .is_err());
    }

    #[test]
    fn every_violation_listed() {
        let c = ExperimentConfig {
            realizations: 0,
            ..ExperimentConfig::new(5, 1, -1.0, Task::Ids)
        };
        let v = c.violations();
        assert_eq!(v.len(), 4, "{v:?}");
    }

    #[test]
    fn full_round_trip() {
        let mut c = ExperimentConfig::new(2, 12, 0.3, Task::Verify);
        c.realizations = 100;
        c.seed = 77;
        c.bcs = vec![BoundaryCondition::Neumann, BoundaryCondition::Dirichlet];
        c.grid = GridSpec {
            points: 128,
            refine: 4,
        };
        c.tail = TailSpec::new(
            TailMode::Empirical,
            TailWindow {
                lo: 1e-3,
                hi: 0.5,
                points: 16,
            },
        );
        c.decay = DecaySpec {
            samples: 10,
            radius: Some(9),
        };
        c.subcritical = true;
        c.emit_graph = true;
        c.out_dir = Some("out".into());
        let back = parse_config_str(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn subcritical_caps() {
        let mut c = ExperimentConfig::new(3, 8, 0.3, Task::Verify);
        assert!(c.validate().is_ok());
        c.subcritical = true;
        assert!(c.validate().is_err());
        c.p = 0.2;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn analytic_tails_need_d1() {
        let c = ExperimentConfig::new(2, 8, 0.3, Task::Tails);
        assert!(c.validate().is_err());
        let c = ExperimentConfig::new(1, 8, 0.3, Task::Tails);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn task_names() {
        for t in [Task::Ids, Task::Verify, Task::Tails, Task::Decay, Task::All] {
            assert_eq!(t.to_string().parse::<Task>().unwrap(), t);
        }
        assert!("nope".parse::<Task>().is_err());
    }
}
