//! JSON experiment files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use voter_core::exact::ExactCaps;
use voter_core::ode::Method;
use voter_core::strategy::DEFAULT_SCHEDULE_CAP;
use voter_core::{BehaviorKind, BehaviorSpec, InfluenceSpec, Scenario, SimConfig, Strategy};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Ode,
    Compare,
    Crossover,
    Bruteforce,
    Concentration,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Ode => "ode",
            ExperimentKind::Compare => "compare",
            ExperimentKind::Crossover => "crossover",
            ExperimentKind::Bruteforce => "bruteforce",
            ExperimentKind::Concentration => "concentration",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorConfig {
    pub kind: BehaviorKind,
    pub p: f64,
    pub q: f64,
    /// `lambda` for `hybrid_sc`, `mu` for `hybrid_cr`.
    #[serde(default)]
    pub mix: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfluenceConfig {
    pub p_tilde: f64,
    pub q_tilde: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Lambda,
    Mu,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::Mu => "mu",
        }
    }

    pub fn behavior_kind(self) -> BehaviorKind {
        match self {
            SweepAxis::Lambda => BehaviorKind::HybridSC,
            SweepAxis::Mu => BehaviorKind::HybridCR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapsConfig {
    /// Largest chain state space `M + 1` for exact propagation.
    pub max_states: u32,
    pub max_horizon: usize,
    pub max_schedules: u64,
}

impl Default for CapsConfig {
    fn default() -> Self {
        let exact = ExactCaps::default();
        Self {
            max_states: exact.max_population + 1,
            max_horizon: exact.max_horizon,
            max_schedules: DEFAULT_SCHEDULE_CAP,
        }
    }
}

impl CapsConfig {
    pub fn exact(&self) -> ExactCaps {
        ExactCaps {
            max_population: self.max_states.saturating_sub(1),
            max_horizon: self.max_horizon,
        }
    }
}

fn default_strategy() -> Strategy {
    Strategy::Last
}

fn default_reps() -> usize {
    100
}

fn default_stride() -> usize {
    1
}

fn default_epsilons() -> Vec<f64> {
    vec![0.1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Must match the subcommand when given.
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    pub population: u32,
    pub horizon: usize,
    /// Influenced slot count; exclusive with `budget_fraction`.
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub budget_fraction: Option<f64>,
    pub behavior: BehaviorConfig,
    pub influence: InfluenceConfig,
    pub delta0: f64,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    /// Engine for `compare`; the mean-field default is the closed form for
    /// Model I and numerical integration otherwise.
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default = "default_reps")]
    pub n_reps: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub type_sampling: bool,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub caps: CapsConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Finite, within [0, 1] and strictly increasing.
pub fn validate_grid(grid: &[f64]) -> CliResult<()> {
    if grid.is_empty() {
        return Err(invalid("sweep grid is empty"));
    }
    if let Some(bad) = grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(invalid(format!("sweep value {bad} outside [0, 1]")));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(invalid(format!(
            "sweep grid must be strictly increasing, found {} then {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.n_reps == 0 {
            return Err(invalid("n_reps must be at least 1"));
        }
        if self.record_stride == 0 {
            return Err(invalid("record_stride must be at least 1"));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(invalid(format!("epsilon {e} must be positive")));
        }
        if let Some(sweep) = &self.sweep {
            validate_grid(&sweep.grid)?;
            if sweep.axis.behavior_kind() != self.behavior.kind {
                return Err(invalid(format!(
                    "a {} sweep needs behavior kind {:?}",
                    sweep.axis.name(),
                    sweep.axis.behavior_kind()
                )));
            }
        }
        self.scenario()?;
        Ok(())
    }

    pub fn behavior_spec(&self) -> CliResult<BehaviorSpec> {
        let b = &self.behavior;
        let mix = match b.kind {
            BehaviorKind::HybridSC | BehaviorKind::HybridCR => match (b.mix, &self.sweep) {
                (Some(m), _) => m,
                (None, Some(s)) => s.grid[0],
                (None, None) => return Err(invalid("hybrid behaviors need `mix`")),
            },
            _ => b.mix.unwrap_or(0.0),
        };
        Ok(BehaviorSpec::new(b.kind, b.p, b.q, mix)?)
    }

    pub fn scenario(&self) -> CliResult<Scenario> {
        let behavior = self.behavior_spec()?;
        let influence = InfluenceSpec::new(self.influence.p_tilde, self.influence.q_tilde)?;
        let scenario = match (self.budget, self.budget_fraction) {
            (Some(_), Some(_)) => return Err(invalid("give either `budget` or `budget_fraction`, not both")),
            (Some(n), None) => Scenario::new(self.population, self.horizon, n, behavior, influence, self.delta0)?,
            (None, Some(f)) => {
                Scenario::with_fraction(self.population, self.horizon, f, behavior, influence, self.delta0)?
            }
            (None, None) => return Err(invalid("one of `budget` or `budget_fraction` is required")),
        };
        Ok(scenario)
    }

    pub fn sim_config(&self) -> CliResult<SimConfig> {
        Ok(self
            .scenario()?
            .config(self.strategy)
            .with_record_stride(self.record_stride)
            .with_type_sampling(self.type_sampling))
    }
}
