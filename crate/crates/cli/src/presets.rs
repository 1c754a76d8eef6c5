//! Caption parameters of the five published figures.
//!
//! The captions give no initial state; every preset starts from
//! `delta0 = 0.5`.

use serde::Serialize;
use voter_core::{BehaviorKind, BehaviorSpec, InfluenceSpec, Scenario};

use crate::config::SweepAxis;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigurePreset {
    pub figure: u8,
    pub population: u32,
    pub horizon: usize,
    pub budget_fraction: f64,
    pub kind: BehaviorKind,
    pub p: f64,
    pub q: f64,
    pub p_tilde: f64,
    pub q_tilde: f64,
    /// Fixed mixing weight for time-series figures.
    pub mix: Option<f64>,
    /// Swept parameter for comparison figures.
    pub axis: Option<SweepAxis>,
    pub delta0: f64,
}

pub const FIGURES: [FigurePreset; 5] = [
    FigurePreset {
        figure: 1,
        population: 100,
        horizon: 10_000,
        budget_fraction: 0.4,
        kind: BehaviorKind::HybridSC,
        p: 0.8,
        q: 0.4,
        p_tilde: 0.1,
        q_tilde: 0.9,
        mix: Some(0.5),
        axis: None,
        delta0: 0.5,
    },
    FigurePreset {
        figure: 2,
        population: 10_000,
        horizon: 10_000,
        budget_fraction: 0.4,
        kind: BehaviorKind::HybridSC,
        p: 0.5,
        q: 0.5,
        p_tilde: 0.1,
        q_tilde: 0.9,
        mix: None,
        axis: Some(SweepAxis::Lambda),
        delta0: 0.5,
    },
    FigurePreset {
        figure: 3,
        population: 1000,
        horizon: 1000,
        budget_fraction: 0.4,
        kind: BehaviorKind::HybridSC,
        p: 0.8,
        q: 0.4,
        p_tilde: 0.1,
        q_tilde: 0.9,
        mix: None,
        axis: Some(SweepAxis::Lambda),
        delta0: 0.5,
    },
    FigurePreset {
        figure: 4,
        population: 1000,
        horizon: 100_000,
        budget_fraction: 0.4,
        kind: BehaviorKind::HybridSC,
        p: 0.4,
        q: 0.8,
        p_tilde: 0.1,
        q_tilde: 0.9,
        mix: None,
        axis: Some(SweepAxis::Lambda),
        delta0: 0.5,
    },
    FigurePreset {
        figure: 5,
        population: 1000,
        horizon: 1000,
        budget_fraction: 0.4,
        kind: BehaviorKind::HybridCR,
        p: 0.2,
        q: 0.9,
        p_tilde: 0.1,
        q_tilde: 0.9,
        mix: None,
        axis: Some(SweepAxis::Mu),
        delta0: 0.5,
    },
];

/// Slots between recorded points of the time-series figure.
pub const TRAJECTORY_STRIDE: usize = 100;

pub fn preset(figure: u8) -> CliResult<&'static FigurePreset> {
    FIGURES
        .iter()
        .find(|f| f.figure == figure)
        .ok_or_else(|| CliError::Config(format!("figure {figure} is not one of 1..=5")))
}

/// `0, 0.05, ..., 1`.
pub fn default_grid() -> Vec<f64> {
    (0..=20).map(|i| f64::from(i) / 20.0).collect()
}

impl FigurePreset {
    pub fn scenario(&self, mix: f64) -> CliResult<Scenario> {
        let behavior = BehaviorSpec::new(self.kind, self.p, self.q, mix)?;
        let influence = InfluenceSpec::new(self.p_tilde, self.q_tilde)?;
        Ok(Scenario::with_fraction(
            self.population,
            self.horizon,
            self.budget_fraction,
            behavior,
            influence,
            self.delta0,
        )?)
    }
}
