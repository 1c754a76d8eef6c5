//! Discrete approximate solution, its martingales and Azuma-Hoeffding tail
//! bounds for the `p = q` model under S_L.
//!
//! With `r~ = 1 - (p~+q~)/M` and `r = 1 - lambda (p+q)/M`,
//! `Y(t) = r~^{-t} delta(t) - sum_{k=1}^t (p~/M) r~^{-k}` on the influenced
//! phase and `X(t) = r^{-t} delta(t) - sum_{k=1}^t (lambda p / M) r^{-k}` on
//! the natural phase, `t` counted from the start of the phase.

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::model::{chi_at, effective_rates, BehaviorKind};
use crate::ode::closed_form::PQ_EQUAL_TOL;
use crate::schedule::Strategy;
use crate::sim::{empirical_tail, EnsembleStats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationParams {
    pub r_tilde: f64,
    pub r: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub horizon: usize,
    /// Influenced slots `bT`.
    pub budget: usize,
}

impl ConcentrationParams {
    /// Contraction factors of `config`, with `(epsilon1, epsilon2)` chosen so
    /// that each phase contributes `epsilon / 2` to the final deviation.
    pub fn for_epsilon(config: &SimConfig, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        let m = config.population_f64();
        let b = &config.behavior;
        let r_tilde = 1.0 - config.influence.total_rate() / m;
        let r = 1.0 - b.mix() * (b.p() + b.q()) / m;
        if !(r_tilde > 0.0 && r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "contraction factors r~ = {r_tilde}, r = {r} must be positive"
            )));
        }
        let horizon = config.horizon();
        let budget = config.schedule.budget();
        let natural = horizon - budget;
        Ok(Self {
            r_tilde,
            r,
            epsilon1: epsilon / (2.0 * r_tilde.powi(horizon as i32)),
            epsilon2: epsilon / (2.0 * r.powi(natural as i32)),
            horizon,
            budget,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AzumaBounds {
    pub mu1: f64,
    pub mu2: f64,
    /// `2 mu1 + 2 mu2`.
    pub combined_failure: f64,
    /// `r~^T epsilon1`.
    pub eps1_prime: f64,
    /// `r^{(1-b)T} epsilon2`.
    pub eps2_prime: f64,
    pub combined_epsilon: f64,
}

fn azuma_term(r: f64, horizon: usize, epsilon: f64, phase_len: usize) -> f64 {
    if phase_len == 0 {
        return 0.0;
    }
    let t = horizon as f64;
    (-r.powf(t) * epsilon * epsilon / (2.0 * phase_len as f64 * (1.0 + r))).exp()
}

/// `mu1 = exp(-r~^T eps1^2 / (2 bT (1 + r~)))`,
/// `mu2 = exp(-r^T eps2^2 / (2 (1-b)T (1 + r)))`. A phase of length zero
/// contributes no deviation, so its term is 0.
pub fn azuma_bounds(params: &ConcentrationParams) -> AzumaBounds {
    let natural = params.horizon - params.budget;
    let mu1 = azuma_term(params.r_tilde, params.horizon, params.epsilon1, params.budget);
    let mu2 = azuma_term(params.r, params.horizon, params.epsilon2, natural);
    let eps1_prime = params.r_tilde.powi(params.horizon as i32) * params.epsilon1;
    let eps2_prime = params.r.powi(natural as i32) * params.epsilon2;
    AzumaBounds {
        mu1,
        mu2,
        combined_failure: 2.0 * mu1 + 2.0 * mu2,
        eps1_prime,
        eps2_prime,
        combined_epsilon: eps1_prime + eps2_prime,
    }
}

fn require_pq_last(config: &SimConfig) -> Result<()> {
    let b = &config.behavior;
    if b.kind() != BehaviorKind::HybridSC || (b.p() - b.q()).abs() > PQ_EQUAL_TOL {
        return Err(Error::ModelMismatch("needs the hybrid S/C model with p = q".into()));
    }
    if config.horizon() > 0 && config.schedule.as_strategy() != Some(Strategy::Last) {
        return Err(Error::ModelMismatch("needs the S_L schedule".into()));
    }
    Ok(())
}

/// `pi + (1/2 - pi) r~^{bT} + (delta0 - 1/2) r~^{bT} r^{(1-b)T}`,
/// `pi = p~/(p~+q~)`, which is `E[delta_N(T)]` for `p = q` under S_L.
pub fn approx_solution(config: &SimConfig) -> Result<f64> {
    require_pq_last(config)?;
    let m = config.population_f64();
    let b = &config.behavior;
    let r_tilde = 1.0 - config.influence.total_rate() / m;
    let r = 1.0 - 2.0 * b.mix() * b.p() / m;
    let budget = config.schedule.budget() as i32;
    let natural = (config.horizon() - config.schedule.budget()) as i32;
    let fixed = config.influence.fixed_point();
    let forced = r_tilde.powi(budget);
    Ok(fixed + (0.5 - fixed) * forced + (config.initial_delta() - 0.5) * forced * r.powi(natural))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MartingaleKind {
    /// `Y` on influenced slots.
    InfluencedPhase,
    /// `X` on uninfluenced slots.
    NaturalPhase,
}

/// `E[Z(t+1) | N(t) = no_count] - Z(t)` for the martingale `Z` of `kind`,
/// where `slot` is the absolute slot of the transition. Exact for `Y` and for
/// `X` when `p = q`; for `p != q` the `X` residual equals
/// `r^{-(t+1)} (1 - lambda)(p - q) delta (1 - delta) / M`.
pub fn martingale_residual(
    config: &SimConfig,
    kind: MartingaleKind,
    slot: usize,
    no_count: u32,
) -> Result<f64> {
    if config.behavior.kind() != BehaviorKind::HybridSC {
        return Err(Error::ModelMismatch("needs the hybrid S/C model".into()));
    }
    if slot >= config.horizon() {
        return Err(Error::PhaseMismatch { slot });
    }
    if no_count > config.population {
        return Err(Error::InvalidParameter(format!(
            "no_count {no_count} exceeds population {}",
            config.population
        )));
    }
    let influenced = config.schedule.is_influenced(slot);
    if influenced != (kind == MartingaleKind::InfluencedPhase) {
        return Err(Error::PhaseMismatch { slot });
    }
    let phase_start = config
        .schedule
        .phases()
        .into_iter()
        .find(|ph| ph.start <= slot && slot < ph.start + ph.len)
        .map(|ph| ph.start)
        .expect("every slot lies in a phase");
    let t = (slot - phase_start) as i32;

    let m = config.population_f64();
    let b = &config.behavior;
    let (ratio, inflow) = match kind {
        MartingaleKind::InfluencedPhase => {
            (1.0 - config.influence.total_rate() / m, config.influence.p_tilde() / m)
        }
        MartingaleKind::NaturalPhase => (1.0 - b.mix() * (b.p() + b.q()) / m, b.mix() * b.p() / m),
    };
    let delta = f64::from(no_count) / m;
    let rates = effective_rates(b, influenced.then_some(&config.influence), delta);
    let next_mean = delta + chi_at(delta, rates).mean() / m;
    Ok(ratio.powi(-(t + 1)) * (next_mean - inflow - ratio * delta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub epsilon: f64,
    pub empirical_tail: f64,
    pub analytic_bound: f64,
    pub approx_solution: f64,
    pub bounds: AzumaBounds,
    pub pass: bool,
}

/// Compares the ensemble's tail `P(|delta_N(T) - approx| > epsilon)` with
/// `2 mu1 + 2 mu2`.
pub fn concentration_check(
    config: &SimConfig,
    ensemble: &EnsembleStats,
    epsilon: f64,
) -> Result<ConcentrationReport> {
    if ensemble.population != config.population || ensemble.horizon != config.horizon() {
        return Err(Error::ConfigMismatch(format!(
            "ensemble has M={}, T={} but config has M={}, T={}",
            ensemble.population,
            ensemble.horizon,
            config.population,
            config.horizon()
        )));
    }
    let approx = approx_solution(config)?;
    let bounds = azuma_bounds(&ConcentrationParams::for_epsilon(config, epsilon)?);
    let tail = empirical_tail(ensemble, approx, epsilon)?;
    Ok(ConcentrationReport {
        epsilon,
        empirical_tail: tail,
        analytic_bound: bounds.combined_failure,
        approx_solution: approx,
        bounds,
        pass: tail <= bounds.combined_failure,
    })
}
