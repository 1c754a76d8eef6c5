//! S_L vs S_F through any of the four engines.

use crate::config::Scenario;
use crate::error::Result;
use crate::exact::{exact_final_expectation, ExactCaps};
use crate::model::BehaviorKind;
use crate::ode::closed_form::DETERMINISTIC_TIE_TOL;
use crate::ode::{closed_form_report, integrate_final, Method, OdeSettings, StrategyDiffReport, Winner};
use crate::schedule::Strategy;
use crate::sim::simulate_ensemble;

/// Number of standard errors a Monte Carlo difference must exceed before a
/// winner is declared.
pub const MC_SE_MULTIPLIER: f64 = 3.0;

pub fn compare_ode(scenario: &Scenario, settings: &OdeSettings) -> Result<StrategyDiffReport> {
    let last = integrate_final(&scenario.config(Strategy::Last), settings)?;
    let first = integrate_final(&scenario.config(Strategy::First), settings)?;
    Ok(deterministic(last, first, Method::OdeNumeric))
}

pub fn compare_exact(scenario: &Scenario, caps: &ExactCaps) -> Result<StrategyDiffReport> {
    let last = 1.0 - exact_final_expectation(&scenario.config(Strategy::Last), caps)?;
    let first = 1.0 - exact_final_expectation(&scenario.config(Strategy::First), caps)?;
    Ok(deterministic(last, first, Method::ExactMarkov))
}

/// Independent ensembles per strategy; the two seeds are `base_seed` and
/// `base_seed + 1`.
pub fn compare_monte_carlo(scenario: &Scenario, n_reps: usize, base_seed: u64) -> Result<StrategyDiffReport> {
    let last = simulate_ensemble(&scenario.config(Strategy::Last).with_record_stride(usize::MAX), n_reps, base_seed)?;
    let first = simulate_ensemble(
        &scenario.config(Strategy::First).with_record_stride(usize::MAX),
        n_reps,
        base_seed.wrapping_add(1),
    )?;
    let difference = last.mean_final_delta - first.mean_final_delta;
    let se = last.standard_error().hypot(first.standard_error());
    Ok(StrategyDiffReport {
        delta_last_final: last.mean_final_delta,
        delta_first_final: first.mean_final_delta,
        difference,
        winner: Winner::from_difference(difference, MC_SE_MULTIPLIER * se),
        method: Method::MonteCarlo,
        standard_error: Some(se),
        aux: None,
    })
}

/// Closed form for Model I, numerical integration otherwise.
pub fn compare_mean_field(scenario: &Scenario, settings: &OdeSettings) -> Result<StrategyDiffReport> {
    if scenario.behavior.kind() == BehaviorKind::HybridSC {
        closed_form_report(scenario)
    } else {
        compare_ode(scenario, settings)
    }
}

fn deterministic(last: f64, first: f64, method: Method) -> StrategyDiffReport {
    let difference = last - first;
    StrategyDiffReport {
        delta_last_final: last,
        delta_first_final: first,
        difference,
        winner: Winner::from_difference(difference, DETERMINISTIC_TIE_TOL),
        method,
        standard_error: None,
        aux: None,
    }
}
