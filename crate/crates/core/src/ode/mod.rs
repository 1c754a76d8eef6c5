//! Mean-field limit `M d'(t) = (1 - d) p_t - d q_t` of the "No" fraction.
//!
//! Numerical integration is classical fixed-step RK4, restarted at every
//! schedule phase boundary so the right-hand side is smooth within a step.
//! Closed forms for Model I live in [`closed_form`], the strategy-level
//! predicates in [`crossover`].

pub mod closed_form;
pub mod crossover;

use serde::Serialize;

use crate::config::{SimConfig, Trajectory, TrajectorySource};
use crate::error::{Error, Result};
use crate::model::{effective_rates, BehaviorSpec, InfluenceSpec};

pub use closed_form::{
    asymptotic_diff, closed_form_difference, closed_form_final, closed_form_final_general,
    closed_form_final_pq_equal, closed_form_report,
    closed_form_influence_phase, quadratic_roots, strategy_diff_general, strategy_diff_pq_equal,
    HorizonRegime, Method, QuadraticRoots, RootCase, StrategyDiffReport, Winner,
};
pub use crossover::{crossover_lambda, model2_threshold, CrossoverOutcome};

/// `d delta_N / dt` per slot.
pub fn ode_rhs(
    behavior: &BehaviorSpec,
    influence: Option<&InfluenceSpec>,
    delta: f64,
    population: u32,
) -> f64 {
    let r = effective_rates(behavior, influence, delta);
    ((1.0 - delta) * r.p_t - delta * r.q_t) / f64::from(population)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeSettings {
    /// Upper bound on total RK4 steps for one integration.
    pub max_steps: u64,
    /// Largest step as a fraction of the fastest relaxation time `M / rate`.
    pub max_scaled_step: f64,
    /// Relative error the step must reach on the linear calibration problem.
    pub calibration_tol: f64,
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self {
            max_steps: 50_000_000,
            max_scaled_step: 0.02,
            calibration_tol: 1e-8,
        }
    }
}

/// Bound on `|d rhs / d delta| * M` over the whole schedule.
fn stiffness(config: &SimConfig) -> f64 {
    let natural = 2.0 * (config.behavior.p() + config.behavior.q());
    let forced = if config.schedule.budget() > 0 {
        config.influence.total_rate()
    } else {
        0.0
    };
    natural.max(forced).max(1e-12)
}

/// RK4 applied to `y' = -k (y - 1/2)` multiplies the error by
/// `1 - x + x^2/2 - x^3/6 + x^4/24` per step, `x = k h`.
fn rk4_linear_error(rate_per_slot: f64, step: f64, steps: u64) -> f64 {
    let x = rate_per_slot * step;
    let amp = 1.0 - x + x * x / 2.0 - x * x * x / 6.0 + x * x * x * x / 24.0;
    let numeric = 1.0 - amp.powf(steps as f64);
    let exact = -(-x * steps as f64).exp_m1();
    if exact == 0.0 {
        0.0
    } else {
        ((numeric - exact) / exact).abs()
    }
}

/// Step length in slots, calibrated against the exactly solvable linear
/// relaxation at the same stiffness and horizon.
fn calibrated_step(config: &SimConfig, settings: &OdeSettings) -> Result<f64> {
    let horizon = config.horizon() as f64;
    let rate = stiffness(config) / config.population_f64();
    let mut scaled = settings.max_scaled_step;
    loop {
        let step = scaled / rate;
        let steps = (horizon / step).ceil().max(1.0) as u64;
        if steps > settings.max_steps {
            return Err(Error::StepSizeTooCoarse {
                required: steps,
                budget: settings.max_steps,
            });
        }
        let err = rk4_linear_error(rate, horizon / steps as f64, steps);
        if err <= settings.calibration_tol || horizon == 0.0 {
            return Ok(step);
        }
        scaled /= 2.0;
    }
}

#[inline]
fn rk4_step(f: &impl Fn(f64) -> f64, y: f64, h: f64) -> f64 {
    let k1 = f(y);
    let k2 = f(y + 0.5 * h * k1);
    let k3 = f(y + 0.5 * h * k2);
    let k4 = f(y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn phase_rhs(config: &SimConfig, influenced: bool) -> impl Fn(f64) -> f64 + '_ {
    let influence = influenced.then_some(&config.influence);
    move |d| ode_rhs(&config.behavior, influence, d, config.population)
}

/// Mean-field path sampled at every slot (or at `config.record_times()`).
pub fn integrate(config: &SimConfig, settings: &OdeSettings) -> Result<Trajectory> {
    let step = calibrated_step(config, settings)?;
    let substeps = (1.0 / step).ceil().max(1.0) as u64;
    let total = substeps.saturating_mul(config.horizon() as u64);
    if total > settings.max_steps {
        return Err(Error::StepSizeTooCoarse {
            required: total,
            budget: settings.max_steps,
        });
    }
    let h = 1.0 / substeps as f64;
    let natural = phase_rhs(config, false);
    let forced = phase_rhs(config, true);

    let times = config.record_times();
    let mut values = Vec::with_capacity(times.len());
    let mut y = config.initial_delta();
    let mut next = 0;
    if times.first() == Some(&0) {
        values.push(y);
        next = 1;
    }
    for (t, &inf) in config.schedule.mask().iter().enumerate() {
        for _ in 0..substeps {
            y = if inf { rk4_step(&forced, y, h) } else { rk4_step(&natural, y, h) };
        }
        if times.get(next) == Some(&(t + 1)) {
            values.push(y);
            next += 1;
        }
    }
    Ok(Trajectory {
        times,
        values,
        source: TrajectorySource::OdeNumeric,
    })
}

/// Mean-field `delta_N(T)` only. Steps may span many slots, which keeps
/// horizons of `10^3 M` and more cheap.
pub fn integrate_final(config: &SimConfig, settings: &OdeSettings) -> Result<f64> {
    let step = calibrated_step(config, settings)?;
    let mut y = config.initial_delta();
    for phase in config.schedule.phases() {
        let f = phase_rhs(config, phase.influenced);
        let n = (phase.len as f64 / step).ceil().max(1.0) as u64;
        let h = phase.len as f64 / n as f64;
        for _ in 0..n {
            y = rk4_step(&f, y, h);
        }
    }
    Ok(y)
}
