//! Exact law of `N(t)` propagated through the tridiagonal one-slot kernel.

use serde::Serialize;

use crate::config::{SimConfig, Trajectory, TrajectorySource};
use crate::error::{Error, Result};
use crate::model::{chi_at, effective_rates, BehaviorSpec, ChiDistribution, InfluenceSpec};

const NORMALIZATION_TOL: f64 = 1e-10;
const STEP_MASS_TOL: f64 = 1e-12;

/// Limits on `exact_*` work, which is `O(M * T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExactCaps {
    pub max_population: u32,
    pub max_horizon: usize,
}

impl Default for ExactCaps {
    fn default() -> Self {
        Self {
            max_population: 2000,
            max_horizon: 100_000,
        }
    }
}

impl ExactCaps {
    pub fn check(&self, population: u32, horizon: usize) -> Result<()> {
        if population > self.max_population || horizon > self.max_horizon {
            return Err(Error::CostCapExceeded(format!(
                "exact propagation of M={population}, T={horizon} exceeds caps M<={}, T<={}",
                self.max_population, self.max_horizon
            )));
        }
        Ok(())
    }
}

/// Probability vector over `N` in `{0, ..., M}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateDistribution {
    probs: Vec<f64>,
}

impl StateDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidParameter(
                "distribution needs at least the states 0 and 1".into(),
            ));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidParameter("negative or NaN probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn point_mass(population: u32, no_count: u32) -> Result<Self> {
        if no_count > population || population == 0 {
            return Err(Error::InvalidParameter(format!(
                "point mass at {no_count} outside 0..={population}"
            )));
        }
        let mut probs = vec![0.0; population as usize + 1];
        probs[no_count as usize] = 1.0;
        Ok(Self { probs })
    }

    pub fn population(&self) -> u32 {
        (self.probs.len() - 1) as u32
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean_no_count(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn mean_delta(&self) -> f64 {
        self.mean_no_count() / f64::from(self.population())
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Per-state transition probabilities for one slot kind.
struct Kernel {
    rows: Vec<ChiDistribution>,
}

impl Kernel {
    fn new(population: u32, behavior: &BehaviorSpec, influence: Option<&InfluenceSpec>) -> Self {
        let m = f64::from(population);
        let rows = (0..=population)
            .map(|n| {
                let delta = f64::from(n) / m;
                chi_at(delta, effective_rates(behavior, influence, delta))
            })
            .collect();
        Self { rows }
    }

    fn apply(&self, old: &[f64], new: &mut [f64]) {
        let last = old.len() - 1;
        for n in 0..=last {
            let mut mass = old[n] * self.rows[n].stay;
            if n < last {
                mass += old[n + 1] * self.rows[n + 1].down;
            }
            if n > 0 {
                mass += old[n - 1] * self.rows[n - 1].up;
            }
            new[n] = mass;
        }
    }
}

fn check_mass(slot: usize, before: f64, after: &[f64]) -> Result<f64> {
    let total: f64 = after.iter().sum();
    let drift = (total - before).abs();
    if drift > STEP_MASS_TOL || !total.is_finite() {
        return Err(Error::MassLeak { slot, drift });
    }
    Ok(total)
}

pub fn propagate_one_slot(
    dist: &StateDistribution,
    behavior: &BehaviorSpec,
    influence: Option<&InfluenceSpec>,
) -> Result<StateDistribution> {
    let kernel = Kernel::new(dist.population(), behavior, influence);
    let mut probs = vec![0.0; dist.probs.len()];
    kernel.apply(&dist.probs, &mut probs);
    check_mass(0, dist.total_mass(), &probs)?;
    Ok(StateDistribution { probs })
}

/// Distribution of `N(T)` together with `E[delta_N(t)]` at every slot.
pub fn exact_propagate(config: &SimConfig, caps: &ExactCaps) -> Result<(StateDistribution, Vec<f64>)> {
    caps.check(config.population, config.horizon())?;
    let natural = Kernel::new(config.population, &config.behavior, None);
    let influenced = Kernel::new(config.population, &config.behavior, Some(&config.influence));

    let mut current = StateDistribution::point_mass(config.population, config.initial_no_count())?;
    let mut scratch = vec![0.0; current.probs.len()];
    let mut mass = 1.0;
    let mut means = Vec::with_capacity(config.horizon() + 1);
    means.push(current.mean_delta());
    for (slot, &inf) in config.schedule.mask().iter().enumerate() {
        let kernel = if inf { &influenced } else { &natural };
        kernel.apply(&current.probs, &mut scratch);
        mass = check_mass(slot, mass, &scratch)?;
        std::mem::swap(&mut current.probs, &mut scratch);
        means.push(current.mean_delta());
    }
    Ok((current, means))
}

/// Exact `E[delta_N(t)]` for `t = 0..=T`.
pub fn exact_expected_trajectory(config: &SimConfig, caps: &ExactCaps) -> Result<Trajectory> {
    let (_, values) = exact_propagate(config, caps)?;
    Ok(Trajectory {
        times: (0..values.len()).collect(),
        values,
        source: TrajectorySource::ExactMarkov,
    })
}

/// Exact `E[Y(T)] / M`, the expected final "Yes" fraction.
pub fn exact_final_expectation(config: &SimConfig, caps: &ExactCaps) -> Result<f64> {
    let (dist, _) = exact_propagate(config, caps)?;
    Ok(1.0 - dist.mean_delta())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scenario;
    use crate::model::Conduct;
    use crate::schedule::{Schedule, Strategy};

    fn strong(p: f64, q: f64) -> BehaviorSpec {
        BehaviorSpec::pure(Conduct::Strong, p, q).unwrap()
    }

    #[test]
    fn absorbing_zero_under_zero_p() {
        let d = StateDistribution::point_mass(10, 0).unwrap();
        let out = propagate_one_slot(&d, &strong(0.0, 0.7), None).unwrap();
        assert_eq!(out, d);
    }

    #[test]
    fn frozen_rates_leave_distribution() {
        let d = StateDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(propagate_one_slot(&d, &strong(0.0, 0.0), None).unwrap(), d);
    }

    #[test]
    fn two_person_worked_example() {
        let d = StateDistribution::point_mass(2, 1).unwrap();
        let out = propagate_one_slot(&d, &strong(0.6, 0.2), None).unwrap();
        let expect = [0.1, 0.6, 0.3];
        for (a, b) in out.probs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{:?}", out.probs());
        }
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(StateDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(StateDistribution::new(vec![1.2, -0.2]).is_err());
        assert!(StateDistribution::new(vec![1.0]).is_err());
    }

    fn pq_scenario(m: u32, t: usize, delta0: f64) -> Scenario {
        Scenario::with_fraction(
            m,
            t,
            0.4,
            BehaviorSpec::hybrid_sc(0.5, 0.5, 0.5).unwrap(),
            InfluenceSpec::new(0.1, 0.9).unwrap(),
            delta0,
        )
        .unwrap()
    }

    #[test]
    fn zero_horizon_expectation() {
        let cfg = pq_scenario(10, 0, 0.3).config(Strategy::Last);
        let tr = exact_expected_trajectory(&cfg, &ExactCaps::default()).unwrap();
        assert_eq!(tr.values, vec![0.3]);
        assert!((exact_final_expectation(&cfg, &ExactCaps::default()).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn symmetric_fixed_point() {
        let cfg = SimConfig::new(
            40,
            strong(0.3, 0.3),
            InfluenceSpec::new(0.1, 0.9).unwrap(),
            0.5,
            Schedule::from_mask(vec![false; 200]),
        )
        .unwrap();
        let tr = exact_expected_trajectory(&cfg, &ExactCaps::default()).unwrap();
        assert!(tr.values.iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn all_no_forever_means_all_yes_fraction_zero_no() {
        let cfg = SimConfig::new(
            30,
            strong(0.0, 0.4),
            InfluenceSpec::new(0.0, 0.4).unwrap(),
            0.0,
            Schedule::last(50, 20).unwrap(),
        )
        .unwrap();
        assert_eq!(exact_final_expectation(&cfg, &ExactCaps::default()).unwrap(), 1.0);
    }

    #[test]
    fn cost_cap_is_enforced() {
        let cfg = pq_scenario(2001, 10, 0.5).config(Strategy::Last);
        assert!(matches!(
            exact_final_expectation(&cfg, &ExactCaps::default()),
            Err(Error::CostCapExceeded(_))
        ));
        let caps = ExactCaps { max_population: 100, max_horizon: 5 };
        let cfg = pq_scenario(50, 6, 0.5).config(Strategy::Last);
        assert!(exact_final_expectation(&cfg, &caps).is_err());
    }

    #[test]
    fn mass_and_support_are_preserved() {
        let cfg = Scenario::with_fraction(
            25,
            300,
            0.3,
            BehaviorSpec::hybrid_cr(0.9, 0.2, 0.3).unwrap(),
            InfluenceSpec::new(0.05, 0.95).unwrap(),
            0.9,
        )
        .unwrap()
        .config(Strategy::First);
        let (dist, means) = exact_propagate(&cfg, &ExactCaps::default()).unwrap();
        assert_eq!(dist.probs().len(), 26);
        assert!((dist.total_mass() - 1.0).abs() < 1e-12);
        assert!(means.iter().all(|m| (0.0..=1.0).contains(m)));
    }

    #[test]
    fn pq_equal_expectation_is_affine_recursion() {
        // For p = q the mean obeys E[d'] = (1 - 2 lambda p / M) d + lambda p / M
        // off influence and E[d'] = (1 - (p~ + q~)/M) d + p~/M on it.
        let s = pq_scenario(30, 40, 0.8);
        let cfg = s.config(Strategy::Last);
        let tr = exact_expected_trajectory(&cfg, &ExactCaps::default()).unwrap();
        let m = 30.0;
        let mut d = s.initial_delta();
        for (t, &inf) in cfg.schedule.mask().iter().enumerate() {
            d = if inf {
                (1.0 - 1.0 / m) * d + 0.1 / m
            } else {
                (1.0 - 0.5 / m) * d + 0.25 / m
            };
            assert!((tr.values[t + 1] - d).abs() < 1e-13);
        }
    }
}
