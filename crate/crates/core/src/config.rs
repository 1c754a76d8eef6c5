use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_probability, BehaviorSpec, InfluenceSpec};
use crate::schedule::{budget_from_fraction, Schedule, Strategy};

/// Everything that defines an experiment except which slots are influenced.
/// Strategy comparisons instantiate one `SimConfig` per schedule from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub population: u32,
    pub horizon: usize,
    pub budget: usize,
    pub behavior: BehaviorSpec,
    pub influence: InfluenceSpec,
    pub delta0: f64,
}

impl Scenario {
    pub fn new(
        population: u32,
        horizon: usize,
        budget: usize,
        behavior: BehaviorSpec,
        influence: InfluenceSpec,
        delta0: f64,
    ) -> Result<Self> {
        if population == 0 {
            return Err(Error::InvalidParameter("population must be positive".into()));
        }
        if budget > horizon {
            return Err(Error::InvalidParameter(format!(
                "budget {budget} exceeds horizon {horizon}"
            )));
        }
        check_probability("delta0", delta0)?;
        Ok(Self {
            population,
            horizon,
            budget,
            behavior,
            influence,
            delta0,
        })
    }

    /// Scenario with budget `floor(fraction * horizon)`.
    pub fn with_fraction(
        population: u32,
        horizon: usize,
        fraction: f64,
        behavior: BehaviorSpec,
        influence: InfluenceSpec,
        delta0: f64,
    ) -> Result<Self> {
        let budget = budget_from_fraction(horizon, fraction)?;
        Self::new(population, horizon, budget, behavior, influence, delta0)
    }

    pub fn with_behavior(&self, behavior: BehaviorSpec) -> Self {
        Self { behavior, ..*self }
    }

    /// Same scenario with the mixing weight (lambda or mu) replaced.
    pub fn with_mix(&self, mix: f64) -> Result<Self> {
        Ok(self.with_behavior(self.behavior.with_mix(mix)?))
    }

    pub fn population_f64(&self) -> f64 {
        f64::from(self.population)
    }

    /// `T / M`, the horizon measured in population sizes.
    pub fn horizon_ratio(&self) -> f64 {
        self.horizon as f64 / self.population_f64()
    }

    /// Uninfluenced slot count, `(1 - b) T`.
    pub fn natural_slots(&self) -> usize {
        self.horizon - self.budget
    }

    /// `N(0) = round(delta0 * M)`, halves rounded up.
    pub fn initial_no_count(&self) -> u32 {
        initial_no_count(self.population, self.delta0)
    }

    /// The realized `N(0) / M`.
    pub fn initial_delta(&self) -> f64 {
        f64::from(self.initial_no_count()) / self.population_f64()
    }

    pub fn schedule(&self, strategy: Strategy) -> Schedule {
        Schedule::for_strategy(strategy, self.horizon, self.budget)
            .expect("budget validated at construction")
    }

    pub fn config(&self, strategy: Strategy) -> SimConfig {
        self.config_with(self.schedule(strategy))
            .expect("schedule built from this scenario")
    }

    pub fn config_with(&self, schedule: Schedule) -> Result<SimConfig> {
        if schedule.horizon() != self.horizon {
            return Err(Error::InvalidParameter(format!(
                "schedule horizon {} differs from scenario horizon {}",
                schedule.horizon(),
                self.horizon
            )));
        }
        SimConfig::new(
            self.population,
            self.behavior,
            self.influence,
            self.delta0,
            schedule,
        )
    }
}

pub(crate) fn initial_no_count(population: u32, delta0: f64) -> u32 {
    let n = (delta0 * f64::from(population) + 0.5).floor() as u32;
    n.min(population)
}

/// A fully specified run: population, behavior, influence and schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub population: u32,
    pub behavior: BehaviorSpec,
    pub influence: InfluenceSpec,
    pub delta0: f64,
    pub schedule: Schedule,
    /// Keep every k-th slot of recorded trajectories (plus t = 0, phase
    /// boundaries and t = T). Statistics always use exact final values.
    pub record_stride: usize,
    /// Draw the behavior type per slot in the Monte Carlo engine instead
    /// of using the mixed rates. Both have the same one-step law.
    pub type_sampling: bool,
}

impl SimConfig {
    pub fn new(
        population: u32,
        behavior: BehaviorSpec,
        influence: InfluenceSpec,
        delta0: f64,
        schedule: Schedule,
    ) -> Result<Self> {
        if population == 0 {
            return Err(Error::InvalidParameter("population must be positive".into()));
        }
        check_probability("delta0", delta0)?;
        Ok(Self {
            population,
            behavior,
            influence,
            delta0,
            schedule,
            record_stride: 1,
            type_sampling: false,
        })
    }

    pub fn with_record_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride.max(1);
        self
    }

    pub fn with_type_sampling(mut self, on: bool) -> Self {
        self.type_sampling = on;
        self
    }

    pub fn horizon(&self) -> usize {
        self.schedule.horizon()
    }

    pub fn population_f64(&self) -> f64 {
        f64::from(self.population)
    }

    pub fn initial_no_count(&self) -> u32 {
        initial_no_count(self.population, self.delta0)
    }

    pub fn initial_delta(&self) -> f64 {
        f64::from(self.initial_no_count()) / self.population_f64()
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            population: self.population,
            horizon: self.horizon(),
            budget: self.schedule.budget(),
            behavior: self.behavior,
            influence: self.influence,
            delta0: self.delta0,
        }
    }

    /// Slot indices kept in recorded trajectories, ascending.
    pub fn record_times(&self) -> Vec<usize> {
        let horizon = self.horizon();
        let stride = self.record_stride.max(1);
        if stride == 1 {
            return (0..=horizon).collect();
        }
        let mut times: Vec<usize> = (0..=horizon).step_by(stride).collect();
        times.extend(self.schedule.phases().iter().map(|ph| ph.start));
        times.push(horizon);
        times.sort_unstable();
        times.dedup();
        times
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectorySource {
    MonteCarlo,
    ExactMarkov,
    OdeNumeric,
    ClosedForm,
}

/// `delta_N` (the "No" fraction) indexed by slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<usize>,
    pub values: Vec<f64>,
    pub source: TrajectorySource,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("trajectories contain t = 0")
    }

    /// Value at slot `t`, if recorded.
    pub fn value_at(&self, t: usize) -> Option<f64> {
        self.times.binary_search(&t).ok().map(|i| self.values[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(m: u32, delta0: f64) -> Scenario {
        Scenario::with_fraction(
            m,
            10,
            0.4,
            BehaviorSpec::hybrid_sc(0.5, 0.5, 0.5).unwrap(),
            InfluenceSpec::new(0.1, 0.9).unwrap(),
            delta0,
        )
        .unwrap()
    }

    #[test]
    fn initial_count_rounds_half_up() {
        assert_eq!(scenario(10, 0.25).initial_no_count(), 3);
        assert_eq!(scenario(10, 0.24).initial_no_count(), 2);
        assert_eq!(scenario(20, 0.3).initial_no_count(), 6);
        assert_eq!(scenario(7, 1.0).initial_no_count(), 7);
    }

    #[test]
    fn record_times_keep_boundaries() {
        let cfg = scenario(10, 0.5).config(Strategy::Last).with_record_stride(4);
        assert_eq!(cfg.record_times(), vec![0, 4, 6, 8, 10]);
        let cfg = cfg.with_record_stride(1);
        assert_eq!(cfg.record_times().len(), 11);
    }

    #[test]
    fn scenario_validation() {
        let b = BehaviorSpec::hybrid_sc(0.5, 0.5, 0.5).unwrap();
        let i = InfluenceSpec::new(0.1, 0.9).unwrap();
        assert!(Scenario::new(0, 10, 4, b, i, 0.5).is_err());
        assert!(Scenario::new(10, 10, 11, b, i, 0.5).is_err());
        assert!(Scenario::new(10, 10, 4, b, i, 1.5).is_err());
        let s = Scenario::new(10, 10, 4, b, i, 0.5).unwrap();
        assert!(s.config_with(Schedule::last(9, 4).unwrap()).is_err());
    }
}
