//! Seeded Monte Carlo simulation of the "No" count chain
//! `N(t+1) = N(t) + chi(t+1)`.
//!
//! Each run owns a `ChaCha8Rng` seeded with `seed_from_u64(seed)`. Replication
//! `i` of an ensemble uses `replication_seed(base, i) = base + i * 0x9E3779B97F4A7C15`
//! (wrapping), so replication 0 is the plain `simulate_once(config, base)`.
//!
//! Ensemble aggregation only adds integer counts, which is associative and
//! commutative; results are bit-identical regardless of how rayon splits the
//! work.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{SimConfig, Trajectory, TrajectorySource};
use crate::error::{Error, Result};
use crate::model::{chi_at, effective_rates, BehaviorKind, Conduct, SlotRates};

const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn replication_seed(base_seed: u64, index: u64) -> u64 {
    base_seed.wrapping_add(index.wrapping_mul(SEED_STRIDE))
}

/// Runs the chain, calling `record(i, n)` for the i-th entry of `times`.
/// Returns the final "No" count.
fn run_chain(config: &SimConfig, seed: u64, times: &[usize], mut record: impl FnMut(usize, u32)) -> u32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = config.population;
    let m_f = config.population_f64();
    let components = config.behavior.components();
    let sample_type = config.type_sampling
        && !matches!(
            config.behavior.kind(),
            BehaviorKind::PureS | BehaviorKind::PureC | BehaviorKind::PureR
        );
    let (p, q) = (config.behavior.p(), config.behavior.q());

    let mut n = config.initial_no_count();
    let mut next = 0;
    if times.first() == Some(&0) {
        record(0, n);
        next = 1;
    }
    for (t, &influenced) in config.schedule.mask().iter().enumerate() {
        let delta = f64::from(n) / m_f;
        let rates: SlotRates = if influenced {
            config.influence.rates()
        } else if sample_type {
            let conduct: Conduct = if rng.random::<f64>() < components[0].0 {
                components[0].1
            } else {
                components[1].1
            };
            conduct.rates(p, q, delta)
        } else {
            effective_rates(&config.behavior, None, delta)
        };
        let chi = chi_at(delta, rates);
        let u: f64 = rng.random();
        if u < chi.down {
            n -= 1;
        } else if u < chi.down + chi.up {
            n += 1;
        }
        debug_assert!(n <= m);
        if times.get(next) == Some(&(t + 1)) {
            record(next, n);
            next += 1;
        }
    }
    n
}

/// One realization of the `delta_N` path. Deterministic in `(config, seed)`.
pub fn simulate_once(config: &SimConfig, seed: u64) -> Trajectory {
    let times = config.record_times();
    let m = config.population_f64();
    let mut values = vec![0.0; times.len()];
    run_chain(config, seed, &times, |i, n| values[i] = f64::from(n) / m);
    Trajectory {
        times,
        values,
        source: TrajectorySource::MonteCarlo,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub n_reps: usize,
    pub population: u32,
    pub horizon: usize,
    pub mean_final_delta: f64,
    /// Sample standard deviation of the final `delta_N` (zero for one run).
    pub std_final_delta: f64,
    pub mean_trajectory: Trajectory,
    /// Final `delta_N` of each replication, in replication order.
    pub final_deltas: Vec<f64>,
}

impl EnsembleStats {
    pub fn mean_final_yes(&self) -> f64 {
        1.0 - self.mean_final_delta
    }

    /// Standard error of `mean_final_delta`.
    pub fn standard_error(&self) -> f64 {
        self.std_final_delta / (self.n_reps as f64).sqrt()
    }
}

struct Accumulator {
    path_sums: Vec<u64>,
    finals: Vec<(usize, u32)>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Self {
            path_sums: vec![0; len],
            finals: Vec::new(),
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.path_sums.iter_mut().zip(&other.path_sums) {
            *a += b;
        }
        self.finals.extend(other.finals);
        self
    }
}

pub fn simulate_ensemble(config: &SimConfig, n_reps: usize, base_seed: u64) -> Result<EnsembleStats> {
    if n_reps == 0 {
        return Err(Error::InvalidParameter("n_reps must be at least 1".into()));
    }
    let times = config.record_times();
    let len = times.len();
    let acc = (0..n_reps)
        .into_par_iter()
        .fold(
            || Accumulator::new(len),
            |mut acc, rep| {
                let seed = replication_seed(base_seed, rep as u64);
                let last = run_chain(config, seed, &times, |i, n| acc.path_sums[i] += u64::from(n));
                acc.finals.push((rep, last));
                acc
            },
        )
        .reduce(|| Accumulator::new(len), Accumulator::merge);

    let mut finals = acc.finals;
    finals.sort_unstable_by_key(|&(rep, _)| rep);
    let m = config.population_f64();
    let reps = n_reps as f64;

    let (sum, sum_sq) = finals.iter().fold((0u128, 0u128), |(s, s2), &(_, n)| {
        let n = u128::from(n);
        (s + n, s2 + n * n)
    });
    let mean_final_delta = sum as f64 / reps / m;
    let std_final_delta = if n_reps > 1 {
        // n * sum(x^2) - sum(x)^2 is exact in integers.
        let numer = (n_reps as u128) * sum_sq - sum * sum;
        (numer as f64 / (reps * (reps - 1.0))).sqrt() / m
    } else {
        0.0
    };

    Ok(EnsembleStats {
        n_reps,
        population: config.population,
        horizon: config.horizon(),
        mean_final_delta,
        std_final_delta,
        mean_trajectory: Trajectory {
            times,
            values: acc.path_sums.iter().map(|&s| s as f64 / reps / m).collect(),
            source: TrajectorySource::MonteCarlo,
        },
        final_deltas: finals.iter().map(|&(_, n)| f64::from(n) / m).collect(),
    })
}

/// Fraction of replications whose final value is more than `epsilon` from `center`.
pub fn empirical_tail(stats: &EnsembleStats, center: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let hits = stats
        .final_deltas
        .iter()
        .filter(|&&x| (x - center).abs() > epsilon)
        .count();
    Ok(hits as f64 / stats.n_reps as f64)
}
