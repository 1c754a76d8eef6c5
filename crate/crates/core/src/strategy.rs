//! Exhaustive schedule search and adjacent-swap comparisons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Scenario, SimConfig};
use crate::error::{Error, Result};
use crate::exact::{exact_final_expectation, ExactCaps};
use crate::ode::{integrate_final, OdeSettings, Winner};
use crate::schedule::{Schedule, Strategy};

pub const DEFAULT_SCHEDULE_CAP: u64 = 100_000;
const SWAP_TIE_TOL: f64 = 1e-12;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Masks with `budget` influenced slots in lexicographic order
/// (`false < true`, slot 0 most significant): S_L first, S_F last.
#[derive(Debug, Clone)]
pub struct ScheduleEnumerator {
    next: Option<Vec<bool>>,
    remaining: u128,
}

impl Iterator for ScheduleEnumerator {
    type Item = Schedule;

    fn next(&mut self) -> Option<Schedule> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        self.remaining -= 1;
        Some(Schedule::from_mask(current))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}

impl ExactSizeIterator for ScheduleEnumerator {}

fn next_permutation(v: &mut [bool]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn enumerate_schedules(horizon: usize, budget: usize, cap: u64) -> Result<ScheduleEnumerator> {
    if budget > horizon {
        return Err(Error::InvalidParameter(format!(
            "budget {budget} exceeds horizon {horizon}"
        )));
    }
    let count = binomial(horizon, budget);
    if count > u128::from(cap) {
        return Err(Error::SearchSpaceTooLarge { count, cap });
    }
    Ok(ScheduleEnumerator {
        next: Some(Schedule::last(horizon, budget)?.mask().to_vec()),
        remaining: count,
    })
}

/// How a schedule is scored. Both report the expected final "Yes" fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Objective {
    ExactMarkov(ExactCaps),
    Ode(OdeSettings),
}

impl Default for Objective {
    fn default() -> Self {
        Objective::ExactMarkov(ExactCaps::default())
    }
}

impl Objective {
    pub fn evaluate(&self, config: &SimConfig) -> Result<f64> {
        match self {
            Objective::ExactMarkov(caps) => exact_final_expectation(config, caps),
            Objective::Ode(settings) => Ok(1.0 - integrate_final(config, settings)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleSearchResult {
    pub best_schedule: Schedule,
    /// Expected final "Yes" fraction of the best schedule.
    pub best_value: f64,
    pub evaluated_count: usize,
    pub value_of_last: f64,
    pub value_of_first: f64,
    /// 1-based ranks, ties ordered by enumeration position.
    pub rank_of_last: usize,
    pub rank_of_first: usize,
    /// Which named strategy the same objective prefers, with a 1e-12 tie band.
    pub named_winner: Winner,
    /// Set when the mean-field ODE prefers the other named strategy.
    pub contradicts_mean_field: bool,
}

fn rank(values: &[f64], index: usize) -> usize {
    let v = values[index];
    let better = values.iter().filter(|&&x| x > v).count();
    let tied_before = values[..index].iter().filter(|&&x| x == v).count();
    better + tied_before + 1
}

/// Scores every schedule with `budget` influenced slots.
pub fn best_schedule_exact(
    scenario: &Scenario,
    objective: &Objective,
    schedule_cap: u64,
) -> Result<ScheduleSearchResult> {
    if let Objective::ExactMarkov(caps) = objective {
        caps.check(scenario.population, scenario.horizon)?;
    }
    let schedules: Vec<Schedule> = enumerate_schedules(scenario.horizon, scenario.budget, schedule_cap)?.collect();
    let values = schedules
        .par_iter()
        .map(|s| objective.evaluate(&scenario.config_with(s.clone())?))
        .collect::<Result<Vec<f64>>>()?;

    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let last_idx = 0;
    let first_idx = schedules.len() - 1;
    let value_of_last = values[last_idx];
    let value_of_first = values[first_idx];
    // Larger "Yes" is better, so the "No" difference is the negated gap.
    let named_winner = Winner::from_difference(value_of_first - value_of_last, SWAP_TIE_TOL);

    let settings = OdeSettings::default();
    let ode_no = |s: Strategy| integrate_final(&scenario.config(s), &settings);
    let mean_field = Winner::from_difference(ode_no(Strategy::Last)? - ode_no(Strategy::First)?, SWAP_TIE_TOL);
    let contradicts_mean_field = matches!(
        (named_winner, mean_field),
        (Winner::Last, Winner::First) | (Winner::First, Winner::Last)
    );

    Ok(ScheduleSearchResult {
        best_schedule: schedules[best].clone(),
        best_value: values[best],
        evaluated_count: schedules.len(),
        value_of_last,
        value_of_first,
        rank_of_last: rank(&values, last_idx),
        rank_of_first: rank(&values, first_idx),
        named_winner,
        contradicts_mean_field,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapOrdering {
    /// Moving the influenced slot one step later raises the final "Yes".
    SwappedBetter,
    OriginalBetter,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapComparison {
    pub ordering: SwapOrdering,
    pub original_value: f64,
    pub swapped_value: f64,
}

/// Compares `schedule` with the variant whose slots `slot` (influenced) and
/// `slot + 1` (uninfluenced) are exchanged.
pub fn swap_compare(
    scenario: &Scenario,
    schedule: &Schedule,
    slot: usize,
    objective: &Objective,
) -> Result<SwapComparison> {
    let swapped = schedule.swapped(slot)?;
    let original_value = objective.evaluate(&scenario.config_with(schedule.clone())?)?;
    let swapped_value = objective.evaluate(&scenario.config_with(swapped)?)?;
    let gap = swapped_value - original_value;
    let ordering = if gap > SWAP_TIE_TOL {
        SwapOrdering::SwappedBetter
    } else if gap < -SWAP_TIE_TOL {
        SwapOrdering::OriginalBetter
    } else {
        SwapOrdering::Tie
    };
    Ok(SwapComparison {
        ordering,
        original_value,
        swapped_value,
    })
}

/// Greedy descent: apply the first improving adjacent swap until none is
/// left. Every swap moves influence later, so this terminates. Returns the
/// final schedule and the number of swaps made.
pub fn improve_by_swaps(
    scenario: &Scenario,
    start: Schedule,
    objective: &Objective,
) -> Result<(Schedule, usize)> {
    let mut current = start;
    let mut swaps = 0;
    'outer: loop {
        let mask = current.mask().to_vec();
        for t in 0..mask.len().saturating_sub(1) {
            if mask[t] && !mask[t + 1] {
                let cmp = swap_compare(scenario, &current, t, objective)?;
                if cmp.ordering == SwapOrdering::SwappedBetter {
                    current = current.swapped(t)?;
                    swaps += 1;
                    continue 'outer;
                }
            }
        }
        return Ok((current, swaps));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BehaviorSpec, Conduct, InfluenceSpec};
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    fn masks(horizon: usize, budget: usize) -> Vec<String> {
        enumerate_schedules(horizon, budget, DEFAULT_SCHEDULE_CAP)
            .unwrap()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(masks(3, 3), vec!["111"]);
        assert_eq!(masks(4, 1), vec!["0001", "0010", "0100", "1000"]);
        assert_eq!(masks(12, 4).len(), 495);
        assert_eq!(masks(5, 0), vec!["00000"]);
        assert_eq!(masks(0, 0), vec![""]);
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(
            enumerate_schedules(40, 20, DEFAULT_SCHEDULE_CAP),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
        assert_eq!(binomial(40, 20), 137_846_528_820);
        assert!(enumerate_schedules(17, 8, 24_310).is_ok());
        assert!(enumerate_schedules(17, 8, 24_309).is_err());
    }

    proptest! {
        #[test]
        fn enumeration_is_complete_and_sorted(horizon in 0usize..11, k in 0usize..11) {
            let budget = k.min(horizon);
            let all = masks(horizon, budget);
            prop_assert_eq!(all.len() as u128, binomial(horizon, budget));
            prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(all.iter().all(|m| m.matches('1').count() == budget));
            if horizon > 0 {
                prop_assert_eq!(&all[0], &Schedule::last(horizon, budget).unwrap().to_string());
                prop_assert_eq!(all.last().unwrap(), &Schedule::first(horizon, budget).unwrap().to_string());
            }
        }
    }

    fn scenario(lambda: f64, p: f64, q: f64, pt: f64, qt: f64, d0: f64) -> Scenario {
        Scenario::new(
            20,
            12,
            4,
            BehaviorSpec::hybrid_sc(p, q, lambda).unwrap(),
            InfluenceSpec::new(pt, qt).unwrap(),
            d0,
        )
        .unwrap()
    }

    #[test]
    fn influence_equal_to_nature_makes_schedules_identical() {
        let s = Scenario::new(
            10,
            6,
            2,
            BehaviorSpec::pure(Conduct::Strong, 0.3, 0.3).unwrap(),
            InfluenceSpec::new(0.3, 0.3).unwrap(),
            0.7,
        )
        .unwrap();
        let r = best_schedule_exact(&s, &Objective::default(), DEFAULT_SCHEDULE_CAP).unwrap();
        assert_eq!(r.evaluated_count, 15);
        assert!((r.value_of_last - r.value_of_first).abs() < 1e-12);
        assert!((r.best_value - r.value_of_last).abs() < 1e-12);
        assert_eq!(r.named_winner, Winner::Tie);
    }

    #[test]
    fn pq_equal_search_picks_last() {
        let s = scenario(0.5, 0.5, 0.5, 0.1, 0.9, 0.5);
        let r = best_schedule_exact(&s, &Objective::default(), DEFAULT_SCHEDULE_CAP).unwrap();
        assert_eq!(r.evaluated_count, 495);
        assert_eq!(r.best_schedule.as_strategy(), Some(Strategy::Last));
        assert_eq!(r.rank_of_last, 1);
        assert_eq!(r.rank_of_first, 495);
        assert!(r.best_value >= r.value_of_last.max(r.value_of_first));
        assert!(!r.contradicts_mean_field);
    }

    #[test]
    fn yes_sticky_search_ranks_first_above_last() {
        let s = scenario(0.1, 0.1, 0.9, 0.0, 1.0, 0.8);
        let r = best_schedule_exact(&s, &Objective::default(), DEFAULT_SCHEDULE_CAP).unwrap();
        assert!(r.rank_of_first < r.rank_of_last);
        assert!(r.value_of_first > r.value_of_last);
        assert_eq!(r.named_winner, Winner::First);
    }

    #[test]
    fn swap_orderings() {
        let s = scenario(0.5, 0.5, 0.5, 0.1, 0.9, 0.5);
        let sched = Schedule::first(12, 4).unwrap();
        for obj in [Objective::default(), Objective::Ode(OdeSettings::default())] {
            let cmp = swap_compare(&s, &sched, 3, &obj).unwrap();
            assert_eq!(cmp.ordering, SwapOrdering::SwappedBetter);
        }
        let flat = scenario(0.0, 0.5, 0.5, 0.1, 0.9, 0.5);
        let cmp = swap_compare(&flat, &sched, 3, &Objective::Ode(OdeSettings::default())).unwrap();
        assert_eq!(cmp.ordering, SwapOrdering::Tie);
        assert!(matches!(
            swap_compare(&s, &sched, 0, &Objective::default()),
            Err(Error::InvalidSwapSite { .. })
        ));
    }

    #[test]
    fn greedy_swaps_reach_last() {
        let s = scenario(0.5, 0.5, 0.5, 0.1, 0.9, 0.5);
        for start in ["111100000000", "010101010000", "100000000111"] {
            let mask = start.chars().map(|c| c == '1').collect();
            let (end, swaps) = improve_by_swaps(&s, Schedule::from_mask(mask), &Objective::default()).unwrap();
            assert_eq!(end.as_strategy(), Some(Strategy::Last), "from {start}");
            assert!(swaps > 0);
        }
    }
}
