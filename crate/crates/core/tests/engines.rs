//! Cross-checks between the Monte Carlo, exact and mean-field engines.

use voter_core::exact::{exact_final_expectation, ExactCaps};
use voter_core::ode::{integrate, integrate_final, OdeSettings};
use voter_core::sim::{simulate_ensemble, simulate_once};
use voter_core::strategy::{best_schedule_exact, improve_by_swaps, Objective, DEFAULT_SCHEDULE_CAP};
use voter_core::{BehaviorSpec, InfluenceSpec, Scenario, Schedule, Strategy};

fn scenario(m: u32, t: usize, b: BehaviorSpec, pt: f64, qt: f64, d0: f64) -> Scenario {
    Scenario::with_fraction(m, t, 0.4, b, InfluenceSpec::new(pt, qt).unwrap(), d0).unwrap()
}

#[test]
fn exact_mean_inside_monte_carlo_interval() {
    let cases = [
        (BehaviorSpec::hybrid_sc(0.8, 0.4, 0.5).unwrap(), Strategy::Last, 0.5),
        (BehaviorSpec::hybrid_cr(0.2, 0.9, 0.7).unwrap(), Strategy::First, 0.3),
        (BehaviorSpec::hybrid_sc(0.5, 0.5, 0.5).unwrap(), Strategy::Last, 0.9),
    ];
    for (i, (b, strategy, d0)) in cases.into_iter().enumerate() {
        let cfg = scenario(50, 100, b, 0.1, 0.9, d0).config(strategy).with_record_stride(usize::MAX);
        let exact = exact_final_expectation(&cfg, &ExactCaps::default()).unwrap();
        let mc = simulate_ensemble(&cfg, 10_000, 1000 + i as u64).unwrap();
        let z = (mc.mean_final_yes() - exact) / mc.standard_error();
        assert!(z.abs() <= 3.0, "case {i}: z = {z}");
    }
}

#[test]
fn exact_to_ode_gap_shrinks_with_population() {
    let b = BehaviorSpec::hybrid_sc(0.8, 0.4, 0.5).unwrap();
    let gaps: Vec<f64> = [100u32, 200, 400, 800]
        .iter()
        .map(|&m| {
            let cfg = scenario(m, 2 * m as usize, b, 0.1, 0.9, 0.5).config(Strategy::Last);
            let exact = 1.0 - exact_final_expectation(&cfg, &ExactCaps::default()).unwrap();
            let ode = integrate_final(&cfg, &OdeSettings::default()).unwrap();
            (exact - ode).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

/// Mean over runs of `sup_t |delta(t) - ode(t)|^2` on the Fig. 1 setting
/// (`T / M = 100`).
fn mean_sq_sup_gap(m: u32, reps: u64) -> f64 {
    let cfg = scenario(m, 100 * m as usize, BehaviorSpec::hybrid_sc(0.8, 0.4, 0.5).unwrap(), 0.1, 0.9, 0.5)
        .config(Strategy::Last);
    let ode = integrate(&cfg, &OdeSettings::default()).unwrap();
    let total: f64 = (0..reps)
        .map(|seed| {
            let path = simulate_once(&cfg, 77 + seed);
            let sup = path
                .values
                .iter()
                .zip(&ode.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            sup * sup
        })
        .sum();
    total / reps as f64
}

#[test]
fn monte_carlo_tracks_the_ode() {
    let coarse = mean_sq_sup_gap(1000, 40);
    let fine = mean_sq_sup_gap(4000, 40);
    assert!(fine <= 0.5 * coarse, "{fine} vs {coarse}");
    assert!(coarse < 0.01);
}

fn small(lambda: f64, p: f64, q: f64, pt: f64, qt: f64, d0: f64) -> Scenario {
    Scenario::new(20, 12, 4, BehaviorSpec::hybrid_sc(p, q, lambda).unwrap(), InfluenceSpec::new(pt, qt).unwrap(), d0)
        .unwrap()
}

// Golden values confirmed against 10^6-replication ensembles (|z| < 1).
const PQ_LAST: f64 = 0.574_197_5;
const PQ_FIRST: f64 = 0.560_593_522_202_231;
const STICKY_LAST: f64 = 0.411_552_192_928_881;
const STICKY_FIRST: f64 = 0.435_995_804_780_720;

#[test]
fn exhaustive_search_goldens() {
    let r = best_schedule_exact(&small(0.5, 0.5, 0.5, 0.1, 0.9, 0.5), &Objective::default(), DEFAULT_SCHEDULE_CAP)
        .unwrap();
    assert_eq!(r.best_schedule, Schedule::last(12, 4).unwrap());
    assert!((r.value_of_last - PQ_LAST).abs() < 1e-12);
    assert!((r.value_of_first - PQ_FIRST).abs() < 1e-12);
    assert_eq!((r.rank_of_last, r.rank_of_first), (1, 495));

    let r = best_schedule_exact(&small(0.1, 0.1, 0.9, 0.0, 1.0, 0.8), &Objective::default(), DEFAULT_SCHEDULE_CAP)
        .unwrap();
    assert_eq!(r.best_schedule, Schedule::first(12, 4).unwrap());
    assert!((r.value_of_last - STICKY_LAST).abs() < 1e-12);
    assert!((r.value_of_first - STICKY_FIRST).abs() < 1e-12);
    assert!(r.rank_of_first < r.rank_of_last);
}

#[test]
fn greedy_swaps_match_exhaustive_search_for_pq_equal() {
    for (lambda, p, d0) in [(0.5, 0.5, 0.5), (0.3, 0.2, 0.9), (0.9, 0.7, 0.1)] {
        let s = small(lambda, p, p, 0.1, 0.9, d0);
        let best = best_schedule_exact(&s, &Objective::default(), DEFAULT_SCHEDULE_CAP).unwrap().best_schedule;
        let (end, _) = improve_by_swaps(&s, Schedule::first(12, 4).unwrap(), &Objective::default()).unwrap();
        assert_eq!(end, best);
    }
}
