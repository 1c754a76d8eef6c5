//! Experiment orchestration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use voter_core::compare::{compare_exact, compare_mean_field, compare_monte_carlo, compare_ode};
use voter_core::concentration::{concentration_check, ConcentrationReport};
use voter_core::ode::{
    closed_form_report, crossover_lambda, integrate, integrate_final, CrossoverOutcome, Method, OdeSettings,
    StrategyDiffReport,
};
use voter_core::sim::{simulate_ensemble, simulate_once};
use voter_core::strategy::{best_schedule_exact, improve_by_swaps, Objective, ScheduleSearchResult};
use voter_core::{Scenario, Schedule, Strategy, Trajectory};

use crate::config::{ExperimentConfig, ExperimentKind, SweepAxis};
use crate::emit::{Artifact, Cell, Table};
use crate::error::{CliError, CliResult};
use crate::presets::{default_grid, preset, FigurePreset, TRAJECTORY_STRIDE};

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub cap_states: Option<u32>,
    pub cap_schedules: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> CliResult<()> {
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        if let Some(r) = self.reps {
            cfg.n_reps = r;
        }
        if let Some(c) = self.cap_states {
            cfg.caps.max_states = c;
        }
        if let Some(c) = self.cap_schedules {
            cfg.caps.max_schedules = c;
        }
        cfg.validate()
    }
}

/// Independent seed for stream `index` of a run (SplitMix64 finalizer), so
/// that ensembles of different sweep points never share replication seeds.
pub fn stream_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig) -> CliResult<Artifact> {
    if let Some(declared) = cfg.experiment {
        if declared != kind {
            return Err(CliError::Config(format!(
                "config declares experiment `{}` but `{}` was requested",
                declared.name(),
                kind.name()
            )));
        }
    }
    match kind {
        ExperimentKind::Simulate => simulate(cfg),
        ExperimentKind::Ode => ode(cfg),
        ExperimentKind::Compare => compare(cfg),
        ExperimentKind::Crossover => crossover(cfg),
        ExperimentKind::Bruteforce => bruteforce(cfg),
        ExperimentKind::Concentration => concentration(cfg),
    }
}

fn trajectory_table(tr: &Trajectory) -> Table {
    let mut table = Table::new(&["t", "delta_N"]);
    for (&t, &v) in tr.times.iter().zip(&tr.values) {
        table.push(vec![Cell::Int(t as u64), Cell::Num(v)]);
    }
    table
}

fn simulate(cfg: &ExperimentConfig) -> CliResult<Artifact> {
    let sim = cfg.sim_config()?;
    if cfg.n_reps == 1 {
        let tr = simulate_once(&sim, cfg.base_seed);
        return Artifact::new("trajectory", trajectory_table(&tr), &tr);
    }
    let stats = simulate_ensemble(&sim, cfg.n_reps, cfg.base_seed)?;
    Artifact::new("ensemble", trajectory_table(&stats.mean_trajectory), &stats)
}

fn ode(cfg: &ExperimentConfig) -> CliResult<Artifact> {
    let tr = integrate(&cfg.sim_config()?, &OdeSettings::default())?;
    Artifact::new("trajectory", trajectory_table(&tr), &tr)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub report: StrategyDiffReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub axis: Option<SweepAxis>,
    pub rows: Vec<SweepRow>,
}

fn compare_one(cfg: &ExperimentConfig, scenario: &Scenario, index: u64) -> CliResult<StrategyDiffReport> {
    let settings = OdeSettings::default();
    Ok(match cfg.method {
        None => compare_mean_field(scenario, &settings)?,
        Some(Method::ClosedForm) => closed_form_report(scenario)?,
        Some(Method::OdeNumeric) => compare_ode(scenario, &settings)?,
        Some(Method::ExactMarkov) => compare_exact(scenario, &cfg.caps.exact())?,
        Some(Method::MonteCarlo) => compare_monte_carlo(scenario, cfg.n_reps, stream_seed(cfg.base_seed, index))?,
    })
}

fn compare(cfg: &ExperimentConfig) -> CliResult<Artifact> {
    let base = cfg.scenario()?;
    let points: Vec<f64> = match &cfg.sweep {
        Some(s) => s.grid.clone(),
        None => vec![base.behavior.mix()],
    };
    let run = |(i, &v): (usize, &f64)| -> CliResult<SweepRow> {
        let scenario = base.with_mix(v)?;
        Ok(SweepRow {
            sweep_value: v,
            report: compare_one(cfg, &scenario, i as u64)?,
        })
    };
    let rows = if cfg.method == Some(Method::MonteCarlo) {
        points.iter().enumerate().map(run).collect::<CliResult<Vec<_>>>()?
    } else {
        points.par_iter().enumerate().map(run).collect::<CliResult<Vec<_>>>()?
    };

    let mut table = Table::new(&["sweep_value", "value_SL", "value_SF", "diff", "winner", "method"]);
    for row in &rows {
        let r = &row.report;
        table.push(vec![
            Cell::Num(row.sweep_value),
            Cell::Num(r.delta_last_final),
            Cell::Num(r.delta_first_final),
            Cell::Num(r.difference),
            Cell::Text(r.winner.to_string()),
            Cell::Text(r.method.to_string()),
        ]);
    }
    let data = ComparisonTable {
        axis: cfg.sweep.as_ref().map(|s| s.axis),
        rows,
    };
    Artifact::new("comparison", table, &data)
}

fn crossover(cfg: &ExperimentConfig) -> CliResult<Artifact> {
    let outcome = crossover_lambda(&cfg.scenario()?)?;
    let mut table = Table::new(&["lambda_star", "outcome"]);
    match outcome {
        CrossoverOutcome::Crossover { lambda } => {
            table.push(vec![Cell::Num(lambda), Cell::Text("crossover".into())])
        }
        CrossoverOutcome::NoCrossover => {
            table.push(vec![Cell::Text(String::new()), Cell::Text("no_crossover".into())])
        }
    }
    Artifact::new("crossover", table, &outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteforceReport {
    pub search: ScheduleSearchResult,
    pub best_mask: String,
    /// Greedy adjacent-swap descent started from S_F.
    pub greedy_mask: String,
    pub greedy_swaps: usize,
}

fn bruteforce(cfg: &ExperimentConfig) -> CliResult<Artifact> {
    let scenario = cfg.scenario()?;
    let objective = Objective::ExactMarkov(cfg.caps.exact());
    let search = best_schedule_exact(&scenario, &objective, cfg.caps.max_schedules)?;
    let start = Schedule::first(scenario.horizon, scenario.budget)?;
    let (greedy, swaps) = improve_by_swaps(&scenario, start, &objective)?;
    let report = BruteforceReport {
        best_mask: search.best_schedule.to_string(),
        greedy_mask: greedy.to_string(),
        greedy_swaps: swaps,
        search,
    };
    let s = &report.search;
    let mut table = Table::new(&[
        "best_schedule",
        "best_value",
        "evaluated_count",
        "value_SL",
        "value_SF",
        "rank_SL",
        "rank_SF",
        "named_winner",
        "contradicts_mean_field",
        "greedy_schedule",
        "greedy_swaps",
    ]);
    table.push(vec![
        Cell::Text(report.best_mask.clone()),
        Cell::Num(s.best_value),
        Cell::Int(s.evaluated_count as u64),
        Cell::Num(s.value_of_last),
        Cell::Num(s.value_of_first),
        Cell::Int(s.rank_of_last as u64),
        Cell::Int(s.rank_of_first as u64),
        Cell::Text(s.named_winner.to_string()),
        Cell::Bool(s.contradicts_mean_field),
        Cell::Text(report.greedy_mask.clone()),
        Cell::Int(swaps as u64),
    ]);
    Artifact::new("schedule_search", table, &report)
}

fn concentration(cfg: &ExperimentConfig) -> CliResult<Artifact> {
    let sim = cfg.sim_config()?.with_record_stride(usize::MAX);
    // Validate the model before paying for the ensemble.
    voter_core::concentration::approx_solution(&sim)?;
    let stats = simulate_ensemble(&sim, cfg.n_reps, cfg.base_seed)?;
    let reports = cfg
        .epsilons
        .iter()
        .map(|&e| concentration_check(&sim, &stats, e))
        .collect::<Result<Vec<ConcentrationReport>, _>>()?;
    let mut table = Table::new(&["epsilon", "empirical_tail", "analytic_bound", "pass"]);
    for r in &reports {
        table.push(vec![
            Cell::Num(r.epsilon),
            Cell::Num(r.empirical_tail),
            Cell::Num(r.analytic_bound),
            Cell::Bool(r.pass),
        ]);
    }
    Artifact::new("concentration", table, &reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub x: f64,
    pub mean_yes_last: f64,
    pub mean_yes_first: f64,
    pub ode_yes_last: f64,
    pub ode_yes_first: f64,
    /// Standard errors of the final Monte Carlo means.
    pub se_last: f64,
    pub se_first: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureData {
    pub preset: FigurePreset,
    pub n_reps: usize,
    pub base_seed: u64,
    /// `t` for the time-series figure, the swept weight otherwise.
    pub x_label: String,
    pub rows: Vec<FigureRow>,
}

/// Monte Carlo ensembles and the mean-field ODE for both named strategies.
pub fn reproduce_figure(figure: u8, n_reps: usize, base_seed: u64) -> CliResult<Artifact> {
    if n_reps == 0 {
        return Err(CliError::Config("n_reps must be at least 1".into()));
    }
    let preset = preset(figure)?;
    let settings = OdeSettings::default();
    let (x_label, rows) = match preset.axis {
        None => {
            let scenario = preset.scenario(preset.mix.unwrap_or(0.5))?;
            let run = |strategy: Strategy, stream: u64| -> CliResult<(Trajectory, Vec<f64>, Trajectory)> {
                let cfg = scenario.config(strategy).with_record_stride(TRAJECTORY_STRIDE);
                let stats = simulate_ensemble(&cfg, n_reps, stream_seed(base_seed, stream))?;
                let ode = integrate(&cfg, &settings)?;
                let se = vec![stats.standard_error(); stats.mean_trajectory.len()];
                Ok((stats.mean_trajectory, se, ode))
            };
            let (mc_l, se_l, ode_l) = run(Strategy::Last, 0)?;
            let (mc_f, se_f, ode_f) = run(Strategy::First, 1)?;
            let rows = (0..mc_l.len())
                .map(|i| FigureRow {
                    x: mc_l.times[i] as f64,
                    mean_yes_last: 1.0 - mc_l.values[i],
                    mean_yes_first: 1.0 - mc_f.values[i],
                    ode_yes_last: 1.0 - ode_l.values[i],
                    ode_yes_first: 1.0 - ode_f.values[i],
                    se_last: se_l[i],
                    se_first: se_f[i],
                })
                .collect();
            ("t".to_string(), rows)
        }
        Some(axis) => {
            let mut rows = Vec::new();
            for (k, &x) in default_grid().iter().enumerate() {
                let scenario = preset.scenario(x)?;
                let k = k as u64;
                let stats = |strategy: Strategy, stream: u64| {
                    simulate_ensemble(
                        &scenario.config(strategy).with_record_stride(usize::MAX),
                        n_reps,
                        stream_seed(base_seed, stream),
                    )
                };
                let last = stats(Strategy::Last, 2 * k)?;
                let first = stats(Strategy::First, 2 * k + 1)?;
                let ode = |strategy: Strategy| integrate_final(&scenario.config(strategy), &settings);
                rows.push(FigureRow {
                    x,
                    mean_yes_last: last.mean_final_yes(),
                    mean_yes_first: first.mean_final_yes(),
                    ode_yes_last: 1.0 - ode(Strategy::Last)?,
                    ode_yes_first: 1.0 - ode(Strategy::First)?,
                    se_last: last.standard_error(),
                    se_first: first.standard_error(),
                });
            }
            (axis.name().to_string(), rows)
        }
    };
    let mut table = Table::new(&[&x_label, "mean_yes_SL", "mean_yes_SF", "ode_yes_SL", "ode_yes_SF"]);
    for r in &rows {
        let x = if preset.axis.is_none() { Cell::Int(r.x as u64) } else { Cell::Num(r.x) };
        table.push(vec![
            x,
            Cell::Num(r.mean_yes_last),
            Cell::Num(r.mean_yes_first),
            Cell::Num(r.ode_yes_last),
            Cell::Num(r.ode_yes_first),
        ]);
    }
    let data = FigureData {
        preset: *preset,
        n_reps,
        base_seed,
        x_label,
        rows,
    };
    Artifact::new(format!("figure_{figure}"), table, &data)
}
