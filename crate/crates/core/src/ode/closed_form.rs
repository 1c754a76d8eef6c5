//! Closed-form mean-field solutions for Model I (hybrid S/C).
//!
//! Off influence the ODE is the Riccati equation
//! `d' = -(a / M) (d - A1)(d - A2)`, `a = (1 - lambda)(p - q)`, whose solution
//! satisfies `(d - A1)/(d - A2) = (d0 - A1)/(d0 - A2) * exp(-L t)` with the
//! signed rate `L = a (A1 - A2) / M`. The same `exp(-L (1 - b) T)` convention
//! is used for `p > q` (where `L > 0`) and `p < q` (where `L < 0`); the grouped
//! strategy difference is an exact identity under it.
//!
//! When `exp(-L t)` would overflow, expressions are rescaled by `exp(L t)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::model::{BehaviorKind, BehaviorSpec, InfluenceSpec};
use crate::schedule::Strategy;

pub const DEGENERACY_TOL: f64 = 1e-9;
pub const PQ_EQUAL_TOL: f64 = 1e-12;
const ROOT_RESIDUAL_TOL: f64 = 1e-10;
/// Winner threshold for deterministic (closed-form / ODE) differences.
pub const DETERMINISTIC_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winner {
    #[serde(rename = "S_L")]
    Last,
    #[serde(rename = "S_F")]
    First,
    Tie,
}

impl Winner {
    /// Smaller final "No" fraction wins. `difference` is `delta_L - delta_F`.
    pub fn from_difference(difference: f64, tol: f64) -> Self {
        if difference < -tol {
            Winner::Last
        } else if difference > tol {
            Winner::First
        } else {
            Winner::Tie
        }
    }
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Last => "S_L",
            Winner::First => "S_F",
            Winner::Tie => "Tie",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    OdeNumeric,
    ExactMarkov,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::OdeNumeric => "ode_numeric",
            Method::ExactMarkov => "exact_markov",
            Method::MonteCarlo => "monte_carlo",
        })
    }
}

/// Intermediate quantities of the Riccati closed form. Entries that overflow
/// `f64` are reported as `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormAux {
    pub a1: f64,
    pub a2: f64,
    /// Signed rate `L = (1 - lambda)(p - q)(A1 - A2) / M`.
    pub rate: f64,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub d3: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyDiffReport {
    pub delta_last_final: f64,
    pub delta_first_final: f64,
    /// `delta_L(T) - delta_F(T)`; negative means S_L wins.
    pub difference: f64,
    pub winner: Winner,
    pub method: Method,
    /// Standard error of `difference` for Monte Carlo reports.
    pub standard_error: Option<f64>,
    pub aux: Option<ClosedFormAux>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootCase {
    PGreaterQ,
    PLessQ,
    Degenerate,
}

/// Roots of the uninfluenced Model I drift, `A1 > A2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticRoots {
    pub a1: f64,
    pub a2: f64,
    /// `Delta = (lambda^2 (p+q)^2 + (1 - lambda^2)(p-q)^2) / M^2`.
    pub discriminant: f64,
    pub case: RootCase,
    /// Quadratic coefficient `(1 - lambda)(p - q)`.
    pub leading: f64,
    population: u32,
}

impl QuadraticRoots {
    /// `sqrt(M^2 Delta)`, equal to `|leading| (A1 - A2)`.
    pub fn scaled_sqrt_discriminant(&self) -> f64 {
        let m = f64::from(self.population);
        (m * m * self.discriminant).sqrt()
    }

    /// Signed rate `L`.
    pub fn rate(&self) -> f64 {
        self.leading * (self.a1 - self.a2) / f64::from(self.population)
    }
}

fn sc_params(behavior: &BehaviorSpec) -> Result<(f64, f64, f64)> {
    if behavior.kind() != BehaviorKind::HybridSC {
        return Err(Error::ModelMismatch(format!(
            "closed forms need the hybrid S/C model, got {:?}",
            behavior.kind()
        )));
    }
    Ok((behavior.p(), behavior.q(), behavior.mix()))
}

/// `M f(d) = a d^2 - (a - lambda (p+q)) d - lambda p`; the drift is `-f`.
fn scaled_quadratic(lambda: f64, p: f64, q: f64, d: f64) -> (f64, f64) {
    let a = (1.0 - lambda) * (p - q);
    let b = -(a - lambda * (p + q));
    let c = -lambda * p;
    let value = a * d * d + b * d + c;
    let scale = (a * d * d).abs() + (b * d).abs() + c.abs();
    (value, scale.max(1.0))
}

pub fn quadratic_roots(behavior: &BehaviorSpec, population: u32) -> Result<QuadraticRoots> {
    let (p, q, lambda) = sc_params(behavior)?;
    let m = f64::from(population);
    let leading = (1.0 - lambda) * (p - q);
    let scaled_disc = lambda * lambda * (p + q).powi(2) + (1.0 - lambda * lambda) * (p - q).powi(2);
    let discriminant = scaled_disc / (m * m);
    if is_degenerate(p, q, lambda) {
        return Ok(QuadraticRoots {
            a1: f64::NAN,
            a2: f64::NAN,
            discriminant,
            case: RootCase::Degenerate,
            leading,
            population,
        });
    }
    // Cancellation-free form: one root from -(b + sign(b) sqrt(disc)) / 2,
    // the other from the product of roots c / a.
    let b = -(leading - lambda * (p + q));
    let c = -lambda * p;
    let half = -0.5 * (b + b.signum() * scaled_disc.sqrt());
    let half = if half == 0.0 { -0.5 * scaled_disc.sqrt() } else { half };
    let r1 = half / leading;
    let r2 = c / half;
    let (a1, a2) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
    for root in [a1, a2] {
        let (value, scale) = scaled_quadratic(lambda, p, q, root);
        if value.abs() > ROOT_RESIDUAL_TOL * scale {
            return Err(Error::NumericalBlowup(format!(
                "root {root} leaves residual {value:e}"
            )));
        }
    }
    Ok(QuadraticRoots {
        a1,
        a2,
        discriminant,
        case: if p > q { RootCase::PGreaterQ } else { RootCase::PLessQ },
        leading,
        population,
    })
}

/// `p~/(p~+q~) + (d - p~/(p~+q~)) exp(-duration (p~+q~) / M)`.
pub fn closed_form_influence_phase(
    delta_start: f64,
    influence: &InfluenceSpec,
    duration: f64,
    population: u32,
) -> f64 {
    let total = influence.total_rate();
    if total == 0.0 {
        return delta_start;
    }
    let fixed = influence.fixed_point();
    fixed + (delta_start - fixed) * (-duration * total / f64::from(population)).exp()
}

fn influence_decay(scenario: &Scenario) -> f64 {
    (-(scenario.budget as f64) * scenario.influence.total_rate() / scenario.population_f64()).exp()
}

fn require_pq_equal(scenario: &Scenario) -> Result<(f64, f64)> {
    let (p, q, lambda) = sc_params(&scenario.behavior)?;
    if (p - q).abs() > PQ_EQUAL_TOL {
        return Err(Error::ModelMismatch(format!("p = {p} and q = {q} differ")));
    }
    Ok((p, lambda))
}

/// Final `delta_N` for `p = q` from the two-phase exponential solution.
pub fn closed_form_final_pq_equal(scenario: &Scenario, strategy: Strategy) -> Result<f64> {
    let (p, lambda) = require_pq_equal(scenario)?;
    let m = scenario.population_f64();
    let fixed = scenario.influence.fixed_point();
    let d0 = scenario.initial_delta();
    let natural_decay = (-2.0 * lambda * p * scenario.natural_slots() as f64 / m).exp();
    let forced_decay = influence_decay(scenario);
    let both = natural_decay * forced_decay;
    Ok(match strategy {
        Strategy::First => 0.5 + (fixed - 0.5) * natural_decay + (d0 - fixed) * both,
        Strategy::Last => fixed + (0.5 - fixed) * forced_decay + (d0 - 0.5) * both,
    })
}

/// S_L vs S_F for `p = q` via the product form
/// `delta_F - delta_L = (1/2 - p~/(p~+q~)) (1 - e^{-bT(p~+q~)/M}) (1 - e^{-2 lambda p T(1-b)/M})`.
pub fn strategy_diff_pq_equal(scenario: &Scenario) -> Result<StrategyDiffReport> {
    let (p, lambda) = require_pq_equal(scenario)?;
    let m = scenario.population_f64();
    let fixed = scenario.influence.fixed_point();
    let product = (0.5 - fixed)
        * -(-(scenario.budget as f64) * scenario.influence.total_rate() / m).exp_m1()
        * -(-2.0 * lambda * p * scenario.natural_slots() as f64 / m).exp_m1();
    let difference = -product;
    Ok(StrategyDiffReport {
        delta_last_final: closed_form_final_pq_equal(scenario, Strategy::Last)?,
        delta_first_final: closed_form_final_pq_equal(scenario, Strategy::First)?,
        difference,
        winner: Winner::from_difference(difference, DETERMINISTIC_TIE_TOL),
        method: Method::ClosedForm,
        standard_error: None,
        aux: None,
    })
}

fn nondegenerate_roots(scenario: &Scenario) -> Result<QuadraticRoots> {
    let roots = quadratic_roots(&scenario.behavior, scenario.population)?;
    if roots.case == RootCase::Degenerate {
        return Err(Error::DegenerateCase);
    }
    Ok(roots)
}

/// Riccati flow over `duration` slots from `rho`, in the form
/// `(A1 (rho - A2) - A2 (rho - A1) E) / ((rho - A2) - (rho - A1) E)`, `E = exp(-L t)`.
fn natural_flow(roots: &QuadraticRoots, rho: f64, duration: f64) -> Result<f64> {
    let (a1, a2) = (roots.a1, roots.a2);
    let x = -roots.rate() * duration;
    let (num, den) = if x <= 0.0 {
        let e = x.exp();
        (a1 * (rho - a2) - a2 * (rho - a1) * e, (rho - a2) - (rho - a1) * e)
    } else {
        let w = (-x).exp();
        (a1 * (rho - a2) * w - a2 * (rho - a1), (rho - a2) * w - (rho - a1))
    };
    if den == 0.0 {
        // Only reachable when rho sits on a fixed point and exp underflowed.
        return match rho {
            r if r == a2 => Ok(a2),
            r if r == a1 => Ok(a1),
            _ => Err(Error::NumericalBlowup(format!("D-denominator vanishes at rho = {rho}"))),
        };
    }
    let value = num / den;
    if !value.is_finite() {
        return Err(Error::NumericalBlowup(format!("natural flow from rho = {rho} is not finite")));
    }
    Ok(value)
}

/// Final `delta_N` for Model I with `p != q`.
pub fn closed_form_final_general(scenario: &Scenario, strategy: Strategy) -> Result<f64> {
    let roots = nondegenerate_roots(scenario)?;
    let d0 = scenario.initial_delta();
    let natural = scenario.natural_slots() as f64;
    let forced = scenario.budget as f64;
    let m = scenario.population;
    Ok(match strategy {
        Strategy::First => {
            let mid = closed_form_influence_phase(d0, &scenario.influence, forced, m);
            natural_flow(&roots, mid, natural)?
        }
        Strategy::Last => {
            let mid = natural_flow(&roots, d0, natural)?;
            closed_form_influence_phase(mid, &scenario.influence, forced, m)
        }
    })
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// S_L vs S_F for `p != q` via the grouped expression
/// `(1-Eb)[(pi - A2)(1 - E (A1-A2)^2/(D1 D2 D3))] - (1-Eb)[(A1-A2)/(D1 D2) (1 - E)]`
/// with `pi = p~/(p~+q~)`, `Eb = exp(-bT(p~+q~)/M)`, `E = exp(-L T (1-b))`.
pub fn strategy_diff_general(scenario: &Scenario) -> Result<StrategyDiffReport> {
    let roots = nondegenerate_roots(scenario)?;
    let (a1, a2) = (roots.a1, roots.a2);
    let gap = a1 - a2;
    let fixed = scenario.influence.fixed_point();
    let rho0 = scenario.initial_delta();
    let rho2 = closed_form_influence_phase(
        rho0,
        &scenario.influence,
        scenario.budget as f64,
        scenario.population,
    );
    let x = -roots.rate() * scenario.natural_slots() as f64;

    // D1 D2 D3 = N0 N2 with N = (rho - A2) - (rho - A1) E; rescaled by 1/E when E > 1.
    let (n0, n2, term1, term2_factor) = if x <= 0.0 {
        let e = x.exp();
        let n0 = (rho0 - a2) - (rho0 - a1) * e;
        let n2 = (rho2 - a2) - (rho2 - a1) * e;
        (n0, n2, e * gap * gap / (n0 * n2), (1.0 - e) / (n0 * n2))
    } else {
        let w = (-x).exp();
        let n0 = (rho0 - a2) * w - (rho0 - a1);
        let n2 = (rho2 - a2) * w - (rho2 - a1);
        (n0, n2, w * gap * gap / (n0 * n2), (w * w - w) / (n0 * n2))
    };
    if n0 == 0.0 || n2 == 0.0 {
        return Err(Error::NumericalBlowup("D1 or D2 vanishes".into()));
    }
    let term2 = gap * (rho0 - a2) * (rho2 - a2) * term2_factor;
    let one_minus_eb = -(-(scenario.budget as f64) * scenario.influence.total_rate()
        / scenario.population_f64())
    .exp_m1();
    let difference = one_minus_eb * (fixed - a2) * (1.0 - term1) - one_minus_eb * term2;
    if !difference.is_finite() {
        return Err(Error::NumericalBlowup("grouped difference is not finite".into()));
    }

    let e = x.exp();
    let d1 = 1.0 - (rho0 - a1) / (rho0 - a2) * e;
    let d2 = 1.0 - (rho2 - a1) / (rho2 - a2) * e;
    Ok(StrategyDiffReport {
        delta_last_final: closed_form_final_general(scenario, Strategy::Last)?,
        delta_first_final: closed_form_final_general(scenario, Strategy::First)?,
        difference,
        winner: Winner::from_difference(difference, DETERMINISTIC_TIE_TOL),
        method: Method::ClosedForm,
        standard_error: None,
        aux: Some(ClosedFormAux {
            a1,
            a2,
            rate: roots.rate(),
            d1: finite(d1),
            d2: finite(d2),
            d3: finite((rho2 - a2) * (rho0 - a2)),
        }),
    })
}

/// Natural phase with the quadratic term dropped: relaxation at rate
/// `lambda (p+q) / M` towards `p / (p+q)`. Exact at `lambda = 1` and `p = q`.
fn linear_natural_flow(scenario: &Scenario, rho: f64) -> f64 {
    let (p, q, lambda) = (scenario.behavior.p(), scenario.behavior.q(), scenario.behavior.mix());
    let total = lambda * (p + q);
    if total == 0.0 {
        return rho;
    }
    let fixed = p / (p + q);
    let decay = (-(scenario.natural_slots() as f64) * total / scenario.population_f64()).exp();
    fixed + (rho - fixed) * decay
}

fn linear_final(scenario: &Scenario, strategy: Strategy) -> f64 {
    let d0 = scenario.initial_delta();
    let forced = scenario.budget as f64;
    let m = scenario.population;
    match strategy {
        Strategy::First => {
            linear_natural_flow(scenario, closed_form_influence_phase(d0, &scenario.influence, forced, m))
        }
        Strategy::Last => {
            closed_form_influence_phase(linear_natural_flow(scenario, d0), &scenario.influence, forced, m)
        }
    }
}

fn is_degenerate(p: f64, q: f64, lambda: f64) -> bool {
    (p - q).abs() <= DEGENERACY_TOL || lambda >= 1.0 - DEGENERACY_TOL
}

/// Final `delta_N` for any Model I scenario: the `p = q` solution, the
/// linear solution when the quadratic coefficient is within tolerance of 0,
/// and the Riccati solution otherwise.
pub fn closed_form_final(scenario: &Scenario, strategy: Strategy) -> Result<f64> {
    let (p, q, lambda) = sc_params(&scenario.behavior)?;
    if (p - q).abs() <= PQ_EQUAL_TOL {
        closed_form_final_pq_equal(scenario, strategy)
    } else if is_degenerate(p, q, lambda) {
        Ok(linear_final(scenario, strategy))
    } else {
        closed_form_final_general(scenario, strategy)
    }
}

/// Closed-form comparison for any Model I scenario, routed like
/// [`closed_form_final`].
pub fn closed_form_report(scenario: &Scenario) -> Result<StrategyDiffReport> {
    let (p, q, lambda) = sc_params(&scenario.behavior)?;
    if (p - q).abs() <= PQ_EQUAL_TOL {
        strategy_diff_pq_equal(scenario)
    } else if is_degenerate(p, q, lambda) {
        Ok(report_from_finals(
            linear_final(scenario, Strategy::Last),
            linear_final(scenario, Strategy::First),
        ))
    } else {
        match strategy_diff_general(scenario) {
            // A phase starting on a root makes the grouped form 0/0; the
            // finals themselves stay well defined.
            Err(Error::NumericalBlowup(_)) => Ok(report_from_finals(
                closed_form_final_general(scenario, Strategy::Last)?,
                closed_form_final_general(scenario, Strategy::First)?,
            )),
            other => other,
        }
    }
}

fn report_from_finals(last: f64, first: f64) -> StrategyDiffReport {
    let difference = last - first;
    StrategyDiffReport {
        delta_last_final: last,
        delta_first_final: first,
        difference,
        winner: Winner::from_difference(difference, DETERMINISTIC_TIE_TOL),
        method: Method::ClosedForm,
        standard_error: None,
        aux: None,
    }
}

/// Closed-form `delta_L(T) - delta_F(T)` for any Model I scenario.
pub fn closed_form_difference(scenario: &Scenario) -> Result<f64> {
    Ok(closed_form_report(scenario)?.difference)
}

/// Horizon regimes of the leading-order analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonRegime {
    /// `T = o(M)`: almost nobody is reached by the influence.
    Short,
    /// `T = omega(M)`: everybody is reached many times.
    Long,
}

/// Leading-order approximation of `delta_L(T) - delta_F(T)` in a horizon
/// regime. Only the sign is meaningful.
pub fn asymptotic_diff(scenario: &Scenario, regime: HorizonRegime) -> Result<f64> {
    let roots = nondegenerate_roots(scenario)?;
    let (a1, a2) = (roots.a1, roots.a2);
    let gap = a1 - a2;
    let d0 = scenario.initial_delta();
    let x = scenario.natural_slots() as f64 / scenario.population_f64()
        * roots.scaled_sqrt_discriminant();
    Ok(match (roots.case, regime) {
        (RootCase::PGreaterQ, HorizonRegime::Long) => -a1,
        (RootCase::PGreaterQ, HorizonRegime::Short) => {
            let psi = gap * gap / (gap + x * (d0 - a1)).powi(2);
            x * psi / gap * (a1 * a2 - d0 * d0)
        }
        (RootCase::PLessQ, HorizonRegime::Long) => a2 * ((-x).exp() * (1.0 - a2 / a1) - 1.0),
        (RootCase::PLessQ, HorizonRegime::Short) => {
            let psi = gap * gap / (gap - x * (d0 - a1)).powi(2);
            x * psi / gap * (d0 * d0 - a1 * a2)
        }
        (RootCase::Degenerate, _) => unreachable!("filtered above"),
    })
}
