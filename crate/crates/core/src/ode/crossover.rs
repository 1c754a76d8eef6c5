//! Mixing-weight crossover for Model I and the short-horizon predicate for
//! Model II.

use serde::{Deserialize, Serialize};

use super::closed_form::{closed_form_difference, HorizonRegime, Winner};
use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::model::{check_probability, BehaviorKind};

const GRID_POINTS: usize = 1000;
const LAMBDA_LO: f64 = 1e-6;
const LAMBDA_HI: f64 = 1.0 - 1e-6;
const BISECTION_TOL: f64 = 1e-6;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CrossoverOutcome {
    /// S_F wins below `lambda`, S_L above (or the reverse; check the sign).
    Crossover { lambda: f64 },
    NoCrossover,
}

/// The `lambda` where `delta_L(T) - delta_F(T)` changes sign, searched on a
/// 1000-point grid over `[1e-6, 1 - 1e-6]` and refined by bisection.
pub fn crossover_lambda(scenario: &Scenario) -> Result<CrossoverOutcome> {
    if scenario.behavior.kind() != BehaviorKind::HybridSC {
        return Err(Error::ModelMismatch(
            "crossover search needs the hybrid S/C model".into(),
        ));
    }
    scenario.influence.require_rational()?;
    let diff = |lambda: f64| closed_form_difference(&scenario.with_mix(lambda)?);

    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| LAMBDA_LO + (LAMBDA_HI - LAMBDA_LO) * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let values = grid.iter().map(|&l| diff(l)).collect::<Result<Vec<_>>>()?;

    let mut brackets = Vec::new();
    let mut prev: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        if let Some((j, pv)) = prev {
            if pv.signum() != v.signum() {
                brackets.push((j, i));
            }
        }
        prev = Some((i, v));
    }
    match brackets.len() {
        0 => Ok(CrossoverOutcome::NoCrossover),
        1 => {
            let (i, j) = brackets[0];
            let (mut lo, mut hi) = (grid[i], grid[j]);
            let lo_sign = values[i].signum();
            while hi - lo > BISECTION_TOL {
                let mid = 0.5 * (lo + hi);
                let v = diff(mid)?;
                if v == 0.0 {
                    return Ok(CrossoverOutcome::Crossover { lambda: mid });
                }
                if v.signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(CrossoverOutcome::Crossover { lambda: 0.5 * (lo + hi) })
        }
        count => Err(Error::MultipleSignChanges { count }),
    }
}

/// Short-horizon Model II winner from the initial state alone; S_L for long
/// horizons.
pub fn model2_threshold(
    delta0: f64,
    p: f64,
    q: f64,
    mu: f64,
    regime: HorizonRegime,
) -> Result<Winner> {
    check_probability("delta0", delta0)?;
    check_probability("p", p)?;
    check_probability("q", q)?;
    check_probability("mu", mu)?;
    if delta0 >= 1.0 {
        return Err(Error::InvalidParameter("delta0 must be below 1".into()));
    }
    if regime == HorizonRegime::Long {
        return Ok(Winner::Last);
    }
    let d2 = delta0 * delta0;
    let tie_p = d2 * q / (1.0 - d2);
    if mu > 0.5 && (p - tie_p).abs() <= TIE_TOL {
        return Ok(Winner::Tie);
    }
    if mu > 0.5 && p < tie_p && mu > d2 / (2.0 * d2 - p / (p + q)) {
        return Ok(Winner::First);
    }
    Ok(Winner::Last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BehaviorSpec, InfluenceSpec};

    fn scenario(p: f64, q: f64, pt: f64, qt: f64, m: u32, t: usize) -> Scenario {
        Scenario::with_fraction(
            m,
            t,
            0.4,
            BehaviorSpec::hybrid_sc(p, q, 0.5).unwrap(),
            InfluenceSpec::new(pt, qt).unwrap(),
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn p_greater_q_has_no_crossover() {
        let s = scenario(0.8, 0.4, 0.1, 0.9, 1000, 1000);
        assert_eq!(crossover_lambda(&s).unwrap(), CrossoverOutcome::NoCrossover);
    }

    #[test]
    fn p_equal_q_has_no_crossover() {
        let s = scenario(0.5, 0.5, 0.1, 0.9, 1000, 1000);
        assert_eq!(crossover_lambda(&s).unwrap(), CrossoverOutcome::NoCrossover);
    }

    #[test]
    fn fig4_crossover_value() {
        // Long-horizon crossover sits where the smaller root equals p~/(p~+q~).
        let s = scenario(0.4, 0.8, 0.1, 0.9, 1000, 1_000_000);
        let CrossoverOutcome::Crossover { lambda } = crossover_lambda(&s).unwrap() else {
            panic!("expected crossover");
        };
        let roots = crate::ode::quadratic_roots(&s.behavior.with_mix(lambda).unwrap(), 1000).unwrap();
        assert!((roots.a2 - 0.1).abs() < 1e-5, "{lambda} {}", roots.a2);
        assert!(lambda > 0.1 && lambda < 0.12);
    }

    #[test]
    fn irrational_influence_is_rejected() {
        let s = scenario(0.4, 0.8, 0.9, 0.1, 1000, 1000);
        assert!(matches!(crossover_lambda(&s), Err(Error::IrrationalInfluence { .. })));
    }

    #[test]
    fn wrong_model_is_rejected() {
        let s = scenario(0.4, 0.8, 0.1, 0.9, 1000, 1000)
            .with_behavior(BehaviorSpec::hybrid_cr(0.4, 0.8, 0.5).unwrap());
        assert!(matches!(crossover_lambda(&s), Err(Error::ModelMismatch(_))));
    }

    #[test]
    fn model2_predicate_examples() {
        let short = HorizonRegime::Short;
        // tie point: delta0 = 0.5 gives p* = q / 3.
        assert_eq!(model2_threshold(0.5, 0.3, 0.9, 0.8, short).unwrap(), Winner::Tie);
        assert_eq!(model2_threshold(0.5, 0.3, 0.9, 0.4, short).unwrap(), Winner::Last);
        // p < p*, mu above both thresholds.
        assert_eq!(model2_threshold(0.5, 0.05, 0.9, 0.9, short).unwrap(), Winner::First);
        // p > p*.
        assert_eq!(model2_threshold(0.5, 0.6, 0.9, 0.9, short).unwrap(), Winner::Last);
        assert_eq!(model2_threshold(0.5, 0.05, 0.9, 0.9, HorizonRegime::Long).unwrap(), Winner::Last);
        assert!(model2_threshold(1.0, 0.05, 0.9, 0.9, short).is_err());
        assert!(model2_threshold(0.5, 0.05, 1.9, 0.9, short).is_err());
    }
}
