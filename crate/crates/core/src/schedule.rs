use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two canonical influence strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// S_F: influence the first `budget` slots.
    #[serde(rename = "S_F")]
    First,
    /// S_L: influence the last `budget` slots.
    #[serde(rename = "S_L")]
    Last,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::First => "S_F",
            Strategy::Last => "S_L",
        })
    }
}

/// Budget `floor(b T)` for a fraction `b` in (0, 1]. A relative slack of
/// 1e-9 absorbs representation error such as `0.29 * 100 = 28.999...`.
pub fn budget_from_fraction(horizon: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "budget fraction must be in (0, 1], got {fraction}"
        )));
    }
    let exact = fraction * horizon as f64;
    Ok(((exact + 1e-9 * exact.max(1.0)).floor() as usize).min(horizon))
}

/// Maximal run of slots with the same influence state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase {
    pub start: usize,
    pub len: usize,
    pub influenced: bool,
}

/// Which of the `horizon` slots are influenced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Schedule {
    mask: Vec<bool>,
}

impl Schedule {
    pub fn from_mask(mask: Vec<bool>) -> Self {
        Self { mask }
    }

    pub fn first(horizon: usize, budget: usize) -> Result<Self> {
        Self::for_strategy(Strategy::First, horizon, budget)
    }

    pub fn last(horizon: usize, budget: usize) -> Result<Self> {
        Self::for_strategy(Strategy::Last, horizon, budget)
    }

    pub fn for_strategy(strategy: Strategy, horizon: usize, budget: usize) -> Result<Self> {
        if budget > horizon {
            return Err(Error::InvalidParameter(format!(
                "budget {budget} exceeds horizon {horizon}"
            )));
        }
        let mask = (0..horizon)
            .map(|t| match strategy {
                Strategy::First => t < budget,
                Strategy::Last => t >= horizon - budget,
            })
            .collect();
        Ok(Self { mask })
    }

    pub fn from_fraction(strategy: Strategy, horizon: usize, fraction: f64) -> Result<Self> {
        Self::for_strategy(strategy, horizon, budget_from_fraction(horizon, fraction)?)
    }

    pub fn horizon(&self) -> usize {
        self.mask.len()
    }

    pub fn budget(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_influenced(&self, slot: usize) -> bool {
        self.mask[slot]
    }

    /// Whether this is exactly S_F or S_L for its own budget.
    pub fn as_strategy(&self) -> Option<Strategy> {
        let budget = self.budget();
        [Strategy::Last, Strategy::First].into_iter().find(|&s| {
            Schedule::for_strategy(s, self.horizon(), budget).is_ok_and(|c| c == *self)
        })
    }

    pub fn phases(&self) -> Vec<Phase> {
        let mut phases: Vec<Phase> = Vec::new();
        for (t, &influenced) in self.mask.iter().enumerate() {
            match phases.last_mut() {
                Some(ph) if ph.influenced == influenced => ph.len += 1,
                _ => phases.push(Phase {
                    start: t,
                    len: 1,
                    influenced,
                }),
            }
        }
        phases
    }

    /// Moves the influence at `slot` to `slot + 1`.
    pub fn swapped(&self, slot: usize) -> Result<Self> {
        if slot + 1 >= self.mask.len() || !self.mask[slot] || self.mask[slot + 1] {
            return Err(Error::InvalidSwapSite { slot });
        }
        let mut mask = self.mask.clone();
        mask.swap(slot, slot + 1);
        Ok(Self { mask })
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &m in &self.mask {
            f.write_str(if m { "1" } else { "0" })?;
        }
        Ok(())
    }
}
