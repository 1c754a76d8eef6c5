//! Individual behavior types and the one-slot transition kernel.
//!
//! In every slot one individual is drawn uniformly at random. A "Yes" holder
//! switches to "No" with probability `p_t`, a "No" holder switches to "Yes"
//! with probability `q_t`. The rates depend on the behavior type of the drawn
//! individual, on the current fraction `delta` of "No" holders, and on whether
//! the slot is influenced. All engines in this crate share this kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

/// The three pure behavior types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conduct {
    /// Type S: rates independent of the population.
    Strong,
    /// Type C: drawn towards the majority.
    Conformist,
    /// Type R: drawn towards the minority.
    Rebel,
}

impl Conduct {
    /// Flip rates of this pure type at "No" fraction `delta`.
    pub fn rates(self, p: f64, q: f64, delta: f64) -> SlotRates {
        match self {
            Conduct::Strong => SlotRates { p_t: p, q_t: q },
            Conduct::Conformist => SlotRates {
                p_t: p * delta,
                q_t: q * (1.0 - delta),
            },
            Conduct::Rebel => SlotRates {
                p_t: p * (1.0 - delta),
                q_t: q * delta,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BehaviorKind {
    #[serde(rename = "pure_s")]
    PureS,
    #[serde(rename = "pure_c")]
    PureC,
    #[serde(rename = "pure_r")]
    PureR,
    /// Model I: Type S with probability `mix`, Type C otherwise.
    #[serde(rename = "hybrid_sc")]
    HybridSC,
    /// Model II: Type C with probability `mix`, Type R otherwise.
    #[serde(rename = "hybrid_cr")]
    HybridCR,
}

/// Natural (uninfluenced) flip behavior of the population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BehaviorSpec {
    kind: BehaviorKind,
    p: f64,
    q: f64,
    mix: f64,
}

impl BehaviorSpec {
    pub fn new(kind: BehaviorKind, p: f64, q: f64, mix: f64) -> Result<Self> {
        Ok(Self {
            kind,
            p: check_probability("p", p)?,
            q: check_probability("q", q)?,
            mix: check_probability("mix", mix)?,
        })
    }

    pub fn pure(conduct: Conduct, p: f64, q: f64) -> Result<Self> {
        let kind = match conduct {
            Conduct::Strong => BehaviorKind::PureS,
            Conduct::Conformist => BehaviorKind::PureC,
            Conduct::Rebel => BehaviorKind::PureR,
        };
        Self::new(kind, p, q, 0.0)
    }

    /// Model I with strong-willed fraction `lambda`.
    pub fn hybrid_sc(p: f64, q: f64, lambda: f64) -> Result<Self> {
        Self::new(BehaviorKind::HybridSC, p, q, lambda)
    }

    /// Model II with conformist fraction `mu`.
    pub fn hybrid_cr(p: f64, q: f64, mu: f64) -> Result<Self> {
        Self::new(BehaviorKind::HybridCR, p, q, mu)
    }

    pub fn kind(&self) -> BehaviorKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `lambda` for Model I, `mu` for Model II, unused for pure types.
    pub fn mix(&self) -> f64 {
        self.mix
    }

    /// Same behavior with a different mixing weight.
    pub fn with_mix(&self, mix: f64) -> Result<Self> {
        Self::new(self.kind, self.p, self.q, mix)
    }

    /// The per-slot type draw as `(weight, type)` pairs. Pure kinds have a
    /// single component of weight one.
    pub fn components(&self) -> Vec<(f64, Conduct)> {
        match self.kind {
            BehaviorKind::PureS => vec![(1.0, Conduct::Strong)],
            BehaviorKind::PureC => vec![(1.0, Conduct::Conformist)],
            BehaviorKind::PureR => vec![(1.0, Conduct::Rebel)],
            BehaviorKind::HybridSC => vec![
                (self.mix, Conduct::Strong),
                (1.0 - self.mix, Conduct::Conformist),
            ],
            BehaviorKind::HybridCR => vec![
                (self.mix, Conduct::Conformist),
                (1.0 - self.mix, Conduct::Rebel),
            ],
        }
    }

    /// Flip rates averaged over the per-slot type draw.
    pub fn mean_rates(&self, delta: f64) -> SlotRates {
        let pure = |c: Conduct| c.rates(self.p, self.q, delta);
        let blend = |w: f64, a: SlotRates, b: SlotRates| SlotRates {
            p_t: w * a.p_t + (1.0 - w) * b.p_t,
            q_t: w * a.q_t + (1.0 - w) * b.q_t,
        };
        match self.kind {
            BehaviorKind::PureS => pure(Conduct::Strong),
            BehaviorKind::PureC => pure(Conduct::Conformist),
            BehaviorKind::PureR => pure(Conduct::Rebel),
            BehaviorKind::HybridSC => {
                blend(self.mix, pure(Conduct::Strong), pure(Conduct::Conformist))
            }
            BehaviorKind::HybridCR => {
                blend(self.mix, pure(Conduct::Conformist), pure(Conduct::Rebel))
            }
        }
    }
}

/// Flip rates forced on the drawn individual in an influenced slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfluenceSpec {
    p_tilde: f64,
    q_tilde: f64,
}

impl InfluenceSpec {
    pub fn new(p_tilde: f64, q_tilde: f64) -> Result<Self> {
        Ok(Self {
            p_tilde: check_probability("p_tilde", p_tilde)?,
            q_tilde: check_probability("q_tilde", q_tilde)?,
        })
    }

    pub fn p_tilde(&self) -> f64 {
        self.p_tilde
    }

    pub fn q_tilde(&self) -> f64 {
        self.q_tilde
    }

    /// Whether the influence pushes towards "Yes" (`p~ < q~`).
    pub fn is_rational(&self) -> bool {
        self.p_tilde < self.q_tilde
    }

    pub fn require_rational(&self) -> Result<()> {
        if self.is_rational() {
            Ok(())
        } else {
            Err(Error::IrrationalInfluence {
                p_tilde: self.p_tilde,
                q_tilde: self.q_tilde,
            })
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.p_tilde + self.q_tilde
    }

    /// Equilibrium "No" fraction under permanent influence. Zero when both
    /// rates vanish (the phase is then the identity map).
    pub fn fixed_point(&self) -> f64 {
        let total = self.total_rate();
        if total > 0.0 {
            self.p_tilde / total
        } else {
            0.0
        }
    }

    pub fn rates(&self) -> SlotRates {
        SlotRates {
            p_t: self.p_tilde,
            q_t: self.q_tilde,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotRates {
    /// Probability a drawn "Yes" holder switches to "No".
    pub p_t: f64,
    /// Probability a drawn "No" holder switches to "Yes".
    pub q_t: f64,
}

/// Rates in effect for one slot. Influence, when present, overrides the
/// natural behavior entirely.
pub fn effective_rates(
    behavior: &BehaviorSpec,
    influence: Option<&InfluenceSpec>,
    delta: f64,
) -> SlotRates {
    debug_assert!((0.0..=1.0).contains(&delta));
    match influence {
        Some(inf) => inf.rates(),
        None => behavior.mean_rates(delta),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PopulationState {
    size: u32,
    no_count: u32,
}

impl PopulationState {
    pub fn new(size: u32, no_count: u32) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("population size must be positive".into()));
        }
        if no_count > size {
            return Err(Error::InvalidParameter(format!(
                "no_count {no_count} exceeds population {size}"
            )));
        }
        Ok(Self { size, no_count })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn no_count(&self) -> u32 {
        self.no_count
    }

    pub fn yes_count(&self) -> u32 {
        self.size - self.no_count
    }

    pub fn delta(&self) -> f64 {
        f64::from(self.no_count) / f64::from(self.size)
    }
}

/// Law of the one-slot change in the "No" count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiDistribution {
    /// P(chi = -1): a "No" holder switches to "Yes".
    pub down: f64,
    /// P(chi = 0).
    pub stay: f64,
    /// P(chi = +1): a "Yes" holder switches to "No".
    pub up: f64,
}

impl ChiDistribution {
    pub fn mean(&self) -> f64 {
        self.up - self.down
    }
}

pub fn chi_distribution(state: &PopulationState, rates: SlotRates) -> ChiDistribution {
    chi_at(state.delta(), rates)
}

#[inline]
pub(crate) fn chi_at(delta: f64, rates: SlotRates) -> ChiDistribution {
    ChiDistribution {
        down: delta * rates.q_t,
        stay: 1.0 - rates.p_t - delta * (rates.q_t - rates.p_t),
        up: (1.0 - delta) * rates.p_t,
    }
}
