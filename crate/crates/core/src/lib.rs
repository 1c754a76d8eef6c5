//! Finite-horizon influence scheduling in a generalized voter model.
//!
//! A population of `M` agents holds "Yes" or "No". In each slot one agent is
//! drawn and may switch according to its behavior type (strong, conformist,
//! rebel or a mixture). On influenced slots the switch rates are overridden
//! by the influencer's `(p~, q~)`. The crate provides
//!
//! * a Monte Carlo simulator ([`sim`]) and the exact law of the chain ([`exact`]),
//! * the mean-field ODE with closed forms for the S/C mixture ([`ode`]),
//! * exhaustive schedule search and swap checks ([`strategy`]),
//! * martingale concentration bounds for the `p = q` case ([`concentration`]).

pub mod compare;
pub mod concentration;
pub mod config;
pub mod error;
pub mod exact;
pub mod model;
pub mod ode;
pub mod schedule;
pub mod sim;
pub mod strategy;

pub use config::{Scenario, SimConfig, Trajectory, TrajectorySource};
pub use error::{Error, Result};
pub use model::{
    chi_distribution, effective_rates, BehaviorKind, BehaviorSpec, ChiDistribution, Conduct, InfluenceSpec,
    PopulationState, SlotRates,
};
pub use schedule::{budget_from_fraction, Phase, Schedule, Strategy};
