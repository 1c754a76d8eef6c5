use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be a probability in [0, 1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("influence (p~={p_tilde}, q~={q_tilde}) violates p~ < q~")]
    IrrationalInfluence { p_tilde: f64, q_tilde: f64 },

    #[error("probability mass drifted by {drift:e} at slot {slot}")]
    MassLeak { slot: usize, drift: f64 },

    #[error("cost cap exceeded: {0}")]
    CostCapExceeded(String),

    #[error("integrator needs {required} steps but the budget is {budget}")]
    StepSizeTooCoarse { required: u64, budget: u64 },

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("quadratic coefficient (1-lambda)(p-q) vanishes; use the p = q or linear path")]
    DegenerateCase,

    #[error("numerical blowup: {0}")]
    NumericalBlowup(String),

    #[error("strategy difference changes sign {count} times on the lambda grid")]
    MultipleSignChanges { count: usize },

    #[error("{count} schedules exceed the enumeration cap of {cap}")]
    SearchSpaceTooLarge { count: u128, cap: u64 },

    #[error("slot {slot} is not an (influenced, uninfluenced) pair")]
    InvalidSwapSite { slot: usize },

    #[error("slot {slot} is not in the phase required by this martingale")]
    PhaseMismatch { slot: usize },

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
}
