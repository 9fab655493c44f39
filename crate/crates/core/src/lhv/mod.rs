//! Local-hidden-variable and quantum simulation of event-ready CHSH runs.

mod simulate;
mod strategy;
mod validate;

pub use simulate::{
    expected_event_rate, quantum_correlator, simulate_run, HeraldModel, ModelKind, OutcomeModel,
    SettingSource, Simulator,
};
pub use strategy::{
    best_strategy, enumerate_strategies, optimal_biased_expected_s, optimal_strategies,
    DeterministicStrategy, HeraldConditioned, LossReactive, MemoryPolicy,
};
pub use validate::{validate_bound, Exceedance, ExceedanceReport, MIN_TRIALS};
