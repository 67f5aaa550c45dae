//! Adiabatic preparation of ground states along parameter paths.

pub mod entanglement;
pub mod evolve;
pub mod path;
pub mod problem;
pub mod schedule;

pub use entanglement::{entanglement_entropy, entanglement_entropy_complex, half_chain_entropy};
pub use evolve::{
    evolve, evolve_affine, find_ta, scaling_fit, EvolutionOptions, EvolutionResult, TaEvaluation, TaOptions,
    TaOutcome, TaReport, DEFAULT_TARGET_FIDELITY,
};
pub use path::{Family, IsingRoute, ParameterPath, PathKind, Polyline};
pub use problem::{AdiabaticProblem, AffineOperator, PathSample};
pub use schedule::{
    build_schedule, sample_profile, schedule_from_profile, AdiabaticCondition, PathSampler, Schedule,
    ScheduleOptions,
};
