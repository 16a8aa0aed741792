//! Benchmark instance builders: the turbo car, the complementarity example
//! and seeded random instances.

mod complementarity;
mod random;
mod turbo;

pub use complementarity::{
    build_complementarity, exact_critical_off, exact_critical_on, linear_objective, published_critical_off,
    published_critical_on, ORIGIN_OFF, ORIGIN_ON,
};
pub use random::{random_instance, random_lp, random_milp, RandomInstance};
pub use turbo::{
    build_turbo, decode_trajectory, hysteresis_violations, turbo_initial_guess, TrajectoryPoint, TurboInstance,
    TurboLayout, TurboParams,
};
