//! Simulated-feedback evaluation. Each trial draws a target category, a
//! universe sized for a chosen random-hit expectation and a feedback set
//! from the target, then counts how many of the top results are targets.

mod benchmark;
mod methods;
mod stats;
mod trial;

pub use benchmark::{
    run_benchmark, with_thread_cap, BenchmarkConfig, CellSummary, PairwiseEntry, Report, TrialResult,
    DEFAULT_KBARS, DEFAULT_Q, DEFAULT_REPETITIONS, DEFAULT_RS, DEFAULT_SIGNIFICANCE,
};
pub use methods::{derive_seed, Method, MethodConfig, ScoringContext};
pub use stats::{
    binomial_half_cdf, hypergeom_mean, hypergeom_pmf, hypergeom_variance, normal_upper_tail,
    random_baseline_test, sign_test, BaselineTest, Direction, SignTest,
};
pub use trial::{build_trial_universe, evaluate, run_trial, sample_feedback, Treatment, TrialSetup};
