//! Resource-pool partitioning for two coexisting radio access networks.
//!
//! A network operator owns a shared pool of `N_R` time-frequency resources
//! and must split it between two networks (`RAN_A`, `RAN_B`) whose demands
//! are stochastic. This crate provides the full pipeline:
//!
//! - [`demand`] — seeded ARMA demand-trace synthesis, quantized to
//!   nonnegative integer resource counts;
//! - [`stats`] — per-trace statistics and ensemble confidence intervals for
//!   means, variances, and maxima, plus selection of the scalar statistic
//!   that drives the optimizer;
//! - [`allocator`] — the weighted objective
//!   `J = gamma*((n_a-x_a)/x_a)^2 + (1-gamma)*((n_b-x_b)/x_b)^2`, an exact
//!   integer optimizer over the feasible lattice, a closed-form continuous
//!   cross-check, and gamma sweeps;
//! - [`metrics`] — fractional surplus/deficit, Jain's fairness index, and
//!   starvation-region detection over a sweep;
//! - [`harness`] — reproducible end-to-end scenarios tying the above
//!   together, including the canonical reference experiment;
//! - [`config`] / [`output`] — the TOML scenario-file grammar and the
//!   deterministic CSV/JSON results writers.
//!
//! Everything is a pure function of its inputs: identical seeds and
//! configuration produce byte-identical results. With the default
//! `parallel` feature, ensemble generation, per-trace reductions, and sweep
//! rows are evaluated on a rayon pool; disabling the feature falls back to
//! sequential loops with identical output.
//!
//! # Example
//!
//! Partition a pool of 20 resources between networks demanding 30 and 50 on
//! average, weighting both equally:
//!
//! ```
//! use specshare::{optimize_partition, AllocationProblem};
//!
//! let problem = AllocationProblem::new(20, 0.5, 30.0, 50.0)?;
//! let best = optimize_partition(&problem);
//! assert_eq!((best.n_a, best.n_b), (14, 6));
//! assert!(best.objective < 0.53);
//! # Ok::<(), specshare::allocator::AllocError>(())
//! ```

pub mod allocator;
pub mod config;
pub mod demand;
mod exec;
pub mod harness;
pub mod metrics;
pub mod output;
pub mod stats;

pub use allocator::{
    evaluate_objective, optimize_partition, optimize_partition_continuous, sweep_gamma, Allocation,
    AllocationProblem, ContinuousAllocation,
};
pub use demand::{
    derive_seed, generate_ensemble, generate_trace, ArmaParams, DemandTrace, NetworkId,
};
pub use harness::{run_reference_experiment, run_scenario, ScenarioConfig, ScenarioResult};
pub use metrics::{
    empirical_surplus, fractional_surplus, jain_fairness, starvation_regions, SurplusReport,
    SweepResult, SweepRow,
};
pub use stats::{
    ensemble_confidence_intervals, select_statistic, trace_statistics, CiBound, ConfidenceInterval,
    DemandStatistics, StatisticMode, StatisticSelector, TraceStats,
};
