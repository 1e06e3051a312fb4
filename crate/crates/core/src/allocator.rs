//! Objective evaluation and optimal pool partitioning.
//!
//! The operator splits a pool of `pool_size` resources between the two
//! networks by minimizing
//!
//! ```text
//! J(n_a, n_b) = gamma * ((n_a - x_a) / x_a)^2
//!             + (1 - gamma) * ((n_b - x_b) / x_b)^2
//! ```
//!
//! subject to `n_a >= 0`, `n_b >= 0`, `n_a + n_b <= pool_size`, where `x_a`
//! and `x_b` are the per-network demand statistics and `gamma` weights
//! RAN_A's deviation term. Allocations are integers (resources are counted),
//! so [`optimize_partition`] enumerates every feasible lattice point — exact
//! optimality, no heuristics. [`optimize_partition_continuous`] solves the
//! relaxed problem in closed form as an analytic cross-check.

use serde::Serialize;
use thiserror::Error;

use crate::exec;
use crate::metrics::{self, SurplusReport, SweepResult, SweepRow};

/// Errors from allocation-problem construction and sweeps.
#[derive(Debug, Error)]
pub enum AllocError {
    #[error("demand statistics must be positive and finite, got x_a={x_a}, x_b={x_b}")]
    NonPositiveStatistic { x_a: f64, x_b: f64 },

    #[error("gamma must lie in [0, 1], got {0}")]
    InvalidGamma(f64),

    #[error("invalid gamma grid: {0}")]
    InvalidGrid(String),
}

/// A validated instance of the partitioning problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllocationProblem {
    pool_size: u32,
    gamma: f64,
    x_a: f64,
    x_b: f64,
}

impl AllocationProblem {
    /// Rejects `gamma` outside `[0, 1]` and non-positive or non-finite
    /// statistics (the objective divides by both).
    pub fn new(pool_size: u32, gamma: f64, x_a: f64, x_b: f64) -> Result<Self, AllocError> {
        if !gamma.is_finite() || !(0.0..=1.0).contains(&gamma) {
            return Err(AllocError::InvalidGamma(gamma));
        }
        if !x_a.is_finite() || !x_b.is_finite() || x_a <= 0.0 || x_b <= 0.0 {
            return Err(AllocError::NonPositiveStatistic { x_a, x_b });
        }
        Ok(AllocationProblem {
            pool_size,
            gamma,
            x_a,
            x_b,
        })
    }

    pub fn pool_size(&self) -> u32 {
        self.pool_size
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn x_a(&self) -> f64 {
        self.x_a
    }

    pub fn x_b(&self) -> f64 {
        self.x_b
    }
}

/// An integer partition of the pool together with its objective value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Allocation {
    pub n_a: u32,
    pub n_b: u32,
    pub objective: f64,
}

/// The continuous-relaxation optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousAllocation {
    pub n_a: f64,
    pub n_b: f64,
    pub objective: f64,
}

/// Evaluate the objective at a point. Point-wise only: the pool constraint
/// is not enforced here.
pub fn evaluate_objective(n_a: f64, n_b: f64, problem: &AllocationProblem) -> f64 {
    let d_a = (n_a - problem.x_a) / problem.x_a;
    let d_b = (n_b - problem.x_b) / problem.x_b;
    problem.gamma * (d_a * d_a) + (1.0 - problem.gamma) * (d_b * d_b)
}

/// True if `(cand_a, cand_b, cand_j)` should replace the incumbent under the
/// tie-break rule: lower objective, then larger total allocation, then larger
/// Jain fairness, then smaller `n_a`. Applied lexicographically, this makes
/// the optimizer's result unique and deterministic.
fn improves(cand: (u32, u32, f64), incumbent: (u32, u32, f64)) -> bool {
    let (ca, cb, cj) = cand;
    let (ia, ib, ij) = incumbent;
    if cj != ij {
        return cj < ij;
    }
    let (ct, it) = (ca + cb, ia + ib);
    if ct != it {
        return ct > it;
    }
    let (cf, inc_f) = (metrics::jain_raw(ca, cb), metrics::jain_raw(ia, ib));
    if cf != inc_f {
        return cf > inc_f;
    }
    ca < ia
}

/// Exact integer optimum by exhaustive enumeration of all
/// `(pool_size + 1)(pool_size + 2) / 2` feasible lattice points.
///
/// Cost is quadratic in the pool size; at the few hundred resources these
/// pools hold, exactness is cheaper than cleverness.
pub fn optimize_partition(problem: &AllocationProblem) -> Allocation {
    let pool = problem.pool_size;
    let mut best: Option<(u32, u32, f64)> = None;
    for n_a in 0..=pool {
        for n_b in 0..=(pool - n_a) {
            let j = evaluate_objective(f64::from(n_a), f64::from(n_b), problem);
            match best {
                None => best = Some((n_a, n_b, j)),
                Some(incumbent) => {
                    if improves((n_a, n_b, j), incumbent) {
                        best = Some((n_a, n_b, j));
                    }
                }
            }
        }
    }
    let (n_a, n_b, objective) = best.expect("feasible set is never empty");
    Allocation {
        n_a,
        n_b,
        objective,
    }
}

/// Closed-form continuous optimum.
///
/// If `(x_a, x_b)` is feasible the objective is zero there. Otherwise the
/// optimum lies on the segment `n_a + n_b = pool_size`; the first-order
/// condition gives, with `a = gamma / x_a^2` and `b = (1 - gamma) / x_b^2`,
///
/// ```text
/// n_a = (a * x_a + b * (pool_size - x_b)) / (a + b)
/// ```
///
/// clamped into `[0, pool_size]`, with `n_b` the remainder. The gamma
/// endpoints fall out of the same expression: at `gamma = 1` it reduces to
/// `n_a = min(x_a, pool_size)`, symmetrically at `gamma = 0`.
pub fn optimize_partition_continuous(problem: &AllocationProblem) -> ContinuousAllocation {
    let pool = f64::from(problem.pool_size);
    let (x_a, x_b) = (problem.x_a, problem.x_b);
    if x_a + x_b <= pool && x_a <= pool && x_b <= pool {
        return ContinuousAllocation {
            n_a: x_a,
            n_b: x_b,
            objective: 0.0,
        };
    }
    let a = problem.gamma / (x_a * x_a);
    let b = (1.0 - problem.gamma) / (x_b * x_b);
    let n_a = ((a * x_a + b * (pool - x_b)) / (a + b)).clamp(0.0, pool);
    let n_b = pool - n_a;
    ContinuousAllocation {
        n_a,
        n_b,
        objective: evaluate_objective(n_a, n_b, problem),
    }
}

/// Optimize at every grid point and assemble the per-gamma rows.
///
/// Each row carries the optimal allocation, deterministic surplus reports
/// against `(x_a, x_b)`, and Jain's fairness. Rows are independent, so they
/// are evaluated in parallel (feature `parallel`) and assembled in grid
/// order. Empirical surplus fields are left unset; the experiment harness
/// fills them from held-out traces.
pub fn sweep_gamma(
    pool_size: u32,
    x_a: f64,
    x_b: f64,
    gamma_grid: &[f64],
) -> Result<SweepResult, AllocError> {
    if gamma_grid.is_empty() {
        return Err(AllocError::InvalidGrid("grid is empty".to_string()));
    }
    if gamma_grid
        .iter()
        .any(|g| !g.is_finite() || !(0.0..=1.0).contains(g))
    {
        return Err(AllocError::InvalidGrid(
            "grid values must lie in [0, 1]".to_string(),
        ));
    }
    if gamma_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AllocError::InvalidGrid(
            "grid must be strictly increasing".to_string(),
        ));
    }
    // Validate the statistics once; per-point construction cannot fail after this.
    AllocationProblem::new(pool_size, gamma_grid[0], x_a, x_b)?;

    let rows = exec::map_indices(gamma_grid.len(), |i| {
        let gamma = gamma_grid[i];
        let problem = AllocationProblem::new(pool_size, gamma, x_a, x_b).expect("validated above");
        let allocation = optimize_partition(&problem);
        let surplus_a =
            SurplusReport::from_statistic(allocation.n_a, x_a).expect("x_a validated above");
        let surplus_b =
            SurplusReport::from_statistic(allocation.n_b, x_b).expect("x_b validated above");
        let fairness = metrics::jain_fairness(allocation.n_a, allocation.n_b).ok();
        SweepRow {
            gamma,
            allocation,
            surplus_a,
            surplus_b,
            fairness,
        }
    });

    Ok(SweepResult {
        pool_size,
        x_a,
        x_b,
        selector: None,
        rows,
    })
}
