//! Evaluation metrics for a partition: fractional surplus/deficit, Jain's
//! fairness index, and starvation regions over a gamma sweep.
//!
//! A surplus (`(n - x)/x > 0`) means over-provisioning relative to the
//! driving statistic; a deficit means under-provisioning, with -1 marking
//! total starvation (a zero allocation). The "expected" surplus is reported
//! two ways: deterministically at the statistic, and empirically averaged
//! over the samples of a demand trace — the two coincide for constant
//! demand and bracket the intended quantity otherwise.

use serde::Serialize;
use thiserror::Error;

use crate::allocator::Allocation;
use crate::demand::DemandTrace;
use crate::stats::StatisticSelector;

/// Errors from metric evaluation.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("demand statistic must be positive and finite, got {0}")]
    NonPositiveStatistic(f64),

    #[error("fairness is undefined when both allocations are zero")]
    UndefinedFairness,

    #[error("every sample in the trace has zero demand")]
    AllSamplesZeroDemand,
}

/// Surplus/deficit of one network's allocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurplusReport {
    /// `(n - x)/x` against the driving statistic.
    pub deterministic: f64,
    /// Mean of `(n - d)/d` over trace samples with `d >= 1`; `None` until an
    /// evaluation trace has been applied.
    pub empirical_mean: Option<f64>,
    /// Number of zero-demand samples excluded from the empirical mean.
    pub skipped_zero_demand: usize,
}

impl SurplusReport {
    /// Deterministic-only report; empirical fields unset.
    pub fn from_statistic(n: u32, x: f64) -> Result<Self, MetricsError> {
        Ok(SurplusReport {
            deterministic: fractional_surplus(n, x)?,
            empirical_mean: None,
            skipped_zero_demand: 0,
        })
    }
}

/// One row of a gamma sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub allocation: Allocation,
    pub surplus_a: SurplusReport,
    pub surplus_b: SurplusReport,
    /// Jain's fairness of the allocation; `None` only for the degenerate
    /// (0, 0) partition.
    pub fairness: Option<f64>,
}

/// Optimal allocations and metrics over a gamma grid for one
/// (pool size, statistic mode) configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub pool_size: u32,
    pub x_a: f64,
    pub x_b: f64,
    /// How `(x_a, x_b)` were selected; `None` for ad-hoc sweeps driven by
    /// explicit statistics.
    pub selector: Option<StatisticSelector>,
    /// Rows in strictly increasing gamma order.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn with_selector(mut self, selector: StatisticSelector) -> Self {
        self.selector = Some(selector);
        self
    }

    /// The row with the highest Jain fairness; the earliest gamma wins a
    /// tie. `None` only if every row has the degenerate (0, 0) partition.
    pub fn fairest_row(&self) -> Option<&SweepRow> {
        let mut best: Option<&SweepRow> = None;
        for row in &self.rows {
            let Some(fairness) = row.fairness else {
                continue;
            };
            if best.and_then(|b| b.fairness).is_none_or(|f| fairness > f) {
                best = Some(row);
            }
        }
        best
    }
}

/// A closed gamma interval, reported at the sweep's grid resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaInterval {
    pub start: f64,
    pub end: f64,
}

/// Maximal starvation runs per network, plus their union.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarvationRegions {
    /// Gamma intervals where RAN_A's allocation is zero.
    pub ran_a: Vec<GammaInterval>,
    /// Gamma intervals where RAN_B's allocation is zero.
    pub ran_b: Vec<GammaInterval>,
    /// Intervals where *either* network is starved. The union is reported
    /// because no minimizer starves both networks at once on a nonempty
    /// pool.
    pub either: Vec<GammaInterval>,
}

/// Fractional surplus (positive) or deficit (negative): `(n - x)/x`.
/// A zero allocation yields exactly -1.
pub fn fractional_surplus(n: u32, x: f64) -> Result<f64, MetricsError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(MetricsError::NonPositiveStatistic(x));
    }
    Ok((f64::from(n) - x) / x)
}

/// Empirical surplus of allocating `n` against the per-sample demands of a
/// trace. Samples with zero demand are excluded (the ratio is undefined
/// there) and counted. The returned report's `deterministic` field is NaN;
/// the caller fills it with the surplus at its driving statistic.
pub fn empirical_surplus(n: u32, trace: &DemandTrace) -> Result<SurplusReport, MetricsError> {
    // Running mean: exact for constant demand, so a constant trace [c, ...]
    // reproduces fractional_surplus(n, c) bit for bit.
    let mut mean = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for &d in trace.values() {
        if d == 0 {
            skipped += 1;
        } else {
            let ratio = (f64::from(n) - f64::from(d)) / f64::from(d);
            used += 1;
            mean += (ratio - mean) / used as f64;
        }
    }
    if used == 0 {
        return Err(MetricsError::AllSamplesZeroDemand);
    }
    Ok(SurplusReport {
        deterministic: f64::NAN,
        empirical_mean: Some(mean),
        skipped_zero_demand: skipped,
    })
}

/// Jain's fairness index `(n_a + n_b)^2 / (2 (n_a^2 + n_b^2))`, in
/// `[0.5, 1]` for two networks; undefined at (0, 0).
pub fn jain_fairness(n_a: u32, n_b: u32) -> Result<f64, MetricsError> {
    if n_a == 0 && n_b == 0 {
        return Err(MetricsError::UndefinedFairness);
    }
    Ok(jain_raw(n_a, n_b))
}

/// Unchecked Jain index; NaN at (0, 0). Shared with the allocator's
/// tie-break so both rank candidates identically.
pub(crate) fn jain_raw(n_a: u32, n_b: u32) -> f64 {
    let (a, b) = (f64::from(n_a), f64::from(n_b));
    (a + b) * (a + b) / (2.0 * (a * a + b * b))
}

/// Maximal runs of consecutive grid points where a network's allocation is
/// zero, as closed gamma intervals at grid resolution.
pub fn starvation_regions(sweep: &SweepResult) -> StarvationRegions {
    StarvationRegions {
        ran_a: zero_runs(&sweep.rows, |r| r.allocation.n_a == 0),
        ran_b: zero_runs(&sweep.rows, |r| r.allocation.n_b == 0),
        either: zero_runs(&sweep.rows, |r| {
            r.allocation.n_a == 0 || r.allocation.n_b == 0
        }),
    }
}

fn zero_runs(rows: &[SweepRow], starved: impl Fn(&SweepRow) -> bool) -> Vec<GammaInterval> {
    let mut regions = Vec::new();
    let mut run_start: Option<f64> = None;
    for (i, row) in rows.iter().enumerate() {
        if starved(row) {
            run_start.get_or_insert(row.gamma);
            let run_ends = i + 1 == rows.len() || !starved(&rows[i + 1]);
            if run_ends {
                regions.push(GammaInterval {
                    start: run_start.take().expect("run in progress"),
                    end: row.gamma,
                });
            }
        }
    }
    regions
}
