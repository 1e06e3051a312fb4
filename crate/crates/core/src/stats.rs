//! Per-trace statistics and ensemble confidence intervals.
//!
//! Each realization is reduced to its sample mean, unbiased sample variance,
//! and maximum; across the ensemble each of those per-trace values is treated
//! as an i.i.d. sample and summarized by a two-sided Student-t confidence
//! interval on its expectation. [`select_statistic`] then picks the single
//! scalar (a mean or maximum CI bound) that drives the allocator.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::demand::DemandTrace;
use crate::exec;

/// Errors from ensemble statistics.
#[derive(Debug, Error)]
pub enum StatsError {
    #[error("confidence intervals require at least 2 realizations, got {0}")]
    InsufficientRealizations(usize),

    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    InvalidLevel(f64),
}

/// Scalar summary of a single demand trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceStats {
    /// Arithmetic mean of the demand values (resources).
    pub mean: f64,
    /// Unbiased (n-1 denominator) sample variance; 0 for a single sample.
    pub variance: f64,
    /// Largest demand value (resources).
    pub maximum: u32,
}

/// Two-sided confidence interval at a given level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Ensemble confidence intervals for one network's demand process.
///
/// The maxima interval is reported unrounded even though per-trace maxima
/// are integers; rounding for display is a presentation concern. The
/// variance interval is reported but never drives the allocation: any
/// additive variance term is constant in the partition, so a
/// variance-augmented objective has the same minimizer as the mean-based
/// one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemandStatistics {
    pub mean_ci: ConfidenceInterval,
    pub variance_ci: ConfidenceInterval,
    pub max_ci: ConfidenceInterval,
    pub n_realizations: usize,
}

/// Which per-network statistic feeds the allocation objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatisticMode {
    MeanBased,
    MaximaBased,
}

/// Which bound of the confidence interval to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CiBound {
    Lower,
    Upper,
}

/// Selects the scalar statistic `x` handed to the optimizer: mean- or
/// maxima-based, at the lower or upper CI bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StatisticSelector {
    pub mode: StatisticMode,
    pub bound: CiBound,
}

impl StatisticSelector {
    pub const MEAN_LOWER: StatisticSelector = StatisticSelector {
        mode: StatisticMode::MeanBased,
        bound: CiBound::Lower,
    };
    pub const MEAN_UPPER: StatisticSelector = StatisticSelector {
        mode: StatisticMode::MeanBased,
        bound: CiBound::Upper,
    };
    pub const MAX_LOWER: StatisticSelector = StatisticSelector {
        mode: StatisticMode::MaximaBased,
        bound: CiBound::Lower,
    };
    pub const MAX_UPPER: StatisticSelector = StatisticSelector {
        mode: StatisticMode::MaximaBased,
        bound: CiBound::Upper,
    };

    /// Token used in file names: `mean_lower`, `max_upper`, ...
    pub fn file_token(&self) -> String {
        self.to_string().replace('-', "_")
    }
}

impl std::fmt::Display for StatisticSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mode = match self.mode {
            StatisticMode::MeanBased => "mean",
            StatisticMode::MaximaBased => "max",
        };
        let bound = match self.bound {
            CiBound::Lower => "lower",
            CiBound::Upper => "upper",
        };
        write!(f, "{mode}-{bound}")
    }
}

impl std::str::FromStr for StatisticSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "mean-lower" => Ok(StatisticSelector::MEAN_LOWER),
            "mean-upper" => Ok(StatisticSelector::MEAN_UPPER),
            "max-lower" => Ok(StatisticSelector::MAX_LOWER),
            "max-upper" => Ok(StatisticSelector::MAX_UPPER),
            other => Err(format!(
                "unknown statistic selector {other:?}; expected one of \
                 mean-lower, mean-upper, max-lower, max-upper"
            )),
        }
    }
}

impl serde::Serialize for StatisticSelector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for StatisticSelector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Reduce one trace to its mean, unbiased variance, and maximum.
///
/// The mean is exact (integer summation before division); the variance uses
/// a two-pass computation in trace order.
pub fn trace_statistics(trace: &DemandTrace) -> TraceStats {
    let values = trace.values();
    let n = values.len();
    let sum: u64 = values.iter().map(|&v| u64::from(v)).sum();
    let mean = sum as f64 / n as f64;
    let variance = if n == 1 {
        0.0
    } else {
        let ss: f64 = values
            .iter()
            .map(|&v| {
                let d = v as f64 - mean;
                d * d
            })
            .sum();
        ss / (n - 1) as f64
    };
    let maximum = values.iter().copied().max().expect("trace is non-empty");
    TraceStats {
        mean,
        variance,
        maximum,
    }
}

/// Student-t confidence intervals for the expected per-trace mean, variance,
/// and maximum across an ensemble of realizations.
///
/// The variance interval's lower bound is clamped at zero: a t-interval can
/// cross zero for tiny spreads and a negative variance is meaningless.
pub fn ensemble_confidence_intervals(
    ensemble: &[DemandTrace],
    level: f64,
) -> Result<DemandStatistics, StatsError> {
    let n = ensemble.len();
    if n < 2 {
        return Err(StatsError::InsufficientRealizations(n));
    }
    if !level.is_finite() || level <= 0.0 || level >= 1.0 {
        return Err(StatsError::InvalidLevel(level));
    }

    let per_trace = exec::map_slice(ensemble, trace_statistics);
    let means: Vec<f64> = per_trace.iter().map(|s| s.mean).collect();
    let variances: Vec<f64> = per_trace.iter().map(|s| s.variance).collect();
    let maxima: Vec<f64> = per_trace.iter().map(|s| f64::from(s.maximum)).collect();

    let mean_ci = t_interval(&means, level);
    let mut variance_ci = t_interval(&variances, level);
    variance_ci.lower = variance_ci.lower.max(0.0);
    let max_ci = t_interval(&maxima, level);

    Ok(DemandStatistics {
        mean_ci,
        variance_ci,
        max_ci,
        n_realizations: n,
    })
}

/// Read the scalar statistic named by the selector out of the CIs.
pub fn select_statistic(stats: &DemandStatistics, selector: StatisticSelector) -> f64 {
    let ci = match selector.mode {
        StatisticMode::MeanBased => &stats.mean_ci,
        StatisticMode::MaximaBased => &stats.max_ci,
    };
    match selector.bound {
        CiBound::Lower => ci.lower,
        CiBound::Upper => ci.upper,
    }
}

/// Two-sided Student-t interval for the expectation of `samples`.
/// Caller guarantees `samples.len() >= 2` and `0 < level < 1`.
fn t_interval(samples: &[f64], level: f64) -> ConfidenceInterval {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples
        .iter()
        .map(|&v| {
            let d = v - mean;
            d * d
        })
        .sum();
    let variance = ss / (n - 1.0);
    let standard_error = (variance / n).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 1.0)
        .expect("degrees of freedom >= 1")
        .inverse_cdf(0.5 + 0.5 * level);
    ConfidenceInterval {
        lower: mean - t * standard_error,
        upper: mean + t * standard_error,
        level,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::{generate_ensemble, ArmaParams, NetworkId};

    fn trace(values: &[u32]) -> DemandTrace {
        DemandTrace::new(values.to_vec(), 0, NetworkId::RanA).unwrap()
    }

    #[test]
    fn constant_trace_stats() {
        let s = trace_statistics(&trace(&[5, 5, 5]));
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.maximum, 5);
    }

    #[test]
    fn two_point_trace_stats() {
        // (0-5)^2 + (10-5)^2 = 50 over n-1 = 1
        let s = trace_statistics(&trace(&[0, 10]));
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.variance, 50.0);
        assert_eq!(s.maximum, 10);
    }

    #[test]
    fn singleton_trace_has_zero_variance() {
        let s = trace_statistics(&trace(&[7]));
        assert_eq!(s.mean, 7.0);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.maximum, 7);
    }

    #[test]
    fn trace_statistics_matches_naive_reference() {
        let mut state = 0x1234_5678_u64;
        for _ in 0..50 {
            let len = 1 + (state % 300) as usize;
            let values: Vec<u32> = (0..len)
                .map(|_| {
                    state = state
                        .wrapping_mul(6_364_136_223_846_793_005)
                        .wrapping_add(1);
                    (state >> 33) as u32 % 1000
                })
                .collect();
            let t = trace(&values);
            let s = trace_statistics(&t);

            let naive_mean = values.iter().map(|&v| v as f64).sum::<f64>() / len as f64;
            let naive_var = if len == 1 {
                0.0
            } else {
                values
                    .iter()
                    .map(|&v| (v as f64 - naive_mean).powi(2))
                    .sum::<f64>()
                    / (len - 1) as f64
            };
            assert!((s.mean - naive_mean).abs() <= 1e-9 * naive_mean.abs().max(1.0));
            assert!((s.variance - naive_var).abs() <= 1e-9 * naive_var.abs().max(1.0));
            assert_eq!(s.maximum, *values.iter().max().unwrap());
        }
    }

    #[test]
    fn degenerate_ensemble_gives_degenerate_intervals() {
        let ensemble: Vec<DemandTrace> = (0..10).map(|_| trace(&[30, 30, 30, 30])).collect();
        let stats = ensemble_confidence_intervals(&ensemble, 0.95).unwrap();
        assert_eq!(stats.mean_ci.lower, 30.0);
        assert_eq!(stats.mean_ci.upper, 30.0);
        assert_eq!(stats.variance_ci.lower, 0.0);
        assert_eq!(stats.variance_ci.upper, 0.0);
        assert_eq!(stats.max_ci.lower, 30.0);
        assert_eq!(stats.max_ci.upper, 30.0);
        assert_eq!(stats.n_realizations, 10);
    }

    #[test]
    fn t_interval_matches_published_quantiles() {
        // Two constant traces with means 10 and 20: sample mean 15,
        // s = sqrt(50), se = 5, and t(0.975, df=1) = 12.7062 from tables,
        // so the interval is 15 +/- 63.531.
        let ensemble = vec![trace(&[10, 10, 10]), trace(&[20, 20, 20])];
        let stats = ensemble_confidence_intervals(&ensemble, 0.95).unwrap();
        assert!(
            (stats.mean_ci.lower - (15.0 - 63.531)).abs() < 1e-2,
            "{:?}",
            stats.mean_ci
        );
        assert!(
            (stats.mean_ci.upper - (15.0 + 63.531)).abs() < 1e-2,
            "{:?}",
            stats.mean_ci
        );
    }

    #[test]
    fn wider_level_interval_contains_narrower() {
        let params = ArmaParams::default_ran_a();
        let ensemble = generate_ensemble(&params, 200, 50, 99, NetworkId::RanA).unwrap();
        let s95 = ensemble_confidence_intervals(&ensemble, 0.95).unwrap();
        let s99 = ensemble_confidence_intervals(&ensemble, 0.99).unwrap();
        assert!(s99.mean_ci.lower <= s95.mean_ci.lower);
        assert!(s99.mean_ci.upper >= s95.mean_ci.upper);
    }

    #[test]
    fn grand_mean_lies_inside_mean_interval() {
        let params = ArmaParams::default_ran_b();
        let ensemble = generate_ensemble(&params, 100, 40, 7, NetworkId::RanB).unwrap();
        let stats = ensemble_confidence_intervals(&ensemble, 0.95).unwrap();
        let grand = ensemble
            .iter()
            .map(|t| trace_statistics(t).mean)
            .sum::<f64>()
            / ensemble.len() as f64;
        assert!(stats.mean_ci.contains(grand));
    }

    #[test]
    fn interval_width_shrinks_with_more_realizations() {
        let params = ArmaParams::default_ran_a();
        let small = generate_ensemble(&params, 100, 100, 5, NetworkId::RanA).unwrap();
        let large = generate_ensemble(&params, 100, 1000, 5, NetworkId::RanA).unwrap();
        let w_small = ensemble_confidence_intervals(&small, 0.95)
            .unwrap()
            .mean_ci
            .width();
        let w_large = ensemble_confidence_intervals(&large, 0.95)
            .unwrap()
            .mean_ci
            .width();
        assert!(
            w_large < w_small,
            "width(1000)={w_large} width(100)={w_small}"
        );
    }

    #[test]
    fn default_ran_a_ensemble_intervals_are_tight() {
        let params = ArmaParams::default_ran_a();
        let ensemble = generate_ensemble(&params, 1000, 1000, 1, NetworkId::RanA).unwrap();
        let stats = ensemble_confidence_intervals(&ensemble, 0.95).unwrap();
        assert!(
            stats.mean_ci.width() < 0.2,
            "mean width {}",
            stats.mean_ci.width()
        );
        // Per-trace maxima concentrate in the low-to-mid 40s.
        let mid = stats.max_ci.midpoint();
        assert!((42.0..=46.0).contains(&mid), "max midpoint {mid}");
        assert!(
            stats.max_ci.width() < 0.5,
            "max width {}",
            stats.max_ci.width()
        );

        let ensemble_b =
            generate_ensemble(&ArmaParams::default_ran_b(), 1000, 1000, 2, NetworkId::RanB)
                .unwrap();
        let stats_b = ensemble_confidence_intervals(&ensemble_b, 0.95).unwrap();
        assert!(
            stats_b.mean_ci.width() < 1.0,
            "mean width {}",
            stats_b.mean_ci.width()
        );
    }

    #[test]
    fn variance_interval_lower_bound_is_clamped() {
        // Variances {0, 0, 0.1}: the raw t-interval crosses zero.
        let ensemble = vec![
            trace(&[30, 30, 30, 30, 30]),
            trace(&[30, 30, 30, 30, 30]),
            trace(&[30, 30, 30, 31, 29]),
        ];
        let stats = ensemble_confidence_intervals(&ensemble, 0.95).unwrap();
        assert_eq!(stats.variance_ci.lower, 0.0);
        assert!(stats.variance_ci.upper > 0.0);
    }

    #[test]
    fn rejects_insufficient_realizations_and_bad_levels() {
        let one = vec![trace(&[1, 2, 3])];
        assert!(matches!(
            ensemble_confidence_intervals(&one, 0.95).unwrap_err(),
            StatsError::InsufficientRealizations(1)
        ));
        let two = vec![trace(&[1]), trace(&[2])];
        for level in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(matches!(
                ensemble_confidence_intervals(&two, level).unwrap_err(),
                StatsError::InvalidLevel(_)
            ));
        }
    }

    #[test]
    fn selector_reads_the_requested_bound() {
        let stats = DemandStatistics {
            mean_ci: ConfidenceInterval {
                lower: 29.96,
                upper: 30.03,
                level: 0.95,
            },
            variance_ci: ConfidenceInterval {
                lower: 20.30,
                upper: 20.62,
                level: 0.95,
            },
            max_ci: ConfidenceInterval {
                lower: 62.0,
                upper: 63.0,
                level: 0.95,
            },
            n_realizations: 1000,
        };
        assert_eq!(
            select_statistic(&stats, StatisticSelector::MEAN_LOWER),
            29.96
        );
        assert_eq!(
            select_statistic(&stats, StatisticSelector::MEAN_UPPER),
            30.03
        );
        assert_eq!(select_statistic(&stats, StatisticSelector::MAX_UPPER), 63.0);
        // Degenerate interval: both bounds agree.
        let degenerate = DemandStatistics {
            max_ci: ConfidenceInterval {
                lower: 43.0,
                upper: 43.0,
                level: 0.95,
            },
            ..stats
        };
        assert_eq!(
            select_statistic(&degenerate, StatisticSelector::MAX_LOWER),
            43.0
        );
        assert_eq!(
            select_statistic(&degenerate, StatisticSelector::MAX_UPPER),
            43.0
        );
    }

    #[test]
    fn selector_round_trips_through_strings() {
        for sel in [
            StatisticSelector::MEAN_LOWER,
            StatisticSelector::MEAN_UPPER,
            StatisticSelector::MAX_LOWER,
            StatisticSelector::MAX_UPPER,
        ] {
            let parsed: StatisticSelector = sel.to_string().parse().unwrap();
            assert_eq!(parsed, sel);
        }
        assert!("median-lower".parse::<StatisticSelector>().is_err());
    }
}
