use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::gmm::ExactPosterior;
use crate::stats::quantile_sorted;

/// Label-invariant summaries of the cluster means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    MinMean,
    MaxMean,
    PredictiveMean,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown functional `{0}` (expected min_mean, max_mean or predictive_mean)")]
pub struct UnknownFunctional(pub String);

impl Functional {
    pub fn as_str(self) -> &'static str {
        match self {
            Functional::MinMean => "min_mean",
            Functional::MaxMean => "max_mean",
            Functional::PredictiveMean => "predictive_mean",
        }
    }

    pub fn truth(self, post: &ExactPosterior) -> f64 {
        match self {
            Functional::MinMean => post.expected_min(),
            Functional::MaxMean => post.expected_max(),
            Functional::PredictiveMean => post.predictive_mean(),
        }
    }

    /// Value at one draw of the cluster means.
    pub fn at(self, means: &[f64], p0: &[f64]) -> f64 {
        match self {
            Functional::MinMean => means.iter().copied().fold(f64::INFINITY, f64::min),
            Functional::MaxMean => means.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Functional::PredictiveMean => means.iter().zip(p0).map(|(m, p)| m * p).sum(),
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Functional {
    type Err = UnknownFunctional;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min_mean" => Ok(Functional::MinMean),
            "max_mean" => Ok(Functional::MaxMean),
            "predictive_mean" => Ok(Functional::PredictiveMean),
            other => Err(UnknownFunctional(other.to_string())),
        }
    }
}

/// `points` sample counts spaced evenly in log scale from `start` to `n`,
/// deduplicated, always ending at `n`.
pub fn log_grid(n: usize, start: usize, points: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let start = start.clamp(1, n);
    let (a, b) = ((start as f64).ln(), (n as f64).ln());
    let mut grid: Vec<usize> = (0..points)
        .map(|i| {
            let t = if points > 1 {
                i as f64 / (points - 1) as f64
            } else {
                1.0
            };
            ((a + t * (b - a)).exp().round() as usize).clamp(start, n)
        })
        .collect();
    grid.push(n);
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// Squared error of the running mean of `values` against `truth` at each
/// sample count in `grid`.
pub fn mse_trace(values: &[f64], truth: f64, grid: &[usize]) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(grid.len());
    let mut sum = 0.0;
    let mut seen = 0;
    for &n in grid {
        let n = n.min(values.len());
        while seen < n {
            sum += values[seen];
            seen += 1;
        }
        if n > 0 {
            out.push((n, (sum / n as f64 - truth).powi(2)));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceBand {
    pub n: usize,
    pub median: f64,
    pub q20: f64,
    pub q80: f64,
}

/// Median and 20%/80% quantiles across traces at each grid point shared by
/// all of them.
pub fn aggregate_traces(traces: &[Vec<(usize, f64)>]) -> Vec<TraceBand> {
    let Some(first) = traces.first() else {
        return Vec::new();
    };
    first
        .iter()
        .enumerate()
        .filter_map(|(i, &(n, _))| {
            let mut vals: Vec<f64> = traces
                .iter()
                .map(|t| t.get(i).filter(|p| p.0 == n).map(|p| p.1))
                .collect::<Option<_>>()?;
            vals.sort_by(f64::total_cmp);
            Some(TraceBand {
                n,
                median: quantile_sorted(&vals, 0.5),
                q20: quantile_sorted(&vals, 0.2),
                q80: quantile_sorted(&vals, 0.8),
            })
        })
        .collect()
}
