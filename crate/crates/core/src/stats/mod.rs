//! Significance machinery: standard error of binned statistics, Chebyshev
//! confidence, contiguous time binning, homogeneity tests and the
//! inhomogeneous-device breakdown demonstration.

mod breakdown;
mod homogeneity;

pub use breakdown::{breakdown_demo, BreakdownReport, DriftingDeviceSpec, Regime, RunSignificance};
pub use homogeneity::{
    chi_square_contingency, homogeneity_test, kolmogorov_sf, runs_test, two_sample_ks, HomogeneityInput, HomogeneityMethod,
    HomogeneityResult,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{eberhard_counts, eberhard_j, correlation, EberhardMapping};
use crate::types::{StationEvent, TimedTrial};

/// One statistic per bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinnedSample {
    values: Vec<f64>,
}

impl BinnedSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InsufficientData(format!("need at least 2 bins, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("bin values must be finite"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_bins(&self) -> usize {
        self.values.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSem {
    pub mean: f64,
    /// Sample standard deviation, `n − 1` denominator.
    pub sd: f64,
    pub sem: f64,
    pub n: usize,
}

/// Mean and `s/√n`.
pub fn sem(sample: &BinnedSample) -> MeanSem {
    mean_sem(sample.values()).expect("BinnedSample holds at least two values")
}

pub(crate) fn mean_sem(values: &[f64]) -> Option<MeanSem> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    Some(MeanSem {
        mean,
        sd,
        sem: sd / (n as f64).sqrt(),
        n,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevConfidence {
    /// `1 − 1/k²`, floored at zero; `1` when `certain`.
    pub level: f64,
    /// Distance to the bound in SEM units; `None` when `sem = 0`.
    pub k: Option<f64>,
    /// Zero spread with the mean off the bound.
    pub certain: bool,
}

pub fn chebyshev_confidence(mean: f64, sem: f64, null_bound: f64) -> Result<ChebyshevConfidence> {
    if sem.is_nan() || sem < 0.0 || !mean.is_finite() || !null_bound.is_finite() {
        return Err(invalid(format!("chebyshev_confidence: mean={mean} sem={sem} bound={null_bound}")));
    }
    let gap = (mean - null_bound).abs();
    if sem == 0.0 {
        let certain = gap > 0.0;
        return Ok(ChebyshevConfidence {
            level: if certain { 1.0 } else { 0.0 },
            k: None,
            certain,
        });
    }
    let k = gap / sem;
    let level = if k <= 1.0 { 0.0 } else { 1.0 - 1.0 / (k * k) };
    Ok(ChebyshevConfidence {
        level,
        k: Some(k),
        certain: false,
    })
}

/// Something recorded in a time window.
pub trait Timestamped {
    fn window(&self) -> u64;
}

impl Timestamped for StationEvent {
    fn window(&self) -> u64 {
        self.window_index
    }
}

impl Timestamped for TimedTrial {
    fn window(&self) -> u64 {
        self.window_index
    }
}

/// Per-bin reducers available by name.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BinReducer {
    EberhardJ(EberhardMapping),
    Correlation,
}

impl BinReducer {
    pub fn reduce(&self, trials: &[TimedTrial]) -> Option<f64> {
        let plain: Vec<_> = trials.iter().map(|t| t.trial).collect();
        match self {
            BinReducer::EberhardJ(m) => Some(eberhard_j(&eberhard_counts(&plain, *m)) as f64),
            BinReducer::Correlation => correlation(&plain),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinnedStatistic {
    /// Reducer value per bin; `None` for a bin with no events or an
    /// undefined reducer result.
    pub per_bin: Vec<Option<f64>>,
    pub windows_per_bin: u64,
    /// Events past the last whole bin.
    pub dropped_events: usize,
    pub dropped_windows: u64,
}

impl BinnedStatistic {
    pub fn undefined_bins(&self) -> Vec<usize> {
        self.per_bin
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.is_none().then_some(i))
            .collect()
    }

    /// Sample of the defined bins.
    pub fn sample(&self) -> Result<BinnedSample> {
        BinnedSample::new(self.per_bin.iter().flatten().copied().collect())
    }
}

/// Splits windows `[0, total_windows)` into `n_bins` contiguous bins of
/// equal duration (remainder windows dropped) and applies `reducer` to each.
/// Events must be sorted by window.
pub fn bin_statistic<T, F>(events: &[T], total_windows: u64, n_bins: usize, reducer: F) -> Result<BinnedStatistic>
where
    T: Timestamped,
    F: Fn(&[T]) -> Option<f64>,
{
    if n_bins < 2 {
        return Err(invalid("n_bins must be at least 2"));
    }
    let width = total_windows / n_bins as u64;
    if width == 0 {
        return Err(Error::InsufficientData(format!("{total_windows} windows cannot fill {n_bins} bins")));
    }
    if events.windows(2).any(|w| w[1].window() < w[0].window()) {
        return Err(invalid("events must be sorted by window"));
    }
    let limit = width * n_bins as u64;
    let mut per_bin = Vec::with_capacity(n_bins);
    let mut start = 0;
    for k in 0..n_bins as u64 {
        let end_window = (k + 1) * width;
        let end = start + events[start..].partition_point(|e| e.window() < end_window);
        let slice = &events[start..end];
        per_bin.push(if slice.is_empty() { None } else { reducer(slice) });
        start = end;
    }
    Ok(BinnedStatistic {
        per_bin,
        windows_per_bin: width,
        dropped_events: events.iter().filter(|e| e.window() >= limit).count(),
        dropped_windows: total_windows - limit,
    })
}
