//! A categorical device whose output distribution drifts between runs.
//! Each item carries the statistic `1 − w(symbol)`, so a run's mean is
//! `1 − B` with `B = Σ p(s)·w(s)`. Pooling runs from regimes of opposite
//! sign can wash out an effect that single runs show overwhelmingly.

use serde::{Deserialize, Serialize};

use super::homogeneity::{chi_square_contingency, HomogeneityResult};
use crate::error::{invalid, Result};
use crate::parallel::map_runs;
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    /// First run (0-based) this regime applies to.
    pub first: usize,
    /// Last run, inclusive; open-ended when absent.
    #[serde(default)]
    pub last: Option<usize>,
    pub probs: Vec<f64>,
}

impl Regime {
    fn covers(&self, run: usize) -> bool {
        run >= self.first && self.last.is_none_or(|l| run <= l)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftingDeviceSpec {
    pub n_symbols: usize,
    /// `w(s)` per symbol.
    pub weights: Vec<f64>,
    /// First matching regime wins.
    pub regimes: Vec<Regime>,
    /// A single run rejects `1 − B ≥ 0` when `z < −single_run_sem`.
    #[serde(default = "default_single_run_sem")]
    pub single_run_sem: f64,
    #[serde(default = "default_pooled_sem")]
    pub pooled_sem: f64,
}

fn default_single_run_sem() -> f64 {
    100.0
}

fn default_pooled_sem() -> f64 {
    2.0
}

const DEFAULT_WEIGHTS: [f64; 6] = [0.0, 0.4, 0.8, 1.2, 1.6, 2.0];
/// B = 1.6, item sd 0.4.
const VIOLATING: [f64; 6] = [0.0, 0.0, 0.1, 0.2, 0.3, 0.4];
const VIOLATING_RUNS: [usize; 3] = [24, 49, 74];

impl Default for DriftingDeviceSpec {
    /// Three violating runs out of 100; the background is uniform with a
    /// little mass moved from the top symbol to the bottom one so that the
    /// pooled mean of `1 − B` is zero.
    fn default() -> Self {
        let n_bg = 100.0 - VIOLATING_RUNS.len() as f64;
        let deficit = VIOLATING_RUNS.len() as f64 * (1.0 - 1.6);
        // 2ε = −deficit / n_bg
        let eps = -deficit / n_bg / 2.0;
        let mut background = vec![1.0 / 6.0; 6];
        background[0] += eps;
        background[5] -= eps;
        let mut regimes: Vec<Regime> = VIOLATING_RUNS
            .iter()
            .map(|&r| Regime {
                first: r,
                last: Some(r),
                probs: VIOLATING.to_vec(),
            })
            .collect();
        regimes.push(Regime {
            first: 0,
            last: None,
            probs: background,
        });
        Self {
            n_symbols: 6,
            weights: DEFAULT_WEIGHTS.to_vec(),
            regimes,
            single_run_sem: default_single_run_sem(),
            pooled_sem: default_pooled_sem(),
        }
    }
}

impl DriftingDeviceSpec {
    /// One regime for every run.
    pub fn homogeneous(probs: Vec<f64>) -> Self {
        Self {
            regimes: vec![Regime {
                first: 0,
                last: None,
                probs,
            }],
            ..Self::default()
        }
    }

    pub fn validate(&self, runs: usize) -> Result<()> {
        if self.n_symbols < 2 || self.weights.len() != self.n_symbols {
            return Err(invalid("need n_symbols ≥ 2 and one weight per symbol"));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("weights must be finite"));
        }
        for (i, r) in self.regimes.iter().enumerate() {
            let sum: f64 = r.probs.iter().sum();
            if r.probs.len() != self.n_symbols || r.probs.iter().any(|p| p.is_nan() || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("regime {i}: probabilities must be {} non-negative values summing to 1", self.n_symbols)));
            }
        }
        if let Some(run) = (0..runs).find(|&run| self.regime_of(run).is_none()) {
            return Err(invalid(format!("no regime covers run {run}")));
        }
        if !(self.single_run_sem > 0.0 && self.pooled_sem > 0.0) {
            return Err(invalid("SEM thresholds must be positive"));
        }
        Ok(())
    }

    pub fn regime_of(&self, run: usize) -> Option<usize> {
        self.regimes.iter().position(|r| r.covers(run))
    }

    /// Expected `1 − B` under a regime.
    pub fn regime_mean(&self, regime: usize) -> f64 {
        1.0 - self.regimes[regime].probs.iter().zip(&self.weights).map(|(p, w)| p * w).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSignificance {
    pub run: usize,
    pub regime: usize,
    pub n: u64,
    pub mean: f64,
    pub sem: f64,
    /// `mean / sem`; negative values speak against `1 − B ≥ 0`.
    pub z: f64,
    pub rejects: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub runs: usize,
    pub run_len: usize,
    pub seed: u64,
    pub per_run: Vec<RunSignificance>,
    pub rejecting_runs: usize,
    pub pooled: RunSignificance,
    /// Symbol frequencies compared between the two halves of the campaign.
    pub homogeneity_halves: HomogeneityResult,
    /// Symbol frequencies compared across every run.
    pub homogeneity_runs: HomogeneityResult,
    /// Some run rejects while the pooled sample does not.
    pub contradiction: bool,
}

fn significance(run: usize, regime: usize, counts: &[u64], weights: &[f64], threshold: f64) -> RunSignificance {
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let (mut s1, mut s2) = (0.0, 0.0);
    for (c, w) in counts.iter().zip(weights) {
        let x = 1.0 - w;
        s1 += *c as f64 * x;
        s2 += *c as f64 * x * x;
    }
    let mean = s1 / nf;
    let var = if n > 1 { ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    let sem = (var / nf).sqrt();
    let z = if sem > 0.0 {
        mean / sem
    } else if mean < 0.0 {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };
    RunSignificance {
        run,
        regime,
        n,
        mean,
        sem,
        z,
        rejects: z < -threshold,
    }
}

fn draw_symbol(cum: &[f64], rng: &mut SeededRng) -> usize {
    let u = rng.uniform();
    cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1)
}

/// Runs `runs` runs of `run_len` symbols; run `r` draws from stream `r`.
pub fn breakdown_demo(spec: &DriftingDeviceSpec, runs: usize, run_len: usize, seed: u64) -> Result<BreakdownReport> {
    spec.validate(runs)?;
    if runs < 2 || run_len < 2 {
        return Err(invalid("breakdown_demo needs at least 2 runs of at least 2 items"));
    }
    let cums: Vec<Vec<f64>> = spec
        .regimes
        .iter()
        .map(|r| {
            let mut acc = 0.0;
            let mut c: Vec<f64> = r.probs.iter().map(|p| {
                acc += p;
                acc
            }).collect();
            // zero-probability tail symbols must stay unreachable
            let last = r.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
            for x in &mut c[last..] {
                *x = f64::INFINITY;
            }
            c
        })
        .collect();
    let counts: Vec<Vec<u64>> = map_runs(runs, |r| {
        let regime = spec.regime_of(r as usize).expect("validated");
        let mut rng = SeededRng::new(seed, r);
        let mut c = vec![0u64; spec.n_symbols];
        for _ in 0..run_len {
            c[draw_symbol(&cums[regime], &mut rng)] += 1;
        }
        c
    });
    let per_run: Vec<RunSignificance> = counts
        .iter()
        .enumerate()
        .map(|(r, c)| significance(r, spec.regime_of(r).unwrap(), c, &spec.weights, spec.single_run_sem))
        .collect();
    let pooled_counts: Vec<u64> = (0..spec.n_symbols).map(|s| counts.iter().map(|c| c[s]).sum()).collect();
    let mut pooled = significance(runs, usize::MAX, &pooled_counts, &spec.weights, spec.pooled_sem);
    pooled.regime = usize::MAX;
    let half = |range: std::ops::Range<usize>| -> Vec<u64> {
        (0..spec.n_symbols).map(|s| counts[range.clone()].iter().map(|c| c[s]).sum()).collect()
    };
    let homogeneity_halves = chi_square_contingency(&[half(0..runs / 2), half(runs / 2..runs)])?;
    let homogeneity_runs = chi_square_contingency(&counts)?;
    let rejecting_runs = per_run.iter().filter(|r| r.rejects).count();
    Ok(BreakdownReport {
        runs,
        run_len,
        seed,
        contradiction: rejecting_runs > 0 && !pooled.rejects,
        rejecting_runs,
        per_run,
        pooled,
        homogeneity_halves,
        homogeneity_runs,
    })
}
