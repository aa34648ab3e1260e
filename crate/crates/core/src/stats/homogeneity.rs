use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::error::{invalid, Error, Result};

/// Data in time order. Parts are always contiguous slices of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomogeneityInput {
    Values(Vec<f64>),
    Symbols(Vec<u32>),
}

impl HomogeneityInput {
    fn len(&self) -> usize {
        match self {
            HomogeneityInput::Values(v) => v.len(),
            HomogeneityInput::Symbols(s) => s.len(),
        }
    }

    fn as_values(&self) -> Vec<f64> {
        match self {
            HomogeneityInput::Values(v) => v.clone(),
            HomogeneityInput::Symbols(s) => s.iter().map(|&x| x as f64).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum HomogeneityMethod {
    ChiSquareSplits { parts: usize },
    TwoSampleKs,
    RunsTest,
}

impl HomogeneityMethod {
    pub fn all() -> [HomogeneityMethod; 3] {
        [
            HomogeneityMethod::ChiSquareSplits { parts: 2 },
            HomogeneityMethod::TwoSampleKs,
            HomogeneityMethod::RunsTest,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            HomogeneityMethod::ChiSquareSplits { .. } => "chi_square_splits",
            HomogeneityMethod::TwoSampleKs => "two_sample_ks",
            HomogeneityMethod::RunsTest => "runs_test",
        }
    }
}

impl std::str::FromStr for HomogeneityMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, arg) {
            ("chi_square_splits" | "chi2", None) => Ok(HomogeneityMethod::ChiSquareSplits { parts: 2 }),
            ("chi_square_splits" | "chi2", Some(r)) => {
                let parts = r.parse().map_err(|_| invalid(format!("bad part count '{r}'")))?;
                Ok(HomogeneityMethod::ChiSquareSplits { parts })
            }
            ("two_sample_ks" | "ks", None) => Ok(HomogeneityMethod::TwoSampleKs),
            ("runs_test" | "runs", None) => Ok(HomogeneityMethod::RunsTest),
            _ => Err(invalid(format!("unknown homogeneity method '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityResult {
    pub method: String,
    pub statistic: f64,
    pub p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub df: Option<f64>,
    pub parts: usize,
    pub n: usize,
}

pub fn homogeneity_test(input: &HomogeneityInput, method: HomogeneityMethod) -> Result<HomogeneityResult> {
    match method {
        HomogeneityMethod::ChiSquareSplits { parts } => chi_square_splits(input, parts),
        HomogeneityMethod::TwoSampleKs => {
            let v = input.as_values();
            let (a, b) = v.split_at(v.len() / 2);
            two_sample_ks(a, b)
        }
        HomogeneityMethod::RunsTest => runs_test(&input.as_values()),
    }
}

fn chi_square_splits(input: &HomogeneityInput, parts: usize) -> Result<HomogeneityResult> {
    if parts < 2 {
        return Err(invalid("chi_square_splits needs at least 2 parts"));
    }
    let n = input.len();
    if n < 2 * parts {
        return Err(Error::InsufficientData(format!("{n} items cannot fill {parts} parts")));
    }
    let categories: Vec<usize> = match input {
        HomogeneityInput::Symbols(s) => s.iter().map(|&x| x as usize).collect(),
        HomogeneityInput::Values(v) => quantile_categories(v, parts),
    };
    let k = categories.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; k]; parts];
    for (p, row) in table.iter_mut().enumerate() {
        // part p covers [p·n/r, (p+1)·n/r)
        for &c in &categories[p * n / parts..(p + 1) * n / parts] {
            row[c] += 1;
        }
    }
    let mut r = chi_square_contingency(&table)?;
    r.n = n;
    Ok(r)
}

/// Pooled-quantile categories, about five expected items per cell and at
/// most ten categories.
fn quantile_categories(values: &[f64], parts: usize) -> Vec<usize> {
    let n = values.len();
    let q = (n / (5 * parts)).clamp(2, 10);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cuts: Vec<f64> = (1..q).map(|j| sorted[j * n / q]).collect();
    values.iter().map(|v| cuts.partition_point(|c| c <= v)).collect()
}

/// Pearson chi-square for an r×k table of counts. All-zero columns are
/// dropped; an empty row is an error.
pub fn chi_square_contingency(table: &[Vec<u64>]) -> Result<HomogeneityResult> {
    let r = table.len();
    if r < 2 {
        return Err(invalid("contingency table needs at least 2 rows"));
    }
    let k = table[0].len();
    if table.iter().any(|row| row.len() != k) {
        return Err(invalid("ragged contingency table"));
    }
    let row_tot: Vec<f64> = table.iter().map(|row| row.iter().sum::<u64>() as f64).collect();
    if row_tot.contains(&0.0) {
        return Err(Error::InsufficientData("a part has no data".into()));
    }
    let col_tot: Vec<f64> = (0..k).map(|c| table.iter().map(|row| row[c]).sum::<u64>() as f64).collect();
    let total: f64 = row_tot.iter().sum();
    let live: Vec<usize> = (0..k).filter(|&c| col_tot[c] > 0.0).collect();
    let mut stat = 0.0;
    for (i, row) in table.iter().enumerate() {
        for &c in &live {
            let e = row_tot[i] * col_tot[c] / total;
            stat += (row[c] as f64 - e).powi(2) / e;
        }
    }
    let df = ((r - 1) * live.len().saturating_sub(1)) as f64;
    let p_value = if df == 0.0 || stat <= 0.0 { 1.0 } else { gamma_ur(df / 2.0, stat / 2.0) };
    Ok(HomogeneityResult {
        method: "chi_square_splits".into(),
        statistic: stat,
        p_value,
        df: Some(df),
        parts: r,
        n: total as usize,
    })
}

/// Two-sample Kolmogorov-Smirnov with the asymptotic distribution and
/// Stephens' small-sample correction.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<HomogeneityResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData("two_sample_ks needs at least 2 items per half".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    let ne = (n1 * n2 / (n1 + n2)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    Ok(HomogeneityResult {
        method: "two_sample_ks".into(),
        statistic: d,
        p_value: kolmogorov_sf(lambda),
        df: None,
        parts: 2,
        n: x.len() + y.len(),
    })
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // theta-function form converges fast for small λ
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda * (y + y.powi(9) + y.powi(25) + y.powi(49));
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let x = (-2.0 * lambda * lambda).exp();
        (2.0 * (x - x.powi(4) + x.powi(9) - x.powi(16))).clamp(0.0, 1.0)
    }
}

/// Wald-Wolfowitz runs above/below the median (ties with the median
/// dropped), normal approximation.
pub fn runs_test(values: &[f64]) -> Result<HomogeneityResult> {
    if values.len() < 3 {
        return Err(Error::InsufficientData("runs_test needs at least 3 items".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };
    let signs: Vec<bool> = values.iter().filter(|&&v| v != median).map(|&v| v > median).collect();
    let n1 = signs.iter().filter(|&&s| s).count() as f64;
    let n2 = signs.len() as f64 - n1;
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::InsufficientData("runs_test: all items on one side of the median".into()));
    }
    let runs = 1 + signs.windows(2).filter(|w| w[0] != w[1]).count();
    let n = n1 + n2;
    let mu = 2.0 * n1 * n2 / n + 1.0;
    let var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0));
    let z = if var > 0.0 { (runs as f64 - mu) / var.sqrt() } else { 0.0 };
    Ok(HomogeneityResult {
        method: "runs_test".into(),
        statistic: z,
        p_value: erfc(z.abs() / std::f64::consts::SQRT_2),
        df: None,
        parts: 2,
        n: values.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn duplicated_halves_give_zero() {
        let mut rng = SeededRng::new(3, 0);
        let half: Vec<f64> = (0..500).map(|_| rng.uniform()).collect();
        let v = [half.clone(), half].concat();
        let r = homogeneity_test(&HomogeneityInput::Values(v), HomogeneityMethod::ChiSquareSplits { parts: 2 }).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);

        let s: Vec<u32> = (0..100).map(|i| i % 6).collect();
        let s = [s.clone(), s].concat();
        let r = homogeneity_test(&HomogeneityInput::Symbols(s), HomogeneityMethod::ChiSquareSplits { parts: 2 }).unwrap();
        assert_eq!(r.statistic, 0.0);
    }

    #[test]
    fn contingency_by_hand() {
        // 2×2 with expected 15 everywhere
        let r = chi_square_contingency(&[vec![10, 20], vec![20, 10]]).unwrap();
        assert!((r.statistic - 4.0 * 25.0 / 15.0).abs() < 1e-12);
        assert_eq!(r.df, Some(1.0));
        let p = erfc((r.statistic).sqrt() / std::f64::consts::SQRT_2);
        assert!((r.p_value - p).abs() < 1e-10);
        assert!(chi_square_contingency(&[vec![1, 2], vec![0, 0]]).is_err());
    }

    #[test]
    fn kolmogorov_branches_agree() {
        for l in [1.1, 1.15, 1.18, 1.2, 1.3] {
            let x = (-2.0f64 * l * l).exp();
            let series: f64 = (1..50).map(|k| 2.0 * (-1f64).powi(k - 1) * x.powi(k * k)).sum();
            assert!((kolmogorov_sf(l) - series).abs() < 1e-9, "{l}");
        }
        assert!((kolmogorov_sf(1.358) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn shifted_halves_detected() {
        let mut rng = SeededRng::new(4, 0);
        let v: Vec<f64> = (0..4000).map(|i| rng.uniform() + if i < 2000 { 0.0 } else { 0.5 }).collect();
        let input = HomogeneityInput::Values(v);
        for m in HomogeneityMethod::all() {
            let r = homogeneity_test(&input, m).unwrap();
            assert!(r.p_value < 1e-6, "{} {}", r.method, r.p_value);
        }
    }

    #[test]
    fn alternating_sequence_has_too_many_runs() {
        let v: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let r = runs_test(&v).unwrap();
        assert!(r.statistic > 9.0);
    }

    #[test]
    fn insufficient_data() {
        assert!(homogeneity_test(&HomogeneityInput::Values(vec![1.0, 2.0, 3.0]), HomogeneityMethod::ChiSquareSplits { parts: 2 }).is_err());
        assert!(two_sample_ks(&[1.0], &[2.0, 3.0]).is_err());
        assert!(runs_test(&[1.0, 1.0, 1.0]).is_err());
    }
}
