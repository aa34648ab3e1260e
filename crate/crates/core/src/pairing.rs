//! Coincidence construction from two station streams.
//!
//! The same pair of streams yields very different correlations depending on
//! how distant outcomes are paired; the schemes here make that explicit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::SeededRng;
use crate::types::{Outcome, PairedTrial, Setting, StationEvent};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairingScheme {
    /// Pair `sa[i]` with `sb[i + k − 1]`.
    Systematic { k: usize },
    /// `m` pairs `(sa[s], sb[t])` with random `s ≤ t`.
    Random { m: usize },
    /// Greedy coincidence matching within `width` windows.
    TimeWindow { width: u64 },
}

impl PairingScheme {
    pub fn apply(&self, sa: &[StationEvent], sb: &[StationEvent], rng: &mut SeededRng) -> Result<Vec<PairedTrial>> {
        match *self {
            PairingScheme::Systematic { k } => pair_systematic(sa, sb, k),
            PairingScheme::Random { m } => pair_random(sa, sb, m, rng),
            PairingScheme::TimeWindow { width } => pair_time_window(sa, sb, width),
        }
    }
}

impl FromStr for PairingScheme {
    type Err = Error;

    /// Parses `systematic:k`, `random:m` or `window:w`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("pairing `{s}`: expected kind:value")))?;
        let n: u64 = arg
            .trim()
            .parse()
            .map_err(|_| invalid(format!("pairing `{s}`: value must be a positive integer")))?;
        if n == 0 {
            return Err(invalid(format!("pairing `{s}`: value must be positive")));
        }
        match kind.trim() {
            "systematic" => Ok(PairingScheme::Systematic { k: n as usize }),
            "random" => Ok(PairingScheme::Random { m: n as usize }),
            "window" => Ok(PairingScheme::TimeWindow { width: n }),
            other => Err(invalid(format!("unknown pairing kind `{other}`"))),
        }
    }
}

impl fmt::Display for PairingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairingScheme::Systematic { k } => write!(f, "systematic:{k}"),
            PairingScheme::Random { m } => write!(f, "random:{m}"),
            PairingScheme::TimeWindow { width } => write!(f, "window:{width}"),
        }
    }
}

fn trial(a: &StationEvent, b: &StationEvent) -> PairedTrial {
    PairedTrial::new(a.setting, b.setting, a.outcome, b.outcome)
}

fn require_non_empty(sa: &[StationEvent], sb: &[StationEvent]) -> Result<()> {
    if sa.is_empty() || sb.is_empty() {
        return Err(invalid("both streams must be non-empty"));
    }
    Ok(())
}

pub fn pair_systematic(sa: &[StationEvent], sb: &[StationEvent], k: usize) -> Result<Vec<PairedTrial>> {
    require_non_empty(sa, sb)?;
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    Ok(sa.iter().zip(sb.iter().skip(k - 1)).map(|(a, b)| trial(a, b)).collect())
}

/// Indices are drawn uniformly with replacement from `0..min(|sa|, |sb|)`
/// and ordered so that `s ≤ t`.
pub fn pair_random(sa: &[StationEvent], sb: &[StationEvent], m: usize, rng: &mut SeededRng) -> Result<Vec<PairedTrial>> {
    require_non_empty(sa, sb)?;
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    let n = sa.len().min(sb.len());
    Ok((0..m)
        .map(|_| {
            let i = rng.index(n);
            let j = rng.index(n);
            let (s, t) = if i <= j { (i, j) } else { (j, i) };
            trial(&sa[s], &sb[t])
        })
        .collect())
}

/// Greedy one-use matching in time order: the earliest unmatched event
/// (ties go to station A) pairs with the earliest unused partner whose
/// window differs by less than `width`; otherwise it becomes a single-count
/// trial whose partner outcome is `0` and partner setting
/// [`Setting::NONE`].
pub fn pair_time_window(ea: &[StationEvent], eb: &[StationEvent], width: u64) -> Result<Vec<PairedTrial>> {
    if width == 0 {
        return Err(invalid("window width must be positive"));
    }
    let single_a = |a: &StationEvent| PairedTrial::new(a.setting, Setting::NONE, a.outcome, Outcome::NoCount);
    let single_b = |b: &StationEvent| PairedTrial::new(Setting::NONE, b.setting, Outcome::NoCount, b.outcome);
    let mut out = Vec::with_capacity(ea.len().max(eb.len()));
    let (mut i, mut j) = (0, 0);
    while i < ea.len() && j < eb.len() {
        let (wa, wb) = (ea[i].window_index, eb[j].window_index);
        if wa.abs_diff(wb) < width {
            out.push(trial(&ea[i], &eb[j]));
            i += 1;
            j += 1;
        } else if wa <= wb {
            out.push(single_a(&ea[i]));
            i += 1;
        } else {
            out.push(single_b(&eb[j]));
            j += 1;
        }
    }
    out.extend(ea[i..].iter().map(single_a));
    out.extend(eb[j..].iter().map(single_b));
    Ok(out)
}

/// Empirical covariance `mean(ab) − mean(a)·mean(b)` (divisor `n`).
///
/// With `coincident_only`, trials containing a `0` outcome are dropped;
/// otherwise `0` enters the sums as a value.
pub fn covariance(trials: &[PairedTrial], coincident_only: bool) -> Result<f64> {
    let (mut n, mut sa, mut sb, mut sab) = (0usize, 0i64, 0i64, 0i64);
    for t in trials {
        if coincident_only && !t.is_coincidence() {
            continue;
        }
        let (a, b) = (t.a.value() as i64, t.b.value() as i64);
        n += 1;
        sa += a;
        sb += b;
        sab += a * b;
    }
    if n < 2 {
        return Err(Error::InsufficientData(format!("covariance needs at least 2 usable trials, got {n}")));
    }
    let nf = n as f64;
    Ok(sab as f64 / nf - (sa as f64 / nf) * (sb as f64 / nf))
}

/// Fraction of output trials that are two-sided coincidences.
pub fn coincidence_fraction(trials: &[PairedTrial]) -> f64 {
    if trials.is_empty() {
        return 0.0;
    }
    trials.iter().filter(|t| t.setting_a != Setting::NONE && t.setting_b != Setting::NONE).count() as f64 / trials.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(values: &[i8]) -> Vec<StationEvent> {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| StationEvent::new(i as u64, Setting(0), Outcome::try_from(*v).unwrap()))
            .collect()
    }

    fn alternating(len: usize, first: i8) -> Vec<StationEvent> {
        stream(&(0..len).map(|i| if i % 2 == 0 { first } else { -first }).collect::<Vec<_>>())
    }

    #[test]
    fn systematic_length() {
        let s = alternating(5, 1);
        assert_eq!(pair_systematic(&s, &s, 3).unwrap().len(), 3);
        assert_eq!(pair_systematic(&s, &s, 7).unwrap().len(), 0);
        assert!(pair_systematic(&[], &s, 1).is_err());
    }

    #[test]
    fn systematic_parity() {
        for k in 1..=8 {
            let sa = alternating(1000, -1);
            let sb = alternating(1000 + k - 1, 1);
            let t = pair_systematic(&sa, &sb, k).unwrap();
            assert_eq!(t.len(), 1000);
            let c = covariance(&t, true).unwrap();
            let expected = if k % 2 == 1 { -1.0 } else { 1.0 };
            assert_eq!(c, expected, "k={k}");
        }
    }

    #[test]
    fn random_pairing_constant_stream() {
        let sa = stream(&[1; 50]);
        let sb = alternating(50, 1);
        let t = pair_random(&sa, &sb, 500, &mut SeededRng::new(0, 0)).unwrap();
        assert_eq!(t.len(), 500);
        assert!(t.iter().all(|x| x.a == Outcome::Plus));
    }

    #[test]
    fn random_pairing_destroys_alternation() {
        let m = 100_000;
        let sa = alternating(1000, -1);
        let sb = alternating(1000, 1);
        let t = pair_random(&sa, &sb, m, &mut SeededRng::new(11, 0)).unwrap();
        assert!(covariance(&t, true).unwrap().abs() <= 4.0 / (m as f64).sqrt());
    }

    #[test]
    fn window_degenerate_matches_systematic() {
        let sa = alternating(40, 1);
        let sb = alternating(40, -1);
        assert_eq!(pair_time_window(&sa, &sb, 1).unwrap(), pair_systematic(&sa, &sb, 1).unwrap());
    }

    #[test]
    fn window_shift_gives_singles() {
        let sa = alternating(20, 1);
        let sb: Vec<_> = sa
            .iter()
            .map(|e| StationEvent::new(e.window_index * 3 + 2, e.setting, e.outcome))
            .collect();
        let sa: Vec<_> = sa.iter().map(|e| StationEvent::new(e.window_index * 3, e.setting, e.outcome)).collect();
        let t = pair_time_window(&sa, &sb, 1).unwrap();
        assert_eq!(t.len(), 40);
        assert!(t.iter().all(|x| !x.is_coincidence()));
        assert_eq!(coincidence_fraction(&t), 0.0);
    }

    #[test]
    fn covariance_needs_two() {
        let t = [PairedTrial::new(Setting(0), Setting(0), Outcome::Plus, Outcome::Plus)];
        assert!(matches!(covariance(&t, true), Err(Error::InsufficientData(_))));
        let t2 = [t[0], PairedTrial::new(Setting(0), Setting(0), Outcome::NoCount, Outcome::Plus)];
        assert!(covariance(&t2, true).is_err());
        assert!(covariance(&t2, false).is_ok());
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("systematic:3".parse::<PairingScheme>().unwrap(), PairingScheme::Systematic { k: 3 });
        assert_eq!("random:10".parse::<PairingScheme>().unwrap(), PairingScheme::Random { m: 10 });
        assert_eq!("window:2".parse::<PairingScheme>().unwrap(), PairingScheme::TimeWindow { width: 2 });
        assert!("window:0".parse::<PairingScheme>().is_err());
        assert!("bogus:1".parse::<PairingScheme>().is_err());
        assert!("random".parse::<PairingScheme>().is_err());
        assert_eq!(PairingScheme::Random { m: 4 }.to_string(), "random:4");
    }
}
