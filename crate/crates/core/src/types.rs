//! Value types shared by every module.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Ternary detection result of one station in one time window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Outcome {
    Minus,
    NoCount,
    Plus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Minus => -1,
            Outcome::NoCount => 0,
            Outcome::Plus => 1,
        }
    }

    pub fn is_count(self) -> bool {
        self != Outcome::NoCount
    }

    /// `+1` for `true`, `-1` for `false`.
    pub fn from_sign(positive: bool) -> Self {
        if positive {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    /// Binary instruction bit to outcome: `1 -> +1`, `0 -> -1`.
    pub fn from_bit(bit: u8) -> Self {
        Self::from_sign(bit != 0)
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Minus => Outcome::Plus,
            Outcome::NoCount => Outcome::NoCount,
            Outcome::Plus => Outcome::Minus,
        }
    }
}

impl TryFrom<i8> for Outcome {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self, Error> {
        Self::try_from(v as i64)
    }
}

impl TryFrom<i64> for Outcome {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self, Error> {
        match v {
            -1 => Ok(Outcome::Minus),
            0 => Ok(Outcome::NoCount),
            1 => Ok(Outcome::Plus),
            other => Err(Error::InvalidOutcome(other)),
        }
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        o.value()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Analyzer direction in radians, normalized into `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub fn new(radians: f64) -> Self {
        let r = radians.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        Angle(if r >= TAU { 0.0 } else { r })
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

impl From<f64> for Angle {
    fn from(r: f64) -> Self {
        Angle::new(r)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

/// Integer setting label. Models map labels to angles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Setting(pub u8);

impl Setting {
    /// Partner setting of a single-count record whose partner was never seen.
    pub const NONE: Setting = Setting(u8::MAX);
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One element of a station's ordered output stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationEvent {
    pub window_index: u64,
    #[serde(rename = "setting_label")]
    pub setting: Setting,
    pub outcome: Outcome,
}

impl StationEvent {
    pub fn new(window_index: u64, setting: Setting, outcome: Outcome) -> Self {
        Self {
            window_index,
            setting,
            outcome,
        }
    }
}

/// One coincidence record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedTrial {
    pub setting_a: Setting,
    pub setting_b: Setting,
    pub a: Outcome,
    pub b: Outcome,
}

impl PairedTrial {
    pub fn new(setting_a: Setting, setting_b: Setting, a: Outcome, b: Outcome) -> Self {
        Self {
            setting_a,
            setting_b,
            a,
            b,
        }
    }

    pub fn is_coincidence(&self) -> bool {
        self.a.is_count() && self.b.is_count()
    }

    /// `a·b`, or `None` when either side did not count.
    pub fn product(&self) -> Option<i8> {
        self.is_coincidence().then(|| self.a.value() * self.b.value())
    }
}

/// A trial stamped with the time window it was recorded in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedTrial {
    pub window_index: u64,
    #[serde(flatten)]
    pub trial: PairedTrial,
}

pub type CountKey = (Setting, Setting, Outcome, Outcome);

/// Counts keyed by `(setting_a, setting_b, a, b)`; missing keys read as zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CountTable {
    cells: BTreeMap<CountKey, u64>,
    total: u64,
}

impl CountTable {
    pub fn get(&self, key: CountKey) -> u64 {
        self.cells.get(&key).copied().unwrap_or(0)
    }

    pub fn count(&self, sa: Setting, sb: Setting, a: Outcome, b: Outcome) -> u64 {
        self.get((sa, sb, a, b))
    }

    pub fn add(&mut self, trial: &PairedTrial) {
        *self
            .cells
            .entry((trial.setting_a, trial.setting_b, trial.a, trial.b))
            .or_insert(0) += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Non-zero cells in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&CountKey, &u64)> {
        self.cells.iter()
    }
}

pub fn tabulate(trials: &[PairedTrial]) -> CountTable {
    let mut table = CountTable::default();
    for t in trials {
        table.add(t);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn outcome_round_trips_through_integers() {
        for v in [-1i8, 0, 1] {
            assert_eq!(Outcome::try_from(v).unwrap().value(), v);
        }
        assert!(matches!(Outcome::try_from(2i8), Err(Error::InvalidOutcome(2))));
    }

    #[test]
    fn product_excludes_no_count() {
        let t = PairedTrial::new(Setting(0), Setting(0), Outcome::Plus, Outcome::NoCount);
        assert_eq!(t.product(), None);
        let t = PairedTrial::new(Setting(0), Setting(0), Outcome::Plus, Outcome::Minus);
        assert_eq!(t.product(), Some(-1));
    }

    #[test]
    fn angle_normalizes() {
        assert!((Angle::new(-std::f64::consts::FRAC_PI_2).radians() - 1.5 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(Angle::new(TAU).radians(), 0.0);
        assert!(Angle::new(-1e-300).radians() < TAU);
    }

    #[test]
    fn tabulate_empty() {
        let t = tabulate(&[]);
        assert_eq!(t.total(), 0);
        assert_eq!(t.count(Setting(1), Setting(1), Outcome::Plus, Outcome::Minus), 0);
    }

    #[test]
    fn tabulate_constant_input() {
        let tr = PairedTrial::new(Setting(1), Setting(1), Outcome::Plus, Outcome::Minus);
        let t = tabulate(&[tr, tr, tr]);
        assert_eq!(t.count(Setting(1), Setting(1), Outcome::Plus, Outcome::Minus), 3);
        assert_eq!(t.count(Setting(1), Setting(1), Outcome::Plus, Outcome::Plus), 0);
        assert_eq!(t.iter().count(), 1);
    }

    fn outcome() -> impl Strategy<Value = Outcome> {
        prop_oneof![Just(Outcome::Minus), Just(Outcome::NoCount), Just(Outcome::Plus)]
    }

    proptest! {
        #[test]
        fn tabulate_conserves_count(v in prop::collection::vec((0u8..3, 0u8..3, outcome(), outcome()), 0..200)) {
            let trials: Vec<_> = v.iter().map(|&(x, y, a, b)| PairedTrial::new(Setting(x), Setting(y), a, b)).collect();
            let t = tabulate(&trials);
            prop_assert_eq!(t.total(), trials.len() as u64);
            prop_assert_eq!(t.iter().map(|(_, c)| *c).sum::<u64>(), trials.len() as u64);
        }
    }
}
