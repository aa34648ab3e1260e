//! Tennis-ball instruction sets: each pair carries the outputs `(A0, A3)`
//! for the left station angles `0, 3π/8` and `(B0, B2)` for the right
//! station angles `0, 2π/8`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BallPair {
    pub a0: u8,
    pub a3: u8,
    pub b0: u8,
    pub b2: u8,
    #[serde(with = "bool_as_int")]
    pub prepared: bool,
}

impl BallPair {
    /// Left instruction for the angle index `a ∈ {0, 3}`.
    pub fn left(&self, a: u8) -> u8 {
        if a == 0 {
            self.a0
        } else {
            self.a3
        }
    }

    /// Right instruction for the angle index `b ∈ {0, 2}`.
    pub fn right(&self, b: u8) -> u8 {
        if b == 0 {
            self.b0
        } else {
            self.b2
        }
    }

    fn from_config(index: usize, anticorrelated: bool) -> Self {
        let a0 = (index >> 2 & 1) as u8;
        let a3 = (index >> 1 & 1) as u8;
        let b2 = (index & 1) as u8;
        let b0 = if anticorrelated { 1 - a0 } else { a0 };
        BallPair {
            a0,
            a3,
            b0,
            b2,
            prepared: true,
        }
    }
}

mod bool_as_int {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(*v as u8)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(serde::de::Error::custom(format!("expected 0 or 1, got {v}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TennisVariant {
    /// `A0 ≠ B0` on every pair.
    Strict,
    /// Strict pairs, each left unprepared with probability `p_drop`.
    MissingPairs { p_drop: f64 },
    /// `A0 ≠ B0` only with probability `q`.
    PartialAnticorr { q: f64 },
}

/// Weights over the eight configurations `(A0, A3, B2)`, indexed
/// `A0·4 + A3·2 + B2`. `B0` follows from the anti-correlation flag.
pub type ConfigWeights = [f64; 8];

const fn cfg(a0: usize, a3: usize, b2: usize) -> usize {
    a0 * 4 + a3 * 2 + b2
}

/// Slack weight that places the default partial-anticorrelation model near
/// an 87% Bell violation rate at 800 pairs.
pub const PARTIAL_SLACK_WEIGHT: f64 = 0.008;

/// A ball generator: variant plus the instruction distributions it draws
/// from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TennisModel {
    pub variant: TennisVariant,
    /// Distribution of anti-correlated (`B0 = 1 − A0`) pairs.
    pub strict_weights: ConfigWeights,
    /// Distribution of pairs with `B0 = A0`; used only by the partial variant.
    pub equal_weights: ConfigWeights,
}

impl TennisModel {
    /// Model with the default instruction distributions for `variant`.
    ///
    /// * strict: uniform over the eight anti-correlated configurations, well
    ///   inside both inequalities.
    /// * missing pairs: uniform over the configurations that saturate the
    ///   counter inequality, so the surviving sample sits on the boundary.
    /// * partial: anti-correlated pairs from the two high-variance saturating
    ///   configurations plus a small slack weight; the remaining pairs use the
    ///   only configuration that breaks the inequality (`A3 = A0 = B0`,
    ///   `B2 ≠ A0`).
    pub fn new(variant: TennisVariant) -> Result<Self> {
        let mut strict = [0.0; 8];
        let mut equal = [0.0; 8];
        match variant {
            TennisVariant::Strict => strict = [1.0; 8],
            TennisVariant::MissingPairs { .. } => {
                for a0 in 0..2 {
                    strict[cfg(a0, a0, 1 - a0)] = 1.0;
                    strict[cfg(a0, 1 - a0, a0)] = 1.0;
                    strict[cfg(a0, 1 - a0, 1 - a0)] = 1.0;
                }
            }
            TennisVariant::PartialAnticorr { .. } => {
                for a0 in 0..2 {
                    strict[cfg(a0, a0, 1 - a0)] = (1.0 - PARTIAL_SLACK_WEIGHT) / 2.0;
                    strict[cfg(a0, 1 - a0, a0)] = (1.0 - PARTIAL_SLACK_WEIGHT) / 2.0;
                    strict[cfg(a0, a0, a0)] = PARTIAL_SLACK_WEIGHT;
                    equal[cfg(a0, a0, 1 - a0)] = 1.0;
                }
            }
        }
        Self::with_weights(variant, strict, equal)
    }

    pub fn with_weights(variant: TennisVariant, strict_weights: ConfigWeights, equal_weights: ConfigWeights) -> Result<Self> {
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        match variant {
            TennisVariant::MissingPairs { p_drop } if !prob_ok(p_drop) => {
                return Err(invalid(format!("p_drop {p_drop} outside [0,1]")))
            }
            TennisVariant::PartialAnticorr { q } if !prob_ok(q) => return Err(invalid(format!("q {q} outside [0,1]"))),
            _ => {}
        }
        let check = |w: &ConfigWeights, name: &str, required: bool| -> Result<()> {
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(invalid(format!("{name} weights must be non-negative")));
            }
            if required && w.iter().sum::<f64>() <= 0.0 {
                return Err(invalid(format!("{name} weights have no mass")));
            }
            Ok(())
        };
        check(&strict_weights, "strict", true)?;
        let needs_equal = matches!(variant, TennisVariant::PartialAnticorr { q } if q < 1.0);
        check(&equal_weights, "equal", needs_equal)?;
        Ok(Self {
            variant,
            strict_weights,
            equal_weights,
        })
    }

    fn sample(&self, rng: &mut SeededRng) -> BallPair {
        let anticorrelated = match self.variant {
            TennisVariant::PartialAnticorr { q } if q < 1.0 => rng.bernoulli(q),
            _ => true,
        };
        let weights = if anticorrelated {
            &self.strict_weights
        } else {
            &self.equal_weights
        };
        let mut ball = BallPair::from_config(pick(weights, rng.uniform()), anticorrelated);
        if let TennisVariant::MissingPairs { p_drop } = self.variant {
            if p_drop > 0.0 {
                ball.prepared = !rng.bernoulli(p_drop);
            }
        }
        ball
    }
}

fn pick(weights: &ConfigWeights, u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            acc += w;
            last = i;
            if target < acc {
                return i;
            }
        }
    }
    last
}

pub fn generate_tennis_balls(n_pairs: usize, model: &TennisModel, rng: &mut SeededRng) -> Result<Vec<BallPair>> {
    if n_pairs == 0 {
        return Err(invalid("n_pairs must be at least 1"));
    }
    Ok((0..n_pairs).map(|_| model.sample(rng)).collect())
}
