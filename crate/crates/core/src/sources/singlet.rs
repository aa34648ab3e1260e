use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::SeededRng;
use crate::types::{Angle, Outcome};

/// Quantum expectation `E(AB) = -cos(θ_A - θ_B)` for the singlet state.
pub fn singlet_correlation(theta_a: Angle, theta_b: Angle) -> f64 {
    -(theta_a.radians() - theta_b.radians()).cos()
}

/// Samples one outcome pair from `P(a,b) = (1 - a·b·cos(θ_A - θ_B)) / 4`.
///
/// The law has uniform marginals, so `a` is a fair coin and `b` equals `a`
/// with probability `(1 - cos Δ) / 2`. Consumes exactly two draws.
pub fn sample_singlet_pair(theta_a: Angle, theta_b: Angle, rng: &mut SeededRng) -> (Outcome, Outcome) {
    let cos_delta = (theta_a.radians() - theta_b.radians()).cos();
    let a = Outcome::from_sign(rng.coin());
    let p_equal = 0.5 * (1.0 - cos_delta);
    let b = if rng.uniform() < p_equal { a } else { a.flipped() };
    (a, b)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JitterDensity {
    Uniform,
    /// Normal with standard deviation `sigma`, truncated to the interval.
    TruncatedGaussian { sigma: f64 },
}

/// An analyzer direction that is only known to lie in
/// `[center - half_width, center + half_width]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleJitter {
    pub center: Angle,
    pub half_width: f64,
    pub density: JitterDensity,
}

impl AngleJitter {
    pub fn new(center: Angle, half_width: f64, density: JitterDensity) -> Result<Self> {
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&half_width) {
            return Err(invalid(format!("jitter half_width {half_width} must be in [0, π/2)")));
        }
        if let JitterDensity::TruncatedGaussian { sigma } = density {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(invalid(format!("truncated gaussian sigma {sigma} must be positive")));
            }
        }
        Ok(Self {
            center,
            half_width,
            density,
        })
    }

    pub fn uniform(center: Angle, half_width: f64) -> Result<Self> {
        Self::new(center, half_width, JitterDensity::Uniform)
    }

    /// Draws one direction. A zero-width jitter returns the center without
    /// touching the rng.
    pub fn sample(&self, rng: &mut SeededRng) -> Angle {
        if self.half_width == 0.0 {
            return self.center;
        }
        let w = self.half_width;
        let offset = match self.density {
            JitterDensity::Uniform => (2.0 * rng.uniform() - 1.0) * w,
            JitterDensity::TruncatedGaussian { sigma } => loop {
                let z: f64 = StandardNormal.sample(rng);
                let x = z * sigma;
                if x.abs() <= w {
                    break x;
                }
            },
        };
        Angle::new(self.center.radians() + offset)
    }
}

/// Draws both directions from their jitter densities, then a singlet pair.
pub fn sample_smeared_pair(jitter_a: &AngleJitter, jitter_b: &AngleJitter, rng: &mut SeededRng) -> (Outcome, Outcome) {
    let ta = jitter_a.sample(rng);
    let tb = jitter_b.sample(rng);
    sample_singlet_pair(ta, tb, rng)
}
