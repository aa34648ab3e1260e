//! Local-deterministic contextual model.
//!
//! A source emits correlated hidden variables `(λ1, λ2)`; each measuring
//! device contributes its own microstate (`λx` on the left, `λy` on the
//! right) drawn from a distribution that may depend on its setting only.
//! Outcomes are deterministic functions `a = A_x(λ1, λx)`,
//! `b = B_y(λ2, λy)` taking values in `{+1, −1, 0}`, where `0` is a
//! non-detection.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::SeededRng;
use crate::types::{Angle, Outcome, PairedTrial, Setting};

/// Joint law of the source variables `(λ1, λ2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceDist {
    /// `λ1 = λ2` uniform on `[0, 2π)`.
    SharedUniformAngle,
    /// `λ1`, `λ2` independent uniform on `[0, 2π)`.
    IndependentUniformAngles,
}

impl SourceDist {
    fn sample(&self, rng: &mut SeededRng) -> (f64, f64) {
        match self {
            SourceDist::SharedUniformAngle => {
                let l = rng.uniform() * TAU;
                (l, l)
            }
            SourceDist::IndependentUniformAngles => (rng.uniform() * TAU, rng.uniform() * TAU),
        }
    }
}

/// Law of one device microstate. Every variant consumes exactly one draw,
/// so the rng position after the left device never depends on `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeviceDist {
    Uniform { lo: f64, hi: f64 },
    Point { value: f64 },
}

impl DeviceDist {
    fn sample(&self, rng: &mut SeededRng) -> f64 {
        let u = rng.uniform();
        match *self {
            DeviceDist::Uniform { lo, hi } => lo + (hi - lo) * u,
            DeviceDist::Point { value } => value,
        }
    }
}

/// Deterministic response functions `A_x`, `B_y`.
///
/// Implementations return raw integers; anything outside `{+1, −1, 0}`
/// is reported as a contract violation by [`contextual_trial_with`].
pub trait Response {
    fn left(&self, theta: Angle, lambda: f64, device: f64) -> i64;
    fn right(&self, theta: Angle, lambda: f64, device: f64) -> i64;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResponseSpec {
    Constant { a: i8, b: i8 },
    /// `a = sgn cos 2(λ − θ)` detected iff `|cos 2(λ − θ)| ≥ tau0 + gamma·λx`;
    /// the right side is the same with the sign reversed.
    ThresholdDetection { tau0: f64, gamma: f64 },
}

impl ResponseSpec {
    fn threshold(theta: Angle, lambda: f64, device: f64, tau0: f64, gamma: f64) -> i64 {
        let c = (2.0 * (lambda - theta.radians())).cos();
        if c.abs() < tau0 + gamma * device {
            0
        } else if c >= 0.0 {
            1
        } else {
            -1
        }
    }
}

impl Response for ResponseSpec {
    fn left(&self, theta: Angle, lambda: f64, device: f64) -> i64 {
        match *self {
            ResponseSpec::Constant { a, .. } => a as i64,
            ResponseSpec::ThresholdDetection { tau0, gamma } => Self::threshold(theta, lambda, device, tau0, gamma),
        }
    }

    fn right(&self, theta: Angle, lambda: f64, device: f64) -> i64 {
        match *self {
            ResponseSpec::Constant { b, .. } => b as i64,
            ResponseSpec::ThresholdDetection { tau0, gamma } => -Self::threshold(theta, lambda, device, tau0, gamma),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextualParams {
    pub source: SourceDist,
    /// Device law per left setting label.
    pub device_a: Vec<DeviceDist>,
    /// Device law per right setting label.
    pub device_b: Vec<DeviceDist>,
    pub angles_a: Vec<Angle>,
    pub angles_b: Vec<Angle>,
    pub response: ResponseSpec,
}

/// Tuned point of the built-in threshold family.
pub const THRESHOLD_TAU0: f64 = 0.0;
pub const THRESHOLD_GAMMA: f64 = 0.4;

impl ContextualParams {
    /// Built-in threshold-detection model at its tuned parameter point:
    /// left angles `{0, π/4}`, right angles `{π/8, −π/8}`, device noise
    /// uniform on `[0, 1)`.
    pub fn threshold_detection() -> Self {
        Self::threshold_detection_with(THRESHOLD_TAU0, THRESHOLD_GAMMA)
    }

    pub fn threshold_detection_with(tau0: f64, gamma: f64) -> Self {
        let unit = DeviceDist::Uniform { lo: 0.0, hi: 1.0 };
        Self {
            source: SourceDist::SharedUniformAngle,
            device_a: vec![unit; 2],
            device_b: vec![unit; 2],
            angles_a: vec![Angle::new(0.0), Angle::new(FRAC_PI_4)],
            angles_b: vec![Angle::new(FRAC_PI_8), Angle::new(-FRAC_PI_8)],
            response: ResponseSpec::ThresholdDetection { tau0, gamma },
        }
    }

    pub fn constant(a: i8, b: i8) -> Self {
        Self {
            response: ResponseSpec::Constant { a, b },
            ..Self::threshold_detection()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.device_a.len() != self.angles_a.len() || self.device_b.len() != self.angles_b.len() {
            return Err(invalid("one device law and one angle per setting label required"));
        }
        if self.angles_a.is_empty() || self.angles_b.is_empty() {
            return Err(invalid("at least one setting per side"));
        }
        Ok(())
    }

    pub fn settings_a(&self) -> usize {
        self.angles_a.len()
    }

    pub fn settings_b(&self) -> usize {
        self.angles_b.len()
    }
}

fn to_outcome(v: i64, side: &str) -> Result<Outcome> {
    Outcome::try_from(v).map_err(|_| Error::ContractViolation(format!("{side} response returned {v}")))
}

/// One trial of the contextual model using the params' own response spec.
pub fn contextual_trial(x: Setting, y: Setting, params: &ContextualParams, rng: &mut SeededRng) -> Result<PairedTrial> {
    contextual_trial_with(x, y, params, &params.response, rng)
}

/// One trial with an arbitrary response. Draw order is fixed:
/// `(λ1, λ2)`, then `λx`, then `λy`; `a` reads only `(x, λ1, λx)` and
/// `b` only `(y, λ2, λy)`.
pub fn contextual_trial_with<R: Response + ?Sized>(
    x: Setting,
    y: Setting,
    params: &ContextualParams,
    response: &R,
    rng: &mut SeededRng,
) -> Result<PairedTrial> {
    let (xi, yi) = (x.0 as usize, y.0 as usize);
    if xi >= params.settings_a() || yi >= params.settings_b() {
        return Err(invalid(format!("setting ({x}, {y}) not defined for these params")));
    }
    let (l1, l2) = params.source.sample(rng);
    let lx = params.device_a[xi].sample(rng);
    let ly = params.device_b[yi].sample(rng);
    let a = to_outcome(response.left(params.angles_a[xi], l1, lx), "left")?;
    let b = to_outcome(response.right(params.angles_b[yi], l2, ly), "right")?;
    Ok(PairedTrial::new(x, y, a, b))
}
