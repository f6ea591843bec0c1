use serde::{Deserialize, Serialize};

use super::FabricError;

/// Shape of the bounce probability curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BounceParams {
    /// Utilization at or below which nothing is bounced.
    pub theta: f64,
    /// Decay constant; larger values bounce earlier and penalize repeat
    /// bounces less.
    pub lambda: f64,
}

impl BounceParams {
    /// `theta` in `[0, 1]` (1 disables bouncing) and `lambda >= 0` (0 is the
    /// linear limit of the curve).
    pub fn new(theta: f64, lambda: f64) -> Result<Self, FabricError> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(FabricError::BadTheta(theta));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(FabricError::BadLambda(lambda));
        }
        Ok(Self { theta, lambda })
    }
}

/// Probability of bouncing a frame that has already been bounced
/// `bounced_hop` times, given the destined queue's utilization.
///
/// Zero up to `theta`, one at a full queue, and in between
/// `(e^{λ(θ-u)/(n+1)} - 1) / (e^{λ(θ-1)/(n+1)} - 1)`. Both exponents are
/// non-positive, so the ratio is evaluated with `exp_m1` without overflow
/// for any `lambda`.
pub fn bounce_probability(
    util: f64,
    bounced_hop: u32,
    params: BounceParams,
) -> Result<f64, FabricError> {
    if !(0.0..=1.0).contains(&util) {
        return Err(FabricError::BadUtil(util));
    }
    let BounceParams { theta, lambda } = params;
    if util <= theta {
        return Ok(0.0);
    }
    if util >= 1.0 {
        return Ok(1.0);
    }
    let scale = lambda / (f64::from(bounced_hop) + 1.0);
    let denom = (scale * (theta - 1.0)).exp_m1();
    let p = if denom == 0.0 {
        // lambda -> 0: the curve degenerates to a straight line
        (util - theta) / (1.0 - theta)
    } else {
        (scale * (theta - util)).exp_m1() / denom
    };
    Ok(p.clamp(0.0, 1.0))
}
