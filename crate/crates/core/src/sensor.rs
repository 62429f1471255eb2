//! Single-beam depth sensor mounted at an angle φ from the velocity.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{AgentState, SimParams};
use crate::geometry::{angle_of, cross, rotate, wrap_angle, Vec2, World};

/// Feedback gain of the aiming loop, in units of a0/v0.
pub const AIM_GAIN: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error("time step must be positive, got {0}")]
    NonpositiveDt(f64),
    #[error("aim target coincides with the agent")]
    TargetCoincident,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorState {
    /// Offset of the ray from the velocity, in (−π, π].
    pub phi: f64,
    pub locked_target: Option<Vec2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement {
    /// Depth in (0, d_m]; equal to d_m when nothing is seen.
    pub d: f64,
    /// Angle from the ray to the curve tangent ḟ, counter-clockwise positive.
    pub psi: Option<f64>,
    /// Impact point as perceived through the (possibly noisy) depth.
    pub impact: Option<Vec2>,
    pub obstacle: Option<usize>,
    /// World angle of the ray.
    pub ray_angle: f64,
}

impl Measurement {
    pub fn hit(&self) -> bool {
        self.psi.is_some()
    }
}

/// Bounded i.i.d. uniform noise on depth (length) and angle (rad).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub depth_bound: f64,
    pub angle_bound: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self {
            depth_bound: 0.0,
            angle_bound: 0.0,
            seed: 0,
        }
    }

    pub fn is_none(&self) -> bool {
        self.depth_bound == 0.0 && self.angle_bound == 0.0
    }

    /// d0/8 on depth and 1.5° on angle.
    pub fn reference(d0: f64, r0: f64, seed: u64) -> Self {
        Self {
            depth_bound: d0 * r0 / 8.0,
            angle_bound: 1.5_f64.to_radians(),
            seed,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        use rand::SeedableRng;
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn draw(rng: &mut ChaCha8Rng, bound: f64) -> f64 {
    if bound > 0.0 {
        rng.random_range(-bound..=bound)
    } else {
        0.0
    }
}

/// Casts the ray along v rotated by φ and applies noise to hits.
pub fn sense(
    agent: &AgentState,
    sensor: &SensorState,
    world: &World,
    params: &SimParams,
    noise: &NoiseModel,
    rng: &mut ChaCha8Rng,
) -> Measurement {
    let ray_angle = agent.heading + sensor.phi;
    let dir = rotate(agent.direction(), sensor.phi);
    match world.ray_intersect(agent.x, dir, params.d_m) {
        None => Measurement {
            d: params.d_m,
            psi: None,
            impact: None,
            obstacle: None,
            ray_angle,
        },
        Some(hit) => {
            let nd = draw(rng, noise.depth_bound);
            let npsi = draw(rng, noise.angle_bound);
            // Noise must not turn a detection into a miss or a negative depth.
            let d = (hit.depth + nd).clamp(1e-9 * params.r0, params.d_m * (1.0 - 1e-12));
            let psi = wrap_angle(angle_of(hit.tangent) - ray_angle) + npsi;
            Measurement {
                d,
                psi: Some(psi),
                impact: Some(agent.x + d * dir),
                obstacle: Some(hit.obstacle),
                ray_angle,
            }
        }
    }
}

/// Advances φ by the saturated rate; returns the new state and the rate applied.
pub fn sensor_step(
    sensor: &SensorState,
    u_s: f64,
    dt: f64,
    params: &SimParams,
) -> Result<(SensorState, f64), SensorError> {
    if !(dt > 0.0) {
        return Err(SensorError::NonpositiveDt(dt));
    }
    let applied = u_s.clamp(-params.gamma, params.gamma);
    let mut phi = wrap_angle(sensor.phi + applied * dt);
    // A realignment step that lands within rounding of zero is exactly aligned.
    if phi.abs() < 1e-12 {
        phi = 0.0;
    }
    Ok((SensorState { phi, ..*sensor }, applied))
}

/// Rate that keeps the ray on a fixed point: bearing feed-forward
/// φ̇ = θ̇_bearing − (a0/v0)·u plus proportional correction, saturated at ±γ.
pub fn aim_command(
    agent: &AgentState,
    sensor: &SensorState,
    target: Vec2,
    u: f64,
    params: &SimParams,
) -> Result<f64, SensorError> {
    let r = target - agent.x;
    if r.norm() < 1e-6 * params.r0 {
        return Err(SensorError::TargetCoincident);
    }
    let error = wrap_angle(angle_of(r) - agent.heading - sensor.phi);
    let bearing_rate = -cross(r, agent.v) / r.norm_squared();
    let turn_rate = params.a0 / params.v0 * u;
    let k = AIM_GAIN * params.a0 / params.v0;
    Ok((bearing_rate - turn_rate + k * error).clamp(-params.gamma, params.gamma))
}
