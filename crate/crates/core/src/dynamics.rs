//! Constant-speed agent with bounded turn rate: ẋ = v, v̇ = (a0·u/v0)·S·v.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{cross, unit, AttractionLine, Vec2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("time step must be positive, got {0}")]
    NonpositiveDt(f64),
}

/// Shared physical constants of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub v0: f64,
    pub r0: f64,
    pub a0: f64,
    /// Actuation bound; r0 / r_a.
    pub m: f64,
    pub d_m: f64,
    /// Sensor slew limit (rad per time).
    pub gamma: f64,
    pub dt: f64,
    pub eps_stop: f64,
}

impl SimParams {
    /// Defaults: M = 5, d_m = 0.8·r0, γ = 0.1·a0/v0, dt = 1e-3 in units of v0/a0.
    pub fn new(r0: f64, v0: f64) -> Self {
        let a0 = v0 * v0 / r0;
        Self {
            v0,
            r0,
            a0,
            m: 5.0,
            d_m: 0.8 * r0,
            gamma: 0.1 * a0 / v0,
            dt: 1e-3 * v0 / a0,
            eps_stop: 0.05 * r0,
        }
    }

    /// Time unit v0/a0 = r0/v0.
    pub fn time_unit(&self) -> f64 {
        self.v0 / self.a0
    }

    /// Minimum turning radius r0/M.
    pub fn r_a(&self) -> f64 {
        self.r0 / self.m
    }

    /// Slew rate needed to hold the sensor on a frozen point while locking:
    /// (a0/v0)·(M/(1+ε) + 2·r0/d0).
    pub fn required_gamma(&self, eps: f64, d0: f64) -> f64 {
        self.a0 / self.v0 * (self.m / (1.0 + eps) + 2.0 / d0)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }
}

/// Position, heading and time. The velocity is v0·(cos h, sin h), so |v| = v0
/// holds by construction rather than by renormalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub x: Vec2,
    pub v: Vec2,
    pub heading: f64,
    pub t: f64,
}

impl AgentState {
    pub fn new(x: Vec2, heading: f64, v0: f64) -> Self {
        Self {
            x,
            v: v0 * unit(heading),
            heading,
            t: 0.0,
        }
    }

    pub fn direction(&self) -> Vec2 {
        unit(self.heading)
    }
}

pub fn saturate(u: f64, bound: f64) -> f64 {
    u.clamp(-bound, bound)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Exact solution over [t, t+dt] for a held control; returns the new state and
/// the control actually applied after saturation.
pub fn agent_step(
    state: &AgentState,
    u: f64,
    dt: f64,
    params: &SimParams,
) -> Result<(AgentState, f64), DynamicsError> {
    if !(dt > 0.0) {
        return Err(DynamicsError::NonpositiveDt(dt));
    }
    let applied = saturate(u, params.m);
    let omega = params.a0 * applied / params.v0;
    let dtheta = omega * dt;
    // Chord of the arc: length v0·dt·sinc(dθ/2) along the mid-step heading.
    let chord = params.v0 * dt * sinc(0.5 * dtheta);
    let x = state.x + chord * unit(state.heading + 0.5 * dtheta);
    let heading = state.heading + dtheta;
    let next = AgentState {
        x,
        v: params.v0 * unit(heading),
        heading,
        t: state.t + dt,
    };
    Ok((next, applied))
}

/// Smallest positive time for uniform circular motion of radius v0²/a0 = r0,
/// turning towards the line, to reach it. Zero when already on the line and
/// parallel to it; +∞ when the circle never meets the line.
pub fn time_to_line_uniform_circular(
    state: &AgentState,
    line: &AttractionLine,
    params: &SimParams,
) -> f64 {
    let r = params.v0 * params.v0 / params.a0;
    let omega = params.v0 / r;
    let dir = state.direction();
    let e = line.signed_offset(state.x);
    let tol = 1e-12 * params.r0;
    if e.abs() <= tol && cross(line.direction, dir).abs() <= 1e-12 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    let mut best_center_offset = f64::INFINITY;
    for s in [1.0, -1.0] {
        // s = +1: counter-clockwise, centre on the left.
        let center = state.x + s * r * crate::geometry::perp(dir);
        let ec = line.signed_offset(center);
        if ec.abs() > best_center_offset + tol {
            continue;
        }
        let t = first_crossing(state.x, center, s, r, omega, line);
        if ec.abs() < best_center_offset - tol {
            best = t;
            best_center_offset = ec.abs();
        } else {
            best = best.min(t);
        }
    }
    best
}

fn first_crossing(x: Vec2, center: Vec2, s: f64, r: f64, omega: f64, line: &AttractionLine) -> f64 {
    // Offset along the circle: e(τ) = e_c + r·sin(β + s·ω·τ).
    let ec = line.signed_offset(center);
    let k = -ec / r;
    // A circle that only grazes the line does not reach it.
    if k.abs() >= 1.0 - 1e-12 {
        return f64::INFINITY;
    }
    let rel = x - center;
    let beta = crate::geometry::angle_of(rel) - line.heading();
    let a = k.asin();
    let mut best = f64::INFINITY;
    for root in [a, PI - a] {
        // s·ω·τ ≡ root − β (mod 2π), smallest τ > 0.
        let mut phase = (s * (root - beta)).rem_euclid(TAU);
        if phase < 1e-9 {
            phase += TAU;
        }
        best = best.min(phase / omega);
    }
    best
}
