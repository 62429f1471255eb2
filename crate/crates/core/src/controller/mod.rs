//! Four-mode hybrid controller: follow the attraction line, lock onto a newly
//! seen boundary, track it, and unlock back onto the line.

mod laws;
mod plan;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{saturate, time_to_line_uniform_circular, AgentState, SimParams};
use crate::geometry::{angle_of, wrap_angle, AttractionLine, Vec2};
use crate::sensor::{aim_command, Measurement, SensorError, SensorState};
use crate::synthesis::{phi_m_bound, published, TrackingParams};

pub use laws::{
    follow_segment, offsets_vs_arc, offsets_vs_line, sgn_bl, u_att, u_cir, u_int, u_tr,
};
pub use plan::{
    plan_locking, plan_unlocking, FrozenImpact, LocalFrame, NominalTrajectory, PlanError, Segment,
};

/// Default half-width of the sign boundary layer.
pub const SGN_LAYER: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("mode {0} entered without a plan")]
    PlanMissing(Mode),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
}

/// Every constant the laws and switch predicates use, nondimensional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gains {
    pub m: f64,
    pub att_k_heading: f64,
    pub att_k_offset: f64,
    pub cir_slope: f64,
    pub int_q2: f64,
    /// Coefficient of (d − d0) in the tracking surface.
    pub tr_depth_gain: f64,
    /// Coefficient of (ψ − ψ_center).
    pub tr_angle_gain: f64,
    pub tr_psi_center: f64,
    pub d0: f64,
    pub delta_m: f64,
    pub delta_heading_m: f64,
    pub psi_m: f64,
    /// Sensor lag behind the normal that the tracking design assumes; the
    /// locking plan ends with the ray at this angle.
    pub phi_m: f64,
    pub eps: f64,
    pub p_lock: f64,
    pub sigma: f64,
}

impl Gains {
    /// The rounded constants the controller ships with.
    pub fn published() -> Self {
        let m = 5.0;
        Self {
            m,
            att_k_heading: 1.0,
            att_k_offset: published::ATT_GAIN,
            cir_slope: published::CIRC_SLOPE,
            int_q2: (m - published::DELTA_HEADING_M) / published::DELTA_M,
            tr_depth_gain: published::DEPTH_GAIN,
            tr_angle_gain: published::ANGLE_GAIN,
            tr_psi_center: published::PSI_CENTER,
            d0: published::D0,
            delta_m: published::DELTA_M,
            delta_heading_m: published::DELTA_HEADING_M,
            psi_m: published::PSI_M,
            phi_m: phi_m_bound(m),
            eps: published::EPS,
            p_lock: published::P_LOCK,
            sigma: SGN_LAYER,
        }
    }

    /// Gains straight from the closed-form synthesis, unrounded.
    pub fn from_params(t: &TrackingParams) -> Self {
        let q2 = t.att_gain(t.delta_m);
        Self {
            m: t.m,
            att_k_heading: 1.0,
            att_k_offset: q2,
            cir_slope: t.p_lock / 2.0,
            int_q2: q2,
            tr_depth_gain: t.depth_gain(),
            tr_angle_gain: t.angle_gain(),
            tr_psi_center: t.psi_center(),
            d0: t.d0,
            delta_m: t.delta_m,
            delta_heading_m: t.delta_heading_m,
            psi_m: t.psi_m,
            phi_m: t.phi_m,
            eps: t.eps,
            p_lock: t.p_lock,
            sigma: SGN_LAYER,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    /// Radius of every planned arc, (1+ε)·r0/M.
    pub fn plan_radius(&self, r0: f64) -> f64 {
        (1.0 + self.eps) * r0 / self.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LockPhase {
    Circ1,
    Line,
    Circ2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UnlockPhase {
    Circ1,
    Circ2,
    SensorRealign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Attract,
    Lock(LockPhase),
    Track,
    Unlock(UnlockPhase),
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Attract => "attract",
            Mode::Lock(_) => "lock",
            Mode::Track => "track",
            Mode::Unlock(_) => "unlock",
        }
    }

    pub fn submode(&self) -> &'static str {
        match self {
            Mode::Lock(LockPhase::Circ1) | Mode::Unlock(UnlockPhase::Circ1) => "circ1",
            Mode::Lock(LockPhase::Line) => "line",
            Mode::Lock(LockPhase::Circ2) | Mode::Unlock(UnlockPhase::Circ2) => "circ2",
            Mode::Unlock(UnlockPhase::SensorRealign) => "sensor_realign",
            Mode::Attract | Mode::Track => "",
        }
    }

    /// True when both are the same top-level mode, ignoring submodes.
    pub fn same_kind(&self, other: &Mode) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.submode() {
            "" => f.write_str(self.name()),
            s => write!(f, "{}/{}", self.name(), s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeTransition {
    pub t: f64,
    pub from: Mode,
    pub to: Mode,
    pub x: Vec2,
    pub v: Vec2,
    /// Mode timer just before the reset.
    pub timer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ControlEvent {
    Transition(ModeTransition),
    /// Target ball reached.
    Stop {
        t: f64,
    },
    /// The tracked boundary left the sensor's range.
    TrackingLost {
        t: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    /// Commands before downstream saturation.
    pub u: f64,
    pub u_s: f64,
    pub event: Option<ControlEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControllerState {
    pub mode: Mode,
    pub timer: f64,
    pub line: AttractionLine,
    pub frozen_impact: Option<FrozenImpact>,
    pub plan: Option<NominalTrajectory>,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// +1 when the tracked boundary is on the right.
    pub side: f64,
    pub switch_count: usize,
}

/// Angle between ray and boundary tangent folded into (0, π) as seen with the
/// boundary on the right.
pub fn canonical_psi(psi: f64, side: f64) -> f64 {
    (side * psi).rem_euclid(PI)
}

/// Tracking-error coordinates (d/r0 − d0, ψ − π/2) of a measurement.
pub fn tracking_coordinates(meas: &Measurement, side: f64, r0: f64, d0: f64) -> Option<(f64, f64)> {
    meas.psi
        .map(|psi| (meas.d / r0 - d0, canonical_psi(psi, side) - FRAC_PI_2))
}

impl ControllerState {
    pub fn new(line: AttractionLine) -> Self {
        Self {
            mode: Mode::Attract,
            timer: 0.0,
            line,
            frozen_impact: None,
            plan: None,
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            t3: f64::INFINITY,
            side: 1.0,
            switch_count: 0,
        }
    }

    /// One control period: mode law, then switch predicates, then the timer.
    pub fn step(
        &mut self,
        agent: &AgentState,
        sensor: &SensorState,
        meas: &Measurement,
        params: &SimParams,
        gains: &Gains,
    ) -> Result<StepOutput, ControllerError> {
        let Some((u, u_s)) = self.control(agent, sensor, meas, params, gains)? else {
            return Ok(StepOutput {
                u: 0.0,
                u_s: 0.0,
                event: Some(ControlEvent::TrackingLost { t: agent.t }),
            });
        };
        let event = self.switch(agent, sensor, meas, params, gains)?;
        if matches!(event, Some(ControlEvent::Transition(_))) {
            self.timer = 0.0;
            self.switch_count += 1;
        } else {
            self.timer += params.dt;
        }
        Ok(StepOutput { u, u_s, event })
    }

    fn aim(
        &self,
        agent: &AgentState,
        sensor: &SensorState,
        u: f64,
        params: &SimParams,
    ) -> Result<f64, SensorError> {
        let target = self.frozen_impact.map(|f| f.point);
        match target.map(|p| aim_command(agent, sensor, p, saturate(u, params.m), params)) {
            Some(Err(SensorError::TargetCoincident)) | None => Ok(0.0),
            Some(r) => r,
        }
    }

    fn control(
        &mut self,
        agent: &AgentState,
        sensor: &SensorState,
        meas: &Measurement,
        params: &SimParams,
        gains: &Gains,
    ) -> Result<Option<(f64, f64)>, ControllerError> {
        let r0 = params.r0;
        let out = match self.mode {
            Mode::Attract => {
                let (o, dh) = offsets_vs_line(agent, self.line.anchor, self.line.heading(), r0);
                (u_att(o, dh, gains), 0.0)
            }
            Mode::Lock(_) => {
                let plan = self
                    .plan
                    .as_ref()
                    .ok_or(ControllerError::PlanMissing(self.mode))?;
                let (phase, u) = match plan.segment_at(self.timer) {
                    Some((i, _)) => {
                        let phase = [LockPhase::Circ1, LockPhase::Line, LockPhase::Circ2][i.min(2)];
                        (phase, follow_segment(agent, &plan.segments[i], r0, gains))
                    }
                    // Plan exhausted but the hand-over test failed: keep to the
                    // final tangent line.
                    None => {
                        let (o, dh) =
                            offsets_vs_line(agent, plan.end_point(), plan.end_heading(), r0);
                        (LockPhase::Line, u_int(o, dh, gains))
                    }
                };
                self.mode = Mode::Lock(phase);
                (u, self.aim(agent, sensor, u, params)?)
            }
            Mode::Track => {
                let Some(psi) = meas.psi else { return Ok(None) };
                let u = self.side * u_tr(meas.d / r0, canonical_psi(psi, self.side), gains);
                (u, 0.0)
            }
            Mode::Unlock(_) => {
                let plan = self
                    .plan
                    .as_ref()
                    .ok_or(ControllerError::PlanMissing(self.mode))?;
                match plan.segment_at(self.timer) {
                    Some((i, _)) => {
                        let phase = if i == 0 {
                            UnlockPhase::Circ1
                        } else {
                            UnlockPhase::Circ2
                        };
                        let u = follow_segment(agent, &plan.segments[i], r0, gains);
                        self.mode = Mode::Unlock(phase);
                        (u, self.aim(agent, sensor, u, params)?)
                    }
                    None => {
                        if self.mode != Mode::Unlock(UnlockPhase::SensorRealign) {
                            self.mode = Mode::Unlock(UnlockPhase::SensorRealign);
                            self.t3 = self.timer + sensor.phi.abs() / params.gamma;
                        }
                        let (o, dh) =
                            offsets_vs_line(agent, self.line.anchor, self.line.heading(), r0);
                        let u_s = if sensor.phi.abs() <= params.gamma * params.dt {
                            -sensor.phi / params.dt
                        } else {
                            -sensor.phi.signum() * params.gamma
                        };
                        (u_att(o, dh, gains), u_s)
                    }
                }
            }
        };
        Ok(Some(out))
    }

    fn transition(&mut self, agent: &AgentState, to: Mode) -> ControlEvent {
        let ev = ModeTransition {
            t: agent.t,
            from: self.mode,
            to,
            x: agent.x,
            v: agent.v,
            timer: self.timer,
        };
        self.mode = to;
        ControlEvent::Transition(ev)
    }

    fn switch(
        &mut self,
        agent: &AgentState,
        sensor: &SensorState,
        meas: &Measurement,
        params: &SimParams,
        gains: &Gains,
    ) -> Result<Option<ControlEvent>, ControllerError> {
        let r0 = params.r0;
        let line_dist = self.line.signed_offset(agent.x).abs();
        let radius = gains.plan_radius(r0);
        let ev = match self.mode {
            Mode::Attract => {
                if agent.x.norm() < params.eps_stop {
                    Some(ControlEvent::Stop { t: agent.t })
                } else if let (Some(point), Some(psi)) = (meas.impact, meas.psi) {
                    let frozen = FrozenImpact::from_measurement(point, meas.ray_angle + psi, agent);
                    let plan = plan_locking(agent, &frozen, gains.d0 * r0, gains.phi_m, radius)?;
                    self.t1 = plan.total_time();
                    self.side = frozen.side();
                    self.frozen_impact = Some(frozen);
                    self.plan = Some(plan);
                    Some(self.transition(agent, Mode::Lock(LockPhase::Circ1)))
                } else {
                    None
                }
            }
            Mode::Lock(_) => {
                let f = self
                    .frozen_impact
                    .ok_or(ControllerError::PlanMissing(self.mode))?;
                let dist = (agent.x - f.point).norm() / r0;
                let misalign = wrap_angle(agent.heading - angle_of(f.tangent)).abs();
                if self.timer >= self.t1
                    && (0.5 * gains.d0..=1.5 * gains.d0).contains(&dist)
                    && misalign <= gains.psi_m
                {
                    self.t2 = time_to_line_uniform_circular(agent, &self.line, params);
                    self.frozen_impact = None;
                    self.plan = None;
                    Some(self.transition(agent, Mode::Track))
                } else {
                    None
                }
            }
            Mode::Track => {
                if self.timer >= self.t2 && line_dist <= gains.delta_m * r0 {
                    let plan = plan_unlocking(agent, &self.line, self.side, radius)?;
                    let point = meas
                        .impact
                        .unwrap_or(agent.x + meas.d * crate::geometry::unit(meas.ray_angle));
                    self.frozen_impact =
                        Some(FrozenImpact::from_measurement(point, agent.heading, agent));
                    self.t3 = plan.total_time();
                    self.plan = Some(plan);
                    Some(self.transition(agent, Mode::Unlock(UnlockPhase::Circ1)))
                } else {
                    None
                }
            }
            Mode::Unlock(_) => {
                let misalign = wrap_angle(agent.heading - self.line.heading()).abs();
                if self.timer >= self.t3
                    && misalign <= gains.delta_heading_m
                    && line_dist <= gains.delta_m * r0
                    && sensor.phi == 0.0
                {
                    self.frozen_impact = None;
                    self.plan = None;
                    Some(self.transition(agent, Mode::Attract))
                } else {
                    None
                }
            }
        };
        Ok(ev)
    }
}

/// Functional form of [`ControllerState::step`].
pub fn controller_step(
    ctrl: &ControllerState,
    agent: &AgentState,
    sensor: &SensorState,
    meas: &Measurement,
    params: &SimParams,
    gains: &Gains,
) -> Result<(StepOutput, ControllerState), ControllerError> {
    let mut next = ctrl.clone();
    let out = next.step(agent, sensor, meas, params, gains)?;
    Ok((out, next))
}

#[cfg(test)]
mod tests;
