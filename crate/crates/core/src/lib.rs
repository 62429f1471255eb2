//! Navigation of a constant-speed, turn-limited agent towards a target through
//! a field of unknown curvature-bounded obstacles, using a single rotating
//! depth sensor.

// `!(x > 0.0)` style guards are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod dynamics;
pub mod geometry;
pub mod sensor;
pub mod sim;
pub mod synthesis;

pub use controller::{
    controller_step, plan_locking, plan_unlocking, ControlEvent, ControllerError, ControllerState,
    Gains, Mode, ModeTransition, NominalTrajectory, Segment,
};
pub use dynamics::{
    agent_step, time_to_line_uniform_circular, AgentState, DynamicsError, SimParams,
};
pub use geometry::{
    validate_world, AttractionLine, CurvatureProfile, GeometryError, ObstacleCurve, ProfilePiece,
    RayHit, ValidationReport, Vec2, World,
};
pub use sensor::{
    aim_command, sense, sensor_step, Measurement, NoiseModel, SensorError, SensorState,
};
pub use sim::{
    preset, run, run_observed, sweep_noise, Outcome, RunResult, RunVerdict, Scenario, ScenarioSpec,
    TraceRow,
};
pub use synthesis::{
    derive_tracking_params, synthesize, SynthesisError, SynthesisReport, TrackingParams,
};
