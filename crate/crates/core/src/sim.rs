//! Closed-loop runner: scenario files, the sense → control → step loop,
//! verdicts, CSV traces, scenario presets and Monte-Carlo noise sweeps.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{
    tracking_coordinates, ControlEvent, ControllerError, ControllerState, Gains, ModeTransition,
};
use crate::dynamics::{agent_step, AgentState, DynamicsError, SimParams};
use crate::geometry::{
    angle_of, unit, CurvatureProfile, GeometryError, ObstacleCurve, ProfilePiece, Vec2, World,
};
use crate::sensor::{sense, sensor_step, NoiseModel, SensorError, SensorState};
use crate::synthesis::{derive_tracking_params, lyapunov_value, TrackingParams};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario parse error: {0}")]
    ScenarioParse(String),
    #[error("world parse error: {0}")]
    WorldParse(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Obstacle description in a world file. Lengths are in world units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObstacleSpec {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    Profile {
        profile: CurvatureProfile,
        /// Total arc length.
        length: f64,
        start: [f64; 2],
        /// Direction of the initial tangent, radians.
        tangent_angle: f64,
        /// Skip the |w| ≤ 1 check (deliberately invalid obstacles).
        #[serde(default)]
        unchecked: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub version: u32,
    pub r0: f64,
    pub v0: f64,
    /// Agent start x(0); the target is the origin.
    pub start: [f64; 2],
    /// Polyline chord tolerance in units of r0.
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    pub obstacles: Vec<ObstacleSpec>,
}

fn default_resolution() -> f64 {
    crate::geometry::DEFAULT_RESOLUTION
}

fn v2(a: [f64; 2]) -> Vec2 {
    Vec2::new(a[0], a[1])
}

impl WorldSpec {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| SimError::WorldParse(e.to_string()))?;
        if spec.version != SCHEMA_VERSION {
            return Err(SimError::WorldParse(format!(
                "unsupported version {}",
                spec.version
            )));
        }
        if !(spec.r0 > 0.0 && spec.v0 > 0.0) {
            return Err(SimError::WorldParse("r0 and v0 must be positive".into()));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<World, SimError> {
        let obstacles = self
            .obstacles
            .iter()
            .map(|o| match *o {
                ObstacleSpec::Circle { center, radius } => {
                    ObstacleCurve::circle(v2(center), radius, self.r0, self.resolution)
                }
                ObstacleSpec::Profile {
                    ref profile,
                    length,
                    start,
                    tangent_angle,
                    unchecked,
                } => {
                    let build = if unchecked {
                        ObstacleCurve::build_unchecked
                    } else {
                        ObstacleCurve::build
                    };
                    build(
                        profile.clone(),
                        length,
                        self.r0,
                        v2(start),
                        unit(tangent_angle),
                        self.resolution,
                    )
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(World::new(self.r0, self.v0, v2(self.start), obstacles))
    }
}

/// Slew limit: a value in units of a0/v0, or one of the two named settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSetting {
    Value(f64),
    Named(GammaPreset),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaPreset {
    /// 0.1·a0/v0.
    Default,
    /// (a0/v0)·(M/(1+ε) + 2r0/d0), enough to hold the frozen point.
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamOverrides {
    pub m: Option<f64>,
    /// Sensor range in units of r0.
    pub d_m: Option<f64>,
    pub gamma: Option<GammaSetting>,
    /// Time step in units of r0/v0.
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub depth_bound_over_d0: f64,
    pub angle_bound_deg: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            depth_bound_over_d0: 0.0,
            angle_bound_deg: 0.0,
            seed: 0,
        }
    }

    pub fn reference(seed: u64) -> Self {
        Self {
            depth_bound_over_d0: 0.125,
            angle_bound_deg: 1.5,
            seed,
        }
    }

    pub fn model(&self, d0: f64, r0: f64) -> NoiseModel {
        NoiseModel {
            depth_bound: self.depth_bound_over_d0 * d0 * r0,
            angle_bound: self.angle_bound_deg.to_radians(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WorldRef {
    Path(PathBuf),
    Inline(WorldSpec),
}

/// Scenario file contents. Times are in units of r0/v0, lengths in r0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub version: u32,
    #[serde(default)]
    pub name: String,
    pub world: WorldRef,
    #[serde(default)]
    pub params: ParamOverrides,
    #[serde(default = "NoiseSpec::none")]
    pub noise: NoiseSpec,
    #[serde(default = "default_max_time")]
    pub max_sim_time: f64,
    #[serde(default = "default_eps_stop")]
    pub eps_stop: f64,
    #[serde(default = "default_decimation")]
    pub trace_decimation: usize,
    #[serde(default = "default_margin")]
    pub collision_margin: f64,
    /// Half-width of the sign boundary layer.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

fn default_max_time() -> f64 {
    200.0
}
fn default_eps_stop() -> f64 {
    0.05
}
fn default_decimation() -> usize {
    10
}
fn default_margin() -> f64 {
    1e-3
}
fn default_sigma() -> f64 {
    crate::controller::SGN_LAYER
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| SimError::ScenarioParse(e.to_string()))?;
        if spec.version != SCHEMA_VERSION {
            return Err(SimError::ScenarioParse(format!(
                "unsupported version {}",
                spec.version
            )));
        }
        Ok(spec)
    }

    /// Loads a scenario; a world given as a path is resolved against the
    /// scenario's directory and inlined.
    pub fn load(path: &Path) -> Result<Self, SimError> {
        let mut spec = Self::from_json(&std::fs::read_to_string(path)?)?;
        if let WorldRef::Path(p) = &spec.world {
            let full = path.parent().map_or_else(|| p.clone(), |d| d.join(p));
            spec.world = WorldRef::Inline(WorldSpec::load(&full)?);
        }
        Ok(spec)
    }

    pub fn world_spec(&self) -> Result<&WorldSpec, SimError> {
        match &self.world {
            WorldRef::Inline(w) => Ok(w),
            WorldRef::Path(p) => Err(SimError::WorldParse(format!(
                "world {} not loaded",
                p.display()
            ))),
        }
    }

    pub fn build(&self) -> Result<Scenario, SimError> {
        let ws = self.world_spec()?;
        let mut world = ws.build()?;
        let gains = Gains::published().with_sigma(self.sigma);
        let mut params = SimParams::new(ws.r0, ws.v0);
        if let Some(m) = self.params.m {
            params.m = m;
        }
        if let Some(d) = self.params.d_m {
            params.d_m = d * ws.r0;
        }
        world.d_m = params.d_m;
        params.gamma = match self.params.gamma {
            None | Some(GammaSetting::Named(GammaPreset::Default)) => params.gamma,
            Some(GammaSetting::Named(GammaPreset::Derived)) => {
                params.required_gamma(gains.eps, gains.d0)
            }
            Some(GammaSetting::Value(g)) => g * params.a0 / params.v0,
        };
        if let Some(dt) = self.params.dt {
            params.dt = dt * params.time_unit();
        }
        params.eps_stop = self.eps_stop * ws.r0;
        let scenario = Scenario {
            name: self.name.clone(),
            world,
            params,
            gains,
            noise: self.noise.model(gains.d0, ws.r0),
            max_sim_time: self.max_sim_time * params.time_unit(),
            trace_decimation: self.trace_decimation.max(1),
            collision_margin: self.collision_margin * ws.r0,
        };
        scenario.check()?;
        Ok(scenario)
    }
}

/// Ready-to-run scenario in world units.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub world: World,
    pub params: SimParams,
    pub gains: Gains,
    pub noise: NoiseModel,
    pub max_sim_time: f64,
    pub trace_decimation: usize,
    pub collision_margin: f64,
}

impl Scenario {
    pub fn check(&self) -> Result<(), SimError> {
        if !(self.max_sim_time > 0.0) {
            return Err(SimError::InvalidScenario(
                "max_sim_time must be positive".into(),
            ));
        }
        if !(self.params.eps_stop > 0.0 && self.params.eps_stop <= self.params.d_m) {
            return Err(SimError::InvalidScenario(
                "eps_stop must lie in (0, d_m]".into(),
            ));
        }
        if !(self.params.dt > 0.0) {
            return Err(SimError::InvalidScenario("dt must be positive".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.noise.seed = seed;
        self
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.params.dt = dt;
        self
    }
}

/// One row of the CSV trace, columns in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub phi: f64,
    pub d: f64,
    pub psi: Option<f64>,
    pub mode: &'static str,
    pub submode: &'static str,
    pub u_applied: f64,
    pub u_s_applied: f64,
    pub v_tracking: Option<f64>,
    pub min_obstacle_distance: f64,
}

pub const TRACE_HEADER: &str =
    "t,x,y,vx,vy,phi,d,psi,mode,submode,u_applied,u_s_applied,v_tracking,min_obstacle_distance";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

impl TraceRow {
    pub fn csv(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{},{:e},{:e},{},{:e}",
            self.t,
            self.x,
            self.y,
            self.vx,
            self.vy,
            self.phi,
            self.d,
            opt(self.psi),
            self.mode,
            self.submode,
            self.u_applied,
            self.u_s_applied,
            opt(self.v_tracking),
            self.min_obstacle_distance
        )
    }
}

/// Everything the loop knows about one step; handed to observers.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub row: TraceRow,
    /// (d/r0 − d0, ψ − π/2) with ψ seen with the boundary on the right;
    /// only while tracking.
    pub tracking: Option<(f64, f64)>,
    /// The same coordinates from a noise-free reading of the same pose.
    pub tracking_exact: Option<(f64, f64)>,
    pub speed_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Converged { t: f64 },
    Collided { t: f64, obstacle: Option<usize> },
    Timeout { t: f64 },
    TrackingLost { t: f64 },
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Converged { .. } => "converged",
            Outcome::Collided { .. } => "collided",
            Outcome::Timeout { .. } => "timeout",
            Outcome::TrackingLost { .. } => "tracking_lost",
        }
    }

    pub fn converged(&self) -> bool {
        matches!(self, Outcome::Converged { .. })
    }

    pub fn collided(&self) -> bool {
        matches!(self, Outcome::Collided { .. })
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Converged { .. } => 0,
            Outcome::Collided { .. } => 2,
            Outcome::Timeout { .. } | Outcome::TrackingLost { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunVerdict {
    pub outcome: Outcome,
    pub mode_switch_count: usize,
    pub min_clearance: f64,
    pub final_state: AgentState,
    pub final_phi: f64,
}

/// Per-run extremes of the physical invariants.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RunStats {
    pub steps: usize,
    pub max_speed_error: f64,
    pub max_abs_u: f64,
    pub max_abs_u_s: f64,
    pub max_plan_gap: f64,
    pub max_plan_tangent_jump: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub verdict: RunVerdict,
    pub events: Vec<ModeTransition>,
    pub stats: RunStats,
}

/// Runs to completion, calling `observer` once per step.
pub fn run_observed(
    scenario: &Scenario,
    mut observer: impl FnMut(&StepRecord),
) -> Result<RunResult, SimError> {
    let p = &scenario.params;
    let g = &scenario.gains;
    let world = &scenario.world;
    let tracking_params: TrackingParams =
        derive_tracking_params(5.0).map_err(|e| SimError::InvalidScenario(e.to_string()))?;
    let line = world.attraction_line();
    let mut agent = AgentState::new(world.start, angle_of(line.direction), p.v0);
    let mut sensor = SensorState::default();
    let mut ctrl = ControllerState::new(line);
    let mut rng = scenario.noise.rng();
    let mut events = Vec::new();
    let mut stats = RunStats {
        steps: 0,
        max_speed_error: 0.0,
        max_abs_u: 0.0,
        max_abs_u_s: 0.0,
        max_plan_gap: 0.0,
        max_plan_tangent_jump: 0.0,
    };
    let mut min_clearance = world.nearest_boundary_distance(agent.x).0;
    let outcome = loop {
        let meas = sense(&agent, &sensor, world, p, &scenario.noise, &mut rng);
        let out = ctrl.step(&agent, &sensor, &meas, p, g)?;
        let tracking = match ctrl.mode {
            crate::controller::Mode::Track => tracking_coordinates(&meas, ctrl.side, p.r0, g.d0),
            _ => None,
        };
        let tracking_exact = match tracking {
            Some(_) if !scenario.noise.is_none() => {
                let exact = sense(
                    &agent,
                    &sensor,
                    world,
                    p,
                    &NoiseModel::none(),
                    &mut scenario.noise.rng(),
                );
                tracking_coordinates(&exact, ctrl.side, p.r0, g.d0)
            }
            other => other,
        };
        let terminal = match out.event {
            Some(ControlEvent::Stop { t }) => Some(Outcome::Converged { t }),
            Some(ControlEvent::TrackingLost { t }) => Some(Outcome::TrackingLost { t }),
            Some(ControlEvent::Transition(tr)) => {
                events.push(tr);
                if let Some(plan) = &ctrl.plan {
                    stats.max_plan_gap = stats.max_plan_gap.max(plan.max_gap());
                    stats.max_plan_tangent_jump =
                        stats.max_plan_tangent_jump.max(plan.max_tangent_jump());
                }
                None
            }
            None => None,
        };
        let (next, u_applied) = agent_step(&agent, out.u, p.dt, p)?;
        let (next_sensor, us_applied) = sensor_step(&sensor, out.u_s, p.dt, p)?;
        let (clearance, nearest) = world.nearest_boundary_distance(agent.x);
        let speed_error = (agent.v.norm() - p.v0).abs();
        let row = TraceRow {
            t: agent.t,
            x: agent.x.x,
            y: agent.x.y,
            vx: agent.v.x,
            vy: agent.v.y,
            phi: sensor.phi,
            d: meas.d,
            psi: meas.psi,
            mode: ctrl.mode.name(),
            submode: ctrl.mode.submode(),
            u_applied: if terminal.is_some() { 0.0 } else { u_applied },
            u_s_applied: if terminal.is_some() { 0.0 } else { us_applied },
            v_tracking: tracking.map(|(a, b)| lyapunov_value(a, b, &tracking_params)),
            min_obstacle_distance: clearance,
        };
        stats.steps += 1;
        stats.max_speed_error = stats.max_speed_error.max(speed_error);
        stats.max_abs_u = stats.max_abs_u.max(row.u_applied.abs());
        stats.max_abs_u_s = stats.max_abs_u_s.max(row.u_s_applied.abs());
        min_clearance = min_clearance.min(clearance);
        observer(&StepRecord {
            row,
            tracking,
            tracking_exact,
            speed_error,
        });
        if clearance < scenario.collision_margin {
            break Outcome::Collided {
                t: agent.t,
                obstacle: nearest,
            };
        }
        if let Some(o) = terminal {
            break o;
        }
        if next.t >= scenario.max_sim_time {
            agent = next;
            break Outcome::Timeout { t: agent.t };
        }
        agent = next;
        sensor = next_sensor;
    };
    Ok(RunResult {
        verdict: RunVerdict {
            outcome,
            mode_switch_count: ctrl.switch_count,
            min_clearance,
            final_state: agent,
            final_phi: sensor.phi,
        },
        events,
        stats,
    })
}

pub fn run(scenario: &Scenario) -> Result<RunResult, SimError> {
    run_observed(scenario, |_| {})
}

/// Runs and writes every `trace_decimation`-th row (plus the last) as CSV.
pub fn run_with_trace(scenario: &Scenario, out: &mut impl Write) -> Result<RunResult, SimError> {
    writeln!(out, "{TRACE_HEADER}")?;
    let mut k = 0usize;
    let mut last: Option<TraceRow> = None;
    let mut err: Option<std::io::Error> = None;
    let result = run_observed(scenario, |rec| {
        if k.is_multiple_of(scenario.trace_decimation) {
            if let Err(e) = writeln!(out, "{}", rec.row.csv()) {
                err.get_or_insert(e);
            }
            last = None;
        } else {
            last = Some(rec.row.clone());
        }
        k += 1;
    })?;
    if let Some(row) = last {
        writeln!(out, "{}", row.csv())?;
    }
    if let Some(e) = err {
        return Err(e.into());
    }
    Ok(result)
}

/// Sidecar written next to a trace: verdict, events and the echoed config.
#[derive(Debug, Serialize)]
pub struct Sidecar<'a> {
    pub scenario: &'a ScenarioSpec,
    pub seed: u64,
    pub dt: f64,
    pub gamma: f64,
    pub result: &'a RunResult,
}

pub const PRESETS: [&str; 4] = ["fig1a", "fig1b", "fig1c", "fig1d"];

fn circle(x: f64, y: f64, r: f64) -> ObstacleSpec {
    ObstacleSpec::Circle {
        center: [x, y],
        radius: r,
    }
}

/// Closed stadium: two half-circles of radius `r` joined by straights of
/// length `l`, traversed counter-clockwise from its lowest-left corner.
fn stadium(x: f64, y: f64, r: f64, l: f64, angle: f64) -> ObstacleSpec {
    let total = 2.0 * l + 2.0 * PI * r;
    let pieces = vec![
        ProfilePiece {
            fraction: l / total,
            w: 0.0,
        },
        ProfilePiece {
            fraction: PI * r / total,
            w: 1.0 / r,
        },
        ProfilePiece {
            fraction: l / total,
            w: 0.0,
        },
        ProfilePiece {
            fraction: PI * r / total,
            w: 1.0 / r,
        },
    ];
    let start = Vec2::new(x, y) + crate::geometry::rotate(Vec2::new(-0.5 * l, -r), angle);
    ObstacleSpec::Profile {
        profile: CurvatureProfile::Piecewise { pieces },
        length: total,
        start: [start.x, start.y],
        tangent_angle: angle,
        unchecked: false,
    }
}

fn preset_world(name: &str) -> Result<WorldSpec, SimError> {
    let base = |start: [f64; 2], obstacles| WorldSpec {
        version: SCHEMA_VERSION,
        r0: 1.0,
        v0: 1.0,
        start,
        resolution: 1e-3,
        obstacles,
    };
    Ok(match name {
        "fig1a" => base(
            [-16.0, 0.0],
            vec![
                circle(-12.0, 0.45, 1.0),
                stadium(-7.0, -0.3, 1.0, 1.5, 0.4),
                circle(-2.3, 0.6, 1.2),
            ],
        ),
        "fig1b" => {
            // Thick C with its mouth facing up: outer radius 4, inner 2,
            // joined by unit half-circle caps. The mouth is narrower than
            // the standoff, so following the rim drops the agent into it.
            let alpha = (2.03f64 / 6.0).asin();
            let total = 4.0 * (2.0 * PI - 2.0 * alpha) + PI + 2.0 * (2.0 * PI - 2.0 * alpha) + PI;
            let f = |len: f64| len / total;
            let pieces = vec![
                ProfilePiece {
                    fraction: f(4.0 * (2.0 * PI - 2.0 * alpha)),
                    w: 0.25,
                },
                ProfilePiece {
                    fraction: f(PI),
                    w: 1.0,
                },
                ProfilePiece {
                    fraction: f(2.0 * (2.0 * PI - 2.0 * alpha)),
                    w: -0.5,
                },
                ProfilePiece {
                    fraction: f(PI),
                    w: 1.0,
                },
            ];
            let c = Vec2::new(-6.0, -0.5);
            let a0 = PI / 2.0 + alpha;
            let start = c + 4.0 * unit(a0);
            base(
                [-14.0, 0.0],
                vec![ObstacleSpec::Profile {
                    profile: CurvatureProfile::Piecewise { pieces },
                    length: total,
                    start: [start.x, start.y],
                    tangent_angle: a0 + PI / 2.0,
                    unchecked: false,
                }],
            )
        }
        "fig1c" => base(
            [-12.0, 0.0],
            vec![ObstacleSpec::Profile {
                profile: CurvatureProfile::Arctan {
                    scale: 1.8,
                    offset: -1.2,
                },
                length: 12.0,
                start: [-10.0, -0.5],
                tangent_angle: 1.3,
                unchecked: false,
            }],
        ),
        "fig1d" => base(
            [-16.0, 0.0],
            vec![ObstacleSpec::Profile {
                profile: CurvatureProfile::Exp {
                    scale: 3.0,
                    offset: -2.0,
                },
                length: 12.0,
                start: [-8.0, -3.0],
                tangent_angle: 1.2,
                unchecked: true,
            }],
        ),
        other => return Err(SimError::UnknownPreset(other.to_string())),
    })
}

/// The four built-in scenarios. All use the slew
/// limit needed for locking and the reference noise level.
pub fn preset(name: &str) -> Result<ScenarioSpec, SimError> {
    let world = preset_world(name)?;
    Ok(ScenarioSpec {
        version: SCHEMA_VERSION,
        name: name.to_string(),
        world: WorldRef::Inline(world),
        params: ParamOverrides {
            gamma: Some(GammaSetting::Named(GammaPreset::Derived)),
            ..Default::default()
        },
        noise: NoiseSpec::reference(1),
        max_sim_time: default_max_time(),
        eps_stop: default_eps_stop(),
        trace_decimation: default_decimation(),
        collision_margin: default_margin(),
        sigma: default_sigma(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepCell {
    pub depth_bound_over_d0: f64,
    pub angle_bound_deg: f64,
    pub trials: usize,
    pub converged: usize,
    pub collided: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub base_seed: u64,
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn cell(&self, depth: f64, angle: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.depth_bound_over_d0 == depth && c.angle_bound_deg == angle)
    }
}

/// Converged fraction over a grid of noise bounds. Trial k of every cell uses
/// seed `base_seed + k`; cells and trials run in parallel.
pub fn sweep_noise(
    scenario: &Scenario,
    depth_bounds_over_d0: &[f64],
    angle_bounds_deg: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<SweepTable, SimError> {
    if trials == 0 {
        return Err(SimError::InvalidScenario(
            "trials must be at least 1".into(),
        ));
    }
    let r0 = scenario.params.r0;
    let d0 = scenario.gains.d0;
    let grid: Vec<(f64, f64)> = depth_bounds_over_d0
        .iter()
        .flat_map(|&d| angle_bounds_deg.iter().map(move |&a| (d, a)))
        .collect();
    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|c| (0..trials as u64).map(move |k| (c, k)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(c, k)| {
            let (d, a) = grid[c];
            let spec = NoiseSpec {
                depth_bound_over_d0: d,
                angle_bound_deg: a,
                seed: base_seed + k,
            };
            let s = scenario.clone().with_noise(spec.model(d0, r0));
            run(&s).map(|r| (c, r.verdict.outcome))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cells = grid
        .iter()
        .enumerate()
        .map(|(c, &(d, a))| {
            let mine: Vec<&Outcome> = outcomes.iter().filter(|o| o.0 == c).map(|o| &o.1).collect();
            let converged = mine.iter().filter(|o| o.converged()).count();
            SweepCell {
                depth_bound_over_d0: d,
                angle_bound_deg: a,
                trials,
                converged,
                collided: mine.iter().filter(|o| o.collided()).count(),
                rate: converged as f64 / trials as f64,
            }
        })
        .collect();
    Ok(SweepTable { base_seed, cells })
}
