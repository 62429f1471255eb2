use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use curvenav::geometry::validate_world;
use curvenav::sim::{self, ScenarioSpec, Sidecar, WorldSpec};
use curvenav::synthesis::synthesize;

#[derive(Parser)]
#[command(
    name = "curvenav",
    version,
    about = "Sensor-based navigation simulator and gain synthesis"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (file or preset name). Exit code 0 converged,
    /// 2 collided, 3 timeout or tracking lost, 1 error.
    Run {
        scenario: String,
        /// Write the CSV trace here; a JSON sidecar goes next to it.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Time step in units of r0/v0.
        #[arg(long)]
        dt: Option<f64>,
        /// Disable sensor noise.
        #[arg(long)]
        no_noise: bool,
        /// Print the verdict as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Derive the controller gains for actuation bound M.
    Synth {
        #[arg(long = "M", default_value_t = 5.0)]
        m: f64,
        #[arg(long, default_value_t = 0.151)]
        eps: f64,
        #[arg(long)]
        json: bool,
    },
    /// Check a world (file, scenario file or preset name) against the
    /// separation and rolling-ball conditions. Exit code 2 when invalid.
    Validate {
        world: String,
        #[arg(long)]
        json: bool,
    },
    /// Monte-Carlo success rate over a grid of noise bounds.
    Sweep {
        scenario: String,
        /// Depth bounds as multiples of d0, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.125, 1.0])]
        depth: Vec<f64>,
        /// Angle bounds in degrees, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 1.5, 30.0])]
        angle: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Print a preset scenario as JSON.
    Preset { name: String },
}

// Writes to stdout, ignoring failures such as a closed pipe so that the exit
// code still reports the run outcome.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn load_scenario(arg: &str) -> Result<ScenarioSpec> {
    let path = Path::new(arg);
    if path.exists() {
        return ScenarioSpec::load(path).with_context(|| format!("loading {arg}"));
    }
    Ok(sim::preset(arg)?)
}

fn load_world(arg: &str) -> Result<WorldSpec> {
    let path = Path::new(arg);
    if !path.exists() {
        return Ok(sim::preset(arg)?.world_spec()?.clone());
    }
    let text = std::fs::read_to_string(path)?;
    match WorldSpec::from_json(&text) {
        Ok(w) => Ok(w),
        Err(_) => Ok(ScenarioSpec::load(path)?.world_spec()?.clone()),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Command::Run {
            scenario,
            trace,
            seed,
            dt,
            no_noise,
            json,
        } => {
            let spec = load_scenario(&scenario)?;
            let mut s = spec.build()?;
            if let Some(seed) = seed {
                s = s.with_seed(seed);
            }
            if let Some(dt) = dt {
                let unit = s.params.time_unit();
                s = s.with_dt(dt * unit);
            }
            if no_noise {
                s = s.with_noise(curvenav::NoiseModel::none());
            }
            let result = match &trace {
                Some(path) => {
                    let mut out = BufWriter::new(
                        File::create(path)
                            .with_context(|| format!("creating {}", path.display()))?,
                    );
                    let r = sim::run_with_trace(&s, &mut out)?;
                    out.flush()?;
                    let sidecar = Sidecar {
                        scenario: &spec,
                        seed: s.noise.seed,
                        dt: s.params.dt,
                        gamma: s.params.gamma,
                        result: &r,
                    };
                    std::fs::write(
                        path.with_extension("json"),
                        serde_json::to_string_pretty(&sidecar)?,
                    )?;
                    r
                }
                None => sim::run(&s)?,
            };
            let v = &result.verdict;
            if json {
                out!("{}", serde_json::to_string_pretty(&result)?);
            } else {
                out!("outcome: {} {:?}", v.outcome.name(), v.outcome);
                out!("mode switches: {}", v.mode_switch_count);
                out!("min clearance: {:.6}", v.min_clearance);
                out!(
                    "final position: ({:.6}, {:.6})",
                    v.final_state.x.x,
                    v.final_state.x.y
                );
                for e in &result.events {
                    out!(
                        "  t = {:9.4}  {} -> {}  at ({:.4}, {:.4})",
                        e.t,
                        e.from,
                        e.to,
                        e.x.x,
                        e.x.y
                    );
                }
            }
            Ok(ExitCode::from(v.outcome.exit_code() as u8))
        }
        Command::Synth { m, eps, json } => {
            let report = synthesize(m, eps)?;
            if json {
                out!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                out!("{}", report.to_string().trim_end());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { world, json } => {
            let w = load_world(&world)?.build()?;
            let report = validate_world(&w);
            if json {
                out!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for p in &report.pairs {
                    out!(
                        "pair ({}, {}): separation {:.4} (need {:.4}) hausdorff {:.4} {}",
                        p.a,
                        p.b,
                        p.separation,
                        report.required_separation,
                        p.hausdorff,
                        if p.pass { "ok" } else { "FAIL" }
                    );
                }
                for o in &report.obstacles {
                    out!(
                        "obstacle {}: closed {} max |w| {:.4} {} rolling-ball clearance {:.4} {}",
                        o.id,
                        o.closed,
                        o.max_abs_curvature,
                        if o.curvature_pass { "ok" } else { "FAIL" },
                        o.rolling_ball_clearance,
                        if o.rolling_ball_pass { "ok" } else { "FAIL" }
                    );
                }
                out!(
                    "target ball clearance {:.4} {}",
                    report.target_clearance,
                    if report.target_pass { "ok" } else { "FAIL" }
                );
                out!(
                    "start ball clearance {:.4} {}",
                    report.start_clearance,
                    if report.start_pass { "ok" } else { "FAIL" }
                );
                out!("valid: {}", report.is_valid());
            }
            Ok(if report.is_valid() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Sweep {
            scenario,
            depth,
            angle,
            trials,
            seed,
            json,
        } => {
            let s = load_scenario(&scenario)?.build()?;
            let table = sim::sweep_noise(&s, &depth, &angle, trials, seed)?;
            if json {
                out!("{}", serde_json::to_string_pretty(&table)?);
            } else {
                out!(
                    "{:>10} {:>10} {:>7} {:>9} {:>8} {:>6}",
                    "depth/d0",
                    "angle_deg",
                    "trials",
                    "converged",
                    "collided",
                    "rate"
                );
                for c in &table.cells {
                    out!(
                        "{:>10} {:>10} {:>7} {:>9} {:>8} {:>6.3}",
                        c.depth_bound_over_d0,
                        c.angle_bound_deg,
                        c.trials,
                        c.converged,
                        c.collided,
                        c.rate
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Preset { name } => {
            out!("{}", serde_json::to_string_pretty(&sim::preset(&name)?)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
