//! Nominal trajectories for the locking and unlocking manoeuvres: chains of
//! circular arcs and straight lines flown at constant speed.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::AgentState;
use crate::geometry::{angle_of, cross, perp, unit, wrap_angle, AttractionLine, Vec2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("no common tangent satisfies the orientation constraints")]
    NoTangentExists,
    #[error("plan radius must be positive, got {0}")]
    InvalidRadius(f64),
}

/// One piece of a nominal path. Arcs turn counter-clockwise when `turn` is +1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    Arc {
        center: Vec2,
        radius: f64,
        turn: f64,
        start_angle: f64,
        span: f64,
    },
    Line {
        start: Vec2,
        heading: f64,
        length: f64,
    },
}

impl Segment {
    pub fn length(&self) -> f64 {
        match *self {
            Segment::Arc { radius, span, .. } => radius * span,
            Segment::Line { length, .. } => length,
        }
    }

    /// Radius with the turning sign attached; infinite for lines.
    pub fn signed_radius(&self) -> f64 {
        match *self {
            Segment::Arc { radius, turn, .. } => turn * radius,
            Segment::Line { .. } => f64::INFINITY,
        }
    }

    /// Point after travelling arc length `s` from the segment start.
    pub fn point_at(&self, s: f64) -> Vec2 {
        match *self {
            Segment::Arc {
                center,
                radius,
                turn,
                start_angle,
                ..
            } => center + radius * unit(start_angle + turn * s / radius),
            Segment::Line { start, heading, .. } => start + s * unit(heading),
        }
    }

    pub fn heading_at(&self, s: f64) -> f64 {
        match *self {
            Segment::Arc {
                radius,
                turn,
                start_angle,
                ..
            } => wrap_angle(start_angle + turn * s / radius + turn * FRAC_PI_2),
            Segment::Line { heading, .. } => heading,
        }
    }

    pub fn start_point(&self) -> Vec2 {
        self.point_at(0.0)
    }

    pub fn end_point(&self) -> Vec2 {
        self.point_at(self.length())
    }

    pub fn start_heading(&self) -> f64 {
        self.heading_at(0.0)
    }

    pub fn end_heading(&self) -> f64 {
        self.heading_at(self.length())
    }

    /// Smallest value of n·(p − origin) over the segment.
    fn min_along(&self, origin: Vec2, n: Vec2) -> f64 {
        match *self {
            Segment::Arc {
                center,
                radius,
                turn,
                start_angle,
                span,
            } => {
                let (lo, hi) = if turn > 0.0 {
                    (start_angle, start_angle + span)
                } else {
                    (start_angle - span, start_angle)
                };
                let alpha = angle_of(n);
                let worst = alpha + PI;
                let k = ((lo - worst) / TAU).ceil();
                let base = n.dot(&(center - origin));
                if worst + k * TAU <= hi {
                    base - radius
                } else {
                    base + radius * (lo - alpha).cos().min((hi - alpha).cos())
                }
            }
            Segment::Line { .. } => n
                .dot(&(self.start_point() - origin))
                .min(n.dot(&(self.end_point() - origin))),
        }
    }
}

/// Orthonormal frame at the frozen impact point: real axis along the tangent,
/// imaginary axis along the normal towards free space. May be left-handed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalFrame {
    pub origin: Vec2,
    pub real: Vec2,
    pub imag: Vec2,
}

impl LocalFrame {
    pub fn to_local(&self, p: Vec2) -> Vec2 {
        let r = p - self.origin;
        Vec2::new(r.dot(&self.real), r.dot(&self.imag))
    }

    pub fn mirrored(&self) -> bool {
        cross(self.real, self.imag) < 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NominalTrajectory {
    pub segments: Vec<Segment>,
    pub frame: LocalFrame,
    pub v0: f64,
    /// Turn word such as "RSL"; 'S' marks a straight piece.
    pub word: String,
}

impl NominalTrajectory {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    pub fn total_time(&self) -> f64 {
        self.length() / self.v0
    }

    /// Active segment index and the time already spent in it; `None` once
    /// the plan has run out.
    pub fn segment_at(&self, t: f64) -> Option<(usize, f64)> {
        let mut start = 0.0;
        for (i, seg) in self.segments.iter().enumerate() {
            let dur = seg.length() / self.v0;
            if t < start + dur {
                return Some((i, t - start));
            }
            start += dur;
        }
        None
    }

    pub fn end_point(&self) -> Vec2 {
        self.segments
            .last()
            .map_or(self.frame.origin, Segment::end_point)
    }

    pub fn end_heading(&self) -> f64 {
        self.segments.last().map_or(0.0, Segment::end_heading)
    }

    /// Largest positional gap between consecutive segments.
    pub fn max_gap(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| (w[0].end_point() - w[1].start_point()).norm())
            .fold(0.0, f64::max)
    }

    /// Largest heading jump between consecutive segments.
    pub fn max_tangent_jump(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| wrap_angle(w[0].end_heading() - w[1].start_heading()).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_radius(&self) -> f64 {
        self.segments
            .iter()
            .filter_map(|s| match *s {
                Segment::Arc { radius, .. } => Some(radius),
                Segment::Line { .. } => None,
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Turn direction of the first arc with non-zero span, if any.
    pub fn first_turn(&self) -> Option<f64> {
        self.segments.iter().find_map(|s| match *s {
            Segment::Arc { turn, span, .. } if span > 1e-9 => Some(turn),
            _ => None,
        })
    }

    /// Smallest height above the line through `origin` with normal `n`.
    pub fn min_height(&self, origin: Vec2, n: Vec2) -> f64 {
        self.segments
            .iter()
            .map(|s| s.min_along(origin, n))
            .fold(f64::INFINITY, f64::min)
    }

    /// Points spaced at most `step` apart along the path.
    pub fn sample(&self, step: f64) -> Vec<Vec2> {
        let mut out = Vec::new();
        for seg in &self.segments {
            let n = (seg.length() / step).ceil().max(1.0) as usize;
            for i in 0..n {
                out.push(seg.point_at(seg.length() * i as f64 / n as f64));
            }
        }
        out.push(self.end_point());
        out
    }
}

/// Obstacle information frozen at the first detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrozenImpact {
    pub point: Vec2,
    /// Unit tangent oriented with the agent's velocity.
    pub tangent: Vec2,
    /// Unit normal pointing from the boundary towards the agent.
    pub normal: Vec2,
}

impl FrozenImpact {
    /// Builds the frame from a measured tangent angle.
    pub fn from_measurement(point: Vec2, tangent_angle: f64, agent: &AgentState) -> Self {
        let mut tangent = unit(tangent_angle);
        if tangent.dot(&agent.v) < 0.0 {
            tangent = -tangent;
        }
        let mut normal = perp(tangent);
        if normal.dot(&(agent.x - point)) < 0.0 {
            normal = -normal;
        }
        Self {
            point,
            tangent,
            normal,
        }
    }

    /// +1 when the boundary lies on the agent's right while it travels along
    /// the tangent.
    pub fn side(&self) -> f64 {
        if cross(self.tangent, self.normal) > 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn frame(&self) -> LocalFrame {
        LocalFrame {
            origin: self.point,
            real: self.tangent,
            imag: self.normal,
        }
    }
}

fn arc(center: Vec2, radius: f64, turn: f64, from: Vec2, span: f64) -> Segment {
    Segment::Arc {
        center,
        radius,
        turn,
        start_angle: angle_of(from - center),
        span,
    }
}

/// Angle turned in direction `turn` to go from heading `from` to `to`.
fn turn_span(from: f64, to: f64, turn: f64) -> f64 {
    let s = (turn * (to - from)).rem_euclid(TAU);
    if s > TAU - 1e-9 {
        0.0
    } else {
        s
    }
}

/// Circle–straight–circle path with turn directions `a`, `b` (±1).
fn csc(p0: Vec2, h0: f64, p1: Vec2, h1: f64, r: f64, a: f64, b: f64) -> Option<Vec<Segment>> {
    let c0 = p0 + a * r * perp(unit(h0));
    let c1 = p1 + b * r * perp(unit(h1));
    let d = c1 - c0;
    let dist = d.norm();
    let (hu, ell) = if a == b {
        if dist < 1e-12 * r {
            (h1, 0.0)
        } else {
            (angle_of(d), dist)
        }
    } else {
        if dist < 2.0 * r {
            return None;
        }
        let ell = (dist * dist - 4.0 * r * r).max(0.0).sqrt();
        (angle_of(d) + (2.0 * a * r).atan2(ell), ell)
    };
    let span0 = turn_span(h0, hu, a);
    let first = arc(c0, r, a, p0, span0);
    let t0 = first.end_point();
    let line = Segment::Line {
        start: t0,
        heading: wrap_angle(hu),
        length: ell,
    };
    let t1 = line.end_point();
    let span1 = turn_span(hu, h1, b);
    let last = arc(c1, r, b, t1, span1);
    Some(vec![first, line, last])
}

fn letter(turn: f64, frame: &LocalFrame) -> char {
    let ccw = (turn > 0.0) != frame.mirrored();
    if ccw {
        'L'
    } else {
        'R'
    }
}

/// Path from the agent to the standoff point at distance d0 from f_p, arriving
/// along the frozen tangent with the ray to f_p lagging the normal by `lag`. All four CSC words are built; the shortest one that keeps
/// at least d0/2 above the frozen tangent line wins, otherwise the one with
/// the most clearance. Letters in `word` refer to the local frame.
pub fn plan_locking(
    agent: &AgentState,
    impact: &FrozenImpact,
    d0: f64,
    lag: f64,
    radius: f64,
) -> Result<NominalTrajectory, PlanError> {
    if !(radius > 0.0) {
        return Err(PlanError::InvalidRadius(radius));
    }
    let frame = impact.frame();
    let goal = impact.point + d0 * (lag.cos() * impact.normal + lag.sin() * impact.tangent);
    let goal_heading = angle_of(impact.tangent);
    let floor = 0.5 * d0 - 1e-9 * radius;
    let mut best_safe: Option<(f64, Vec<Segment>, f64, f64)> = None;
    let mut best_any: Option<(f64, Vec<Segment>, f64, f64)> = None;
    for a in [1.0, -1.0] {
        for b in [1.0, -1.0] {
            let Some(segs) = csc(agent.x, agent.heading, goal, goal_heading, radius, a, b) else {
                continue;
            };
            let len: f64 = segs.iter().map(Segment::length).sum();
            let clearance = segs
                .iter()
                .map(|s| s.min_along(impact.point, impact.normal))
                .fold(f64::INFINITY, f64::min);
            if clearance >= floor && best_safe.as_ref().is_none_or(|b| len < b.0) {
                best_safe = Some((len, segs.clone(), a, b));
            }
            if best_any.as_ref().is_none_or(|b| clearance > b.0) {
                best_any = Some((clearance, segs, a, b));
            }
        }
    }
    let (_, segments, a, b) = best_safe.or(best_any).ok_or(PlanError::NoTangentExists)?;
    let word = format!("{}S{}", letter(a, &frame), letter(b, &frame));
    Ok(NominalTrajectory {
        segments,
        frame,
        v0: agent.v.norm(),
        word,
    })
}

/// Two tangent arcs of radius `radius` that take the agent from its current
/// pose onto the attraction line, heading along it. The first arc turns away
/// from the obstacle (`side` as in [`FrozenImpact::side`]).
pub fn plan_unlocking(
    agent: &AgentState,
    line: &AttractionLine,
    side: f64,
    radius: f64,
) -> Result<NominalTrajectory, PlanError> {
    if !(radius > 0.0) {
        return Err(PlanError::InvalidRadius(radius));
    }
    let r = radius;
    let a = side.signum();
    let b = -a;
    let dir = line.direction;
    let normal = perp(dir);
    let along = (agent.x - line.anchor).dot(&dir);
    let origin = line.anchor + along * dir;
    let frame = LocalFrame {
        origin,
        real: dir,
        imag: a * normal,
    };
    let v0 = agent.v.norm();
    let c1 = agent.x + a * r * perp(agent.direction());
    let c1_along = (c1 - line.anchor).dot(&dir);
    let gap = b * r - line.signed_offset(c1);
    let disc = 4.0 * r * r - gap * gap;
    let line_heading = line.heading();
    let mut best: Option<(f64, Vec<Segment>)> = None;
    if disc >= 0.0 {
        for sign in [1.0, -1.0] {
            let s = c1_along + sign * disc.sqrt();
            let c2 = line.anchor + s * dir + b * r * normal;
            let touch = 0.5 * (c1 + c2);
            let h_touch = angle_of(c2 - c1) + a * FRAC_PI_2;
            let first = arc(c1, r, a, agent.x, turn_span(agent.heading, h_touch, a));
            let second = arc(
                c2,
                r,
                b,
                first.end_point(),
                turn_span(h_touch, line_heading, b),
            );
            debug_assert!((first.end_point() - touch).norm() < 1e-6 * r);
            let len = first.length() + second.length();
            if best.as_ref().is_none_or(|x| len < x.0) {
                best = Some((len, vec![first, second]));
            }
        }
    }
    if let Some((_, segments)) = best {
        return Ok(NominalTrajectory {
            segments,
            frame,
            v0,
            word: "LR".into(),
        });
    }
    // Too far from the line for two touching arcs: fall back to the shortest
    // CSC path onto a point ahead on the line.
    let target = origin + 3.0 * r * dir;
    let mut fallback: Option<(f64, Vec<Segment>, f64, f64)> = None;
    for p in [1.0, -1.0] {
        for q in [1.0, -1.0] {
            if let Some(segs) = csc(agent.x, agent.heading, target, line_heading, r, p, q) {
                let len: f64 = segs.iter().map(Segment::length).sum();
                if fallback.as_ref().is_none_or(|x| len < x.0) {
                    fallback = Some((len, segs, p, q));
                }
            }
        }
    }
    let (_, segments, p, q) = fallback.ok_or(PlanError::NoTangentExists)?;
    let word = format!("{}S{}", letter(p, &frame), letter(q, &frame));
    Ok(NominalTrajectory {
        segments,
        frame,
        v0,
        word,
    })
}
