//! Obstacle boundaries, the world they live in, and the geometric queries the
//! sensor and collision checks need.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec2 = nalgebra::Vector2<f64>;

/// Default polyline resolution: maximum chord deviation as a fraction of r0.
pub const DEFAULT_RESOLUTION: f64 = 1e-3;

/// Segments per bounding chunk in the polyline acceleration structure.
const CHUNK: usize = 16;

/// Rotation by +π/2 (the operator S).
#[inline]
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

#[inline]
pub fn unit(angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c, s)
}

#[inline]
pub fn angle_of(v: Vec2) -> f64 {
    v.y.atan2(v.x)
}

#[inline]
pub fn rotate(v: Vec2, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("relative curvature |w| = {w:.4} exceeds 1 at s = {s:.4}")]
    CurvatureBoundViolated { s: f64, w: f64 },
    #[error("polyline self-intersects between segments {0} and {1}")]
    SelfIntersection(usize, usize),
    #[error("resolution must be positive, got {0}")]
    InvalidResolution(f64),
    #[error("invalid curve parameter: {0}")]
    InvalidParameter(String),
}

/// Relative curvature w(s) on s ∈ [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurvatureProfile {
    Constant {
        w: f64,
    },
    /// w(s) = (2/π)·arctan(scale·s + offset)
    Arctan {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
    /// w(s) = exp(scale·s + offset)
    Exp {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
    /// w(s) = w0 + (w1 − w0)·s
    Linear {
        w0: f64,
        w1: f64,
    },
    /// Piecewise constant; fractions are normalised to sum to one.
    Piecewise {
        pieces: Vec<ProfilePiece>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePiece {
    pub fraction: f64,
    pub w: f64,
}

impl CurvatureProfile {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Self::Constant { w } => *w,
            Self::Arctan { scale, offset } => 2.0 / PI * (scale * s + offset).atan(),
            Self::Exp { scale, offset } => (scale * s + offset).exp(),
            Self::Linear { w0, w1 } => w0 + (w1 - w0) * s,
            Self::Piecewise { pieces } => {
                let total: f64 = pieces.iter().map(|p| p.fraction).sum();
                let mut acc = 0.0;
                for p in pieces {
                    acc += p.fraction / total;
                    if s < acc {
                        return p.w;
                    }
                }
                pieces.last().map_or(0.0, |p| p.w)
            }
        }
    }

    /// Parameter values where the profile may be discontinuous, including 0 and 1.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Piecewise { pieces } => {
                let total: f64 = pieces.iter().map(|p| p.fraction).sum();
                let mut out = vec![0.0];
                let mut acc = 0.0;
                for p in &pieces[..pieces.len().saturating_sub(1)] {
                    acc += p.fraction / total;
                    out.push(acc);
                }
                out.push(1.0);
                out
            }
            _ => vec![0.0, 1.0],
        }
    }

    /// Maximum |w| over a dense grid (exact for the monotone families).
    pub fn max_abs(&self) -> f64 {
        match self {
            Self::Piecewise { pieces } => pieces.iter().map(|p| p.w.abs()).fold(0.0, f64::max),
            _ => (0..=1000)
                .map(|i| self.eval(i as f64 / 1000.0).abs())
                .fold(0.0, f64::max),
        }
    }

    fn check(&self) -> Result<(), GeometryError> {
        if let Self::Piecewise { pieces } = self {
            if pieces.is_empty() || pieces.iter().any(|p| !(p.fraction > 0.0)) {
                return Err(GeometryError::InvalidParameter(
                    "piecewise profile needs positive fractions".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Debug, Clone)]
struct Chunk {
    center: Vec2,
    radius: f64,
    first: usize,
    last: usize, // exclusive segment index
}

/// Result of a ray query against one obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub point: Vec2,
    pub depth: f64,
    /// Unit tangent of the curve (direction of increasing s) at the impact.
    pub tangent: Vec2,
    pub obstacle: usize,
    pub s: f64,
}

/// An obstacle boundary f(s), s ∈ [0, 1], with |ḟ| = v0 and ḟ rotating at
/// rate v0·w(s)/r0, cached as a dense polyline.
#[derive(Debug, Clone)]
pub struct ObstacleCurve {
    pub profile: CurvatureProfile,
    /// Growth rate: the curve's total length.
    pub v0: f64,
    pub r0: f64,
    pub start_point: Vec2,
    pub start_tangent: Vec2,
    pub closed: bool,
    circle: Option<Circle>,
    points: Vec<Vec2>,
    headings: Vec<f64>,
    params: Vec<f64>,
    chunks: Vec<Chunk>,
}

impl ObstacleCurve {
    /// Integrates the curve by exact per-step rotation of the tangent.
    pub fn build(
        profile: CurvatureProfile,
        v0: f64,
        r0: f64,
        start_point: Vec2,
        start_tangent: Vec2,
        resolution: f64,
    ) -> Result<Self, GeometryError> {
        profile.check()?;
        let grid = 2000;
        for i in 0..=grid {
            let s = i as f64 / grid as f64;
            let w = profile.eval(s);
            if w.abs() > 1.0 + 1e-12 {
                return Err(GeometryError::CurvatureBoundViolated { s, w });
            }
        }
        Self::build_unchecked(profile, v0, r0, start_point, start_tangent, resolution)
    }

    /// Same as [`build`](Self::build) but without the |w| ≤ 1 check; used to
    /// construct deliberately invalid obstacles.
    pub fn build_unchecked(
        profile: CurvatureProfile,
        v0: f64,
        r0: f64,
        start_point: Vec2,
        start_tangent: Vec2,
        resolution: f64,
    ) -> Result<Self, GeometryError> {
        profile.check()?;
        if !(resolution > 0.0) {
            return Err(GeometryError::InvalidResolution(resolution));
        }
        if !(v0 > 0.0) || !(r0 > 0.0) || start_tangent.norm() == 0.0 {
            return Err(GeometryError::InvalidParameter(
                "v0, r0 and |start_tangent| must be positive".into(),
            ));
        }
        let wmax = profile.max_abs().max(1e-9);
        let max_chord = (0.05 * r0).min(r0 * (8.0 * resolution / wmax).sqrt());

        let theta0 = angle_of(start_tangent);
        let mut points = vec![start_point];
        let mut headings = vec![theta0];
        let mut params = vec![0.0];
        let mut p = start_point;
        let mut theta = theta0;
        let bps = profile.breakpoints();
        for win in bps.windows(2) {
            let (a, b) = (win[0], win[1]);
            let n = ((b - a) * v0 / max_chord).ceil().max(1.0) as usize;
            let h = (b - a) / n as f64;
            for k in 0..n {
                let s_mid = a + (k as f64 + 0.5) * h;
                let w = profile.eval(s_mid);
                let len = v0 * h;
                let dtheta = w * len / r0;
                p += len * sinc(0.5 * dtheta) * unit(theta + 0.5 * dtheta);
                theta += dtheta;
                points.push(p);
                headings.push(theta);
                params.push(a + (k + 1) as f64 * h);
            }
        }
        let tol = 10.0 * resolution * r0;
        let closed = (points[points.len() - 1] - start_point).norm() <= tol;
        if closed {
            let last = points.len() - 1;
            points[last] = start_point;
        }
        let mut curve = Self {
            profile,
            v0,
            r0,
            start_point,
            start_tangent: start_tangent.normalize(),
            closed,
            circle: None,
            points,
            headings,
            params,
            chunks: Vec::new(),
        };
        curve.build_chunks();
        curve.check_self_intersection()?;
        Ok(curve)
    }

    /// Counter-clockwise circle (interior on the left of ḟ); radius must be ≥ r0
    /// for |w| ≤ 1.
    pub fn circle(
        center: Vec2,
        radius: f64,
        r0: f64,
        resolution: f64,
    ) -> Result<Self, GeometryError> {
        if !(radius > 0.0) {
            return Err(GeometryError::InvalidParameter(
                "radius must be positive".into(),
            ));
        }
        let mut c = Self::build(
            CurvatureProfile::Constant { w: r0 / radius },
            TAU * radius,
            r0,
            center + Vec2::new(radius, 0.0),
            Vec2::new(0.0, 1.0),
            resolution,
        )?;
        c.closed = true;
        c.circle = Some(Circle { center, radius });
        Ok(c)
    }

    pub fn as_circle(&self) -> Option<Circle> {
        self.circle
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.v0
    }

    /// Relative curvature at parameter s.
    pub fn curvature(&self, s: f64) -> f64 {
        self.profile.eval(s.clamp(0.0, 1.0))
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let s = s.clamp(0.0, 1.0);
        let i = match self.params.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.segment_count() - 1),
            Err(i) => i.saturating_sub(1).min(self.segment_count() - 1),
        };
        let (a, b) = (self.params[i], self.params[i + 1]);
        (i, ((s - a) / (b - a)).clamp(0.0, 1.0))
    }

    pub fn point_at(&self, s: f64) -> Vec2 {
        if let Some(c) = self.circle {
            return c.center + c.radius * unit(TAU * s.clamp(0.0, 1.0));
        }
        let (i, t) = self.locate(s);
        self.points[i] + t * (self.points[i + 1] - self.points[i])
    }

    fn heading_on(&self, i: usize, t: f64) -> f64 {
        self.headings[i] + t * (self.headings[i + 1] - self.headings[i])
    }

    pub fn tangent_at(&self, s: f64) -> Vec2 {
        let (i, t) = self.locate(s);
        unit(self.heading_on(i, t))
    }

    /// Right-hand normal; outward for counter-clockwise closed curves.
    pub fn normal_at(&self, s: f64) -> Vec2 {
        -perp(self.tangent_at(s))
    }

    fn build_chunks(&mut self) {
        let n = self.segment_count();
        let mut chunks = Vec::with_capacity(n / CHUNK + 1);
        let mut first = 0;
        while first < n {
            let last = (first + CHUNK).min(n);
            let pts = &self.points[first..=last];
            let (mut lo, mut hi) = (pts[0], pts[0]);
            for p in pts {
                lo = lo.inf(p);
                hi = hi.sup(p);
            }
            let center = 0.5 * (lo + hi);
            let radius = pts.iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
            chunks.push(Chunk {
                center,
                radius,
                first,
                last,
            });
            first = last;
        }
        self.chunks = chunks;
    }

    fn segment_distance(&self, i: usize, p: Vec2) -> (f64, f64) {
        let a = self.points[i];
        let ab = self.points[i + 1] - a;
        let l2 = ab.norm_squared();
        let t = if l2 > 0.0 {
            ((p - a).dot(&ab) / l2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        ((a + t * ab - p).norm(), t)
    }

    /// Nearest point on the cached polyline: (distance, parameter s, foot point).
    pub fn nearest(&self, p: Vec2) -> (f64, f64, Vec2) {
        if let Some(c) = self.circle {
            let r = p - c.center;
            let dir = if r.norm() > 0.0 {
                r.normalize()
            } else {
                Vec2::new(1.0, 0.0)
            };
            let s = angle_of(dir).rem_euclid(TAU) / TAU;
            return ((r.norm() - c.radius).abs(), s, c.center + c.radius * dir);
        }
        let (d, i, t) = self.nearest_segment(p, f64::INFINITY);
        let s = self.params[i] + t * (self.params[i + 1] - self.params[i]);
        let foot = self.points[i] + t * (self.points[i + 1] - self.points[i]);
        (d, s, foot)
    }

    /// Polyline distance, optionally pruned by an upper bound already known.
    fn nearest_segment(&self, p: Vec2, bound: f64) -> (f64, usize, f64) {
        let mut order: Vec<(f64, usize)> = self
            .chunks
            .iter()
            .enumerate()
            .map(|(k, c)| (((p - c.center).norm() - c.radius).max(0.0), k))
            .collect();
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut best = (bound, 0usize, 0.0);
        for (lb, k) in order {
            if lb > best.0 {
                break;
            }
            let c = &self.chunks[k];
            for i in c.first..c.last {
                let (d, t) = self.segment_distance(i, p);
                if d < best.0 {
                    best = (d, i, t);
                }
            }
        }
        best
    }

    /// Distance from p to the polyline, pruned: returns a value ≥ `bound` when
    /// the curve is farther than `bound`.
    pub fn distance_bounded(&self, p: Vec2, bound: f64) -> f64 {
        if let Some(c) = self.circle {
            return ((p - c.center).norm() - c.radius).abs();
        }
        self.nearest_segment(p, bound).0
    }

    /// First intersection of the ray origin + t·dir, 0 < t < max_range.
    pub fn ray(&self, origin: Vec2, dir: Vec2, max_range: f64) -> Option<(f64, f64, Vec2)> {
        if let Some(c) = self.circle {
            return ray_circle(c, origin, dir, max_range).map(|(t, hit)| {
                let s = angle_of(hit - c.center).rem_euclid(TAU) / TAU;
                (t, s, perp((hit - c.center) / c.radius))
            });
        }
        let mid = origin + 0.5 * max_range * dir;
        let mut best: Option<(f64, usize, f64)> = None;
        for c in &self.chunks {
            if (c.center - mid).norm() > c.radius + 0.5 * max_range {
                continue;
            }
            for i in c.first..c.last {
                let a = self.points[i];
                let b = self.points[i + 1];
                if let Some((t, u)) = ray_segment(origin, dir, a, b) {
                    if t > 0.0 && t < max_range && best.is_none_or(|bb| t < bb.0) {
                        best = Some((t, i, u));
                    }
                }
            }
        }
        best.map(|(t, i, u)| {
            let s = self.params[i] + u * (self.params[i + 1] - self.params[i]);
            (t, s, unit(self.heading_on(i, u)))
        })
    }

    fn check_self_intersection(&self) -> Result<(), GeometryError> {
        let n = self.segment_count();
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[i + 1];
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a).norm();
            for c in &self.chunks {
                if (c.center - mid).norm() > c.radius + half {
                    continue;
                }
                for j in c.first.max(i + 2)..c.last {
                    if self.closed && i == 0 && j == n - 1 {
                        continue;
                    }
                    if segments_intersect(a, b, self.points[j], self.points[j + 1]) {
                        return Err(GeometryError::SelfIntersection(i, j));
                    }
                }
            }
        }
        Ok(())
    }

    /// Worst rolling-ball clearance: min over samples p of dist(p + r0·n, curve) − r0.
    /// Open curves are checked on both sides.
    pub fn rolling_ball_clearance(&self) -> f64 {
        if self.circle.is_some() {
            // The outward ball of a circle touches it only at p.
            return 0.0;
        }
        let sides: &[f64] = if self.closed { &[1.0] } else { &[1.0, -1.0] };
        let mut worst = f64::INFINITY;
        let n = self.points.len();
        for i in 0..n {
            let normal = -perp(unit(self.headings[i]));
            for &side in sides {
                let c = self.points[i] + side * self.r0 * normal;
                let d = self.nearest_segment(c, self.r0 + 1.0).0;
                worst = worst.min(d - self.r0);
            }
        }
        worst
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Ray–segment intersection: returns (t along the ray, u along the segment).
fn ray_segment(o: Vec2, d: Vec2, a: Vec2, b: Vec2) -> Option<(f64, f64)> {
    let e = b - a;
    let den = cross(d, e);
    if den.abs() < 1e-300 {
        return None;
    }
    let ao = a - o;
    let t = cross(ao, e) / den;
    let u = cross(ao, d) / den;
    if (0.0..=1.0).contains(&u) {
        Some((t, u))
    } else {
        None
    }
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Nearest forward intersection of a ray with a circle, strictly inside max_range.
pub fn ray_circle(c: Circle, o: Vec2, d: Vec2, max_range: f64) -> Option<(f64, Vec2)> {
    let oc = o - c.center;
    let b = oc.dot(&d);
    let cc = oc.norm_squared() - c.radius * c.radius;
    let disc = b * b - cc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t = if -b - sq > 0.0 { -b - sq } else { -b + sq };
    if t > 0.0 && t < max_range {
        Some((t, o + t * d))
    } else {
        None
    }
}

/// The line through x(0) along v(0), pointing at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractionLine {
    pub anchor: Vec2,
    pub direction: Vec2,
}

impl AttractionLine {
    pub fn from_start(x0: Vec2) -> Self {
        let direction = if x0.norm() > 0.0 {
            -x0.normalize()
        } else {
            Vec2::new(1.0, 0.0)
        };
        Self {
            anchor: x0,
            direction,
        }
    }

    /// Offset of p from the line, positive on the left of `direction`.
    pub fn signed_offset(&self, p: Vec2) -> f64 {
        cross(self.direction, p - self.anchor)
    }

    pub fn heading(&self) -> f64 {
        angle_of(self.direction)
    }
}

/// The target sits at the origin.
#[derive(Debug, Clone)]
pub struct World {
    pub r0: f64,
    pub v0: f64,
    pub d_m: f64,
    pub start: Vec2,
    pub obstacles: Vec<ObstacleCurve>,
}

impl World {
    pub fn new(r0: f64, v0: f64, start: Vec2, obstacles: Vec<ObstacleCurve>) -> Self {
        Self {
            r0,
            v0,
            d_m: 0.8 * r0,
            start,
            obstacles,
        }
    }

    pub fn attraction_line(&self) -> AttractionLine {
        AttractionLine::from_start(self.start)
    }

    /// Nearest boundary hit along the ray, strictly closer than max_range.
    pub fn ray_intersect(&self, origin: Vec2, dir: Vec2, max_range: f64) -> Option<RayHit> {
        let mut best: Option<RayHit> = None;
        for (k, ob) in self.obstacles.iter().enumerate() {
            let range = best.map_or(max_range, |b| b.depth);
            if let Some((t, s, tangent)) = ob.ray(origin, dir, range) {
                best = Some(RayHit {
                    point: origin + t * dir,
                    depth: t,
                    tangent,
                    obstacle: k,
                    s,
                });
            }
        }
        best
    }

    /// Minimum distance from p to any boundary; +∞ for an empty world.
    pub fn nearest_boundary_distance(&self, p: Vec2) -> (f64, Option<usize>) {
        let mut best = (f64::INFINITY, None);
        for (k, ob) in self.obstacles.iter().enumerate() {
            let d = ob.distance_bounded(p, best.0);
            if d < best.0 {
                best = (d, Some(k));
            }
        }
        best
    }

    pub fn validate(&self) -> ValidationReport {
        validate_world(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub a: usize,
    pub b: usize,
    pub separation: f64,
    pub hausdorff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObstacleReport {
    pub id: usize,
    pub closed: bool,
    pub max_abs_curvature: f64,
    pub curvature_pass: bool,
    pub rolling_ball_clearance: f64,
    pub rolling_ball_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub r0: f64,
    pub required_separation: f64,
    pub pairs: Vec<PairReport>,
    pub obstacles: Vec<ObstacleReport>,
    pub target_clearance: f64,
    pub target_pass: bool,
    pub start_clearance: f64,
    pub start_pass: bool,
}

impl ValidationReport {
    pub fn separation_ok(&self) -> bool {
        self.pairs.iter().all(|p| p.pass)
    }

    pub fn rolling_ball_ok(&self) -> bool {
        self.obstacles.iter().all(|o| o.rolling_ball_pass)
    }

    pub fn curvature_ok(&self) -> bool {
        self.obstacles.iter().all(|o| o.curvature_pass)
    }

    /// Assumption 1 plus the clear start and target balls.
    pub fn is_valid(&self) -> bool {
        self.separation_ok()
            && self.rolling_ball_ok()
            && self.curvature_ok()
            && self.target_pass
            && self.start_pass
    }
}

fn directed_distances(a: &ObstacleCurve, b: &ObstacleCurve) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max: f64 = 0.0;
    for p in a.points() {
        let d = b.nearest(*p).0;
        min = min.min(d);
        max = max.max(d);
    }
    (min, max)
}

/// Checks separation, the rolling-ball condition, the curvature bound and the
/// clear balls around the target and the start.
pub fn validate_world(world: &World) -> ValidationReport {
    let r0 = world.r0;
    let tol = 2.0 * DEFAULT_RESOLUTION * r0;
    let required = 1.6 * r0;
    let mut pairs = Vec::new();
    for i in 0..world.obstacles.len() {
        for j in i + 1..world.obstacles.len() {
            let (a, b) = (&world.obstacles[i], &world.obstacles[j]);
            let (separation, hausdorff) = match (a.as_circle(), b.as_circle()) {
                (Some(ca), Some(cb)) => {
                    let dc = (ca.center - cb.center).norm();
                    let sep = (dc - ca.radius - cb.radius).max(0.0);
                    (sep, dc + (ca.radius - cb.radius).abs())
                }
                _ => {
                    let (min_ab, max_ab) = directed_distances(a, b);
                    let (min_ba, max_ba) = directed_distances(b, a);
                    (min_ab.min(min_ba), max_ab.max(max_ba))
                }
            };
            pairs.push(PairReport {
                a: i,
                b: j,
                separation,
                hausdorff,
                pass: separation >= required - tol,
            });
        }
    }
    let obstacles = world
        .obstacles
        .iter()
        .enumerate()
        .map(|(id, ob)| {
            let max_abs_curvature = ob.profile.max_abs();
            let clearance = ob.rolling_ball_clearance();
            ObstacleReport {
                id,
                closed: ob.closed,
                max_abs_curvature,
                curvature_pass: max_abs_curvature <= 1.0 + 1e-12,
                rolling_ball_clearance: clearance,
                rolling_ball_pass: clearance >= -tol,
            }
        })
        .collect();
    let target_clearance = world.nearest_boundary_distance(Vec2::zeros()).0;
    let start_clearance = world.nearest_boundary_distance(world.start).0;
    ValidationReport {
        r0,
        required_separation: required,
        pairs,
        obstacles,
        target_clearance,
        target_pass: target_clearance > world.d_m,
        start_clearance,
        start_pass: start_clearance > world.d_m,
    }
}
