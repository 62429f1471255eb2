//! Feedback laws and the offsets they consume. Inputs are nondimensional:
//! offsets in r0, angles in radians.

use std::f64::consts::FRAC_PI_2;

use crate::dynamics::AgentState;
use crate::geometry::{angle_of, cross, unit, wrap_angle, Vec2};

use super::plan::Segment;
use super::Gains;

/// Sign function with a linear boundary layer of half-width `sigma`.
pub fn sgn_bl(s: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        (s / sigma).clamp(-1.0, 1.0)
    } else if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Attraction-line law, u = −k_δ·δ − k_Δ·Δ.
pub fn u_att(offset: f64, dheading: f64, g: &Gains) -> f64 {
    -g.att_k_heading * dheading - g.att_k_offset * offset
}

/// Sliding law on a planned arc, u = −M·sgn(δ − slope·Δ).
pub fn u_cir(offset: f64, dheading: f64, g: &Gains) -> f64 {
    -g.m * sgn_bl(dheading - g.cir_slope * offset, g.sigma)
}

/// Planned-line law, u = −δ − q²·Δ.
pub fn u_int(offset: f64, dheading: f64, g: &Gains) -> f64 {
    -dheading - g.int_q2 * offset
}

/// Wall-following law for a boundary on the agent's right. `depth` is d/r0
/// and `psi` the ray-to-tangent angle, nominally π/2.
pub fn u_tr(depth: f64, psi: f64, g: &Gains) -> f64 {
    -g.m * sgn_bl(
        g.tr_depth_gain * (depth - g.d0) - g.tr_angle_gain * (psi - g.tr_psi_center),
        g.sigma,
    )
}

/// (Δ, δ) against an arc, mirrored so that the arc turns counter-clockwise:
/// Δ is the radial excess over the nominal radius, δ the heading error.
pub fn offsets_vs_arc(
    agent: &AgentState,
    center: Vec2,
    radius: f64,
    turn: f64,
    r0: f64,
) -> (f64, f64) {
    let rel = agent.x - center;
    let offset = (rel.norm() - radius) / r0;
    let nominal = angle_of(rel) + turn * FRAC_PI_2;
    (offset, turn * wrap_angle(agent.heading - nominal))
}

/// (Δ, δ) against a line: Δ is the signed offset (left positive) and δ the
/// heading error.
pub fn offsets_vs_line(agent: &AgentState, start: Vec2, heading: f64, r0: f64) -> (f64, f64) {
    let offset = cross(unit(heading), agent.x - start) / r0;
    (offset, wrap_angle(agent.heading - heading))
}

/// Control for following one planned segment.
pub fn follow_segment(agent: &AgentState, seg: &Segment, r0: f64, g: &Gains) -> f64 {
    match *seg {
        Segment::Arc {
            center,
            radius,
            turn,
            ..
        } => {
            let (offset, dh) = offsets_vs_arc(agent, center, radius, turn, r0);
            turn * u_cir(offset, dh, g)
        }
        Segment::Line { start, heading, .. } => {
            let (offset, dh) = offsets_vs_line(agent, start, heading, r0);
            u_int(offset, dh, g)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn g() -> Gains {
        Gains::published()
    }

    #[test]
    fn attraction_law_values() {
        assert_eq!(u_att(0.0, 0.0, &g()), 0.0);
        assert_relative_eq!(u_att(0.03, 0.103, &g()), -4.993, epsilon = 1e-12);
        assert_relative_eq!(u_att(-0.01, 0.0, &g()), 1.63, epsilon = 1e-12);
    }

    #[test]
    fn arc_law_values() {
        assert_relative_eq!(u_cir(0.01, 0.034, &g()), 0.0, epsilon = 1e-9);
        assert_eq!(u_cir(0.0, 0.05, &g()), -5.0);
        assert_eq!(u_cir(0.02, 0.0, &g()), 5.0);
    }

    #[test]
    fn line_law_values() {
        assert_eq!(u_int(0.0, 0.0, &g()), 0.0);
        let q2 = (5.0 - 0.103) / 0.03;
        assert_relative_eq!(g().int_q2, q2, epsilon = 1e-12);
        assert_relative_eq!(q2, 163.23, epsilon = 5e-3);
        assert_relative_eq!(u_int(0.03, 0.103, &g()), -5.0, epsilon = 1e-12);
    }

    #[test]
    fn tracking_law_values() {
        assert_eq!(u_tr(0.06, 1.71, &g()), 0.0);
        assert_eq!(u_tr(0.09, 1.71, &g()), -5.0);
        assert_eq!(u_tr(0.06, FRAC_PI_2, &g()), -5.0);
        // Too close to the wall: turn away (left).
        assert_eq!(u_tr(0.02, FRAC_PI_2, &g()), 5.0);
    }

    #[test]
    fn sign_layer_limits() {
        assert_eq!(sgn_bl(0.5e-3, 1e-3), 0.5);
        assert_eq!(sgn_bl(-1.0, 1e-3), -1.0);
        assert_eq!(sgn_bl(-1e-9, 0.0), -1.0);
        assert_eq!(sgn_bl(0.0, 0.0), 0.0);
    }

    #[test]
    fn arc_offsets() {
        let c = Vec2::new(1.0, 2.0);
        let on = AgentState::new(c + Vec2::new(0.2, 0.0), FRAC_PI_2, 1.0);
        let (o, d) = offsets_vs_arc(&on, c, 0.2, 1.0, 1.0);
        assert_relative_eq!(o, 0.0, epsilon = 1e-15);
        assert_relative_eq!(d, 0.0, epsilon = 1e-15);
        let out = AgentState::new(c + Vec2::new(0.21, 0.0), FRAC_PI_2, 1.0);
        let (o, d) = offsets_vs_arc(&out, c, 0.2, 1.0, 1.0);
        assert_relative_eq!(o, 0.01, epsilon = 1e-12);
        assert_relative_eq!(d, 0.0, epsilon = 1e-15);
        // Clockwise arc: heading −π/2 at the same point is on-track.
        let cw = AgentState::new(c + Vec2::new(0.2, 0.0), -FRAC_PI_2, 1.0);
        let (o, d) = offsets_vs_arc(&cw, c, 0.2, -1.0, 1.0);
        assert_relative_eq!(o, 0.0, epsilon = 1e-15);
        assert_relative_eq!(d, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn line_offsets() {
        let a = AgentState::new(Vec2::new(3.0, 0.0), 0.1, 1.0);
        let (o, d) = offsets_vs_line(&a, Vec2::zeros(), 0.0, 1.0);
        assert_relative_eq!(o, 0.0, epsilon = 1e-15);
        assert_relative_eq!(d, 0.1, epsilon = 1e-15);
        let b = AgentState::new(Vec2::new(3.0, -0.5), 0.0, 1.0);
        assert_relative_eq!(
            offsets_vs_line(&b, Vec2::zeros(), 0.0, 2.0).0,
            -0.25,
            epsilon = 1e-15
        );
    }

    proptest! {
        #[test]
        fn attraction_law_fits_actuation_in_tube(o in -0.03..0.03f64, d in -0.103..0.103f64) {
            prop_assert!(u_att(o, d, &g()).abs() <= 4.994);
        }

        #[test]
        fn arc_follow_is_mirror_symmetric(r in 0.1..0.5f64, ang in -PI..PI, dr in -0.05..0.05f64, dh in -0.3..0.3f64) {
            // Mirror the agent across the x axis and flip the arc direction.
            let c = Vec2::zeros();
            let p = (r + dr) * unit(ang);
            let h = ang + FRAC_PI_2 + dh;
            let a = AgentState::new(p, h, 1.0);
            let m = AgentState::new(Vec2::new(p.x, -p.y), -h, 1.0);
            let seg = Segment::Arc { center: c, radius: r, turn: 1.0, start_angle: 0.0, span: 1.0 };
            let mseg = Segment::Arc { center: c, radius: r, turn: -1.0, start_angle: 0.0, span: 1.0 };
            let u = follow_segment(&a, &seg, 1.0, &g());
            let v = follow_segment(&m, &mseg, 1.0, &g());
            prop_assert!((u + v).abs() < 1e-9);
        }
    }
}
