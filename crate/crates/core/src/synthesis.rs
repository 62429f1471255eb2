//! Closed-form gain synthesis for the tracking, locking and unlocking laws,
//! plus the certification geometry (constraint slacks, Lyapunov ellipses,
//! free-space requirements). Everything here is nondimensional: lengths in r0,
//! time in v0/a0.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Constants used by the simulated controller (rounded, as published).
pub mod published {
    pub const DEPTH_GAIN: f64 = 0.12;
    pub const ANGLE_GAIN: f64 = 0.02;
    pub const PSI_CENTER: f64 = 1.71;
    pub const D0: f64 = 0.06;
    pub const DELTA_M: f64 = 0.030;
    pub const DELTA_HEADING_M: f64 = 0.103;
    pub const PSI_M: f64 = 0.58;
    pub const EPS: f64 = 0.151;
    pub const P_LOCK: f64 = 6.818;
    pub const ATT_GAIN: f64 = 163.0;
    pub const CIRC_SLOPE: f64 = 3.4;
}

/// Strict inequalities are judged with this slack floor.
const STRICT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("M = {0} is infeasible (need M ≥ 3)")]
    InfeasibleM(f64),
    #[error("constraint {0} fails for M = {1}")]
    ConstraintFailed(&'static str, f64),
    #[error("ε = {0} outside (0, 0.151]")]
    EpsilonOutOfRange(f64),
    #[error("quadratic form is not positive definite (p² ≤ q²)")]
    DegenerateForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackingParams {
    pub m: f64,
    pub phi_m: f64,
    pub psi_m: f64,
    pub d0: f64,
    pub psi0: f64,
    pub p2: f64,
    pub q: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub eps: f64,
    pub delta_m: f64,
    pub delta_heading_m: f64,
    pub p_lock: f64,
}

impl TrackingParams {
    /// Coefficient of (d − d0) in the tracking switching function: −q.
    pub fn depth_gain(&self) -> f64 {
        -self.q
    }

    /// Coefficient of (ψ − ψ_center): p².
    pub fn angle_gain(&self) -> f64 {
        self.p2
    }

    pub fn psi_center(&self) -> f64 {
        FRAC_PI_2 + self.psi0
    }

    /// Gain of the line-following law, (M − δ_m)/Δ_m, using the given Δ_m.
    pub fn att_gain(&self, delta_m: f64) -> f64 {
        (self.m - self.delta_heading_m) / delta_m
    }

    /// Same parameter set with the published controller constants substituted
    /// where they differ from the closed forms (d0, ψ_m, Δ_m).
    pub fn with_published_thresholds(mut self) -> Self {
        self.d0 = published::D0;
        self.psi_m = published::PSI_M;
        self.delta_m = published::DELTA_M;
        self
    }
}

/// Closed-form upper bound on φ_m obtained with q = −1/(8^{1/4}·M).
pub fn phi_m_bound(m: f64) -> f64 {
    let a = (2.0 * (2.0 / m).acos()).sqrt();
    let q = 1.0 / (8f64.powf(0.25) * m);
    ((1.0 / (3.0 * m * a) - q) * (1.293 * m * a)) / (1.0 - 5.013 * a)
}

/// p² = q² − q·√(q² + (4q/M)·sin φ_m·sgn φ_m).
pub fn p_squared(q: f64, phi_m: f64, m: f64) -> f64 {
    q * q - q * (q * q + 4.0 * q / m * phi_m.sin() * phi_m.signum()).sqrt()
}

/// Locking CLF parameters (p_lock, Δ_m, δ_m) for a radius margin ε.
pub fn locking_clf_params(eps: f64, m: f64) -> Result<(f64, f64, f64), SynthesisError> {
    if !(eps > 0.0 && eps <= 0.151 + 1e-12) {
        return Err(SynthesisError::EpsilonOutOfRange(eps));
    }
    let root = (2.0 + eps).sqrt();
    Ok((2.0 * m / root, eps / (2.0 * m), eps / root))
}

pub fn derive_tracking_params(m: f64) -> Result<TrackingParams, SynthesisError> {
    derive_tracking_params_eps(m, published::EPS)
}

pub fn derive_tracking_params_eps(m: f64, eps: f64) -> Result<TrackingParams, SynthesisError> {
    if !(m >= 3.0) {
        return Err(SynthesisError::InfeasibleM(m));
    }
    let phi_m = phi_m_bound(m);
    let q = -1.0 / (8f64.powf(0.25) * m);
    let p2 = p_squared(q, phi_m, m);
    let (p_lock, delta_m, delta_heading_m) = locking_clf_params(eps, m)?;
    let c = phi_m.cos();
    let params = TrackingParams {
        m,
        phi_m,
        psi_m: (2.0 * c / m).acos(),
        d0: c / (3.0 * m),
        psi0: 4.0 / 3.0 * phi_m.tan(),
        p2,
        q,
        alpha0: c / 2.0,
        alpha1: 1.5 * c,
        beta1: 0.75 * m,
        eps,
        delta_m,
        delta_heading_m,
        p_lock,
    };
    let report = check_constraints(&params);
    if let Some(bad) = report.constraints.iter().find(|c| !c.pass) {
        return Err(SynthesisError::ConstraintFailed(bad.name, m));
    }
    Ok(params)
}

#[derive(Debug, Clone, Serialize)]
pub struct Constraint {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintReport {
    pub constraints: Vec<Constraint>,
}

impl ConstraintReport {
    pub fn all_pass(&self) -> bool {
        self.constraints.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }
}

fn strict(name: &'static str, lhs: f64, rhs: f64) -> Constraint {
    let slack = lhs - rhs;
    Constraint {
        name,
        lhs,
        rhs,
        slack,
        pass: slack > STRICT_TOL,
    }
}

/// The five stabilisability constraints of the tracking design.
pub fn check_constraints(t: &TrackingParams) -> ConstraintReport {
    let s = t.phi_m.sin();
    let c = t.phi_m.cos();
    ConstraintReport {
        constraints: vec![
            strict("psi_m_margin", t.psi_m, s / t.alpha0),
            strict("phi_m_margin", t.phi_m, s / t.alpha1),
            strict("standoff", 2.0 * c - 3.0 * t.d0 * t.m, 0.0),
            strict(
                "turn_authority",
                2.0 * t.m * t.psi_m.cos(),
                2.0 * c - 3.0 * t.d0 * t.m,
            ),
            strict(
                "surface_offset",
                s / t.alpha1 - t.p2 / (t.alpha1 * t.q) * (t.m - t.beta1),
                t.psi0,
            ),
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EllipseRole {
    Spurious,
    MaxRoa,
}

/// {(Δ, δ): Δ² + p²(δ−ψ0)² + 2qΔ(δ−ψ0) ≤ level}
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipseRegion {
    pub p2: f64,
    pub q: f64,
    pub psi0: f64,
    pub level: f64,
    pub role: EllipseRole,
}

impl EllipseRegion {
    pub fn contains(&self, delta: f64, dheading: f64) -> bool {
        lyapunov_form(delta, dheading, self.p2, self.q, self.psi0) <= self.level
    }

    /// Half-extent along Δ.
    pub fn delta_extent(&self) -> f64 {
        (self.level * self.p2 / (self.p2 - self.q * self.q)).sqrt()
    }

    /// Half-extent along δ − ψ0.
    pub fn heading_extent(&self) -> f64 {
        (self.level / (self.p2 - self.q * self.q)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RoaRegions {
    pub spurious: EllipseRegion,
    pub max_roa: EllipseRegion,
    /// The certified ellipse fits in |Δ| ≤ d0/2, |δ − ψ0| ≤ ψ_m − ψ0.
    pub fits_box: bool,
}

pub fn roa_regions(t: &TrackingParams) -> Result<RoaRegions, SynthesisError> {
    let (p2, q) = (t.p2, t.q);
    if !(p2 > q * q) {
        return Err(SynthesisError::DegenerateForm);
    }
    let tan = t.phi_m.tan();
    let spurious = EllipseRegion {
        p2,
        q,
        psi0: t.psi0,
        level: 4.0 * p2 / (9.0 * q * q) * (p2 - q * q) * tan * tan,
        role: EllipseRole::Spurious,
    };
    let inner = 2.0 / 3.0 * tan + t.m * p2 / (6.0 * q * t.phi_m.cos());
    let max_roa = EllipseRegion {
        level: p2 * inner * inner,
        role: EllipseRole::MaxRoa,
        ..spurious
    };
    let fits_box =
        max_roa.delta_extent() <= t.d0 / 2.0 && max_roa.heading_extent() <= t.psi_m - t.psi0;
    Ok(RoaRegions {
        spurious,
        max_roa,
        fits_box,
    })
}

fn lyapunov_form(delta: f64, dheading: f64, p2: f64, q: f64, psi0: f64) -> f64 {
    let y = dheading - psi0;
    delta * delta + p2 * y * y + 2.0 * q * delta * y
}

/// V = Δ² + p²(δ−ψ0)² + 2qΔ(δ−ψ0), with Δ = d − d0 and δ = ψ − π/2.
pub fn lyapunov_value(delta: f64, dheading: f64, t: &TrackingParams) -> f64 {
    lyapunov_form(delta, dheading, t.p2, t.q, t.psi0)
}

/// Tangent slope dΔ/dδ of the level set of V through a point.
pub fn level_set_slope(delta: f64, dheading: f64, t: &TrackingParams) -> f64 {
    let y = dheading - t.psi0;
    -(t.p2 * y + t.q * delta) / (delta + t.q * y)
}

/// Boundary-line slope m̂ and offset ĉ of the inner region Δ ∈ [m̂(δ+ĉ), m̂(δ−ĉ)].
pub fn boundary_lines(t: &TrackingParams) -> (f64, f64) {
    let s = t.phi_m.sin();
    let mb = t.m - t.beta1;
    let m_hat = t.q / (t.p2 - t.q * t.q) * (t.q * s - mb * t.p2 - t.alpha1 * t.q * t.psi0) / mb;
    let c_hat = -s / t.alpha1 + mb * t.p2 / (t.alpha1 * t.q);
    (m_hat, c_hat)
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovAudit {
    pub samples: usize,
    /// Steps that started inside the certified ellipse and outside the spurious one.
    pub audited: usize,
    pub violations: Vec<usize>,
    pub max_increase: f64,
}

impl LyapunovAudit {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Flags every step where V grows while the state is in the certified band.
/// `window` holds (Δ, δ) samples taken every dt.
pub fn lyapunov_decreasing(window: &[(f64, f64)], t: &TrackingParams) -> LyapunovAudit {
    let regions = roa_regions(t).expect("derived parameters are positive definite");
    let mut audit = LyapunovAudit {
        samples: window.len(),
        audited: 0,
        violations: Vec::new(),
        max_increase: 0.0,
    };
    for (k, pair) in window.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        let va = lyapunov_value(a.0, a.1, t);
        if va > regions.max_roa.level || va <= regions.spurious.level {
            continue;
        }
        audit.audited += 1;
        let inc = lyapunov_value(b.0, b.1, t) - va;
        if inc > 1e-15 {
            audit.violations.push(k);
            audit.max_increase = audit.max_increase.max(inc);
        }
    }
    audit
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FreeSpace {
    /// r0·(3(1+ε)/M + 3d0/2)
    pub locking_tube: f64,
    /// r0·(√3+1)(1+ε)/M
    pub unlocking_depth: f64,
    /// π·v0/γ: distance covered while the sensor swings back by up to π.
    pub sensor_arc: f64,
    pub tube_within_r0: bool,
    /// Unlocking plus sensor re-alignment fit inside the locking tube.
    pub unlocking_contained: bool,
}

/// Free space needed by locking and unlocking, in units of r0, for a slew
/// limit γ given in units of a0/v0.
pub fn free_space_requirements(m: f64, eps: f64, d0: f64, gamma: f64) -> FreeSpace {
    let locking_tube = 3.0 * (1.0 + eps) / m + 1.5 * d0;
    let unlocking_depth = (3f64.sqrt() + 1.0) * (1.0 + eps) / m;
    let sensor_arc = PI / gamma;
    FreeSpace {
        locking_tube,
        unlocking_depth,
        sensor_arc,
        tube_within_r0: locking_tube < 1.0,
        unlocking_contained: unlocking_depth + sensor_arc <= locking_tube,
    }
}

/// Slew rate (units of a0/v0) needed to hold the frozen impact point while
/// locking: M/(1+ε) + 2/d0.
pub fn required_gamma(m: f64, eps: f64, d0: f64) -> f64 {
    m / (1.0 + eps) + 2.0 / d0
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthesisReport {
    pub derived: TrackingParams,
    pub depth_gain: f64,
    pub angle_gain: f64,
    pub psi_center: f64,
    pub d0_published: f64,
    pub psi_m_published: f64,
    pub delta_m_formula: f64,
    pub delta_m_published: f64,
    pub att_gain_published_delta_m: f64,
    pub att_gain_formula_delta_m: f64,
    pub circ_slope_published: f64,
    pub circ_slope_p_over_sqrt2: f64,
    pub circ_slope_p_over_2: f64,
    pub constraints: ConstraintReport,
    pub regions: RoaRegions,
    pub tangency_slope_ellipse: f64,
    pub tangency_slope_boundary: f64,
    pub gamma_required: f64,
    pub free_space_required_gamma: FreeSpace,
    pub free_space_reference_gamma: FreeSpace,
}

pub fn synthesize(m: f64, eps: f64) -> Result<SynthesisReport, SynthesisError> {
    let t = derive_tracking_params_eps(m, eps)?;
    let regions = roa_regions(&t)?;
    let (m_hat, c_hat) = boundary_lines(&t);
    let gamma_required = required_gamma(m, eps, published::D0);
    Ok(SynthesisReport {
        derived: t,
        depth_gain: t.depth_gain(),
        angle_gain: t.angle_gain(),
        psi_center: t.psi_center(),
        d0_published: published::D0,
        psi_m_published: published::PSI_M,
        delta_m_formula: t.delta_m,
        delta_m_published: published::DELTA_M,
        att_gain_published_delta_m: t.att_gain(published::DELTA_M),
        att_gain_formula_delta_m: t.att_gain(t.delta_m),
        circ_slope_published: published::CIRC_SLOPE,
        circ_slope_p_over_sqrt2: t.p_lock / 2f64.sqrt(),
        circ_slope_p_over_2: t.p_lock / 2.0,
        constraints: check_constraints(&t),
        regions,
        tangency_slope_ellipse: level_set_slope(0.0, -c_hat, &t),
        tangency_slope_boundary: m_hat,
        gamma_required,
        free_space_required_gamma: free_space_requirements(m, eps, published::D0, gamma_required),
        free_space_reference_gamma: free_space_requirements(m, eps, published::D0, 0.1),
    })
}

impl fmt::Display for SynthesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.derived;
        writeln!(f, "tracking design (M = {})", t.m)?;
        writeln!(f, "  phi_m            {:.5}", t.phi_m)?;
        writeln!(f, "  q                {:.5}", t.q)?;
        writeln!(f, "  p^2              {:.5}", t.p2)?;
        writeln!(f, "  psi0             {:.5}", t.psi0)?;
        writeln!(
            f,
            "  d0               {:.5}   (controller uses {})",
            t.d0, self.d0_published
        )?;
        writeln!(
            f,
            "  psi_m            {:.5}   (controller uses {})",
            t.psi_m, self.psi_m_published
        )?;
        writeln!(f, "  alpha0, alpha1   {:.5}, {:.5}", t.alpha0, t.alpha1)?;
        writeln!(f, "  beta1            {:.5}", t.beta1)?;
        writeln!(
            f,
            "tracking surface   {:.4}(d - d0) - {:.4}(psi - {:.4})",
            self.depth_gain, self.angle_gain, self.psi_center
        )?;
        writeln!(f, "locking (eps = {})", t.eps)?;
        writeln!(f, "  p                {:.4}", t.p_lock)?;
        writeln!(f, "  delta_m          {:.4}", t.delta_heading_m)?;
        writeln!(
            f,
            "  Delta_m          {:.4} by eps/(2M); controller uses {}",
            self.delta_m_formula, self.delta_m_published
        )?;
        writeln!(
            f,
            "  line gain        {:.2} with Delta_m = {}; {:.2} with eps/(2M)",
            self.att_gain_published_delta_m, self.delta_m_published, self.att_gain_formula_delta_m
        )?;
        writeln!(
            f,
            "  circle slope     {} used; p/sqrt2 = {:.3}, p/2 = {:.3}",
            self.circ_slope_published, self.circ_slope_p_over_sqrt2, self.circ_slope_p_over_2
        )?;
        writeln!(f, "constraints")?;
        for c in &self.constraints.constraints {
            writeln!(
                f,
                "  {:<15}{:>10.5} > {:<10.5} slack {:+.5}  {}",
                c.name,
                c.lhs,
                c.rhs,
                c.slack,
                if c.pass { "ok" } else { "FAIL" }
            )?;
        }
        writeln!(f, "lyapunov ellipses")?;
        writeln!(f, "  spurious level   {:.4e}", self.regions.spurious.level)?;
        writeln!(f, "  max roa level    {:.4e}", self.regions.max_roa.level)?;
        writeln!(f, "  fits box         {}", self.regions.fits_box)?;
        writeln!(
            f,
            "  tangency slopes  {:.6} vs {:.6}",
            self.tangency_slope_ellipse, self.tangency_slope_boundary
        )?;
        writeln!(f, "free space (units of r0)")?;
        for (label, fs, g) in [
            (
                "required gamma",
                &self.free_space_required_gamma,
                self.gamma_required,
            ),
            ("gamma 0.1", &self.free_space_reference_gamma, 0.1),
        ] {
            writeln!(
                f,
                "  {label:<15} gamma={g:.3}: locking tube {:.4}, unlocking {:.4}, sensor arc {:.4}, contained {}",
                fs.locking_tube, fs.unlocking_depth, fs.sensor_arc, fs.unlocking_contained
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn m5() -> TrackingParams {
        derive_tracking_params(5.0).unwrap()
    }

    #[test]
    fn q_for_m5() {
        assert_relative_eq!(m5().q, -0.11892, epsilon = 1e-5);
    }

    #[test]
    fn published_tracking_constants_are_reproduced() {
        let t = m5();
        assert!((t.p2 - 0.02).abs() <= 0.005, "p² = {}", t.p2);
        assert!((-t.q - 0.12).abs() <= 0.005);
        assert!((t.psi_center() - 1.71).abs() <= 0.02);
        assert!((t.d0 - 0.06).abs() <= 0.01);
    }

    #[test]
    fn phi_m_and_psi_m_for_m5() {
        // Independent evaluation of the closed forms.
        let a = (2.0 * (0.4f64).acos()).sqrt();
        let phi = ((1.0 / (15.0 * a) - 1.0 / (5.0 * 8f64.powf(0.25))) * (1.293 * 5.0 * a))
            / (1.0 - 5.013 * a);
        let t = m5();
        assert_relative_eq!(t.phi_m, phi, epsilon = 1e-14);
        assert!((t.phi_m - 0.1115).abs() < 1e-3);
        // cos ψ_m = 2 cos φ_m / M puts ψ_m near twice the published 0.58.
        assert!((t.psi_m - 2.0 * 0.58).abs() < 0.01);
    }

    #[test]
    fn simplified_alpha_beta_chain() {
        // With 3d0M = cos φ_m the interval endpoints collapse to the simple forms.
        let t = m5();
        let c = t.phi_m.cos();
        assert_relative_eq!(
            t.alpha0,
            (2.0 * c - 3.0 * t.d0 * t.m) / 2.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            t.alpha1,
            (2.0 * c + 3.0 * t.d0 * t.m) / 2.0,
            epsilon = 1e-15
        );
        let beta0 = (2.0 * c + 3.0 * t.d0 * t.m) / (2.0 * t.psi_m.cos());
        assert_relative_eq!(beta0, t.beta1, epsilon = 1e-12);
        let psi0 = t.phi_m.sin() / 2.0 * (1.0 / t.alpha0 + 1.0 / t.alpha1);
        assert_relative_eq!(psi0, t.psi0, epsilon = 1e-14);
    }

    #[test]
    fn locking_constants() {
        let (p, dm, hm) = locking_clf_params(0.151, 5.0).unwrap();
        assert!((p - 6.818).abs() <= 1e-3);
        assert!((hm - 0.103).abs() <= 1e-3);
        assert_relative_eq!(dm, 0.0151, epsilon = 1e-12);
        let (p, dm, hm) = locking_clf_params(1e-9, 5.0).unwrap();
        assert!(dm < 1e-9 && hm < 1e-9 && p > 7.0);
        assert!(locking_clf_params(0.2, 5.0).is_err());
        assert!(locking_clf_params(0.0, 5.0).is_err());
    }

    #[test]
    fn attraction_gain_provenance() {
        let t = m5().with_published_thresholds();
        let g = t.att_gain(published::DELTA_M);
        assert_relative_eq!(g, (5.0 - 0.151 / (2.151f64).sqrt()) / 0.03, epsilon = 1e-12);
        assert!((g - 163.0).abs() <= 1.0);
    }

    #[test]
    fn all_constraints_pass_for_m5() {
        assert!(check_constraints(&m5()).all_pass());
    }

    #[test]
    fn doubling_d0_breaks_standoff() {
        let mut t = m5();
        t.d0 *= 2.0;
        let r = check_constraints(&t);
        assert!(!r.get("standoff").unwrap().pass);
    }

    #[test]
    fn zero_phi_breaks_phi_margin() {
        let mut t = m5();
        t.phi_m = 0.0;
        assert!(!check_constraints(&t).get("phi_m_margin").unwrap().pass);
    }

    #[test]
    fn feasibility_boundary() {
        assert!(derive_tracking_params(3.0).is_ok());
        assert_eq!(
            derive_tracking_params(2.9),
            Err(SynthesisError::InfeasibleM(2.9))
        );
    }

    #[test]
    fn surface_offset_matches_its_q_form() {
        // surface_offset ⟺ q ≤ −(4/M)·sin φ_m
        for m in [3.0, 4.0, 5.0, 8.0] {
            let t = derive_tracking_params(m).unwrap();
            assert!(t.q <= -4.0 / m * t.phi_m.sin());
        }
    }

    #[test]
    fn spurious_region_sits_inside_the_certified_one() {
        let r = roa_regions(&m5()).unwrap();
        assert!(r.spurious.level < r.max_roa.level);
        assert!(r.fits_box);
    }

    #[test]
    fn straight_walls_have_no_spurious_region() {
        let mut t = m5();
        t.phi_m = 0.0;
        assert_eq!(roa_regions(&t).unwrap().spurious.level, 0.0);
    }

    #[test]
    fn lyapunov_value_basics() {
        let t = m5();
        assert_eq!(lyapunov_value(0.0, t.psi0, &t), 0.0);
        assert!(lyapunov_value(0.01, 0.3, &t) > 0.0);
    }

    #[test]
    fn ellipse_is_tangent_to_the_boundary_lines() {
        let t = m5();
        let (m_hat, c_hat) = boundary_lines(&t);
        // The touching point (δ = −ĉ, Δ = 0) lies on Δ = m̂(δ + ĉ).
        assert_relative_eq!(level_set_slope(0.0, -c_hat, &t), m_hat, epsilon = 1e-6);
    }

    #[test]
    fn free_space_numbers() {
        let fs = free_space_requirements(5.0, 0.151, 0.06, required_gamma(5.0, 0.151, 0.06));
        assert_relative_eq!(fs.locking_tube, 3.0 * 1.151 / 5.0 + 0.09, epsilon = 1e-12);
        assert!((fs.locking_tube - 0.7806).abs() < 1e-4);
        assert!((fs.unlocking_depth - 0.629).abs() < 1e-3);
        assert!(fs.tube_within_r0 && fs.unlocking_contained);
        let slow = free_space_requirements(5.0, 0.151, 0.06, 0.1);
        assert_relative_eq!(slow.sensor_arc, 10.0 * PI, epsilon = 1e-12);
        assert!(!slow.unlocking_contained);
    }

    #[test]
    fn required_gamma_value() {
        assert!((required_gamma(5.0, 0.151, 0.06) - 37.68).abs() < 0.01);
    }

    #[test]
    fn lyapunov_audit_flags_increases_in_band() {
        let t = m5();
        let r = roa_regions(&t).unwrap();
        // A point halfway between the two level sets along Δ = 0.
        let lvl = 0.5 * (r.spurious.level + r.max_roa.level);
        let y = (lvl / t.p2).sqrt();
        let inside = (0.0, t.psi0 + y);
        let further = (0.0, t.psi0 + 1.01 * y);
        let closer = (0.0, t.psi0 + 0.99 * y);
        assert!(lyapunov_decreasing(&[inside, closer], &t).passed());
        let bad = lyapunov_decreasing(&[inside, further], &t);
        assert_eq!(bad.violations, vec![0]);
        // Outside the certified ellipse nothing is audited.
        let out = (0.1, t.psi0 + 1.0);
        assert_eq!(lyapunov_decreasing(&[out, (0.2, 2.0)], &t).audited, 0);
    }

    #[test]
    fn report_renders() {
        let r = synthesize(5.0, 0.151).unwrap();
        let text = r.to_string();
        assert!(text.contains("surface_offset"));
        assert!(serde_json::to_string(&r).unwrap().contains("depth_gain"));
    }

    proptest! {
        #[test]
        fn derivation_is_idempotent(m in 3.0..20.0f64) {
            let a = derive_tracking_params(m);
            let b = derive_tracking_params(m);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn p_is_even_in_phi(phi in 0.001..0.14f64, m in 3.0..10.0f64) {
            let q = -1.0 / (8f64.powf(0.25) * m);
            prop_assert_eq!(p_squared(q, phi, m), p_squared(q, -phi, m));
        }

        #[test]
        fn lyapunov_is_nonnegative(d in -1.0..1.0f64, h in -2.0..2.0f64) {
            prop_assert!(lyapunov_value(d, h, &m5()) >= 0.0);
        }
    }
}
