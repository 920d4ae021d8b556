//! Passive failure of a planar soil wedge in front of a flat blade on an
//! inclined surface.
//!
//! The tool force per unit blade width is
//!
//! ```text
//! F = gamma d^2 N_gamma + c d N_c + s_q Q N_Q + c_a d N_ca
//! ```
//!
//! with `d` the cut depth normal to the surface, `alpha` the surface angle,
//! `rho` the blade angle measured from the surface and `beta` the failure
//! plane angle measured from the surface. The factors are finite only while
//! `0 < delta + rho + phi + beta < pi`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;

use crate::error::{domain, Error, Result};
use crate::optim::{self, Minimum};
use crate::soil::SoilStrength;

/// Margin (rad) kept from both ends of `(0, pi)` for `delta + rho + phi + beta`.
pub const SINGULAR_MARGIN: f64 = 1e-9;
/// Margin (rad) kept from both ends of the admissible failure-angle range.
pub const BETA_MARGIN: f64 = 1e-3;
/// Grid size of the coarse failure-angle scan.
pub const BETA_GRID_POINTS: usize = 257;
/// Bracket width at which golden-section refinement stops (rad).
pub const BETA_TOLERANCE: f64 = 1e-8;
/// Relative spread of `N_gamma` over the grid below which it is treated as flat.
pub const FLAT_TOLERANCE: f64 = 1e-10;

const TRIG_EPS: f64 = 1e-12;

/// Cut configuration seen by the wedge model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutGeometry {
    /// Cut depth perpendicular to the surface (m).
    pub depth: f64,
    /// Surface angle (rad), positive when the ground rises ahead of the blade.
    pub alpha: f64,
    /// Blade angle with respect to the surface (rad).
    pub rho: f64,
    /// Blade width (m).
    pub width: f64,
}

impl CutGeometry {
    pub fn new(depth: f64, alpha: f64, rho: f64, width: f64) -> Result<Self> {
        if !(depth >= 0.0 && depth.is_finite()) {
            return Err(domain(format!("cut depth {depth} must be >= 0")));
        }
        if !(alpha.abs() < FRAC_PI_2) {
            return Err(domain(format!("surface angle {alpha} must satisfy |alpha| < pi/2")));
        }
        if !(rho > 0.0 && rho < PI) {
            return Err(domain(format!("blade angle {rho} must lie in (0, pi)")));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(domain(format!("blade width {width} must be > 0")));
        }
        Ok(Self { depth, alpha, rho, width })
    }
}

/// Lengths describing the wedge cross-section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeGeometry {
    pub l1: f64,
    pub l1a: f64,
    pub l1b: f64,
    /// Blade-soil contact length.
    pub l2: f64,
    /// Failure surface length.
    pub l3: f64,
    /// Cut depth at the ground intersection, measured vertically.
    pub d_prime: f64,
    /// Cut depth at the blade tip, measured vertically.
    pub d_dprime: f64,
}

/// The four dimensionless multipliers of the force equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NFactors {
    pub n_gamma: f64,
    pub n_c: f64,
    pub n_q: f64,
    pub n_ca: f64,
}

/// Linear reaction used when the wedge equilibrium is singular:
/// `F = c2 (d + d_o)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityPolicy {
    /// Stiffness (N/m per m of depth).
    pub c2: f64,
    /// Depth offset (m).
    pub d_o: f64,
}

impl SingularityPolicy {
    pub fn new(c2: f64, d_o: f64) -> Result<Self> {
        if !(c2 > 0.0 && c2.is_finite()) {
            return Err(domain(format!("singular stiffness c2 = {c2} must be > 0")));
        }
        if !(d_o >= 0.0 && d_o.is_finite()) {
            return Err(domain(format!("singular depth offset d_o = {d_o} must be >= 0")));
        }
        Ok(Self { c2, d_o })
    }
}

impl Default for SingularityPolicy {
    fn default() -> Self {
        Self { c2: 1.0e5, d_o: 0.0 }
    }
}

fn check_angle(name: &str, sin_value: f64) -> Result<()> {
    if sin_value <= TRIG_EPS {
        return Err(domain(format!("sin({name}) = {sin_value} must be positive")));
    }
    Ok(())
}

fn check_sum(rho: f64, beta: f64, phi: f64, delta: f64) -> Result<f64> {
    let sum = delta + rho + phi + beta;
    if !(sum > SINGULAR_MARGIN && sum < PI - SINGULAR_MARGIN) {
        return Err(Error::SingularConfiguration { sum });
    }
    Ok(sum)
}

pub fn wedge_geometry(d: f64, alpha: f64, rho: f64, beta: f64) -> Result<WedgeGeometry> {
    let (sr, sb, ca) = (rho.sin(), beta.sin(), alpha.cos());
    check_angle("rho", sr)?;
    check_angle("beta", sb)?;
    if ca <= TRIG_EPS {
        return Err(domain(format!("cos(alpha) = {ca} must be positive")));
    }
    let l1a = d * rho.cos() / sr;
    let l1b = d * beta.cos() / sb;
    Ok(WedgeGeometry {
        l1: l1a + l1b,
        l1a,
        l1b,
        l2: d / sr,
        l3: d / sb,
        d_prime: d * (rho - alpha).sin() / sr,
        d_dprime: d / ca,
    })
}

/// Wedge weight per unit width (N/m): `d^2 (cot rho + cot beta) gamma / 2`.
pub fn wedge_weight(d: f64, rho: f64, beta: f64, gamma: f64) -> Result<f64> {
    check_angle("rho", rho.sin())?;
    check_angle("beta", beta.sin())?;
    Ok(0.5 * d * d * (1.0 / rho.tan() + 1.0 / beta.tan()) * gamma)
}

pub fn n_factors(alpha: f64, rho: f64, beta: f64, phi: f64, delta: f64) -> Result<NFactors> {
    let (sr, sb) = (rho.sin(), beta.sin());
    check_angle("rho", sr)?;
    check_angle("beta", sb)?;
    let sum = check_sum(rho, beta, phi, delta)?;
    let den = sum.sin();
    let lift = (alpha + phi + beta).sin();
    Ok(NFactors {
        n_gamma: (rho.cos() / sr + beta.cos() / sb) * lift / (2.0 * den),
        n_c: phi.cos() / (sb * den),
        n_q: lift / den,
        n_ca: -(rho + phi + beta).cos() / (sr * den),
    })
}

/// `N_gamma` alone, without validation. Used as the search objective.
fn n_gamma_raw(alpha: f64, rho: f64, beta: f64, phi: f64, delta: f64) -> f64 {
    (1.0 / rho.tan() + 1.0 / beta.tan()) * (alpha + phi + beta).sin()
        / (2.0 * (delta + rho + phi + beta).sin())
}

/// Analytic derivative of `N_gamma` with respect to `beta`.
pub fn d_n_gamma_d_beta(alpha: f64, rho: f64, beta: f64, phi: f64, delta: f64) -> Result<f64> {
    let (sr, sb) = (rho.sin(), beta.sin());
    check_angle("rho", sr)?;
    check_angle("beta", sb)?;
    let sum = check_sum(rho, beta, phi, delta)?;
    let den = sum.sin();
    let cots = rho.cos() / sr + beta.cos() / sb;
    let num = cots * (delta + rho - alpha).sin() - (alpha + phi + beta).sin() * den / (sb * sb);
    Ok(num / (2.0 * den * den))
}

/// Admissible failure angles `(BETA_MARGIN, pi - (delta + rho + phi) - BETA_MARGIN)`.
pub fn feasible_beta_interval(rho: f64, phi: f64, delta: f64) -> Result<(f64, f64)> {
    let lo = BETA_MARGIN;
    let hi = PI - (delta + rho + phi) - BETA_MARGIN;
    if !(hi > lo) {
        return Err(Error::SingularConfiguration { sum: delta + rho + phi + lo });
    }
    Ok((lo, hi))
}

/// A chosen failure angle together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureAngle {
    /// Failure angle with respect to the surface (rad).
    pub beta: f64,
    /// `N_gamma` was flat over the admissible range; `beta` is its midpoint.
    pub degenerate: bool,
    /// The surcharge-extent rule did not apply and the minimizer was used.
    pub fallback: bool,
}

/// Failure angle minimizing `N_gamma`: 257-point grid scan, then
/// golden-section refinement of the best cell.
pub fn optimal_failure_angle(alpha: f64, rho: f64, phi: f64, delta: f64) -> Result<FailureAngle> {
    check_angle("rho", rho.sin())?;
    let (lo, hi) = feasible_beta_interval(rho, phi, delta)?;
    let Minimum { x, degenerate, .. } = optim::grid_then_golden(
        |b| n_gamma_raw(alpha, rho, b, phi, delta),
        lo,
        hi,
        BETA_GRID_POINTS,
        BETA_TOLERANCE,
        FLAT_TOLERANCE,
    );
    if degenerate {
        return Ok(FailureAngle { beta: x, degenerate, fallback: false });
    }
    // sharpen the interior minimum on the stationarity condition
    let g = |b: f64| d_n_gamma_d_beta(alpha, rho, b, phi, delta).unwrap_or(f64::NAN);
    let h = 1e3 * BETA_TOLERANCE;
    let beta = optim::bisect_root(g, (x - h).max(lo), (x + h).min(hi)).unwrap_or(x);
    Ok(FailureAngle { beta, degenerate, fallback: false })
}

/// Failure angle whose wedge top reaches `pile_extent` ahead of the blade
/// tip, i.e. `d (cot rho + cot beta) = pile_extent`, clamped into the
/// admissible range. Falls back to [`optimal_failure_angle`] when the pile
/// does not reach past the blade's own footprint.
pub fn beta_from_surcharge_extent(
    d: f64,
    alpha: f64,
    rho: f64,
    phi: f64,
    delta: f64,
    pile_extent: f64,
) -> Result<FailureAngle> {
    check_angle("rho", rho.sin())?;
    let (lo, hi) = feasible_beta_interval(rho, phi, delta)?;
    let cot_rho = 1.0 / rho.tan();
    if !(d > 0.0) || !(pile_extent > d * cot_rho) {
        let mut angle = optimal_failure_angle(alpha, rho, phi, delta)?;
        angle.fallback = true;
        return Ok(angle);
    }
    let cot_beta = pile_extent / d - cot_rho;
    // acot on (0, inf) maps into (0, pi/2)
    let beta = if pile_extent.is_infinite() { 0.0 } else { (1.0 / cot_beta).atan() };
    Ok(FailureAngle { beta: beta.clamp(lo, hi), degenerate: false, fallback: false })
}

/// Force per unit blade width (N/m). `q_per_width` is the surcharge `Q`
/// and `s_q` its contribution factor.
pub fn fee_force(
    geom: &CutGeometry,
    beta: f64,
    strength: &SoilStrength,
    gamma: f64,
    q_per_width: f64,
    s_q: f64,
) -> Result<f64> {
    let n = n_factors(geom.alpha, geom.rho, beta, strength.phi, strength.delta)?;
    Ok(force_from_factors(&n, geom.depth, strength, gamma, q_per_width, s_q))
}

fn force_from_factors(
    n: &NFactors,
    d: f64,
    strength: &SoilStrength,
    gamma: f64,
    q: f64,
    s_q: f64,
) -> f64 {
    gamma * d * d * n.n_gamma + strength.c * d * n.n_c + s_q * q * n.n_q + strength.c_a * d * n.n_ca
}

/// Horizontal and vertical components of the tool force: the force acts at
/// `pi/2 - rho - delta + alpha` from the horizontal.
pub fn cartesian_components(f: f64, rho: f64, delta: f64, alpha: f64) -> (f64, f64) {
    let angle = FRAC_PI_2 - rho - delta + alpha;
    (f * angle.cos(), f * angle.sin())
}

/// Rescales soil-tool friction and adhesion by `tanh(-c1 v . i_b)`, where
/// `v` is the blade velocity relative to the soil and `i_b` the unit vector
/// pointing up the blade face.
pub fn effective_friction(
    delta: f64,
    c_a: f64,
    v: &Vector3<f64>,
    i_b: &Vector3<f64>,
    c1: f64,
) -> Result<(f64, f64)> {
    if (i_b.norm() - 1.0).abs() > 1e-9 {
        return Err(domain(format!("up-blade vector has length {}, expected 1", i_b.norm())));
    }
    if !(c1 > 0.0) {
        return Err(domain(format!("velocity coefficient c1 = {c1} must be > 0")));
    }
    let scale = (-c1 * v.dot(i_b)).tanh();
    Ok((scale * delta, scale * c_a))
}

/// Linear reaction `c2 (d + d_o)` used in place of a singular wedge solution.
pub fn singular_fallback(d: f64, policy: &SingularityPolicy) -> f64 {
    policy.c2 * (d + policy.d_o)
}

/// Outcome of [`cutting_force`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutForce {
    /// Force per unit width (N/m).
    pub force: f64,
    /// `None` when the fallback was used.
    pub factors: Option<NFactors>,
    pub singular: bool,
}

/// [`fee_force`] that substitutes [`singular_fallback`] for singular
/// configurations.
pub fn cutting_force(
    geom: &CutGeometry,
    beta: f64,
    strength: &SoilStrength,
    gamma: f64,
    q_per_width: f64,
    s_q: f64,
    policy: &SingularityPolicy,
) -> Result<CutForce> {
    match n_factors(geom.alpha, geom.rho, beta, strength.phi, strength.delta) {
        Ok(n) => Ok(CutForce {
            force: force_from_factors(&n, geom.depth, strength, gamma, q_per_width, s_q),
            factors: Some(n),
            singular: false,
        }),
        Err(Error::SingularConfiguration { .. }) => Ok(CutForce {
            force: singular_fallback(geom.depth, policy),
            factors: None,
            singular: true,
        }),
        Err(e) => Err(e),
    }
}

/// Soil reaction `R` (N/m) that balances the horizontal forces on the wedge
/// for a given tool force `f`.
pub fn reaction_from_horizontal_balance(
    f: f64,
    geom: &CutGeometry,
    beta: f64,
    strength: &SoilStrength,
) -> Result<f64> {
    let wg = wedge_geometry(geom.depth, geom.alpha, geom.rho, beta)?;
    let (alpha, rho) = (geom.alpha, geom.rho);
    let SoilStrength { phi, c, delta, c_a } = *strength;
    let lever = (FRAC_PI_2 - beta - alpha - phi).cos();
    if lever.abs() <= TRIG_EPS {
        return Err(domain("soil reaction is vertical; horizontal balance cannot fix R"));
    }
    let rest = f * (FRAC_PI_2 - rho - delta + alpha).cos() + c_a * wg.l2 * (rho - alpha).cos()
        - c * wg.l3 * (alpha + beta).cos();
    Ok(rest / lever)
}

/// Residuals of the horizontal and vertical wedge equilibrium for tool force
/// `f` and soil reaction `r`, written with the contact lengths and wedge
/// weight directly (before any trigonometric simplification).
pub fn equilibrium_residual(
    f: f64,
    r: f64,
    geom: &CutGeometry,
    beta: f64,
    strength: &SoilStrength,
    gamma: f64,
    q_per_width: f64,
) -> Result<(f64, f64)> {
    let wg = wedge_geometry(geom.depth, geom.alpha, geom.rho, beta)?;
    let w = wedge_weight(geom.depth, geom.rho, beta, gamma)?;
    let (alpha, rho) = (geom.alpha, geom.rho);
    let SoilStrength { phi, c, delta, c_a } = *strength;
    let tool = FRAC_PI_2 - rho - delta + alpha;
    let soil = FRAC_PI_2 - beta - alpha - phi;
    let sum_x = f * tool.cos() + c_a * wg.l2 * (rho - alpha).cos()
        - r * soil.cos()
        - c * wg.l3 * (alpha + beta).cos();
    let sum_z = f * tool.sin() - c_a * wg.l2 * (rho - alpha).sin() + r * soil.sin()
        - c * wg.l3 * (alpha + beta).sin()
        - q_per_width
        - w;
    Ok((sum_x, sum_z))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn geometry_vertical_blade_flat_ground() {
        let g = wedge_geometry(1.0, 0.0, FRAC_PI_2, FRAC_PI_4).unwrap();
        assert!(g.l1a.abs() < 1e-15);
        assert!(close(g.l1b, 1.0, 1e-15));
        assert!(close(g.l2, 1.0, 1e-15));
        assert!(close(g.l3, 2f64.sqrt(), 1e-15));
        assert!(close(g.d_prime, 1.0, 1e-15));
        assert!(close(g.d_dprime, 1.0, 1e-15));
        assert!(close(g.l1, g.l1a + g.l1b, 1e-15));
    }

    #[test]
    fn geometry_zero_depth() {
        let g = wedge_geometry(0.0, 0.2, 1.1, 0.7).unwrap();
        for v in [g.l1, g.l1a, g.l1b, g.l2, g.l3, g.d_prime, g.d_dprime] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn geometry_frozen_values() {
        // 40-digit evaluation of the length formulas
        let g = wedge_geometry(0.5, 0.1, 1.0, 0.6).unwrap();
        assert!(close(g.l1a, 0.321_046_307_967_165_35, 1e-14));
        assert!(close(g.l1b, 0.730_847_973_539_051_07, 1e-14));
        assert!(close(g.l2, 0.594_197_552_889_060_61, 1e-14));
        assert!(close(g.l3, 0.885_516_098_343_862_69, 1e-14));
        assert!(close(g.d_prime, 0.465_450_932_812_800_96, 1e-14));
        assert!(close(g.d_dprime, 0.502_510_459_200_227_71, 1e-14));
    }

    #[test]
    fn geometry_rejects_degenerate_angles() {
        assert!(wedge_geometry(1.0, 0.0, 0.0, 0.5).is_err());
        assert!(wedge_geometry(1.0, 0.0, 1.0, PI).is_err());
        assert!(wedge_geometry(1.0, FRAC_PI_2, 1.0, 0.5).is_err());
    }

    #[test]
    fn wedge_weight_values() {
        assert!(close(wedge_weight(1.0, FRAC_PI_2, FRAC_PI_4, 9810.0).unwrap(), 4905.0, 1e-14));
        assert_eq!(wedge_weight(0.0, 1.0, 0.5, 9810.0).unwrap(), 0.0);
        let w = wedge_weight(1.0, PI / 3.0, FRAC_PI_6, 15000.0).unwrap();
        assert!(close(w, 17_320.508_075_688_773, 1e-14));
    }

    #[test]
    fn n_factors_closed_case() {
        let n = n_factors(0.0, FRAC_PI_2, FRAC_PI_4, 0.0, 0.0).unwrap();
        assert!(close(n.n_gamma, 0.5, 1e-15));
        assert!(close(n.n_c, 2.0, 1e-15));
        assert!(close(n.n_q, 1.0, 1e-15));
        assert!(close(n.n_ca, 1.0, 1e-15));
    }

    #[test]
    fn n_factors_frozen_values() {
        let n = n_factors(0.15, 1.0, 0.6, 0.5, 0.3).unwrap();
        assert!(close(n.n_gamma, 1.477_847_383_958_038_5, 1e-14));
        assert!(close(n.n_c, 2.300_979_560_560_742_2, 1e-14));
        assert!(close(n.n_q, 1.404_939_079_849_256_5, 1e-14));
        assert!(close(n.n_ca, 0.888_215_164_278_946_24, 1e-14));
    }

    #[test]
    fn n_factors_singular_and_domain_errors() {
        assert!(matches!(
            n_factors(0.0, 2.0, 1.0, 0.3, 0.2),
            Err(Error::SingularConfiguration { .. })
        ));
        assert!(matches!(n_factors(0.0, 1.0, -0.1, 0.3, 0.2), Err(Error::Domain(_))));
        assert!(matches!(n_factors(0.0, -1.0, 0.5, 0.3, 0.2), Err(Error::Domain(_))));
    }

    #[test]
    fn miedema_derivative_zero() {
        let phi = 30f64.to_radians();
        let g = d_n_gamma_d_beta(0.0, FRAC_PI_2, FRAC_PI_4 - phi / 2.0, phi, 0.0).unwrap();
        assert!(g.abs() < 1e-9, "{g}");
    }

    #[test]
    fn optimal_angle_closed_forms() {
        for deg in [30.0f64, 40.0] {
            let phi = deg.to_radians();
            let a = optimal_failure_angle(0.0, FRAC_PI_2, phi, 0.0).unwrap();
            assert!(!a.degenerate);
            assert!((a.beta - (FRAC_PI_4 - phi / 2.0)).abs() < 1e-4);
        }
    }

    #[test]
    fn optimal_angle_flat_objective() {
        let a = optimal_failure_angle(0.0, FRAC_PI_2, 0.0, 0.0).unwrap();
        assert!(a.degenerate);
        let (lo, hi) = feasible_beta_interval(FRAC_PI_2, 0.0, 0.0).unwrap();
        assert_eq!(a.beta, 0.5 * (lo + hi));
    }

    #[test]
    fn optimal_angle_empty_interval() {
        assert!(matches!(
            optimal_failure_angle(0.0, 2.5, 0.5, 0.2),
            Err(Error::SingularConfiguration { .. })
        ));
    }

    #[test]
    fn surcharge_extent_angle() {
        let a = beta_from_surcharge_extent(1.0, 0.0, FRAC_PI_2, 0.5, 0.2, 1.0).unwrap();
        assert!(!a.fallback);
        assert!(close(a.beta, FRAC_PI_4, 1e-14));

        let far = beta_from_surcharge_extent(1.0, 0.0, FRAC_PI_2, 0.5, 0.2, 1e12).unwrap();
        assert_eq!(far.beta, BETA_MARGIN);
        let inf = beta_from_surcharge_extent(1.0, 0.0, FRAC_PI_2, 0.5, 0.2, f64::INFINITY).unwrap();
        assert_eq!(inf.beta, BETA_MARGIN);

        // frozen: acot(0.9 / 0.5 - cot 1.2)
        let b = beta_from_surcharge_extent(0.5, 0.0, 1.2, 0.5, 0.2, 0.9).unwrap();
        assert!(close(b.beta, 0.616_478_828_652_986_41, 1e-14));
        let l1 = 0.5 * (1.0 / 1.2f64.tan() + 1.0 / b.beta.tan());
        assert!(close(l1, 0.9, 1e-14));
    }

    #[test]
    fn surcharge_extent_falls_back() {
        let short = beta_from_surcharge_extent(1.0, 0.0, 1.0, 0.5, 0.2, 0.1).unwrap();
        let opt = optimal_failure_angle(0.0, 1.0, 0.5, 0.2).unwrap();
        assert!(short.fallback);
        assert_eq!(short.beta, opt.beta);
        assert!(beta_from_surcharge_extent(0.0, 0.0, 1.0, 0.5, 0.2, 1.0).unwrap().fallback);
    }

    fn strength(phi: f64, c: f64, delta: f64, c_a: f64) -> SoilStrength {
        SoilStrength::new(phi, c, delta, c_a).unwrap()
    }

    #[test]
    fn force_closed_case_and_zero_depth() {
        let g = CutGeometry::new(1.0, 0.0, FRAC_PI_2, 1.0).unwrap();
        let s = strength(0.0, 0.0, 0.0, 0.0);
        let f = fee_force(&g, FRAC_PI_4, &s, 9810.0, 0.0, 1.0).unwrap();
        assert!(close(f, 4905.0, 1e-14));

        let g0 = CutGeometry::new(0.0, 0.1, 1.0, 1.0).unwrap();
        let s1 = strength(0.5, 3000.0, 0.2, 400.0);
        assert_eq!(fee_force(&g0, 0.6, &s1, 16000.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn force_frozen_value() {
        // beta* refined from a 1e-5 rad exhaustive grid by 40-digit root finding
        let beta_star = 0.624_916_626_815_371_2;
        let a = optimal_failure_angle(0.1, 1.0, 0.52, 0.26).unwrap();
        assert!((a.beta - beta_star).abs() < 1e-7);
        let g = CutGeometry::new(0.3, 0.1, 1.0, 1.0).unwrap();
        let s = strength(0.52, 2000.0, 0.26, 500.0);
        let f = fee_force(&g, a.beta, &s, 16000.0, 800.0, 1.0).unwrap();
        assert!(close(f, 4_656.382_024_537_424, 1e-12), "{f}");
    }

    #[test]
    fn cartesian_values() {
        let (fx, fz) = cartesian_components(100.0, FRAC_PI_2, 0.0, 0.0);
        assert!(close(fx, 100.0, 1e-15) && fz.abs() < 1e-15);
        assert_eq!(cartesian_components(0.0, 1.0, 0.2, 0.1), (0.0, 0.0));
        let (fx, fz) = cartesian_components(100.0, 1.0, 0.2, 0.1);
        assert!(close(fx, 89.120_736_006_143_534, 1e-14));
        assert!(close(fz, 45.359_612_142_557_738, 1e-14));
    }

    #[test]
    fn effective_friction_cases() {
        let ib = Vector3::new(0.0, 0.0, 1.0);
        let (d, ca) = effective_friction(0.26, 500.0, &Vector3::new(3.0, 0.0, 0.0), &ib, 10.0).unwrap();
        assert_eq!((d, ca), (0.0, 0.0));
        let (d, ca) = effective_friction(0.26, 500.0, &Vector3::new(0.0, 0.0, -10.0), &ib, 10.0).unwrap();
        assert!(close(d, 0.26, 1e-6) && close(ca, 500.0, 1e-6));
        let (d, ca) = effective_friction(0.26, 500.0, &Vector3::new(0.0, 0.0, 10.0), &ib, 10.0).unwrap();
        assert!(close(d, -0.26, 1e-6) && close(ca, -500.0, 1e-6));
        assert!(effective_friction(0.26, 500.0, &Vector3::zeros(), &(ib * 2.0), 10.0).is_err());
        assert!(effective_friction(0.26, 500.0, &Vector3::zeros(), &ib, 0.0).is_err());
    }

    #[test]
    fn fallback_values() {
        let p = SingularityPolicy::new(1e5, 0.0).unwrap();
        assert_eq!(singular_fallback(0.0, &p), 0.0);
        assert!(close(singular_fallback(0.5, &SingularityPolicy::new(1e5, 0.1).unwrap()), 6.0e4, 1e-14));
        assert!(close(singular_fallback(1.0, &SingularityPolicy::new(2e5, 0.05).unwrap()), 2.1e5, 1e-14));
        assert!(SingularityPolicy::new(0.0, 0.0).is_err());
        assert!(SingularityPolicy::new(1.0, -1.0).is_err());
    }

    #[test]
    fn cutting_force_switches_to_fallback() {
        let g = CutGeometry::new(0.4, 0.0, 2.0, 1.0).unwrap();
        let s = strength(0.5, 0.0, 0.3, 0.0);
        let p = SingularityPolicy::new(2e5, 0.05).unwrap();
        let out = cutting_force(&g, 0.5, &s, 16000.0, 0.0, 1.0, &p).unwrap();
        assert!(out.singular && out.factors.is_none());
        assert!(close(out.force, 2e5 * 0.45, 1e-14));
    }

    #[test]
    fn equilibrium_closed_case() {
        let g = CutGeometry::new(1.0, 0.0, FRAC_PI_2, 1.0).unwrap();
        let s = strength(0.0, 0.0, 0.0, 0.0);
        let r = reaction_from_horizontal_balance(4905.0, &g, FRAC_PI_4, &s).unwrap();
        let (sx, sz) = equilibrium_residual(4905.0, r, &g, FRAC_PI_4, &s, 9810.0, 0.0).unwrap();
        assert!(sx.abs() < 1e-9 && sz.abs() < 1e-9, "{sx} {sz}");
    }
}
