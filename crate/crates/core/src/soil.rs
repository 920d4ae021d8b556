//! Soil strength and density state.
//!
//! Strength follows the Coulomb law `tau = c + sigma_n tan(phi)`. Friction
//! and cohesion vary with compaction through piecewise-linear tables keyed by
//! void ratio `e`. The friction table stores `tan(phi)`, not `phi`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{domain, Result};

/// Density of water (kg/m³).
pub const WATER_DENSITY: f64 = 1000.0;
/// Specific weight of water (N/m³).
pub const WATER_UNIT_WEIGHT: f64 = 9810.0;

/// Failure-law parameters of a soil and its contact with the tool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoilStrength {
    /// Internal friction angle (rad).
    pub phi: f64,
    /// Cohesion (Pa).
    pub c: f64,
    /// Soil-tool friction angle (rad).
    pub delta: f64,
    /// Soil-tool adhesion (Pa).
    pub c_a: f64,
}

impl SoilStrength {
    pub fn new(phi: f64, c: f64, delta: f64, c_a: f64) -> Result<Self> {
        if !(0.0..FRAC_PI_2).contains(&phi) {
            return Err(domain(format!("phi = {phi} must lie in [0, pi/2)")));
        }
        if !(0.0..FRAC_PI_2).contains(&delta) {
            return Err(domain(format!("delta = {delta} must lie in [0, pi/2)")));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(domain(format!("cohesion c = {c} must be >= 0")));
        }
        if !(c_a >= 0.0 && c_a.is_finite()) {
            return Err(domain(format!("adhesion c_a = {c_a} must be >= 0")));
        }
        Ok(Self { phi, c, delta, c_a })
    }

    /// Shear strength on a plane carrying normal stress `sigma_n` (Pa).
    pub fn shear_strength(&self, sigma_n: f64) -> f64 {
        self.c + sigma_n * self.phi.tan()
    }
}

/// Compaction state of a soil column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoilState {
    e: f64,
    e_min: f64,
    e_max: f64,
    w: f64,
    rho_p: f64,
}

impl SoilState {
    /// Builds a state, rejecting a void ratio outside `[e_min, e_max]`.
    pub fn new(e: f64, e_min: f64, e_max: f64, w: f64, rho_p: f64) -> Result<Self> {
        if !(e_min > 0.0 && e_min < e_max && e_max.is_finite()) {
            return Err(domain(format!(
                "void ratio limits must satisfy 0 < e_min < e_max (got {e_min}, {e_max})"
            )));
        }
        if !(e_min..=e_max).contains(&e) {
            return Err(domain(format!("void ratio e = {e} outside [{e_min}, {e_max}]")));
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(domain(format!("water content w = {w} must be >= 0")));
        }
        if !(rho_p > 0.0 && rho_p.is_finite()) {
            return Err(domain(format!("particle density rho_p = {rho_p} must be > 0")));
        }
        Ok(Self { e, e_min, e_max, w, rho_p })
    }

    /// Builds a state from a relative density in percent.
    pub fn from_relative_density(
        i_d: f64,
        e_min: f64,
        e_max: f64,
        w: f64,
        rho_p: f64,
    ) -> Result<Self> {
        let e = void_ratio_from_relative_density(i_d, e_min, e_max)?;
        Self::new(e, e_min, e_max, w, rho_p)
    }

    pub fn void_ratio(&self) -> f64 {
        self.e
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn water_content(&self) -> f64 {
        self.w
    }

    pub fn particle_density(&self) -> f64 {
        self.rho_p
    }

    pub fn relative_density(&self) -> f64 {
        // limits were validated at construction
        (self.e_max - self.e) / (self.e_max - self.e_min) * 100.0
    }

    /// Moist unit weight `gamma` (N/m³) of this state.
    pub fn unit_weight(&self) -> f64 {
        moist_unit_weight(self.rho_p, self.w, self.e)
    }
}

/// Relative density `I_d` in percent: 0 at the loosest state, 100 at the densest.
pub fn relative_density(e: f64, e_min: f64, e_max: f64) -> Result<f64> {
    if !(e_min < e_max) {
        return Err(domain(format!("e_min = {e_min} must be below e_max = {e_max}")));
    }
    Ok((e_max - e) / (e_max - e_min) * 100.0)
}

/// Inverse of [`relative_density`].
pub fn void_ratio_from_relative_density(i_d: f64, e_min: f64, e_max: f64) -> Result<f64> {
    if !(e_min < e_max) {
        return Err(domain(format!("e_min = {e_min} must be below e_max = {e_max}")));
    }
    if !(0.0..=100.0).contains(&i_d) {
        return Err(domain(format!("relative density {i_d}% outside [0, 100]")));
    }
    Ok(e_max - i_d / 100.0 * (e_max - e_min))
}

/// Moist unit weight (N/m³) from particle density `rho_p` (kg/m³),
/// gravimetric water content `w` and void ratio `e`.
pub fn moist_unit_weight(rho_p: f64, w: f64, e: f64) -> f64 {
    rho_p / WATER_DENSITY * WATER_UNIT_WEIGHT * (1.0 + w) / (1.0 + e)
}

/// Piecewise-linear function of void ratio, clamped outside its breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyTable {
    breakpoints: Vec<(f64, f64)>,
}

impl PropertyTable {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(domain("property table needs at least one breakpoint"));
        }
        if breakpoints.iter().any(|(e, v)| !e.is_finite() || !v.is_finite()) {
            return Err(domain("property table entries must be finite"));
        }
        if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(domain("property table breakpoints must be strictly increasing in e"));
        }
        Ok(Self { breakpoints })
    }

    /// A table that returns `value` everywhere.
    pub fn constant(value: f64) -> Self {
        Self { breakpoints: vec![(0.0, value)] }
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn lookup(&self, e: f64) -> f64 {
        table_lookup(self, e)
    }

    pub(crate) fn min_value(&self) -> f64 {
        self.breakpoints.iter().map(|b| b.1).fold(f64::INFINITY, f64::min)
    }
}

/// Linear interpolation between the bracketing breakpoints of `table`.
pub fn table_lookup(table: &PropertyTable, e: f64) -> f64 {
    let pts = &table.breakpoints;
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    if e <= first.0 {
        return first.1;
    }
    if e >= last.0 {
        return last.1;
    }
    // first index with breakpoint e strictly greater than the query
    let hi = pts.partition_point(|p| p.0 <= e);
    let (e0, v0) = pts[hi - 1];
    let (e1, v1) = pts[hi];
    if e == e0 {
        return v0;
    }
    let t = (e - e0) / (e1 - e0);
    v0 + t * (v1 - v0)
}

/// A complete soil description: strength tables, tool contact and compaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Soil {
    pub name: String,
    /// `tan(phi)` against void ratio.
    pub friction_table: PropertyTable,
    /// Cohesion (Pa) against void ratio.
    pub cohesion_table: PropertyTable,
    /// Unitless force multiplier against void ratio.
    pub force_scale_table: PropertyTable,
    /// Soil-tool friction angle (rad).
    pub delta: f64,
    /// Soil-tool adhesion (Pa).
    pub c_a: f64,
    pub state: SoilState,
}

impl Soil {
    /// Validates the tables against the strength invariants.
    pub fn validate(&self) -> Result<()> {
        if self.friction_table.min_value() < 0.0 {
            return Err(domain("friction table stores tan(phi) and must be >= 0"));
        }
        if self.cohesion_table.min_value() < 0.0 {
            return Err(domain("cohesion table must be >= 0"));
        }
        self.strength().map(|_| ())
    }

    /// Strength parameters at the current void ratio.
    pub fn strength(&self) -> Result<SoilStrength> {
        let e = self.state.void_ratio();
        let phi = self.friction_table.lookup(e).atan();
        let c = self.cohesion_table.lookup(e);
        SoilStrength::new(phi, c, self.delta, self.c_a)
    }

    pub fn unit_weight(&self) -> f64 {
        self.state.unit_weight()
    }
}
