//! Heightfield sampling and extraction of an effective flat surface ahead of
//! the blade.
//!
//! The terrain in front of the blade is sampled into a profile of
//! `(distance, elevation)` pairs, weighted by `exp(-lambda s)` normalized to
//! unit sum, and fitted with a weighted least-squares line. The line gives
//! the surface angle `alpha`, the blade angle relative to it and the cut
//! depth normal to it.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{Vector2, Vector3};

use crate::error::{domain, Error, Result};
use crate::wedge::CutGeometry;

const EDGE_TOL: f64 = 1e-9;

/// Regular grid of elevations. Node `(i, j)` sits at
/// `origin + spacing * (i, j)`; heights are stored row-major with `i` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Heightfield {
    origin: Vector2<f64>,
    spacing: f64,
    nx: usize,
    ny: usize,
    heights: Vec<f64>,
}

impl Heightfield {
    pub fn new(
        origin: Vector2<f64>,
        spacing: f64,
        nx: usize,
        ny: usize,
        heights: Vec<f64>,
    ) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(domain(format!("grid spacing {spacing} must be > 0")));
        }
        if nx < 2 || ny < 1 {
            return Err(domain(format!("grid needs nx >= 2 and ny >= 1 (got {nx} x {ny})")));
        }
        if heights.len() != nx * ny {
            return Err(domain(format!(
                "expected {} heights for a {nx} x {ny} grid, got {}",
                nx * ny,
                heights.len()
            )));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(domain("heights must be finite"));
        }
        Ok(Self { origin, spacing, nx, ny, heights })
    }

    /// Grid whose node heights are `f(x, y)`.
    pub fn from_fn(
        origin: Vector2<f64>,
        spacing: f64,
        nx: usize,
        ny: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut heights = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                heights.push(f(origin.x + spacing * i as f64, origin.y + spacing * j as f64));
            }
        }
        Self::new(origin, spacing, nx, ny, heights)
    }

    /// Parses the text grid format: a header `nx ny spacing origin_x origin_y`
    /// followed by `ny` rows of `nx` elevations.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("missing header line".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::Parse(format!(
                "header must read `nx ny spacing origin_x origin_y`, got `{header}`"
            )));
        }
        let int = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse(format!("bad grid size `{s}`")))
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}`")));
        let (nx, ny) = (int(fields[0])?, int(fields[1])?);
        let spacing = num(fields[2])?;
        let origin = Vector2::new(num(fields[3])?, num(fields[4])?);

        let mut heights = Vec::with_capacity(nx * ny);
        for row in 0..ny {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("expected {ny} rows, found {row}")))?;
            let before = heights.len();
            for tok in line.split_whitespace() {
                heights.push(num(tok)?);
            }
            if heights.len() - before != nx {
                return Err(Error::Parse(format!(
                    "row {row} has {} values, expected {nx}",
                    heights.len() - before
                )));
            }
        }
        if lines.next().is_some() {
            return Err(Error::Parse(format!("more than {ny} rows")));
        }
        Self::new(origin, spacing, nx, ny, heights)
    }

    /// Serializes to the text grid format read by [`Heightfield::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {} {}\n",
            self.nx, self.ny, self.spacing, self.origin.x, self.origin.y
        );
        for row in self.heights.chunks(self.nx) {
            let line: Vec<String> = row.iter().map(|h| h.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn origin(&self) -> Vector2<f64> {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn node_position(&self, i: usize, j: usize) -> Vector2<f64> {
        self.origin + Vector2::new(i as f64, j as f64) * self.spacing
    }

    pub fn height(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.nx + i]
    }

    pub fn set_height(&mut self, i: usize, j: usize, z: f64) {
        self.heights[j * self.nx + i] = z;
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.cell_coord(x, self.origin.x, self.nx).is_some()
            && self.cell_coord(y, self.origin.y, self.ny).is_some()
    }

    /// Cell index and fractional offset along one axis.
    fn cell_coord(&self, v: f64, origin: f64, n: usize) -> Option<(usize, f64)> {
        let u = (v - origin) / self.spacing;
        let max = (n - 1) as f64;
        if !(u >= -EDGE_TOL && u <= max + EDGE_TOL) {
            return None;
        }
        if n == 1 {
            return Some((0, 0.0));
        }
        let u = u.clamp(0.0, max);
        let i = (u.floor() as usize).min(n - 2);
        Some((i, u - i as f64))
    }

    /// Bilinear interpolation of the four nodes around `(x, y)`.
    pub fn sample_height(&self, x: f64, y: f64) -> Result<f64> {
        let out = || Error::OutOfBounds { x, y };
        let (i, tx) = self.cell_coord(x, self.origin.x, self.nx).ok_or_else(out)?;
        let (j, ty) = self.cell_coord(y, self.origin.y, self.ny).ok_or_else(out)?;
        let row = |j: usize| {
            let z0 = self.height(i, j);
            let z1 = self.height(i + 1, j);
            z0 + tx * (z1 - z0)
        };
        if self.ny == 1 {
            return Ok(row(0));
        }
        let (r0, r1) = (row(j), row(j + 1));
        Ok(r0 + ty * (r1 - r0))
    }
}

/// Elevations sampled along the travel direction, starting at the blade.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightProfile {
    samples: Vec<(f64, f64)>,
}

impl HeightProfile {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyProfile);
        }
        if samples[0].0 < 0.0 {
            return Err(domain("profile distances must be >= 0"));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(domain("profile distances must be strictly increasing"));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn distances(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Line `z = a0 + a1 s` fitted to a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub a0: f64,
    pub a1: f64,
    /// `atan(a1)`.
    pub alpha: f64,
    /// All weight sat at one station; the slope was set to zero.
    pub degenerate: bool,
}

/// Blade state in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BladePose {
    /// Cutting edge position (m).
    pub tip: Vector3<f64>,
    /// Horizontal unit vector of travel.
    pub travel_dir: Vector2<f64>,
    /// Blade angle from the horizontal, measured on the soil side (rad).
    pub blade_angle_world: f64,
    pub width: f64,
    pub velocity: Vector3<f64>,
}

impl BladePose {
    pub fn new(
        tip: Vector3<f64>,
        travel_dir: Vector2<f64>,
        blade_angle_world: f64,
        width: f64,
    ) -> Result<Self> {
        if (travel_dir.norm() - 1.0).abs() > 1e-9 {
            return Err(domain("travel direction must be a unit vector"));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(domain(format!("blade width {width} must be > 0")));
        }
        if !(blade_angle_world > 0.0 && blade_angle_world < PI) {
            return Err(domain(format!("blade angle {blade_angle_world} must lie in (0, pi)")));
        }
        Ok(Self { tip, travel_dir, blade_angle_world, width, velocity: Vector3::zeros() })
    }

    /// Unit vector pointing up the blade face.
    pub fn up_blade(&self) -> Vector3<f64> {
        let (s, c) = self.blade_angle_world.sin_cos();
        Vector3::new(c * self.travel_dir.x, c * self.travel_dir.y, s)
    }
}

/// Samples the terrain at `s = 0, step, 2 step, ...` up to `cutoff` ahead of
/// the blade tip. Sampling stops at the field boundary.
pub fn extract_profile(
    field: &Heightfield,
    pose: &BladePose,
    cutoff: f64,
    step: f64,
) -> Result<HeightProfile> {
    if !(cutoff > 0.0) || !(step > 0.0) {
        return Err(domain(format!("cutoff {cutoff} and step {step} must be > 0")));
    }
    let count = (cutoff / step + EDGE_TOL).floor() as usize + 1;
    let mut samples = Vec::with_capacity(count);
    for k in 0..count {
        let s = k as f64 * step;
        let p = pose.tip.xy() + pose.travel_dir * s;
        match field.sample_height(p.x, p.y) {
            Ok(z) => samples.push((s, z)),
            Err(e @ Error::OutOfBounds { .. }) if k == 0 => return Err(e),
            Err(_) => break,
        }
    }
    HeightProfile::new(samples)
}

/// Point weights `C exp(-lambda d_i)` with `C` chosen so they sum to one.
pub fn point_weights(distances: &[f64], lambda: f64, cutoff: f64) -> Result<Vec<f64>> {
    if distances.is_empty() {
        return Err(Error::EmptyProfile);
    }
    if !(lambda >= 0.0) {
        return Err(domain(format!("weight decay lambda = {lambda} must be >= 0")));
    }
    if let Some(d) = distances.iter().find(|&&d| !(d >= 0.0 && d <= cutoff + EDGE_TOL)) {
        return Err(domain(format!("distance {d} outside [0, {cutoff}]")));
    }
    let raw: Vec<f64> = distances.iter().map(|d| (-lambda * d).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Weighted least-squares line through the profile.
///
/// The 2x2 normal equations `(X' W X) a = X' W z` are solved with the
/// abscissa shifted to its weighted mean, which makes the system diagonal.
pub fn fit_slope_wls(profile: &HeightProfile, weights: &[f64]) -> Result<SlopeFit> {
    let pts = profile.samples();
    if weights.len() != pts.len() {
        return Err(domain(format!(
            "{} weights given for {} profile samples",
            weights.len(),
            pts.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(domain("weights must be non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(domain("weights must not all be zero"));
    }
    let s_mean = pts.iter().zip(weights).map(|(p, w)| w * p.0).sum::<f64>() / total;
    let z_mean = pts.iter().zip(weights).map(|(p, w)| w * p.1).sum::<f64>() / total;
    let (mut sxx, mut sxz) = (0.0, 0.0);
    for ((s, z), w) in pts.iter().zip(weights) {
        let ds = s - s_mean;
        sxx += w * ds * ds;
        sxz += w * ds * (z - z_mean);
    }
    if sxx / total < 1e-15 {
        return Ok(SlopeFit { a0: z_mean, a1: 0.0, alpha: 0.0, degenerate: true });
    }
    let a1 = sxz / sxx;
    Ok(SlopeFit { a0: z_mean - a1 * s_mean, a1, alpha: a1.atan(), degenerate: false })
}

/// Cut configuration read off a fitted surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutExtraction {
    pub geometry: CutGeometry,
    /// Distance of the tip below the fitted line, negative above it (m).
    pub signed_depth: f64,
    /// The relative blade angle had to be clamped into `(1e-3, pi - 1e-3)`.
    pub rho_clamped: bool,
}

/// Surface angle, relative blade angle and normal cut depth for a blade
/// pose against a fitted surface. The fit's abscissa is measured from the
/// blade tip.
pub fn cut_geometry_from_fit(pose: &BladePose, fit: &SlopeFit) -> Result<CutExtraction> {
    const RHO_MARGIN: f64 = 1e-3;
    let alpha = fit.alpha;
    let signed_depth = (fit.a0 - pose.tip.z) * alpha.cos();
    let raw_rho = pose.blade_angle_world - alpha;
    let rho = raw_rho.clamp(RHO_MARGIN, PI - RHO_MARGIN);
    let geometry = CutGeometry::new(signed_depth.max(0.0), alpha, rho, pose.width)?;
    Ok(CutExtraction { geometry, signed_depth, rho_clamped: rho != raw_rho })
}
