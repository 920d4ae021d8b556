//! Scenario files: schema, parameter overrides and conversion into
//! simulator inputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fee::sim::{BetaStrategy, MotionSegment, SimConfig};
use fee::soil::Soil;
use fee::terrain::{BladePose, Heightfield};
use fee::wedge::SingularityPolicy;
use nalgebra::{Vector2, Vector3};
use serde::Deserialize;

use crate::error::CliError;
use crate::presets::{self, PresetSpec};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// Name of a built-in or scenario-local soil preset.
    pub soil: String,
    #[serde(default)]
    pub presets: BTreeMap<String, PresetSpec>,
    pub terrain: TerrainSpec,
    pub blade: BladeSpec,
    #[serde(default)]
    pub motion: Vec<MotionSpec>,
    #[serde(default)]
    pub config: ConfigSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerrainKind {
    Flat,
    Ramp,
    File,
}

/// Synthetic terrain (`flat`, `ramp`) or a grid file (`file`).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainSpec {
    pub kind: TerrainKind,
    /// Surface height at `origin` (m).
    #[serde(default)]
    pub height: f64,
    /// Ramp inclination along +x (rad).
    pub angle: Option<f64>,
    /// Grid file, relative to the scenario file.
    pub path: Option<PathBuf>,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    #[serde(default = "default_rows")]
    pub rows: usize,
    #[serde(default)]
    pub origin: [f64; 2],
}

fn default_length() -> f64 {
    10.0
}

fn default_spacing() -> f64 {
    0.01
}

fn default_rows() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BladeSpec {
    #[serde(default = "default_width")]
    pub width: f64,
    /// Blade angle from the horizontal on the soil side (rad).
    pub rake_angle: f64,
    pub x: f64,
    /// Defaults to the terrain's first row.
    pub y: Option<f64>,
    /// Tip depth below the surface at `(x, y)`; negative is above it (m).
    pub depth: f64,
    /// Travel direction, counter-clockwise from +x (rad).
    #[serde(default)]
    pub heading: f64,
}

fn default_width() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSpec {
    pub duration: f64,
    pub velocity: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConfigBase {
    #[default]
    Default,
    FeeOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaStrategySpec {
    MinimizeNGamma,
    SurchargeExtent,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SingularitySpec {
    pub c2: Option<f64>,
    pub d_o: Option<f64>,
}

/// Overrides on top of `base`.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    #[serde(default)]
    pub base: ConfigBase,
    pub dt: Option<f64>,
    pub c1: Option<f64>,
    pub filter_a: Option<f64>,
    pub c4: Option<f64>,
    pub c5: Option<f64>,
    pub c6: Option<f64>,
    pub s_q: Option<f64>,
    pub keep_alive_enabled: Option<bool>,
    pub keep_alive_max_sep: Option<f64>,
    pub sampling_resolution: Option<u32>,
    pub min_sampling_distance: Option<f64>,
    pub beta_strategy: Option<BetaStrategySpec>,
    pub enable_carving: Option<bool>,
    pub enable_fee: Option<bool>,
    pub enable_vertical_heuristics: Option<bool>,
    pub enable_surcharge: Option<bool>,
    #[serde(default)]
    pub singularity: SingularitySpec,
    pub slope_cutoff: Option<f64>,
    pub slope_lambda: Option<f64>,
    pub profile_step: Option<f64>,
    pub force_scale_override: Option<f64>,
    pub vz_debounce_steps: Option<u32>,
}

impl ConfigSpec {
    pub fn build(&self) -> Result<SimConfig, CliError> {
        let mut c = match self.base {
            ConfigBase::Default => SimConfig::default(),
            ConfigBase::FeeOnly => SimConfig::fee_only(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(
            dt, c1, filter_a, c4, c5, c6, s_q, keep_alive_enabled, keep_alive_max_sep,
            sampling_resolution, min_sampling_distance, enable_carving, enable_fee,
            enable_vertical_heuristics, enable_surcharge, slope_cutoff, slope_lambda,
            vz_debounce_steps
        );
        if self.profile_step.is_some() {
            c.profile_step = self.profile_step;
        }
        if self.force_scale_override.is_some() {
            c.force_scale_override = self.force_scale_override;
        }
        if let Some(s) = self.beta_strategy {
            c.beta_strategy = match s {
                BetaStrategySpec::MinimizeNGamma => BetaStrategy::MinimizeNGamma,
                BetaStrategySpec::SurchargeExtent => BetaStrategy::SurchargeExtent,
            };
        }
        c.singularity = SingularityPolicy {
            c2: self.singularity.c2.unwrap_or(c.singularity.c2),
            d_o: self.singularity.d_o.unwrap_or(c.singularity.d_o),
        };
        c.validate().map_err(|e| CliError::Invalid(format!("config.{e}")))?;
        Ok(c)
    }
}

/// Everything a run needs.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub soil: Soil,
    pub field: Heightfield,
    pub pose: BladePose,
    pub program: Vec<MotionSegment>,
    pub config: SimConfig,
}

/// Replaces the number at a dotted path (`blade.depth`, `motion.0.duration`).
/// Missing table keys are created; array indices must exist.
pub fn set_number(root: &mut toml::Value, path: &str, value: f64) -> Result<(), CliError> {
    let bad = |why: &str| CliError::Invalid(format!("{path}: {why}"));
    if path.split('.').any(str::is_empty) {
        return Err(bad("malformed parameter path"));
    }
    let mut node = root;
    for key in path.split('.') {
        node = match node {
            toml::Value::Table(t) => t
                .entry(key.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new())),
            toml::Value::Array(a) => {
                let i: usize = key.parse().map_err(|_| bad("expected an array index"))?;
                a.get_mut(i).ok_or_else(|| bad("array index out of range"))?
            }
            _ => return Err(bad("path descends into a scalar")),
        };
    }
    match node {
        toml::Value::Float(_) | toml::Value::Integer(_) => {}
        toml::Value::Table(t) if t.is_empty() => {}
        _ => return Err(bad("not a numeric field")),
    }
    *node = if value.fract() == 0.0 && value.abs() < 9.0e15 {
        toml::Value::Integer(value as i64)
    } else {
        toml::Value::Float(value)
    };
    Ok(())
}

/// Whether a parameter path names an angle field (radians in files).
pub fn is_angle_path(path: &str) -> bool {
    matches!(path, "terrain.angle" | "blade.rake_angle" | "blade.heading")
        || (path.starts_with("presets.") && path.ends_with(".delta"))
}

/// Parses scenario text, applies numeric overrides and builds the run inputs.
/// `base_dir` resolves terrain file paths.
pub fn load_str(text: &str, base_dir: &Path, overrides: &[(String, f64)]) -> Result<Scenario, CliError> {
    let table: toml::Table =
        text.parse().map_err(|e| CliError::Invalid(format!("scenario syntax: {e}")))?;
    let mut doc = toml::Value::Table(table);
    for (path, v) in overrides {
        set_number(&mut doc, path, *v)?;
    }
    let file: ScenarioFile = serde_path_to_error::deserialize(doc)
        .map_err(|e| CliError::Invalid(format!("{}: {}", e.path(), e.inner())))?;
    build(&file, base_dir)
}

pub fn load(path: &Path, overrides: &[(String, f64)]) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    load_str(&text, dir, overrides)
}

fn invalid(field: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(format!("{field}: {e}"))
}

fn build(file: &ScenarioFile, base_dir: &Path) -> Result<Scenario, CliError> {
    let spec = match file.presets.get(&file.soil) {
        Some(s) => s.clone(),
        None => presets::builtin()
            .remove(&file.soil)
            .ok_or_else(|| invalid("soil", format!("unknown preset '{}'", file.soil)))?,
    };
    let soil = spec.build(&file.soil).map_err(|e| invalid(&format!("presets.{}", file.soil), e))?;
    let field = build_terrain(&file.terrain, base_dir)?;

    let b = &file.blade;
    let heading = b.heading;
    let y = b.y.unwrap_or(field.origin().y);
    let surface = field.sample_height(b.x, y).map_err(|e| invalid("blade", e))?;
    let pose = BladePose::new(
        Vector3::new(b.x, y, surface - b.depth),
        Vector2::new(heading.cos(), heading.sin()),
        b.rake_angle,
        b.width,
    )
    .map_err(|e| invalid("blade", e))?;

    if file.motion.is_empty() {
        return Err(invalid("motion", "at least one segment is required"));
    }
    let mut program = Vec::with_capacity(file.motion.len());
    for (i, m) in file.motion.iter().enumerate() {
        if !(m.duration > 0.0 && m.duration.is_finite()) {
            return Err(invalid(&format!("motion[{i}].duration"), format!("{} must be > 0", m.duration)));
        }
        if m.velocity.iter().any(|v| !v.is_finite()) {
            return Err(invalid(&format!("motion[{i}].velocity"), "must be finite"));
        }
        program.push(MotionSegment { duration: m.duration, velocity: Vector3::from(m.velocity) });
    }
    let config = file.config.build()?;
    Ok(Scenario { soil, field, pose, program, config })
}

fn build_terrain(t: &TerrainSpec, base_dir: &Path) -> Result<Heightfield, CliError> {
    if t.kind == TerrainKind::File {
        let rel = t.path.as_ref().ok_or_else(|| invalid("terrain.path", "required for kind = file"))?;
        let path = base_dir.join(rel);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| invalid("terrain.path", format!("{}: {e}", path.display())))?;
        return Heightfield::parse(&text).map_err(|e| invalid("terrain.path", e));
    }
    if !(t.spacing > 0.0) {
        return Err(invalid("terrain.spacing", "must be > 0"));
    }
    if !(t.length >= t.spacing) {
        return Err(invalid("terrain.length", "must be at least one grid spacing"));
    }
    if t.rows == 0 {
        return Err(invalid("terrain.rows", "must be >= 1"));
    }
    let slope = match (t.kind, t.angle) {
        (TerrainKind::Ramp, Some(a)) => {
            if !(a.abs() < std::f64::consts::FRAC_PI_2) {
                return Err(invalid("terrain.angle", "must lie in (-pi/2, pi/2)"));
            }
            a.tan()
        }
        (TerrainKind::Ramp, None) => return Err(invalid("terrain.angle", "required for kind = ramp")),
        (_, Some(_)) => return Err(invalid("terrain.angle", "only valid for kind = ramp")),
        _ => 0.0,
    };
    let nx = (t.length / t.spacing).round() as usize + 1;
    let origin = Vector2::new(t.origin[0], t.origin[1]);
    let (h, x0) = (t.height, t.origin[0]);
    Heightfield::from_fn(origin, t.spacing, nx, t.rows, |x, _| h + slope * (x - x0))
        .map_err(|e| invalid("terrain", e))
}
