//! Soil presets: the built-in set and the schema shared with scenario files.

use std::collections::BTreeMap;

use fee::soil::{void_ratio_from_relative_density, PropertyTable, Soil, SoilState};
use serde::Deserialize;

const BUILTIN: &str = include_str!("presets.toml");

/// A property table written either as a constant or as `[[e, value], ...]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TableSpec {
    Constant(f64),
    Points(Vec<[f64; 2]>),
}

impl TableSpec {
    fn build(&self) -> fee::Result<PropertyTable> {
        match self {
            TableSpec::Constant(v) if v.is_finite() => Ok(PropertyTable::constant(*v)),
            TableSpec::Constant(v) => {
                Err(fee::Error::Domain(format!("table value {v} must be finite")))
            }
            TableSpec::Points(pts) => PropertyTable::new(pts.iter().map(|p| (p[0], p[1])).collect()),
        }
    }
}

fn unit_table() -> TableSpec {
    TableSpec::Constant(1.0)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSpec {
    #[serde(default)]
    pub description: String,
    /// `tan(phi)` against void ratio.
    pub friction: TableSpec,
    pub cohesion: TableSpec,
    #[serde(default = "unit_table")]
    pub force_scale: TableSpec,
    pub delta: f64,
    pub c_a: f64,
    pub void_ratio: Option<f64>,
    /// Percent; alternative to `void_ratio`.
    pub relative_density: Option<f64>,
    pub e_min: f64,
    pub e_max: f64,
    pub water_content: f64,
    pub particle_density: f64,
}

impl PresetSpec {
    /// Builds the soil; errors are prefixed with the offending field.
    pub fn build(&self, name: &str) -> Result<Soil, String> {
        let field = |f: &str, e: fee::Error| format!("{f}: {e}");
        let e = match (self.void_ratio, self.relative_density) {
            (Some(e), None) => e,
            (None, Some(i_d)) => void_ratio_from_relative_density(i_d, self.e_min, self.e_max)
                .map_err(|e| field("relative_density", e))?,
            _ => return Err("exactly one of void_ratio and relative_density is required".into()),
        };
        let state = SoilState::new(e, self.e_min, self.e_max, self.water_content, self.particle_density)
            .map_err(|e| field("void_ratio", e))?;
        let soil = Soil {
            name: name.to_string(),
            friction_table: self.friction.build().map_err(|e| field("friction", e))?,
            cohesion_table: self.cohesion.build().map_err(|e| field("cohesion", e))?,
            force_scale_table: self.force_scale.build().map_err(|e| field("force_scale", e))?,
            delta: self.delta,
            c_a: self.c_a,
            state,
        };
        soil.validate().map_err(|e| e.to_string())?;
        Ok(soil)
    }
}

/// The built-in presets, by name.
pub fn builtin() -> BTreeMap<String, PresetSpec> {
    toml::from_str(BUILTIN).expect("built-in presets parse")
}
