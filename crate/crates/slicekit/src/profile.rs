//! Machine, material, and process profiles plus the on-disk profile format.
//!
//! Profile files are line-oriented `key = value` pairs grouped under
//! `[machine]`, `[process]`, and `[material]` sections. Unknown keys are
//! rejected by name; absent keys fall back to the Delta/PLA defaults.

use crate::flow::FlowParameters;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Traversal direction of outer perimeter loops; holes run opposite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OutlineDirection {
    #[default]
    Ccw,
    Cw,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("line {line}: unknown section `[{section}]`")]
    UnknownSection { line: usize, section: String },
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: expected `key = value`")]
    MalformedLine { line: usize },
    #[error("line {line}: invalid value for `{key}`: {value}")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("invalid profile: {0}")]
    Invalid(String),
}

/// Printer envelope and kinematic limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineProfile {
    /// Build volume (x, y, z) in mm.
    pub build_volume: (f64, f64, f64),
    pub min_speed: f64,
    pub max_speed: f64,
    pub min_layer: f64,
    pub max_layer: f64,
}

impl Default for MachineProfile {
    fn default() -> Self {
        // Delta printer: 180x180x320 mm, 80-150 mm/s, 50-200 micron layers.
        Self {
            build_volume: (180.0, 180.0, 320.0),
            min_speed: 80.0,
            max_speed: 150.0,
            min_layer: 0.05,
            max_layer: 0.2,
        }
    }
}

/// Filament material description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// Density in g/mm^3.
    pub density: f64,
    /// Allowed nozzle temperature window, degrees C.
    pub temp_range: (f64, f64),
}

impl Default for Material {
    fn default() -> Self {
        Self {
            name: "PLA".into(),
            density: 0.00124,
            temp_range: (180.0, 200.0),
        }
    }
}

/// Process parameters for one print job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrintProfile {
    pub layer_height: f64,
    pub extrusion_width: f64,
    pub infill_percent: f64,
    pub perimeter_count: usize,
    pub top_layers: usize,
    pub bottom_layers: usize,
    pub print_speed: f64,
    pub travel_speed: f64,
    pub retraction_distance: f64,
    pub retraction_speed: f64,
    /// Travels longer than this get a retract/unretract pair, mm.
    pub retraction_threshold: f64,
    pub nozzle_temp: f64,
    pub bed_temp: f64,
    /// Fixed time allowance for heat-up and homing, seconds.
    pub heatup_seconds: f64,
    pub outline_direction: OutlineDirection,
    pub flow: FlowParameters,
}

impl Default for PrintProfile {
    fn default() -> Self {
        Self {
            layer_height: 0.2,
            extrusion_width: 0.48,
            infill_percent: 20.0,
            perimeter_count: 2,
            top_layers: 3,
            bottom_layers: 3,
            print_speed: 100.0,
            travel_speed: 120.0,
            retraction_distance: 1.5,
            retraction_speed: 40.0,
            retraction_threshold: 2.0,
            nozzle_temp: 200.0,
            bed_temp: 60.0,
            heatup_seconds: 180.0,
            outline_direction: OutlineDirection::Ccw,
            flow: FlowParameters::default(),
        }
    }
}

impl PrintProfile {
    /// Check internal consistency against a machine and material.
    pub fn validate(
        &self,
        machine: &MachineProfile,
        material: &Material,
    ) -> Result<(), ProfileError> {
        if self.layer_height < machine.min_layer || self.layer_height > machine.max_layer {
            return Err(ProfileError::Invalid(format!(
                "layer_height {} outside machine range [{}, {}]",
                self.layer_height, machine.min_layer, machine.max_layer
            )));
        }
        if self.nozzle_temp < material.temp_range.0 || self.nozzle_temp > material.temp_range.1 {
            return Err(ProfileError::Invalid(format!(
                "nozzle_temp {} outside {} range [{}, {}]",
                self.nozzle_temp, material.name, material.temp_range.0, material.temp_range.1
            )));
        }
        if self.retraction_distance < 0.0 {
            return Err(ProfileError::Invalid(
                "retraction_distance must be >= 0".into(),
            ));
        }
        if self.retraction_speed <= 0.0 {
            return Err(ProfileError::Invalid("retraction_speed must be > 0".into()));
        }
        if !(0.0..=100.0).contains(&self.infill_percent) {
            return Err(ProfileError::Invalid(
                "infill_percent must be in [0, 100]".into(),
            ));
        }
        self.flow
            .validate()
            .map_err(|e| ProfileError::Invalid(e.to_string()))?;
        Ok(())
    }
}

/// Fully resolved profile bundle as loaded from disk.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProfileFile {
    pub machine: MachineProfile,
    pub process: PrintProfile,
    pub material: Material,
}

impl ProfileFile {
    /// Parse the `key = value` profile format; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self, ProfileError> {
        let mut out = ProfileFile::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
                continue;
            }
            if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                if !matches!(section.as_str(), "machine" | "process" | "material") {
                    return Err(ProfileError::UnknownSection { line, section });
                }
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ProfileError::MalformedLine { line });
            };
            let key = key.trim();
            let value = value.trim();
            out.apply(&section, key, value, line)?;
        }
        // Keep the flow block in sync with process-level geometry.
        out.process.flow.layer_height = out.process.layer_height;
        out.process.flow.extrusion_width = out.process.extrusion_width;
        Ok(out)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ProfileError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ProfileError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn apply(
        &mut self,
        section: &str,
        key: &str,
        value: &str,
        line: usize,
    ) -> Result<(), ProfileError> {
        let num = |v: &str| -> Result<f64, ProfileError> {
            v.parse::<f64>().map_err(|_| ProfileError::InvalidValue {
                line,
                key: key.to_string(),
                value: v.to_string(),
            })
        };
        let int = |v: &str| -> Result<usize, ProfileError> {
            v.parse::<usize>().map_err(|_| ProfileError::InvalidValue {
                line,
                key: key.to_string(),
                value: v.to_string(),
            })
        };
        match (section, key) {
            ("machine", "build_volume_x") => self.machine.build_volume.0 = num(value)?,
            ("machine", "build_volume_y") => self.machine.build_volume.1 = num(value)?,
            ("machine", "build_volume_z") => self.machine.build_volume.2 = num(value)?,
            ("machine", "min_speed") => self.machine.min_speed = num(value)?,
            ("machine", "max_speed") => self.machine.max_speed = num(value)?,
            ("machine", "min_layer") => self.machine.min_layer = num(value)?,
            ("machine", "max_layer") => self.machine.max_layer = num(value)?,
            ("process", "layer_height") => self.process.layer_height = num(value)?,
            ("process", "extrusion_width") => self.process.extrusion_width = num(value)?,
            ("process", "infill_percent") => self.process.infill_percent = num(value)?,
            ("process", "perimeter_count") => self.process.perimeter_count = int(value)?,
            ("process", "top_layers") => self.process.top_layers = int(value)?,
            ("process", "bottom_layers") => self.process.bottom_layers = int(value)?,
            ("process", "print_speed") => self.process.print_speed = num(value)?,
            ("process", "travel_speed") => self.process.travel_speed = num(value)?,
            ("process", "retraction_distance") => self.process.retraction_distance = num(value)?,
            ("process", "retraction_speed") => self.process.retraction_speed = num(value)?,
            ("process", "retraction_threshold") => self.process.retraction_threshold = num(value)?,
            ("process", "nozzle_temp") => self.process.nozzle_temp = num(value)?,
            ("process", "bed_temp") => self.process.bed_temp = num(value)?,
            ("process", "heatup_seconds") => self.process.heatup_seconds = num(value)?,
            ("process", "outline_direction") => {
                self.process.outline_direction = match value {
                    "ccw" | "CCW" => OutlineDirection::Ccw,
                    "cw" | "CW" => OutlineDirection::Cw,
                    _ => {
                        return Err(ProfileError::InvalidValue {
                            line,
                            key: key.to_string(),
                            value: value.to_string(),
                        })
                    }
                }
            }
            ("process", "nozzle_diameter") => self.process.flow.nozzle_diameter = num(value)?,
            ("process", "filament_diameter") => self.process.flow.filament_diameter = num(value)?,
            ("process", "extrusion_multiplier") => {
                self.process.flow.extrusion_multiplier = num(value)?
            }
            ("process", "max_melt_rate") => self.process.flow.max_melt_rate = num(value)?,
            ("material", "name") => self.material.name = value.to_string(),
            ("material", "density") => self.material.density = num(value)?,
            ("material", "temp_min") => self.material.temp_range.0 = num(value)?,
            ("material", "temp_max") => self.material.temp_range.1 = num(value)?,
            _ => {
                return Err(ProfileError::UnknownKey {
                    line,
                    section: section.to_string(),
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        self.process.validate(&self.machine, &self.material)
    }
}
