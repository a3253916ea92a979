//! Melt-flow model: bead cross-section, volumetric flow rate, and the
//! speed cap imposed by the hotend's melt capacity.
//!
//! The bead is modeled as a pure rectangle (width x height). This
//! overestimates deposited volume by roughly 7% versus a rounded-rectangle
//! bead; the simpler model is kept deliberately.

use crate::profile::MachineProfile;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("invalid flow parameters: {0}")]
    InvalidParameters(String),
    #[error("infeasible flow: melt-capped speed {max_speed:.3} mm/s is below machine minimum {machine_min:.3} mm/s")]
    InfeasibleFlow { max_speed: f64, machine_min: f64 },
}

/// Bead geometry and melt capacity for one print configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParameters {
    pub extrusion_width: f64,
    pub layer_height: f64,
    pub nozzle_diameter: f64,
    pub filament_diameter: f64,
    pub extrusion_multiplier: f64,
    /// Maximum volumetric melt rate of the hotend, mm^3/s.
    pub max_melt_rate: f64,
}

impl FlowParameters {
    pub fn new(
        extrusion_width: f64,
        layer_height: f64,
        nozzle_diameter: f64,
        filament_diameter: f64,
        extrusion_multiplier: f64,
        max_melt_rate: f64,
    ) -> Result<Self, FlowError> {
        let p = Self {
            extrusion_width,
            layer_height,
            nozzle_diameter,
            filament_diameter,
            extrusion_multiplier,
            max_melt_rate,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |m: String| Err(FlowError::InvalidParameters(m));
        if !(self.layer_height > 0.0 && self.layer_height <= 0.8 * self.nozzle_diameter) {
            return bad(format!(
                "layer_height {} must be in (0, 0.8 * nozzle_diameter = {}]",
                self.layer_height,
                0.8 * self.nozzle_diameter
            ));
        }
        if self.extrusion_width < self.nozzle_diameter {
            return bad(format!(
                "extrusion_width {} must be >= nozzle_diameter {}",
                self.extrusion_width, self.nozzle_diameter
            ));
        }
        if !(self.extrusion_multiplier > 0.0 && self.extrusion_multiplier <= 2.0) {
            return bad(format!(
                "extrusion_multiplier {} must be in (0, 2]",
                self.extrusion_multiplier
            ));
        }
        if self.filament_diameter <= 0.0 {
            return bad("filament_diameter must be positive".into());
        }
        if self.max_melt_rate <= 0.0 {
            return bad("max_melt_rate must be positive".into());
        }
        Ok(())
    }

    /// Cross-section of the filament stock, mm^2.
    pub fn filament_cross_section(&self) -> f64 {
        std::f64::consts::PI * self.filament_diameter * self.filament_diameter / 4.0
    }
}

impl Default for FlowParameters {
    fn default() -> Self {
        Self {
            extrusion_width: 0.48,
            layer_height: 0.2,
            nozzle_diameter: 0.4,
            filament_diameter: 1.75,
            extrusion_multiplier: 1.0,
            max_melt_rate: 10.0,
        }
    }
}

/// Bead cross-section area: extrusion width times layer height, mm^2.
pub fn print_area(flow: &FlowParameters) -> f64 {
    flow.extrusion_width * flow.layer_height
}

/// Volumetric flow through the nozzle at a given speed, mm^3/s.
pub fn melt_volume_rate(print_speed: f64, flow: &FlowParameters) -> f64 {
    print_speed * print_area(flow)
}

/// Fastest speed the hotend can sustain for this bead, mm/s.
pub fn max_print_speed(flow: &FlowParameters) -> f64 {
    flow.max_melt_rate / print_area(flow)
}

/// Clamp a requested extrusion feedrate into the printable window.
///
/// The upper bound is the smaller of the machine maximum and the melt cap;
/// the lower bound is the machine minimum. Fails when the melt cap falls
/// below the machine minimum: no legal speed exists for these settings.
pub fn cap_feedrate(
    requested: f64,
    flow: &FlowParameters,
    machine: &MachineProfile,
) -> Result<f64, FlowError> {
    let cap = max_print_speed(flow);
    if cap < machine.min_speed {
        return Err(FlowError::InfeasibleFlow {
            max_speed: cap,
            machine_min: machine.min_speed,
        });
    }
    Ok(requested.clamp(machine.min_speed, machine.max_speed.min(cap)))
}

/// Clamp a travel feedrate to the machine speed range (no melt involved).
pub fn cap_travel_feedrate(requested: f64, machine: &MachineProfile) -> f64 {
    requested.clamp(machine.min_speed, machine.max_speed)
}

/// Millimeters of filament consumed per millimeter of XY extrusion travel.
pub fn extrusion_feed_per_mm(flow: &FlowParameters) -> f64 {
    flow.extrusion_multiplier * print_area(flow) / flow.filament_cross_section()
}
