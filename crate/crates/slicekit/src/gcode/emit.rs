//! Plan-to-text emission with absolute E and per-layer extruder resets.

use super::{fmt_axis, fmt_word};
use crate::flow::extrusion_feed_per_mm;
use crate::profile::{MachineProfile, PrintProfile};
use crate::toolpath::{MoveKind, ToolpathPlan};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EmitError {
    #[error("plan leaves the build volume at move {move_index}: ({x:.3}, {y:.3}, {z:.3})")]
    PlanOutOfBounds {
        move_index: usize,
        x: f64,
        y: f64,
        z: f64,
    },
}

/// Emit a complete program for the plan.
///
/// Header: bed temp, nozzle set-and-wait, home, extruder zero. Body: one
/// `G92 E0` and a Z lift per layer, then `G0` travels and `G1` extrudes
/// with absolute E. Footer: heaters off, motors off. Output is
/// byte-deterministic for identical inputs.
pub fn emit(
    plan: &ToolpathPlan,
    profile: &PrintProfile,
    machine: &MachineProfile,
) -> Result<String, EmitError> {
    let (bx, by, bz) = machine.build_volume;
    for (i, m) in plan.moves.iter().enumerate() {
        for p in [m.start, m.end] {
            let inside = p.x >= -1e-9
                && p.x <= bx + 1e-9
                && p.y >= -1e-9
                && p.y <= by + 1e-9
                && m.z >= -1e-9
                && m.z <= bz + 1e-9;
            if !inside {
                return Err(EmitError::PlanOutOfBounds {
                    move_index: i,
                    x: p.x,
                    y: p.y,
                    z: m.z,
                });
            }
        }
    }

    let feed_per_mm = extrusion_feed_per_mm(&profile.flow);
    let travel_f = crate::flow::cap_travel_feedrate(profile.travel_speed, machine) * 60.0;
    let mut out = String::new();
    out.push_str("; slicekit\n");
    out.push_str(&format!("M140 S{}\n", fmt_word(profile.bed_temp)));
    out.push_str(&format!("M109 S{}\n", fmt_word(profile.nozzle_temp)));
    out.push_str("G28\n");
    out.push_str(&format!("G92 E{}\n", fmt_axis(0.0)));

    for (layer_idx, layer) in plan.layers.iter().enumerate() {
        out.push_str(&format!("; layer {layer_idx}\n"));
        out.push_str(&format!("G92 E{}\n", fmt_axis(0.0)));
        out.push_str(&format!(
            "G1 Z{} F{}\n",
            fmt_axis(layer.z),
            fmt_word(travel_f)
        ));
        let mut e = 0.0f64;
        for m in &plan.moves[layer.move_range.0..layer.move_range.1] {
            match m.kind {
                MoveKind::Travel => {
                    out.push_str(&format!(
                        "G0 X{} Y{} F{}\n",
                        fmt_axis(m.end.x),
                        fmt_axis(m.end.y),
                        fmt_word(m.feedrate * 60.0)
                    ));
                }
                MoveKind::Extrude => {
                    e += m.length() * feed_per_mm;
                    out.push_str(&format!(
                        "G1 X{} Y{} E{} F{}\n",
                        fmt_axis(m.end.x),
                        fmt_axis(m.end.y),
                        fmt_axis(e),
                        fmt_word(m.feedrate * 60.0)
                    ));
                }
                MoveKind::Retract => {
                    out.push_str(&format!(
                        "G1 E{} F{}\n",
                        fmt_axis(e - profile.retraction_distance),
                        fmt_word(profile.retraction_speed * 60.0)
                    ));
                }
                MoveKind::Unretract => {
                    out.push_str(&format!(
                        "G1 E{} F{}\n",
                        fmt_axis(e),
                        fmt_word(profile.retraction_speed * 60.0)
                    ));
                }
            }
        }
    }

    out.push_str(&format!("M104 S{}\n", fmt_word(0.0)));
    out.push_str(&format!("M140 S{}\n", fmt_word(0.0)));
    out.push_str("M84\n");
    Ok(out)
}
