//! Kinematic replay at commanded feedrates (constant speed, no
//! acceleration). Used as the independent estimate oracle.

use super::{GCodeProgram, Opcode};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("line {line}: motion with missing or non-positive feedrate")]
    NegativeFeedrate { line: usize },
}

/// Final state after replaying a program.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MachineState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Net filament advanced through the extruder, mm; retract/unretract
    /// pairs cancel and G92 resets do not contribute.
    pub extruded: f64,
    /// Total motion time, seconds.
    pub time: f64,
}

pub fn simulate_state(program: &GCodeProgram) -> Result<MachineState, SimError> {
    let mut st = MachineState::default();
    let mut e = 0.0f64;
    let mut feed: Option<f64> = None;
    for cmd in &program.commands {
        match &cmd.opcode {
            Opcode::G28 => {
                st.x = 0.0;
                st.y = 0.0;
                st.z = 0.0;
            }
            Opcode::G92 => {
                if let Some(v) = cmd.arg('E') {
                    e = v;
                }
                if let Some(v) = cmd.arg('X') {
                    st.x = v;
                }
                if let Some(v) = cmd.arg('Y') {
                    st.y = v;
                }
                if let Some(v) = cmd.arg('Z') {
                    st.z = v;
                }
            }
            Opcode::G0 | Opcode::G1 => {
                if let Some(v) = cmd.arg('F') {
                    if v < 0.0 {
                        return Err(SimError::NegativeFeedrate { line: cmd.line });
                    }
                    feed = Some(v);
                }
                let (tx, ty, tz) = (
                    cmd.arg('X').unwrap_or(st.x),
                    cmd.arg('Y').unwrap_or(st.y),
                    cmd.arg('Z').unwrap_or(st.z),
                );
                let dist = ((tx - st.x).powi(2) + (ty - st.y).powi(2) + (tz - st.z).powi(2)).sqrt();
                let delta_e = cmd.arg('E').map_or(0.0, |v| v - e);
                // E-only moves take time proportional to filament travel.
                let travel = if dist > 0.0 { dist } else { delta_e.abs() };
                if travel > 0.0 {
                    let f = feed
                        .filter(|&f| f > 0.0)
                        .ok_or(SimError::NegativeFeedrate { line: cmd.line })?;
                    st.time += travel / (f / 60.0);
                }
                st.x = tx;
                st.y = ty;
                st.z = tz;
                e += delta_e;
                st.extruded += delta_e;
            }
            _ => {}
        }
    }
    Ok(st)
}
