//! G-code emission, parsing, linting, and kinematic replay.
//!
//! Dialect: `G0`/`G1` motion with absolute XYZ and absolute E, `G28` home,
//! `G92` position reset, `M104`/`M109`/`M140` temperatures, `M84` motors
//! off, and `;` line comments. F is mm/min, S is degrees C.

mod emit;
mod lint;
mod parse;
mod simulate;

pub use emit::{emit, EmitError};
pub use lint::{lint, Diagnostic, RuleId, Severity};
pub use parse::{parse_gcode, ParseError};
pub use simulate::{simulate_state, MachineState, SimError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Opcode {
    G0,
    G1,
    G28,
    G92,
    M104,
    M109,
    M140,
    M84,
    Comment,
    /// Preserved verbatim; parsing warns but does not fail.
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GCodeCommand {
    pub opcode: Opcode,
    /// Axis letter to value, in source order.
    pub args: Vec<(char, f64)>,
    /// 1-based source line.
    pub line: usize,
    pub comment: Option<String>,
}

impl GCodeCommand {
    pub fn arg(&self, letter: char) -> Option<f64> {
        self.args
            .iter()
            .find(|(c, _)| *c == letter)
            .map(|(_, v)| *v)
    }

    pub fn is_motion(&self) -> bool {
        matches!(self.opcode, Opcode::G0 | Opcode::G1)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GCodeProgram {
    pub commands: Vec<GCodeCommand>,
    pub warnings: Vec<String>,
}

/// Fixed-width axis coordinate formatting (X/Y/Z/E).
pub(crate) fn fmt_axis(v: f64) -> String {
    // Normalize negative zero so output is byte-stable.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.7}")
}

/// Fixed-width feedrate/temperature formatting (F/S).
pub(crate) fn fmt_word(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.5}")
}
