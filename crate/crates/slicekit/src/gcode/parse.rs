//! Text-to-program parsing. Unknown opcodes are preserved with a warning.

use super::{GCodeCommand, GCodeProgram, Opcode};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: malformed g-code: {message}")]
    MalformedLine { line: usize, message: String },
}

pub fn parse_gcode(text: &str) -> Result<GCodeProgram, ParseError> {
    let mut program = GCodeProgram::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (code_part, comment) = match raw.split_once(';') {
            Some((code, c)) => (code, Some(c.trim().to_string())),
            None => (raw, None),
        };
        let mut tokens = code_part.split_whitespace();
        let Some(head) = tokens.next() else {
            if comment.is_some() {
                program.commands.push(GCodeCommand {
                    opcode: Opcode::Comment,
                    args: Vec::new(),
                    line,
                    comment,
                });
            }
            continue;
        };
        let opcode = match head {
            "G0" => Opcode::G0,
            "G1" => Opcode::G1,
            "G28" => Opcode::G28,
            "G92" => Opcode::G92,
            "M104" => Opcode::M104,
            "M109" => Opcode::M109,
            "M140" => Opcode::M140,
            "M84" => Opcode::M84,
            other => {
                program
                    .warnings
                    .push(format!("line {line}: unknown opcode `{other}`"));
                Opcode::Unknown(other.to_string())
            }
        };
        let mut args = Vec::new();
        for token in tokens {
            let mut chars = token.chars();
            let letter = chars.next().unwrap().to_ascii_uppercase();
            let value: f64 = chars
                .as_str()
                .parse()
                .map_err(|_| ParseError::MalformedLine {
                    line,
                    message: format!("bad argument `{token}`"),
                })?;
            if !value.is_finite() {
                return Err(ParseError::MalformedLine {
                    line,
                    message: format!("non-finite argument `{token}`"),
                });
            }
            args.push((letter, value));
        }
        if opcode == Opcode::G1 && args.iter().all(|(c, _)| !"XYZEF".contains(*c)) {
            return Err(ParseError::MalformedLine {
                line,
                message: "G1 requires at least one of X/Y/Z/E/F".into(),
            });
        }
        program.commands.push(GCodeCommand {
            opcode,
            args,
            line,
            comment,
        });
    }
    Ok(program)
}
