//! Rule-based program linting against machine and profile limits.
//!
//! Rule registry:
//! - R1 move target outside the build volume (error)
//! - R2 nozzle temperature set outside the material window (error)
//! - R3 extrusion before the nozzle reached temperature (error)
//! - R4 feedrate above the machine maximum or melt cap (error)
//! - R5 extrude feedrate below the machine minimum (warning)
//! - R6 long travel without retraction (warning)
//! - R7 Z decreases mid-print (error)
//! - R8 extruder position jumps backward outside retract context (error)

use super::{GCodeProgram, Opcode};
use crate::flow::max_print_speed;
use crate::profile::ProfileFile;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
}

impl RuleId {
    pub fn as_str(&self) -> &'static str {
        match self {
            RuleId::R1 => "R1",
            RuleId::R2 => "R2",
            RuleId::R3 => "R3",
            RuleId::R4 => "R4",
            RuleId::R5 => "R5",
            RuleId::R6 => "R6",
            RuleId::R7 => "R7",
            RuleId::R8 => "R8",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub rule_id: RuleId,
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{sev} {} line {}: {}",
            self.rule_id.as_str(),
            self.line,
            self.message
        )
    }
}

/// Evaluate the whole rule registry over a parsed program.
pub fn lint(program: &GCodeProgram, profile: &ProfileFile) -> Vec<Diagnostic> {
    let machine = &profile.machine;
    let process = &profile.process;
    let material = &profile.material;
    let (bx, by, bz) = machine.build_volume;
    let melt_cap_f = machine.max_speed.min(max_print_speed(&process.flow)) * 60.0;
    let min_f = machine.min_speed * 60.0;
    let max_f = machine.max_speed * 60.0;
    let eps = 1e-6;
    // Feedrate words are rounded when written, so allow a hair above the cap.
    let feed_eps = 1e-3;

    let mut diags = Vec::new();
    let mut pos = (0.0f64, 0.0f64, 0.0f64);
    let mut e = 0.0f64;
    let mut f: Option<f64> = None;
    let mut nozzle_ready = false;
    let mut retracted = false;
    let mut printing_started = false;

    for cmd in &program.commands {
        match &cmd.opcode {
            Opcode::M104 | Opcode::M109 => {
                if let Some(s) = cmd.arg('S') {
                    if s != 0.0 && (s < material.temp_range.0 || s > material.temp_range.1) {
                        diags.push(Diagnostic {
                            severity: Severity::Error,
                            rule_id: RuleId::R2,
                            line: cmd.line,
                            message: format!(
                                "nozzle temperature {s} outside {} window [{}, {}]",
                                material.name, material.temp_range.0, material.temp_range.1
                            ),
                        });
                    }
                    if cmd.opcode == Opcode::M109 && s > 0.0 {
                        nozzle_ready = true;
                    }
                }
            }
            Opcode::G28 => pos = (0.0, 0.0, 0.0),
            Opcode::G92 => {
                if let Some(v) = cmd.arg('E') {
                    e = v;
                }
                if let Some(v) = cmd.arg('X') {
                    pos.0 = v;
                }
                if let Some(v) = cmd.arg('Y') {
                    pos.1 = v;
                }
                if let Some(v) = cmd.arg('Z') {
                    pos.2 = v;
                }
            }
            Opcode::G0 | Opcode::G1 => {
                let target = (
                    cmd.arg('X').unwrap_or(pos.0),
                    cmd.arg('Y').unwrap_or(pos.1),
                    cmd.arg('Z').unwrap_or(pos.2),
                );
                if let Some(v) = cmd.arg('F') {
                    f = Some(v);
                }
                let out = target.0 < -eps
                    || target.0 > bx + eps
                    || target.1 < -eps
                    || target.1 > by + eps
                    || target.2 < -eps
                    || target.2 > bz + eps;
                if out {
                    diags.push(Diagnostic {
                        severity: Severity::Error,
                        rule_id: RuleId::R1,
                        line: cmd.line,
                        message: format!(
                            "target ({:.3}, {:.3}, {:.3}) outside build volume {}x{}x{}",
                            target.0, target.1, target.2, bx, by, bz
                        ),
                    });
                }
                let xy_dist = ((target.0 - pos.0).powi(2) + (target.1 - pos.1).powi(2)).sqrt();
                let dz = target.2 - pos.2;
                let delta_e = cmd.arg('E').map(|v| v - e);
                let feed = f.unwrap_or(0.0);

                if let Some(de) = delta_e {
                    if de > eps {
                        retracted = false;
                        if !nozzle_ready {
                            diags.push(Diagnostic {
                                severity: Severity::Error,
                                rule_id: RuleId::R3,
                                line: cmd.line,
                                message: "extrusion before M109 temperature wait".into(),
                            });
                        }
                        printing_started = true;
                        if xy_dist > eps {
                            if feed > melt_cap_f + feed_eps {
                                diags.push(Diagnostic {
                                    severity: Severity::Error,
                                    rule_id: RuleId::R4,
                                    line: cmd.line,
                                    message: format!(
                                        "extrude feedrate {feed} above cap {melt_cap_f:.3} mm/min"
                                    ),
                                });
                            }
                            if feed < min_f - feed_eps {
                                diags.push(Diagnostic {
                                    severity: Severity::Warning,
                                    rule_id: RuleId::R5,
                                    line: cmd.line,
                                    message: format!(
                                        "extrude feedrate {feed} below machine minimum {min_f} mm/min"
                                    ),
                                });
                            }
                        }
                    } else if de < -eps {
                        if xy_dist > eps {
                            diags.push(Diagnostic {
                                severity: Severity::Error,
                                rule_id: RuleId::R8,
                                line: cmd.line,
                                message: "extruder reverses during a positioning move".into(),
                            });
                        } else if -de > process.retraction_distance + 0.01 {
                            diags.push(Diagnostic {
                                severity: Severity::Error,
                                rule_id: RuleId::R8,
                                line: cmd.line,
                                message: format!(
                                    "extruder jumps backward by {:.3} mm, beyond the {} mm retraction",
                                    -de, process.retraction_distance
                                ),
                            });
                        } else {
                            retracted = true;
                        }
                    }
                }

                let is_travel = delta_e.is_none_or(|de| de.abs() <= eps);
                if is_travel && xy_dist > eps {
                    if feed > max_f + feed_eps {
                        diags.push(Diagnostic {
                            severity: Severity::Error,
                            rule_id: RuleId::R4,
                            line: cmd.line,
                            message: format!(
                                "travel feedrate {feed} above machine maximum {max_f} mm/min"
                            ),
                        });
                    }
                    if xy_dist > process.retraction_threshold + eps
                        && !retracted
                        && printing_started
                    {
                        diags.push(Diagnostic {
                            severity: Severity::Warning,
                            rule_id: RuleId::R6,
                            line: cmd.line,
                            message: format!(
                                "{xy_dist:.3} mm travel without retraction (threshold {} mm)",
                                process.retraction_threshold
                            ),
                        });
                    }
                }

                if dz < -eps && printing_started {
                    diags.push(Diagnostic {
                        severity: Severity::Error,
                        rule_id: RuleId::R7,
                        line: cmd.line,
                        message: format!("Z decreases by {:.4} mm mid-print", -dz),
                    });
                }

                pos = target;
                if let Some(v) = cmd.arg('E') {
                    e = v;
                }
            }
            _ => {}
        }
    }
    diags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcode::parse_gcode;

    fn run(text: &str) -> Vec<Diagnostic> {
        lint(&parse_gcode(text).unwrap(), &ProfileFile::default())
    }

    fn rules(diags: &[Diagnostic]) -> Vec<RuleId> {
        diags.iter().map(|d| d.rule_id).collect()
    }

    #[test]
    fn r2_overtemperature() {
        let diags = run("M104 S230\n");
        assert_eq!(rules(&diags), vec![RuleId::R2]);
        assert_eq!(diags[0].severity, Severity::Error);
    }

    #[test]
    fn temperature_off_is_fine() {
        assert!(run("M104 S0\n").is_empty());
    }

    #[test]
    fn r1_out_of_bed() {
        let diags = run("M109 S200\nG1 X200 Y10 E1 F6000\n");
        assert!(rules(&diags).contains(&RuleId::R1));
    }

    #[test]
    fn r3_cold_extrusion() {
        let diags = run("G1 X10 E1 F6000\n");
        assert!(rules(&diags).contains(&RuleId::R3));
    }

    #[test]
    fn r4_overspeed_extrude() {
        // Melt cap for defaults is 10/0.096 = 104.17 mm/s = 6250 mm/min.
        let diags = run("M109 S200\nG1 X10 E1 F7000\n");
        assert!(rules(&diags).contains(&RuleId::R4));
    }

    #[test]
    fn r5_underspeed_extrude() {
        let diags = run("M109 S200\nG1 X10 E1 F3000\n");
        assert_eq!(rules(&diags), vec![RuleId::R5]);
        assert_eq!(diags[0].severity, Severity::Warning);
    }

    #[test]
    fn r6_long_travel_without_retract() {
        let diags = run("M109 S200\nG1 X10 E1 F6000\nG0 X100 F7200\n");
        assert!(rules(&diags).contains(&RuleId::R6));
    }

    #[test]
    fn retracted_travel_is_clean() {
        let text =
            "M109 S200\nG92 E0\nG1 X10 E1 F6000\nG1 E-0.5 F2400\nG0 X100 F7200\nG1 E-0.0 F2400\n";
        let diags = run(text);
        assert!(!rules(&diags).contains(&RuleId::R6), "{diags:?}");
    }

    #[test]
    fn r7_z_drop_mid_print() {
        let diags = run("M109 S200\nG1 Z0.5 F7200\nG1 X10 E1 F6000\nG1 Z0.3 F7200\n");
        assert!(rules(&diags).contains(&RuleId::R7));
    }

    #[test]
    fn r8_backward_e_jump() {
        let diags = run("M109 S200\nG92 E0\nG1 X10 E5 F6000\nG1 E-4 F2400\n");
        assert!(rules(&diags).contains(&RuleId::R8));
    }

    #[test]
    fn empty_program_clean() {
        assert!(run("").is_empty());
    }
}
