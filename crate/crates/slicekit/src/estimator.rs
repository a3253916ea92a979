//! Build time, filament usage, and break-even cost estimation.

use crate::flow::{cap_travel_feedrate, print_area};
use crate::gcode::{simulate_state, GCodeProgram, SimError};
use crate::profile::{MachineProfile, PrintProfile};
use crate::toolpath::{MoveKind, ToolpathPlan};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerEstimate {
    pub z: f64,
    pub time_seconds: f64,
    pub volume_mm3: f64,
}

/// Build estimate in Table-style units: minutes, mm, mm^3, grams.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    /// Motion time only, seconds.
    pub motion_seconds: f64,
    /// Fixed heat-up/homing allowance, seconds.
    pub heatup_seconds: f64,
    /// Filament consumed, mm of stock.
    pub filament_length_mm: f64,
    /// Deposited volume, mm^3.
    pub extruded_volume_mm3: f64,
    pub mass_grams: f64,
    pub per_layer: Vec<LayerEstimate>,
}

impl Estimate {
    /// Total build time in minutes, heat-up included.
    pub fn build_time_minutes(&self) -> f64 {
        (self.motion_seconds + self.heatup_seconds) / 60.0
    }
}

/// Estimate directly from a toolpath plan.
///
/// Time integrates every move at its capped feedrate plus the per-layer Z
/// lifts and both directions of each retraction. Volume uses the
/// rectangular bead model times the extrusion multiplier.
pub fn estimate_plan(
    plan: &ToolpathPlan,
    profile: &PrintProfile,
    machine: &MachineProfile,
    density: f64,
) -> Estimate {
    let area = print_area(&profile.flow);
    let multiplier = profile.flow.extrusion_multiplier;
    let travel_speed = cap_travel_feedrate(profile.travel_speed, machine);
    let mut motion = 0.0f64;
    let mut volume = 0.0f64;
    let mut per_layer = Vec::with_capacity(plan.layers.len());
    let mut prev_z = 0.0f64;
    for layer in &plan.layers {
        let mut layer_time = (layer.z - prev_z).max(0.0) / travel_speed;
        prev_z = layer.z;
        let mut layer_volume = 0.0f64;
        for m in &plan.moves[layer.move_range.0..layer.move_range.1] {
            match m.kind {
                MoveKind::Extrude => {
                    let len = m.length();
                    layer_time += len / m.feedrate;
                    layer_volume += len * area * multiplier;
                }
                MoveKind::Travel => layer_time += m.length() / m.feedrate,
                MoveKind::Retract | MoveKind::Unretract => {
                    layer_time += profile.retraction_distance / profile.retraction_speed;
                }
            }
        }
        motion += layer_time;
        volume += layer_volume;
        per_layer.push(LayerEstimate {
            z: layer.z,
            time_seconds: layer_time,
            volume_mm3: layer_volume,
        });
    }
    Estimate {
        motion_seconds: motion,
        heatup_seconds: profile.heatup_seconds,
        filament_length_mm: volume / profile.flow.filament_cross_section(),
        extruded_volume_mm3: volume,
        mass_grams: volume * density,
        per_layer,
    }
}

/// Estimate by replaying a parsed program; the independent oracle path.
pub fn estimate_gcode(
    program: &GCodeProgram,
    profile: &PrintProfile,
    density: f64,
) -> Result<Estimate, SimError> {
    let state = simulate_state(program)?;
    let volume = state.extruded * profile.flow.filament_cross_section();
    Ok(Estimate {
        motion_seconds: state.time,
        heatup_seconds: profile.heatup_seconds,
        filament_length_mm: state.extruded,
        extruded_volume_mm3: volume,
        mass_grams: volume * density,
        per_layer: Vec::new(),
    })
}

/// Flat-rate printing versus setup-plus-unit traditional manufacturing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostModel {
    pub printer_unit_cost: f64,
    pub traditional_setup_cost: f64,
    pub traditional_unit_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakEvenRow {
    pub units: u64,
    pub printing_cost: f64,
    pub traditional_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakEvenTable {
    pub rows: Vec<BreakEvenRow>,
    /// Smallest unit count where traditional is no more expensive, if any.
    pub crossover: Option<u64>,
}

/// Tabulate both cost curves for n = 1..=max_units.
pub fn break_even(model: &CostModel, max_units: u64) -> BreakEvenTable {
    let mut rows = Vec::with_capacity(max_units as usize);
    let mut crossover = None;
    for n in 1..=max_units {
        let printing = n as f64 * model.printer_unit_cost;
        let traditional = model.traditional_setup_cost + n as f64 * model.traditional_unit_cost;
        if crossover.is_none() && traditional <= printing {
            crossover = Some(n);
        }
        rows.push(BreakEvenRow {
            units: n,
            printing_cost: printing,
            traditional_cost: traditional,
        });
    }
    BreakEvenTable { rows, crossover }
}

impl BreakEvenTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("units,printing_cost,traditional_cost\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{:.2},{:.2}\n",
                row.units, row.printing_cost, row.traditional_cost
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::toolpath::{PlanLayer, ToolMove};

    fn plan_with(moves: Vec<ToolMove>, z: f64) -> ToolpathPlan {
        ToolpathPlan {
            layers: vec![PlanLayer {
                z,
                move_range: (0, moves.len()),
            }],
            moves,
            profile: PrintProfile::default(),
            collapsed_layers: 0,
        }
    }

    #[test]
    fn empty_plan_heatup_only() {
        let plan = ToolpathPlan {
            moves: Vec::new(),
            layers: Vec::new(),
            profile: PrintProfile::default(),
            collapsed_layers: 0,
        };
        let e = estimate_plan(
            &plan,
            &PrintProfile::default(),
            &MachineProfile::default(),
            0.00124,
        );
        assert_eq!(e.extruded_volume_mm3, 0.0);
        assert_eq!(e.motion_seconds, 0.0);
        assert!((e.build_time_minutes() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_extrude_motion_time() {
        let profile = PrintProfile::default();
        let m = ToolMove {
            kind: MoveKind::Extrude,
            start: Vec2::new(0.0, 0.0),
            end: Vec2::new(100.0, 0.0),
            z: 0.0,
            feedrate: 50.0,
            width: 0.48,
        };
        let e = estimate_plan(
            &plan_with(vec![m], 0.0),
            &profile,
            &MachineProfile::default(),
            0.00124,
        );
        assert!((e.motion_seconds - 2.0).abs() < 1e-12);
        // Volume = 100 mm * 0.096 mm^2.
        assert!((e.extruded_volume_mm3 - 9.6).abs() < 1e-12);
        assert!((e.mass_grams - 9.6 * 0.00124).abs() < 1e-12);
    }

    #[test]
    fn mass_volume_density_consistency() {
        let profile = PrintProfile::default();
        let m = ToolMove {
            kind: MoveKind::Extrude,
            start: Vec2::new(0.0, 0.0),
            end: Vec2::new(37.5, 0.0),
            z: 0.0,
            feedrate: 100.0,
            width: 0.48,
        };
        let e = estimate_plan(
            &plan_with(vec![m], 0.2),
            &profile,
            &MachineProfile::default(),
            0.00124,
        );
        let rel = (e.mass_grams - e.extruded_volume_mm3 * 0.00124).abs() / e.mass_grams;
        assert!(rel < 1e-9);
        // Filament length conserves volume through the stock cross-section.
        let back = e.filament_length_mm * profile.flow.filament_cross_section();
        assert!((back - e.extruded_volume_mm3).abs() / e.extruded_volume_mm3 < 1e-12);
    }

    #[test]
    fn gcode_two_move_hand_arithmetic() {
        // 60 mm travel at 7200 mm/min = 0.5 s, then 100 mm extruding
        // 4 mm of filament at 6000 mm/min = 1.0 s.
        let text = "M109 S200\nG92 E0\nG0 X60 F7200\nG1 X160 E4 F6000\n";
        let program = crate::gcode::parse_gcode(text).unwrap();
        let profile = PrintProfile::default();
        let e = estimate_gcode(&program, &profile, 0.00124).unwrap();
        assert!((e.motion_seconds - 1.5).abs() < 1e-12);
        assert!((e.filament_length_mm - 4.0).abs() < 1e-12);
        let volume = 4.0 * profile.flow.filament_cross_section();
        assert!((e.extruded_volume_mm3 - volume).abs() < 1e-9);
        assert!((e.mass_grams - volume * 0.00124).abs() < 1e-9);
    }

    #[test]
    fn extra_extrude_strictly_increases_estimate() {
        let profile = PrintProfile::default();
        let machine = MachineProfile::default();
        let base = ToolMove {
            kind: MoveKind::Extrude,
            start: Vec2::new(0.0, 0.0),
            end: Vec2::new(10.0, 0.0),
            z: 0.2,
            feedrate: 100.0,
            width: 0.48,
        };
        let extra = ToolMove {
            end: Vec2::new(10.0, 0.5),
            start: Vec2::new(10.0, 0.0),
            ..base.clone()
        };
        let small = estimate_plan(
            &plan_with(vec![base.clone()], 0.2),
            &profile,
            &machine,
            0.00124,
        );
        let big = estimate_plan(
            &plan_with(vec![base, extra], 0.2),
            &profile,
            &machine,
            0.00124,
        );
        assert!(big.extruded_volume_mm3 > small.extruded_volume_mm3);
        assert!(big.build_time_minutes() > small.build_time_minutes());
    }

    #[test]
    fn gcode_comments_only_is_zero() {
        let program = crate::gcode::parse_gcode("; nothing\n; to do\n").unwrap();
        let e = estimate_gcode(&program, &PrintProfile::default(), 0.00124).unwrap();
        assert_eq!(e.motion_seconds, 0.0);
        assert_eq!(e.extruded_volume_mm3, 0.0);
        assert_eq!(e.mass_grams, 0.0);
    }

    #[test]
    fn break_even_crossover_at_200() {
        let table = break_even(
            &CostModel {
                printer_unit_cost: 10.0,
                traditional_setup_cost: 1000.0,
                traditional_unit_cost: 5.0,
            },
            300,
        );
        assert_eq!(table.crossover, Some(200));
    }

    #[test]
    fn break_even_degenerate_equal_costs() {
        let table = break_even(
            &CostModel {
                printer_unit_cost: 7.0,
                traditional_setup_cost: 0.0,
                traditional_unit_cost: 7.0,
            },
            10,
        );
        assert_eq!(table.crossover, Some(1));
    }

    #[test]
    fn break_even_no_crossover() {
        let table = break_even(
            &CostModel {
                printer_unit_cost: 5.0,
                traditional_setup_cost: 100.0,
                traditional_unit_cost: 9.0,
            },
            1000,
        );
        assert_eq!(table.crossover, None);
    }

    #[test]
    fn printing_cost_per_unit_is_flat() {
        let model = CostModel {
            printer_unit_cost: 12.5,
            traditional_setup_cost: 400.0,
            traditional_unit_cost: 3.0,
        };
        for row in break_even(&model, 50).rows {
            let per_unit = row.printing_cost / row.units as f64;
            assert!((per_unit - 12.5).abs() < 1e-12);
        }
    }
}
