//! Toolpath planning: perimeter loops, rectilinear infill, and move
//! ordering with retraction-wrapped travels.

use crate::flow::{cap_feedrate, cap_travel_feedrate, FlowError};
use crate::geom::Vec2;
use crate::offset::inset_ring;
use crate::profile::{MachineProfile, OutlineDirection, PrintProfile};
use crate::slicer::{ContourTree, LayerStack};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Extrude,
    Travel,
    Retract,
    Unretract,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolMove {
    pub kind: MoveKind,
    pub start: Vec2,
    pub end: Vec2,
    pub z: f64,
    /// mm/s; already capped to machine and melt limits.
    pub feedrate: f64,
    /// Bead width for extrude moves, 0 otherwise.
    pub width: f64,
}

impl ToolMove {
    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanLayer {
    pub z: f64,
    /// Half-open index range into [`ToolpathPlan::moves`].
    pub move_range: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolpathPlan {
    pub moves: Vec<ToolMove>,
    pub layers: Vec<PlanLayer>,
    /// Profile the plan was generated with.
    pub profile: PrintProfile,
    /// Layers whose contours vanished entirely under perimeter offsetting.
    pub collapsed_layers: usize,
}

impl ToolpathPlan {
    pub fn total_extrude_length(&self) -> f64 {
        self.moves
            .iter()
            .filter(|m| m.kind == MoveKind::Extrude)
            .map(|m| m.length())
            .sum()
    }
}

/// One offset loop of a perimeter set.
#[derive(Debug, Clone, PartialEq)]
pub struct PerimeterLoop {
    pub points: Vec<Vec2>,
    pub is_hole: bool,
    /// 0 is the outermost perimeter.
    pub depth: usize,
}

/// An outer contour with its perimeters and remaining infill region.
#[derive(Debug, Clone, PartialEq)]
pub struct Island {
    pub loops: Vec<PerimeterLoop>,
    /// Rings bounding the area left for infill (outers CCW, holes CW).
    pub infill_region: Vec<Vec<Vec2>>,
}

/// Build perimeter loops for every island of a layer.
///
/// Loop `i` follows the contour inset by `(i + 0.5) * width`; loops that
/// vanish under the offset are omitted. The infill region is the area
/// inside the innermost perimeter bead, i.e. the contour inset by
/// `perimeter_count * width`.
pub fn generate_perimeters(
    tree: &ContourTree,
    perimeter_count: usize,
    extrusion_width: f64,
) -> Vec<Island> {
    let mut islands = Vec::new();
    for outer in tree.outer_indices() {
        let mut rings: Vec<(&Vec<Vec2>, bool)> = vec![(&tree.contours[outer].points, false)];
        for h in tree.holes_of(outer) {
            rings.push((&tree.contours[h].points, true));
        }
        let mut loops = Vec::new();
        for depth in 0..perimeter_count {
            let inset = (depth as f64 + 0.5) * extrusion_width;
            for &(ring, is_hole) in &rings {
                for pts in inset_ring(ring, inset) {
                    loops.push(PerimeterLoop {
                        points: pts,
                        is_hole,
                        depth,
                    });
                }
            }
        }
        let mut infill_region = Vec::new();
        for &(ring, _) in &rings {
            infill_region.extend(inset_ring(ring, perimeter_count as f64 * extrusion_width));
        }
        islands.push(Island {
            loops,
            infill_region,
        });
    }
    islands
}

/// Rectilinear infill lines clipped to a region bounded by oriented rings.
///
/// Spacing is `width / (percent / 100)`; 0% yields nothing and 100% a
/// solid raster at the bead width. Lines run at `angle_deg` from the x-axis
/// and are returned in zigzag order.
pub fn generate_infill(
    region: &[Vec<Vec2>],
    infill_percent: f64,
    extrusion_width: f64,
    angle_deg: f64,
) -> Vec<(Vec2, Vec2)> {
    if infill_percent <= 0.0 || region.is_empty() {
        return Vec::new();
    }
    let density = (infill_percent / 100.0).min(1.0);
    let spacing = extrusion_width / density;
    let theta = angle_deg.to_radians();
    let (sin, cos) = theta.sin_cos();
    let to_local = |p: Vec2| Vec2::new(cos * p.x + sin * p.y, -sin * p.x + cos * p.y);
    let to_world = |p: Vec2| Vec2::new(cos * p.x - sin * p.y, sin * p.x + cos * p.y);
    let local: Vec<Vec<Vec2>> = region
        .iter()
        .map(|ring| ring.iter().map(|&p| to_local(p)).collect())
        .collect();
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for ring in &local {
        for p in ring {
            y_min = y_min.min(p.y);
            y_max = y_max.max(p.y);
        }
    }
    if y_min > y_max {
        return Vec::new();
    }
    let mut segments = Vec::new();
    let mut k = 0usize;
    loop {
        let mut y = y_min + (k as f64 + 0.5) * spacing;
        if y >= y_max {
            break;
        }
        // Keep scanlines clear of ring vertices for a clean crossing parity.
        while local
            .iter()
            .any(|ring| ring.iter().any(|p| (p.y - y).abs() < 1e-9))
        {
            y += 1e-7;
        }
        let mut xs: Vec<f64> = Vec::new();
        for ring in &local {
            let n = ring.len();
            for i in 0..n {
                let (a, b) = (ring[i], ring[(i + 1) % n]);
                if (a.y > y) != (b.y > y) {
                    xs.push(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
                }
            }
        }
        xs.sort_by(|a, b| a.total_cmp(b));
        let mut spans: Vec<(f64, f64)> = xs.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        if k % 2 == 1 {
            // Alternate direction for a zigzag traversal.
            spans.reverse();
            for s in &mut spans {
                *s = (s.1, s.0);
            }
        }
        for (x0, x1) in spans {
            if (x1 - x0).abs() > 1e-9 {
                segments.push((to_world(Vec2::new(x0, y)), to_world(Vec2::new(x1, y))));
            }
        }
        k += 1;
    }
    segments
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerClass {
    Solid,
    Sparse,
}

/// Bottom layers and top layers print solid; the union may cover everything.
pub fn assign_solid_layers(
    layer_index: usize,
    total_layers: usize,
    top_count: usize,
    bottom_count: usize,
) -> LayerClass {
    if layer_index < bottom_count || layer_index + top_count >= total_layers {
        LayerClass::Solid
    } else {
        LayerClass::Sparse
    }
}

/// Order one layer's islands and link them with travels.
///
/// Islands are visited greedily nearest-first from `start`; within an
/// island perimeters run outermost to innermost, then infill. Travels
/// longer than the retraction threshold are wrapped in a retract pair.
/// Returns the layer's moves and the final head position.
pub fn order_and_link(
    islands: &[Island],
    infill_per_island: &[Vec<(Vec2, Vec2)>],
    z: f64,
    profile: &PrintProfile,
    machine: &MachineProfile,
    start: Vec2,
) -> Result<(Vec<ToolMove>, Vec2), PlanError> {
    let extrude_speed = cap_feedrate(profile.print_speed, &profile.flow, machine)?;
    let travel_speed = cap_travel_feedrate(profile.travel_speed, machine);
    let width = profile.flow.extrusion_width;
    let mut moves = Vec::new();
    let mut pos = start;

    let travel_to = |moves: &mut Vec<ToolMove>, pos: &mut Vec2, target: Vec2| {
        let dist = pos.distance(target);
        if dist <= 1e-12 {
            return;
        }
        let retract = dist > profile.retraction_threshold && profile.retraction_distance > 0.0;
        if retract {
            moves.push(ToolMove {
                kind: MoveKind::Retract,
                start: *pos,
                end: *pos,
                z,
                feedrate: profile.retraction_speed,
                width: 0.0,
            });
        }
        moves.push(ToolMove {
            kind: MoveKind::Travel,
            start: *pos,
            end: target,
            z,
            feedrate: travel_speed,
            width: 0.0,
        });
        if retract {
            moves.push(ToolMove {
                kind: MoveKind::Unretract,
                start: target,
                end: target,
                z,
                feedrate: profile.retraction_speed,
                width: 0.0,
            });
        }
        *pos = target;
    };

    let anchor = |island: &Island| -> Option<Vec2> {
        island
            .loops
            .first()
            .and_then(|l| l.points.first().copied())
            .or_else(|| {
                island
                    .infill_region
                    .first()
                    .and_then(|r| r.first().copied())
            })
    };

    let mut remaining: Vec<usize> = (0..islands.len()).collect();
    while !remaining.is_empty() {
        // Nearest island anchor; ties resolve to the lowest index.
        let (pick, _) = remaining
            .iter()
            .enumerate()
            .filter_map(|(slot, &i)| anchor(&islands[i]).map(|a| (slot, pos.distance(a))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, 0.0));
        let island_idx = remaining.remove(pick);
        let island = &islands[island_idx];

        for lp in &island.loops {
            if lp.points.len() < 3 {
                continue;
            }
            let mut ring = lp.points.clone();
            // Outline direction: outers follow the setting, holes run opposite.
            let flip = profile.outline_direction == OutlineDirection::Cw;
            if flip {
                ring.reverse();
            }
            travel_to(&mut moves, &mut pos, ring[0]);
            for i in 0..ring.len() {
                let next = ring[(i + 1) % ring.len()];
                moves.push(ToolMove {
                    kind: MoveKind::Extrude,
                    start: pos,
                    end: next,
                    z,
                    feedrate: extrude_speed,
                    width,
                });
                pos = next;
            }
        }

        for &(a, b) in &infill_per_island[island_idx] {
            // Enter each segment from its nearer end.
            let (entry, exit) = if pos.distance(a) <= pos.distance(b) {
                (a, b)
            } else {
                (b, a)
            };
            travel_to(&mut moves, &mut pos, entry);
            moves.push(ToolMove {
                kind: MoveKind::Extrude,
                start: entry,
                end: exit,
                z,
                feedrate: extrude_speed,
                width,
            });
            pos = exit;
        }
    }
    Ok((moves, pos))
}

/// Plan every layer of a stack.
pub fn plan_all(
    stack: &LayerStack,
    profile: &PrintProfile,
    machine: &MachineProfile,
) -> Result<ToolpathPlan, PlanError> {
    let total = stack.layers.len();
    let mut moves = Vec::new();
    let mut layers = Vec::with_capacity(total);
    let mut collapsed = 0usize;
    let mut pos = Vec2::new(0.0, 0.0); // bed origin seeds the first tour
    for (k, layer) in stack.layers.iter().enumerate() {
        let islands = generate_perimeters(
            &layer.tree,
            profile.perimeter_count,
            profile.flow.extrusion_width,
        );
        if !layer.tree.contours.is_empty() && islands.iter().all(|i| i.loops.is_empty()) {
            collapsed += 1;
        }
        let class = assign_solid_layers(k, total, profile.top_layers, profile.bottom_layers);
        let density = match class {
            LayerClass::Solid => 100.0,
            LayerClass::Sparse => profile.infill_percent,
        };
        // Alternate +45/-45 degrees between layers.
        let angle = if k % 2 == 0 { 45.0 } else { -45.0 };
        let infill: Vec<Vec<(Vec2, Vec2)>> = islands
            .iter()
            .map(|island| {
                generate_infill(
                    &island.infill_region,
                    density,
                    profile.flow.extrusion_width,
                    angle,
                )
            })
            .collect();
        let begin = moves.len();
        let (layer_moves, end_pos) =
            order_and_link(&islands, &infill, layer.z, profile, machine, pos)?;
        moves.extend(layer_moves);
        pos = end_pos;
        layers.push(PlanLayer {
            z: layer.z,
            move_range: (begin, moves.len()),
        });
    }
    Ok(ToolpathPlan {
        moves,
        layers,
        profile: profile.clone(),
        collapsed_layers: collapsed,
    })
}
