//! Planar slicing: cut the mesh at layer planes, stitch the resulting
//! segments into closed polygons, and nest them into contour trees.

use crate::geom::{
    locate_point, ring_self_intersects, signed_area, simplify_ring, Aabb, PointLocation, Vec2,
};
use crate::mesh_io::TriangleMesh;
use crate::profile::MachineProfile;
use std::collections::HashMap;
use thiserror::Error;

/// Endpoint matching tolerance for segment stitching, mm.
pub const STITCH_EPS: f64 = 1e-4;

/// Vertices closer than this to a slicing plane trigger plane perturbation.
const PLANE_CLEARANCE: f64 = 1e-9;
const PLANE_NUDGE: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum SliceError {
    #[error("layer height {value} outside machine range [{min}, {max}] mm")]
    LayerHeightOutOfRange { value: f64, min: f64, max: f64 },
    #[error("self-intersecting contour at layer z={z}")]
    SelfIntersectingContour { z: f64 },
    #[error("bounds are empty")]
    EmptyBounds,
}

/// One closed polygon in a layer, oriented by role.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    /// Ring points; the closing edge is implicit. Outers run CCW, holes CW.
    pub points: Vec<Vec2>,
    pub is_hole: bool,
    /// Index of the tightest enclosing outer, for holes.
    pub parent: Option<usize>,
    pub signed_area: f64,
}

/// All contours of one layer with even-odd nesting resolved.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContourTree {
    pub contours: Vec<Contour>,
}

impl ContourTree {
    pub fn outer_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.contours.len()).filter(|&i| !self.contours[i].is_hole)
    }

    pub fn holes_of(&self, outer: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.contours.len())
            .filter(move |&i| self.contours[i].is_hole && self.contours[i].parent == Some(outer))
    }

    /// Net solid area of the layer (outers minus holes).
    pub fn net_area(&self) -> f64 {
        self.contours.iter().map(|c| c.signed_area).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub z: f64,
    pub tree: ContourTree,
    /// Chains that failed to close within [`STITCH_EPS`].
    pub open_contours: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub layer_height: f64,
}

/// Mid-layer plane positions: `z_min + (k + 0.5) * layer_height`.
pub fn compute_layer_planes(
    bounds: &Aabb,
    layer_height: f64,
    machine: &MachineProfile,
) -> Result<Vec<f64>, SliceError> {
    if layer_height < machine.min_layer || layer_height > machine.max_layer {
        return Err(SliceError::LayerHeightOutOfRange {
            value: layer_height,
            min: machine.min_layer,
            max: machine.max_layer,
        });
    }
    if bounds.is_empty() {
        return Err(SliceError::EmptyBounds);
    }
    let height = bounds.max.z - bounds.min.z;
    let count = ((height / layer_height) - 1e-9).ceil().max(1.0) as usize;
    Ok((0..count)
        .map(|k| bounds.min.z + (k as f64 + 0.5) * layer_height)
        .collect())
}

/// Intersect every triangle with the plane at height `z`.
///
/// If any vertex lies within 1e-9 mm of the plane, the plane is nudged up
/// by 1e-7 mm until clear, so no triangle is ever coplanar with the cut.
pub fn slice_mesh_at(mesh: &TriangleMesh, z: f64) -> Vec<(Vec2, Vec2)> {
    let mut z = z;
    loop {
        let clear = mesh
            .vertices
            .iter()
            .all(|v| (v.z - z).abs() > PLANE_CLEARANCE);
        if clear {
            break;
        }
        z += PLANE_NUDGE;
    }
    let mut segments = Vec::new();
    for tri in &mesh.triangles {
        let pts = [
            mesh.vertices[tri[0] as usize],
            mesh.vertices[tri[1] as usize],
            mesh.vertices[tri[2] as usize],
        ];
        let side = [pts[0].z > z, pts[1].z > z, pts[2].z > z];
        if side[0] == side[1] && side[1] == side[2] {
            continue;
        }
        let mut crossings = Vec::with_capacity(2);
        for k in 0..3 {
            let (a, b) = (pts[k], pts[(k + 1) % 3]);
            if (a.z > z) != (b.z > z) {
                let t = (z - a.z) / (b.z - a.z);
                crossings.push(Vec2::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t));
            }
        }
        if crossings.len() == 2 {
            segments.push((crossings[0], crossings[1]));
        }
    }
    segments
}

/// Chain segments end-to-end into closed polygons.
///
/// Returns the closed loops plus the number of chains that could not close
/// within `eps` (open contours are dropped, not returned).
pub fn stitch_segments(segments: &[(Vec2, Vec2)], eps: f64) -> (Vec<Vec<Vec2>>, usize) {
    let key = |p: Vec2| ((p.x / eps).round() as i64, (p.y / eps).round() as i64);
    // Cell -> segment endpoints living there: (segment index, endpoint index).
    let mut cells: HashMap<(i64, i64), Vec<(usize, u8)>> = HashMap::new();
    for (i, seg) in segments.iter().enumerate() {
        cells.entry(key(seg.0)).or_default().push((i, 0));
        cells.entry(key(seg.1)).or_default().push((i, 1));
    }
    let endpoint = |i: usize, e: u8| if e == 0 { segments[i].0 } else { segments[i].1 };
    let mut used = vec![false; segments.len()];
    let mut loops = Vec::new();
    let mut open = 0usize;

    // Nearest unused endpoint within eps of `p`, searching adjacent cells.
    let find_next = |p: Vec2, used: &[bool]| -> Option<(usize, u8)> {
        let (kx, ky) = key(p);
        let mut best: Option<(f64, usize, u8)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = cells.get(&(kx + dx, ky + dy)) {
                    for &(i, e) in list {
                        if used[i] {
                            continue;
                        }
                        let d = p.distance(endpoint(i, e));
                        if d <= eps && best.is_none_or(|(bd, _, _)| d < bd) {
                            best = Some((d, i, e));
                        }
                    }
                }
            }
        }
        best.map(|(_, i, e)| (i, e))
    };

    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let origin = segments[start].0;
        let mut chain = vec![origin];
        let mut head = segments[start].1;
        let closed = loop {
            if head.distance(origin) <= eps && chain.len() >= 3 {
                break true;
            }
            chain.push(head);
            match find_next(head, &used) {
                Some((i, e)) => {
                    used[i] = true;
                    head = endpoint(i, 1 - e);
                }
                None => break false,
            }
        };
        if closed {
            let ring = simplify_ring(&chain, 1e-6);
            if ring.len() >= 3 {
                loops.push(ring);
            }
        } else {
            open += 1;
        }
    }
    (loops, open)
}

/// Nest polygons by even-odd containment depth.
///
/// Depth-even rings become outers (reoriented CCW), depth-odd rings become
/// holes (CW) parented to their tightest enclosing outer.
pub fn build_contour_tree(polygons: &[Vec<Vec2>], z: f64) -> Result<ContourTree, SliceError> {
    for ring in polygons {
        if ring_self_intersects(ring) {
            return Err(SliceError::SelfIntersectingContour { z });
        }
    }
    let n = polygons.len();
    // contains[i][j]: ring i strictly contains ring j.
    let contains = |outer: &[Vec2], inner: &[Vec2]| -> bool {
        inner
            .iter()
            .find_map(|&p| match locate_point(p, outer, 1e-9) {
                PointLocation::Inside => Some(true),
                PointLocation::Outside => Some(false),
                PointLocation::OnBoundary => None,
            })
            .unwrap_or(false)
    };
    let mut containers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && contains(&polygons[i], &polygons[j]) {
                containers[j].push(i);
            }
        }
    }
    let mut contours = Vec::with_capacity(n);
    for j in 0..n {
        let depth = containers[j].len();
        let is_hole = depth % 2 == 1;
        let mut points = polygons[j].clone();
        let area = signed_area(&points);
        let want_ccw = !is_hole;
        if (area > 0.0) != want_ccw {
            points.reverse();
        }
        let parent = if is_hole {
            // Tightest enclosing ring at the next-lower depth.
            containers[j]
                .iter()
                .filter(|&&i| containers[i].len() == depth - 1)
                .min_by(|&&a, &&b| {
                    signed_area(&polygons[a])
                        .abs()
                        .total_cmp(&signed_area(&polygons[b]).abs())
                })
                .copied()
        } else {
            None
        };
        contours.push(Contour {
            signed_area: signed_area(&points),
            points,
            is_hole,
            parent,
        });
    }
    Ok(ContourTree { contours })
}

/// Slice every layer plane and build per-layer contour trees.
pub fn slice_all(
    mesh: &TriangleMesh,
    layer_height: f64,
    machine: &MachineProfile,
) -> Result<LayerStack, SliceError> {
    let bounds = crate::mesh_io::mesh_bounds(mesh).map_err(|_| SliceError::EmptyBounds)?;
    let planes = compute_layer_planes(&bounds, layer_height, machine)?;
    let mut layers = Vec::with_capacity(planes.len());
    for z in planes {
        let segments = slice_mesh_at(mesh, z);
        let (polygons, open_contours) = stitch_segments(&segments, STITCH_EPS);
        let tree = build_contour_tree(&polygons, z)?;
        layers.push(Layer {
            z,
            tree,
            open_contours,
        });
    }
    Ok(LayerStack {
        layers,
        layer_height,
    })
}
