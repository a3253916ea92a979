//! Inward polygon offsetting for perimeter generation.
//!
//! Each edge is shifted to its left by the offset distance and joined with
//! miters clamped at twice the distance. Rings that invert or collapse under
//! the offset are culled by splitting at self-intersections and keeping only
//! loops that preserve the source orientation.

use crate::geom::{signed_area, simplify_ring, Vec2};

/// Loops smaller than this area are discarded after offsetting, mm^2.
const MIN_LOOP_AREA: f64 = 1e-6;

/// Offset a ring so each edge moves to its left by `distance`.
///
/// With the material convention (outers CCW, holes CW) a left offset always
/// insets the solid region. Returns zero or more simple rings with the same
/// orientation as the input; an empty result means the ring vanished.
pub fn inset_ring(ring: &[Vec2], distance: f64) -> Vec<Vec<Vec2>> {
    if ring.len() < 3 {
        return Vec::new();
    }
    let n = ring.len();
    let mut offset_pts = Vec::with_capacity(n);
    for i in 0..n {
        let prev = ring[(i + n - 1) % n];
        let cur = ring[i];
        let next = ring[(i + 1) % n];
        let d_in = (cur - prev).normalized();
        let d_out = (next - cur).normalized();
        let n_in = d_in.left_normal();
        let n_out = d_out.left_normal();
        let bisector = n_in + n_out;
        let blen = bisector.length();
        let shift = if blen < 1e-9 {
            // Edges reverse direction; fall back to the incoming normal.
            n_in * distance
        } else {
            let m = bisector * (1.0 / blen);
            // Miter length d / cos(theta/2), clamped at 2d.
            let cos_half = m.dot(n_in).max(0.0);
            let len = (distance / cos_half.max(1e-9)).min(2.0 * distance);
            m * len
        };
        offset_pts.push(cur + shift);
    }
    // When the offset exceeds the local half-width every edge reverses
    // relative to its source while the ring can stay simple and keep its
    // orientation, so catch the global inversion by edge correspondence.
    let mut forward = 0.0;
    for i in 0..n {
        let orig_dir = (ring[(i + 1) % n] - ring[i]).normalized();
        forward += (offset_pts[(i + 1) % n] - offset_pts[i]).dot(orig_dir);
    }
    if forward <= 0.0 {
        return Vec::new();
    }
    let offset_pts = simplify_ring(&offset_pts, 1e-9);
    if offset_pts.len() < 3 {
        return Vec::new();
    }
    let want_ccw = signed_area(ring) > 0.0;
    untangle(&offset_pts)
        .into_iter()
        .filter(|l| {
            let area = signed_area(l);
            area.abs() >= MIN_LOOP_AREA && (area > 0.0) == want_ccw
        })
        .map(|l| simplify_ring(&l, 1e-9))
        .filter(|l| l.len() >= 3)
        .collect()
}

/// Line intersection with closed-interval parameters on both segments, so
/// an endpoint of one edge landing on the interior of another still counts.
fn edge_intersection(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> Option<(f64, f64, Vec2)> {
    let r = a1 - a0;
    let s = b1 - b0;
    let denom = r.cross(s);
    if denom.abs() < 1e-15 {
        return None;
    }
    let t = (b0 - a0).cross(s) / denom;
    let u = (b0 - a0).cross(r) / denom;
    let eps = 1e-9;
    if (-eps..=1.0 + eps).contains(&t) && (-eps..=1.0 + eps).contains(&u) {
        Some((t, u, a0 + r * t))
    } else {
        None
    }
}

/// Split a possibly self-intersecting ring into simple loops.
fn untangle(ring: &[Vec2]) -> Vec<Vec<Vec2>> {
    let n = ring.len();
    // Insert pairwise edge intersections into each edge's point run. A
    // crossing at an existing vertex is inserted only into the edge whose
    // interior it touches; the vertex itself is already on the path.
    let mut subdivided: Vec<Vec<(f64, Vec2)>> = vec![Vec::new(); n];
    let mut any_split = false;
    let interior = |t: f64| t > 1e-9 && t < 1.0 - 1e-9;
    for i in 0..n {
        let (a0, a1) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            if (i + 1) % n == j || (j + 1) % n == i {
                continue;
            }
            let (b0, b1) = (ring[j], ring[(j + 1) % n]);
            if let Some((ta, tb, p)) = edge_intersection(a0, a1, b0, b1) {
                if !interior(ta) && !interior(tb) {
                    continue;
                }
                any_split = true;
                if interior(ta) {
                    subdivided[i].push((ta, p));
                }
                if interior(tb) {
                    subdivided[j].push((tb, p));
                }
            }
        }
    }
    if !any_split {
        return vec![ring.to_vec()];
    }
    let mut path: Vec<Vec2> = Vec::with_capacity(n * 2);
    for i in 0..n {
        path.push(ring[i]);
        subdivided[i].sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, p) in &subdivided[i] {
            path.push(p);
        }
    }
    // Walk the closed path; whenever a point repeats, pop the enclosed loop.
    let quant = |p: Vec2| ((p.x * 1e9).round() as i64, (p.y * 1e9).round() as i64);
    let mut stack: Vec<Vec2> = Vec::new();
    let mut keys: Vec<(i64, i64)> = Vec::new();
    let mut loops = Vec::new();
    for &p in &path {
        let k = quant(p);
        if let Some(pos) = keys.iter().position(|&q| q == k) {
            let loop_pts: Vec<Vec2> = stack[pos..].to_vec();
            if loop_pts.len() >= 3 {
                loops.push(loop_pts);
            }
            stack.truncate(pos + 1);
            keys.truncate(pos + 1);
        } else {
            stack.push(p);
            keys.push(k);
        }
    }
    if stack.len() >= 3 {
        loops.push(stack);
    }
    loops
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(side: f64) -> Vec<Vec2> {
        vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(side, 0.0),
            Vec2::new(side, side),
            Vec2::new(0.0, side),
        ]
    }

    #[test]
    fn square_inset_centerline() {
        let loops = inset_ring(&square(10.0), 0.2);
        assert_eq!(loops.len(), 1);
        let area = signed_area(&loops[0]);
        assert!((area - 9.6 * 9.6).abs() < 1e-9, "area {area}");
    }

    #[test]
    fn hole_grows_under_left_offset() {
        let mut hole = square(4.0);
        hole.reverse(); // CW
        let loops = inset_ring(&hole, 0.2);
        assert_eq!(loops.len(), 1);
        // Hole offset toward material: ring expands, area stays negative.
        let area = signed_area(&loops[0]);
        assert!((area + 4.4 * 4.4).abs() < 1e-9, "area {area}");
    }

    #[test]
    fn over_inset_vanishes() {
        // 1x1 square inset by 0.6 inverts and must be culled.
        assert!(inset_ring(&square(1.0), 0.6).is_empty());
    }

    #[test]
    fn inset_preserves_orientation() {
        let loops = inset_ring(&square(10.0), 1.0);
        for l in &loops {
            assert!(signed_area(l) > 0.0);
        }
    }

    #[test]
    fn concave_pinch_splits_into_two_loops() {
        // Dumbbell: two 4x4 lobes joined by a 0.4-wide neck. Inset by 0.5
        // pinches the neck off, leaving two separate loops.
        let ring = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(4.0, 1.8),
            Vec2::new(6.0, 1.8),
            Vec2::new(6.0, 0.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(10.0, 4.0),
            Vec2::new(6.0, 4.0),
            Vec2::new(6.0, 2.2),
            Vec2::new(4.0, 2.2),
            Vec2::new(4.0, 4.0),
            Vec2::new(0.0, 4.0),
        ];
        assert!(signed_area(&ring) > 0.0);
        let loops = inset_ring(&ring, 0.5);
        assert_eq!(loops.len(), 2, "loops: {loops:?}");
        for l in &loops {
            assert!(signed_area(l) > 0.0);
        }
    }
}
