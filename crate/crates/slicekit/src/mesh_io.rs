//! STL parsing, validation, and placement normalization.
//!
//! Binary STL layout: 80-byte header (ignored), little-endian u32 triangle
//! count, then 50-byte records of 12 LE f32 values plus a 2-byte attribute.
//! ASCII STL follows the `solid` / `facet normal` / `outer loop` grammar.
//! Facet normals from the file are discarded; geometry comes from vertex
//! winding only.

use crate::geom::{Aabb, Vec3};
use crate::profile::MachineProfile;
use std::collections::HashMap;
use thiserror::Error;

/// Vertices closer than this are merged into one index during welding.
pub const WELD_TOLERANCE: f64 = 1e-6;

/// Triangles with area below this are dropped during cleaning.
pub const DEGENERATE_AREA: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("empty input")]
    EmptyInput,
    #[error("truncated binary STL: expected {expected} bytes for {count} triangles, got {actual}")]
    TruncatedFile {
        expected: usize,
        actual: usize,
        count: u32,
    },
    #[error("malformed ASCII STL at line {line}: {message}")]
    MalformedAscii { line: usize, message: String },
    #[error("non-finite coordinate in triangle {triangle}")]
    NonFiniteCoordinate { triangle: usize },
    #[error("mesh has no triangles")]
    EmptyMesh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StlFormat {
    Binary,
    Ascii,
}

/// Indexed triangle mesh in millimeters with welded vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    /// Degenerate triangles dropped while cleaning the input.
    pub degenerate_dropped: usize,
}

impl TriangleMesh {
    pub fn triangle_points(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        (b - a).cross(c - a).length() * 0.5
    }

    pub fn triangle_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangle_points(t);
        (b - a).cross(c - a).normalized()
    }
}

/// Validation summary over the welded mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshReport {
    pub triangle_count: usize,
    pub is_watertight: bool,
    pub non_manifold_edge_count: usize,
    pub boundary_edge_count: usize,
    pub degenerate_triangle_count: usize,
    pub bounds: Aabb,
}

/// Decide whether a byte buffer is binary or ASCII STL.
///
/// A leading `solid` token is not trusted on its own: the body must also
/// parse as ASCII, otherwise the file is treated as binary.
pub fn detect_format(bytes: &[u8]) -> Result<StlFormat, MeshError> {
    if bytes.is_empty() {
        return Err(MeshError::EmptyInput);
    }
    if starts_solid(bytes) {
        if let Ok(text) = std::str::from_utf8(bytes) {
            if parse_ascii(text).is_ok() {
                return Ok(StlFormat::Ascii);
            }
        }
    }
    Ok(StlFormat::Binary)
}

fn starts_solid(bytes: &[u8]) -> bool {
    let head = &bytes[..bytes.len().min(6)];
    head.strip_prefix(b"solid")
        .is_some_and(|rest| rest.first().is_none_or(|b| b.is_ascii_whitespace()))
}

/// Parse binary or ASCII STL into a welded, cleaned mesh.
///
/// Files that begin with `solid` and decode as UTF-8 are parsed as ASCII; a
/// binary file whose header happens to start with `solid` still parses, but
/// when neither grammar fits the ASCII error is the one reported.
pub fn parse_stl(bytes: &[u8]) -> Result<TriangleMesh, MeshError> {
    if bytes.is_empty() {
        return Err(MeshError::EmptyInput);
    }
    if starts_solid(bytes) {
        if let Ok(text) = std::str::from_utf8(bytes) {
            match parse_ascii(text) {
                Ok(facets) => return Ok(weld(&facets)),
                Err(ascii_err) => {
                    return match parse_binary(bytes) {
                        Ok(facets) => Ok(weld(&facets)),
                        Err(_) => Err(ascii_err),
                    }
                }
            }
        }
    }
    parse_binary(bytes).map(|facets| weld(&facets))
}

fn parse_binary(bytes: &[u8]) -> Result<Vec<[Vec3; 3]>, MeshError> {
    if bytes.len() < 84 {
        return Err(MeshError::TruncatedFile {
            expected: 84,
            actual: bytes.len(),
            count: 0,
        });
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap());
    let expected = 84 + 50 * count as usize;
    if bytes.len() != expected {
        return Err(MeshError::TruncatedFile {
            expected,
            actual: bytes.len(),
            count,
        });
    }
    let mut facets = Vec::with_capacity(count as usize);
    for i in 0..count as usize {
        let rec = &bytes[84 + 50 * i..84 + 50 * (i + 1)];
        let f = |k: usize| f32::from_le_bytes(rec[4 * k..4 * k + 4].try_into().unwrap()) as f64;
        // Words 0-2 are the facet normal, ignored.
        let tri = [
            Vec3::new(f(3), f(4), f(5)),
            Vec3::new(f(6), f(7), f(8)),
            Vec3::new(f(9), f(10), f(11)),
        ];
        if tri.iter().any(|v| !v.is_finite()) {
            return Err(MeshError::NonFiniteCoordinate { triangle: i });
        }
        facets.push(tri);
    }
    Ok(facets)
}

fn parse_ascii(text: &str) -> Result<Vec<[Vec3; 3]>, MeshError> {
    let mut facets = Vec::new();
    let mut pending: Vec<Vec3> = Vec::with_capacity(3);
    let mut in_loop = false;
    let mut saw_solid = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut tokens = raw.split_whitespace();
        let Some(first) = tokens.next() else { continue };
        match first {
            "solid" => saw_solid = true,
            "facet" => {
                if tokens.next() != Some("normal") {
                    return Err(MeshError::MalformedAscii {
                        line,
                        message: "expected `facet normal`".into(),
                    });
                }
                // Normal components are parsed for grammar checking only.
                for _ in 0..3 {
                    parse_coord(tokens.next(), line)?;
                }
            }
            "outer" => {
                if tokens.next() != Some("loop") {
                    return Err(MeshError::MalformedAscii {
                        line,
                        message: "expected `outer loop`".into(),
                    });
                }
                in_loop = true;
                pending.clear();
            }
            "vertex" => {
                if !in_loop {
                    return Err(MeshError::MalformedAscii {
                        line,
                        message: "vertex outside `outer loop`".into(),
                    });
                }
                let x = parse_coord(tokens.next(), line)?;
                let y = parse_coord(tokens.next(), line)?;
                let z = parse_coord(tokens.next(), line)?;
                let v = Vec3::new(x, y, z);
                if !v.is_finite() {
                    return Err(MeshError::NonFiniteCoordinate {
                        triangle: facets.len(),
                    });
                }
                pending.push(v);
            }
            "endloop" => {
                if pending.len() != 3 {
                    return Err(MeshError::MalformedAscii {
                        line,
                        message: format!("loop has {} vertices, expected 3", pending.len()),
                    });
                }
                in_loop = false;
            }
            "endfacet" => {
                if pending.len() == 3 {
                    facets.push([pending[0], pending[1], pending[2]]);
                    pending.clear();
                }
            }
            "endsolid" => break,
            other => {
                return Err(MeshError::MalformedAscii {
                    line,
                    message: format!("unexpected token `{other}`"),
                });
            }
        }
    }
    if !saw_solid {
        return Err(MeshError::MalformedAscii {
            line: 1,
            message: "missing `solid` header".into(),
        });
    }
    Ok(facets)
}

fn parse_coord(token: Option<&str>, line: usize) -> Result<f64, MeshError> {
    token
        .and_then(|t| t.parse::<f64>().ok())
        .ok_or_else(|| MeshError::MalformedAscii {
            line,
            message: "expected numeric coordinate".into(),
        })
}

/// Merge vertices within [`WELD_TOLERANCE`] and drop degenerate triangles.
fn weld(facets: &[[Vec3; 3]]) -> TriangleMesh {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut index: HashMap<(i64, i64, i64), u32> = HashMap::new();
    let mut triangles = Vec::with_capacity(facets.len());
    let mut degenerate = 0usize;
    let quant = |v: f64| (v / WELD_TOLERANCE).round() as i64;
    let mut intern = |v: Vec3| -> u32 {
        let key = (quant(v.x), quant(v.y), quant(v.z));
        *index.entry(key).or_insert_with(|| {
            vertices.push(v);
            (vertices.len() - 1) as u32
        })
    };
    for tri in facets {
        let idx = [intern(tri[0]), intern(tri[1]), intern(tri[2])];
        triangles.push(idx);
    }
    let mut mesh = TriangleMesh {
        vertices,
        triangles,
        degenerate_dropped: 0,
    };
    mesh.triangles = {
        let kept: Vec<[u32; 3]> = (0..mesh.triangles.len())
            .filter(|&t| {
                let [a, b, c] = mesh.triangles[t];
                let distinct = a != b && b != c && a != c;
                if distinct && mesh.triangle_area(t) >= DEGENERATE_AREA {
                    true
                } else {
                    degenerate += 1;
                    false
                }
            })
            .map(|t| mesh.triangles[t])
            .collect();
        kept
    };
    mesh.degenerate_dropped = degenerate;
    mesh
}

/// Serialize to binary STL with normals recomputed from winding.
pub fn write_binary_stl(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = vec![0u8; 80];
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for t in 0..mesh.triangles.len() {
        let n = mesh.triangle_normal(t);
        let pts = mesh.triangle_points(t);
        for v in [n, pts[0], pts[1], pts[2]] {
            for c in [v.x, v.y, v.z] {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&[0, 0]);
    }
    out
}

/// Edge-use census over welded indices.
pub fn validate_mesh(mesh: &TriangleMesh) -> MeshReport {
    // Undirected edge -> (use count, directed orientation balance).
    let mut edges: HashMap<(u32, u32), (usize, i64)> = HashMap::new();
    for tri in &mesh.triangles {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let (key, dir) = if a < b { ((a, b), 1) } else { ((b, a), -1) };
            let e = edges.entry(key).or_insert((0, 0));
            e.0 += 1;
            e.1 += dir;
        }
    }
    let mut non_manifold = 0usize;
    let mut boundary = 0usize;
    let mut watertight = !mesh.triangles.is_empty();
    for &(count, balance) in edges.values() {
        if count > 2 {
            non_manifold += 1;
            watertight = false;
        } else if count == 1 {
            boundary += 1;
            watertight = false;
        } else if balance != 0 {
            // Two uses with the same orientation: inconsistent winding.
            watertight = false;
        }
    }
    MeshReport {
        triangle_count: mesh.triangles.len(),
        is_watertight: watertight,
        non_manifold_edge_count: non_manifold,
        boundary_edge_count: boundary,
        degenerate_triangle_count: mesh.degenerate_dropped,
        bounds: mesh_bounds(mesh).unwrap_or(Aabb {
            min: Vec3::default(),
            max: Vec3::default(),
        }),
    }
}

/// Componentwise min/max over all vertices.
pub fn mesh_bounds(mesh: &TriangleMesh) -> Result<Aabb, MeshError> {
    if mesh.triangles.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    let used = mesh
        .triangles
        .iter()
        .flatten()
        .map(|&i| mesh.vertices[i as usize]);
    Ok(Aabb::from_points(used))
}

/// True iff the part's extent fits the machine envelope on every axis.
pub fn fits_build_volume(bounds: &Aabb, machine: &MachineProfile) -> bool {
    let e = bounds.extents();
    e.x <= machine.build_volume.0 && e.y <= machine.build_volume.1 && e.z <= machine.build_volume.2
}

/// Translate so min-z sits on the bed and the XY bounds center is at bed center.
pub fn normalize_placement(
    mesh: &TriangleMesh,
    machine: &MachineProfile,
) -> Result<TriangleMesh, MeshError> {
    let bounds = mesh_bounds(mesh)?;
    let center = bounds.center();
    let shift = Vec3::new(
        machine.build_volume.0 / 2.0 - center.x,
        machine.build_volume.1 / 2.0 - center.y,
        -bounds.min.z,
    );
    let mut out = mesh.clone();
    for v in &mut out.vertices {
        *v = *v + shift;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    fn cube_bytes() -> Vec<u8> {
        write_binary_stl(&shapes::cuboid(1.0, 1.0, 1.0))
    }

    #[test]
    fn detect_binary_with_zero_count() {
        let mut buf = vec![0u8; 84];
        buf[80..84].copy_from_slice(&0u32.to_le_bytes());
        assert_eq!(detect_format(&buf).unwrap(), StlFormat::Binary);
    }

    #[test]
    fn detect_ascii() {
        let text = "solid cube\nfacet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex 0 1 0\nendloop\nendfacet\nendsolid cube\n";
        assert_eq!(detect_format(text.as_bytes()).unwrap(), StlFormat::Ascii);
    }

    #[test]
    fn detect_binary_despite_solid_header() {
        // Binary file whose 80-byte header happens to start with "solid".
        let mesh = shapes::cuboid(1.0, 1.0, 1.0);
        let mut bytes = write_binary_stl(&mesh);
        bytes[..5].copy_from_slice(b"solid");
        assert_eq!(detect_format(&bytes).unwrap(), StlFormat::Binary);
        let parsed = parse_stl(&bytes).unwrap();
        assert_eq!(parsed.triangles.len(), 12);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(detect_format(&[]), Err(MeshError::EmptyInput)));
    }

    #[test]
    fn parse_binary_cube_welds_vertices() {
        let mesh = parse_stl(&cube_bytes()).unwrap();
        assert_eq!(mesh.triangles.len(), 12);
        assert_eq!(mesh.vertices.len(), 8);
    }

    #[test]
    fn parse_ascii_single_facet() {
        let text = "solid t\nfacet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex 0 1 0\nendloop\nendfacet\nendsolid t\n";
        let mesh = parse_stl(text.as_bytes()).unwrap();
        assert_eq!(mesh.triangles.len(), 1);
        assert_eq!(mesh.vertices.len(), 3);
    }

    #[test]
    fn truncated_binary_rejected() {
        let mut bytes = cube_bytes();
        bytes.truncate(bytes.len() - 50); // declare 12, provide 11
        assert!(matches!(
            parse_stl(&bytes),
            Err(MeshError::TruncatedFile { count: 12, .. })
        ));
    }

    #[test]
    fn malformed_ascii_rejected() {
        let text = "solid t\nfacet normal 0 0 1\nouter loop\nvertex 0 0 bogus\n";
        assert!(matches!(
            parse_stl(text.as_bytes()),
            Err(MeshError::MalformedAscii { .. })
        ));
    }

    #[test]
    fn cube_is_watertight() {
        let report = validate_mesh(&parse_stl(&cube_bytes()).unwrap());
        assert!(report.is_watertight);
        assert_eq!(report.non_manifold_edge_count, 0);
    }

    #[test]
    fn open_cube_is_not_watertight() {
        let mut mesh = parse_stl(&cube_bytes()).unwrap();
        mesh.triangles.pop();
        let report = validate_mesh(&mesh);
        assert!(!report.is_watertight);
        assert_eq!(report.boundary_edge_count, 3);
    }

    #[test]
    fn shared_edge_is_non_manifold() {
        // Two tetrahedra sharing one edge: that edge is used 4 times... build
        // directly from triangle soup sharing an edge between four triangles.
        let mut mesh = parse_stl(&cube_bytes()).unwrap();
        let n = mesh.vertices.len() as u32;
        mesh.vertices.push(Vec3::new(2.0, 2.0, 2.0));
        mesh.vertices.push(Vec3::new(3.0, 2.0, 2.0));
        // Reuse cube edge (triangles[0][0], triangles[0][1]) in two new triangles.
        let [a, b, _] = mesh.triangles[0];
        mesh.triangles.push([a, b, n]);
        mesh.triangles.push([b, a, n + 1]);
        let report = validate_mesh(&mesh);
        assert!(report.non_manifold_edge_count >= 1);
        // Brute-force census agrees.
        let mut count = 0;
        let key = if a < b { (a, b) } else { (b, a) };
        for tri in &mesh.triangles {
            for k in 0..3 {
                let (x, y) = (tri[k], tri[(k + 1) % 3]);
                let e = if x < y { (x, y) } else { (y, x) };
                if e == key {
                    count += 1;
                }
            }
        }
        assert!(count > 2);
    }

    #[test]
    fn bounds_of_translated_cube() {
        let mesh = shapes::translated(&shapes::cuboid(1.0, 1.0, 1.0), Vec3::new(5.0, 5.0, 5.0));
        let b = mesh_bounds(&mesh).unwrap();
        assert_eq!(b.min, Vec3::new(5.0, 5.0, 5.0));
        assert_eq!(b.max, Vec3::new(6.0, 6.0, 6.0));
    }

    #[test]
    fn bounds_match_brute_force_on_random_cloud() {
        // 100 pseudo-random points as degenerate-free fan; compare against
        // a direct min/max sweep.
        let mut verts = Vec::new();
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 50.0 - 25.0
        };
        for _ in 0..100 {
            verts.push(Vec3::new(next(), next(), next()));
        }
        let mut triangles = Vec::new();
        for i in 0..(verts.len() as u32 - 2) {
            triangles.push([i, i + 1, i + 2]);
        }
        let mesh = TriangleMesh {
            vertices: verts.clone(),
            triangles,
            degenerate_dropped: 0,
        };
        let b = mesh_bounds(&mesh).unwrap();
        let bf = Aabb::from_points(verts.iter().copied());
        assert_eq!(b, bf);
    }

    #[test]
    fn fits_build_volume_table_rows() {
        let machine = MachineProfile::default();
        let skull = Aabb {
            min: Vec3::default(),
            max: Vec3::new(130.0, 101.0, 148.0),
        };
        let too_wide = Aabb {
            min: Vec3::default(),
            max: Vec3::new(200.0, 50.0, 50.0),
        };
        assert!(fits_build_volume(&skull, &machine));
        assert!(!fits_build_volume(&too_wide, &machine));
    }

    #[test]
    fn normalize_drops_to_bed_and_centers() {
        let machine = MachineProfile::default();
        let mesh = shapes::translated(&shapes::cuboid(2.0, 2.0, 2.0), Vec3::new(10.0, 10.0, 10.0));
        let out = normalize_placement(&mesh, &machine).unwrap();
        let b = mesh_bounds(&out).unwrap();
        assert!(b.min.z.abs() < 1e-12);
        assert!((b.center().x - 90.0).abs() < 1e-12);
        assert!((b.center().y - 90.0).abs() < 1e-12);
        // Idempotent.
        let again = normalize_placement(&out, &machine).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn binary_round_trip_preserves_triangles() {
        let mesh = parse_stl(&cube_bytes()).unwrap();
        let re = parse_stl(&write_binary_stl(&mesh)).unwrap();
        assert_eq!(re.triangles.len(), mesh.triangles.len());
        let points = |m: &TriangleMesh| {
            let mut v: Vec<[(i64, i64, i64); 3]> = (0..m.triangles.len())
                .map(|t| {
                    let pts = m.triangle_points(t);
                    let q = |p: Vec3| {
                        (
                            (p.x * 1e6).round() as i64,
                            (p.y * 1e6).round() as i64,
                            (p.z * 1e6).round() as i64,
                        )
                    };
                    [q(pts[0]), q(pts[1]), q(pts[2])]
                })
                .collect();
            v.sort();
            v
        };
        assert_eq!(points(&mesh), points(&re));
    }
}
