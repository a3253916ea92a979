//! Procedural test meshes: cuboids and icospheres.

use crate::geom::Vec3;
use crate::mesh_io::TriangleMesh;

/// Axis-aligned box with min corner at the origin.
pub fn cuboid(dx: f64, dy: f64, dz: f64) -> TriangleMesh {
    let v = |x: f64, y: f64, z: f64| Vec3::new(x * dx, y * dy, z * dz);
    let vertices = vec![
        v(0.0, 0.0, 0.0),
        v(1.0, 0.0, 0.0),
        v(1.0, 1.0, 0.0),
        v(0.0, 1.0, 0.0),
        v(0.0, 0.0, 1.0),
        v(1.0, 0.0, 1.0),
        v(1.0, 1.0, 1.0),
        v(0.0, 1.0, 1.0),
    ];
    // Outward-facing CCW winding.
    let triangles = vec![
        [0, 2, 1],
        [0, 3, 2], // bottom (z=0, normal -z)
        [4, 5, 6],
        [4, 6, 7], // top
        [0, 1, 5],
        [0, 5, 4], // front (y=0)
        [2, 3, 7],
        [2, 7, 6], // back
        [1, 2, 6],
        [1, 6, 5], // right (x=max)
        [3, 0, 4],
        [3, 4, 7], // left
    ];
    TriangleMesh {
        vertices,
        triangles,
        degenerate_dropped: 0,
    }
}

/// Sphere of the given radius centered at origin, by icosahedron subdivision.
///
/// Facet count is `20 * 4^subdivisions` (3 subdivisions gives 1280).
pub fn icosphere(radius: f64, subdivisions: u32) -> TriangleMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalized())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints = std::collections::HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let mut mid = |i: u32, j: u32| -> u32 {
                let key = (i.min(j), i.max(j));
                *midpoints.entry(key).or_insert_with(|| {
                    let m = ((verts[i as usize] + verts[j as usize]) * 0.5).normalized();
                    verts.push(m);
                    (verts.len() - 1) as u32
                })
            };
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    TriangleMesh {
        vertices: verts.into_iter().map(|v| v * radius).collect(),
        triangles: faces,
        degenerate_dropped: 0,
    }
}

pub fn translated(mesh: &TriangleMesh, offset: Vec3) -> TriangleMesh {
    let mut out = mesh.clone();
    for v in &mut out.vertices {
        *v = *v + offset;
    }
    out
}
