//! Cage construction and cage-based mesh deformation.
//!
//! The cage is the object's axis-aligned bounding box, inflated so every
//! mesh vertex is strictly interior, with each box face divided into a
//! square grid at the requested spacing. The grid vertices are the control
//! points. Each mesh vertex gets one row of mean value coordinates over the
//! control points (Ju/Schaefer/Warren's closed-triangular-mesh form), which
//! gives partition of unity and linear reproduction; displacing control
//! points then moves mesh vertices through those fixed weights.

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::{MeshError, TriangleMesh};

#[derive(Debug, Error)]
pub enum CageError {
    #[error("degenerate bounding box: axis {axis} has extent {extent:.3e}")]
    DegenerateBox { axis: usize, extent: f64 },
    #[error("mesh vertex {index} is not strictly inside the cage")]
    VertexOutsideCage { index: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// A built cage: the closed control surface and one weight row per mesh
/// vertex. Immutable once built; weights refer to the undeformed cage.
#[derive(Debug, Clone)]
pub struct CageRig {
    cage_mesh: TriangleMesh,
    weights: Vec<Vec<f64>>,
    cage_size: f64,
}

impl CageRig {
    /// Control points are the cage mesh vertices, in construction order.
    pub fn control_points(&self) -> &[Point3<f64>] {
        self.cage_mesh.vertices()
    }

    pub fn control_point_count(&self) -> usize {
        self.cage_mesh.vertex_count()
    }

    pub fn cage_mesh(&self) -> &TriangleMesh {
        &self.cage_mesh
    }

    pub fn cage_size(&self) -> f64 {
        self.cage_size
    }

    /// Weight rows, one per mesh vertex, each summing to 1.
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Reconstructs mesh vertex `v` from the (undisplaced) control points.
    /// Equals the original vertex up to the coordinate-computation error.
    pub fn reconstruct(&self, v: usize) -> Point3<f64> {
        let mut p = Vector3::zeros();
        for (w, cp) in self.weights[v].iter().zip(self.control_points()) {
            p += *w * cp.coords;
        }
        Point3::from(p)
    }

    /// Displacement of mesh vertex `v` for the given control displacements.
    pub fn vertex_offset(&self, v: usize, displacements: &[Vector3<f64>]) -> Vector3<f64> {
        let mut offset = Vector3::zeros();
        for (w, d) in self.weights[v].iter().zip(displacements) {
            offset += *w * *d;
        }
        offset
    }
}

/// Builds the cage for a mesh: AABB inflated by `inflation` (fraction of the
/// extent, per side), faces gridded at spacing <= `cage_size`, weights
/// computed on the undeformed cage.
pub fn build_cage(
    mesh: &TriangleMesh,
    cage_size: f64,
    inflation: f64,
) -> Result<CageRig, CageError> {
    assert!(cage_size > 0.0, "cage size must be positive");
    assert!(inflation > 0.0, "inflation must be positive");

    let (lo0, hi0) = mesh.bounding_box()?;
    let extent0 = hi0 - lo0;
    let lo = lo0 - inflation * extent0;
    let hi = hi0 + inflation * extent0;
    let extent = hi - lo;
    for axis in 0..3 {
        if extent[axis] < 1e-12 {
            return Err(CageError::DegenerateBox {
                axis,
                extent: extent[axis],
            });
        }
    }

    // per-axis division counts so grid spacing <= cage_size
    let divisions = [
        (extent.x / cage_size).ceil().max(1.0) as usize,
        (extent.y / cage_size).ceil().max(1.0) as usize,
        (extent.z / cage_size).ceil().max(1.0) as usize,
    ];
    let cage_mesh = box_surface_grid(&lo, &hi, divisions)?;

    for (index, v) in mesh.vertices().iter().enumerate() {
        let inside = (0..3).all(|k| v[k] > lo[k] && v[k] < hi[k]);
        if !inside {
            return Err(CageError::VertexOutsideCage { index });
        }
    }

    let cage_points = cage_mesh.vertices().to_vec();
    let cage_faces = cage_mesh.faces().to_vec();
    let weights: Vec<Vec<f64>> = mesh
        .vertices()
        .par_iter()
        .map(|v| mean_value_weights(v, &cage_points, &cage_faces))
        .collect();

    Ok(CageRig {
        cage_mesh,
        weights,
        cage_size,
    })
}

/// Moves mesh vertices through the rig's weight rows: each vertex is offset
/// by its weighted combination of control-point displacements. Topology is
/// untouched.
pub fn apply_deformation(
    rig: &CageRig,
    displacements: &[Vector3<f64>],
    mesh: &TriangleMesh,
) -> TriangleMesh {
    assert_eq!(
        displacements.len(),
        rig.control_point_count(),
        "one displacement per control point"
    );
    assert_eq!(mesh.vertex_count(), rig.weights.len());
    let vertices: Vec<Point3<f64>> = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, p)| p + rig.vertex_offset(v, displacements))
        .collect();
    mesh.with_vertices(vertices).expect("same vertex count")
}

/// Closed box surface with each face divided into a grid; vertices along
/// shared edges and corners are deduplicated, faces wind outward. Also the
/// construction behind the box fixture.
pub(crate) fn box_surface_grid(
    lo: &Point3<f64>,
    hi: &Point3<f64>,
    divisions: [usize; 3],
) -> Result<TriangleMesh, CageError> {
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut index: std::collections::HashMap<(usize, usize, usize), usize> =
        std::collections::HashMap::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();

    let coord = |axis: usize, i: usize| -> f64 {
        let n = divisions[axis];
        lo[axis] + (hi[axis] - lo[axis]) * i as f64 / n as f64
    };

    let mut vertex_at = |key: (usize, usize, usize), vertices: &mut Vec<Point3<f64>>| -> usize {
        *index.entry(key).or_insert_with(|| {
            let p = Point3::new(coord(0, key.0), coord(1, key.1), coord(2, key.2));
            vertices.push(p);
            vertices.len() - 1
        })
    };

    // each box face: fixed axis at its low or high end, grid over the others
    for axis in 0..3usize {
        let (u_axis, v_axis) = ((axis + 1) % 3, (axis + 2) % 3);
        let (nu, nv) = (divisions[u_axis], divisions[v_axis]);
        for &high in &[false, true] {
            let fixed = if high { divisions[axis] } else { 0 };
            for iu in 0..nu {
                for iv in 0..nv {
                    let key = |du: usize, dv: usize| {
                        let mut k = [0usize; 3];
                        k[axis] = fixed;
                        k[u_axis] = iu + du;
                        k[v_axis] = iv + dv;
                        (k[0], k[1], k[2])
                    };
                    let a = vertex_at(key(0, 0), &mut vertices);
                    let b = vertex_at(key(1, 0), &mut vertices);
                    let c = vertex_at(key(1, 1), &mut vertices);
                    let d = vertex_at(key(0, 1), &mut vertices);
                    // (u x v) points along +axis; flip winding on low faces
                    if high {
                        faces.push([a, b, c]);
                        faces.push([a, c, d]);
                    } else {
                        faces.push([a, c, b]);
                        faces.push([a, d, c]);
                    }
                }
            }
        }
    }

    let mesh = TriangleMesh::new(vertices, faces)?;
    mesh.check_watertight()?;
    Ok(mesh)
}

/// Mean value coordinates of `x` with respect to a closed triangulated cage,
/// following the spherical-triangle formulation for closed meshes. The
/// returned row is normalized to sum to 1. `x` must not lie on the cage
/// surface (interior points only, which the cage inflation guarantees).
fn mean_value_weights(
    x: &Point3<f64>,
    cage_points: &[Point3<f64>],
    cage_faces: &[[usize; 3]],
) -> Vec<f64> {
    let n = cage_points.len();
    let mut weights = vec![0.0f64; n];

    let mut dist = vec![0.0f64; n];
    let mut unit = vec![Vector3::zeros(); n];
    let scale: f64 = cage_points
        .iter()
        .map(|p| (p - x).norm())
        .fold(0.0, f64::max);
    let eps = 1e-12 * scale.max(1.0);
    for (j, p) in cage_points.iter().enumerate() {
        let d = p - x;
        dist[j] = d.norm();
        if dist[j] < eps {
            // x coincides with a control point
            weights[j] = 1.0;
            return weights;
        }
        unit[j] = d / dist[j];
    }

    for face in cage_faces {
        let idx = [face[0], face[1], face[2]];
        let u = [unit[idx[0]], unit[idx[1]], unit[idx[2]]];
        let d = [dist[idx[0]], dist[idx[1]], dist[idx[2]]];

        // spherical edge lengths opposite each corner
        let mut theta = [0.0f64; 3];
        for k in 0..3 {
            let l = (u[(k + 1) % 3] - u[(k + 2) % 3]).norm();
            theta[k] = 2.0 * (0.5 * l).clamp(0.0, 1.0).asin();
        }
        let h = 0.5 * (theta[0] + theta[1] + theta[2]);

        if std::f64::consts::PI - h < 1e-10 {
            // x lies on this triangle: 2D barycentric weights of it alone
            weights.iter_mut().for_each(|w| *w = 0.0);
            let mut total = 0.0;
            for k in 0..3 {
                let w = theta[k].sin() * d[(k + 1) % 3] * d[(k + 2) % 3];
                weights[idx[k]] = w;
                total += w;
            }
            for w in &mut weights {
                *w /= total;
            }
            return weights;
        }

        let det = u[0].dot(&u[1].cross(&u[2]));
        let mut c = [0.0f64; 3];
        let mut s = [0.0f64; 3];
        let mut skip = false;
        for k in 0..3 {
            let denom = theta[(k + 1) % 3].sin() * theta[(k + 2) % 3].sin();
            c[k] = ((2.0 * h.sin() * (h - theta[k]).sin()) / denom - 1.0).clamp(-1.0, 1.0);
            s[k] = (1.0 - c[k] * c[k]).max(0.0).sqrt() * det.signum();
            if s[k].abs() <= 1e-10 {
                // x is coplanar with the triangle but outside it; the
                // triangle contributes nothing
                skip = true;
            }
        }
        if skip {
            continue;
        }
        for k in 0..3 {
            let num = theta[k]
                - c[(k + 1) % 3] * theta[(k + 2) % 3]
                - c[(k + 2) % 3] * theta[(k + 1) % 3];
            let den = d[k] * theta[(k + 1) % 3].sin() * s[(k + 2) % 3];
            weights[idx[k]] += num / den;
        }
    }

    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    weights
}
