//! Triangle meshes: construction, OBJ IO, and the geometric queries the
//! grasp metrics rely on (centroid, Laplacian energy, contact evaluation).
//!
//! Meshes are immutable after construction; deformation produces a new mesh
//! via [`TriangleMesh::with_vertices`], which keeps topology and adjacency.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{Point3, Unit, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Volume below which a mesh is considered to enclose no solid (m³).
const MIN_VOLUME: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("non-triangular face at line {line} ({count} vertices)")]
    NonTriangularFace { line: usize, count: usize },
    #[error("no geometry")]
    NoGeometry,
    #[error("face {face} references vertex {index}, but mesh has {count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        count: usize,
    },
    #[error("face {face} repeats a vertex index")]
    RepeatedIndex { face: usize },
    #[error("mesh is not watertight: edge ({a},{b}) bounds {count} faces")]
    NotWatertight { a: usize, b: usize, count: usize },
    #[error("mesh is not consistently oriented at edge ({a},{b})")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("enclosed volume {volume:.3e} m³ is below {MIN_VOLUME:.0e}")]
    ZeroVolume { volume: f64 },
    #[error("vertex {vertex} has no neighbors")]
    IsolatedVertex { vertex: usize },
    #[error("mesh has no vertices")]
    Empty,
    #[error("face {face} has zero area")]
    ZeroAreaFace { face: usize },
    #[error("invalid contact binding: {0}")]
    InvalidBinding(String),
    #[error("vertex count mismatch: mesh has {expected}, got {got}")]
    VertexCountMismatch { expected: usize, got: usize },
}

/// A contact bound to the surface as a material point: a face index plus
/// barycentric weights. Positions and normals derived from a binding track
/// the surface when the mesh deforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactBinding {
    pub face_index: usize,
    pub barycentric: [f64; 3],
}

impl ContactBinding {
    pub fn new(face_index: usize, barycentric: [f64; 3]) -> Self {
        Self {
            face_index,
            barycentric,
        }
    }

    /// Weights must be nonnegative and sum to 1 within 1e-12.
    pub fn validate(&self, mesh: &TriangleMesh) -> Result<(), MeshError> {
        if self.face_index >= mesh.face_count() {
            return Err(MeshError::InvalidBinding(format!(
                "face index {} out of range ({} faces)",
                self.face_index,
                mesh.face_count()
            )));
        }
        let sum: f64 = self.barycentric.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(MeshError::InvalidBinding(format!(
                "barycentric weights sum to {sum}, expected 1"
            )));
        }
        if self.barycentric.iter().any(|&w| w < -1e-12) {
            return Err(MeshError::InvalidBinding(
                "negative barycentric weight".into(),
            ));
        }
        Ok(())
    }
}

/// An indexed triangle surface with derived vertex adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
    adjacency: Vec<Vec<usize>>,
}

impl TriangleMesh {
    /// Builds a mesh, validating face indices and rejecting faces with
    /// repeated vertex indices. Faceless meshes are allowed.
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        for (f, face) in faces.iter().enumerate() {
            for &i in face {
                if i >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        face: f,
                        index: i,
                        count: vertices.len(),
                    });
                }
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(MeshError::RepeatedIndex { face: f });
            }
        }
        let adjacency = build_adjacency(vertices.len(), &faces);
        Ok(Self {
            vertices,
            faces,
            adjacency,
        })
    }

    /// Same topology, new vertex positions.
    pub fn with_vertices(&self, vertices: Vec<Point3<f64>>) -> Result<Self, MeshError> {
        if vertices.len() != self.vertices.len() {
            return Err(MeshError::VertexCountMismatch {
                expected: self.vertices.len(),
                got: vertices.len(),
            });
        }
        Ok(Self {
            vertices,
            faces: self.faces.clone(),
            adjacency: self.adjacency.clone(),
        })
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Sorted neighbor indices of vertex `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn translated(&self, t: Vector3<f64>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| p + t).collect(),
            faces: self.faces.clone(),
            adjacency: self.adjacency.clone(),
        }
    }

    /// Componentwise min/max corners over all vertices.
    pub fn bounding_box(&self) -> Result<(Point3<f64>, Point3<f64>), MeshError> {
        let first = *self.vertices.first().ok_or(MeshError::Empty)?;
        let mut lo = first;
        let mut hi = first;
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Ok((lo, hi))
    }

    /// Checks that every undirected edge bounds exactly two faces, traversed
    /// in opposite directions.
    pub fn check_watertight(&self) -> Result<(), MeshError> {
        // (forward, backward) traversal counts per undirected edge
        let mut edges: HashMap<(usize, usize), (u32, u32)> = HashMap::new();
        for face in &self.faces {
            for k in 0..3 {
                let (a, b) = (face[k], face[(k + 1) % 3]);
                let entry = edges.entry((a.min(b), a.max(b))).or_insert((0, 0));
                if a < b {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
            }
        }
        for (&(a, b), &(fwd, bwd)) in &edges {
            let count = fwd + bwd;
            if count != 2 {
                return Err(MeshError::NotWatertight {
                    a,
                    b,
                    count: count as usize,
                });
            }
            if fwd != 1 {
                return Err(MeshError::InconsistentOrientation { a, b });
            }
        }
        Ok(())
    }

    /// Enclosed volume from the signed-tetrahedron decomposition against the
    /// origin. Requires a watertight, consistently oriented mesh; the sign
    /// depends on the orientation convention.
    pub fn signed_volume(&self) -> Result<f64, MeshError> {
        self.check_watertight()?;
        let mut six_v = 0.0;
        for face in &self.faces {
            let (a, b, c) = self.face_points(face);
            six_v += a.coords.dot(&b.coords.cross(&c.coords));
        }
        Ok(six_v / 6.0)
    }

    /// Center of mass of the enclosed uniform-density solid.
    ///
    /// Decomposes the solid into signed tetrahedra against the origin; the
    /// orientation sign cancels between the moment and the volume.
    pub fn center_of_mass(&self) -> Result<Point3<f64>, MeshError> {
        self.check_watertight()?;
        let mut six_v = 0.0;
        let mut moment = Vector3::zeros();
        for face in &self.faces {
            let (a, b, c) = self.face_points(face);
            let det = a.coords.dot(&b.coords.cross(&c.coords));
            six_v += det;
            // tetra centroid is (a + b + c + 0) / 4
            moment += det * (a.coords + b.coords + c.coords) / 4.0;
        }
        let volume = six_v / 6.0;
        if volume.abs() < MIN_VOLUME {
            return Err(MeshError::ZeroVolume { volume });
        }
        Ok(Point3::from(moment / six_v))
    }

    /// Area-weighted centroid of the surface (sensitivity-study alternative
    /// to the volume centroid).
    pub fn surface_centroid(&self) -> Result<Point3<f64>, MeshError> {
        let mut total_area = 0.0;
        let mut moment = Vector3::zeros();
        for face in &self.faces {
            let (a, b, c) = self.face_points(face);
            let area = 0.5 * (b - a).cross(&(c - a)).norm();
            total_area += area;
            moment += area * (a.coords + b.coords + c.coords) / 3.0;
        }
        if total_area < 1e-18 {
            return Err(MeshError::ZeroVolume { volume: 0.0 });
        }
        Ok(Point3::from(moment / total_area))
    }

    /// Sum over vertices of the squared norm of the mean neighbor offset:
    ///
    /// ```text
    /// sum_v || mean_{v' in Neigh(v)} (v' - v) ||^2
    /// ```
    ///
    /// Zero exactly when every vertex sits at the mean of its neighbors;
    /// invariant under global translation.
    pub fn laplacian_energy(&self) -> Result<f64, MeshError> {
        let mut energy = 0.0;
        for (v, neigh) in self.adjacency.iter().enumerate() {
            if neigh.is_empty() {
                return Err(MeshError::IsolatedVertex { vertex: v });
            }
            let mut mean = Vector3::zeros();
            for &u in neigh {
                mean += self.vertices[u] - self.vertices[v];
            }
            mean /= neigh.len() as f64;
            energy += mean.norm_squared();
        }
        Ok(energy)
    }

    /// Outward unit normal of a face (counter-clockwise winding).
    pub fn face_normal(&self, face: usize) -> Result<Unit<Vector3<f64>>, MeshError> {
        let (a, b, c) = self.face_points(&self.faces[face]);
        let n = (b - a).cross(&(c - a));
        if n.norm() < 1e-15 {
            return Err(MeshError::ZeroAreaFace { face });
        }
        Ok(Unit::new_normalize(n))
    }

    /// Position and inward unit normal of a bound contact on the current
    /// surface.
    pub fn eval_contact(
        &self,
        binding: &ContactBinding,
    ) -> Result<(Point3<f64>, Unit<Vector3<f64>>), MeshError> {
        binding.validate(self)?;
        let face = &self.faces[binding.face_index];
        let (a, b, c) = self.face_points(face);
        let w = binding.barycentric;
        let position = Point3::from(w[0] * a.coords + w[1] * b.coords + w[2] * c.coords);
        let outward = self.face_normal(binding.face_index)?;
        Ok((position, Unit::new_unchecked(-outward.into_inner())))
    }

    /// Closest point on the surface, as a binding plus its position.
    /// Ties are broken by the lowest face index.
    pub fn closest_surface_point(
        &self,
        p: &Point3<f64>,
    ) -> Result<(ContactBinding, Point3<f64>), MeshError> {
        if self.faces.is_empty() {
            return Err(MeshError::NoGeometry);
        }
        let mut best: Option<(f64, ContactBinding, Point3<f64>)> = None;
        for (f, face) in self.faces.iter().enumerate() {
            let (a, b, c) = self.face_points(face);
            let (q, bary) = closest_point_on_triangle(p, &a, &b, &c);
            let d2 = (q - p).norm_squared();
            if best.as_ref().is_none_or(|(bd, _, _)| d2 < *bd) {
                best = Some((d2, ContactBinding::new(f, bary), q));
            }
        }
        let (_, binding, q) = best.unwrap();
        Ok((binding, q))
    }

    /// Largest vertex distance from `point`; the torque normalization radius.
    pub fn max_radius_about(&self, point: &Point3<f64>) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v - point).norm())
            .fold(0.0, f64::max)
    }

    fn face_points(&self, face: &[usize; 3]) -> (Point3<f64>, Point3<f64>, Point3<f64>) {
        (
            self.vertices[face[0]],
            self.vertices[face[1]],
            self.vertices[face[2]],
        )
    }
}

fn build_adjacency(vertex_count: usize, faces: &[[usize; 3]]) -> Vec<Vec<usize>> {
    let mut adjacency = vec![Vec::new(); vertex_count];
    for face in faces {
        for k in 0..3 {
            let (a, b) = (face[k], face[(k + 1) % 3]);
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    adjacency
}

/// Closest point on triangle (a, b, c) to `p`, with barycentric weights.
/// Ericson, Real-Time Collision Detection, §5.1.5.
fn closest_point_on_triangle(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> (Point3<f64>, [f64; 3]) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (*a, [1.0, 0.0, 0.0]);
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (*b, [0.0, 1.0, 0.0]);
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + v * ab, [1.0 - v, v, 0.0]);
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (*c, [0.0, 0.0, 1.0]);
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + w * ac, [1.0 - w, 0.0, w]);
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + w * (c - b), [0.0, 1.0 - w, w]);
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

/// Reads an ASCII OBJ file: `v x y z` and triangular `f i j k` records,
/// 1-based indices, `#` comments. Normals and texture records are ignored;
/// face references like `i/j/k` use the vertex index only.
pub fn load_obj(path: impl AsRef<Path>) -> Result<TriangleMesh, MeshError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_obj_from(BufReader::new(file), path)
}

/// OBJ parsing from any buffered reader; `path` is used in errors only.
pub fn load_obj_from(reader: impl BufRead, path: &Path) -> Result<TriangleMesh, MeshError> {
    let mut vertices = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| MeshError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let lineno = idx + 1;
        let mut fields = line.split_whitespace();
        let Some(keyword) = fields.next() else {
            continue;
        };
        match keyword {
            "#" => {}
            k if k.starts_with('#') => {}
            "v" => {
                let coords: Vec<f64> = fields
                    .map(|s| {
                        s.parse::<f64>().map_err(|e| MeshError::Parse {
                            line: lineno,
                            msg: format!("bad coordinate {s:?}: {e}"),
                        })
                    })
                    .collect::<Result<_, _>>()?;
                if coords.len() != 3 {
                    return Err(MeshError::Parse {
                        line: lineno,
                        msg: format!("expected 3 coordinates, got {}", coords.len()),
                    });
                }
                vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            "f" => {
                let refs: Vec<usize> = fields
                    .map(|s| parse_face_ref(s, lineno))
                    .collect::<Result<_, _>>()?;
                if refs.len() != 3 {
                    return Err(MeshError::NonTriangularFace {
                        line: lineno,
                        count: refs.len(),
                    });
                }
                faces.push([refs[0], refs[1], refs[2]]);
            }
            // geometry-free records we knowingly ignore
            "vn" | "vt" | "vp" | "o" | "g" | "s" | "usemtl" | "mtllib" => {}
            other => {
                return Err(MeshError::Parse {
                    line: lineno,
                    msg: format!("unsupported record {other:?}"),
                });
            }
        }
    }
    if vertices.is_empty() || faces.is_empty() {
        return Err(MeshError::NoGeometry);
    }
    TriangleMesh::new(vertices, faces)
}

fn parse_face_ref(s: &str, line: usize) -> Result<usize, MeshError> {
    let vertex_part = s.split('/').next().unwrap_or(s);
    let idx: i64 = vertex_part.parse().map_err(|e| MeshError::Parse {
        line,
        msg: format!("bad face index {s:?}: {e}"),
    })?;
    if idx < 1 {
        return Err(MeshError::Parse {
            line,
            msg: format!("face index {idx} must be positive"),
        });
    }
    Ok(idx as usize - 1)
}

/// Writes `v`/`f` records with 9 decimal places, enough to reload vertices
/// within 1e-9. Output is byte-deterministic for a given mesh.
pub fn save_obj(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let path = path.as_ref();
    let to_io_err = |source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(to_io_err)?;
    let mut w = BufWriter::new(file);
    write_obj(mesh, &mut w).map_err(to_io_err)?;
    w.flush().map_err(to_io_err)
}

pub fn write_obj(mesh: &TriangleMesh, w: &mut impl Write) -> std::io::Result<()> {
    for v in mesh.vertices() {
        writeln!(w, "v {:.9} {:.9} {:.9}", v.x, v.y, v.z)?;
    }
    for f in mesh.faces() {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}
