//! Small shapes and scenes shared across unit tests.

use nalgebra::{Point3, Unit, Vector3};

use crate::contact::FrictionParams;
use crate::grasp::{Contact, GraspScene};
use crate::mesh::TriangleMesh;

/// Antipodal grasp on the unit sphere: contacts at (±1, 0, 0) with inward
/// normals toward the center; centroid at the origin, torque scale 1.
/// The closed-form fixture behind the lift and evaluation tests.
pub(crate) fn antipodal_sphere_scene(mu: f64, gamma: f64, mass: f64) -> GraspScene {
    let contacts = vec![
        Contact {
            position: Point3::new(1.0, 0.0, 0.0),
            inward_normal: Unit::new_normalize(Vector3::new(-1.0, 0.0, 0.0)),
        },
        Contact {
            position: Point3::new(-1.0, 0.0, 0.0),
            inward_normal: Unit::new_normalize(Vector3::new(1.0, 0.0, 0.0)),
        },
    ];
    GraspScene::analytic(
        contacts,
        FrictionParams::new(mu, gamma, 8).unwrap(),
        mass,
        50.0,
        Point3::origin(),
        1.0,
    )
}

pub(crate) fn unit_cube() -> TriangleMesh {
    let verts = vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(1.0, 1.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
        Point3::new(1.0, 0.0, 1.0),
        Point3::new(1.0, 1.0, 1.0),
        Point3::new(0.0, 1.0, 1.0),
    ];
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    TriangleMesh::new(verts, faces).unwrap()
}

/// Regular tetrahedron with unit edges centered at the origin.
pub(crate) fn regular_tetrahedron() -> TriangleMesh {
    // a cube-diagonal tetrahedron has edge length 2*sqrt(2); scale it down
    let s = 1.0 / (2.0 * 2.0_f64.sqrt());
    let verts = vec![
        Point3::new(s, s, s),
        Point3::new(s, -s, -s),
        Point3::new(-s, s, -s),
        Point3::new(-s, -s, s),
    ];
    TriangleMesh::new(verts, vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]).unwrap()
}
