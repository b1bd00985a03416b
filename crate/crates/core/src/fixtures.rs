//! Synthetic watertight objects and grasps used by the tests, the
//! acceptance suite, and the `fixtures` CLI command.
//!
//! Three shapes at tabletop scale, ~500 vertices each: a box, an icosphere,
//! and a capsule. Each ships with a two-finger antipodal grasp across its
//! x extent and a three-finger variant; contacts are specified as raw points
//! snapped to the surface.

use nalgebra::{Point3, Vector3};

use crate::contact::FrictionParams;
use crate::grasp::{CentroidMode, GraspConfig, GraspError};
use crate::mesh::{ContactBinding, TriangleMesh};

/// Box half extents (m).
pub const BOX_HALF: [f64; 3] = [0.025, 0.025, 0.045];
/// Icosphere radius (m).
pub const SPHERE_RADIUS: f64 = 0.03;
/// Capsule wall radius and cylinder half height (m).
pub const CAPSULE_RADIUS: f64 = 0.018;
pub const CAPSULE_HALF: f64 = 0.03;

/// Axis-aligned box centered at the origin, faces gridded for ~500 vertices.
pub fn box_mesh() -> TriangleMesh {
    let lo = Point3::new(-BOX_HALF[0], -BOX_HALF[1], -BOX_HALF[2]);
    let hi = Point3::new(BOX_HALF[0], BOX_HALF[1], BOX_HALF[2]);
    crate::cage::box_surface_grid(&lo, &hi, [8, 8, 12]).expect("box construction")
}

/// Icosahedron subdivided three times and projected to the sphere;
/// 642 vertices, 1280 faces.
pub fn icosphere_mesh() -> TriangleMesh {
    icosphere(SPHERE_RADIUS, 3)
}

pub fn icosphere(radius: f64, subdivisions: usize) -> TriangleMesh {
    let t = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector3<f64>> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vector3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
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
        let mut midpoint: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    verts.push((verts[a] + verts[b]).normalize());
                    verts.len() - 1
                });
            }
            next.push([f[0], mid[0], mid[2]]);
            next.push([f[1], mid[1], mid[0]]);
            next.push([f[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        faces = next;
    }

    let vertices = verts
        .into_iter()
        .map(|v| Point3::from(v * radius))
        .collect();
    TriangleMesh::new(vertices, faces).expect("icosphere construction")
}

/// Capsule: cylinder with hemispherical caps, rings offset half a segment so
/// a wall face is centered on the +x axis (its normal is exactly radial
/// there, which keeps the antipodal grasp analytic).
pub fn capsule_mesh() -> TriangleMesh {
    capsule(CAPSULE_RADIUS, CAPSULE_HALF, 20, 8, 10)
}

pub fn capsule(
    radius: f64,
    half_height: f64,
    segments: usize,
    hemisphere_rings: usize,
    cylinder_rings: usize,
) -> TriangleMesh {
    assert!(segments >= 3 && hemisphere_rings >= 1 && cylinder_rings >= 1);
    let mut verts: Vec<Point3<f64>> = Vec::new();
    let mut rings: Vec<Vec<usize>> = Vec::new();

    let bottom_pole = {
        verts.push(Point3::new(0.0, 0.0, -half_height - radius));
        0
    };

    let push_ring = |verts: &mut Vec<Point3<f64>>, ring_radius: f64, z: f64| -> Vec<usize> {
        (0..segments)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / segments as f64;
                verts.push(Point3::new(
                    ring_radius * theta.cos(),
                    ring_radius * theta.sin(),
                    z,
                ));
                verts.len() - 1
            })
            .collect()
    };

    // bottom hemisphere, from near the pole up to its equator at -half
    for i in 1..=hemisphere_rings {
        let a = -std::f64::consts::FRAC_PI_2
            + std::f64::consts::FRAC_PI_2 * i as f64 / hemisphere_rings as f64;
        rings.push(push_ring(
            &mut verts,
            radius * a.cos(),
            -half_height + radius * a.sin(),
        ));
    }
    // cylinder interior rings
    for j in 1..cylinder_rings {
        let z = -half_height + 2.0 * half_height * j as f64 / cylinder_rings as f64;
        rings.push(push_ring(&mut verts, radius, z));
    }
    // top hemisphere from its equator at +half toward the pole
    for i in 0..hemisphere_rings {
        let a = std::f64::consts::FRAC_PI_2 * i as f64 / hemisphere_rings as f64;
        rings.push(push_ring(
            &mut verts,
            radius * a.cos(),
            half_height + radius * a.sin(),
        ));
    }
    let top_pole = {
        verts.push(Point3::new(0.0, 0.0, half_height + radius));
        verts.len() - 1
    };

    let mut faces: Vec<[usize; 3]> = Vec::new();
    let first = &rings[0];
    for k in 0..segments {
        faces.push([bottom_pole, first[(k + 1) % segments], first[k]]);
    }
    for pair in rings.windows(2) {
        let (lower, upper) = (&pair[0], &pair[1]);
        for k in 0..segments {
            let k1 = (k + 1) % segments;
            faces.push([lower[k], lower[k1], upper[k1]]);
            faces.push([lower[k], upper[k1], upper[k]]);
        }
    }
    let last = rings.last().unwrap();
    for k in 0..segments {
        faces.push([top_pole, last[k], last[(k + 1) % segments]]);
    }

    TriangleMesh::new(verts, faces).expect("capsule construction")
}

/// Snaps raw contact points to the surface and assembles a grasp with the
/// benchmark defaults (mu 0.6, gamma 0.3, 8 cone edges, 1 kg, 50 N cap).
pub fn snap_grasp(mesh: &TriangleMesh, points: &[Point3<f64>]) -> Result<GraspConfig, GraspError> {
    let bindings = points
        .iter()
        .map(|p| mesh.closest_surface_point(p).map(|(b, _)| b))
        .collect::<Result<Vec<ContactBinding>, _>>()?;
    Ok(GraspConfig {
        bindings,
        friction: FrictionParams::default(),
        mass_kg: 1.0,
        per_finger_cap_n: 50.0,
        centroid_mode: CentroidMode::Volume,
    })
}

/// A named object with its named grasps.
pub struct Fixture {
    pub name: &'static str,
    pub mesh: TriangleMesh,
    pub grasps: Vec<(&'static str, GraspConfig)>,
}

/// Contact points of the standard two-finger grasp on each fixture:
/// antipodal across the x extent at mid height.
pub fn two_finger_points(name: &str) -> [Point3<f64>; 2] {
    let r = match name {
        "box" => BOX_HALF[0],
        "icosphere" => SPHERE_RADIUS,
        "capsule" => CAPSULE_RADIUS,
        other => panic!("unknown fixture {other}"),
    };
    [Point3::new(r, 0.0, 0.0), Point3::new(-r, 0.0, 0.0)]
}

/// Contact points of the standard three-finger grasp on each fixture.
pub fn three_finger_points(name: &str) -> [Point3<f64>; 3] {
    match name {
        "box" => [
            Point3::new(BOX_HALF[0], 0.012, 0.0),
            Point3::new(BOX_HALF[0], -0.012, 0.0),
            Point3::new(-BOX_HALF[0], 0.0, 0.0),
        ],
        name => {
            let r = if name == "icosphere" {
                SPHERE_RADIUS
            } else {
                CAPSULE_RADIUS
            };
            let third = 2.0 * std::f64::consts::PI / 3.0;
            [0.0, third, 2.0 * third].map(|a| Point3::new(r * a.cos(), r * a.sin(), 0.0))
        }
    }
}

/// The three standard fixtures, each with its two- and three-finger grasp.
pub fn standard_fixtures() -> Result<Vec<Fixture>, GraspError> {
    let mut fixtures = Vec::new();
    for (name, mesh) in [
        ("box", box_mesh()),
        ("icosphere", icosphere_mesh()),
        ("capsule", capsule_mesh()),
    ] {
        let two = snap_grasp(&mesh, &two_finger_points(name))?;
        let three = snap_grasp(&mesh, &three_finger_points(name))?;
        fixtures.push(Fixture {
            name,
            mesh,
            grasps: vec![("2c", two), ("3c", three)],
        });
    }
    Ok(fixtures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grasp::GraspScene;
    use crate::quality::{feasible_under_cap_scene, lift_capability_scene, LcNorm};

    #[test]
    fn fixture_meshes_are_watertight_and_sized() {
        for (name, mesh) in [
            ("box", box_mesh()),
            ("icosphere", icosphere_mesh()),
            ("capsule", capsule_mesh()),
        ] {
            mesh.check_watertight()
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            let n = mesh.vertex_count();
            assert!((300..800).contains(&n), "{name}: {n} vertices");
            assert!(mesh.signed_volume().unwrap() > 0.0, "{name} inverted");
        }
    }

    #[test]
    fn icosphere_centroid_is_origin() {
        let com = icosphere_mesh().center_of_mass().unwrap();
        assert!(com.coords.norm() <= 1e-9);
    }

    #[test]
    fn capsule_wall_face_normal_is_radial_at_x() {
        let mesh = capsule_mesh();
        let (binding, q) = mesh
            .closest_surface_point(&Point3::new(CAPSULE_RADIUS, 0.0, 0.0))
            .unwrap();
        let (_, inward) = mesh.eval_contact(&binding).unwrap();
        assert!(
            (inward.into_inner() - Vector3::new(-1.0, 0.0, 0.0)).norm() <= 1e-9,
            "normal {:?} at {q:?}",
            inward
        );
    }

    #[test]
    fn all_fixture_grasps_hold_at_the_cap() {
        for fixture in standard_fixtures().unwrap() {
            for (gname, grasp) in &fixture.grasps {
                let scene = GraspScene::from_mesh(&fixture.mesh, grasp).unwrap();
                let ok = feasible_under_cap_scene(&scene, 50.0, &scene.gravity().unwrap())
                    .unwrap_or_else(|e| panic!("{}/{gname}: {e}", fixture.name));
                assert!(ok, "{}/{gname} infeasible at 50 N", fixture.name);
            }
        }
    }

    #[test]
    fn box_two_finger_grasp_is_analytic() {
        let mesh = box_mesh();
        let grasp = snap_grasp(&mesh, &two_finger_points("box")).unwrap();
        let lift = lift_capability_scene(
            &GraspScene::from_mesh(&mesh, &grasp).unwrap(),
            LcNorm::MaxPerContact,
        )
        .unwrap();
        // flat faces and a centered centroid: f* = mg / (2 mu)
        let expected = 9.81 / 1.2;
        assert!((lift.min_max_normal_force - expected).abs() <= 1e-6);
    }
}
