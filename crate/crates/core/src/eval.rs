//! Quasi-static grasp evaluation protocols.
//!
//! Mirrors the stepping protocols of the physical benchmarks — minimal grasp
//! force, maximal lifting mass, maximal all-direction external disturbance —
//! but replaces rigid-body slippage detection with wrench-equilibrium LP
//! feasibility: a configuration "holds" when the equilibrium program admits
//! a solution under the per-finger force cap. Step sizes and start values
//! follow the benchmark stepping (50 N down by 0.2 N; 1 kg up by 0.1 kg;
//! 1 N disturbance steps over 50 Fibonacci-sphere directions).

use nalgebra::{Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::contact::Wrench;
use crate::grasp::{GraspConfig, GraspError, GraspScene};
use crate::mesh::TriangleMesh;
use crate::quality::feasible_under_cap_scene;

/// Protocol constants.
pub const MINGF_START_N: f64 = 50.0;
pub const MINGF_STEP_N: f64 = 0.2;
pub const MAXLM_START_KG: f64 = 1.0;
pub const MAXLM_STEP_KG: f64 = 0.1;
pub const MAXED_DIRECTIONS: usize = 50;

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct EvalFlags {
    /// MinGF: even the 50 N start cap cannot hold the object.
    pub infeasible_at_max_force: bool,
    /// MaxLM: the 1 kg start mass is already infeasible under the cap.
    pub base_mass_infeasible: bool,
    /// MaxED: gravity alone is infeasible, so no disturbance is tolerated.
    pub gravity_infeasible: bool,
}

/// Results of the three protocols on one grasp.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub min_grasp_force: f64,
    pub max_lift_mass: f64,
    pub max_external_disturbance: f64,
    /// First disturbance magnitude (N) at which each direction fails.
    pub per_direction_break_force: Vec<f64>,
    pub flags: EvalFlags,
}

/// Deterministic Fibonacci-sphere direction set; all unit length, the first
/// one at the +z pole.
pub fn fibonacci_directions(count: usize) -> Vec<Unit<Vector3<f64>>> {
    assert!(count >= 1);
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * i as f64 / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = golden_angle * i as f64;
            Unit::new_normalize(Vector3::new(r * t.cos(), r * t.sin(), z))
        })
        .collect()
}

/// Minimal grasp force: steps the per-finger cap down from 50 N in 0.2 N
/// steps and returns the last cap that still balances gravity. Returns
/// (50, flagged) when even the start cap fails and 0 when the grasp is
/// feasible all the way down.
pub fn min_grasp_force(scene: &GraspScene) -> Result<(f64, bool), GraspError> {
    let gravity = scene.gravity()?;
    let mut last_feasible = None;
    for k in 0..=250u32 {
        // integer-derived caps: 50.0, 49.8, ... exactly representable steps
        let cap = f64::from(500 - 2 * k) / 10.0;
        if feasible_under_cap_scene(scene, cap, &gravity)? {
            last_feasible = Some(cap);
        } else {
            break;
        }
    }
    match last_feasible {
        Some(cap) => Ok((cap, false)),
        None => Ok((MINGF_START_N, true)),
    }
}

/// Maximal lifting mass under the configured per-finger cap: steps the mass
/// up from 1 kg by 0.1 kg and returns the last feasible mass. Returns
/// (0, flagged) when 1 kg is already infeasible.
pub fn max_lift_mass(scene: &GraspScene) -> Result<(f64, bool), GraspError> {
    let cap = scene.per_finger_cap_n;
    let mut last_feasible = None;
    // the equilibrium force scales with the mass, so the cap bounds the
    // reachable mass; 100000 steps is far beyond any feasible grasp
    for k in 0..100_000u32 {
        let mass = f64::from(10 + k) / 10.0;
        let with_mass = scene.with_mass(mass);
        let gravity = with_mass.gravity()?;
        if feasible_under_cap_scene(&with_mass, cap, &gravity)? {
            last_feasible = Some(mass);
        } else {
            break;
        }
    }
    match last_feasible {
        Some(mass) => Ok((mass, false)),
        None => Ok((0.0, true)),
    }
}

pub struct MaxEdResult {
    pub max_ed: f64,
    pub per_direction_break_force: Vec<f64>,
    pub gravity_infeasible: bool,
}

/// Maximal external disturbance: for each of 50 Fibonacci directions, finds
/// the smallest integer force (N) at which gravity plus the disturbance
/// becomes infeasible under the cap. The metric is the largest force every
/// direction survives: `min(break forces) - 1`.
pub fn max_external_disturbance(scene: &GraspScene) -> Result<MaxEdResult, GraspError> {
    let cap = scene.per_finger_cap_n;
    let gravity = scene.gravity()?;
    if !feasible_under_cap_scene(scene, cap, &gravity)? {
        return Ok(MaxEdResult {
            max_ed: 0.0,
            per_direction_break_force: vec![0.0; MAXED_DIRECTIONS],
            gravity_infeasible: true,
        });
    }
    // total transmissible force is bounded by the caps, so every direction
    // breaks by this ceiling
    let mu = scene.friction.mu;
    let capacity =
        scene.contacts.len() as f64 * cap * (1.0 + mu * mu).sqrt() + gravity.force.norm();
    let ceiling = capacity.ceil() as u32 + 2;

    let directions = fibonacci_directions(MAXED_DIRECTIONS);
    let mut breaks = Vec::with_capacity(directions.len());
    for d in &directions {
        let mut break_force = f64::from(ceiling);
        for f in 1..=ceiling {
            let external = Wrench::new(
                gravity.force + f64::from(f) * d.into_inner(),
                Vector3::zeros(),
            );
            if !feasible_under_cap_scene(scene, cap, &external)? {
                break_force = f64::from(f);
                break;
            }
        }
        breaks.push(break_force);
    }
    let max_ed = breaks.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    Ok(MaxEdResult {
        max_ed,
        per_direction_break_force: breaks,
        gravity_infeasible: false,
    })
}

/// Runs all three protocols on a resolved scene.
pub fn evaluate_scene(scene: &GraspScene) -> Result<EvalReport, GraspError> {
    let (min_force, infeasible_at_max_force) = min_grasp_force(scene)?;
    let (max_mass, base_mass_infeasible) = max_lift_mass(scene)?;
    let ed = max_external_disturbance(scene)?;
    Ok(EvalReport {
        min_grasp_force: min_force,
        max_lift_mass: max_mass,
        max_external_disturbance: ed.max_ed,
        per_direction_break_force: ed.per_direction_break_force,
        flags: EvalFlags {
            infeasible_at_max_force,
            base_mass_infeasible,
            gravity_infeasible: ed.gravity_infeasible,
        },
    })
}

/// Convenience wrapper resolving the grasp against a mesh first.
pub fn evaluate(mesh: &TriangleMesh, config: &GraspConfig) -> Result<EvalReport, GraspError> {
    let scene = GraspScene::from_mesh(mesh, config)?;
    evaluate_scene(&scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::FrictionParams;
    use crate::grasp::Contact;
    use crate::testutil::antipodal_sphere_scene;
    use nalgebra::Point3;

    #[test]
    fn fibonacci_directions_are_unit() {
        let dirs = fibonacci_directions(50);
        assert_eq!(dirs.len(), 50);
        for d in &dirs {
            assert!((d.norm() - 1.0).abs() <= 1e-12);
        }
        let single = fibonacci_directions(1);
        assert!((single[0].into_inner() - Vector3::new(0.0, 0.0, 1.0)).norm() <= 1e-12);
    }

    #[test]
    fn min_grasp_force_brackets_f_star() {
        // f* = 9.81 / 1.2 = 8.175, so stepping stops at 8.2
        let scene = antipodal_sphere_scene(0.6, 0.3, 1.0);
        let (force, flagged) = min_grasp_force(&scene).unwrap();
        assert!(!flagged);
        assert_eq!(force, 8.2);
    }

    #[test]
    fn min_grasp_force_halves_when_mu_doubles() {
        let scene = antipodal_sphere_scene(1.2, 0.3, 1.0);
        let (force, _) = min_grasp_force(&scene).unwrap();
        // f* = 9.81 / 2.4 = 4.0875 -> quantized to 4.2
        assert_eq!(force, 4.2);
        assert!((force - 8.2 / 2.0).abs() <= MINGF_STEP_N);
    }

    #[test]
    fn hopeless_grasp_is_flagged() {
        let scene = GraspScene::analytic(
            vec![Contact {
                position: Point3::new(1.0, 0.0, 0.0),
                inward_normal: Unit::new_normalize(Vector3::new(-1.0, 0.0, 0.0)),
            }],
            FrictionParams::new(0.6, 0.0, 8).unwrap(),
            1.0,
            50.0,
            Point3::origin(),
            1.0,
        );
        let (force, flagged) = min_grasp_force(&scene).unwrap();
        assert!(flagged);
        assert_eq!(force, MINGF_START_N);

        let (mass, mass_flagged) = max_lift_mass(&scene).unwrap();
        assert!(mass_flagged);
        assert_eq!(mass, 0.0);

        let ed = max_external_disturbance(&scene).unwrap();
        assert!(ed.gravity_infeasible);
        assert_eq!(ed.max_ed, 0.0);
    }

    #[test]
    fn max_lift_mass_on_the_sphere_fixture() {
        // feasibility bound: mass <= 50 * 2 * 0.6 / 9.81 = 6.116 kg -> 6.1
        let scene = antipodal_sphere_scene(0.6, 0.3, 1.0);
        let (mass, flagged) = max_lift_mass(&scene).unwrap();
        assert!(!flagged);
        assert_eq!(mass, 6.1);
    }

    #[test]
    fn halving_the_cap_halves_max_lift_mass() {
        let mut scene = antipodal_sphere_scene(0.6, 0.3, 1.0);
        scene.per_finger_cap_n = 25.0;
        let (mass, _) = max_lift_mass(&scene).unwrap();
        // bound 25 * 1.2 / 9.81 = 3.058 -> 3.0
        assert_eq!(mass, 3.0);
    }

    #[test]
    fn min_grasp_force_sits_within_one_step_of_f_star() {
        use crate::quality::{lift_capability_scene, LcNorm};
        for (mu, gamma, mass) in [(0.4, 0.2, 1.0), (0.6, 0.3, 1.5), (0.9, 0.1, 2.0)] {
            let scene = antipodal_sphere_scene(mu, gamma, mass);
            let lift = lift_capability_scene(&scene, LcNorm::MaxPerContact).unwrap();
            let (force, flagged) = min_grasp_force(&scene).unwrap();
            assert!(!flagged);
            assert!(force >= lift.min_max_normal_force - 1e-9);
            assert!(force - lift.min_max_normal_force < MINGF_STEP_N);
        }
    }

    #[test]
    fn disturbance_scales_with_cap_and_mass() {
        let base = antipodal_sphere_scene(0.6, 0.3, 1.0);
        let ed1 = max_external_disturbance(&base).unwrap();

        let mut doubled = antipodal_sphere_scene(0.6, 0.3, 2.0);
        doubled.per_finger_cap_n = 100.0;
        let ed2 = max_external_disturbance(&doubled).unwrap();
        assert!(
            (ed2.max_ed - 2.0 * ed1.max_ed).abs() <= 2.0 + 1e-9,
            "{} vs {}",
            ed2.max_ed,
            ed1.max_ed
        );
    }

    #[test]
    fn max_ed_monotone_in_mass() {
        let mut prev = f64::INFINITY;
        for mass in [1.0, 1.5, 2.0] {
            let scene = antipodal_sphere_scene(0.6, 0.3, mass);
            let ed = max_external_disturbance(&scene).unwrap();
            assert!(ed.max_ed <= prev + 1e-9);
            prev = ed.max_ed;
        }
    }

    #[test]
    fn break_forces_define_the_metric() {
        let scene = antipodal_sphere_scene(0.6, 0.3, 1.0);
        let ed = max_external_disturbance(&scene).unwrap();
        let min_break = ed
            .per_direction_break_force
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(ed.max_ed, min_break - 1.0);
        assert!(ed.max_ed >= 0.0);
    }

    #[test]
    fn disturbance_on_sphere_fixture_matches_golden_value() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/golden.json");
        let text = std::fs::read_to_string(path).unwrap();
        let golden: serde_json::Value = serde_json::from_str(&text).unwrap();

        let scene = antipodal_sphere_scene(0.6, 0.3, 1.0);
        let ed = max_external_disturbance(&scene).unwrap();
        assert_eq!(ed.max_ed, golden["sphere_2c_max_ed"].as_f64().unwrap());

        // direction 0 is straight up, where the bound is analytic: the
        // disturbance must exceed 2*mu*cap + mg = 69.81 N to break the grasp,
        // so the first infeasible integer step is 70 N
        assert_eq!(
            ed.per_direction_break_force[0],
            golden["sphere_2c_up_break_force"].as_f64().unwrap()
        );
        assert_eq!(ed.per_direction_break_force[0], 70.0);
    }

    #[test]
    fn weightless_object_needs_no_force() {
        let scene = antipodal_sphere_scene(0.6, 0.3, 0.0);
        let (force, flagged) = min_grasp_force(&scene).unwrap();
        assert!(!flagged);
        assert_eq!(force, 0.0);
    }

    #[test]
    fn max_lift_mass_monotone_in_mu() {
        let mut prev = 0.0;
        for mu in [0.3, 0.6, 0.9] {
            let scene = antipodal_sphere_scene(mu, 0.3, 1.0);
            let (mass, _) = max_lift_mass(&scene).unwrap();
            assert!(mass >= prev - 1e-9);
            prev = mass;
        }
    }
}
