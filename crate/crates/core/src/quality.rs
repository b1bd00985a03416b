//! The two grasp-quality metrics.
//!
//! Lift capability solves the minimum-force equilibrium program: find
//! nonnegative cone-edge and torsion coefficients whose total wrench cancels
//! the external (gravity) wrench while minimizing the largest per-contact
//! normal force f*. The metric value is `|w_gravity| / f*` — large when the
//! grasp balances gravity cheaply, small when it must squeeze hard.
//!
//! Grasp stability is the origin-to-hull margin of the contact wrench
//! primitives, delegated to [`crate::margin`].

use nalgebra::{Point3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::contact::{cone_edges, FrictionParams, Wrench};
use crate::grasp::{GraspConfig, GraspError, GraspScene};
use crate::lp::{LinearProgram, LpError};
use crate::margin::{exact_hull_margin, signed_hull_margin, MAX_EXACT_PRIMITIVES};
pub use crate::margin::{MarginMethod, StabilityMargin};
use crate::mesh::TriangleMesh;

/// How per-contact normal forces are aggregated in the lift denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LcNorm {
    /// Largest per-contact normal force (matches per-finger force caps).
    #[default]
    MaxPerContact,
    /// Sum of per-contact normal forces.
    SumPerContact,
}

/// Result of the minimum-force equilibrium program.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftSolution {
    pub feasible: bool,
    /// Optimal aggregated normal force f* (N); infinite when infeasible.
    pub min_max_normal_force: f64,
    /// `|w_external| / f*`; 0 when infeasible.
    pub lc_value: f64,
    pub per_contact_forces: Vec<Vector3<f64>>,
    /// Torsional torque about each contact normal (N·m, unscaled).
    pub per_contact_torsions: Vec<f64>,
}

impl LiftSolution {
    fn infeasible() -> Self {
        Self {
            feasible: false,
            min_max_normal_force: f64::INFINITY,
            lc_value: 0.0,
            per_contact_forces: Vec::new(),
            per_contact_torsions: Vec::new(),
        }
    }
}

/// One contact's discretized force basis.
#[derive(Debug, Clone)]
pub struct ContactBasis {
    pub position: Point3<f64>,
    pub inward_normal: Unit<Vector3<f64>>,
    pub edges: Vec<Vector3<f64>>,
    /// Normal component of every unit edge.
    pub normal_component: f64,
}

impl ContactBasis {
    pub fn new(
        position: Point3<f64>,
        inward_normal: Unit<Vector3<f64>>,
        params: &FrictionParams,
    ) -> Self {
        Self {
            position,
            inward_normal,
            edges: cone_edges(&inward_normal, params),
            normal_component: params.edge_normal_component(),
        }
    }
}

/// Options for the stability-margin computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityOptions {
    pub directions: usize,
    pub refine_steps: usize,
    pub seed: u64,
    /// Use the exact facet-enumeration oracle when the primitive count
    /// permits it.
    pub exact: bool,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            directions: 8192,
            refine_steps: 200,
            seed: 0,
            exact: false,
        }
    }
}

struct LpLayout {
    num_contacts: usize,
    edges_per_contact: Vec<usize>,
    alpha_offsets: Vec<usize>,
    beta_offset: usize,
    t_col: Option<usize>,
    num_vars: usize,
}

impl LpLayout {
    fn new(bases: &[ContactBasis], with_t: bool) -> Self {
        let edges_per_contact: Vec<usize> = bases.iter().map(|b| b.edges.len()).collect();
        let mut alpha_offsets = Vec::with_capacity(bases.len());
        let mut off = 0;
        for &m in &edges_per_contact {
            alpha_offsets.push(off);
            off += m;
        }
        let beta_offset = off;
        let after_beta = beta_offset + 2 * bases.len();
        let (t_col, num_vars) = if with_t {
            (Some(after_beta), after_beta + 1)
        } else {
            (None, after_beta)
        };
        Self {
            num_contacts: bases.len(),
            edges_per_contact,
            alpha_offsets,
            beta_offset,
            t_col,
            num_vars,
        }
    }

    fn beta_plus(&self, i: usize) -> usize {
        self.beta_offset + 2 * i
    }

    fn beta_minus(&self, i: usize) -> usize {
        self.beta_offset + 2 * i + 1
    }
}

/// Builds the equilibrium rows and cone/torsion coupling shared by the
/// min-force and feasibility programs.
fn build_equilibrium_lp(
    bases: &[ContactBasis],
    gamma: f64,
    centroid: &Point3<f64>,
    torque_scale: f64,
    external: &Wrench,
    cap: Cap,
) -> (LinearProgram, LpLayout) {
    let with_t = matches!(cap, Cap::Minimize);
    let layout = LpLayout::new(bases, with_t);
    let mut lp = LinearProgram::new(layout.num_vars);

    // six equilibrium equalities: sum of contact wrenches = -external
    for row_idx in 0..6 {
        let mut row = vec![0.0; layout.num_vars];
        for (i, basis) in bases.iter().enumerate() {
            let arm = basis.position - centroid;
            let n = basis.inward_normal.into_inner();
            for (k, e) in basis.edges.iter().enumerate() {
                let coeff = if row_idx < 3 {
                    e[row_idx]
                } else {
                    torque_scale * arm.cross(e)[row_idx - 3]
                };
                row[layout.alpha_offsets[i] + k] = coeff;
            }
            if row_idx >= 3 {
                let t = torque_scale * n[row_idx - 3];
                row[layout.beta_plus(i)] = t;
                row[layout.beta_minus(i)] = -t;
            }
        }
        let rhs = if row_idx < 3 {
            -external.force[row_idx]
        } else {
            -torque_scale * external.torque[row_idx - 3]
        };
        lp.add_eq(row, rhs);
    }

    // per-contact normal-force rows and soft-finger torsion budget
    for (i, basis) in bases.iter().enumerate() {
        let kappa = basis.normal_component;

        let mut cap_row = vec![0.0; layout.num_vars];
        for k in 0..layout.edges_per_contact[i] {
            cap_row[layout.alpha_offsets[i] + k] = kappa;
        }
        match cap {
            Cap::Minimize => {
                cap_row[layout.t_col.unwrap()] = -1.0;
                lp.add_le(cap_row, 0.0);
            }
            Cap::Fixed(c) => lp.add_le(cap_row, c),
        }

        let mut torsion_row = vec![0.0; layout.num_vars];
        torsion_row[layout.beta_plus(i)] = 1.0;
        torsion_row[layout.beta_minus(i)] = 1.0;
        for k in 0..layout.edges_per_contact[i] {
            torsion_row[layout.alpha_offsets[i] + k] = -gamma * kappa;
        }
        lp.add_le(torsion_row, 0.0);
    }

    (lp, layout)
}

enum Cap {
    Minimize,
    Fixed(f64),
}

/// Minimum aggregated normal force balancing `external`, or infeasibility.
///
/// Numerical solver failures are reported as errors, distinct from a
/// genuinely unbalanceable wrench.
pub fn solve_min_force(
    bases: &[ContactBasis],
    gamma: f64,
    centroid: &Point3<f64>,
    torque_scale: f64,
    external: &Wrench,
    norm: LcNorm,
) -> Result<LiftSolution, LpError> {
    assert!(!bases.is_empty(), "need at least one contact");
    assert!(torque_scale > 0.0, "torque scale must be positive");
    let (mut lp, layout) = build_equilibrium_lp(
        bases,
        gamma,
        centroid,
        torque_scale,
        external,
        Cap::Minimize,
    );

    let mut objective = vec![0.0; layout.num_vars];
    match norm {
        LcNorm::MaxPerContact => objective[layout.t_col.unwrap()] = 1.0,
        LcNorm::SumPerContact => {
            for (i, basis) in bases.iter().enumerate() {
                for k in 0..layout.edges_per_contact[i] {
                    objective[layout.alpha_offsets[i] + k] = basis.normal_component;
                }
            }
        }
    }
    lp.set_objective(objective);

    let solution = match lp.solve() {
        Ok(s) => s,
        Err(LpError::Infeasible) => return Ok(LiftSolution::infeasible()),
        Err(e) => return Err(e),
    };

    // reassemble forces and re-verify the raw constraints
    let mut forces = Vec::with_capacity(layout.num_contacts);
    let mut torsions = Vec::with_capacity(layout.num_contacts);
    let mut normal_forces = Vec::with_capacity(layout.num_contacts);
    for (i, basis) in bases.iter().enumerate() {
        let mut f = Vector3::zeros();
        let mut fn_i = 0.0;
        for (k, e) in basis.edges.iter().enumerate() {
            let a = solution.x[layout.alpha_offsets[i] + k];
            f += a * e;
            fn_i += a * basis.normal_component;
        }
        forces.push(f);
        normal_forces.push(fn_i);
        torsions.push(solution.x[layout.beta_plus(i)] - solution.x[layout.beta_minus(i)]);
    }
    let f_star = match norm {
        LcNorm::MaxPerContact => normal_forces.iter().copied().fold(0.0, f64::max),
        LcNorm::SumPerContact => normal_forces.iter().sum(),
    };

    verify_equilibrium(
        bases,
        &forces,
        &torsions,
        centroid,
        torque_scale,
        external,
        gamma,
        &normal_forces,
    )?;

    let ext_norm = Wrench::new(external.force, torque_scale * external.torque).norm();
    let lc_value = if f_star > 1e-12 {
        ext_norm / f_star
    } else {
        0.0
    };
    Ok(LiftSolution {
        feasible: true,
        min_max_normal_force: f_star,
        lc_value,
        per_contact_forces: forces,
        per_contact_torsions: torsions,
    })
}

#[allow(clippy::too_many_arguments)]
fn verify_equilibrium(
    bases: &[ContactBasis],
    forces: &[Vector3<f64>],
    torsions: &[f64],
    centroid: &Point3<f64>,
    torque_scale: f64,
    external: &Wrench,
    gamma: f64,
    normal_forces: &[f64],
) -> Result<(), LpError> {
    let mut total_force = external.force;
    let mut total_torque = torque_scale * external.torque;
    for ((basis, f), tau) in bases.iter().zip(forces).zip(torsions) {
        let arm = basis.position - centroid;
        total_force += f;
        total_torque += torque_scale * (arm.cross(f) + *tau * basis.inward_normal.into_inner());
    }
    let scale = 1.0 + external.force.norm();
    let residual = (total_force.norm_squared() + total_torque.norm_squared()).sqrt();
    if residual > 1e-6 * scale {
        return Err(LpError::Numerical(format!(
            "equilibrium residual {residual:.3e}"
        )));
    }
    for ((basis, f), (tau, fn_i)) in bases
        .iter()
        .zip(forces)
        .zip(torsions.iter().zip(normal_forces))
    {
        let n = basis.inward_normal.into_inner();
        let normal_part = f.dot(&n);
        let tangential = (f - normal_part * n).norm();
        if normal_part < -1e-9 * scale || tangential > basis_mu(basis) * normal_part + 1e-9 * scale
        {
            return Err(LpError::Numerical("cone constraint violated".into()));
        }
        if tau.abs() > gamma * fn_i + 1e-9 * scale {
            return Err(LpError::Numerical("torsion bound violated".into()));
        }
    }
    Ok(())
}

fn basis_mu(basis: &ContactBasis) -> f64 {
    // edges satisfy |e_t| = mu * (e·n); recover mu from the stored component
    let kappa = basis.normal_component;
    (1.0 / (kappa * kappa) - 1.0).max(0.0).sqrt()
}

/// True when the equilibrium program admits a solution with every contact's
/// normal force below `cap`.
pub fn feasible_under_cap_scene(
    scene: &GraspScene,
    cap: f64,
    external: &Wrench,
) -> Result<bool, LpError> {
    assert!(cap >= 0.0, "cap must be nonnegative");
    let bases = scene_bases(scene);
    let (lp, _) = build_equilibrium_lp(
        &bases,
        scene.friction.gamma,
        &scene.centroid,
        scene.torque_scale,
        external,
        Cap::Fixed(cap),
    );
    match lp.solve() {
        Ok(_) => Ok(true),
        Err(LpError::Infeasible) => Ok(false),
        Err(e) => Err(e),
    }
}

pub fn feasible_under_cap(
    mesh: &TriangleMesh,
    config: &GraspConfig,
    cap: f64,
    external: &Wrench,
) -> Result<bool, GraspError> {
    let scene = GraspScene::from_mesh(mesh, config)?;
    Ok(feasible_under_cap_scene(&scene, cap, external)?)
}

fn scene_bases(scene: &GraspScene) -> Vec<ContactBasis> {
    scene
        .contacts
        .iter()
        .map(|c| ContactBasis::new(c.position, c.inward_normal, &scene.friction))
        .collect()
}

/// Lift capability of a resolved scene against its own gravity wrench.
pub fn lift_capability_scene(scene: &GraspScene, norm: LcNorm) -> Result<LiftSolution, GraspError> {
    let external = scene.gravity()?;
    let bases = scene_bases(scene);
    Ok(solve_min_force(
        &bases,
        scene.friction.gamma,
        &scene.centroid,
        scene.torque_scale,
        &external,
        norm,
    )?)
}

/// Lift capability of a grasp on a mesh: contacts and centroid are
/// evaluated on the current surface, then the minimum-force program runs.
pub fn lift_capability(
    mesh: &TriangleMesh,
    config: &GraspConfig,
) -> Result<LiftSolution, GraspError> {
    let scene = GraspScene::from_mesh(mesh, config)?;
    lift_capability_scene(&scene, LcNorm::MaxPerContact)
}

/// Stability margin of a resolved scene. Takes the exact route when asked
/// for and the primitive set is small enough, otherwise the sampled route.
pub fn grasp_stability_scene(scene: &GraspScene, options: &StabilityOptions) -> StabilityMargin {
    let primitives = scene.primitive_set();
    if options.exact && primitives.len() <= MAX_EXACT_PRIMITIVES {
        exact_hull_margin(&primitives.primitives).expect("count checked above")
    } else {
        signed_hull_margin(
            &primitives.primitives,
            options.directions,
            options.refine_steps,
            options.seed,
        )
    }
}

pub fn grasp_stability(
    mesh: &TriangleMesh,
    config: &GraspConfig,
    options: &StabilityOptions,
) -> Result<StabilityMargin, GraspError> {
    let scene = GraspScene::from_mesh(mesh, config)?;
    Ok(grasp_stability_scene(&scene, options))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{gravity_wrench, GRAVITY_ACCEL};
    use crate::grasp::Contact;
    use crate::testutil::antipodal_sphere_scene;
    use approx::assert_relative_eq;

    /// Independent route to f*: bisection on the feasibility program.
    fn bisect_min_force(scene: &GraspScene, external: &Wrench) -> Option<f64> {
        let mut lo = 0.0;
        let mut hi = 1e4;
        if !feasible_under_cap_scene(scene, hi, external).unwrap() {
            return None;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if feasible_under_cap_scene(scene, mid, external).unwrap() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }

    #[test]
    fn antipodal_sphere_min_force() {
        let scene = antipodal_sphere_scene(0.6, 0.3, 1.0);
        let lift = lift_capability_scene(&scene, LcNorm::MaxPerContact).unwrap();
        assert!(lift.feasible);
        // squeeze force mg / (2 mu)
        let expected = GRAVITY_ACCEL / (2.0 * 0.6);
        assert_relative_eq!(lift.min_max_normal_force, expected, epsilon = 1e-9);
        assert_relative_eq!(lift.lc_value, 1.2, epsilon = 1e-9);

        let oracle = bisect_min_force(&scene, &scene.gravity().unwrap()).unwrap();
        assert!((oracle - lift.min_max_normal_force).abs() <= 1e-6);
    }

    #[test]
    fn zero_external_needs_no_force() {
        let scene = antipodal_sphere_scene(0.6, 0.3, 1.0);
        let bases = scene_bases(&scene);
        let lift = solve_min_force(
            &bases,
            scene.friction.gamma,
            &scene.centroid,
            scene.torque_scale,
            &Wrench::zero(),
            LcNorm::MaxPerContact,
        )
        .unwrap();
        assert!(lift.feasible);
        assert!(lift.min_max_normal_force.abs() <= 1e-9);
    }

    #[test]
    fn single_sideways_contact_cannot_balance_gravity() {
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
        let lift = lift_capability_scene(&scene, LcNorm::MaxPerContact).unwrap();
        assert!(!lift.feasible);
        assert_eq!(lift.lc_value, 0.0);

        // oracle: projected-gradient least squares over nonnegative
        // coefficients never drives the residual to zero
        let prims = scene.primitive_set();
        let pts: Vec<_> = prims.to_points();
        let target = {
            let g = gravity_wrench(1.0).unwrap();
            -Wrench::new(g.force, scene.torque_scale * g.torque).to_vector6()
        };
        let mut coeffs = vec![0.0f64; pts.len()];
        let mut residual_norm = f64::INFINITY;
        for _ in 0..20_000 {
            let mut r = -target;
            for (c, p) in coeffs.iter().zip(&pts) {
                r += *c * *p;
            }
            residual_norm = r.norm();
            for (c, p) in coeffs.iter_mut().zip(&pts) {
                *c = (*c - 1e-3 * r.dot(p)).max(0.0);
            }
        }
        assert!(
            residual_norm > 1.0,
            "oracle found a near-balance: {residual_norm}"
        );
    }

    #[test]
    fn doubling_mass_doubles_force_keeps_lc() {
        let one = lift_capability_scene(
            &antipodal_sphere_scene(0.6, 0.3, 1.0),
            LcNorm::MaxPerContact,
        )
        .unwrap();
        let two = lift_capability_scene(
            &antipodal_sphere_scene(0.6, 0.3, 2.0),
            LcNorm::MaxPerContact,
        )
        .unwrap();
        assert_relative_eq!(
            two.min_max_normal_force,
            2.0 * one.min_max_normal_force,
            epsilon = 1e-8
        );
        assert_relative_eq!(two.lc_value, one.lc_value, epsilon = 1e-9);
    }

    #[test]
    fn f_star_monotone_in_mu() {
        let mut prev = f64::INFINITY;
        for mu in [0.3, 0.45, 0.6, 0.9] {
            let lift =
                lift_capability_scene(&antipodal_sphere_scene(mu, 0.3, 1.0), LcNorm::MaxPerContact)
                    .unwrap();
            assert!(lift.min_max_normal_force <= prev + 1e-9);
            prev = lift.min_max_normal_force;
        }
    }

    #[test]
    fn centroid_shift_along_grasp_axis_raises_f_star() {
        // with the centroid moved by delta along the grasp axis the optimal
        // squeeze grows to mg (R + delta) / (2 R mu)
        let mut scene = antipodal_sphere_scene(0.6, 0.3, 1.0);
        scene.centroid = Point3::new(-0.1, 0.0, 0.0);
        let lift = lift_capability_scene(&scene, LcNorm::MaxPerContact).unwrap();
        let expected = GRAVITY_ACCEL * 1.1 / (2.0 * 0.6);
        assert_relative_eq!(lift.min_max_normal_force, expected, epsilon = 1e-8);
        assert!(lift.lc_value < 1.2);
    }

    #[test]
    fn bulging_the_mesh_away_from_the_grasp_axis_raises_f_star() {
        use crate::fixtures::{icosphere, snap_grasp};
        use crate::grasp::GraspScene;

        // icosphere grasped across x; a smooth outward bulge around the
        // (1,0,1) direction drags the centroid along the grasp axis, which
        // is the attack's lift-degradation mechanism
        let mesh = icosphere(1.0, 2);
        let grasp = snap_grasp(
            &mesh,
            &[Point3::new(1.0, 0.0, 0.0), Point3::new(-1.0, 0.0, 0.0)],
        )
        .unwrap();
        let before = lift_capability_scene(
            &GraspScene::from_mesh(&mesh, &grasp).unwrap(),
            LcNorm::MaxPerContact,
        )
        .unwrap();

        let hot = Vector3::new(1.0, 0.0, 1.0).normalize();
        let bulged = mesh
            .with_vertices(
                mesh.vertices()
                    .iter()
                    .map(|p| {
                        let d = p.coords.normalize();
                        let w = ((d.dot(&hot) - 0.7).max(0.0) / 0.3).powi(2);
                        Point3::from(p.coords * (1.0 + 0.35 * w))
                    })
                    .collect(),
            )
            .unwrap();
        let scene_after = GraspScene::from_mesh(&bulged, &grasp).unwrap();
        assert!(scene_after.centroid.x > 1e-3, "centroid moved along x");
        let after = lift_capability_scene(&scene_after, LcNorm::MaxPerContact).unwrap();
        assert!(
            after.min_max_normal_force > before.min_max_normal_force + 1e-3,
            "{} !> {}",
            after.min_max_normal_force,
            before.min_max_normal_force
        );
    }

    #[test]
    fn feasibility_brackets_f_star() {
        let scene = antipodal_sphere_scene(0.6, 0.3, 1.0);
        let g = scene.gravity().unwrap();
        assert!(feasible_under_cap_scene(&scene, 10.0, &g).unwrap());
        assert!(!feasible_under_cap_scene(&scene, 8.0, &g).unwrap());
        assert!(!feasible_under_cap_scene(&scene, 0.0, &g).unwrap());
    }

    #[test]
    fn lift_invariant_under_scene_translation() {
        let scene = antipodal_sphere_scene(0.6, 0.3, 1.0);
        let t = Vector3::new(3.0, -2.0, 1.5);
        let mut moved = scene.clone();
        for c in &mut moved.contacts {
            c.position += t;
        }
        moved.centroid += t;
        let a = lift_capability_scene(&scene, LcNorm::MaxPerContact).unwrap();
        let b = lift_capability_scene(&moved, LcNorm::MaxPerContact).unwrap();
        assert_relative_eq!(a.lc_value, b.lc_value, epsilon = 1e-9);
    }

    #[test]
    fn l1_norm_route() {
        let scene = antipodal_sphere_scene(0.6, 0.3, 1.0);
        let lift = lift_capability_scene(&scene, LcNorm::MaxPerContact).unwrap();
        let bases = scene_bases(&scene);
        let l1 = solve_min_force(
            &bases,
            scene.friction.gamma,
            &scene.centroid,
            scene.torque_scale,
            &scene.gravity().unwrap(),
            LcNorm::SumPerContact,
        )
        .unwrap();
        // symmetric grasp: the L1 optimum is twice the per-contact optimum
        assert_relative_eq!(
            l1.min_max_normal_force,
            2.0 * lift.min_max_normal_force,
            epsilon = 1e-8
        );
    }

    #[test]
    fn stability_of_antipodal_grasp_is_positive() {
        let scene = antipodal_sphere_scene(0.6, 0.3, 1.0);
        let opts = StabilityOptions {
            exact: true,
            ..Default::default()
        };
        let margin = grasp_stability_scene(&scene, &opts);
        assert_eq!(margin.method, MarginMethod::Exact);
        assert!(!margin.degenerate);
        assert!(margin.signed_margin > 0.0);

        let sampled = grasp_stability_scene(&scene, &StabilityOptions::default());
        assert!(sampled.signed_margin >= margin.signed_margin - 1e-9);
        let rel = (sampled.signed_margin - margin.signed_margin) / margin.signed_margin;
        assert!(
            rel <= 0.05,
            "sampled {} exact {}",
            sampled.signed_margin,
            margin.signed_margin
        );
    }

    #[test]
    fn single_contact_has_no_closure() {
        let scene = GraspScene::analytic(
            vec![Contact {
                position: Point3::new(1.0, 0.0, 0.0),
                inward_normal: Unit::new_normalize(Vector3::new(-1.0, 0.0, 0.0)),
            }],
            FrictionParams::default(),
            1.0,
            50.0,
            Point3::origin(),
            1.0,
        );
        let opts = StabilityOptions {
            exact: true,
            ..Default::default()
        };
        let margin = grasp_stability_scene(&scene, &opts);
        assert_eq!(margin.gs_value, 0.0);
    }

    #[test]
    fn extra_contact_never_hurts_stability() {
        // small cone count keeps the union under the exact-oracle bound
        let friction = FrictionParams::new(0.6, 0.3, 4).unwrap();
        let two = GraspScene::analytic(
            vec![
                Contact {
                    position: Point3::new(1.0, 0.0, 0.0),
                    inward_normal: Unit::new_normalize(Vector3::new(-1.0, 0.0, 0.0)),
                },
                Contact {
                    position: Point3::new(-1.0, 0.0, 0.0),
                    inward_normal: Unit::new_normalize(Vector3::new(1.0, 0.0, 0.0)),
                },
            ],
            friction,
            1.0,
            50.0,
            Point3::origin(),
            1.0,
        );
        let mut three = two.clone();
        three.contacts.push(Contact {
            position: Point3::new(0.0, 1.0, 0.0),
            inward_normal: Unit::new_normalize(Vector3::new(0.0, -1.0, 0.0)),
        });
        let opts = StabilityOptions {
            exact: true,
            ..Default::default()
        };
        let m2 = grasp_stability_scene(&two, &opts);
        let m3 = grasp_stability_scene(&three, &opts);
        assert!(m3.signed_margin >= m2.signed_margin - 1e-9);
    }

    #[test]
    fn duality_gap_is_tight_on_the_fixture() {
        let scene = antipodal_sphere_scene(0.6, 0.3, 1.0);
        let bases = scene_bases(&scene);
        let external = scene.gravity().unwrap();
        let (mut lp, layout) = build_equilibrium_lp(
            &bases,
            scene.friction.gamma,
            &scene.centroid,
            scene.torque_scale,
            &external,
            Cap::Minimize,
        );
        let mut objective = vec![0.0; layout.num_vars];
        objective[layout.t_col.unwrap()] = 1.0;
        lp.set_objective(objective);
        let s = lp.solve().unwrap();
        let duals = s.duals.expect("no redundant rows expected");
        // b·y for this LP: only the equality rhs is nonzero
        let g = -external.force[2];
        let b_dot_y = duals[2] * g;
        assert!((s.objective - b_dot_y).abs() <= 1e-8 * (1.0 + s.objective.abs()));
    }
}
