//! The adversarial shape optimizer: simulated annealing over cage
//! control-point displacements, run over a multi-resolution cage schedule.
//!
//! Each round builds a cage at the current resolution, perturbs one control
//! point at a time, and accepts candidates by the Metropolis rule on the
//! objective
//!
//! ```text
//! E = LC + lambda1 * GS_signed + lambda2 * Lap
//! ```
//!
//! with the LC or GS term dropped in the single-target modes. The signed
//! stability margin (not its clamped value) feeds the objective so the
//! search keeps a gradient after force closure is broken. After a round the
//! cage size halves and the best mesh so far becomes the next base mesh.

use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cage::{build_cage, CageError, CageRig};
use crate::grasp::{GraspConfig, GraspError, GraspScene};
use crate::mesh::TriangleMesh;
use crate::quality::{grasp_stability_scene, lift_capability_scene, LcNorm, StabilityOptions};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error(transparent)]
    Grasp(#[from] GraspError),
    #[error(transparent)]
    Cage(#[from] CageError),
    #[error("invalid attack config: {0}")]
    InvalidConfig(String),
}

/// Which terms enter the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackMode {
    /// Lift capability only.
    Alc,
    /// Grasp stability only.
    Ags,
    /// Both metrics together.
    #[serde(rename = "advgrasp")]
    AdvGrasp,
}

impl AttackMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttackMode::Alc => "alc",
            AttackMode::Ags => "ags",
            AttackMode::AdvGrasp => "advgrasp",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackConfig {
    pub mode: AttackMode,
    /// Weight on the signed stability margin.
    pub lambda1: f64,
    /// Weight on the Laplacian smoothness term.
    pub lambda2: f64,
    /// Initial annealing temperature.
    pub t0: f64,
    /// Temperature at which a round stops.
    pub t_min: f64,
    /// Cooling rate per step.
    pub alpha: f64,
    /// Cage grid spacing of the first round (m); halves each round.
    pub cage_size0: f64,
    pub rounds: usize,
    /// Proposal amplitude as a fraction of the current cage size.
    pub perturb_scale: f64,
    /// Proposals evaluated per temperature step.
    pub proposals_per_step: usize,
    /// Cage inflation per side, as a fraction of the extent.
    pub cage_inflation: f64,
    pub seed: u64,
    pub lc_norm: LcNorm,
    pub stability: StabilityOptions,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            mode: AttackMode::AdvGrasp,
            lambda1: 10_000.0,
            lambda2: 50.0,
            t0: 1000.0,
            t_min: 1e-5,
            alpha: 0.98,
            cage_size0: 0.04,
            rounds: 5,
            perturb_scale: 0.05,
            proposals_per_step: 1,
            cage_inflation: 0.05,
            seed: 0,
            lc_norm: LcNorm::MaxPerContact,
            stability: StabilityOptions::default(),
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<(), AttackError> {
        if self.alpha <= 0.0 || self.alpha >= 1.0 || !self.alpha.is_finite() {
            return Err(AttackError::InvalidConfig(format!(
                "alpha {} must be in (0, 1)",
                self.alpha
            )));
        }
        if self.t_min <= 0.0
            || self.t_min >= self.t0
            || !self.t_min.is_finite()
            || !self.t0.is_finite()
        {
            return Err(AttackError::InvalidConfig(format!(
                "need 0 < t_min < t0, got t_min {} t0 {}",
                self.t_min, self.t0
            )));
        }
        if self.rounds < 1 {
            return Err(AttackError::InvalidConfig("rounds must be >= 1".into()));
        }
        if self.perturb_scale <= 0.0 || !self.perturb_scale.is_finite() {
            return Err(AttackError::InvalidConfig(format!(
                "perturb_scale {} must be positive",
                self.perturb_scale
            )));
        }
        if self.proposals_per_step < 1 {
            return Err(AttackError::InvalidConfig(
                "proposals_per_step must be >= 1".into(),
            ));
        }
        if !(self.cage_size0 > 0.0 && self.cage_inflation > 0.0) {
            return Err(AttackError::InvalidConfig(
                "cage size and inflation must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Objective value with its components. `gs_signed` is what enters the
/// energy; `gs_value` is the clamped metric for reporting.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub energy: f64,
    pub lc: f64,
    pub gs_signed: f64,
    pub gs_value: f64,
    pub lap: f64,
    /// Set when the lift program was infeasible; the LC term is then 0
    /// (the grasp already cannot lift, the best state for the attacker).
    pub lc_infeasible: bool,
}

/// Energy combination per mode.
pub fn combine_energy(
    mode: AttackMode,
    lc: f64,
    gs_signed: f64,
    lap: f64,
    lambda1: f64,
    lambda2: f64,
) -> f64 {
    match mode {
        AttackMode::Alc => lc + lambda2 * lap,
        AttackMode::Ags => lambda1 * gs_signed + lambda2 * lap,
        AttackMode::AdvGrasp => lc + lambda1 * gs_signed + lambda2 * lap,
    }
}

/// Evaluates the attack objective on a mesh.
pub fn objective(
    mesh: &TriangleMesh,
    grasp: &GraspConfig,
    config: &AttackConfig,
) -> Result<ObjectiveValue, AttackError> {
    let scene = GraspScene::from_mesh(mesh, grasp)?;
    let lift = lift_capability_scene(&scene, config.lc_norm)?;
    let lc = if lift.feasible { lift.lc_value } else { 0.0 };
    let margin = grasp_stability_scene(&scene, &config.stability);
    let lap = mesh.laplacian_energy().map_err(GraspError::from)?;
    let energy = combine_energy(
        config.mode,
        lc,
        margin.signed_margin,
        lap,
        config.lambda1,
        config.lambda2,
    );
    Ok(ObjectiveValue {
        energy,
        lc,
        gs_signed: margin.signed_margin,
        gs_value: margin.gs_value,
        lap,
        lc_infeasible: !lift.feasible,
    })
}

/// Uniform single-point proposal: a control point index and a displacement
/// delta drawn from `[-eps, eps]^3` with `eps = perturb_scale * cage_size`.
pub fn propose(rig: &CageRig, perturb_scale: f64, rng: &mut impl Rng) -> (usize, Vector3<f64>) {
    let eps = perturb_scale * rig.cage_size();
    let index = rng.random_range(0..rig.control_point_count());
    let delta = Vector3::new(
        rng.random_range(-eps..=eps),
        rng.random_range(-eps..=eps),
        rng.random_range(-eps..=eps),
    );
    (index, delta)
}

/// Metropolis acceptance: downhill always, uphill with `exp(-dE/T)`.
pub fn accept(delta_e: f64, temperature: f64, rng: &mut impl Rng) -> bool {
    delta_e <= 0.0 || rng.random::<f64>() < (-delta_e / temperature).exp()
}

/// Optimizer state of one annealing round.
///
/// Invariants: `best_energy <= current_energy` at all times, and
/// `best_energy` never increases over a round.
#[derive(Debug, Clone)]
pub struct AttackState {
    pub displacements: Vec<Vector3<f64>>,
    pub temperature: f64,
    pub current_energy: f64,
    pub best_energy: f64,
    pub best_mesh: TriangleMesh,
}

/// Per-round record: schedule data plus the metric components of the round's
/// best mesh. `best_energy == combine_energy(mode, lc, gs_signed, lap, ..)`
/// for that mesh.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub cage_size: f64,
    pub control_points: usize,
    pub steps: usize,
    pub accepted: usize,
    pub initial_energy: f64,
    pub best_energy: f64,
    pub best: ObjectiveValue,
    /// Populated when a metric failure stopped the round early; the round
    /// still returns the best mesh found so far.
    pub aborted: Option<String>,
}

pub struct RoundOutcome {
    pub best_mesh: TriangleMesh,
    pub report: RoundReport,
}

/// One annealing round at a fixed cage resolution.
pub fn anneal_round(
    mesh: &TriangleMesh,
    grasp: &GraspConfig,
    config: &AttackConfig,
    round: usize,
    cage_size: f64,
    rng: &mut impl Rng,
) -> Result<RoundOutcome, AttackError> {
    let rig = build_cage(mesh, cage_size, config.cage_inflation)?;
    let initial = objective(mesh, grasp, config)?;

    let mut state = AttackState {
        displacements: vec![Vector3::zeros(); rig.control_point_count()],
        temperature: config.t0,
        current_energy: initial.energy,
        best_energy: initial.energy,
        best_mesh: mesh.clone(),
    };
    let mut positions: Vec<_> = mesh.vertices().to_vec();
    let mut best = initial;
    let mut steps = 0usize;
    let mut accepted = 0usize;
    let mut aborted = None;

    'cooling: while state.temperature >= config.t_min {
        for _ in 0..config.proposals_per_step {
            let (index, delta) = propose(&rig, config.perturb_scale, rng);
            // single-point moves shift each vertex by its weight on that
            // control point; much cheaper than a full weight product
            let candidate_positions: Vec<_> = positions
                .iter()
                .enumerate()
                .map(|(v, p)| p + rig.weights()[v][index] * delta)
                .collect();
            let candidate_mesh = match mesh.with_vertices(candidate_positions.clone()) {
                Ok(m) => m,
                Err(e) => {
                    aborted = Some(e.to_string());
                    break 'cooling;
                }
            };
            let value = match objective(&candidate_mesh, grasp, config) {
                Ok(v) => v,
                Err(e) => {
                    aborted = Some(e.to_string());
                    break 'cooling;
                }
            };
            let delta_e = value.energy - state.current_energy;
            if accept(delta_e, state.temperature, rng) {
                accepted += 1;
                state.displacements[index] += delta;
                positions = candidate_positions;
                state.current_energy = value.energy;
                if value.energy < state.best_energy {
                    state.best_energy = value.energy;
                    state.best_mesh = candidate_mesh;
                    best = value;
                }
            }
        }
        steps += 1;
        state.temperature *= config.alpha;
    }

    let report = RoundReport {
        round,
        cage_size,
        control_points: rig.control_point_count(),
        steps,
        accepted,
        initial_energy: initial.energy,
        best_energy: state.best_energy,
        best,
        aborted,
    };
    Ok(RoundOutcome {
        best_mesh: state.best_mesh,
        report,
    })
}

/// Full attack report: components of the original mesh, one record per
/// round, and the components of the final mesh.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackReport {
    pub initial: ObjectiveValue,
    pub rounds: Vec<RoundReport>,
    pub final_components: ObjectiveValue,
}

/// Runs the multi-resolution attack: `rounds` annealing rounds with the cage
/// size halved between rounds, each starting from the best mesh so far.
pub fn run_attack(
    mesh: &TriangleMesh,
    grasp: &GraspConfig,
    config: &AttackConfig,
) -> Result<(TriangleMesh, AttackReport), AttackError> {
    config.validate()?;
    grasp.validate(mesh)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let initial = objective(mesh, grasp, config)?;
    let mut current = mesh.clone();
    let mut rounds = Vec::with_capacity(config.rounds);
    for round in 0..config.rounds {
        let cage_size = config.cage_size0 / 2f64.powi(round as i32);
        let outcome = anneal_round(&current, grasp, config, round, cage_size, &mut rng)?;
        current = outcome.best_mesh;
        let stop = outcome.report.aborted.is_some();
        rounds.push(outcome.report);
        if stop {
            break;
        }
    }
    let final_components = objective(&current, grasp, config)?;
    let report = AttackReport {
        initial,
        rounds,
        final_components,
    };
    Ok((current, report))
}
