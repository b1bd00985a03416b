//! Physics-based shape attacks on robotic grasps.
//!
//! Given a triangle mesh and a fixed grasp (contact points bound to the
//! surface), this crate computes two wrench-space quality metrics — the
//! lift capability of the grasp against gravity and the stability margin
//! of the grasp wrench hull — and searches, by simulated annealing over
//! cage control points, for a deformed mesh that degrades them.
//!
//! The main pieces:
//!
//! - [`mesh`]: triangle meshes, OBJ IO, centroid / Laplacian / contact queries
//! - [`contact`]: friction cones, soft-finger torsion, 6D wrench primitives
//! - [`lp`]: a dense two-phase simplex solver
//! - [`quality`]: the lift-capability LP and grasp-stability margin
//! - [`margin`]: origin-to-hull distances in 6D wrench space
//! - [`cage`]: cage construction and mean-value-coordinate deformation
//! - [`attack`]: the annealing optimizer and its objective modes
//! - [`eval`]: quasi-static grasp evaluation protocols
//! - [`fixtures`]: synthetic watertight test objects and grasps

pub mod attack;
pub mod cage;
pub mod contact;
pub mod eval;
pub mod fixtures;
pub mod grasp;
pub mod lp;
pub mod margin;
pub mod mesh;
pub mod quality;

#[cfg(test)]
pub(crate) mod testutil;

pub use attack::{run_attack, AttackConfig, AttackMode, AttackReport};
pub use cage::{apply_deformation, build_cage, CageRig};
pub use contact::{FrictionParams, Wrench, WrenchPrimitiveSet};
pub use eval::{evaluate_scene, EvalReport};
pub use grasp::{GraspConfig, GraspScene};
pub use mesh::{ContactBinding, TriangleMesh};
pub use quality::{LiftSolution, StabilityMargin, StabilityOptions};
