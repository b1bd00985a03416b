//! Grasp configurations and resolved grasp scenes.
//!
//! A [`GraspConfig`] stores contacts as surface bindings plus friction and
//! load parameters; resolving it against a mesh yields a [`GraspScene`] with
//! concrete contact positions and normals, the centroid used as torque
//! reference, and the torque normalization scale. Scenes can also be built
//! analytically for closed-form test cases.

use nalgebra::{Point3, Unit, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::{gravity_wrench, ContactError, FrictionParams, Wrench, WrenchPrimitiveSet};
use crate::lp::LpError;
use crate::mesh::{ContactBinding, MeshError, TriangleMesh};

#[derive(Debug, Error)]
pub enum GraspError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("invalid grasp config: {0}")]
    InvalidConfig(String),
}

/// Which centroid stands in for the center of mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentroidMode {
    /// Uniform-density volume centroid (signed tetrahedra). The default.
    #[default]
    Volume,
    /// Area-weighted surface centroid, for sensitivity studies.
    Surface,
}

/// A grasp held fixed during an attack: surface-bound contacts plus the
/// friction model, object mass, and the per-finger force cap used by the
/// evaluation protocols.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraspConfig {
    pub bindings: Vec<ContactBinding>,
    pub friction: FrictionParams,
    pub mass_kg: f64,
    pub per_finger_cap_n: f64,
    #[serde(default)]
    pub centroid_mode: CentroidMode,
}

impl GraspConfig {
    pub fn validate(&self, mesh: &TriangleMesh) -> Result<(), GraspError> {
        if self.bindings.is_empty() {
            return Err(GraspError::InvalidConfig("no contacts".into()));
        }
        for binding in &self.bindings {
            binding.validate(mesh)?;
        }
        self.friction.validate()?;
        if self.mass_kg < 0.0 || !self.mass_kg.is_finite() {
            return Err(GraspError::InvalidConfig(format!(
                "mass {} must be nonnegative",
                self.mass_kg
            )));
        }
        if self.per_finger_cap_n <= 0.0 || !self.per_finger_cap_n.is_finite() {
            return Err(GraspError::InvalidConfig(format!(
                "per-finger cap {} must be positive",
                self.per_finger_cap_n
            )));
        }
        Ok(())
    }
}

/// A contact resolved to a position and inward unit normal.
#[derive(Debug, Clone, Copy)]
pub struct Contact {
    pub position: Point3<f64>,
    pub inward_normal: Unit<Vector3<f64>>,
}

/// Everything the wrench metrics need, independent of how it was produced.
#[derive(Debug, Clone)]
pub struct GraspScene {
    pub contacts: Vec<Contact>,
    pub friction: FrictionParams,
    pub mass_kg: f64,
    pub per_finger_cap_n: f64,
    /// Torque reference point (the object's center of mass).
    pub centroid: Point3<f64>,
    /// 1/rho with rho the largest vertex distance from the centroid.
    pub torque_scale: f64,
}

impl GraspScene {
    /// Resolves a grasp against a mesh: evaluates contact bindings, computes
    /// the centroid, and sets the torque scale from the mesh extent.
    pub fn from_mesh(mesh: &TriangleMesh, config: &GraspConfig) -> Result<Self, GraspError> {
        config.validate(mesh)?;
        let centroid = match config.centroid_mode {
            CentroidMode::Volume => mesh.center_of_mass()?,
            CentroidMode::Surface => mesh.surface_centroid()?,
        };
        let rho = mesh.max_radius_about(&centroid);
        if rho < 1e-12 {
            return Err(GraspError::InvalidConfig(
                "mesh has no extent about its centroid".into(),
            ));
        }
        let contacts = config
            .bindings
            .iter()
            .map(|b| {
                mesh.eval_contact(b)
                    .map(|(position, inward_normal)| Contact {
                        position,
                        inward_normal,
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            contacts,
            friction: config.friction,
            mass_kg: config.mass_kg,
            per_finger_cap_n: config.per_finger_cap_n,
            centroid,
            torque_scale: 1.0 / rho,
        })
    }

    /// A scene with explicit contacts; used for analytic fixtures where the
    /// geometry is known in closed form.
    pub fn analytic(
        contacts: Vec<Contact>,
        friction: FrictionParams,
        mass_kg: f64,
        per_finger_cap_n: f64,
        centroid: Point3<f64>,
        torque_scale: f64,
    ) -> Self {
        Self {
            contacts,
            friction,
            mass_kg,
            per_finger_cap_n,
            centroid,
            torque_scale,
        }
    }

    pub fn with_mass(&self, mass_kg: f64) -> Self {
        let mut scene = self.clone();
        scene.mass_kg = mass_kg;
        scene
    }

    pub fn gravity(&self) -> Result<Wrench, ContactError> {
        gravity_wrench(self.mass_kg)
    }

    /// All contact primitives about the scene centroid.
    pub fn primitive_set(&self) -> WrenchPrimitiveSet {
        let mut set = WrenchPrimitiveSet::new(self.centroid, self.torque_scale);
        for c in &self.contacts {
            set.push_contact(&c.position, &c.inward_normal, &self.friction);
        }
        set
    }
}
