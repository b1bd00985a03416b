//! Contact wrench construction: linearized Coulomb friction cones,
//! soft-finger torsion, and the 6D primitive wrenches that feed both
//! grasp-quality metrics.
//!
//! A contact transmits a force inside the cone `|f_t| <= mu * |f_n|`,
//! linearized into `m` unit edge vectors, plus a torsional torque about the
//! contact normal bounded by `gamma * |f_n|`. Torques are taken about the
//! object centroid and multiplied by a length scale `1/rho` so the force and
//! torque blocks of a wrench are commensurate.

use nalgebra::{Point3, Unit, Vector3, Vector6};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Gravitational acceleration (m/s²), +z up.
pub const GRAVITY_ACCEL: f64 = 9.81;

#[derive(Debug, Error)]
pub enum ContactError {
    #[error("invalid friction parameters: {0}")]
    InvalidFriction(String),
    #[error("negative mass {0}")]
    NegativeMass(f64),
}

/// Sliding friction `mu`, torsional friction `gamma` (torque per unit normal
/// force, in meters), and the friction-cone linearization count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrictionParams {
    pub mu: f64,
    pub gamma: f64,
    pub cone_edges: usize,
}

impl FrictionParams {
    pub fn new(mu: f64, gamma: f64, cone_edges: usize) -> Result<Self, ContactError> {
        let params = Self {
            mu,
            gamma,
            cone_edges,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ContactError> {
        if self.mu <= 0.0 || !self.mu.is_finite() {
            return Err(ContactError::InvalidFriction(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        if self.gamma < 0.0 || !self.gamma.is_finite() {
            return Err(ContactError::InvalidFriction(format!(
                "gamma must be nonnegative, got {}",
                self.gamma
            )));
        }
        if self.cone_edges < 3 {
            return Err(ContactError::InvalidFriction(format!(
                "cone_edges must be at least 3, got {}",
                self.cone_edges
            )));
        }
        Ok(())
    }

    /// Normal component of every unit cone edge: `1 / sqrt(1 + mu^2)`.
    pub fn edge_normal_component(&self) -> f64 {
        1.0 / (1.0 + self.mu * self.mu).sqrt()
    }
}

impl Default for FrictionParams {
    fn default() -> Self {
        Self {
            mu: 0.6,
            gamma: 0.3,
            cone_edges: 8,
        }
    }
}

/// A force/torque pair. Torque components carry whatever scale the producer
/// applied; see [`WrenchPrimitiveSet::torque_scale`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub fn new(force: Vector3<f64>, torque: Vector3<f64>) -> Self {
        Self { force, torque }
    }

    pub fn zero() -> Self {
        Self {
            force: Vector3::zeros(),
            torque: Vector3::zeros(),
        }
    }

    pub fn to_vector6(&self) -> Vector6<f64> {
        Vector6::new(
            self.force.x,
            self.force.y,
            self.force.z,
            self.torque.x,
            self.torque.y,
            self.torque.z,
        )
    }

    pub fn from_vector6(v: Vector6<f64>) -> Self {
        Self {
            force: Vector3::new(v[0], v[1], v[2]),
            torque: Vector3::new(v[3], v[4], v[5]),
        }
    }

    pub fn norm(&self) -> f64 {
        self.to_vector6().norm()
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().all(|c| c.is_finite()) && self.torque.iter().all(|c| c.is_finite())
    }
}

/// Wrench of gravity acting at the centroid (the torque reference point),
/// so the torque block is zero.
pub fn gravity_wrench(mass_kg: f64) -> Result<Wrench, ContactError> {
    if mass_kg < 0.0 || !mass_kg.is_finite() {
        return Err(ContactError::NegativeMass(mass_kg));
    }
    Ok(Wrench::new(
        Vector3::new(0.0, 0.0, -GRAVITY_ACCEL * mass_kg),
        Vector3::zeros(),
    ))
}

/// Unit edge vectors of the linearized friction cone about `inward_normal`.
///
/// The first tangent is the projection of global -z onto the tangent plane,
/// so a force opposing gravity is representable exactly; when the normal is
/// parallel to z the first tangent falls back to the projection of +x.
pub fn cone_edges(
    inward_normal: &Unit<Vector3<f64>>,
    params: &FrictionParams,
) -> Vec<Vector3<f64>> {
    let n = inward_normal.into_inner();
    let t1 = {
        let down = Vector3::new(0.0, 0.0, -1.0);
        let proj = down - down.dot(&n) * n;
        if proj.norm() > 1e-9 {
            proj.normalize()
        } else {
            let x = Vector3::new(1.0, 0.0, 0.0);
            (x - x.dot(&n) * n).normalize()
        }
    };
    let t2 = n.cross(&t1);
    let m = params.cone_edges;
    let inv_len = params.edge_normal_component();
    (0..m)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            let tangent = theta.cos() * t1 + theta.sin() * t2;
            (n + params.mu * tangent) * inv_len
        })
        .collect()
}

/// Primitive wrenches of one contact at unit force magnitude.
///
/// For each cone edge `e` this emits the pair
/// `(e, s * ((c - z) x e ± gamma * (e·n) * n))`, the two torsion extremes of
/// the soft-finger model, so a contact contributes `2m` primitives.
pub fn contact_primitives(
    position: &Point3<f64>,
    inward_normal: &Unit<Vector3<f64>>,
    centroid: &Point3<f64>,
    params: &FrictionParams,
    torque_scale: f64,
) -> Vec<Wrench> {
    let n = inward_normal.into_inner();
    let arm = position - centroid;
    let edges = cone_edges(inward_normal, params);
    let mut primitives = Vec::with_capacity(2 * edges.len());
    for e in edges {
        let torsion = params.gamma * e.dot(&n);
        let base = arm.cross(&e);
        primitives.push(Wrench::new(e, torque_scale * (base + torsion * n)));
        primitives.push(Wrench::new(e, torque_scale * (base - torsion * n)));
    }
    primitives
}

/// The discretized contact wrenches of a whole grasp, all taken about the
/// same origin with the same torque scale.
#[derive(Debug, Clone)]
pub struct WrenchPrimitiveSet {
    pub primitives: Vec<Wrench>,
    /// Torque reference point (the object centroid).
    pub origin: Point3<f64>,
    /// 1/rho, with rho the largest vertex distance from the centroid (1/m).
    pub torque_scale: f64,
}

impl WrenchPrimitiveSet {
    pub fn new(origin: Point3<f64>, torque_scale: f64) -> Self {
        Self {
            primitives: Vec::new(),
            origin,
            torque_scale,
        }
    }

    pub fn push_contact(
        &mut self,
        position: &Point3<f64>,
        inward_normal: &Unit<Vector3<f64>>,
        params: &FrictionParams,
    ) {
        self.primitives.extend(contact_primitives(
            position,
            inward_normal,
            &self.origin,
            params,
            self.torque_scale,
        ));
    }

    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn to_points(&self) -> Vec<Vector6<f64>> {
        self.primitives.iter().map(Wrench::to_vector6).collect()
    }
}
