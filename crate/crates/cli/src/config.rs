//! On-disk grasp configuration.
//!
//! A config names the object mesh and the grasp: friction parameters, mass,
//! per-finger cap, and the contact list. Contacts come either pre-bound
//! (`face_index` + `barycentric`) or as raw positions with `"snap": true`,
//! which are projected to the nearest surface point on load and rewritten
//! to bound form. The echoed config therefore always round-trips.

use std::path::{Path, PathBuf};

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use graspattack::contact::FrictionParams;
use graspattack::grasp::{CentroidMode, GraspConfig};
use graspattack::mesh::{load_obj, ContactBinding, TriangleMesh};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraspConfigFile {
    /// Mesh path, relative to the config file's directory.
    pub object_path: String,
    #[serde(default = "defaults::mass")]
    pub mass_kg: f64,
    #[serde(default = "defaults::mu")]
    pub mu: f64,
    #[serde(default = "defaults::gamma")]
    pub gamma: f64,
    #[serde(default = "defaults::cone_edges")]
    pub cone_edges: usize,
    #[serde(default = "defaults::cap")]
    pub per_finger_cap_n: f64,
    pub contacts: Vec<ContactSpec>,
    #[serde(default)]
    pub centroid_mode: CentroidMode,
}

mod defaults {
    pub fn mass() -> f64 {
        1.0
    }
    pub fn mu() -> f64 {
        0.6
    }
    pub fn gamma() -> f64 {
        0.3
    }
    pub fn cone_edges() -> usize {
        8
    }
    pub fn cap() -> f64 {
        50.0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ContactSpec {
    Bound {
        face_index: usize,
        barycentric: [f64; 3],
    },
    Snap {
        position: [f64; 3],
        snap: bool,
    },
}

/// A config loaded from disk with its mesh and resolved grasp.
pub struct LoadedGrasp {
    pub mesh: TriangleMesh,
    pub grasp: GraspConfig,
    /// The config with snap contacts rewritten to bound form.
    pub echo: GraspConfigFile,
}

pub fn load_config(path: &Path) -> Result<LoadedGrasp, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let file: GraspConfigFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("malformed config {}: {e}", path.display())))?;
    resolve(file, path.parent().unwrap_or(Path::new(".")))
}

pub fn resolve(file: GraspConfigFile, base_dir: &Path) -> Result<LoadedGrasp, CliError> {
    let mesh_path: PathBuf = {
        let p = Path::new(&file.object_path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base_dir.join(p)
        }
    };
    let mesh = load_obj(&mesh_path)
        .map_err(|e| CliError::usage(format!("cannot load mesh {}: {e}", mesh_path.display())))?;

    let mut bindings = Vec::with_capacity(file.contacts.len());
    for (i, spec) in file.contacts.iter().enumerate() {
        let binding = match spec {
            ContactSpec::Bound {
                face_index,
                barycentric,
            } => ContactBinding::new(*face_index, *barycentric),
            ContactSpec::Snap { position, snap } => {
                if !snap {
                    return Err(CliError::usage(format!(
                        "contact {i}: position form requires \"snap\": true"
                    )));
                }
                let p = Point3::new(position[0], position[1], position[2]);
                let (binding, _) = mesh
                    .closest_surface_point(&p)
                    .map_err(|e| CliError::usage(format!("contact {i}: {e}")))?;
                binding
            }
        };
        bindings.push(binding);
    }

    let friction = FrictionParams::new(file.mu, file.gamma, file.cone_edges)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let grasp = GraspConfig {
        bindings: bindings.clone(),
        friction,
        mass_kg: file.mass_kg,
        per_finger_cap_n: file.per_finger_cap_n,
        centroid_mode: file.centroid_mode,
    };
    grasp
        .validate(&mesh)
        .map_err(|e| CliError::usage(e.to_string()))?;

    let echo = GraspConfigFile {
        contacts: bindings
            .iter()
            .map(|b| ContactSpec::Bound {
                face_index: b.face_index,
                barycentric: b.barycentric,
            })
            .collect(),
        ..file
    };
    Ok(LoadedGrasp { mesh, grasp, echo })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snap_contacts_are_rewritten_and_stable() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = graspattack::fixtures::box_mesh();
        graspattack::mesh::save_obj(&mesh, dir.path().join("box.obj")).unwrap();
        let file = GraspConfigFile {
            object_path: "box.obj".into(),
            mass_kg: 1.0,
            mu: 0.6,
            gamma: 0.3,
            cone_edges: 8,
            per_finger_cap_n: 50.0,
            contacts: vec![
                ContactSpec::Snap {
                    position: [0.025, 0.0, 0.0],
                    snap: true,
                },
                ContactSpec::Snap {
                    position: [-0.025, 0.0, 0.0],
                    snap: true,
                },
            ],
            centroid_mode: CentroidMode::Volume,
        };
        let loaded = resolve(file, dir.path()).unwrap();
        assert!(loaded
            .echo
            .contacts
            .iter()
            .all(|c| matches!(c, ContactSpec::Bound { .. })));

        // echo -> resolve again is the identity on the grasp
        let again = resolve(loaded.echo.clone(), dir.path()).unwrap();
        assert_eq!(again.grasp.bindings.len(), loaded.grasp.bindings.len());
        for (a, b) in again.grasp.bindings.iter().zip(&loaded.grasp.bindings) {
            assert_eq!(a.face_index, b.face_index);
            assert_eq!(a.barycentric, b.barycentric);
        }
    }
}
