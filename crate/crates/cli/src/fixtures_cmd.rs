//! The `fixtures` command: writes the synthetic object set and its grasp
//! configs, then validates every grasp by reloading the written files and
//! checking LP feasibility at the 50 N cap.

use std::path::Path;

use graspattack::fixtures::{standard_fixtures, three_finger_points, two_finger_points};
use graspattack::grasp::GraspScene;
use graspattack::mesh::save_obj;
use graspattack::quality::feasible_under_cap_scene;

use crate::config::{load_config, ContactSpec, GraspConfigFile};
use crate::CliError;

pub fn write_fixtures(out_dir: &Path) -> Result<Vec<String>, CliError> {
    let meshes = out_dir.join("meshes");
    let configs = out_dir.join("configs");
    std::fs::create_dir_all(&meshes)
        .and_then(|_| std::fs::create_dir_all(&configs))
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut written = Vec::new();
    for fixture in standard_fixtures().map_err(CliError::from_core)? {
        let mesh_rel = format!("../meshes/{}.obj", fixture.name);
        save_obj(&fixture.mesh, meshes.join(format!("{}.obj", fixture.name)))
            .map_err(|e| CliError::usage(e.to_string()))?;

        for (grasp_name, grasp) in &fixture.grasps {
            let points: Vec<[f64; 3]> = if *grasp_name == "2c" {
                two_finger_points(fixture.name)
                    .iter()
                    .map(|p| [p.x, p.y, p.z])
                    .collect()
            } else {
                three_finger_points(fixture.name)
                    .iter()
                    .map(|p| [p.x, p.y, p.z])
                    .collect()
            };
            let file = GraspConfigFile {
                object_path: mesh_rel.clone(),
                mass_kg: grasp.mass_kg,
                mu: grasp.friction.mu,
                gamma: grasp.friction.gamma,
                cone_edges: grasp.friction.cone_edges,
                per_finger_cap_n: grasp.per_finger_cap_n,
                contacts: points
                    .into_iter()
                    .map(|position| ContactSpec::Snap {
                        position,
                        snap: true,
                    })
                    .collect(),
                centroid_mode: grasp.centroid_mode,
            };
            let config_path = configs.join(format!("{}_{grasp_name}.json", fixture.name));
            let text =
                serde_json::to_string_pretty(&file).map_err(|e| CliError::usage(e.to_string()))?;
            std::fs::write(&config_path, text).map_err(|e| {
                CliError::usage(format!("cannot write {}: {e}", config_path.display()))
            })?;

            // reload what we wrote and prove the grasp holds at the cap
            let loaded = load_config(&config_path)?;
            let scene =
                GraspScene::from_mesh(&loaded.mesh, &loaded.grasp).map_err(CliError::from_core)?;
            let gravity = scene
                .gravity()
                .map_err(|e| CliError::usage(e.to_string()))?;
            let ok = feasible_under_cap_scene(&scene, loaded.grasp.per_finger_cap_n, &gravity)
                .map_err(CliError::from_lp)?;
            if !ok {
                return Err(CliError::numerical(format!(
                    "generated grasp {} is infeasible at the cap",
                    config_path.display()
                )));
            }
            written.push(config_path.display().to_string());
        }
    }
    Ok(written)
}
