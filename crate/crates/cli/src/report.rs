//! JSON report written by the `attack` command: the metric trace per round,
//! the evaluation protocols before and after, and a full config echo so the
//! run is reproducible from the report alone.

use serde::{Deserialize, Serialize};

use graspattack::attack::{AttackConfig, AttackReport, ObjectiveValue, RoundReport};
use graspattack::eval::EvalReport;

use crate::config::GraspConfigFile;

#[derive(Debug, Serialize, Deserialize)]
pub struct AttackReportFile {
    pub tool_version: String,
    pub seed: u64,
    pub mode: String,
    pub attack: AttackConfig,
    pub grasp: GraspConfigFile,
    pub initial: ObjectiveValue,
    pub rounds: Vec<RoundReport>,
    #[serde(rename = "final")]
    pub final_components: ObjectiveValue,
    pub evaluation_before: EvalReport,
    pub evaluation_after: EvalReport,
}

impl AttackReportFile {
    pub fn new(
        attack: AttackConfig,
        grasp_echo: GraspConfigFile,
        report: AttackReport,
        evaluation_before: EvalReport,
        evaluation_after: EvalReport,
    ) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: attack.seed,
            mode: attack.mode.as_str().to_string(),
            attack,
            grasp: grasp_echo,
            initial: report.initial,
            rounds: report.rounds,
            final_components: report.final_components,
            evaluation_before,
            evaluation_after,
        }
    }
}
