//! `graspattack` — grasp quality analysis and adversarial shape attacks on
//! triangle meshes.
//!
//! Subcommands:
//! - `quality`: lift capability, stability margin, and the three evaluation
//!   protocols for a grasp config
//! - `attack`: deform the object to degrade the grasp; writes the
//!   adversarial OBJ and a JSON report
//! - `evaluate`: just the quasi-static evaluation protocols
//! - `fixtures`: generate the synthetic object/grasp set
//!
//! Exit status: 0 on success, 2 on usage/config errors, 3 on numerical
//! failures.

mod config;
mod fixtures_cmd;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use graspattack::attack::{run_attack, AttackConfig, AttackError, AttackMode};
use graspattack::eval::evaluate_scene;
use graspattack::grasp::{GraspError, GraspScene};
use graspattack::lp::LpError;
use graspattack::mesh::save_obj;
use graspattack::quality::{
    grasp_stability_scene, lift_capability_scene, LcNorm, StabilityOptions,
};

use config::load_config;
use report::AttackReportFile;

#[derive(Debug)]
pub struct CliError {
    message: String,
    exit: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            exit: 2,
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            exit: 3,
        }
    }

    pub fn from_lp(e: LpError) -> Self {
        match e {
            LpError::Infeasible => Self::usage(e.to_string()),
            _ => Self::numerical(e.to_string()),
        }
    }

    pub fn from_core(e: GraspError) -> Self {
        match e {
            GraspError::Lp(lp) => Self::from_lp(lp),
            other => Self::usage(other.to_string()),
        }
    }

    pub fn from_attack(e: AttackError) -> Self {
        match e {
            AttackError::Grasp(g) => Self::from_core(g),
            other => Self::usage(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "graspattack",
    version,
    about = "Grasp quality metrics and adversarial shape attacks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print lift capability, stability margin, and evaluation metrics.
    Quality {
        /// Grasp config JSON.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        stability: StabilityArgs,
    },
    /// Deform the object to degrade the grasp; write mesh and report.
    Attack {
        #[arg(long)]
        config: PathBuf,
        /// Objective mode.
        #[arg(long, value_parser = parse_mode, default_value = "advgrasp")]
        mode: AttackMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        rounds: usize,
        /// Initial cage grid spacing (m).
        #[arg(long, default_value_t = 0.04)]
        cage_size: f64,
        #[arg(long, default_value_t = 10_000.0)]
        lambda1: f64,
        #[arg(long, default_value_t = 50.0)]
        lambda2: f64,
        /// Initial annealing temperature.
        #[arg(long, default_value_t = 1000.0)]
        t0: f64,
        /// Stop temperature of each round.
        #[arg(long, default_value_t = 1e-5)]
        t_min: f64,
        /// Cooling rate per step.
        #[arg(long, default_value_t = 0.98)]
        alpha: f64,
        /// Adversarial mesh output path (OBJ).
        #[arg(long)]
        out: PathBuf,
        /// Report output path (JSON).
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        stability: StabilityArgs,
    },
    /// Run the quasi-static evaluation protocols only.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Optional JSON output for the evaluation report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate the synthetic fixture meshes and grasp configs.
    Fixtures {
        /// Output directory (meshes/ and configs/ are created below it).
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct StabilityArgs {
    /// Use the exact hull oracle when the primitive count permits.
    #[arg(long, default_value_t = false)]
    exact_gs: bool,
    /// Sampled directions for the stability margin.
    #[arg(long, default_value_t = 8192)]
    gs_directions: usize,
    /// Refinement steps for the stability margin.
    #[arg(long, default_value_t = 200)]
    gs_refine: usize,
}

impl StabilityArgs {
    fn to_options(&self) -> StabilityOptions {
        StabilityOptions {
            directions: self.gs_directions,
            refine_steps: self.gs_refine,
            seed: 0,
            exact: self.exact_gs,
        }
    }
}

fn parse_mode(s: &str) -> Result<AttackMode, String> {
    match s {
        "alc" => Ok(AttackMode::Alc),
        "ags" => Ok(AttackMode::Ags),
        "advgrasp" => Ok(AttackMode::AdvGrasp),
        other => Err(format!("unknown mode {other:?}; use alc, ags or advgrasp")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Quality { config, stability } => cmd_quality(&config, &stability),
        Command::Attack {
            config,
            mode,
            seed,
            rounds,
            cage_size,
            lambda1,
            lambda2,
            t0,
            t_min,
            alpha,
            out,
            report,
            stability,
        } => {
            let attack = AttackConfig {
                mode,
                lambda1,
                lambda2,
                t0,
                t_min,
                alpha,
                cage_size0: cage_size,
                rounds,
                seed,
                stability: stability.to_options(),
                ..Default::default()
            };
            cmd_attack(&config, attack, &out, &report)
        }
        Command::Evaluate { config, report } => cmd_evaluate(&config, report.as_deref()),
        Command::Fixtures { out } => {
            let written = fixtures_cmd::write_fixtures(&out)?;
            for path in written {
                println!("wrote {path}");
            }
            Ok(())
        }
    }
}

fn cmd_quality(config: &std::path::Path, stability: &StabilityArgs) -> Result<(), CliError> {
    let loaded = load_config(config)?;
    let scene = GraspScene::from_mesh(&loaded.mesh, &loaded.grasp).map_err(CliError::from_core)?;

    let lift = lift_capability_scene(&scene, LcNorm::MaxPerContact).map_err(CliError::from_core)?;
    let margin = grasp_stability_scene(&scene, &stability.to_options());
    let eval = evaluate_scene(&scene).map_err(CliError::from_core)?;

    if lift.feasible {
        println!("LC: {:.6}", lift.lc_value);
        println!("f*: {:.6} N", lift.min_max_normal_force);
    } else {
        println!("LC: 0.000000 (equilibrium infeasible)");
        println!("f*: inf");
    }
    println!(
        "GS: {:.6} (signed {:.6}, {})",
        margin.gs_value,
        margin.signed_margin,
        match margin.method {
            graspattack::margin::MarginMethod::Sampled => "sampled",
            graspattack::margin::MarginMethod::Exact => "exact",
        }
    );
    if margin.degenerate {
        println!("GS note: primitive set is rank-deficient");
    }
    println!(
        "MinGF: {:.1} N{}",
        eval.min_grasp_force,
        flag_note(eval.flags.infeasible_at_max_force)
    );
    println!(
        "MaxLM: {:.1} kg{}",
        eval.max_lift_mass,
        flag_note(eval.flags.base_mass_infeasible)
    );
    println!(
        "MaxED: {:.0} N{}",
        eval.max_external_disturbance,
        flag_note(eval.flags.gravity_infeasible)
    );
    Ok(())
}

fn flag_note(flagged: bool) -> &'static str {
    if flagged {
        " (infeasible)"
    } else {
        ""
    }
}

fn cmd_attack(
    config: &std::path::Path,
    attack: AttackConfig,
    out: &std::path::Path,
    report_path: &std::path::Path,
) -> Result<(), CliError> {
    let loaded = load_config(config)?;

    let scene_before =
        GraspScene::from_mesh(&loaded.mesh, &loaded.grasp).map_err(CliError::from_core)?;
    let eval_before = evaluate_scene(&scene_before).map_err(CliError::from_core)?;

    let (adversarial, attack_report) =
        run_attack(&loaded.mesh, &loaded.grasp, &attack).map_err(CliError::from_attack)?;

    let scene_after =
        GraspScene::from_mesh(&adversarial, &loaded.grasp).map_err(CliError::from_core)?;
    let eval_after = evaluate_scene(&scene_after).map_err(CliError::from_core)?;

    save_obj(&adversarial, out).map_err(|e| CliError::usage(e.to_string()))?;
    let file = AttackReportFile::new(attack, loaded.echo, attack_report, eval_before, eval_after);
    let text = serde_json::to_string_pretty(&file).map_err(|e| CliError::usage(e.to_string()))?;
    std::fs::write(report_path, text)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", report_path.display())))?;

    println!(
        "LC {:.4} -> {:.4}; GS(signed) {:.5} -> {:.5}; MinGF {:.1} -> {:.1} N",
        file.initial.lc,
        file.final_components.lc,
        file.initial.gs_signed,
        file.final_components.gs_signed,
        file.evaluation_before.min_grasp_force,
        file.evaluation_after.min_grasp_force,
    );
    println!("wrote {} and {}", out.display(), report_path.display());
    Ok(())
}

fn cmd_evaluate(
    config: &std::path::Path,
    report: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let loaded = load_config(config)?;
    let scene = GraspScene::from_mesh(&loaded.mesh, &loaded.grasp).map_err(CliError::from_core)?;
    let eval = evaluate_scene(&scene).map_err(CliError::from_core)?;

    println!(
        "MinGF: {:.1} N{}",
        eval.min_grasp_force,
        flag_note(eval.flags.infeasible_at_max_force)
    );
    println!(
        "MaxLM: {:.1} kg{}",
        eval.max_lift_mass,
        flag_note(eval.flags.base_mass_infeasible)
    );
    println!(
        "MaxED: {:.0} N{}",
        eval.max_external_disturbance,
        flag_note(eval.flags.gravity_infeasible)
    );
    println!(
        "break forces (N): {}",
        eval.per_direction_break_force
            .iter()
            .map(|f| format!("{f:.0}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    if let Some(path) = report {
        let text =
            serde_json::to_string_pretty(&eval).map_err(|e| CliError::usage(e.to_string()))?;
        std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
