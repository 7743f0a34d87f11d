use std::path::PathBuf;
use std::process::ExitCode;

use axode_cli::dataset::{load_dataset, VisionSource};
use axode_cli::output::{resolve, write};
use axode_cli::{eval, extract, plot, synth, CliError, Result};
use axode_core::features::FeatureSet;
use axode_core::pose_io::ColumnMap;
use axode_core::synth::SequenceOptions;
use axode_recognizer::Profile;
use clap::{Parser, Subcommand};

/// Screw-axis motion invariants and gesture recognition for surgical tool
/// kinematics. Relative output paths are resolved under $AXODE_OUT when set.
#[derive(Parser)]
#[command(name = "axode", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-frame curvature and torsion from a kinematics file.
    Extract {
        #[arg(long)]
        kinematics: PathBuf,
        #[arg(long)]
        column_map: Option<PathBuf>,
        /// Resampled striction-curve length (default: number of usable screws).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Leave-one-user-out evaluation on a dataset directory.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        /// p | p,q | p,k,t | p,q,k,t
        #[arg(long, default_value = "p,k,t")]
        features: String,
        /// desk | paper
        #[arg(long, default_value = "desk")]
        profile: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        column_map: Option<PathBuf>,
        /// Generate seeded random vision features instead of reading vision/.
        #[arg(long)]
        synthetic_vision: bool,
        #[arg(long, default_value_t = 128)]
        vision_dim: usize,
        /// Score ground truth against itself (pipeline check, no training).
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        /// Run folds in parallel.
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render label ribbons and curvature traces as SVG.
    Plot {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Combined invariants CSV written by `extract`.
        #[arg(long)]
        curvature: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write synthetic data.
    Synth {
        #[command(subcommand)]
        kind: SynthKind,
    },
}

#[derive(Subcommand)]
enum SynthKind {
    /// Three-gesture benchmark dataset (3 users x 2 trials x 200 frames).
    Toy {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        vision_dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Kinematics file with a helical striction curve on both arms.
    Helix {
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 0.5)]
        b: f64,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0.02)]
        dtheta: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn column_map(path: Option<PathBuf>) -> Result<ColumnMap> {
    Ok(match path {
        Some(p) => ColumnMap::load(&p)?,
        None => ColumnMap::default(),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract {
            kinematics,
            column_map: map,
            samples,
            out,
        } => {
            let out = resolve(&out);
            let arms = extract::run(&kinematics, &column_map(map)?, samples, &out)?;
            for (name, arm) in ["left", "right"].iter().zip(&arms) {
                let k = &arm.series.per_frame_kappa;
                println!("{name}: {} frames, mean kappa {:.6}", k.len(), k.iter().sum::<f64>() / k.len() as f64);
            }
        }
        Command::Eval {
            dataset,
            features,
            profile,
            seed,
            column_map: map,
            synthetic_vision,
            vision_dim,
            oracle,
            epochs,
            parallel,
            out,
        } => {
            let features: FeatureSet = features.parse()?;
            let profile: Profile = profile.parse()?;
            let vision = VisionSource {
                synthetic: synthetic_vision,
                dim: vision_dim,
                seed,
            };
            let trials = load_dataset(&dataset, &column_map(map)?, &vision)?;
            let opts = eval::EvalOptions {
                features,
                profile,
                seed,
                epochs,
                oracle,
                parallel,
            };
            let report = eval::run_folds(&trials, &opts)?;
            let out = resolve(&out);
            eval::write_outputs(&report, &out)?;
            println!(
                "{} accuracy {:.1} edit {:.1} over {} folds",
                features.label(),
                report.mean_accuracy(),
                report.mean_edit(),
                report.folds.len()
            );
        }
        Command::Plot { pred, gt, curvature, out } => {
            let svg = plot::run(&pred, &gt, &curvature)?;
            write(&resolve(&out), svg)?;
        }
        Command::Synth { kind } => match kind {
            SynthKind::Toy { seed, vision_dim, out } => {
                let opts = SequenceOptions {
                    vision_dim,
                    ..Default::default()
                };
                let names = synth::write_toy(&resolve(&out), seed, &opts)?;
                println!("wrote {} trials", names.len());
            }
            SynthKind::Helix { a, b, n, dtheta, out } => {
                let (kappa, tau) = synth::write_helix(&resolve(&out), a, b, n, dtheta)?;
                println!("kappa {kappa} tau {tau}");
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &CliError) -> u8 {
    e.exit_code() as u8
}
