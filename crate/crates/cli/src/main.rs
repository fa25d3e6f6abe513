//! CLI harness: train, eval, coverage, sweep, plot, selftest.
//!
//! Exit codes: 0 ok, 1 fault, 2 bad config.

use clap::{Args, Parser, Subcommand};
use mopa_core::config::RunConfig;
use mopa_core::plot;
use mopa_core::rollout::{coverage, evaluate_checkpoint, CoverageMap};
use mopa_core::sweep::{sweep, SweepAxis};
use mopa_core::train::{read_metrics, train, Checkpoint};
use mopa_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mopa", about = "Motion-planner augmented SAC on a planar pushing task")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// TOML config file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. --set mopa.rescale_threshold=1.0
    /// (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> mopa_core::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path, &self.overrides)?,
            None => RunConfig::from_defaults(&self.overrides)?,
        };
        // Environment override for the output directory.
        if let Ok(dir) = std::env::var("MOPA_OUTPUT_DIR") {
            if !dir.is_empty() {
                cfg.run.output_dir = PathBuf::from(dir);
            }
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train one run and stream per-episode metrics to CSV.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Print the effective TOML configuration and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Evaluate a checkpoint with the deterministic policy.
    Eval {
        /// Checkpoint file written by `train`.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Episode count; the checkpoint's eval_episodes when omitted.
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Measure exploration coverage of the end-effector workspace.
    Coverage {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Optional checkpoint; a fresh policy explores when omitted.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Primitive-step budget.
        #[arg(long, default_value_t = 20_000)]
        steps: usize,
        /// Grid cell size in meters.
        #[arg(long, default_value_t = 0.02)]
        cell: f64,
        /// Output CSV path (defaults to <output_dir>/coverage.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun training across values of one knob and tabulate the results.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Knob to vary: mp_range, rescale_threshold, or reuse_count.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Render SVG charts from metrics or coverage CSV files.
    Plot {
        /// curves, panels, or heatmap.
        #[arg(long, default_value = "curves")]
        kind: String,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
        /// Smoothing window for curves/panels.
        #[arg(long, default_value_t = 11)]
        window: usize,
        /// Input CSV files (metrics for curves/panels, coverage for heatmap).
        inputs: Vec<PathBuf>,
    },
    /// Run the property suites and report pass/fail per check.
    Selftest {
        /// Smaller sampling sizes for a fast smoke pass.
        #[arg(long)]
        quick: bool,
    },
}

fn label_for(path: &PathBuf) -> String {
    path.parent()
        .and_then(|p| p.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| path.display().to_string())
}

fn run() -> mopa_core::Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train { cfg, dump_config } => {
            let cfg = cfg.load()?;
            if dump_config {
                print!("{}", cfg.to_toml()?);
                return Ok(true);
            }
            let summary = train(&cfg)?;
            println!(
                "trained {} episodes / {} env steps / {} augmented steps (mode {})",
                summary.episodes, summary.env_steps, summary.augmented_steps, cfg.mopa.mode
            );
            println!(
                "transitions: {} main + {} reused; planner dispatches {} ({} failed)",
                summary.main_transitions,
                summary.reuse_transitions,
                summary.planner_dispatches,
                summary.planner_failures
            );
            println!("metrics: {}", summary.metrics_path.display());
            println!("checkpoint: {}", summary.final_checkpoint.display());
            Ok(true)
        }
        Command::Eval { checkpoint, episodes } => {
            let (report, cfg) = evaluate_checkpoint(&checkpoint, episodes)?;
            println!("mode: {}", cfg.mopa.mode);
            println!("episodes: {}", report.episodes.len());
            println!("success_rate: {:.3}", report.success_rate);
            println!("mean_return: {:.3}", report.mean_return);
            println!(
                "blocked-step collisions per episode (kinematic contact-force proxy): {:.2}",
                report.mean_collisions
            );
            match report.mean_collisions_successful {
                Some(v) => println!(
                    "blocked-step collisions per successful episode (proxy): {:.2}",
                    v
                ),
                None => println!("blocked-step collisions per successful episode (proxy): n/a (no successes)"),
            }
            Ok(true)
        }
        Command::Coverage { cfg, checkpoint, steps, cell, out } => {
            let cfg = cfg.load()?;
            let map = match checkpoint {
                Some(path) => {
                    let ckpt = Checkpoint::load(&path)?;
                    coverage(&ckpt.config, Some(&ckpt.agent), steps, cell)?
                }
                None => coverage(&cfg, None, steps, cell)?,
            };
            let out = out.unwrap_or_else(|| cfg.run.output_dir.join("coverage.csv"));
            map.write_csv(&out)?;
            println!("steps: {steps}");
            println!("unique_cells: {}", map.unique_cells());
            println!("total_visits: {}", map.total_visits());
            println!("coverage_csv: {}", out.display());
            Ok(true)
        }
        Command::Sweep { cfg, axis, values } => {
            let cfg = cfg.load()?;
            let axis: SweepAxis = axis.parse()?;
            let rows = sweep(&cfg, axis, &values)?;
            println!("value,success_rate,mean_return,mean_collisions,mean_mp_fraction,reuse_transitions");
            for r in &rows {
                println!(
                    "{},{:.3},{:.3},{:.2},{:.3},{}",
                    r.value,
                    r.success_rate,
                    r.mean_return,
                    r.mean_collisions,
                    r.mean_mp_fraction,
                    r.reuse_transitions
                );
            }
            Ok(true)
        }
        Command::Plot { kind, out, window, inputs } => {
            match kind.as_str() {
                "curves" | "panels" => {
                    let mut runs = Vec::new();
                    for path in &inputs {
                        runs.push((label_for(path), read_metrics(path)?));
                    }
                    if kind == "curves" {
                        plot::plot_success_curves(&runs, &out, window)?;
                    } else {
                        plot::plot_panels(&runs, &out, window)?;
                    }
                }
                "heatmap" => {
                    let path = inputs.first().ok_or_else(|| {
                        Error::Config("heatmap needs one coverage CSV input".into())
                    })?;
                    let map = CoverageMap::read_csv(path)?;
                    plot::plot_heatmap(&map, &out)?;
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown plot kind '{other}' (expected curves, panels, heatmap)"
                    )))
                }
            }
            println!("wrote {}", out.display());
            Ok(true)
        }
        Command::Selftest { quick } => {
            let reports = mopa_core::diagnostics::run_all(quick)?;
            let mut all_ok = true;
            for r in &reports {
                println!("{r}");
                all_ok &= r.passed;
            }
            Ok(all_ok)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Error::Config(msg)) => {
            eprintln!("bad config: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
