//! Ablation sweeps: rerun training with one knob varied, identical seeds per
//! value, and a consolidated comparison table.

use crate::config::RunConfig;
use crate::rollout::evaluate_agent;
use crate::train::{train, Checkpoint, TrainSummary};
use crate::{Error, Result};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Augmented action range (per-joint displacement cap).
    MpRange,
    /// Rescaling knee: share of the policy range mapped to direct actions.
    RescaleThreshold,
    /// Reused sub-sampled transitions per planner execution.
    ReuseCount,
}

impl SweepAxis {
    pub fn key(&self) -> &'static str {
        match self {
            SweepAxis::MpRange => "mp_range",
            SweepAxis::RescaleThreshold => "rescale_threshold",
            SweepAxis::ReuseCount => "reuse_count",
        }
    }

    pub fn apply(&self, cfg: &mut RunConfig, value: f64) {
        match self {
            SweepAxis::MpRange => cfg.mopa.mp_range = value,
            SweepAxis::RescaleThreshold => cfg.mopa.rescale_threshold = value,
            SweepAxis::ReuseCount => cfg.mopa.reuse_count = value.round() as usize,
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<SweepAxis> {
        match s {
            "mp_range" => Ok(SweepAxis::MpRange),
            "rescale_threshold" => Ok(SweepAxis::RescaleThreshold),
            "reuse_count" => Ok(SweepAxis::ReuseCount),
            other => Err(Error::Config(format!(
                "unknown sweep axis '{other}' (expected mp_range, rescale_threshold, reuse_count)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub success_rate: f64,
    pub mean_return: f64,
    pub mean_collisions: f64,
    pub mean_mp_fraction: f64,
    pub reuse_transitions: usize,
    pub episodes: usize,
    pub output_dir: PathBuf,
    pub summary: TrainSummary,
}

/// Runs one training per value (same seed each), evaluates the final
/// checkpoint, and writes `sweep_<axis>.csv` under the base output directory.
pub fn sweep(base: &RunConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let configs: Vec<RunConfig> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut cfg = base.clone();
            axis.apply(&mut cfg, v);
            cfg.run.output_dir =
                base.run.output_dir.join(format!("{}_{i}_{v}", axis.key()));
            cfg
        })
        .collect();

    let results = crate::par::par_map(&configs, |cfg| -> Result<SweepRow> {
        let summary = train(cfg)?;
        let ckpt = Checkpoint::load(&summary.final_checkpoint)?;
        let eval = evaluate_agent(cfg, &ckpt.agent, cfg.run.eval_episodes)?;
        Ok(SweepRow {
            value: f64::NAN, // filled below
            success_rate: eval.success_rate,
            mean_return: eval.mean_return,
            mean_collisions: eval.mean_collisions,
            mean_mp_fraction: summary.mean_mp_fraction,
            reuse_transitions: summary.reuse_transitions,
            episodes: summary.episodes,
            output_dir: cfg.run.output_dir.clone(),
            summary,
        })
    });

    let mut rows = Vec::with_capacity(values.len());
    for (r, &v) in results.into_iter().zip(values) {
        let mut row = r?;
        row.value = v;
        rows.push(row);
    }
    write_sweep_csv(&base.run.output_dir, axis, &rows)?;
    Ok(rows)
}

fn write_sweep_csv(dir: &Path, axis: SweepAxis, rows: &[SweepRow]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("sweep_{}.csv", axis.key()));
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "value,success_rate,mean_return,mean_collisions,mean_mp_fraction,reuse_transitions,episodes"
    )?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            r.value,
            r.success_rate,
            r.mean_return,
            r.mean_collisions,
            r.mean_mp_fraction,
            r.reuse_transitions,
            r.episodes
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Mode;

    #[test]
    fn axis_parses() {
        assert_eq!("mp_range".parse::<SweepAxis>().unwrap(), SweepAxis::MpRange);
        assert!("bogus".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn reuse_sweep_logs_distinct_counts() {
        let mut base = RunConfig::default().with_mode(Mode::Mopa);
        base.run.total_env_steps = 900;
        base.run.eval_every = 900;
        base.run.eval_episodes = 2;
        base.run.seed = 3;
        base.sac.warmup_aug_steps = 10;
        base.sac.batch_size = 32;
        base.sac.replay_capacity = 8192;
        base.sac.hidden = vec![16, 16];
        base.run.output_dir = std::env::temp_dir().join("mopa_sweep_tests").join("reuse");
        let rows = sweep(&base, SweepAxis::ReuseCount, &[0.0, 5.0]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].reuse_transitions, 0);
        assert!(rows[1].reuse_transitions > 0);
        assert!(base.run.output_dir.join("sweep_reuse_count.csv").exists());
    }
}
