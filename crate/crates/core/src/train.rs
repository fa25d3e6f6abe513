//! The training loop: sample an augmented action, dispatch it (direct step or
//! planned option), store the main transition plus sub-sampled reuse
//! transitions, update the learner once per augmented step. Episode metrics
//! stream to CSV; checkpoints roll every `eval_every` primitive steps.

use crate::action::{
    execute, inverse_rescale, is_mp_action, main_transition, policy_to_env_action,
    subsample_reuse, Mode,
};
use crate::config::RunConfig;
use crate::env::{observe, reset};
use crate::sac::{ReplayBuffer, Row, SacAgent};
use crate::{mix_seed, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

// RNG stream tags.
const TAG_INIT: u64 = 0;
const TAG_POLICY: u64 = 1;
const TAG_UPDATE: u64 = 2;
const TAG_REUSE: u64 = 3;
const TAG_EPISODE: u64 = 4;
const TAG_PLAN: u64 = 5;

/// One episode's metrics line.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub env_steps: usize,
    pub augmented_steps: usize,
    pub episode_return: f64,
    pub success: u8,
    pub episode_collisions: usize,
    pub mp_action_fraction: f64,
    pub mean_h: f64,
    pub wall_ms: f64,
}

pub const METRICS_HEADER: &str =
    "env_steps,augmented_steps,episode_return,success,episode_collisions,mp_action_fraction,mean_h,wall_ms";

impl MetricsRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.env_steps,
            self.augmented_steps,
            self.episode_return,
            self.success,
            self.episode_collisions,
            self.mp_action_fraction,
            self.mean_h,
            self.wall_ms
        )
    }

    fn parse(line: &str, path: &Path, row: usize) -> Result<MetricsRow> {
        let err = |msg: &str| Error::Csv {
            path: path.to_path_buf(),
            row,
            msg: msg.to_string(),
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(err(&format!("expected 8 fields, got {}", fields.len())));
        }
        Ok(MetricsRow {
            env_steps: fields[0].parse().map_err(|_| err("bad env_steps"))?,
            augmented_steps: fields[1].parse().map_err(|_| err("bad augmented_steps"))?,
            episode_return: fields[2].parse().map_err(|_| err("bad episode_return"))?,
            success: fields[3].parse().map_err(|_| err("bad success"))?,
            episode_collisions: fields[4].parse().map_err(|_| err("bad episode_collisions"))?,
            mp_action_fraction: fields[5].parse().map_err(|_| err("bad mp_action_fraction"))?,
            mean_h: fields[6].parse().map_err(|_| err("bad mean_h"))?,
            wall_ms: fields[7].parse().map_err(|_| err("bad wall_ms"))?,
        })
    }
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line != METRICS_HEADER {
                return Err(Error::Csv {
                    path: path.to_path_buf(),
                    row: 1,
                    msg: "unexpected header".into(),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        rows.push(MetricsRow::parse(&line, path, i + 1)?);
    }
    Ok(rows)
}

/// Versioned checkpoint: full run configuration plus the learner state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: RunConfig,
    pub env_steps: usize,
    pub agent: SacAgent,
}

pub const CHECKPOINT_VERSION: u32 = 1;

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)
            .map_err(|e| Error::Fault(format!("checkpoint write: {e}")))
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let file = std::fs::File::open(path)?;
        let ckpt: Checkpoint = serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|e| Error::Fault(format!("checkpoint read {}: {e}", path.display())))?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Fault(format!(
                "checkpoint version {} unsupported (expected {CHECKPOINT_VERSION})",
                ckpt.version
            )));
        }
        Ok(ckpt)
    }
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub episodes: usize,
    pub env_steps: usize,
    pub augmented_steps: usize,
    pub main_transitions: usize,
    pub reuse_transitions: usize,
    pub planner_dispatches: usize,
    pub planner_failures: usize,
    pub successes: usize,
    /// Histogram of option lengths in the final replay buffer.
    pub step_histogram: BTreeMap<u32, usize>,
    pub mean_mp_fraction: f64,
    pub metrics_path: PathBuf,
    pub final_checkpoint: PathBuf,
    pub rows: Vec<MetricsRow>,
}

fn obs_vec(state: &crate::env::EnvState, cfg: &RunConfig) -> Vec<f64> {
    observe(state, &cfg.env).0
}

/// Runs one full training run per the configuration. Deterministic per seed
/// apart from the wall-clock column of the metrics file.
pub fn train(cfg: &RunConfig) -> Result<TrainSummary> {
    cfg.validate()?;
    let out = &cfg.run.output_dir;
    std::fs::create_dir_all(out)?;
    let metrics_path = out.join("metrics.csv");
    let mut metrics_file = std::io::BufWriter::new(std::fs::File::create(&metrics_path)?);
    writeln!(metrics_file, "{METRICS_HEADER}")?;

    let seed = cfg.run.seed;
    let dof = cfg.env.arm.dof();
    let obs_dim = crate::env::Observation::dim_for(dof);
    let mut init_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, TAG_INIT, 0));
    let mut agent = SacAgent::new(obs_dim, dof, &cfg.sac, cfg.mopa.discount, &mut init_rng);
    let mut buffer = ReplayBuffer::new(cfg.sac.replay_capacity);
    let mut policy_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, TAG_POLICY, 0));
    let mut update_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, TAG_UPDATE, 0));
    let mut reuse_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, TAG_REUSE, 0));

    let mut env_steps = 0usize;
    let mut aug_steps = 0usize;
    let mut plan_counter = 0u64;
    let mut episode = 0usize;
    let mut rows = Vec::new();
    let mut main_transitions = 0usize;
    let mut reuse_transitions = 0usize;
    let mut planner_dispatches = 0usize;
    let mut planner_failures = 0usize;
    let mut successes = 0usize;
    let mut mp_dispatch_total = 0usize;
    let mut last_ckpt_bucket = 0usize;
    let latest_ckpt = out.join("checkpoint_latest.json");
    let final_ckpt = out.join("checkpoint_final.json");

    'outer: while env_steps < cfg.run.total_env_steps {
        let ep_start = Instant::now();
        let (mut state, _) = match reset(&cfg.env, mix_seed(seed, TAG_EPISODE, episode as u64)) {
            Ok(r) => r,
            Err(e) => {
                // Leave a final checkpoint behind before surfacing the fault.
                Checkpoint {
                    version: CHECKPOINT_VERSION,
                    config: cfg.clone(),
                    env_steps,
                    agent: agent.clone(),
                }
                .save(&final_ckpt)?;
                return Err(e);
            }
        };
        let mut ep_return = 0.0;
        let mut ep_aug = 0usize;
        let mut ep_h = 0usize;
        let mut ep_mp = 0usize;
        let mut ep_success = false;
        let ep_collision_base = state.collision_count;

        loop {
            let obs = obs_vec(&state, cfg);
            let u: Vec<f64> = if aug_steps < cfg.sac.warmup_aug_steps {
                (0..dof).map(|_| policy_rng.random_range(-1.0..1.0)).collect()
            } else {
                agent.act_stochastic(&obs, &mut policy_rng)
            };
            let a_env = policy_to_env_action(&u, &cfg.mopa);
            let plan_seed = mix_seed(seed, TAG_PLAN, plan_counter);
            plan_counter += 1;
            let rec = execute(&state, &a_env, &cfg.env, &cfg.mopa, &cfg.planner, plan_seed);

            let mp_dispatch =
                cfg.mopa.mode == Mode::Mopa && is_mp_action(&a_env, &cfg.mopa);
            if mp_dispatch {
                ep_mp += 1;
                mp_dispatch_total += 1;
                planner_dispatches += 1;
                if rec.planner_failed {
                    planner_failures += 1;
                }
            }

            let main = main_transition(&rec);
            buffer.push(Row {
                obs,
                action: u.clone(),
                reward: main.reward * cfg.mopa.reward_scale,
                next_obs: obs_vec(&main.s_next, cfg),
                steps: main.steps as u32,
                done: main.done,
            });
            main_transitions += 1;

            if cfg.mopa.mode == Mode::Mopa && rec.used_planner && cfg.mopa.reuse_count > 0 {
                for t in subsample_reuse(&rec, cfg.mopa.reuse_count, &mut reuse_rng) {
                    buffer.push(Row {
                        obs: obs_vec(&t.s, cfg),
                        action: inverse_rescale(&t.action, &cfg.mopa),
                        reward: t.reward * cfg.mopa.reward_scale,
                        next_obs: obs_vec(&t.s_next, cfg),
                        steps: t.steps as u32,
                        done: t.done,
                    });
                    reuse_transitions += 1;
                }
            }

            ep_return += rec.per_step_rewards.iter().sum::<f64>();
            ep_h += rec.steps;
            env_steps += rec.steps;
            aug_steps += 1;
            ep_aug += 1;
            ep_success |= rec.done && crate::env::success(&rec.s_end, &cfg.env);
            state = rec.s_end;

            if aug_steps >= cfg.sac.warmup_aug_steps && buffer.len() >= cfg.sac.batch_size {
                for _ in 0..cfg.sac.updates_per_aug_step {
                    agent.update(&buffer, &mut update_rng);
                }
            }

            if rec.done || env_steps >= cfg.run.total_env_steps {
                break;
            }
        }

        if ep_success {
            successes += 1;
        }
        episode += 1;
        let row = MetricsRow {
            env_steps,
            augmented_steps: aug_steps,
            episode_return: ep_return,
            success: ep_success as u8,
            episode_collisions: state.collision_count - ep_collision_base,
            mp_action_fraction: ep_mp as f64 / ep_aug.max(1) as f64,
            mean_h: ep_h as f64 / ep_aug.max(1) as f64,
            wall_ms: ep_start.elapsed().as_secs_f64() * 1e3,
        };
        writeln!(metrics_file, "{}", row.to_csv_line())?;
        metrics_file.flush()?;
        rows.push(row);

        let bucket = env_steps / cfg.run.eval_every;
        if bucket > last_ckpt_bucket {
            last_ckpt_bucket = bucket;
            Checkpoint {
                version: CHECKPOINT_VERSION,
                config: cfg.clone(),
                env_steps,
                agent: agent.clone(),
            }
            .save(&latest_ckpt)?;
        }
        if env_steps >= cfg.run.total_env_steps {
            break 'outer;
        }
    }

    Checkpoint {
        version: CHECKPOINT_VERSION,
        config: cfg.clone(),
        env_steps,
        agent,
    }
    .save(&final_ckpt)?;

    Ok(TrainSummary {
        episodes: episode,
        env_steps,
        augmented_steps: aug_steps,
        main_transitions,
        reuse_transitions,
        planner_dispatches,
        planner_failures,
        successes,
        step_histogram: buffer.step_histogram(),
        mean_mp_fraction: mp_dispatch_total as f64 / aug_steps.max(1) as f64,
        metrics_path,
        final_checkpoint: final_ckpt,
        rows,
    })
}

/// Trains several configurations, in parallel when the feature allows.
/// Each run is fully independent and single-threaded internally.
pub fn train_many(configs: &[RunConfig]) -> Vec<Result<TrainSummary>> {
    crate::par::par_map(configs, train)
}
