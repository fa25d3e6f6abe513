//! Policy evaluation and exploration-coverage measurement. Episodes are
//! independently seeded, so both entry points parallelize across episodes.

use crate::action::{execute, policy_to_env_action};
use crate::config::RunConfig;
use crate::env::{observe, reset, success};
use crate::geom::{end_effector, Vec2};
use crate::sac::SacAgent;
use crate::train::Checkpoint;
use crate::{mix_seed, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::Path;

const TAG_EVAL_EPISODE: u64 = 10;
const TAG_EVAL_PLAN: u64 = 11;
const TAG_COVERAGE: u64 = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStat {
    pub success: bool,
    pub episode_return: f64,
    pub collisions: usize,
    pub env_steps: usize,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub episodes: Vec<EpisodeStat>,
    pub success_rate: f64,
    pub mean_return: f64,
    /// Blocked-step count per episode: the kinematic proxy for contact force.
    pub mean_collisions: f64,
    /// Same proxy restricted to successful episodes; `None` without successes.
    pub mean_collisions_successful: Option<f64>,
}

impl EvalReport {
    fn from_episodes(episodes: Vec<EpisodeStat>) -> EvalReport {
        let n = episodes.len().max(1) as f64;
        let successes: Vec<&EpisodeStat> = episodes.iter().filter(|e| e.success).collect();
        let success_rate = successes.len() as f64 / n;
        let mean_return = episodes.iter().map(|e| e.episode_return).sum::<f64>() / n;
        let mean_collisions = episodes.iter().map(|e| e.collisions as f64).sum::<f64>() / n;
        let mean_collisions_successful = if successes.is_empty() {
            None
        } else {
            Some(
                successes.iter().map(|e| e.collisions as f64).sum::<f64>()
                    / successes.len() as f64,
            )
        };
        EvalReport {
            episodes,
            success_rate,
            mean_return,
            mean_collisions,
            mean_collisions_successful,
        }
    }

    /// Collision proxy for safety comparisons: successful episodes when any
    /// exist, otherwise all episodes (labeled by the caller).
    pub fn collision_proxy(&self) -> f64 {
        self.mean_collisions_successful.unwrap_or(self.mean_collisions)
    }
}

/// Runs one deterministic-policy episode and returns its stats.
fn eval_episode(cfg: &RunConfig, agent: &SacAgent, seed_index: u64) -> Result<EpisodeStat> {
    let seed = cfg.run.seed;
    let (mut state, _) = reset(&cfg.env, mix_seed(seed, TAG_EVAL_EPISODE, seed_index))?;
    let mut ep_return = 0.0;
    let mut plan_counter = seed_index << 20;
    loop {
        let obs = observe(&state, &cfg.env).0;
        let u = agent.act_deterministic(&obs);
        let a_env = policy_to_env_action(&u, &cfg.mopa);
        let rec = execute(
            &state,
            &a_env,
            &cfg.env,
            &cfg.mopa,
            &cfg.planner,
            mix_seed(seed, TAG_EVAL_PLAN, plan_counter),
        );
        plan_counter += 1;
        ep_return += rec.per_step_rewards.iter().sum::<f64>();
        state = rec.s_end;
        if rec.done {
            break;
        }
    }
    Ok(EpisodeStat {
        success: success(&state, &cfg.env),
        episode_return: ep_return,
        collisions: state.collision_count,
        env_steps: state.steps_elapsed,
    })
}

/// Deterministic-mean-policy evaluation over independently seeded episodes.
pub fn evaluate_agent(cfg: &RunConfig, agent: &SacAgent, episodes: usize) -> Result<EvalReport> {
    if agent.obs_dim != crate::env::Observation::dim_for(cfg.env.arm.dof()) {
        return Err(Error::Fault(
            "checkpoint/environment mismatch: observation dimensions differ".into(),
        ));
    }
    let stats = crate::par::par_map_indexed(episodes, |i| eval_episode(cfg, agent, i as u64));
    let mut episodes_out = Vec::with_capacity(stats.len());
    for s in stats {
        episodes_out.push(s?);
    }
    Ok(EvalReport::from_episodes(episodes_out))
}

/// Loads a checkpoint and evaluates it in its own embedded configuration.
pub fn evaluate_checkpoint(path: &Path, episodes: Option<usize>) -> Result<(EvalReport, RunConfig)> {
    let ckpt = Checkpoint::load(path)?;
    let n = episodes.unwrap_or(ckpt.config.run.eval_episodes);
    let report = evaluate_agent(&ckpt.config, &ckpt.agent, n)?;
    Ok((report, ckpt.config))
}

/// Visit-count grid over the end-effector workspace.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMap {
    pub min_x: f64,
    pub min_y: f64,
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    pub counts: Vec<u64>,
}

impl CoverageMap {
    /// Square grid spanning the arm's reachable disc with one cell of margin.
    pub fn for_arm(reach: f64, cell: f64) -> CoverageMap {
        let extent = reach + cell;
        let n = (2.0 * extent / cell).ceil() as usize;
        CoverageMap { min_x: -extent, min_y: -extent, cell, nx: n, ny: n, counts: vec![0; n * n] }
    }

    pub fn insert(&mut self, p: Vec2) {
        let ix = ((p.x - self.min_x) / self.cell).floor();
        let iy = ((p.y - self.min_y) / self.cell).floor();
        if ix >= 0.0 && iy >= 0.0 && (ix as usize) < self.nx && (iy as usize) < self.ny {
            self.counts[iy as usize * self.nx + ix as usize] += 1;
        }
    }

    pub fn unique_cells(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn total_visits(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Long-form CSV of the non-empty cells.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "ix,iy,count,nx,ny,cell,min_x,min_y")?;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let c = self.counts[iy * self.nx + ix];
                if c > 0 {
                    writeln!(
                        f,
                        "{ix},{iy},{c},{},{},{},{},{}",
                        self.nx, self.ny, self.cell, self.min_x, self.min_y
                    )?;
                }
            }
        }
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<CoverageMap> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines().enumerate();
        let header = lines.next().map(|(_, l)| l).unwrap_or("");
        if header != "ix,iy,count,nx,ny,cell,min_x,min_y" {
            return Err(Error::Csv { path: path.into(), row: 1, msg: "unexpected header".into() });
        }
        let mut map: Option<CoverageMap> = None;
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let err = |msg: &str| Error::Csv { path: path.into(), row: i + 1, msg: msg.into() };
            if f.len() != 8 {
                return Err(err("expected 8 fields"));
            }
            let ix: usize = f[0].parse().map_err(|_| err("bad ix"))?;
            let iy: usize = f[1].parse().map_err(|_| err("bad iy"))?;
            let c: u64 = f[2].parse().map_err(|_| err("bad count"))?;
            let nx: usize = f[3].parse().map_err(|_| err("bad nx"))?;
            let ny: usize = f[4].parse().map_err(|_| err("bad ny"))?;
            let m = map.get_or_insert_with(|| CoverageMap {
                min_x: f[6].parse().unwrap_or(0.0),
                min_y: f[7].parse().unwrap_or(0.0),
                cell: f[5].parse().unwrap_or(0.02),
                nx,
                ny,
                counts: vec![0; nx * ny],
            });
            if ix >= m.nx || iy >= m.ny {
                return Err(err("cell index out of bounds"));
            }
            m.counts[iy * m.nx + ix] = c;
        }
        map.ok_or_else(|| Error::Csv { path: path.into(), row: 1, msg: "no cells".into() })
    }
}

/// Explores with the stochastic policy (a fresh one unless a checkpoint is
/// supplied) for a primitive-step budget, recording the end-effector cell at
/// every executed step.
pub fn coverage(
    cfg: &RunConfig,
    agent: Option<&SacAgent>,
    step_budget: usize,
    cell: f64,
) -> Result<CoverageMap> {
    let dof = cfg.env.arm.dof();
    let obs_dim = crate::env::Observation::dim_for(dof);
    let fresh;
    let agent = match agent {
        Some(a) => a,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.run.seed, TAG_COVERAGE, 0));
            fresh = SacAgent::new(obs_dim, dof, &cfg.sac, cfg.mopa.discount, &mut rng);
            &fresh
        }
    };
    let mut map = CoverageMap::for_arm(cfg.env.arm.reach(), cell);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.run.seed, TAG_COVERAGE, 1));
    let mut steps = 0usize;
    let mut episode = 0u64;
    let mut plan_counter = 0u64;
    while steps < step_budget {
        let (mut state, _) = reset(&cfg.env, mix_seed(cfg.run.seed, TAG_COVERAGE, 100 + episode))?;
        episode += 1;
        map.insert(end_effector(&cfg.env.arm, &state.q));
        loop {
            let obs = observe(&state, &cfg.env).0;
            let u = agent.act_stochastic(&obs, &mut rng);
            let a_env = policy_to_env_action(&u, &cfg.mopa);
            let rec = execute(
                &state,
                &a_env,
                &cfg.env,
                &cfg.mopa,
                &cfg.planner,
                mix_seed(cfg.run.seed, TAG_COVERAGE, 1000 + plan_counter),
            );
            plan_counter += 1;
            for s in &rec.recorded[1..] {
                map.insert(end_effector(&cfg.env.arm, &s.q));
            }
            steps += rec.steps;
            state = rec.s_end;
            if rec.done || steps >= step_budget {
                break;
            }
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.sac.hidden = vec![16, 16];
        cfg
    }

    #[test]
    fn untrained_policy_has_near_zero_success() {
        let cfg = small_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let dof = cfg.env.arm.dof();
        let agent = SacAgent::new(
            crate::env::Observation::dim_for(dof),
            dof,
            &cfg.sac,
            cfg.mopa.discount,
            &mut rng,
        );
        let report = evaluate_agent(&cfg, &agent, 10).unwrap();
        assert!(report.success_rate <= 0.1, "untrained success {}", report.success_rate);
        assert_eq!(report.episodes.len(), 10);
    }

    #[test]
    fn coverage_zero_budget_is_empty() {
        let cfg = small_cfg();
        let map = coverage(&cfg, None, 0, 0.02).unwrap();
        assert_eq!(map.unique_cells(), 0);
        assert_eq!(map.total_visits(), 0);
    }

    #[test]
    fn coverage_stays_inside_workspace_disc() {
        let cfg = small_cfg();
        let map = coverage(&cfg, None, 800, 0.02).unwrap();
        assert!(map.unique_cells() > 0);
        let reach = cfg.env.arm.reach();
        for iy in 0..map.ny {
            for ix in 0..map.nx {
                if map.counts[iy * map.nx + ix] > 0 {
                    // Cell centers of visited cells lie within reach + one cell.
                    let cx = map.min_x + (ix as f64 + 0.5) * map.cell;
                    let cy = map.min_y + (iy as f64 + 0.5) * map.cell;
                    let r = (cx * cx + cy * cy).sqrt();
                    assert!(r <= reach + 2.0 * map.cell, "visited cell at radius {r}");
                }
            }
        }
    }

    #[test]
    fn coverage_csv_round_trips() {
        let cfg = small_cfg();
        let map = coverage(&cfg, None, 300, 0.02).unwrap();
        let path = std::env::temp_dir().join("mopa_rollout_tests").join("cov.csv");
        map.write_csv(&path).unwrap();
        let back = CoverageMap::read_csv(&path).unwrap();
        assert_eq!(map, back);
    }

    #[test]
    fn eval_is_deterministic() {
        let cfg = small_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dof = cfg.env.arm.dof();
        let agent = SacAgent::new(
            crate::env::Observation::dim_for(dof),
            dof,
            &cfg.sac,
            cfg.mopa.discount,
            &mut rng,
        );
        let a = evaluate_agent(&cfg, &agent, 4).unwrap();
        let b = evaluate_agent(&cfg, &agent, 4).unwrap();
        assert_eq!(a.episodes, b.episodes);
    }
}
