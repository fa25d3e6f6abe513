//! Run configuration: canonical defaults, TOML loading with nested sections,
//! and dotted-path overrides (`section.key=value`).

use crate::action::{Mode, MopaConfig};
use crate::env::WorldConfig;
use crate::geom::{ArmModel, Disc, JointState, Vec2};
use crate::planner::PlannerConfig;
use crate::sac::SacConfig;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    /// Training budget in primitive environment steps.
    pub total_env_steps: usize,
    /// Checkpoint cadence in primitive steps.
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            total_env_steps: 300_000,
            eval_every: 10_000,
            eval_episodes: 20,
            seed: 0,
            output_dir: PathBuf::from("runs/default"),
        }
    }
}

/// Aggregated configuration for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub env: WorldConfig,
    pub planner: PlannerConfig,
    pub mopa: MopaConfig,
    pub sac: SacConfig,
    pub run: RunParams,
}

/// The canonical arm: four 0.11 m links of radius 0.02, base joint free over
/// a full turn, distal joints limited to a half turn each.
pub fn default_arm() -> ArmModel {
    ArmModel {
        base: Vec2::ZERO,
        link_lengths: vec![0.11; 4],
        link_radius: 0.02,
        joint_limits: vec![
            (-PI, PI),
            (-FRAC_PI_2, FRAC_PI_2),
            (-FRAC_PI_2, FRAC_PI_2),
            (-FRAC_PI_2, FRAC_PI_2),
        ],
    }
}

/// Canonical world: object/goal sampling box in the upper-left workspace,
/// four obstacle discs forming two narrow passages between the rest pose and
/// that box (three on an inner arc plus one outer guard sealing the
/// over-the-top route). Obstacle coordinates are a reconstruction; they are
/// config data, not load-bearing constants.
pub fn default_world() -> WorldConfig {
    WorldConfig {
        arm: default_arm(),
        rest_pose: JointState(vec![FRAC_PI_2, 0.0, 0.0, 0.0]),
        obstacles: vec![
            Disc { center: Vec2::new(-0.08030, 0.17220), radius: 0.04 },
            Disc { center: Vec2::new(-0.18070, 0.05871), radius: 0.04 },
            Disc { center: Vec2::new(-0.16618, -0.09211), radius: 0.04 },
            Disc { center: Vec2::new(-0.10489, 0.25961), radius: 0.04 },
        ],
        object_radius: 0.03,
        goal_radius_visual: 0.05,
        object_x_range: (-0.35, -0.24),
        object_y_range: (0.13, 0.2),
        goal_x_range: (-0.35, -0.24),
        goal_y_range: (0.13, 0.2),
        joint_init_noise: 0.02,
        horizon: 400,
        success_dist: 0.05,
        min_start_separation: 0.07,
    }
}

pub fn default_planner() -> PlannerConfig {
    PlannerConfig::default()
}

pub fn default_mopa() -> MopaConfig {
    MopaConfig {
        mode: Mode::Mopa,
        step_limit: 0.1,
        mp_range: 1.0,
        rescale_threshold: 0.7,
        discount: 0.99,
        reuse_count: 30,
        reward_scale: 0.2,
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            env: default_world(),
            planner: default_planner(),
            mopa: default_mopa(),
            sac: SacConfig::default(),
            run: RunParams::default(),
        }
    }
}

impl RunConfig {
    /// Switches the training mode, applying the reward scale convention:
    /// 0.2 for the planner-augmented agent, 10 for the plain-SAC baselines.
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mopa.mode = mode;
        self.mopa.reward_scale = match mode {
            Mode::Mopa => 0.2,
            Mode::SacBaseline | Mode::SacLarge => 10.0,
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.planner.validate().map_err(Error::Config)?;
        self.mopa.validate().map_err(Error::Config)?;
        self.sac.validate().map_err(Error::Config)?;
        if self.run.total_env_steps == 0 || self.run.eval_every == 0 {
            return Err(Error::Config("step budgets must be positive".into()));
        }
        if self.planner.edge_resolution > self.mopa.step_limit {
            return Err(Error::Config(
                "edge_resolution must not exceed step_limit (tunneling risk)".into(),
            ));
        }
        Ok(())
    }

    /// Loads a TOML config file and applies `section.key=value` overrides.
    pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_value(toml::Value::Table(table), overrides)
    }

    /// Built-in defaults plus overrides; used when no config file is given.
    pub fn from_defaults(overrides: &[String]) -> Result<RunConfig> {
        let value =
            toml::Value::try_from(RunConfig::default()).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_value(value, overrides)
    }

    fn from_value(mut value: toml::Value, overrides: &[String]) -> Result<RunConfig> {
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        let cfg: RunConfig =
            RunConfig::deserialize(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes the full configuration as TOML.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Applies one `section.key=value` override onto the TOML tree. The value is
/// parsed as TOML (so strings need quotes only when ambiguous; bare words are
/// taken as strings).
fn apply_override(root: &mut toml::Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{spec}' is not key=value")))?;
    let parsed: toml::Value = match raw.parse::<toml::Value>() {
        Ok(v) => v,
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let segments: Vec<&str> = path.split('.').collect();
    if segments.is_empty() {
        return Err(Error::Config(format!("override '{spec}' has an empty path")));
    }
    let mut node = root;
    for seg in &segments[..segments.len() - 1] {
        node = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("'{path}': '{seg}' is not a table")))?
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| Error::Config(format!("'{path}' does not address a table entry")))?;
    table.insert(segments.last().unwrap().to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
        RunConfig::default().with_mode(Mode::SacBaseline).validate().unwrap();
        RunConfig::default().with_mode(Mode::SacLarge).validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml().unwrap();
        let table: toml::Table = text.parse().unwrap();
        let back = RunConfig::deserialize(toml::Value::Table(table)).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn overrides_apply() {
        let cfg = RunConfig::from_defaults(&[
            "mopa.rescale_threshold=1.0".into(),
            "run.seed=42".into(),
            "run.total_env_steps=5000".into(),
            "mopa.mode=sac_large".into(),
        ])
        .unwrap();
        assert_eq!(cfg.mopa.rescale_threshold, 1.0);
        assert_eq!(cfg.run.seed, 42);
        assert_eq!(cfg.run.total_env_steps, 5000);
        assert_eq!(cfg.mopa.mode, Mode::SacLarge);
    }

    #[test]
    fn bad_override_reports_config_error() {
        assert!(matches!(
            RunConfig::from_defaults(&["mopa.step_limit".into()]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_defaults(&["mopa.step_limit=2.0".into()]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn shipped_default_config_matches_builtins() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/push2d.toml");
        let cfg = RunConfig::load(&path, &[]).unwrap();
        assert_eq!(cfg, RunConfig::default());
    }
}
