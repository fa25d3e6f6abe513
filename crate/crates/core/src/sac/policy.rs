//! Tanh-squashed Gaussian policy over the normalized action cube.

use super::mlp::{Mlp, MlpCache};
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Epsilon inside the tanh change-of-variables correction.
pub const SQUASH_EPS: f64 = 1e-6;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianPolicy {
    /// Trunk emitting `2 * action_dim` outputs: means then raw log-stds.
    pub net: Mlp,
    pub action_dim: usize,
}

/// Everything produced by one reparameterized batch sample; kept around so
/// the policy-loss backward pass can reuse the forward quantities.
pub struct PolicySample {
    pub actions: Array2<f64>,
    pub log_prob: Array1<f64>,
    pub mean: Array2<f64>,
    /// Clamped log standard deviations.
    pub log_std: Array2<f64>,
    pub std: Array2<f64>,
    /// True where the raw log-std was inside the clamp range (gradient flows).
    pub log_std_active: Array2<f64>,
    pub cache: MlpCache,
}

impl GaussianPolicy {
    pub fn new(obs_dim: usize, hidden: &[usize], action_dim: usize, rng: &mut impl Rng) -> Self {
        let mut dims = vec![obs_dim];
        dims.extend_from_slice(hidden);
        dims.push(2 * action_dim);
        GaussianPolicy { net: Mlp::new(&dims, rng), action_dim }
    }

    pub fn obs_dim(&self) -> usize {
        self.net.input_dim()
    }

    /// Reparameterized sample `u = tanh(mean + std * z)` for a batch of
    /// observations with externally supplied standard-normal noise, plus the
    /// squash-corrected log density
    /// `log N(pre; mean, std) - sum_i log(1 - u_i^2 + eps)`.
    pub fn sample_with_noise(&self, obs: &Array2<f64>, z: &Array2<f64>) -> PolicySample {
        let batch = obs.nrows();
        let d = self.action_dim;
        assert_eq!(z.shape(), &[batch, d]);
        let (out, cache) = self.net.forward_cached(obs);
        assert!(
            out.iter().all(|v| v.is_finite()),
            "policy network produced non-finite outputs"
        );
        let mean = out.slice(ndarray::s![.., 0..d]).to_owned();
        let raw_log_std = out.slice(ndarray::s![.., d..2 * d]).to_owned();
        let log_std_active =
            raw_log_std.mapv(|v| if (LOG_STD_MIN..=LOG_STD_MAX).contains(&v) { 1.0 } else { 0.0 });
        let log_std = raw_log_std.mapv(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX));
        let std = log_std.mapv(f64::exp);
        let pre = &mean + &(&std * z);
        let actions = pre.mapv(f64::tanh);
        let mut log_prob = Array1::zeros(batch);
        for b in 0..batch {
            let mut lp = 0.0;
            for j in 0..d {
                let zj = z[[b, j]];
                let uj = actions[[b, j]];
                lp += -0.5 * zj * zj - HALF_LN_2PI - log_std[[b, j]];
                lp -= (1.0 - uj * uj + SQUASH_EPS).ln();
            }
            log_prob[b] = lp;
        }
        PolicySample { actions, log_prob, mean, log_std, std, log_std_active, cache }
    }

    /// Single-observation stochastic action for rollouts.
    pub fn sample_one(&self, obs: &[f64], rng: &mut impl Rng) -> (Vec<f64>, f64) {
        let obs_m = Array2::from_shape_vec((1, obs.len()), obs.to_vec()).unwrap();
        let z = Array2::from_shape_fn((1, self.action_dim), |_| rng.sample(StandardNormal));
        let s = self.sample_with_noise(&obs_m, &z);
        (s.actions.row(0).to_vec(), s.log_prob[0])
    }

    /// Deterministic evaluation action: `tanh(mean)`.
    pub fn mean_action(&self, obs: &[f64]) -> Vec<f64> {
        let obs_m = Array2::from_shape_vec((1, obs.len()), obs.to_vec()).unwrap();
        let out = self.net.forward(&obs_m);
        (0..self.action_dim).map(|j| out[[0, j]].tanh()).collect()
    }
}
