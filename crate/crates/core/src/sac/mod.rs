//! Soft actor-critic for the augmented semi-MDP: twin critics with
//! multi-step discounted targets (`discount^H`), a tanh-squashed Gaussian
//! policy, and automatic entropy temperature tuning. All gradients are
//! computed by the hand-written backward passes in [`mlp`].

pub mod mlp;
pub mod policy;
pub mod replay;

pub use mlp::{Adam, AdamScalar, Mlp, MlpGrads};
pub use policy::{GaussianPolicy, PolicySample, LOG_STD_MAX, LOG_STD_MIN, SQUASH_EPS};
pub use replay::{ReplayBuffer, Row};

use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SacConfig {
    /// Hidden layer widths for policy and critics.
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Target smoothing coefficient.
    pub polyak: f64,
    /// Uniform-random augmented actions taken before learning starts.
    pub warmup_aug_steps: usize,
    pub updates_per_aug_step: usize,
}

impl Default for SacConfig {
    fn default() -> Self {
        SacConfig {
            hidden: vec![64, 64],
            learning_rate: 3e-4,
            batch_size: 256,
            replay_capacity: 200_000,
            polyak: 0.005,
            warmup_aug_steps: 1000,
            updates_per_aug_step: 1,
        }
    }
}

impl SacConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.hidden.is_empty() || self.hidden.iter().any(|&h| h == 0) {
            return Err("hidden layer widths must be positive".into());
        }
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            return Err("replay capacity must be at least the batch size".into());
        }
        if !(self.polyak > 0.0 && self.polyak <= 1.0) {
            return Err("polyak must be in (0,1]".into());
        }
        if !(self.learning_rate > 0.0) {
            return Err("learning rate must be positive".into());
        }
        if self.updates_per_aug_step == 0 {
            return Err("updates_per_aug_step must be positive".into());
        }
        Ok(())
    }
}

/// A batch of transitions in network coordinates.
#[derive(Debug, Clone)]
pub struct Batch {
    pub obs: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_obs: Array2<f64>,
    pub steps: Vec<u32>,
    pub done: Vec<bool>,
}

impl Batch {
    pub fn from_buffer(buffer: &ReplayBuffer, indices: &[usize]) -> Batch {
        let n = indices.len();
        let od = buffer.get(indices[0]).obs.len();
        let ad = buffer.get(indices[0]).action.len();
        let mut obs = Array2::zeros((n, od));
        let mut actions = Array2::zeros((n, ad));
        let mut rewards = Array1::zeros(n);
        let mut next_obs = Array2::zeros((n, od));
        let mut steps = Vec::with_capacity(n);
        let mut done = Vec::with_capacity(n);
        for (b, &i) in indices.iter().enumerate() {
            let row = buffer.get(i);
            obs.row_mut(b).assign(&Array1::from_vec(row.obs.clone()));
            actions.row_mut(b).assign(&Array1::from_vec(row.action.clone()));
            rewards[b] = row.reward;
            next_obs.row_mut(b).assign(&Array1::from_vec(row.next_obs.clone()));
            steps.push(row.steps);
            done.push(row.done);
        }
        Batch { obs, actions, rewards, next_obs, steps, done }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn concat_cols(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    ndarray::concatenate(Axis(1), &[a.view(), b.view()]).unwrap()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UpdateMetrics {
    pub critic_loss: f64,
    pub policy_loss: f64,
    pub alpha: f64,
    pub mean_entropy: f64,
}

/// Learner state: policy, twin critics with Polyak-averaged targets, entropy
/// temperature, and the Adam moments for every parameter set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SacAgent {
    pub policy: GaussianPolicy,
    pub q1: Mlp,
    pub q2: Mlp,
    pub q1_target: Mlp,
    pub q2_target: Mlp,
    pub log_alpha: f64,
    pub discount: f64,
    pub polyak: f64,
    pub target_entropy: f64,
    pub obs_dim: usize,
    pub action_dim: usize,
    pub batch_size: usize,
    pub update_count: u64,
    opt_policy: Adam,
    opt_q1: Adam,
    opt_q2: Adam,
    opt_alpha: AdamScalar,
}

impl SacAgent {
    pub fn new(
        obs_dim: usize,
        action_dim: usize,
        cfg: &SacConfig,
        discount: f64,
        rng: &mut impl Rng,
    ) -> SacAgent {
        let policy = GaussianPolicy::new(obs_dim, &cfg.hidden, action_dim, rng);
        let mut critic_dims = vec![obs_dim + action_dim];
        critic_dims.extend_from_slice(&cfg.hidden);
        critic_dims.push(1);
        let q1 = Mlp::new(&critic_dims, rng);
        let q2 = Mlp::new(&critic_dims, rng);
        let opt_policy = Adam::new(&policy.net, cfg.learning_rate);
        let opt_q1 = Adam::new(&q1, cfg.learning_rate);
        let opt_q2 = Adam::new(&q2, cfg.learning_rate);
        SacAgent {
            q1_target: q1.clone(),
            q2_target: q2.clone(),
            policy,
            q1,
            q2,
            log_alpha: 0.0,
            discount,
            polyak: cfg.polyak,
            target_entropy: -(action_dim as f64),
            obs_dim,
            action_dim,
            batch_size: cfg.batch_size,
            update_count: 0,
            opt_policy,
            opt_q1,
            opt_q2,
            opt_alpha: AdamScalar::new(cfg.learning_rate),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    pub fn act_stochastic(&self, obs: &[f64], rng: &mut impl Rng) -> Vec<f64> {
        self.policy.sample_one(obs, rng).0
    }

    pub fn act_deterministic(&self, obs: &[f64]) -> Vec<f64> {
        self.policy.mean_action(obs)
    }

    /// Bootstrapped targets `y = r + discount^H (1-done) (min Q' - alpha log pi)`
    /// with a freshly sampled next action per row.
    pub fn critic_target(&self, batch: &Batch, z_next: &Array2<f64>) -> Array1<f64> {
        let sample = self.policy.sample_with_noise(&batch.next_obs, z_next);
        let input = concat_cols(&batch.next_obs, &sample.actions);
        let q1t = self.q1_target.forward(&input);
        let q2t = self.q2_target.forward(&input);
        let alpha = self.alpha();
        let mut y = Array1::zeros(batch.len());
        for b in 0..batch.len() {
            let qmin = q1t[[b, 0]].min(q2t[[b, 0]]);
            let not_done = if batch.done[b] { 0.0 } else { 1.0 };
            let weight = self.discount.powi(batch.steps[b] as i32);
            y[b] = batch.rewards[b] + weight * not_done * (qmin - alpha * sample.log_prob[b]);
        }
        y
    }

    /// One full gradient step: critics toward the Bellman targets, policy on
    /// the reparameterized objective, temperature toward the entropy target,
    /// then a Polyak update of the target critics.
    pub fn update(&mut self, buffer: &ReplayBuffer, rng: &mut impl Rng) -> UpdateMetrics {
        let indices = buffer.sample_indices(rng, self.batch_size_hint(buffer));
        let batch = Batch::from_buffer(buffer, &indices);
        let z_next = self.draw_noise(batch.len(), rng);
        let y = self.critic_target(&batch, &z_next);

        let obs_act = concat_cols(&batch.obs, &batch.actions);
        let (g1, g2, critic_loss) = critic_grads(&self.q1, &self.q2, &obs_act, &y);
        self.opt_q1.step(&mut self.q1, &g1);
        self.opt_q2.step(&mut self.q2, &g2);

        let z_pi = self.draw_noise(batch.len(), rng);
        let (pg, policy_loss, log_prob) = policy_grads(
            &self.policy,
            &self.q1,
            &self.q2,
            &batch.obs,
            &z_pi,
            self.alpha(),
        );
        self.opt_policy.step(&mut self.policy.net, &pg);

        let mean_logp = log_prob.mean().unwrap();
        let alpha_grad = -(mean_logp + self.target_entropy);
        self.opt_alpha.step(&mut self.log_alpha, alpha_grad);

        polyak_update(&mut self.q1_target, &self.q1, self.polyak);
        polyak_update(&mut self.q2_target, &self.q2, self.polyak);
        self.update_count += 1;

        UpdateMetrics {
            critic_loss,
            policy_loss,
            alpha: self.alpha(),
            mean_entropy: -mean_logp,
        }
    }

    fn batch_size_hint(&self, buffer: &ReplayBuffer) -> usize {
        // The caller gates updates on buffer size; clamp defensively anyway.
        self.batch_size.min(buffer.len()).max(1)
    }

    fn draw_noise(&self, batch: usize, rng: &mut impl Rng) -> Array2<f64> {
        Array2::from_shape_fn((batch, self.action_dim), |_| rng.sample(StandardNormal))
    }

    pub fn save(&self, path: &std::path::Path) -> crate::Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)
            .map_err(|e| crate::Error::Fault(format!("checkpoint write: {e}")))
    }

    pub fn load(path: &std::path::Path) -> crate::Result<SacAgent> {
        let file = std::fs::File::open(path)?;
        serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|e| crate::Error::Fault(format!("checkpoint read: {e}")))
    }
}

/// Squared-error critic gradients against fixed targets.
/// Loss: `mean((Q1 - y)^2) + mean((Q2 - y)^2)`.
pub fn critic_grads(
    q1: &Mlp,
    q2: &Mlp,
    obs_act: &Array2<f64>,
    y: &Array1<f64>,
) -> (MlpGrads, MlpGrads, f64) {
    let n = obs_act.nrows() as f64;
    let mut loss = 0.0;
    let mut run = |q: &Mlp| {
        let (out, cache) = q.forward_cached(obs_act);
        let mut gout = Array2::zeros(out.raw_dim());
        for b in 0..out.nrows() {
            let diff = out[[b, 0]] - y[b];
            loss += diff * diff / n;
            gout[[b, 0]] = 2.0 * diff / n;
        }
        q.backward(&cache, &gout).0
    };
    let g1 = run(q1);
    let g2 = run(q2);
    (g1, g2, loss)
}

/// Critic loss value only (finite-difference oracle surface).
pub fn critic_loss_value(q1: &Mlp, q2: &Mlp, obs_act: &Array2<f64>, y: &Array1<f64>) -> f64 {
    let n = obs_act.nrows() as f64;
    let mut loss = 0.0;
    for q in [q1, q2] {
        let out = q.forward(obs_act);
        for b in 0..out.nrows() {
            let diff = out[[b, 0]] - y[b];
            loss += diff * diff / n;
        }
    }
    loss
}

/// Reparameterized policy objective `mean(alpha log pi(u|s) - min Q(s, u))`
/// with fixed noise `z`. Returns parameter gradients, the loss value, and the
/// per-sample log probabilities (reused for the temperature update).
pub fn policy_grads(
    policy: &GaussianPolicy,
    q1: &Mlp,
    q2: &Mlp,
    obs: &Array2<f64>,
    z: &Array2<f64>,
    alpha: f64,
) -> (MlpGrads, f64, Array1<f64>) {
    let n = obs.nrows();
    let d = policy.action_dim;
    let sample = policy.sample_with_noise(obs, z);
    let obs_act = concat_cols(obs, &sample.actions);
    let (o1, c1) = q1.forward_cached(&obs_act);
    let (o2, c2) = q2.forward_cached(&obs_act);

    let mut loss = 0.0;
    let mut g1_out = Array2::zeros((n, 1));
    let mut g2_out = Array2::zeros((n, 1));
    for b in 0..n {
        let (v1, v2) = (o1[[b, 0]], o2[[b, 0]]);
        let qmin = v1.min(v2);
        loss += (alpha * sample.log_prob[b] - qmin) / n as f64;
        // Route -dqmin through whichever critic achieved the minimum.
        if v1 <= v2 {
            g1_out[[b, 0]] = -1.0 / n as f64;
        } else {
            g2_out[[b, 0]] = -1.0 / n as f64;
        }
    }
    let gin1 = q1.backward_input(&c1, &g1_out);
    let gin2 = q2.backward_input(&c2, &g2_out);
    let obs_dim = obs.ncols();
    let dq_du = gin1.slice(s![.., obs_dim..]).to_owned() + gin2.slice(s![.., obs_dim..]);

    // dL/du = dq_du + (alpha/n) * 2u / (1 - u^2 + eps); then chain through
    // u = tanh(mean + std z): d/dmean = (1-u^2), d/dlogstd = (1-u^2) std z,
    // plus the explicit -logstd term of the Gaussian entropy.
    let mut grad_out = Array2::zeros((n, 2 * d));
    let scale = alpha / n as f64;
    for b in 0..n {
        for j in 0..d {
            let u = sample.actions[[b, j]];
            let one_m_u2 = 1.0 - u * u;
            let dl_du = dq_du[[b, j]] + scale * 2.0 * u / (one_m_u2 + SQUASH_EPS);
            grad_out[[b, j]] = dl_du * one_m_u2;
            let gated = sample.log_std_active[[b, j]];
            grad_out[[b, d + j]] =
                gated * (dl_du * one_m_u2 * sample.std[[b, j]] * z[[b, j]] - scale);
        }
    }
    let (grads, _) = policy.net.backward(&sample.cache, &grad_out);
    (grads, loss, sample.log_prob)
}

/// Policy loss value only (finite-difference oracle surface).
pub fn policy_loss_value(
    policy: &GaussianPolicy,
    q1: &Mlp,
    q2: &Mlp,
    obs: &Array2<f64>,
    z: &Array2<f64>,
    alpha: f64,
) -> f64 {
    let n = obs.nrows();
    let sample = policy.sample_with_noise(obs, z);
    let obs_act = concat_cols(obs, &sample.actions);
    let o1 = q1.forward(&obs_act);
    let o2 = q2.forward(&obs_act);
    let mut loss = 0.0;
    for b in 0..n {
        let qmin = o1[[b, 0]].min(o2[[b, 0]]);
        loss += (alpha * sample.log_prob[b] - qmin) / n as f64;
    }
    loss
}

/// Temperature objective `-log_alpha * mean(log pi + target_entropy)`;
/// its gradient in `log_alpha` is the negated mean.
pub fn alpha_loss_value(log_alpha: f64, log_prob: &Array1<f64>, target_entropy: f64) -> f64 {
    -log_alpha * log_prob.mapv(|lp| lp + target_entropy).mean().unwrap()
}

/// `target <- (1 - polyak) * target + polyak * online`, elementwise.
pub fn polyak_update(target: &mut Mlp, online: &Mlp, polyak: f64) {
    for (tw, ow) in target.weights.iter_mut().zip(&online.weights) {
        tw.zip_mut_with(ow, |t, &o| *t = (1.0 - polyak) * *t + polyak * o);
    }
    for (tb, ob) in target.biases.iter_mut().zip(&online.biases) {
        tb.zip_mut_with(ob, |t, &o| *t = (1.0 - polyak) * *t + polyak * o);
    }
}
