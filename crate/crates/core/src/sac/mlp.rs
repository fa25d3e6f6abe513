//! Minimal dense network: linear layers with ReLU hidden activations, manual
//! backward pass, and Adam. Batches are row-major (`batch x features`).

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    /// Per layer, `in_dim x out_dim`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Layer inputs captured during a forward pass (the network input first,
/// then each post-ReLU hidden activation).
#[derive(Debug, Clone)]
pub struct MlpCache {
    pub layer_inputs: Vec<Array2<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpGrads {
    pub w: Vec<Array2<f64>>,
    pub b: Vec<Array1<f64>>,
}

impl Mlp {
    /// Uniform fan-in initialization on weights and biases.
    pub fn new(dims: &[usize], rng: &mut impl Rng) -> Mlp {
        assert!(dims.len() >= 2);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            weights.push(Array2::from_shape_fn((fan_in, fan_out), |_| {
                rng.random_range(-bound..bound)
            }));
            biases.push(Array1::from_shape_fn(fan_out, |_| rng.random_range(-bound..bound)));
        }
        Mlp { weights, biases }
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().unwrap().ncols()
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        self.forward_cached(x).0
    }

    pub fn forward_cached(&self, x: &Array2<f64>) -> (Array2<f64>, MlpCache) {
        let n_layers = self.weights.len();
        let mut layer_inputs = Vec::with_capacity(n_layers);
        let mut h = x.clone();
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            layer_inputs.push(h.clone());
            let mut z = h.dot(w);
            z += b;
            h = if i + 1 < n_layers { z.mapv(|v| v.max(0.0)) } else { z };
        }
        (h, MlpCache { layer_inputs })
    }

    /// Backpropagates `grad_out` (dL/d output, `batch x out`), returning the
    /// parameter gradients and the gradient with respect to the input batch.
    pub fn backward(&self, cache: &MlpCache, grad_out: &Array2<f64>) -> (MlpGrads, Array2<f64>) {
        let (grads, gin) = self.backward_impl(cache, grad_out, true);
        (grads.unwrap(), gin)
    }

    /// Input gradient only; skips accumulating parameter gradients.
    pub fn backward_input(&self, cache: &MlpCache, grad_out: &Array2<f64>) -> Array2<f64> {
        self.backward_impl(cache, grad_out, false).1
    }

    fn backward_impl(
        &self,
        cache: &MlpCache,
        grad_out: &Array2<f64>,
        with_params: bool,
    ) -> (Option<MlpGrads>, Array2<f64>) {
        let n_layers = self.weights.len();
        let mut gw = Vec::new();
        let mut gb = Vec::new();
        let mut delta = grad_out.clone();
        for i in (0..n_layers).rev() {
            let x = &cache.layer_inputs[i];
            if with_params {
                gw.push(x.t().dot(&delta));
                gb.push(delta.sum_axis(Axis(0)));
            }
            delta = delta.dot(&self.weights[i].t());
            if i > 0 {
                // The stored input of layer i is the post-ReLU output of
                // layer i-1: positive entries pass gradient, zeros block it.
                delta.zip_mut_with(x, |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
            }
        }
        let grads = with_params.then(|| {
            gw.reverse();
            gb.reverse();
            MlpGrads { w: gw, b: gb }
        });
        (grads, delta)
    }

    /// Visits every parameter in a fixed order (used by finite differencing).
    pub fn for_each_param_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for w in &mut self.weights {
            for v in w.iter_mut() {
                f(v);
            }
        }
        for b in &mut self.biases {
            for v in b.iter_mut() {
                f(v);
            }
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }
}

impl MlpGrads {
    /// Gradient values in the same order `for_each_param_mut` visits them.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for w in &self.w {
            out.extend(w.iter().copied());
        }
        for b in &self.b {
            out.extend(b.iter().copied());
        }
        out
    }
}

/// Adam with bias correction; moments mirror the network layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    m_w: Vec<Array2<f64>>,
    v_w: Vec<Array2<f64>>,
    m_b: Vec<Array1<f64>>,
    v_b: Vec<Array1<f64>>,
}

impl Adam {
    pub fn new(net: &Mlp, lr: f64) -> Adam {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m_w: net.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            v_w: net.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            m_b: net.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
            v_b: net.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &MlpGrads) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        let scale = self.lr / c1;
        for l in 0..net.weights.len() {
            adam_update(
                &mut net.weights[l],
                &grads.w[l],
                &mut self.m_w[l],
                &mut self.v_w[l],
                (self.beta1, self.beta2, self.eps, scale, c2),
            );
            adam_update(
                &mut net.biases[l],
                &grads.b[l],
                &mut self.m_b[l],
                &mut self.v_b[l],
                (self.beta1, self.beta2, self.eps, scale, c2),
            );
        }
    }
}

fn adam_update<D: ndarray::Dimension>(
    params: &mut ndarray::Array<f64, D>,
    grads: &ndarray::Array<f64, D>,
    m: &mut ndarray::Array<f64, D>,
    v: &mut ndarray::Array<f64, D>,
    (beta1, beta2, eps, scale, c2): (f64, f64, f64, f64, f64),
) {
    ndarray::Zip::from(params).and(grads).and(m).and(v).for_each(|p, &g, m, v| {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        *p -= scale * *m / ((*v / c2).sqrt() + eps);
    });
}

/// Single-scalar Adam (entropy temperature).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamScalar {
    pub lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: f64,
    v: f64,
}

impl AdamScalar {
    pub fn new(lr: f64) -> AdamScalar {
        AdamScalar { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: 0.0, v: 0.0 }
    }

    pub fn step(&mut self, param: &mut f64, grad: f64) {
        self.t += 1;
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad;
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        *param -= self.lr * (self.m / c1) / ((self.v / c2).sqrt() + self.eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forward_shapes_and_relu() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = Mlp::new(&[3, 5, 2], &mut rng);
        let x = Array2::zeros((4, 3));
        let y = net.forward(&x);
        assert_eq!(y.shape(), &[4, 2]);
        // Zero input: output equals bias path through ReLU of bias.
        let hidden = net.biases[0].mapv(|v| v.max(0.0));
        let expect = hidden.dot(&net.weights[1]) + &net.biases[1];
        for (a, b) in y.row(0).iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut net = Mlp::new(&[3, 8, 8, 2], &mut rng);
        let x = Array2::from_shape_fn((5, 3), |_| rng.random_range(-1.0..1.0));
        let target = Array2::from_shape_fn((5, 2), |_| rng.random_range(-1.0..1.0));

        let loss = |net: &Mlp| -> f64 {
            let y = net.forward(&x);
            (&y - &target).mapv(|d| d * d).mean().unwrap()
        };
        let (y, cache) = net.forward_cached(&x);
        let n = (y.len()) as f64;
        let grad_out = (&y - &target).mapv(|d| 2.0 * d / n);
        let (grads, _) = net.backward(&cache, &grad_out);
        let analytic = grads.flatten();

        let h = 1e-5;
        let mut fd = Vec::new();
        {
            let base = net.clone();
            let count = base.param_count();
            for k in 0..count {
                let mut plus = base.clone();
                let mut idx = 0;
                plus.for_each_param_mut(|p| {
                    if idx == k {
                        *p += h;
                    }
                    idx += 1;
                });
                let mut minus = base.clone();
                idx = 0;
                minus.for_each_param_mut(|p| {
                    if idx == k {
                        *p -= h;
                    }
                    idx += 1;
                });
                fd.push((loss(&plus) - loss(&minus)) / (2.0 * h));
            }
        }
        for (a, f) in analytic.iter().zip(&fd) {
            let rel = (a - f).abs() / (a.abs() + f.abs() + 1e-8);
            assert!(rel < 1e-4, "analytic {a} vs fd {f}");
        }
    }

    #[test]
    fn input_gradient_matches_full_backward() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = Mlp::new(&[4, 6, 3], &mut rng);
        let x = Array2::from_shape_fn((2, 4), |_| rng.random_range(-1.0..1.0));
        let (_, cache) = net.forward_cached(&x);
        let gout = Array2::from_shape_fn((2, 3), |_| rng.random_range(-1.0..1.0));
        let (_, gin_full) = net.backward(&cache, &gout);
        let gin_only = net.backward_input(&cache, &gout);
        assert_eq!(gin_full, gin_only);
    }

    #[test]
    fn adam_first_step_is_lr_times_sign() {
        // With zero moments, one step moves each param by ~lr * sign(grad).
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = Mlp::new(&[1, 1], &mut rng);
        let before = net.weights[0][[0, 0]];
        let mut opt = Adam::new(&net, 1e-3);
        let grads = MlpGrads { w: vec![array![[2.5]]], b: vec![array![0.0]] };
        opt.step(&mut net, &grads);
        let moved = before - net.weights[0][[0, 0]];
        assert!((moved - 1e-3).abs() < 1e-6);
    }
}
