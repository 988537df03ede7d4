//! Adam with bias correction.

use std::collections::BTreeMap;

use super::params::ParameterSet;
use super::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn new(lr: f64, beta1: f64) -> Self {
        AdamConfig {
            lr,
            beta1,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig::new(1e-3, 0.9)
    }
}

/// First/second moment estimates per parameter, plus the step counter.
#[derive(Debug, Clone, Default)]
pub struct AdamState {
    pub t: u64,
    pub moments: BTreeMap<String, (Tensor, Tensor)>,
}

impl AdamState {
    pub fn new() -> Self {
        Self::default()
    }
}

/// One update over every trainable parameter, consuming current gradients.
pub fn adam_step(params: &mut ParameterSet, state: &mut AdamState, cfg: &AdamConfig) {
    state.t += 1;
    let t = state.t as f64;
    let bc1 = 1.0 - cfg.beta1.powf(t);
    let bc2 = 1.0 - cfg.beta2.powf(t);
    for (name, p) in params.iter_mut() {
        if !p.trainable {
            continue;
        }
        let (m, v) = state
            .moments
            .entry(name.to_string())
            .or_insert_with(|| {
                (
                    Tensor::zeros(p.value.shape().to_vec()),
                    Tensor::zeros(p.value.shape().to_vec()),
                )
            });
        let value = p.value.data_mut();
        let grad = p.grad.data();
        let md = m.data_mut();
        let vd = v.data_mut();
        for i in 0..value.len() {
            let g = grad[i];
            md[i] = cfg.beta1 * md[i] + (1.0 - cfg.beta1) * g;
            vd[i] = cfg.beta2 * vd[i] + (1.0 - cfg.beta2) * g * g;
            let m_hat = md[i] / bc1;
            let v_hat = vd[i] / bc2;
            value[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr_in_sign_direction() {
        let mut params = ParameterSet::new();
        params.insert("w", Tensor::new(vec![2], vec![1.0, -1.0]));
        params.get_mut("w").grad = Tensor::new(vec![2], vec![0.3, -0.7]);
        let mut state = AdamState::new();
        let cfg = AdamConfig::new(0.01, 0.9);
        adam_step(&mut params, &mut state, &cfg);
        let v = params.get("w").value.data();
        assert!((v[0] - (1.0 - 0.01)).abs() < 1e-6, "{v:?}");
        assert!((v[1] - (-1.0 + 0.01)).abs() < 1e-6, "{v:?}");
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut params = ParameterSet::new();
        params.insert("w", Tensor::new(vec![3], vec![0.5, 1.5, -2.0]));
        let mut state = AdamState::new();
        adam_step(&mut params, &mut state, &AdamConfig::default());
        assert_eq!(params.get("w").value.data(), &[0.5, 1.5, -2.0]);
    }

    #[test]
    fn quadratic_bowl_converges() {
        // minimize sum((w - c)^2)
        let target = [3.0, -1.25, 0.5];
        let mut params = ParameterSet::new();
        params.insert("w", Tensor::zeros(vec![3]));
        let mut state = AdamState::new();
        let cfg = AdamConfig::new(0.05, 0.9);
        for _ in 0..5000 {
            let dist: f64 = {
                let w = params.get("w").value.data();
                w.iter()
                    .zip(&target)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum()
            };
            if dist < 1e-14 {
                break;
            }
            {
                let w: Vec<f64> = params.get("w").value.data().to_vec();
                let g = params.get_mut("w").grad.data_mut();
                for i in 0..3 {
                    g[i] = 2.0 * (w[i] - target[i]);
                }
            }
            adam_step(&mut params, &mut state, &cfg);
            params.zero_grads();
        }
        let w = params.get("w").value.data();
        for (a, b) in w.iter().zip(&target) {
            assert!((a - b).abs() < 1e-6, "{w:?}");
        }
    }

    #[test]
    fn buffers_are_not_updated() {
        let mut params = ParameterSet::new();
        params.insert_buffer("stat", Tensor::new(vec![1], vec![4.0]));
        params.get_mut("stat").grad = Tensor::new(vec![1], vec![100.0]);
        let mut state = AdamState::new();
        adam_step(&mut params, &mut state, &AdamConfig::default());
        assert_eq!(params.get("stat").value.data(), &[4.0]);
    }
}
