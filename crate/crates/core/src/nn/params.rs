//! Named trainable parameters with paired gradients.

use std::collections::BTreeMap;

use super::tensor::Tensor;
use crate::rng::Rng;

#[derive(Debug, Clone)]
pub struct Param {
    pub value: Tensor,
    pub grad: Tensor,
    /// Running statistics and other buffers are stored here too but are
    /// skipped by the optimizer.
    pub trainable: bool,
}

/// Name-sorted map of parameters. The sort order is what makes checkpoints
/// and optimizer updates deterministic.
#[derive(Debug, Clone, Default)]
pub struct ParameterSet {
    entries: BTreeMap<String, Param>,
}

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, value: Tensor) {
        self.insert_full(name, value, true);
    }

    pub fn insert_buffer(&mut self, name: &str, value: Tensor) {
        self.insert_full(name, value, false);
    }

    fn insert_full(&mut self, name: &str, value: Tensor, trainable: bool) {
        let grad = Tensor::zeros(value.shape().to_vec());
        let prev = self.entries.insert(
            name.to_string(),
            Param {
                value,
                grad,
                trainable,
            },
        );
        assert!(prev.is_none(), "duplicate parameter name {name}");
    }

    pub fn get(&self, name: &str) -> &Param {
        self.entries
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Param {
        self.entries
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn value(&self, name: &str) -> &Tensor {
        &self.get(name).value
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Param)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Param)> {
        self.entries.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of trainable scalar values.
    pub fn trainable_len(&self) -> usize {
        self.entries
            .values()
            .filter(|p| p.trainable)
            .map(|p| p.value.len())
            .sum()
    }

    pub fn zero_grads(&mut self) {
        for p in self.entries.values_mut() {
            p.grad.fill(0.0);
        }
    }

    /// Glorot-uniform init for a weight of the given fan-in/fan-out.
    pub fn init_dense(&mut self, name: &str, out_dim: usize, in_dim: usize, rng: &mut Rng) {
        let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let data = (0..out_dim * in_dim)
            .map(|_| rng.uniform(-bound, bound))
            .collect();
        self.insert(&format!("{name}.w"), Tensor::new(vec![out_dim, in_dim], data));
        self.insert(&format!("{name}.b"), Tensor::zeros(vec![out_dim]));
    }

    /// He-style init for a conv kernel [c_out, c_in, k].
    pub fn init_conv(
        &mut self,
        name: &str,
        c_out: usize,
        c_in: usize,
        k: usize,
        rng: &mut Rng,
    ) {
        let sd = (2.0 / (c_in * k) as f64).sqrt();
        let data = (0..c_out * c_in * k)
            .map(|_| rng.normal_scaled(0.0, sd))
            .collect();
        self.insert(&format!("{name}.w"), Tensor::new(vec![c_out, c_in, k], data));
        self.insert(&format!("{name}.b"), Tensor::zeros(vec![c_out]));
    }

    /// Transpose-conv kernel [c_a, c_b, k] mapping c_a -> c_b channels.
    pub fn init_conv_transpose(
        &mut self,
        name: &str,
        c_a: usize,
        c_b: usize,
        k: usize,
        rng: &mut Rng,
    ) {
        let sd = (2.0 / (c_a * k) as f64).sqrt();
        let data = (0..c_a * c_b * k)
            .map(|_| rng.normal_scaled(0.0, sd))
            .collect();
        self.insert(&format!("{name}.w"), Tensor::new(vec![c_a, c_b, k], data));
        self.insert(&format!("{name}.b"), Tensor::zeros(vec![c_b]));
    }

    /// Batch-norm scale/shift plus running-statistic buffers.
    pub fn init_batch_norm(&mut self, name: &str, ch: usize) {
        self.insert(&format!("{name}.gamma"), Tensor::new(vec![ch], vec![1.0; ch]));
        self.insert(&format!("{name}.beta"), Tensor::zeros(vec![ch]));
        self.insert_buffer(&format!("{name}.running_mean"), Tensor::zeros(vec![ch]));
        self.insert_buffer(
            &format!("{name}.running_var"),
            Tensor::new(vec![ch], vec![1.0; ch]),
        );
    }
}
