//! The three architectures: a supervised convolutional baseline (FF), the
//! stacked variational pair (M1 feature extractor + M2 semi-supervised
//! classifier over its latents), and the semi-supervised adversarial pair
//! (generator + discriminator with K class outputs plus one fake output).
//!
//! Construction validates the configuration and runs a dummy forward pass,
//! so any shape disagreement is a build error rather than a runtime
//! surprise. Parameter counts are pure functions of the configuration and
//! are snapshot-tested below.

use thiserror::Error;

use crate::nn::{Mode, ParameterSet, Tape, Tensor, Var};
use crate::rng::Rng;
use crate::signal::Signal;

/// Widths shared by the convolutional trunks.
const CONV1: (usize, usize) = (5, 16); // kernel, channels
const CONV2: (usize, usize) = (3, 32);
const CONV3: (usize, usize) = (3, 64);
const FC_TRUNK: usize = 256;
const D_FC_WIDE: usize = 1024;
const LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    /// Signal length L; must be divisible by 4 (two 2x poolings).
    pub signal_len: usize,
    /// Number of classes K.
    pub num_classes: usize,
    /// M1 latent width.
    pub z1_dim: usize,
    /// M2 latent width.
    pub z2_dim: usize,
    /// Generator input width.
    pub z_gan_dim: usize,
}

impl ModelConfig {
    pub fn for_len(signal_len: usize) -> Self {
        ModelConfig {
            signal_len,
            num_classes: 4,
            z1_dim: 10,
            z2_dim: 3,
            z_gan_dim: 100,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.signal_len == 0 || self.signal_len % 4 != 0 {
            return Err(ModelError::BadLength(self.signal_len));
        }
        if self.num_classes < 2 {
            return Err(ModelError::BadClasses(self.num_classes));
        }
        if self.z1_dim == 0 || self.z2_dim == 0 || self.z_gan_dim == 0 {
            return Err(ModelError::BadLatentDim);
        }
        Ok(())
    }

    fn trunk_flat(&self) -> usize {
        CONV3.1 * (self.signal_len / 4)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("signal length {0} must be a positive multiple of 4")]
    BadLength(usize),
    #[error("need at least 2 classes, got {0}")]
    BadClasses(usize),
    #[error("latent dimensions must be positive")]
    BadLatentDim,
}

/// Batch statistics produced by a train-mode forward, to be folded into the
/// running buffers by the trainer.
#[derive(Debug, Clone)]
pub struct BnUpdate {
    pub name: String,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

/// running <- momentum * running + (1 - momentum) * batch
pub fn apply_bn_updates(params: &mut ParameterSet, updates: &[BnUpdate], momentum: f64) {
    for u in updates {
        for (suffix, batch) in [("running_mean", &u.mean), ("running_var", &u.var)] {
            let buf = params.get_mut(&format!("{}.{suffix}", u.name));
            for (r, &b) in buf.value.data_mut().iter_mut().zip(batch.iter()) {
                *r = momentum * *r + (1.0 - momentum) * b;
            }
        }
    }
}

fn dense_layer(tape: &mut Tape, params: &ParameterSet, name: &str, x: Var) -> Var {
    let w = tape.param(params, &format!("{name}.w"));
    let b = tape.param(params, &format!("{name}.b"));
    tape.dense(x, w, b)
}

fn conv_layer(tape: &mut Tape, params: &ParameterSet, name: &str, x: Var) -> Var {
    let w = tape.param(params, &format!("{name}.w"));
    let b = tape.param(params, &format!("{name}.b"));
    tape.conv1d(x, w, b)
}

fn conv_t_layer(tape: &mut Tape, params: &ParameterSet, name: &str, x: Var) -> Var {
    let w = tape.param(params, &format!("{name}.w"));
    let b = tape.param(params, &format!("{name}.b"));
    tape.conv1d_transpose(x, w, b)
}

fn bn_layer(
    tape: &mut Tape,
    params: &ParameterSet,
    name: &str,
    x: Var,
    mode: Mode,
    updates: &mut Vec<BnUpdate>,
) -> Var {
    let gamma = tape.param(params, &format!("{name}.gamma"));
    let beta = tape.param(params, &format!("{name}.beta"));
    let rm = params.value(&format!("{name}.running_mean")).data().to_vec();
    let rv = params.value(&format!("{name}.running_var")).data().to_vec();
    let (y, stats) = tape.batch_norm(x, gamma, beta, (&rm, &rv), mode);
    if let Some((mean, var)) = stats {
        updates.push(BnUpdate {
            name: name.to_string(),
            mean,
            var,
        });
    }
    y
}

/// Pack signals into the [B, 1, L] input layout.
pub fn signals_to_tensor(signals: &[&Signal]) -> Tensor {
    assert!(!signals.is_empty());
    let len = signals[0].values.len();
    let mut data = Vec::with_capacity(signals.len() * len);
    for s in signals {
        assert_eq!(s.values.len(), len, "signal length mismatch in batch");
        data.extend_from_slice(&s.values);
    }
    Tensor::new(vec![signals.len(), 1, len], data)
}

/// Pack feature vectors into a [B, D] tensor.
pub fn features_to_tensor(rows: &[Vec<f64>]) -> Tensor {
    assert!(!rows.is_empty());
    let dim = rows[0].len();
    let mut data = Vec::with_capacity(rows.len() * dim);
    for r in rows {
        assert_eq!(r.len(), dim);
        data.extend_from_slice(r);
    }
    Tensor::new(vec![rows.len(), dim], data)
}

/// One-hot encode class indices into [B, K].
pub fn one_hot(indices: &[usize], k: usize) -> Tensor {
    let mut data = vec![0.0; indices.len() * k];
    for (row, &c) in indices.iter().enumerate() {
        assert!(c < k);
        data[row * k + c] = 1.0;
    }
    Tensor::new(vec![indices.len(), k], data)
}

// ---- feed-forward baseline -------------------------------------------------

/// conv 5/16 - pool - conv 3/32 - pool - conv 3/64 - fc 256 - fc K.
#[derive(Debug, Clone)]
pub struct FfNet {
    pub cfg: ModelConfig,
}

impl FfNet {
    pub fn new(cfg: ModelConfig) -> Result<Self, ModelError> {
        cfg.validate()?;
        let net = FfNet { cfg };
        let params = net.init_params(&mut Rng::new(0));
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::zeros(vec![2, 1, cfg.signal_len]));
        let logits = net.forward(&mut tape, &params, x);
        assert_eq!(tape.shape(logits), &[2, cfg.num_classes]);
        Ok(net)
    }

    pub fn init_params(&self, rng: &mut Rng) -> ParameterSet {
        let mut p = ParameterSet::new();
        p.init_conv("ff.conv1", CONV1.1, 1, CONV1.0, rng);
        p.init_conv("ff.conv2", CONV2.1, CONV1.1, CONV2.0, rng);
        p.init_conv("ff.conv3", CONV3.1, CONV2.1, CONV3.0, rng);
        p.init_dense("ff.fc1", FC_TRUNK, self.cfg.trunk_flat(), rng);
        p.init_dense("ff.fc2", self.cfg.num_classes, FC_TRUNK, rng);
        p
    }

    /// x: [B, 1, L] -> logits [B, K]
    pub fn forward(&self, tape: &mut Tape, params: &ParameterSet, x: Var) -> Var {
        let batch = tape.shape(x)[0];
        let h = conv_layer(tape, params, "ff.conv1", x);
        let h = tape.relu(h);
        let (h, _) = tape.max_pool(h);
        let h = conv_layer(tape, params, "ff.conv2", h);
        let h = tape.relu(h);
        let (h, _) = tape.max_pool(h);
        let h = conv_layer(tape, params, "ff.conv3", h);
        let h = tape.relu(h);
        let h = tape.reshape(h, vec![batch, self.cfg.trunk_flat()]);
        let h = dense_layer(tape, params, "ff.fc1", h);
        let h = tape.relu(h);
        let logits = dense_layer(tape, params, "ff.fc2", h);
        assert_eq!(tape.shape(logits), &[batch, self.cfg.num_classes]);
        logits
    }
}

// ---- M1: variational autoencoder over signals -------------------------------

/// Encoder mirrors the FF trunk and ends in paired Gaussian heads of width
/// `z1_dim`; the decoder inverts the trunk with transpose convolutions and
/// duplication unpooling, ending in a sigmoid so reconstructions live in
/// (0, 1) like the prepared signals.
#[derive(Debug, Clone)]
pub struct M1Net {
    pub cfg: ModelConfig,
}

impl M1Net {
    pub fn new(cfg: ModelConfig) -> Result<Self, ModelError> {
        cfg.validate()?;
        let net = M1Net { cfg };
        let params = net.init_params(&mut Rng::new(0));
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::zeros(vec![2, 1, cfg.signal_len]));
        let (mu, logvar) = net.encode(&mut tape, &params, x);
        assert_eq!(tape.shape(mu), &[2, cfg.z1_dim]);
        assert_eq!(tape.shape(logvar), &[2, cfg.z1_dim]);
        let recon = net.decode(&mut tape, &params, mu);
        assert_eq!(tape.shape(recon), &[2, cfg.signal_len]);
        Ok(net)
    }

    pub fn init_params(&self, rng: &mut Rng) -> ParameterSet {
        let cfg = &self.cfg;
        let mut p = ParameterSet::new();
        p.init_conv("m1.enc.conv1", CONV1.1, 1, CONV1.0, rng);
        p.init_conv("m1.enc.conv2", CONV2.1, CONV1.1, CONV2.0, rng);
        p.init_conv("m1.enc.conv3", CONV3.1, CONV2.1, CONV3.0, rng);
        p.init_dense("m1.enc.fc", FC_TRUNK, cfg.trunk_flat(), rng);
        p.init_dense("m1.enc.mu", cfg.z1_dim, FC_TRUNK, rng);
        p.init_dense("m1.enc.logvar", cfg.z1_dim, FC_TRUNK, rng);
        // start the posterior tight so every latent dimension carries signal
        // before the KL term can prune it away
        p.get_mut("m1.enc.logvar.b").value.fill(-3.0);
        p.init_dense("m1.dec.fc0", cfg.trunk_flat(), cfg.z1_dim, rng);
        p.init_conv_transpose("m1.dec.convt1", CONV3.1, CONV2.1, CONV3.0, rng);
        p.init_conv_transpose("m1.dec.convt2", CONV2.1, CONV1.1, CONV2.0, rng);
        p.init_conv_transpose("m1.dec.convt3", CONV1.1, 1, CONV1.0, rng);
        p.init_dense("m1.dec.fc1", cfg.signal_len, cfg.signal_len, rng);
        p
    }

    /// x: [B, 1, L] -> (mu, logvar), each [B, z1_dim]
    pub fn encode(&self, tape: &mut Tape, params: &ParameterSet, x: Var) -> (Var, Var) {
        let batch = tape.shape(x)[0];
        let h = conv_layer(tape, params, "m1.enc.conv1", x);
        let h = tape.relu(h);
        let (h, _) = tape.max_pool(h);
        let h = conv_layer(tape, params, "m1.enc.conv2", h);
        let h = tape.relu(h);
        let (h, _) = tape.max_pool(h);
        let h = conv_layer(tape, params, "m1.enc.conv3", h);
        let h = tape.relu(h);
        let h = tape.reshape(h, vec![batch, self.cfg.trunk_flat()]);
        let h = dense_layer(tape, params, "m1.enc.fc", h);
        let h = tape.relu(h);
        let mu = dense_layer(tape, params, "m1.enc.mu", h);
        let logvar = dense_layer(tape, params, "m1.enc.logvar", h);
        (mu, logvar)
    }

    /// z: [B, z1_dim] -> reconstruction probabilities [B, L]
    pub fn decode(&self, tape: &mut Tape, params: &ParameterSet, z: Var) -> Var {
        let cfg = &self.cfg;
        let batch = tape.shape(z)[0];
        let quarter = cfg.signal_len / 4;
        let h = dense_layer(tape, params, "m1.dec.fc0", z);
        let h = tape.relu(h);
        let h = tape.reshape(h, vec![batch, CONV3.1, quarter]);
        let h = conv_t_layer(tape, params, "m1.dec.convt1", h);
        let h = tape.relu(h);
        let h = tape.max_unpool_dup(h);
        let h = conv_t_layer(tape, params, "m1.dec.convt2", h);
        let h = tape.relu(h);
        let h = tape.max_unpool_dup(h);
        let h = conv_t_layer(tape, params, "m1.dec.convt3", h);
        let h = tape.relu(h);
        let h = tape.reshape(h, vec![batch, cfg.signal_len]);
        let h = dense_layer(tape, params, "m1.dec.fc1", h);
        tape.sigmoid(h)
    }
}

// ---- M2: semi-supervised classifier over M1 latents --------------------------

/// Operates on z1 features. The encoder and decoder condition on the label
/// by concatenating a one-hot y; the classifier maps z1 to K logits.
#[derive(Debug, Clone)]
pub struct M2Net {
    pub cfg: ModelConfig,
}

const M2_HIDDEN: usize = 64;

impl M2Net {
    pub fn new(cfg: ModelConfig) -> Result<Self, ModelError> {
        cfg.validate()?;
        let net = M2Net { cfg };
        let params = net.init_params(&mut Rng::new(0));
        let mut tape = Tape::new();
        let z1 = tape.constant(Tensor::zeros(vec![2, cfg.z1_dim]));
        let y = tape.constant(one_hot(&[0, 1], cfg.num_classes));
        let logits = net.classify_logits(&mut tape, &params, z1);
        assert_eq!(tape.shape(logits), &[2, cfg.num_classes]);
        let (mu, logvar) = net.encode(&mut tape, &params, z1, y);
        assert_eq!(tape.shape(mu), &[2, cfg.z2_dim]);
        assert_eq!(tape.shape(logvar), &[2, cfg.z2_dim]);
        let z2 = tape.constant(Tensor::zeros(vec![2, cfg.z2_dim]));
        let recon = net.decode(&mut tape, &params, z2, y);
        assert_eq!(tape.shape(recon), &[2, cfg.z1_dim]);
        Ok(net)
    }

    pub fn init_params(&self, rng: &mut Rng) -> ParameterSet {
        let cfg = &self.cfg;
        let k = cfg.num_classes;
        let mut p = ParameterSet::new();
        p.init_dense("m2.enc.fc1", M2_HIDDEN, cfg.z1_dim + k, rng);
        p.init_dense("m2.enc.fc2", M2_HIDDEN, M2_HIDDEN, rng);
        p.init_dense("m2.enc.mu", cfg.z2_dim, M2_HIDDEN, rng);
        p.init_dense("m2.enc.logvar", cfg.z2_dim, M2_HIDDEN, rng);
        p.get_mut("m2.enc.logvar.b").value.fill(-3.0);
        p.init_dense("m2.dec.fc1", M2_HIDDEN, cfg.z2_dim + k, rng);
        p.init_dense("m2.dec.fc2", M2_HIDDEN, M2_HIDDEN, rng);
        p.init_dense("m2.dec.out", cfg.z1_dim, M2_HIDDEN, rng);
        p.init_dense("m2.cls.fc1", M2_HIDDEN, cfg.z1_dim, rng);
        p.init_dense("m2.cls.fc2", M2_HIDDEN, M2_HIDDEN, rng);
        p.init_dense("m2.cls.out", k, M2_HIDDEN, rng);
        p
    }

    /// z1: [B, z1_dim] -> logits [B, K]
    pub fn classify_logits(&self, tape: &mut Tape, params: &ParameterSet, z1: Var) -> Var {
        let h = dense_layer(tape, params, "m2.cls.fc1", z1);
        let h = tape.relu(h);
        let h = dense_layer(tape, params, "m2.cls.fc2", h);
        let h = tape.relu(h);
        dense_layer(tape, params, "m2.cls.out", h)
    }

    /// q(z2 | z1, y): inputs are concatenated.
    pub fn encode(&self, tape: &mut Tape, params: &ParameterSet, z1: Var, y: Var) -> (Var, Var) {
        let joined = tape.concat_cols(z1, y);
        assert_eq!(
            tape.shape(joined)[1],
            self.cfg.z1_dim + self.cfg.num_classes
        );
        let h = dense_layer(tape, params, "m2.enc.fc1", joined);
        let h = tape.relu(h);
        let h = dense_layer(tape, params, "m2.enc.fc2", h);
        let h = tape.relu(h);
        let mu = dense_layer(tape, params, "m2.enc.mu", h);
        let logvar = dense_layer(tape, params, "m2.enc.logvar", h);
        (mu, logvar)
    }

    /// p(z1 | z2, y): linear output, z1 features are unbounded.
    pub fn decode(&self, tape: &mut Tape, params: &ParameterSet, z2: Var, y: Var) -> Var {
        let joined = tape.concat_cols(z2, y);
        let h = dense_layer(tape, params, "m2.dec.fc1", joined);
        let h = tape.relu(h);
        let h = dense_layer(tape, params, "m2.dec.fc2", h);
        let h = tape.relu(h);
        dense_layer(tape, params, "m2.dec.out", h)
    }
}

// ---- semi-GAN ---------------------------------------------------------------

/// Generator mirrors the M1 decoder with batch norm; the discriminator is a
/// batch-normalized convolutional classifier with K+1 outputs: K class
/// logits plus one fake logit.
#[derive(Debug, Clone)]
pub struct GanNets {
    pub cfg: ModelConfig,
}

impl GanNets {
    pub fn new(cfg: ModelConfig) -> Result<Self, ModelError> {
        cfg.validate()?;
        let net = GanNets { cfg };
        let params = net.init_params(&mut Rng::new(0));
        let mut tape = Tape::new();
        let mut updates = Vec::new();
        let z = tape.constant(Tensor::zeros(vec![2, cfg.z_gan_dim]));
        let fake = net.generate(&mut tape, &params, z, Mode::Train, &mut updates);
        assert_eq!(tape.shape(fake), &[2, cfg.signal_len]);
        let x = tape.constant(Tensor::zeros(vec![2, 1, cfg.signal_len]));
        let logits = net.discriminate(&mut tape, &params, x, Mode::Train, &mut updates);
        assert_eq!(tape.shape(logits), &[2, cfg.num_classes + 1]);
        Ok(net)
    }

    pub fn init_params(&self, rng: &mut Rng) -> ParameterSet {
        let cfg = &self.cfg;
        let mut p = ParameterSet::new();
        // generator
        p.init_dense("gan.g.fc0", cfg.trunk_flat(), cfg.z_gan_dim, rng);
        p.init_batch_norm("gan.g.bn1", CONV3.1);
        p.init_conv_transpose("gan.g.convt1", CONV3.1, CONV2.1, CONV3.0, rng);
        p.init_batch_norm("gan.g.bn2", CONV2.1);
        p.init_batch_norm("gan.g.bn3", CONV2.1);
        p.init_conv_transpose("gan.g.convt2", CONV2.1, CONV1.1, CONV2.0, rng);
        p.init_batch_norm("gan.g.bn4", CONV1.1);
        p.init_batch_norm("gan.g.bn5", CONV1.1);
        p.init_conv_transpose("gan.g.convt3", CONV1.1, 1, CONV1.0, rng);
        p.init_dense("gan.g.fc1", cfg.signal_len, cfg.signal_len, rng);
        // discriminator
        p.init_conv("gan.d.conv1", CONV1.1, 1, CONV1.0, rng);
        p.init_batch_norm("gan.d.bn1", CONV1.1);
        p.init_batch_norm("gan.d.bn2", CONV1.1);
        p.init_conv("gan.d.conv2", CONV2.1, CONV1.1, CONV2.0, rng);
        p.init_batch_norm("gan.d.bn3", CONV2.1);
        p.init_batch_norm("gan.d.bn4", CONV2.1);
        p.init_dense("gan.d.fc1", FC_TRUNK, CONV2.1 * (cfg.signal_len / 4), rng);
        p.init_batch_norm("gan.d.bn5", FC_TRUNK);
        p.init_dense("gan.d.fc2", D_FC_WIDE, FC_TRUNK, rng);
        p.init_dense("gan.d.fc3", cfg.num_classes + 1, D_FC_WIDE, rng);
        p
    }

    /// z: [B, z_gan_dim] -> generated signals [B, L] in (0, 1)
    pub fn generate(
        &self,
        tape: &mut Tape,
        params: &ParameterSet,
        z: Var,
        mode: Mode,
        updates: &mut Vec<BnUpdate>,
    ) -> Var {
        let cfg = &self.cfg;
        let batch = tape.shape(z)[0];
        let quarter = cfg.signal_len / 4;
        let h = dense_layer(tape, params, "gan.g.fc0", z);
        let h = tape.reshape(h, vec![batch, CONV3.1, quarter]);
        let h = bn_layer(tape, params, "gan.g.bn1", h, mode, updates);
        let h = tape.relu(h);
        let h = conv_t_layer(tape, params, "gan.g.convt1", h);
        let h = bn_layer(tape, params, "gan.g.bn2", h, mode, updates);
        let h = tape.relu(h);
        let h = tape.max_unpool_dup(h);
        let h = bn_layer(tape, params, "gan.g.bn3", h, mode, updates);
        let h = tape.relu(h);
        let h = conv_t_layer(tape, params, "gan.g.convt2", h);
        let h = bn_layer(tape, params, "gan.g.bn4", h, mode, updates);
        let h = tape.relu(h);
        let h = tape.max_unpool_dup(h);
        let h = bn_layer(tape, params, "gan.g.bn5", h, mode, updates);
        let h = tape.relu(h);
        let h = conv_t_layer(tape, params, "gan.g.convt3", h);
        let h = tape.reshape(h, vec![batch, cfg.signal_len]);
        let h = dense_layer(tape, params, "gan.g.fc1", h);
        tape.sigmoid(h)
    }

    /// x: [B, 1, L] -> logits [B, K+1]; the last component is the fake logit.
    pub fn discriminate(
        &self,
        tape: &mut Tape,
        params: &ParameterSet,
        x: Var,
        mode: Mode,
        updates: &mut Vec<BnUpdate>,
    ) -> Var {
        let cfg = &self.cfg;
        let batch = tape.shape(x)[0];
        let h = conv_layer(tape, params, "gan.d.conv1", x);
        let h = bn_layer(tape, params, "gan.d.bn1", h, mode, updates);
        let h = tape.leaky_relu(h, LEAKY_SLOPE);
        let (h, _) = tape.max_pool(h);
        let h = bn_layer(tape, params, "gan.d.bn2", h, mode, updates);
        let h = tape.leaky_relu(h, LEAKY_SLOPE);
        let h = conv_layer(tape, params, "gan.d.conv2", h);
        let h = bn_layer(tape, params, "gan.d.bn3", h, mode, updates);
        let h = tape.leaky_relu(h, LEAKY_SLOPE);
        let (h, _) = tape.max_pool(h);
        let h = bn_layer(tape, params, "gan.d.bn4", h, mode, updates);
        let h = tape.leaky_relu(h, LEAKY_SLOPE);
        let h = tape.reshape(h, vec![batch, CONV2.1 * (cfg.signal_len / 4)]);
        let h = dense_layer(tape, params, "gan.d.fc1", h);
        let h = bn_layer(tape, params, "gan.d.bn5", h, mode, updates);
        let h = tape.leaky_relu(h, LEAKY_SLOPE);
        let h = dense_layer(tape, params, "gan.d.fc2", h);
        let h = tape.leaky_relu(h, LEAKY_SLOPE);
        dense_layer(tape, params, "gan.d.fc3", h)
    }

    /// Index of the fake logit.
    pub fn fake_index(&self) -> usize {
        self.cfg.num_classes
    }
}
