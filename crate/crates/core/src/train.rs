//! The four training procedures: supervised baseline, unsupervised
//! autoencoder, semi-supervised classifier over its latents, and the
//! adversarial pair. Every trainer is a pure function of (data, config,
//! seed): same inputs, bit-identical checkpoint.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::checkpoint::{Checkpoint, ModelKind};
use crate::class::ReadClass;
use crate::eval::{
    classify_m1m2, classify_semigan, extract_z1, macro_f_from_indices, stratified_subset_indices,
    Classification,
};
use crate::models::{
    apply_bn_updates, features_to_tensor, one_hot, signals_to_tensor, FfNet, GanNets, M1Net,
    M2Net, ModelConfig, ModelError,
};
use crate::nn::{adam_step, AdamConfig, AdamState, Mode, ParameterSet, Tape, Tensor};
use crate::rng::Rng;
use crate::signal::Signal;

const BN_MOMENTUM: f64 = 0.9;
const VAL_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub lr: f64,
    pub beta1: f64,
    pub seed: u64,
    /// Scale of the explicit classifier term in the semi-supervised
    /// objective: alpha = alpha_scale * (N_labeled + N_unlabeled) / N_labeled.
    pub alpha_scale: f64,
}

impl TrainConfig {
    pub fn ff(seed: u64) -> Self {
        TrainConfig {
            batch_size: 64,
            epochs: 100,
            lr: 1e-3,
            beta1: 0.9,
            seed,
            alpha_scale: 0.1,
        }
    }

    pub fn m1(seed: u64) -> Self {
        TrainConfig {
            epochs: 200,
            ..TrainConfig::ff(seed)
        }
    }

    pub fn m2(seed: u64) -> Self {
        TrainConfig {
            epochs: 200,
            ..TrainConfig::ff(seed)
        }
    }

    pub fn semigan(seed: u64) -> Self {
        TrainConfig {
            epochs: 300,
            lr: 2e-4,
            beta1: 0.5,
            ..TrainConfig::ff(seed)
        }
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig::new(self.lr, self.beta1)
    }

    /// Zero epochs is allowed and returns the initialization unchanged.
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.batch_size < 2 {
            return Err(TrainError::BadConfig("batch_size must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LabeledSet {
    pub signals: Vec<Signal>,
    pub labels: Vec<ReadClass>,
}

impl LabeledSet {
    pub fn new(signals: Vec<Signal>, labels: Vec<ReadClass>) -> Result<Self, TrainError> {
        if signals.len() != labels.len() {
            return Err(TrainError::BadConfig(format!(
                "{} signals but {} labels",
                signals.len(),
                labels.len()
            )));
        }
        Ok(LabeledSet { signals, labels })
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledSet {
        LabeledSet {
            signals: indices.iter().map(|&i| self.signals[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct UnlabeledSet {
    pub signals: Vec<Signal>,
}

/// Labeled and unlabeled pools must not share read ids.
pub fn check_disjoint(labeled: &LabeledSet, unlabeled: &UnlabeledSet) -> Result<(), TrainError> {
    let ids: BTreeSet<&str> = labeled.signals.iter().map(|s| s.read_id.as_str()).collect();
    for s in &unlabeled.signals {
        if ids.contains(s.read_id.as_str()) {
            return Err(TrainError::BadConfig(format!(
                "read {} appears in both the labeled and unlabeled pools",
                s.read_id
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("bad training setup: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("non-finite {what} at epoch {epoch}, step {step}: training diverged")]
    NonFinite {
        what: &'static str,
        epoch: usize,
        step: usize,
    },
}

#[derive(Debug, Clone)]
pub struct EpochRecord {
    pub epoch: usize,
    pub fields: Vec<(&'static str, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct TrainLog {
    pub records: Vec<EpochRecord>,
}

impl TrainLog {
    pub fn field(&self, epoch_idx: usize, name: &str) -> Option<f64> {
        self.records
            .get(epoch_idx)?
            .fields
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }

    /// One line per epoch: epoch, loss components, then val macro-F when
    /// tracked. A leading '#' header names the columns.
    pub fn to_tsv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        if let Some(first) = self.records.first() {
            out.push_str("# epoch");
            for (name, _) in &first.fields {
                out.push('\t');
                out.push_str(name);
            }
            out.push('\n');
        }
        for r in &self.records {
            write!(out, "{}", r.epoch).unwrap();
            for (_, v) in &r.fields {
                write!(out, "\t{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub log: TrainLog,
    pub best_val_f: Option<f64>,
}

/// Seeded permutation chunked into batches; chunks smaller than 2 are
/// dropped (batch statistics need at least two rows).
fn batches(n: usize, batch_size: usize, rng: &mut Rng) -> Vec<Vec<usize>> {
    let perm = rng.permutation(n);
    perm.chunks(batch_size)
        .filter(|c| c.len() >= 2)
        .map(|c| c.to_vec())
        .collect()
}

/// Class-stratified 20% validation split; classes with fewer than 2 members
/// stay wholly in training.
fn val_split(labels: &[ReadClass], rng: &mut Rng) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in ReadClass::ALL {
        let members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if members.len() < 2 {
            train.extend(members);
            continue;
        }
        let n_val = ((members.len() as f64 * VAL_FRACTION).round() as usize).max(1);
        let picks: BTreeSet<usize> = rng
            .sample_indices(members.len(), n_val)
            .into_iter()
            .collect();
        for (j, &idx) in members.iter().enumerate() {
            if picks.contains(&j) {
                val.push(idx);
            } else {
                train.push(idx);
            }
        }
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

fn finite_or(v: f64, what: &'static str, epoch: usize, step: usize) -> Result<f64, TrainError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(TrainError::NonFinite { what, epoch, step })
    }
}

// ---- feed-forward baseline ---------------------------------------------------

pub fn train_ff(
    labeled: &LabeledSet,
    mcfg: ModelConfig,
    tcfg: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    tcfg.validate()?;
    if labeled.is_empty() {
        return Err(TrainError::BadConfig("empty labeled set".into()));
    }
    let net = FfNet::new(mcfg)?;
    let mut rng = Rng::derive(tcfg.seed, 0xff00);
    let mut params = net.init_params(&mut rng);
    let mut opt = AdamState::new();
    let adam_cfg = tcfg.adam();

    let (train_idx, val_idx) = val_split(&labeled.labels, &mut rng);
    let mut best_params = params.clone();
    let mut best_f = f64::NEG_INFINITY;
    let mut log = TrainLog::default();

    for epoch in 0..tcfg.epochs {
        let mut epoch_loss = 0.0;
        let mut steps = 0usize;
        for (step, batch) in batches(train_idx.len(), tcfg.batch_size, &mut rng)
            .into_iter()
            .enumerate()
        {
            let idx: Vec<usize> = batch.iter().map(|&i| train_idx[i]).collect();
            let refs: Vec<&Signal> = idx.iter().map(|&i| &labeled.signals[i]).collect();
            let classes: Vec<usize> = idx.iter().map(|&i| labeled.labels[i].index()).collect();
            let mut tape = Tape::new();
            let x = tape.constant(signals_to_tensor(&refs));
            let logits = net.forward(&mut tape, &params, x);
            let target = one_hot(&classes, mcfg.num_classes);
            let ce = tape.cross_entropy_vec(logits, &target);
            let loss = tape.mean_batch(ce);
            let value = finite_or(tape.value(loss).item(), "loss", epoch, step)?;
            epoch_loss += value;
            steps += 1;
            let grads = tape.backward(loss);
            params.zero_grads();
            tape.apply_grads(&grads, &mut params);
            adam_step(&mut params, &mut opt, &adam_cfg);
        }
        let val_f = if val_idx.is_empty() {
            f64::NAN
        } else {
            ff_val_macro_f(&net, &params, labeled, &val_idx)
        };
        if val_f.is_finite() && val_f >= best_f {
            // ties go to the later epoch: with tiny validation splits the
            // macro-F is coarse and more training is the better bet
            best_f = val_f;
            best_params = params.clone();
        }
        log.records.push(EpochRecord {
            epoch: epoch + 1,
            fields: vec![
                ("ce", epoch_loss / steps.max(1) as f64),
                ("val_macro_f", val_f),
            ],
        });
    }
    if best_f == f64::NEG_INFINITY {
        best_params = params;
    }
    let mut ckpt = Checkpoint::new(ModelKind::Ff, mcfg, best_params);
    ckpt.opt.push(("main".into(), opt));
    Ok(TrainOutcome {
        checkpoint: ckpt,
        log,
        best_val_f: (best_f != f64::NEG_INFINITY).then_some(best_f),
    })
}

fn ff_val_macro_f(
    net: &FfNet,
    params: &ParameterSet,
    labeled: &LabeledSet,
    val_idx: &[usize],
) -> f64 {
    let refs: Vec<&Signal> = val_idx.iter().map(|&i| &labeled.signals[i]).collect();
    let truth: Vec<usize> = val_idx.iter().map(|&i| labeled.labels[i].index()).collect();
    let mut tape = Tape::new();
    let x = tape.constant(signals_to_tensor(&refs));
    let logits = net.forward(&mut tape, params, x);
    let pred = argmax_rows(tape.value(logits).data(), truth.len());
    macro_f_from_indices(&pred, &truth).value
}

fn argmax_rows(data: &[f64], rows: usize) -> Vec<usize> {
    let k = data.len() / rows;
    (0..rows)
        .map(|r| {
            let row = &data[r * k..(r + 1) * k];
            let mut best = 0;
            for (i, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

// ---- M1 ------------------------------------------------------------------------

pub fn train_m1(
    signals: &[Signal],
    mcfg: ModelConfig,
    tcfg: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    tcfg.validate()?;
    if signals.len() < 2 {
        return Err(TrainError::BadConfig("need at least 2 signals".into()));
    }
    let net = M1Net::new(mcfg)?;
    let mut rng = Rng::derive(tcfg.seed, 0x0a1);
    let mut params = net.init_params(&mut rng);
    let mut opt = AdamState::new();
    let adam_cfg = tcfg.adam();
    let mut log = TrainLog::default();

    for epoch in 0..tcfg.epochs {
        let mut sums = (0.0f64, 0.0f64); // recon, kl
        let mut kl_min = f64::INFINITY;
        let mut steps = 0usize;
        for (step, batch) in batches(signals.len(), tcfg.batch_size, &mut rng)
            .into_iter()
            .enumerate()
        {
            let refs: Vec<&Signal> = batch.iter().map(|&i| &signals[i]).collect();
            let flat = {
                let t = signals_to_tensor(&refs);
                let b = refs.len();
                t.reshaped(vec![b, mcfg.signal_len])
            };
            let mut tape = Tape::new();
            let x3 = tape.constant(flat.clone().reshaped(vec![refs.len(), 1, mcfg.signal_len]));
            let (mu, logvar) = net.encode(&mut tape, &params, x3);
            let z = tape.sample_gaussian(mu, logvar, &mut rng);
            let px = net.decode(&mut tape, &params, z);
            let recon_vec = tape.bernoulli_nll_vec(px, &flat);
            let kl_vec = tape.kl_diag_gaussian_vec(mu, logvar);
            let recon = tape.mean_batch(recon_vec);
            let kl = tape.mean_batch(kl_vec);
            let loss = tape.add(recon, kl);
            let recon_v = finite_or(tape.value(recon).item(), "reconstruction", epoch, step)?;
            let kl_v = finite_or(tape.value(kl).item(), "kl", epoch, step)?;
            sums.0 += recon_v;
            sums.1 += kl_v;
            kl_min = kl_min.min(kl_v);
            steps += 1;
            let grads = tape.backward(loss);
            params.zero_grads();
            tape.apply_grads(&grads, &mut params);
            adam_step(&mut params, &mut opt, &adam_cfg);
        }
        let n = steps.max(1) as f64;
        log.records.push(EpochRecord {
            epoch: epoch + 1,
            fields: vec![
                ("recon", sums.0 / n),
                ("kl", sums.1 / n),
                ("elbo", -(sums.0 + sums.1) / n),
                ("kl_min", kl_min),
            ],
        });
    }
    let mut ckpt = Checkpoint::new(ModelKind::M1, mcfg, params);
    ckpt.opt.push(("main".into(), opt));
    Ok(TrainOutcome {
        checkpoint: ckpt,
        log,
        best_val_f: None,
    })
}

// ---- M2 ------------------------------------------------------------------------

pub struct M2Data<'a> {
    pub z1_labeled: &'a [Vec<f64>],
    pub labels: &'a [ReadClass],
    pub z1_unlabeled: &'a [Vec<f64>],
}

pub fn train_m2(
    data: &M2Data,
    mcfg: ModelConfig,
    tcfg: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    tcfg.validate()?;
    if data.z1_labeled.len() != data.labels.len() {
        return Err(TrainError::BadConfig("labeled features/labels length mismatch".into()));
    }
    if data.z1_labeled.is_empty() || data.z1_unlabeled.is_empty() {
        return Err(TrainError::BadConfig("both labeled and unlabeled features required".into()));
    }
    let net = M2Net::new(mcfg)?;
    let k = mcfg.num_classes;
    let ln_k = (k as f64).ln();
    let mut rng = Rng::derive(tcfg.seed, 0x0a2);
    let mut params = net.init_params(&mut rng);
    let mut opt = AdamState::new();
    let adam_cfg = tcfg.adam();
    let mut log = TrainLog::default();

    let (train_idx, val_idx) = val_split(data.labels, &mut rng);
    let n_l = train_idx.len().max(1);
    let n_u = data.z1_unlabeled.len();
    let alpha = tcfg.alpha_scale * (n_l + n_u) as f64 / n_l as f64;

    let mut best_params = params.clone();
    let mut best_f = f64::NEG_INFINITY;

    for epoch in 0..tcfg.epochs {
        let mut sums = (0.0f64, 0.0f64, 0.0f64); // labeled, classifier, unlabeled
        let mut steps = 0usize;
        let labeled_order: Vec<usize> = {
            let mut o = train_idx.clone();
            rng.shuffle(&mut o);
            o
        };
        let mut labeled_cursor = 0usize;
        for (step, ubatch) in batches(n_u, tcfg.batch_size, &mut rng).into_iter().enumerate() {
            // labeled batch, cycled
            let lbatch: Vec<usize> = (0..tcfg.batch_size.min(labeled_order.len()))
                .map(|j| labeled_order[(labeled_cursor + j) % labeled_order.len()])
                .collect();
            labeled_cursor = (labeled_cursor + lbatch.len()) % labeled_order.len().max(1);

            let mut tape = Tape::new();

            // labeled term
            let lrows: Vec<Vec<f64>> = lbatch.iter().map(|&i| data.z1_labeled[i].clone()).collect();
            let lclasses: Vec<usize> = lbatch.iter().map(|&i| data.labels[i].index()).collect();
            let l_tensor = features_to_tensor(&lrows);
            let zl = tape.constant(l_tensor.clone());
            let y_l = one_hot(&lclasses, k);
            let y_l_var = tape.constant(y_l.clone());
            let (mu, logvar) = net.encode(&mut tape, &params, zl, y_l_var);
            let z2 = tape.sample_gaussian(mu, logvar, &mut rng);
            let recon = net.decode(&mut tape, &params, z2, y_l_var);
            let recon_vec = tape.gaussian_sq_nll_vec(recon, &l_tensor);
            let kl_vec = tape.kl_diag_gaussian_vec(mu, logvar);
            let bound = tape.add(recon_vec, kl_vec);
            let bound = tape.add_const(bound, ln_k); // -log p(y), uniform prior
            let labeled_loss = tape.mean_batch(bound);

            let cls_logits = net.classify_logits(&mut tape, &params, zl);
            let ce_vec = tape.cross_entropy_vec(cls_logits, &y_l);
            let cls_loss = tape.mean_batch(ce_vec);

            // unlabeled term: sum_y q(y|z1) * bound_y - H(q)
            let urows: Vec<Vec<f64>> = ubatch.iter().map(|&i| data.z1_unlabeled[i].clone()).collect();
            let u_tensor = features_to_tensor(&urows);
            let zu = tape.constant(u_tensor.clone());
            let u_logits = net.classify_logits(&mut tape, &params, zu);
            let q = tape.softmax(u_logits);
            let mut weighted_sum: Option<crate::nn::Var> = None;
            for y in 0..k {
                let y_const = tape.constant(one_hot(&vec![y; urows.len()], k));
                let (mu_y, logvar_y) = net.encode(&mut tape, &params, zu, y_const);
                let z2_y = tape.sample_gaussian(mu_y, logvar_y, &mut rng);
                let recon_y = net.decode(&mut tape, &params, z2_y, y_const);
                let recon_vec_y = tape.gaussian_sq_nll_vec(recon_y, &u_tensor);
                let kl_vec_y = tape.kl_diag_gaussian_vec(mu_y, logvar_y);
                let bound_y = tape.add(recon_vec_y, kl_vec_y);
                let bound_y = tape.add_const(bound_y, ln_k);
                let q_y = tape.slice_cols(q, y, y + 1);
                let q_y = tape.reshape(q_y, vec![urows.len()]);
                let weighted = tape.mul(q_y, bound_y);
                weighted_sum = Some(match weighted_sum {
                    Some(acc) => tape.add(acc, weighted),
                    None => weighted,
                });
            }
            let entropy = tape.entropy_vec(q);
            let u_vec = tape.sub(weighted_sum.expect("k >= 2"), entropy);
            let unlabeled_loss = tape.mean_batch(u_vec);

            let scaled_cls = tape.scale(cls_loss, alpha);
            let partial = tape.add(labeled_loss, scaled_cls);
            let total = tape.add(partial, unlabeled_loss);

            sums.0 += finite_or(tape.value(labeled_loss).item(), "labeled bound", epoch, step)?;
            sums.1 += finite_or(tape.value(cls_loss).item(), "classifier", epoch, step)?;
            sums.2 += finite_or(tape.value(unlabeled_loss).item(), "unlabeled bound", epoch, step)?;
            steps += 1;

            let grads = tape.backward(total);
            params.zero_grads();
            tape.apply_grads(&grads, &mut params);
            adam_step(&mut params, &mut opt, &adam_cfg);
        }
        let val_f = if val_idx.is_empty() {
            f64::NAN
        } else {
            m2_val_macro_f(&net, &params, data, &val_idx)
        };
        if val_f.is_finite() && val_f >= best_f {
            // ties go to the later epoch: with tiny validation splits the
            // macro-F is coarse and more training is the better bet
            best_f = val_f;
            best_params = params.clone();
        }
        let n = steps.max(1) as f64;
        log.records.push(EpochRecord {
            epoch: epoch + 1,
            fields: vec![
                ("labeled", sums.0 / n),
                ("classifier", sums.1 / n),
                ("unlabeled", sums.2 / n),
                ("val_macro_f", val_f),
            ],
        });
    }
    if best_f == f64::NEG_INFINITY {
        best_params = params;
    }
    let mut ckpt = Checkpoint::new(ModelKind::M2, mcfg, best_params);
    ckpt.opt.push(("main".into(), opt));
    Ok(TrainOutcome {
        checkpoint: ckpt,
        log,
        best_val_f: (best_f != f64::NEG_INFINITY).then_some(best_f),
    })
}

fn m2_val_macro_f(net: &M2Net, params: &ParameterSet, data: &M2Data, val_idx: &[usize]) -> f64 {
    let rows: Vec<Vec<f64>> = val_idx.iter().map(|&i| data.z1_labeled[i].clone()).collect();
    let truth: Vec<usize> = val_idx.iter().map(|&i| data.labels[i].index()).collect();
    let mut tape = Tape::new();
    let z = tape.constant(features_to_tensor(&rows));
    let logits = net.classify_logits(&mut tape, params, z);
    let pred = argmax_rows(tape.value(logits).data(), truth.len());
    macro_f_from_indices(&pred, &truth).value
}

// ---- semi-GAN --------------------------------------------------------------------

pub fn train_semigan(
    labeled: &LabeledSet,
    unlabeled: &UnlabeledSet,
    mcfg: ModelConfig,
    tcfg: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    tcfg.validate()?;
    if labeled.len() < 2 {
        return Err(TrainError::BadConfig("need at least 2 labeled signals".into()));
    }
    if unlabeled.signals.len() < 2 {
        return Err(TrainError::BadConfig("need at least 2 unlabeled signals".into()));
    }
    check_disjoint(labeled, unlabeled)?;
    let net = GanNets::new(mcfg)?;
    let k = mcfg.num_classes;
    let fake_idx = net.fake_index();
    let mut rng = Rng::derive(tcfg.seed, 0x9a5);
    let all_params = net.init_params(&mut rng);
    let (mut g_params, mut d_params) = split_gan_params(&all_params);
    let mut g_opt = AdamState::new();
    let mut d_opt = AdamState::new();
    let adam_cfg = tcfg.adam();
    let mut log = TrainLog::default();

    let (train_idx, val_idx) = val_split(&labeled.labels, &mut rng);
    let mut best = (g_params.clone(), d_params.clone());
    let mut best_f = f64::NEG_INFINITY;

    for epoch in 0..tcfg.epochs {
        let mut sums = (0.0f64, 0.0f64, 0.0f64, 0.0f64); // d_sup, d_unsup, d_fake, g
        let mut steps = 0usize;
        let labeled_order: Vec<usize> = {
            let mut o = train_idx.clone();
            rng.shuffle(&mut o);
            o
        };
        let mut labeled_cursor = 0usize;
        for (step, ubatch) in batches(unlabeled.signals.len(), tcfg.batch_size, &mut rng)
            .into_iter()
            .enumerate()
        {
            let lbatch: Vec<usize> = (0..tcfg.batch_size.min(labeled_order.len()))
                .map(|j| labeled_order[(labeled_cursor + j) % labeled_order.len()])
                .collect();
            labeled_cursor = (labeled_cursor + lbatch.len()) % labeled_order.len().max(1);
            let n_l = lbatch.len();
            let n_u = ubatch.len();
            let n_f = n_u;

            // generate a detached fake batch (no gradient into G)
            let fake_values = {
                let mut gen_tape = Tape::new();
                let mut discard = Vec::new();
                let z = gaussian_tensor(&mut rng, n_f, mcfg.z_gan_dim);
                let z = gen_tape.constant(z);
                let fake = net.generate(&mut gen_tape, &g_params, z, Mode::Train, &mut discard);
                gen_tape.value(fake).clone()
            };

            // discriminator step. Each sub-population (labeled, unlabeled,
            // fake) runs through batch norm with its own batch statistics:
            // mixing them would let the discriminator win on batch-level
            // statistics alone and starve the features. Running buffers
            // track only the real unlabeled stream, which is what eval-mode
            // classification will see.
            {
                let mut tape = Tape::new();
                let mut updates = Vec::new();
                let mut discard = Vec::new();
                let lrefs: Vec<&Signal> = lbatch.iter().map(|&i| &labeled.signals[i]).collect();
                let lclasses: Vec<usize> =
                    lbatch.iter().map(|&i| labeled.labels[i].index()).collect();
                let urefs: Vec<&Signal> = ubatch.iter().map(|&i| &unlabeled.signals[i]).collect();
                let lx = tape.constant(signals_to_tensor(&lrefs));
                let ux = tape.constant(signals_to_tensor(&urefs));
                let fx = tape.constant(fake_values.clone().reshaped(vec![n_f, 1, mcfg.signal_len]));
                let l_logits = net.discriminate(&mut tape, &d_params, lx, Mode::Train, &mut discard);
                let u_logits = net.discriminate(&mut tape, &d_params, ux, Mode::Train, &mut updates);
                let f_logits = net.discriminate(&mut tape, &d_params, fx, Mode::Train, &mut discard);

                // supervised: CE over the K class logits only
                let class_logits = tape.slice_cols(l_logits, 0, k);
                let target = one_hot(&lclasses, k);
                let sup_vec = tape.cross_entropy_vec(class_logits, &target);
                let sup = tape.mean_batch(sup_vec);

                let not_fake = tape.log_prob_not_class_vec(u_logits, fake_idx);
                let unsup_vec = tape.scale(not_fake, -1.0);
                let unsup = tape.mean_batch(unsup_vec);

                let is_fake = tape.log_prob_class_vec(f_logits, fake_idx);
                let fake_vec = tape.scale(is_fake, -1.0);
                let fake_loss = tape.mean_batch(fake_vec);

                let partial = tape.add(sup, unsup);
                let d_loss = tape.add(partial, fake_loss);

                sums.0 += finite_or(tape.value(sup).item(), "discriminator supervised loss", epoch, step)?;
                sums.1 += finite_or(tape.value(unsup).item(), "discriminator unsupervised loss", epoch, step)?;
                sums.2 += finite_or(tape.value(fake_loss).item(), "discriminator fake loss", epoch, step)?;

                let grads = tape.backward(d_loss);
                d_params.zero_grads();
                tape.apply_grads(&grads, &mut d_params);
                adam_step(&mut d_params, &mut d_opt, &adam_cfg);
                apply_bn_updates(&mut d_params, &updates, BN_MOMENTUM);
            }

            // generator step: minimize -log(1 - p_fake(G(z))). The frozen
            // discriminator sees the fake batch exactly as the D step did:
            // train-mode statistics over the batch itself, no buffer updates.
            {
                let mut tape = Tape::new();
                let mut g_updates = Vec::new();
                let mut d_updates = Vec::new();
                let z = gaussian_tensor(&mut rng, n_f, mcfg.z_gan_dim);
                let z = tape.constant(z);
                let fake = net.generate(&mut tape, &g_params, z, Mode::Train, &mut g_updates);
                let fx = tape.reshape(fake, vec![n_f, 1, mcfg.signal_len]);
                let logits = net.discriminate(&mut tape, &d_params, fx, Mode::Train, &mut d_updates);
                let not_fake = tape.log_prob_not_class_vec(logits, fake_idx);
                let g_vec = tape.scale(not_fake, -1.0);
                let g_loss = tape.mean_batch(g_vec);
                sums.3 += finite_or(tape.value(g_loss).item(), "generator loss", epoch, step)?;

                let grads = tape.backward(g_loss);
                g_params.zero_grads();
                tape.apply_grads(&grads, &mut g_params);
                adam_step(&mut g_params, &mut g_opt, &adam_cfg);
                apply_bn_updates(&mut g_params, &g_updates, BN_MOMENTUM);
            }
            steps += 1;
        }

        let val_f = if val_idx.is_empty() {
            f64::NAN
        } else {
            let refs: Vec<Signal> = val_idx.iter().map(|&i| labeled.signals[i].clone()).collect();
            let truth: Vec<usize> = val_idx.iter().map(|&i| labeled.labels[i].index()).collect();
            let pred = classify_semigan((&net, &d_params), &refs);
            let pred_idx: Vec<usize> = pred.iter().map(Classification::label_index).collect();
            macro_f_from_indices(&pred_idx, &truth).value
        };
        if val_f.is_finite() && val_f >= best_f {
            // ties go to the later epoch: with tiny validation splits the
            // macro-F is coarse and more training is the better bet
            best_f = val_f;
            best = (g_params.clone(), d_params.clone());
        }
        let n = steps.max(1) as f64;
        log.records.push(EpochRecord {
            epoch: epoch + 1,
            fields: vec![
                ("d_sup", sums.0 / n),
                ("d_unsup", sums.1 / n),
                ("d_fake", sums.2 / n),
                ("g", sums.3 / n),
                ("val_macro_f", val_f),
            ],
        });
    }
    if best_f == f64::NEG_INFINITY {
        best = (g_params, d_params);
    }
    let merged = merge_gan_params(&best.0, &best.1);
    let mut ckpt = Checkpoint::new(ModelKind::SemiGan, mcfg, merged);
    ckpt.opt.push(("g".into(), g_opt));
    ckpt.opt.push(("d".into(), d_opt));
    Ok(TrainOutcome {
        checkpoint: ckpt,
        log,
        best_val_f: (best_f != f64::NEG_INFINITY).then_some(best_f),
    })
}

fn gaussian_tensor(rng: &mut Rng, rows: usize, cols: usize) -> Tensor {
    Tensor::new(
        vec![rows, cols],
        (0..rows * cols).map(|_| rng.normal()).collect(),
    )
}

/// Split a combined parameter set into generator and discriminator halves.
pub fn split_gan_params(all: &ParameterSet) -> (ParameterSet, ParameterSet) {
    let mut g = ParameterSet::new();
    let mut d = ParameterSet::new();
    for (name, p) in all.iter() {
        let dst = if name.starts_with("gan.g.") {
            &mut g
        } else {
            &mut d
        };
        if p.trainable {
            dst.insert(name, p.value.clone());
        } else {
            dst.insert_buffer(name, p.value.clone());
        }
    }
    (g, d)
}

pub fn merge_gan_params(g: &ParameterSet, d: &ParameterSet) -> ParameterSet {
    let mut all = ParameterSet::new();
    for src in [g, d] {
        for (name, p) in src.iter() {
            if p.trainable {
                all.insert(name, p.value.clone());
            } else {
                all.insert_buffer(name, p.value.clone());
            }
        }
    }
    all
}

// ---- benchmark protocol ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchModel {
    Ff,
    M1M2,
    SemiGan,
}

impl BenchModel {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchModel::Ff => "ff",
            BenchModel::M1M2 => "m1m2",
            BenchModel::SemiGan => "semigan",
        }
    }

    pub fn parse(s: &str) -> Option<BenchModel> {
        match s {
            "ff" => Some(BenchModel::Ff),
            "m1m2" => Some(BenchModel::M1M2),
            "semigan" => Some(BenchModel::SemiGan),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub models: Vec<BenchModel>,
    pub labeled_sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub model_cfg: ModelConfig,
    /// Input length for the adversarial pair; when it differs from the
    /// dataset length, signals are bin-mean downsampled for that model.
    /// The two model families use different input lengths by design.
    pub gan_len: Option<usize>,
    pub ff: TrainConfig,
    pub m1: TrainConfig,
    pub m2: TrainConfig,
    pub gan: TrainConfig,
}

impl BenchmarkConfig {
    pub fn new(model_cfg: ModelConfig) -> Self {
        BenchmarkConfig {
            models: vec![BenchModel::Ff, BenchModel::M1M2, BenchModel::SemiGan],
            labeled_sizes: vec![15, 30, 70],
            seeds: vec![0, 1, 2, 3, 4],
            model_cfg,
            gan_len: None,
            ff: TrainConfig::ff(0),
            m1: TrainConfig::m1(0),
            m2: TrainConfig::m2(0),
            gan: TrainConfig::semigan(0),
        }
    }
}

fn downsample_set(signals: &[Signal], len: usize) -> Vec<Signal> {
    signals
        .iter()
        .map(|s| crate::signal::downsample_signal(s, len).expect("benchmark signals are long enough"))
        .collect()
}

/// Test macro-F per (model, labeled size), one entry per seed.
#[derive(Debug, Clone)]
pub struct BenchmarkCell {
    pub model: BenchModel,
    pub n_labeled: usize,
    pub scores: Vec<f64>,
}

impl BenchmarkCell {
    pub fn mean(&self) -> f64 {
        self.scores.iter().sum::<f64>() / self.scores.len() as f64
    }
}

/// Run the full protocol: for each seed and labeled-subset size, draw a
/// class-stratified subset of the training pool, train each requested model
/// (semi-supervised ones also see the unlabeled pool), and score macro-F on
/// the held-out test set.
pub fn run_benchmark(
    pool: &LabeledSet,
    test: &LabeledSet,
    unlabeled: &UnlabeledSet,
    cfg: &BenchmarkConfig,
) -> Result<Vec<BenchmarkCell>, TrainError> {
    check_disjoint(pool, unlabeled)?;
    check_disjoint(test, unlabeled)?;
    let truth: std::collections::BTreeMap<String, ReadClass> = test
        .signals
        .iter()
        .zip(&test.labels)
        .map(|(s, &l)| (s.read_id.clone(), l))
        .collect();

    let mut cells: Vec<BenchmarkCell> = cfg
        .models
        .iter()
        .flat_map(|&m| {
            cfg.labeled_sizes.iter().map(move |&n| BenchmarkCell {
                model: m,
                n_labeled: n,
                scores: Vec::new(),
            })
        })
        .collect();

    for &seed in &cfg.seeds {
        for &n in &cfg.labeled_sizes {
            let mut subset_rng = Rng::derive(seed, 0x5e1ec7 ^ n as u64);
            let idx = stratified_subset_indices(&pool.labels, n, &mut subset_rng);
            let labeled = pool.subset(&idx);

            for &model in &cfg.models {
                let score = match model {
                    BenchModel::Ff => {
                        let tcfg = TrainConfig { seed, ..cfg.ff.clone() };
                        let out = train_ff(&labeled, cfg.model_cfg, &tcfg)?;
                        let (ff, params) = (FfNet::new(cfg.model_cfg)?, out.checkpoint.params);
                        let pred = classify_ff(&ff, &params, &test.signals);
                        crate::eval::macro_f_score(&pred, &truth)
                            .expect("test truth covers predictions")
                            .value
                    }
                    BenchModel::M1M2 => {
                        let m1_cfg = TrainConfig { seed, ..cfg.m1.clone() };
                        let mut union: Vec<Signal> = labeled.signals.clone();
                        union.extend(unlabeled.signals.iter().cloned());
                        let m1_out = train_m1(&union, cfg.model_cfg, &m1_cfg)?;
                        let m1_net = M1Net::new(cfg.model_cfg)?;
                        let z1_l = extract_z1(&m1_net, &m1_out.checkpoint.params, &labeled.signals);
                        let z1_u =
                            extract_z1(&m1_net, &m1_out.checkpoint.params, &unlabeled.signals);
                        let m2_cfg = TrainConfig { seed, ..cfg.m2.clone() };
                        let m2_out = train_m2(
                            &M2Data {
                                z1_labeled: &z1_l,
                                labels: &labeled.labels,
                                z1_unlabeled: &z1_u,
                            },
                            cfg.model_cfg,
                            &m2_cfg,
                        )?;
                        let m2_net = M2Net::new(cfg.model_cfg)?;
                        let pred = classify_m1m2(
                            (&m1_net, &m1_out.checkpoint.params),
                            (&m2_net, &m2_out.checkpoint.params),
                            &test.signals,
                        );
                        crate::eval::macro_f_score(&pred, &truth)
                            .expect("test truth covers predictions")
                            .value
                    }
                    BenchModel::SemiGan => {
                        let tcfg = TrainConfig { seed, ..cfg.gan.clone() };
                        let gan_len = cfg.gan_len.unwrap_or(cfg.model_cfg.signal_len);
                        let mut gan_mcfg = cfg.model_cfg;
                        gan_mcfg.signal_len = gan_len;
                        let (gl, gu, gt);
                        let (labeled_g, unlabeled_g, test_g): (&LabeledSet, &UnlabeledSet, &[Signal]) =
                            if gan_len == cfg.model_cfg.signal_len {
                                (&labeled, unlabeled, &test.signals)
                            } else {
                                gl = LabeledSet {
                                    signals: downsample_set(&labeled.signals, gan_len),
                                    labels: labeled.labels.clone(),
                                };
                                gu = UnlabeledSet {
                                    signals: downsample_set(&unlabeled.signals, gan_len),
                                };
                                gt = downsample_set(&test.signals, gan_len);
                                (&gl, &gu, &gt)
                            };
                        let out = train_semigan(labeled_g, unlabeled_g, gan_mcfg, &tcfg)?;
                        let net = GanNets::new(gan_mcfg)?;
                        let pred = classify_semigan((&net, &out.checkpoint.params), test_g);
                        crate::eval::macro_f_score(&pred, &truth)
                            .expect("test truth covers predictions")
                            .value
                    }
                };
                cells
                    .iter_mut()
                    .find(|c| c.model == model && c.n_labeled == n)
                    .expect("cell exists")
                    .scores
                    .push(score);
            }
        }
    }
    Ok(cells)
}

/// Argmax classification with the supervised baseline.
pub fn classify_ff(net: &FfNet, params: &ParameterSet, signals: &[Signal]) -> Vec<Classification> {
    let k = net.cfg.num_classes;
    let mut out = Vec::with_capacity(signals.len());
    for chunk in signals.chunks(256) {
        let refs: Vec<&Signal> = chunk.iter().collect();
        let mut tape = Tape::new();
        let x = tape.constant(signals_to_tensor(&refs));
        let logits = net.forward(&mut tape, params, x);
        let probs = tape.softmax(logits);
        let data = tape.value(probs).data();
        for (row, sig) in chunk.iter().enumerate() {
            out.push(Classification::new(
                sig.read_id.clone(),
                data[row * k..(row + 1) * k].to_vec(),
            ));
        }
    }
    out
}

/// Rows = labeled sizes, columns = models, cells = mean macro-F over seeds.
pub fn benchmark_table_tsv(cells: &[BenchmarkCell], cfg: &BenchmarkConfig) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("n");
    for m in &cfg.models {
        write!(out, "\t{}", m.as_str()).unwrap();
    }
    out.push('\n');
    for &n in &cfg.labeled_sizes {
        write!(out, "{n}").unwrap();
        for &m in &cfg.models {
            let cell = cells
                .iter()
                .find(|c| c.model == m && c.n_labeled == n)
                .expect("cell exists");
            write!(out, "\t{:.4}", cell.mean()).unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synth_signals, SynthConfig};

    fn tiny_labeled(n_per_class: usize, seed: u64) -> LabeledSet {
        let cfg = SynthConfig::new(32, n_per_class, 0.02, seed);
        let (signals, labels) = synth_signals(&cfg);
        LabeledSet::new(signals, labels).unwrap()
    }

    #[test]
    fn ff_same_seed_same_checkpoint() {
        let data = tiny_labeled(4, 1);
        let mcfg = ModelConfig::for_len(32);
        let tcfg = TrainConfig {
            epochs: 2,
            ..TrainConfig::ff(9)
        };
        let a = train_ff(&data, mcfg, &tcfg).unwrap();
        let b = train_ff(&data, mcfg, &tcfg).unwrap();
        assert_eq!(a.checkpoint.to_bytes(), b.checkpoint.to_bytes());
    }

    #[test]
    fn ff_learns_two_separable_classes() {
        // two clearly separable shapes: flat vs right-heavy step
        let mut signals = Vec::new();
        let mut labels = Vec::new();
        let mut rng = Rng::new(5);
        for i in 0..50 {
            let flat = i % 2 == 0;
            let mut v = vec![0.0; 32];
            for (j, x) in v.iter_mut().enumerate() {
                let base = if flat || j < 16 { 0.5 } else { 1.0 };
                *x = (base + 0.02 * rng.normal()).clamp(0.0, 1.0);
            }
            signals.push(Signal {
                read_id: format!("s{i}"),
                values: v,
            });
            labels.push(if flat {
                ReadClass::Chimeric
            } else {
                ReadClass::LeftRepeat
            });
        }
        let data = LabeledSet::new(signals, labels).unwrap();
        let mut mcfg = ModelConfig::for_len(32);
        mcfg.num_classes = 2;
        let tcfg = TrainConfig {
            epochs: 100,
            ..TrainConfig::ff(3)
        };
        let out = train_ff(&data, mcfg, &tcfg).unwrap();
        let net = FfNet::new(mcfg).unwrap();
        let pred = classify_ff(&net, &out.checkpoint.params, &data.signals);
        let hits = pred
            .iter()
            .zip(&data.labels)
            .filter(|(p, &t)| p.label_index() == t.index())
            .count();
        assert!(
            hits as f64 / data.len() as f64 >= 0.98,
            "training accuracy {hits}/{}",
            data.len()
        );
    }

    #[test]
    fn m1_elbo_improves_and_kl_nonnegative() {
        let cfg = SynthConfig::new(32, 30, 0.02, 11);
        let (signals, _) = synth_signals(&cfg);
        let mcfg = ModelConfig::for_len(32);
        let tcfg = TrainConfig {
            epochs: 12,
            ..TrainConfig::m1(4)
        };
        let out = train_m1(&signals, mcfg, &tcfg).unwrap();
        let first = out.log.field(0, "elbo").unwrap();
        let last = out.log.field(11, "elbo").unwrap();
        assert!(last > first, "elbo {first} -> {last}");
        for r in &out.log.records {
            let kl_min = r.fields.iter().find(|(n, _)| *n == "kl_min").unwrap().1;
            assert!(kl_min >= -1e-12);
        }
    }

    #[test]
    fn m1_reconstructs_flat_signal() {
        // all-ones inputs: after training, reconstruction should be close
        let signals: Vec<Signal> = (0..40)
            .map(|i| Signal {
                read_id: format!("flat{i}"),
                values: vec![1.0; 32],
            })
            .collect();
        let mcfg = ModelConfig::for_len(32);
        let tcfg = TrainConfig {
            epochs: 40,
            ..TrainConfig::m1(6)
        };
        let out = train_m1(&signals, mcfg, &tcfg).unwrap();
        let net = M1Net::new(mcfg).unwrap();
        let z1 = extract_z1(&net, &out.checkpoint.params, &signals[..1]);
        let mut tape = Tape::new();
        let z = tape.constant(features_to_tensor(&z1));
        let recon = net.decode(&mut tape, &out.checkpoint.params, z);
        let mae: f64 = tape
            .value(recon)
            .data()
            .iter()
            .map(|&v| (v - 1.0).abs())
            .sum::<f64>()
            / 32.0;
        assert!(mae < 0.15, "mean absolute error {mae}");
    }

    #[test]
    fn extract_z1_is_deterministic_with_correct_dim() {
        let data = tiny_labeled(3, 2);
        let mcfg = ModelConfig::for_len(32);
        let tcfg = TrainConfig {
            epochs: 1,
            ..TrainConfig::m1(7)
        };
        let out = train_m1(&data.signals, mcfg, &tcfg).unwrap();
        let net = M1Net::new(mcfg).unwrap();
        let a = extract_z1(&net, &out.checkpoint.params, &data.signals);
        let b = extract_z1(&net, &out.checkpoint.params, &data.signals);
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.len() == 10));
    }

    #[test]
    fn m2_unlabeled_bound_collapses_for_onehot_q() {
        // With a one-hot q(y|x), the unlabeled objective equals the labeled
        // bound for that class: entropy is zero and only one term survives.
        // Verified on the loss pieces directly.
        let mut tape = Tape::new();
        let bounds = [1.7, 0.4, 2.2, 0.9];
        let q_data = [0.0, 0.0, 1.0, 0.0];
        let q = tape.constant(Tensor::new(vec![1, 4], q_data.to_vec()));
        let mut acc = None;
        for (y, &b) in bounds.iter().enumerate() {
            let bound = tape.constant(Tensor::new(vec![1], vec![b]));
            let qy = tape.slice_cols(q, y, y + 1);
            let qy = tape.reshape(qy, vec![1]);
            let w = tape.mul(qy, bound);
            acc = Some(match acc {
                Some(a) => tape.add(a, w),
                None => w,
            });
        }
        let h = tape.entropy_vec(q);
        let u = tape.sub(acc.unwrap(), h);
        assert!((tape.value(u).data()[0] - bounds[2]).abs() < 1e-9);
    }

    #[test]
    fn m2_training_runs_and_logs_ln4_prior_cost() {
        let data = tiny_labeled(4, 3);
        let mcfg = ModelConfig::for_len(32);
        let m1_out = train_m1(
            &data.signals,
            mcfg,
            &TrainConfig {
                epochs: 2,
                ..TrainConfig::m1(8)
            },
        )
        .unwrap();
        let net = M1Net::new(mcfg).unwrap();
        let z1 = extract_z1(&net, &m1_out.checkpoint.params, &data.signals);
        let (zl, zu) = z1.split_at(8);
        let labels = &data.labels[..8];
        let out = train_m2(
            &M2Data {
                z1_labeled: zl,
                labels,
                z1_unlabeled: zu,
            },
            mcfg,
            &TrainConfig {
                epochs: 3,
                ..TrainConfig::m2(9)
            },
        )
        .unwrap();
        assert_eq!(out.log.records.len(), 3);
        // the labeled bound includes the constant -log p(y) = ln 4 >= 1.386
        let labeled0 = out.log.field(0, "labeled").unwrap();
        assert!(labeled0 >= 4.0f64.ln() - 1e-9, "labeled bound {labeled0}");
    }

    #[test]
    fn semigan_short_run_is_deterministic_and_finite() {
        let labeled = tiny_labeled(3, 21);
        let pool = SynthConfig::new(32, 10, 0.02, 22);
        let (mut usignals, _) = synth_signals(&pool);
        for (i, s) in usignals.iter_mut().enumerate() {
            s.read_id = format!("u{i}");
        }
        let unlabeled = UnlabeledSet { signals: usignals };
        let mcfg = ModelConfig::for_len(32);
        let tcfg = TrainConfig {
            epochs: 2,
            batch_size: 8,
            ..TrainConfig::semigan(10)
        };
        let a = train_semigan(&labeled, &unlabeled, mcfg, &tcfg).unwrap();
        let b = train_semigan(&labeled, &unlabeled, mcfg, &tcfg).unwrap();
        assert_eq!(a.checkpoint.to_bytes(), b.checkpoint.to_bytes());
        // generated samples from the final checkpoint stay in (0,1)
        let net = GanNets::new(mcfg).unwrap();
        let (g, _) = split_gan_params(&a.checkpoint.params);
        let mut tape = Tape::new();
        let mut discard = Vec::new();
        let mut rng = Rng::new(1);
        let z = tape.constant(gaussian_tensor(&mut rng, 4, mcfg.z_gan_dim));
        let fake = net.generate(&mut tape, &g, z, Mode::Train, &mut discard);
        assert!(tape.value(fake).data().iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn disjointness_is_enforced() {
        let labeled = tiny_labeled(3, 31);
        let unlabeled = UnlabeledSet {
            signals: labeled.signals.clone(),
        };
        let mcfg = ModelConfig::for_len(32);
        let err = train_semigan(&labeled, &unlabeled, mcfg, &TrainConfig::semigan(1));
        assert!(matches!(err, Err(TrainError::BadConfig(_))));
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let data = tiny_labeled(3, 41);
        let mcfg = ModelConfig::for_len(32);
        let tcfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::ff(17)
        };
        let out = train_ff(&data, mcfg, &tcfg).unwrap();
        // reproduce the initialization path: same derived rng stream
        let net = FfNet::new(mcfg).unwrap();
        let mut rng = Rng::derive(17, 0xff00);
        let init = net.init_params(&mut rng);
        for (name, p) in init.iter() {
            assert_eq!(p.value.data(), out.checkpoint.params.get(name).value.data());
        }
        assert!(out.best_val_f.is_none());
    }

    #[test]
    fn tiny_batch_config_is_rejected() {
        let data = tiny_labeled(3, 41);
        let mcfg = ModelConfig::for_len(32);
        let tcfg = TrainConfig {
            batch_size: 1,
            ..TrainConfig::ff(1)
        };
        assert!(matches!(
            train_ff(&data, mcfg, &tcfg),
            Err(TrainError::BadConfig(_))
        ));
    }

    #[test]
    fn train_log_tsv_has_header_and_rows() {
        let data = tiny_labeled(3, 51);
        let mcfg = ModelConfig::for_len(32);
        let out = train_ff(
            &data,
            mcfg,
            &TrainConfig {
                epochs: 2,
                ..TrainConfig::ff(2)
            },
        )
        .unwrap();
        let tsv = out.log.to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert!(lines[0].starts_with("# epoch\tce\tval_macro_f"));
        assert_eq!(lines.len(), 3);
    }
}
