use rsft_core::eval::{classify_m1m2, extract_z1, macro_f_score, stratified_subset_indices};
use rsft_core::models::{M1Net, M2Net, ModelConfig};
use rsft_core::synth::{synth_signals, SynthConfig};
use rsft_core::train::*;
use std::collections::BTreeMap;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let l: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(32);
    let m1_epochs: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(16);
    let seed: u64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0);
    let n_labeled: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(15);

    let mk = |n: usize, s: u64, prefix: &str| {
        let cfg = SynthConfig::new(l, n, 0.03, s).with_undulation(0.25, 0.5);
        let (mut signals, labels) = synth_signals(&cfg);
        for sig in &mut signals { sig.read_id = format!("{prefix}_{}", sig.read_id); }
        (signals, labels)
    };
    let (pool_s, pool_l) = mk(65, 1000, "pool");
    let (test_s, test_l) = mk(100, 2000, "test");
    let (unlab_s, _) = mk(500, 3000, "unlab");
    let pool = LabeledSet::new(pool_s, pool_l).unwrap();
    let truth: BTreeMap<String, rsft_core::ReadClass> =
        test_s.iter().zip(&test_l).map(|(s, &c)| (s.read_id.clone(), c)).collect();

    let mcfg = ModelConfig::for_len(l);
    let mut srng = rsft_core::rng::Rng::derive(seed, 0x5e1ec7 ^ n_labeled as u64);
    let idx = stratified_subset_indices(&pool.labels, n_labeled, &mut srng);
    let labeled = pool.subset(&idx);

    let mut union = labeled.signals.clone();
    union.extend(unlab_s.iter().cloned());
    let m1_out = train_m1(&union, mcfg, &TrainConfig { seed, epochs: m1_epochs, ..TrainConfig::m1(seed) }).unwrap();
    let m1_net = M1Net::new(mcfg).unwrap();
    let z1_l = extract_z1(&m1_net, &m1_out.checkpoint.params, &labeled.signals);
    let z1_u = extract_z1(&m1_net, &m1_out.checkpoint.params, &unlab_s);

    // standardize z1 per dim over labeled+unlabeled
    let dim = z1_l[0].len();
    let all: Vec<&Vec<f64>> = z1_l.iter().chain(z1_u.iter()).collect();
    let n_all = all.len() as f64;
    let mut mean = vec![0.0; dim];
    for r in &all { for (j, v) in r.iter().enumerate() { mean[j] += v; } }
    for m in &mut mean { *m /= n_all; }
    let mut sd = vec![0.0; dim];
    for r in &all { for (j, v) in r.iter().enumerate() { sd[j] += (v - mean[j]).powi(2); } }
    for s in &mut sd { *s = (*s / n_all).sqrt().max(1e-6); }
    let stz = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> { rows.iter().map(|r| r.iter().enumerate().map(|(j, v)| (v - mean[j]) / sd[j]).collect()).collect() };
    let z1_l = if std::env::var("STZ").is_ok() { stz(&z1_l) } else { z1_l };
    let z1_u = if std::env::var("STZ").is_ok() { stz(&z1_u) } else { z1_u };
    for m2_epochs in [50usize, 150, 300, 600] {
        let t0 = Instant::now();
        let m2_out = train_m2(
            &M2Data { z1_labeled: &z1_l, labels: &labeled.labels, z1_unlabeled: &z1_u },
            mcfg,
            &TrainConfig { seed, epochs: m2_epochs, ..TrainConfig::m2(seed) },
        ).unwrap();
        let m2_net = M2Net::new(mcfg).unwrap();
        let pred = classify_m1m2((&m1_net, &m1_out.checkpoint.params), (&m2_net, &m2_out.checkpoint.params), &test_s);
        println!("m2 epochs {m2_epochs}: test macroF = {:.4} ({:.1}s)", macro_f_score(&pred, &truth).unwrap().value, t0.elapsed().as_secs_f64());
    }
}
