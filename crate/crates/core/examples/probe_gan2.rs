use rsft_core::eval::{classify_semigan, macro_f_score};
use rsft_core::models::{GanNets, ModelConfig};
use rsft_core::synth::{synth_signals, SynthConfig};
use rsft_core::train::*;
use std::collections::BTreeMap;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let l: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(64);
    let n_labeled: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(15);
    let seed: u64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0);
    let gan_epochs: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(30);

    let mk = |n: usize, s: u64, prefix: &str| {
        let cfg = SynthConfig::new(l, n, 0.03, s);
        let (mut signals, labels) = synth_signals(&cfg);
        for sig in &mut signals {
            sig.read_id = format!("{prefix}_{}", sig.read_id);
        }
        (signals, labels)
    };
    let (pool_s, pool_l) = mk(65, 1000, "pool");
    let (test_s, test_l) = mk(100, 2000, "test");
    let (unlab_s, _) = mk(500, 3000, "unlab");
    let pool = LabeledSet::new(pool_s, pool_l).unwrap();
    let test = LabeledSet::new(test_s, test_l).unwrap();
    let unlabeled = UnlabeledSet { signals: unlab_s };
    let truth: BTreeMap<String, rsft_core::ReadClass> = test
        .signals.iter().zip(&test.labels).map(|(s, &c)| (s.read_id.clone(), c)).collect();

    let mcfg = ModelConfig::for_len(l);
    let mut srng = rsft_core::rng::Rng::derive(seed, 0x5e1ec7 ^ n_labeled as u64);
    let idx = rsft_core::eval::stratified_subset_indices(&pool.labels, n_labeled, &mut srng);
    let labeled = pool.subset(&idx);

    let tcfg = TrainConfig { seed, epochs: gan_epochs, ..TrainConfig::semigan(seed) };
    let out = train_semigan(&labeled, &unlabeled, mcfg, &tcfg).unwrap();
    println!("{}", out.log.to_tsv());
    println!("best_val_f = {:?}", out.best_val_f);
    let net = GanNets::new(mcfg).unwrap();
    let pred = classify_semigan((&net, &out.checkpoint.params), &test.signals);
    println!("test macroF (best ckpt) = {:.4}", macro_f_score(&pred, &truth).unwrap().value);
}
