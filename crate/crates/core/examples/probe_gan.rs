use rsft_core::models::ModelConfig;
use rsft_core::synth::{synth_signals, SynthConfig};
use rsft_core::train::*;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let l: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(64);
    let n_labeled: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(15);
    let seed: u64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0);
    let gan_epochs: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(30);

    let mk = |n: usize, s: u64, prefix: &str| {
        let cfg = SynthConfig::new(l, n, 0.03, s).with_undulation(0.1, 0.3);
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

    let mcfg = ModelConfig::for_len(l);
    let mut bcfg = BenchmarkConfig::new(mcfg);
    bcfg.labeled_sizes = vec![n_labeled];
    bcfg.seeds = vec![seed];
    bcfg.gan.epochs = gan_epochs;
    bcfg.models = vec![BenchModel::SemiGan];
    let t0 = Instant::now();
    let cells = run_benchmark(&pool, &test, &unlabeled, &bcfg).unwrap();
    println!(
        "L={l} N={n_labeled} seed={seed} gan({gan_epochs}ep): macroF={:.4} in {:.1}s",
        cells[0].scores[0],
        t0.elapsed().as_secs_f64()
    );
}
