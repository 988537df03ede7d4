use rsft_core::models::ModelConfig;
use rsft_core::synth::{synth_signals, SynthConfig};
use rsft_core::train::*;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let l: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(64);
    let n_labeled: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(15);
    let seed: u64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0);
    let m1_epochs: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(12);
    let gan_epochs: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(15);
    let m2_epochs: usize = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(150);

    let mk = |n: usize, s: u64, prefix: &str| {
        let cfg = SynthConfig::new(l, n, 0.03, s).with_undulation(0.25, 0.5);
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
    bcfg.m1.epochs = m1_epochs;
    bcfg.gan_len = Some(l / 2);
    bcfg.gan.epochs = gan_epochs;
    bcfg.m2.epochs = m2_epochs;

    for model in [BenchModel::Ff, BenchModel::M1M2, BenchModel::SemiGan] {
        let mut c = bcfg.clone();
        c.models = vec![model];
        let t0 = Instant::now();
        let cells = run_benchmark(&pool, &test, &unlabeled, &c).unwrap();
        println!(
            "L={l} N={n_labeled} seed={seed} {}: macroF={:.4} in {:.1}s",
            model.as_str(),
            cells[0].scores[0],
            t0.elapsed().as_secs_f64()
        );
    }
}
