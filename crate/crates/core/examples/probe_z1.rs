use rsft_core::eval::extract_z1;
use rsft_core::models::{M1Net, ModelConfig};
use rsft_core::synth::{synth_signals, SynthConfig};
use rsft_core::train::*;
use rsft_core::ReadClass;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let l: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(32);
    let epochs: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(16);
    let (mut unlab, _) = synth_signals(&SynthConfig::new(l, 500, 0.03, 3000).with_undulation(0.25, 0.5));
    for (i, s) in unlab.iter_mut().enumerate() { s.read_id = format!("u{i}"); }
    let (test_s, test_l) = synth_signals(&SynthConfig::new(l, 100, 0.03, 2000).with_undulation(0.25, 0.5));

    let mcfg = ModelConfig::for_len(l);
    let batch: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(64);
    let lr: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(1e-3);
    let tcfg = TrainConfig { epochs, batch_size: batch, lr, ..TrainConfig::m1(0) };
    let out = train_m1(&unlab, mcfg, &tcfg).unwrap();
    println!("elbo first={:.3} last={:.3}", out.log.field(0, "elbo").unwrap(), out.log.field(epochs-1, "elbo").unwrap());
    let net = M1Net::new(mcfg).unwrap();
    let z1 = extract_z1(&net, &out.checkpoint.params, &test_s);

    // per-dim std
    let d = 10;
    let n = z1.len() as f64;
    for dim in 0..d {
        let mean: f64 = z1.iter().map(|r| r[dim]).sum::<f64>() / n;
        let var: f64 = z1.iter().map(|r| (r[dim] - mean).powi(2)).sum::<f64>() / n;
        print!("dim{dim}: sd={:.3}  ", var.sqrt());
    }
    println!();
    // class centroid separation vs within-class spread
    let mut centroids = vec![vec![0.0; d]; 4];
    let mut counts = [0usize; 4];
    for (r, &c) in z1.iter().zip(&test_l) {
        for (j, v) in r.iter().enumerate() { centroids[c.index()][j] += v; }
        counts[c.index()] += 1;
    }
    for (c, cen) in centroids.iter_mut().enumerate() {
        for v in cen.iter_mut() { *v /= counts[c] as f64; }
    }
    let mut within = 0.0;
    for (r, &c) in z1.iter().zip(&test_l) {
        within += r.iter().zip(&centroids[c.index()]).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    }
    within = (within / n).sqrt();
    let mut min_between = f64::INFINITY;
    for a in 0..4 { for b in (a+1)..4 {
        let dist: f64 = centroids[a].iter().zip(&centroids[b]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        min_between = min_between.min(dist);
        println!("between {}-{}: {:.3}", ReadClass::ALL[a], ReadClass::ALL[b], dist);
    }}
    println!("within-class spread: {:.3}, min between: {:.3}, ratio {:.3}", within, min_between, min_between / within);
    // 1-nn accuracy in z1 space as a proxy for achievable classification
    let mut hits = 0;
    for i in 0..z1.len() {
        let mut best = usize::MAX; let mut bd = f64::INFINITY;
        for j in 0..z1.len() {
            if i == j { continue; }
            let dist: f64 = z1[i].iter().zip(&z1[j]).map(|(a, b)| (a - b).powi(2)).sum();
            if dist < bd { bd = dist; best = j; }
        }
        if test_l[best] == test_l[i] { hits += 1; }
    }
    println!("z1 1-nn accuracy: {:.3}", hits as f64 / n);
}
