//! Exact (quadratic) t-SNE for embedding latent vectors in 2-D.
//!
//! Per-point bandwidths are found by bisecting the conditional-distribution
//! entropy to match the requested perplexity; the joint similarities are
//! symmetrized, early-exaggerated, and the Student-t embedding is descended
//! with the usual two-stage momentum schedule. Quadratic cost is fine at the
//! few hundred points this pipeline embeds.

use thiserror::Error;

use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    /// Multiplier applied to the similarities for the first
    /// `exaggeration_iters` iterations.
    pub exaggeration: f64,
    pub exaggeration_iters: usize,
    pub momentum_early: f64,
    pub momentum_late: f64,
    /// Iteration at which momentum switches from early to late.
    pub momentum_switch: usize,
    pub seed: u64,
}

impl EmbedConfig {
    pub fn new(seed: u64) -> Self {
        EmbedConfig {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            exaggeration: 4.0,
            exaggeration_iters: 100,
            momentum_early: 0.5,
            momentum_late: 0.8,
            momentum_switch: 250,
            seed,
        }
    }
}

#[derive(Debug, Error)]
pub enum TsneError {
    #[error("need at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("perplexity {perplexity} infeasible for {n} points (needs perplexity < (n-1)/3)")]
    BadPerplexity { perplexity: f64, n: usize },
    #[error("point {0} contains a non-finite coordinate")]
    NonFinite(usize),
    #[error("iterations must be at least 1")]
    NoIterations,
}

#[derive(Debug, Clone)]
pub struct TsneResult {
    /// N x 2 embedding, mean-centered.
    pub points: Vec<[f64; 2]>,
    /// KL objective after every iteration, against the
    /// un-exaggerated similarities.
    pub objective: Vec<f64>,
}

const P_FLOOR: f64 = 1e-12;
const ENTROPY_TOLERANCE: f64 = 1e-5;
const BISECTION_STEPS: usize = 50;

fn pairwise_sq_dists(data: &[Vec<f64>]) -> Vec<f64> {
    let n = data.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for (a, b) in data[i].iter().zip(&data[j]) {
                acc += (a - b) * (a - b);
            }
            d[i * n + j] = acc;
            d[j * n + i] = acc;
        }
    }
    d
}

/// Conditional p_{j|i} for one row under precision beta; returns the Shannon
/// entropy (nats) and fills `row`.
fn row_probs(dists: &[f64], i: usize, beta: f64, row: &mut [f64]) -> f64 {
    let n = row.len();
    let mut sum = 0.0;
    for j in 0..n {
        row[j] = if j == i {
            0.0
        } else {
            (-beta * dists[i * n + j]).exp()
        };
        sum += row[j];
    }
    if sum <= 0.0 {
        // all mass vanished numerically; spread uniformly over others
        for (j, r) in row.iter_mut().enumerate() {
            *r = if j == i { 0.0 } else { 1.0 / (n - 1) as f64 };
        }
        return ((n - 1) as f64).ln();
    }
    let mut entropy = 0.0;
    for r in row.iter_mut() {
        *r /= sum;
        if *r > P_FLOOR {
            entropy -= *r * r.ln();
        }
    }
    entropy
}

/// Symmetrized joint similarities matching `perplexity` per point.
fn joint_probabilities(data: &[Vec<f64>], perplexity: f64) -> Vec<f64> {
    let n = data.len();
    let dists = pairwise_sq_dists(data);
    let target = perplexity.ln();
    let mut cond = vec![0.0; n * n];
    let mut row = vec![0.0; n];
    for i in 0..n {
        let mut beta = 1.0;
        let mut beta_min = f64::NEG_INFINITY;
        let mut beta_max = f64::INFINITY;
        for _ in 0..BISECTION_STEPS {
            let entropy = row_probs(&dists, i, beta, &mut row);
            let diff = entropy - target;
            if diff.abs() < ENTROPY_TOLERANCE {
                break;
            }
            if diff > 0.0 {
                beta_min = beta;
                beta = if beta_max.is_infinite() {
                    beta * 2.0
                } else {
                    (beta + beta_max) / 2.0
                };
            } else {
                beta_max = beta;
                beta = if beta_min.is_infinite() {
                    beta / 2.0
                } else {
                    (beta + beta_min) / 2.0
                };
            }
        }
        row_probs(&dists, i, beta, &mut row);
        cond[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    let mut joint = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            joint[i * n + j] = ((cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64)).max(P_FLOOR);
        }
    }
    for i in 0..n {
        joint[i * n + i] = P_FLOOR;
    }
    joint
}

/// Student-t similarities of the current embedding; returns (q, unnormalized
/// kernel values, normalizer).
fn student_t(points: &[[f64; 2]]) -> (Vec<f64>, Vec<f64>, f64) {
    let n = points.len();
    let mut num = vec![0.0; n * n];
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            let v = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i * n + j] = v;
            num[j * n + i] = v;
            sum += 2.0 * v;
        }
    }
    let q: Vec<f64> = num.iter().map(|&v| (v / sum).max(P_FLOOR)).collect();
    (q, num, sum)
}

/// KL divergence sum p log(p/q) over off-diagonal pairs; non-negative and
/// zero only when the distributions agree.
pub fn kl_objective(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let n = (p.len() as f64).sqrt() as usize;
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let pv = p[i * n + j].max(P_FLOOR);
            let qv = q[i * n + j].max(P_FLOOR);
            if pv > P_FLOOR {
                kl += pv * (pv / qv).ln();
            }
        }
    }
    kl
}

/// Embed N x D points into 2-D. Deterministic given the seed; duplicate
/// points are allowed.
pub fn tsne(data: &[Vec<f64>], cfg: &EmbedConfig) -> Result<TsneResult, TsneError> {
    let n = data.len();
    if n < 4 {
        return Err(TsneError::TooFewPoints(n));
    }
    if !(cfg.perplexity > 0.0) || cfg.perplexity >= (n - 1) as f64 / 3.0 {
        return Err(TsneError::BadPerplexity {
            perplexity: cfg.perplexity,
            n,
        });
    }
    if cfg.iterations < 1 {
        return Err(TsneError::NoIterations);
    }
    for (i, p) in data.iter().enumerate() {
        if p.iter().any(|v| !v.is_finite()) {
            return Err(TsneError::NonFinite(i));
        }
    }

    let p_true = joint_probabilities(data, cfg.perplexity);
    let mut rng = Rng::derive(cfg.seed, 0x75e);
    let mut points: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.normal_scaled(0.0, 1e-2), rng.normal_scaled(0.0, 1e-2)])
        .collect();
    let mut velocity = vec![[0.0f64; 2]; n];
    let mut objective = Vec::with_capacity(cfg.iterations);

    for iter in 0..cfg.iterations {
        let exaggerate = iter < cfg.exaggeration_iters;
        let momentum = if iter < cfg.momentum_switch {
            cfg.momentum_early
        } else {
            cfg.momentum_late
        };
        let (q, kernel, _) = student_t(&points);

        let mut grad = vec![[0.0f64; 2]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let p_ij = if exaggerate {
                    p_true[i * n + j] * cfg.exaggeration
                } else {
                    p_true[i * n + j]
                };
                let coeff = 4.0 * (p_ij - q[i * n + j]) * kernel[i * n + j];
                grad[i][0] += coeff * (points[i][0] - points[j][0]);
                grad[i][1] += coeff * (points[i][1] - points[j][1]);
            }
        }
        for i in 0..n {
            for d in 0..2 {
                velocity[i][d] = momentum * velocity[i][d] - cfg.learning_rate * grad[i][d];
                points[i][d] += velocity[i][d];
            }
        }
        // re-center
        let mut mean = [0.0f64; 2];
        for p in &points {
            mean[0] += p[0];
            mean[1] += p[1];
        }
        mean[0] /= n as f64;
        mean[1] /= n as f64;
        for p in &mut points {
            p[0] -= mean[0];
            p[1] -= mean[1];
        }
        let (q_now, _, _) = student_t(&points);
        objective.push(kl_objective(&p_true, &q_now));
    }

    Ok(TsneResult { points, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_clusters(
        n_per: usize,
        dim: usize,
        centers: &[f64],
        sd: f64,
        seed: u64,
    ) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = Rng::new(seed);
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (c, &center) in centers.iter().enumerate() {
            for _ in 0..n_per {
                data.push((0..dim).map(|_| rng.normal_scaled(center, sd)).collect());
                labels.push(c);
            }
        }
        (data, labels)
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = EmbedConfig::new(1);
        let three = vec![vec![0.0]; 3];
        assert!(matches!(tsne(&three, &cfg), Err(TsneError::TooFewPoints(3))));
        let (data, _) = gaussian_clusters(5, 3, &[0.0, 5.0], 0.1, 2);
        let mut bad = cfg.clone();
        bad.perplexity = 10.0; // needs < (10-1)/3 = 3
        assert!(matches!(
            tsne(&data, &bad),
            Err(TsneError::BadPerplexity { .. })
        ));
        let mut nan_data = data.clone();
        nan_data[0][0] = f64::NAN;
        let mut small = cfg.clone();
        small.perplexity = 2.0;
        assert!(matches!(tsne(&nan_data, &small), Err(TsneError::NonFinite(0))));
    }

    #[test]
    fn output_shape_finite_and_centered() {
        let (data, _) = gaussian_clusters(10, 4, &[0.0, 6.0], 0.3, 3);
        let mut cfg = EmbedConfig::new(4);
        cfg.perplexity = 5.0;
        cfg.iterations = 120;
        let result = tsne(&data, &cfg).unwrap();
        assert_eq!(result.points.len(), 20);
        assert!(result
            .points
            .iter()
            .all(|p| p[0].is_finite() && p[1].is_finite()));
        let mean_x: f64 = result.points.iter().map(|p| p[0]).sum::<f64>() / 20.0;
        assert!(mean_x.abs() < 1e-9);
    }

    #[test]
    fn deterministic_under_seed() {
        let (data, _) = gaussian_clusters(8, 5, &[0.0, 4.0], 0.2, 5);
        let mut cfg = EmbedConfig::new(6);
        cfg.perplexity = 4.0;
        cfg.iterations = 60;
        let a = tsne(&data, &cfg).unwrap();
        let b = tsne(&data, &cfg).unwrap();
        assert_eq!(a.points, b.points);
        let mut other = cfg.clone();
        other.seed = 7;
        let c = tsne(&data, &other).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn duplicate_points_are_allowed() {
        let mut data = vec![vec![1.0, 2.0]; 6];
        data.extend(vec![vec![8.0, -3.0]; 6]);
        let mut cfg = EmbedConfig::new(8);
        cfg.perplexity = 3.0;
        cfg.iterations = 50;
        let result = tsne(&data, &cfg).unwrap();
        assert!(result.points.iter().all(|p| p[0].is_finite()));
    }

    #[test]
    fn kl_zero_iff_equal_and_nonnegative() {
        let (data, _) = gaussian_clusters(6, 3, &[0.0, 3.0], 0.5, 9);
        let p = joint_probabilities(&data, 3.0);
        assert!(kl_objective(&p, &p).abs() < 1e-12);
        // against a random other distribution: strictly positive (Gibbs)
        let mut rng = Rng::new(10);
        let n = data.len();
        let mut q = vec![0.0; n * n];
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let v = rng.next_f64() + 0.01;
                    q[i * n + j] = v;
                    sum += v;
                }
            }
        }
        for v in &mut q {
            *v /= sum;
        }
        assert!(kl_objective(&p, &q) > 0.0);
    }

    #[test]
    fn three_well_separated_clusters_embed_cleanly() {
        // compact version of the acceptance benchmark
        let (data, labels) = gaussian_clusters(20, 10, &[0.0, 10.0, -10.0], 1.0, 11);
        let mut cfg = EmbedConfig::new(12);
        cfg.perplexity = 10.0;
        cfg.iterations = 300;
        let result = tsne(&data, &cfg).unwrap();
        let pts = &result.points;
        let mut same_cluster = 0;
        for i in 0..pts.len() {
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for j in 0..pts.len() {
                if i == j {
                    continue;
                }
                let d = (pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            if labels[best] == labels[i] {
                same_cluster += 1;
            }
        }
        assert!(
            same_cluster as f64 / pts.len() as f64 >= 0.95,
            "{same_cluster}/{} same-cluster neighbors",
            pts.len()
        );
        // the objective settles below its post-exaggeration value
        assert!(result.objective[299] < result.objective[100]);
    }
}
