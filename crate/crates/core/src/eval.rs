//! Classifications and evaluation artifacts: macro F-score, confusion
//! matrices, per-class and mean precision-recall curves.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::class::{ReadClass, NUM_CLASSES};
use crate::models::{signals_to_tensor, GanNets, M1Net, M2Net};
use crate::nn::{Mode, ParameterSet, Tape};
use crate::signal::Signal;

/// Per-read class scores; the label is the argmax (lowest index wins ties).
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub read_id: String,
    pub scores: Vec<f64>,
}

impl Classification {
    pub fn new(read_id: String, scores: Vec<f64>) -> Self {
        debug_assert!((scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Classification { read_id, scores }
    }

    pub fn label_index(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.scores.iter().enumerate() {
            if s > self.scores[best] {
                best = i;
            }
        }
        best
    }

    pub fn label(&self) -> ReadClass {
        ReadClass::from_index(self.label_index()).expect("score vector wider than class set")
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("predictions and truth cover different read sets ({0})")]
    ReadSetMismatch(String),
    #[error("no positive examples of class {0}: recall undefined")]
    NoPositives(ReadClass),
    #[error("empty input")]
    Empty,
}

// ---- classifiers ------------------------------------------------------------

const EVAL_BATCH: usize = 256;

/// Posterior mean features from the M1 encoder; deterministic.
pub fn extract_z1(net: &M1Net, params: &ParameterSet, signals: &[Signal]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(signals.len());
    for chunk in signals.chunks(EVAL_BATCH) {
        let refs: Vec<&Signal> = chunk.iter().collect();
        let mut tape = Tape::new();
        let x = tape.constant(signals_to_tensor(&refs));
        let (mu, _) = net.encode(&mut tape, params, x);
        let d = net.cfg.z1_dim;
        let data = tape.value(mu).data();
        for row in 0..chunk.len() {
            out.push(data[row * d..(row + 1) * d].to_vec());
        }
    }
    out
}

/// Scores from the stacked model: q(y | z1(x)).
pub fn classify_m1m2(
    m1: (&M1Net, &ParameterSet),
    m2: (&M2Net, &ParameterSet),
    signals: &[Signal],
) -> Vec<Classification> {
    let z1 = extract_z1(m1.0, m1.1, signals);
    let k = m2.0.cfg.num_classes;
    let mut out = Vec::with_capacity(signals.len());
    for (chunk, sig_chunk) in z1.chunks(EVAL_BATCH).zip(signals.chunks(EVAL_BATCH)) {
        let mut tape = Tape::new();
        let z = tape.constant(crate::models::features_to_tensor(chunk));
        let logits = m2.0.classify_logits(&mut tape, m2.1, z);
        let probs = tape.softmax(logits);
        let data = tape.value(probs).data();
        for (row, sig) in sig_chunk.iter().enumerate() {
            out.push(Classification::new(
                sig.read_id.clone(),
                data[row * k..(row + 1) * k].to_vec(),
            ));
        }
    }
    out
}

/// Scores from the discriminator: the K class probabilities renormalized
/// after dropping the fake component.
pub fn classify_semigan(
    gan: (&GanNets, &ParameterSet),
    signals: &[Signal],
) -> Vec<Classification> {
    let k = gan.0.cfg.num_classes;
    let mut out = Vec::with_capacity(signals.len());
    for chunk in signals.chunks(EVAL_BATCH) {
        let refs: Vec<&Signal> = chunk.iter().collect();
        let mut tape = Tape::new();
        let mut updates = Vec::new();
        let x = tape.constant(signals_to_tensor(&refs));
        let logits = gan.0.discriminate(&mut tape, gan.1, x, Mode::Eval, &mut updates);
        let probs = tape.softmax(logits);
        let data = tape.value(probs).data();
        for (row, sig) in chunk.iter().enumerate() {
            let full = &data[row * (k + 1)..(row + 1) * (k + 1)];
            let real_mass: f64 = full[..k].iter().sum();
            let scores: Vec<f64> = full[..k].iter().map(|&p| p / real_mass).collect();
            out.push(Classification::new(sig.read_id.clone(), scores));
        }
    }
    out
}

// ---- metrics ----------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MacroF {
    pub value: f64,
    pub per_class: [f64; NUM_CLASSES],
    /// Classes absent from both truth and predictions (scored as F1 = 0).
    pub absent_classes: Vec<ReadClass>,
}

/// Macro F1 over class index vectors (pred[i] vs truth[i]).
pub fn macro_f_from_indices(pred: &[usize], truth: &[usize]) -> MacroF {
    assert_eq!(pred.len(), truth.len());
    let k = NUM_CLASSES;
    let mut tp = [0usize; NUM_CLASSES];
    let mut fp = [0usize; NUM_CLASSES];
    let mut fn_ = [0usize; NUM_CLASSES];
    for (&p, &t) in pred.iter().zip(truth) {
        assert!(p < k && t < k);
        if p == t {
            tp[p] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    let mut per_class = [0.0; NUM_CLASSES];
    let mut absent = Vec::new();
    for c in 0..k {
        let precision = if tp[c] + fp[c] > 0 {
            tp[c] as f64 / (tp[c] + fp[c]) as f64
        } else {
            0.0
        };
        let recall = if tp[c] + fn_[c] > 0 {
            tp[c] as f64 / (tp[c] + fn_[c]) as f64
        } else {
            0.0
        };
        per_class[c] = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        if tp[c] + fp[c] + fn_[c] == 0 {
            absent.push(ReadClass::from_index(c).unwrap());
        }
    }
    MacroF {
        value: per_class.iter().sum::<f64>() / k as f64,
        per_class,
        absent_classes: absent,
    }
}

fn align<'a>(
    pred: &'a [Classification],
    truth: &BTreeMap<String, ReadClass>,
) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    if pred.len() != truth.len() {
        return Err(EvalError::ReadSetMismatch(format!(
            "{} predictions vs {} truths",
            pred.len(),
            truth.len()
        )));
    }
    let mut p = Vec::with_capacity(pred.len());
    let mut t = Vec::with_capacity(pred.len());
    for c in pred {
        let Some(&cls) = truth.get(&c.read_id) else {
            return Err(EvalError::ReadSetMismatch(format!(
                "no truth for read {}",
                c.read_id
            )));
        };
        p.push(c.label_index());
        t.push(cls.index());
    }
    Ok((p, t))
}

/// Unweighted mean over the four classes of per-class F1.
pub fn macro_f_score(
    pred: &[Classification],
    truth: &BTreeMap<String, ReadClass>,
) -> Result<MacroF, EvalError> {
    let (p, t) = align(pred, truth)?;
    Ok(macro_f_from_indices(&p, &t))
}

/// Rows are truth, columns are predictions.
pub fn confusion_matrix(
    pred: &[Classification],
    truth: &BTreeMap<String, ReadClass>,
) -> Result<[[usize; NUM_CLASSES]; NUM_CLASSES], EvalError> {
    let (p, t) = align(pred, truth)?;
    let mut m = [[0usize; NUM_CLASSES]; NUM_CLASSES];
    for (&pi, &ti) in p.iter().zip(&t) {
        m[ti][pi] += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Precision-recall sweep. Points are ordered by ascending threshold, so
/// recall is non-increasing along the list.
#[derive(Debug, Clone, PartialEq)]
pub struct PRCurve {
    pub points: Vec<PrPoint>,
    pub auc: f64,
}

/// Area by trapezoid over recall. The sweep always reaches recall 1 at the
/// lowest threshold; the high-threshold end is anchored at (recall 0) with
/// the precision of the strictest sweep point.
fn trapezoid_auc(points: &[PrPoint]) -> f64 {
    // ascending recall = descending threshold = reversed points
    let mut prev_r = 0.0;
    let mut prev_p = points.last().map(|p| p.precision).unwrap_or(0.0);
    let mut auc = 0.0;
    for pt in points.iter().rev() {
        auc += (pt.recall - prev_r) * (pt.precision + prev_p) / 2.0;
        prev_r = pt.recall;
        prev_p = pt.precision;
    }
    auc
}

/// Sweep a threshold over every distinct score of class `class`;
/// "positive" prediction means score >= threshold.
pub fn pr_curve(
    pred: &[Classification],
    truth: &BTreeMap<String, ReadClass>,
    class: ReadClass,
) -> Result<PRCurve, EvalError> {
    if pred.is_empty() {
        return Err(EvalError::Empty);
    }
    let scored: Result<Vec<(f64, bool)>, EvalError> = pred
        .iter()
        .map(|c| {
            let Some(&t) = truth.get(&c.read_id) else {
                return Err(EvalError::ReadSetMismatch(format!(
                    "no truth for read {}",
                    c.read_id
                )));
            };
            Ok((c.scores[class.index()], t == class))
        })
        .collect();
    pr_curve_from_scores(&scored?, class)
}

/// Core sweep over (score, is_positive) pairs.
pub fn pr_curve_from_scores(
    scored: &[(f64, bool)],
    class: ReadClass,
) -> Result<PRCurve, EvalError> {
    let positives = scored.iter().filter(|(_, p)| *p).count();
    if positives == 0 {
        return Err(EvalError::NoPositives(class));
    }
    let mut thresholds: Vec<f64> = scored.iter().map(|(s, _)| *s).collect();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thresholds.dedup();
    let mut points = Vec::with_capacity(thresholds.len());
    for &t in &thresholds {
        let mut tp = 0usize;
        let mut fp = 0usize;
        for &(s, pos) in scored {
            if s >= t {
                if pos {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        points.push(PrPoint {
            threshold: t,
            precision: tp as f64 / (tp + fp) as f64,
            recall: tp as f64 / positives as f64,
        });
    }
    let auc = trapezoid_auc(&points);
    Ok(PRCurve { points, auc })
}

pub const MEAN_PR_GRID: usize = 101;

/// Interpolate each curve's precision onto the fixed recall grid
/// {0, 0.01, ..., 1} (stepwise, right-continuous in recall) and average.
/// The `threshold` field of the result carries the grid recall.
pub fn mean_pr_curve(curves: &[PRCurve]) -> Result<PRCurve, EvalError> {
    if curves.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut grid = vec![0.0f64; MEAN_PR_GRID];
    for curve in curves {
        // ascending recall
        let mut pts: Vec<(f64, f64)> = curve
            .points
            .iter()
            .map(|p| (p.recall, p.precision))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (gi, slot) in grid.iter_mut().enumerate() {
            let g = gi as f64 / (MEAN_PR_GRID - 1) as f64;
            let p = pts
                .iter()
                .find(|(r, _)| *r >= g - 1e-12)
                .map(|(_, p)| *p)
                .expect("sweep always reaches recall 1");
            *slot += p;
        }
    }
    let n = curves.len() as f64;
    let points: Vec<PrPoint> = grid
        .iter()
        .enumerate()
        .map(|(gi, &sum)| {
            let g = gi as f64 / (MEAN_PR_GRID - 1) as f64;
            PrPoint {
                threshold: g,
                precision: sum / n,
                recall: g,
            }
        })
        .collect();
    let auc = {
        // grid is ascending in recall; integrate directly
        let mut auc = 0.0;
        for w in points.windows(2) {
            auc += (w[1].recall - w[0].recall) * (w[1].precision + w[0].precision) / 2.0;
        }
        auc
    };
    Ok(PRCurve { points, auc })
}

// ---- protocol helpers --------------------------------------------------------

/// Class-stratified subset of size `n`: n/K per class, remainder spread over
/// the canonical class order. Panics if a class runs short.
pub fn stratified_subset_indices(
    labels: &[ReadClass],
    n: usize,
    rng: &mut crate::rng::Rng,
) -> Vec<usize> {
    let k = NUM_CLASSES;
    let mut per_class = [n / k; NUM_CLASSES];
    for c in per_class.iter_mut().take(n % k) {
        *c += 1;
    }
    let mut chosen = Vec::with_capacity(n);
    for class in ReadClass::ALL {
        let members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        let want = per_class[class.index()];
        assert!(
            members.len() >= want,
            "class {class} has {} members, need {want}",
            members.len()
        );
        let picks = rng.sample_indices(members.len(), want);
        chosen.extend(picks.into_iter().map(|i| members[i]));
    }
    chosen.sort_unstable();
    chosen
}
