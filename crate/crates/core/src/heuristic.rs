//! Rule-based class guesser over prepared signals.
//!
//! This is deliberately cheap and imperfect: its only job is to balance the
//! unlabeled pool across classes before training. It is never used as
//! evaluation truth.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::class::ReadClass;
use crate::rng::Rng;
use crate::signal::Signal;

/// Thresholds for the rule set. Fractions are relative to the signal length.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicParams {
    /// Width of the centered moving-average smoother, as a fraction of L.
    pub smooth_window: f64,
    /// Fraction of L excluded at each end when searching for a drop.
    pub edge_margin: f64,
    /// A smoothed interior minimum below `drop_ratio * min(flank means)`
    /// signals a chimera.
    pub drop_ratio: f64,
    /// One side mean exceeding `repeat_ratio` times the other signals a repeat.
    pub repeat_ratio: f64,
    /// Fraction of L used for each side mean.
    pub side_fraction: f64,
    /// Both flanks must reach this level for the chimera test to apply.
    pub min_flank: f64,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        HeuristicParams {
            // narrow smoother: the narrowest chimeric notches (2% of L) must
            // survive smoothing, a 5% window averages them away
            smooth_window: 0.01,
            edge_margin: 0.10,
            drop_ratio: 0.3,
            repeat_ratio: 1.8,
            side_fraction: 0.4,
            min_flank: 0.15,
        }
    }
}

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error("fraction parameter {name} = {value} outside (0, 0.5]")]
    BadFraction { name: &'static str, value: f64 },
    #[error("drop_ratio {0} outside (0, 1)")]
    BadDropRatio(f64),
    #[error("repeat_ratio {0} must exceed 1")]
    BadRepeatRatio(f64),
}

impl HeuristicParams {
    pub fn validate(&self) -> Result<(), HeuristicError> {
        for (name, value) in [
            ("smooth_window", self.smooth_window),
            ("edge_margin", self.edge_margin),
            ("side_fraction", self.side_fraction),
            ("min_flank", self.min_flank),
        ] {
            if !(value > 0.0 && value <= 0.5) {
                return Err(HeuristicError::BadFraction { name, value });
            }
        }
        if !(self.drop_ratio > 0.0 && self.drop_ratio < 1.0) {
            return Err(HeuristicError::BadDropRatio(self.drop_ratio));
        }
        if self.repeat_ratio <= 1.0 {
            return Err(HeuristicError::BadRepeatRatio(self.repeat_ratio));
        }
        Ok(())
    }
}

/// Centered moving average; the window is clamped at the ends, which keeps
/// smoothing mirror-symmetric.
pub fn smooth(values: &[f64], window_fraction: f64) -> Vec<f64> {
    let n = values.len();
    let half = ((window_fraction * n as f64) / 2.0).floor() as usize;
    if half == 0 {
        return values.to_vec();
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Deterministic rule-based label.
///
/// 1. Smooth, then look for a deep interior minimum flanked by substantial
///    coverage on both sides: chimeric.
/// 2. Otherwise compare side means: heavily one-sided coverage is a repeat.
/// 3. Otherwise regular.
pub fn heuristic_label(sig: &Signal, p: &HeuristicParams) -> ReadClass {
    let smoothed = smooth(&sig.values, p.smooth_window);
    let n = smoothed.len();

    let lo = (p.edge_margin * n as f64).floor() as usize;
    let hi = n - lo; // mirror of lo, so reversing the signal mirrors the interior
    if lo < hi {
        let interior = &smoothed[lo..hi];
        let (arg, &min) = interior
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("interior non-empty");
        let flank_left = mean(&interior[..arg]);
        let flank_right = mean(&interior[arg + 1..]);
        if flank_left >= p.min_flank
            && flank_right >= p.min_flank
            && min < p.drop_ratio * flank_left.min(flank_right)
        {
            return ReadClass::Chimeric;
        }
    }

    let side = ((p.side_fraction * n as f64).floor() as usize).max(1).min(n);
    let left = mean(&smoothed[..side]);
    let right = mean(&smoothed[n - side..]);
    if right > p.repeat_ratio * left {
        ReadClass::RightRepeat
    } else if left > p.repeat_ratio * right {
        ReadClass::LeftRepeat
    } else {
        ReadClass::Regular
    }
}

/// Label every signal heuristically, then sample up to `quota` per heuristic
/// class, uniformly without replacement. Classes short of quota contribute
/// all their members. Output preserves input order; deterministic given seed.
pub fn balance_pool(
    signals: &[Signal],
    p: &HeuristicParams,
    quota: &BTreeMap<ReadClass, usize>,
    seed: u64,
) -> Vec<Signal> {
    let mut rng = Rng::derive(seed, 0xba1a);
    let mut by_class: BTreeMap<ReadClass, Vec<usize>> = BTreeMap::new();
    for (i, s) in signals.iter().enumerate() {
        by_class.entry(heuristic_label(s, p)).or_default().push(i);
    }
    let mut chosen = Vec::new();
    for class in ReadClass::ALL {
        let members = by_class.remove(&class).unwrap_or_default();
        let want = quota.get(&class).copied().unwrap_or(0).min(members.len());
        let picks = rng.sample_indices(members.len(), want);
        chosen.extend(picks.into_iter().map(|k| members[k]));
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|i| signals[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(values: Vec<f64>) -> Signal {
        Signal {
            read_id: "s".into(),
            values,
        }
    }

    fn defaults() -> HeuristicParams {
        HeuristicParams::default()
    }

    #[test]
    fn default_params_validate() {
        defaults().validate().unwrap();
        let mut p = defaults();
        p.repeat_ratio = 0.9;
        assert!(p.validate().is_err());
        p = defaults();
        p.edge_margin = 0.6;
        assert!(p.validate().is_err());
    }

    #[test]
    fn flat_signal_is_regular() {
        assert_eq!(
            heuristic_label(&sig(vec![1.0; 200]), &defaults()),
            ReadClass::Regular
        );
    }

    #[test]
    fn step_signal_is_right_repeat() {
        // first half 0.4, second half 1.0: 1.0 > 1.8 * 0.4 = 0.72
        let mut v = vec![0.4; 100];
        v.extend(vec![1.0; 100]);
        assert_eq!(heuristic_label(&sig(v.clone()), &defaults()), ReadClass::RightRepeat);
        v.reverse();
        assert_eq!(heuristic_label(&sig(v), &defaults()), ReadClass::LeftRepeat);
    }

    #[test]
    fn notch_signal_is_chimeric() {
        let p = defaults();
        let n = 200;
        let mut v = vec![1.0; n];
        for x in v.iter_mut().take(110).skip(90) {
            *x = 0.05;
        }
        // verify the decision arithmetic explicitly on the smoothed signal
        let smoothed = smooth(&v, p.smooth_window);
        let lo = (p.edge_margin * n as f64) as usize;
        let interior = &smoothed[lo..n - lo];
        let (arg, &min) = interior
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let fl = interior[..arg].iter().sum::<f64>() / arg as f64;
        let fr = interior[arg + 1..].iter().sum::<f64>() / (interior.len() - arg - 1) as f64;
        assert!(min < p.drop_ratio * fl.min(fr));
        assert_eq!(heuristic_label(&sig(v), &p), ReadClass::Chimeric);
    }

    #[test]
    fn mirror_swaps_repeats_and_fixes_others() {
        let p = defaults();
        let shapes: Vec<Vec<f64>> = vec![
            vec![1.0; 120],
            {
                let mut v = vec![0.3; 60];
                v.extend(vec![1.0; 60]);
                v
            },
            {
                let mut v = vec![1.0; 120];
                for x in v.iter_mut().take(70).skip(50) {
                    *x = 0.02;
                }
                v
            },
        ];
        for values in shapes {
            let forward = heuristic_label(&sig(values.clone()), &p);
            let mut rev = values;
            rev.reverse();
            let backward = heuristic_label(&sig(rev), &p);
            assert_eq!(backward, forward.mirrored());
        }
    }

    #[test]
    fn balance_pool_respects_quota_and_seed() {
        let mut signals = Vec::new();
        for i in 0..100 {
            signals.push(Signal {
                read_id: format!("flat{i}"),
                values: vec![1.0; 100],
            });
        }
        for i in 0..10 {
            let mut v = vec![1.0; 100];
            for x in v.iter_mut().take(60).skip(40) {
                *x = 0.02;
            }
            signals.push(Signal {
                read_id: format!("notch{i}"),
                values: v,
            });
        }
        let mut quota = BTreeMap::new();
        quota.insert(ReadClass::Chimeric, 10);
        quota.insert(ReadClass::Regular, 10);
        let picked = balance_pool(&signals, &defaults(), &quota, 7);
        assert_eq!(picked.len(), 20);
        let chimeric = picked
            .iter()
            .filter(|s| s.read_id.starts_with("notch"))
            .count();
        assert_eq!(chimeric, 10);

        let again = balance_pool(&signals, &defaults(), &quota, 7);
        assert_eq!(picked, again);

        let empty_quota = BTreeMap::new();
        assert!(balance_pool(&signals, &defaults(), &empty_quota, 7).is_empty());
    }

    #[test]
    fn balance_pool_size_is_min_of_quota_and_count() {
        let signals: Vec<Signal> = (0..5)
            .map(|i| Signal {
                read_id: format!("s{i}"),
                values: vec![1.0; 50],
            })
            .collect();
        let mut quota = BTreeMap::new();
        quota.insert(ReadClass::Regular, 50);
        quota.insert(ReadClass::Chimeric, 50);
        let picked = balance_pool(&signals, &defaults(), &quota, 1);
        assert_eq!(picked.len(), 5);
    }
}
