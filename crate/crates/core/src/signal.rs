//! Fixed-length, max-normalized signals: the model input derived from a
//! coverage graph by down-sampling and normalization.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::class::ReadClass;
use crate::coverage::CoverageGraph;

/// A length-L signal with values in [0, 1] and maximum exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub read_id: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrepError {
    #[error("read {read} is too short to down-sample: {len} bases < target length {target}")]
    TooShort {
        read: String,
        len: usize,
        target: usize,
    },
    #[error("read {0} has zero coverage everywhere")]
    ZeroCoverage(String),
}

/// Bin-mean down-sampling: position i lands in bin floor(i*L/n); each bin
/// takes the mean of its positions. Requires n >= L >= 1.
pub fn downsample(cov: &CoverageGraph, target_len: usize) -> Result<Vec<f64>, PrepError> {
    assert!(target_len >= 1, "target length must be at least 1");
    let n = cov.depth.len();
    if n < target_len {
        return Err(PrepError::TooShort {
            read: cov.read_id.clone(),
            len: n,
            target: target_len,
        });
    }
    let mut sums = vec![0.0f64; target_len];
    let mut counts = vec![0usize; target_len];
    for (i, &d) in cov.depth.iter().enumerate() {
        // i*L/n < L for all i < n, so the index is in range
        let bin = i * target_len / n;
        sums[bin] += d as f64;
        counts[bin] += 1;
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect())
}

/// Divide by the maximum so the largest value is exactly 1.
pub fn normalize(values: &[f64]) -> Result<Vec<f64>, PrepError> {
    assert!(!values.is_empty());
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return Err(PrepError::ZeroCoverage(String::new()));
    }
    Ok(values.iter().map(|v| v / max).collect())
}

/// Down-sample to `target_len` bins, then max-normalize.
pub fn prepare(cov: &CoverageGraph, target_len: usize) -> Result<Signal, PrepError> {
    let binned = downsample(cov, target_len)?;
    let values = normalize(&binned).map_err(|_| PrepError::ZeroCoverage(cov.read_id.clone()))?;
    Ok(Signal {
        read_id: cov.read_id.clone(),
        values,
    })
}

/// Bin-mean a prepared signal down to a shorter length and re-normalize so
/// the maximum is 1 again. Used when a model consumes a shorter input
/// length than the one signals were prepared at.
pub fn downsample_signal(sig: &Signal, target_len: usize) -> Result<Signal, PrepError> {
    let n = sig.values.len();
    if n < target_len {
        return Err(PrepError::TooShort {
            read: sig.read_id.clone(),
            len: n,
            target: target_len,
        });
    }
    let mut sums = vec![0.0f64; target_len];
    let mut counts = vec![0usize; target_len];
    for (i, &v) in sig.values.iter().enumerate() {
        let bin = i * target_len / n;
        sums[bin] += v;
        counts[bin] += 1;
    }
    let binned: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let values = normalize(&binned).map_err(|_| PrepError::ZeroCoverage(sig.read_id.clone()))?;
    Ok(Signal {
        read_id: sig.read_id.clone(),
        values,
    })
}

/// Outcome of preparing a whole coverage set: signals plus a rejection report.
#[derive(Debug, Default)]
pub struct PrepReport {
    pub too_short: Vec<String>,
    pub zero_coverage: Vec<String>,
}

pub fn prepare_all(
    graphs: &BTreeMap<String, CoverageGraph>,
    target_len: usize,
) -> (Vec<Signal>, PrepReport) {
    let mut signals = Vec::new();
    let mut report = PrepReport::default();
    for g in graphs.values() {
        match prepare(g, target_len) {
            Ok(s) => signals.push(s),
            Err(PrepError::TooShort { read, .. }) => report.too_short.push(read),
            Err(PrepError::ZeroCoverage(read)) => report.zero_coverage.push(read),
        }
    }
    (signals, report)
}

#[derive(Debug, Error)]
pub enum TsvError {
    #[error("line {0}: expected read_id<TAB>payload")]
    BadLine(usize),
    #[error("line {line}: bad value {value:?}")]
    BadValue { line: usize, value: String },
    #[error("line {line}: unknown class label {label:?}")]
    BadLabel { line: usize, label: String },
}

/// `read_id<TAB>v0,v1,...` with floats printed in shortest exact
/// round-trip form, so a file round-trip is bit-lossless.
pub fn write_signals_tsv(signals: &[Signal]) -> String {
    let mut out = String::new();
    for s in signals {
        write!(out, "{}\t", s.read_id).unwrap();
        for (i, v) in s.values.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_signals_tsv(text: &str) -> Result<Vec<Signal>, TsvError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (id, rest) = raw.split_once('\t').ok_or(TsvError::BadLine(line))?;
        let values = rest
            .split(',')
            .map(|v| {
                v.parse::<f64>().map_err(|_| TsvError::BadValue {
                    line,
                    value: v.to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.is_empty() {
            return Err(TsvError::BadLine(line));
        }
        out.push(Signal {
            read_id: id.to_string(),
            values,
        });
    }
    Ok(out)
}

/// `read_id<TAB>label` with the four canonical class names.
pub fn write_labels_tsv<'a>(labels: impl IntoIterator<Item = (&'a str, ReadClass)>) -> String {
    let mut out = String::new();
    for (id, c) in labels {
        writeln!(out, "{id}\t{c}").unwrap();
    }
    out
}

pub fn parse_labels_tsv(text: &str) -> Result<BTreeMap<String, ReadClass>, TsvError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (id, label) = raw.split_once('\t').ok_or(TsvError::BadLine(line))?;
        let class = ReadClass::parse(label.trim()).ok_or_else(|| TsvError::BadLabel {
            line,
            label: label.to_string(),
        })?;
        out.insert(id.to_string(), class);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn cov(id: &str, depth: Vec<u32>) -> CoverageGraph {
        CoverageGraph {
            read_id: id.into(),
            depth,
        }
    }

    #[test]
    fn downsample_bin_means() {
        let g = cov("r", vec![1, 2, 3, 4]);
        assert_eq!(downsample(&g, 2).unwrap(), vec![1.5, 3.5]);
    }

    #[test]
    fn downsample_identity_when_lengths_match() {
        let g = cov("r", vec![5, 1, 7, 0, 2]);
        assert_eq!(downsample(&g, 5).unwrap(), vec![5.0, 1.0, 7.0, 0.0, 2.0]);
    }

    #[test]
    fn downsample_matches_bin_mean_oracle() {
        let mut rng = Rng::new(5);
        let n = 997;
        let target = 100;
        let depth: Vec<u32> = (0..n).map(|_| rng.below(40) as u32).collect();
        let g = cov("r", depth.clone());
        let got = downsample(&g, target).unwrap();
        // direct re-statement of the definition
        for b in 0..target {
            let members: Vec<f64> = (0..n)
                .filter(|&i| i * target / n == b)
                .map(|i| depth[i] as f64)
                .collect();
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            assert!((got[b] - mean).abs() < 1e-12, "bin {b}");
        }
    }

    #[test]
    fn too_short_rejected() {
        let g = cov("tiny", vec![1, 2, 3]);
        assert_eq!(
            downsample(&g, 4),
            Err(PrepError::TooShort {
                read: "tiny".into(),
                len: 3,
                target: 4
            })
        );
    }

    #[test]
    fn normalize_divides_by_max() {
        assert_eq!(
            normalize(&[2.0, 4.0, 8.0, 8.0]).unwrap(),
            vec![0.25, 0.5, 1.0, 1.0]
        );
        assert_eq!(normalize(&[5.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn normalize_rejects_all_zero() {
        assert!(matches!(
            normalize(&[0.0, 0.0, 0.0]),
            Err(PrepError::ZeroCoverage(_))
        ));
    }

    #[test]
    fn prepare_composes() {
        let g = cov("r", vec![2, 2, 4, 4]);
        let s = prepare(&g, 2).unwrap();
        assert_eq!(s.values, vec![0.5, 1.0]);
    }

    #[test]
    fn constant_depth_prepares_to_ones() {
        for target in [1, 3, 7] {
            let g = cov("r", vec![9; 21]);
            let s = prepare(&g, target).unwrap();
            assert!(s.values.iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn prepare_is_scale_invariant() {
        let mut rng = Rng::new(17);
        let depth: Vec<u32> = (0..307).map(|_| 1 + rng.below(30) as u32).collect();
        let scaled: Vec<u32> = depth.iter().map(|&d| d * 7).collect();
        let a = prepare(&cov("r", depth), 50).unwrap();
        let b = prepare(&cov("r", scaled), 50).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn prepare_output_in_unit_range() {
        let mut rng = Rng::new(23);
        for _ in 0..50 {
            let n = rng.range_inclusive(10, 400);
            let target = rng.range_inclusive(1, n);
            let depth: Vec<u32> = (0..n).map(|_| rng.below(100) as u32).collect();
            if depth.iter().all(|&d| d == 0) {
                continue;
            }
            let s = prepare(&cov("r", depth), target).unwrap();
            assert_eq!(s.values.len(), target);
            assert!(s.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
            let max = s.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(max, 1.0);
        }
    }

    #[test]
    fn signal_tsv_round_trip_is_exact() {
        let signals = vec![
            Signal {
                read_id: "a".into(),
                values: vec![0.1, 1.0, 0.333333333333333314829616256247],
            },
            Signal {
                read_id: "b".into(),
                values: vec![1.0],
            },
        ];
        let parsed = parse_signals_tsv(&write_signals_tsv(&signals)).unwrap();
        assert_eq!(parsed, signals);
    }

    #[test]
    fn labels_tsv_round_trip() {
        let labels = vec![
            ("x".to_string(), ReadClass::Chimeric),
            ("y".to_string(), ReadClass::Regular),
        ];
        let text = write_labels_tsv(labels.iter().map(|(id, c)| (id.as_str(), *c)));
        let parsed = parse_labels_tsv(&text).unwrap();
        assert_eq!(parsed["x"], ReadClass::Chimeric);
        assert_eq!(parsed["y"], ReadClass::Regular);
        assert!(parse_labels_tsv("z\tnot_a_class\n").is_err());
    }
}
