//! Apply classifications to the read/overlap set (drop chimeric reads,
//! drop left-vs-right repeat overlaps) and compute contig statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::class::ReadClass;
use crate::overlap::OverlapRecord;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterReport {
    /// Distinct chimeric-classified reads that occur in the input records.
    pub reads_dropped: usize,
    pub overlaps_dropped_chimeric: usize,
    pub overlaps_dropped_repeat_pair: usize,
    pub overlaps_kept: usize,
    /// Reads without a classification, treated as regular.
    pub unclassified_reads: usize,
}

/// Drop every record touching a chimeric read, and every record joining a
/// left-repeat read with a right-repeat read. Reads missing from the
/// classification default to regular (counted in the report). Kept records
/// preserve their input order.
pub fn filter_overlaps(
    records: &[OverlapRecord],
    classes: &BTreeMap<String, ReadClass>,
) -> (Vec<OverlapRecord>, FilterReport) {
    let mut report = FilterReport::default();
    let mut unclassified: BTreeSet<&str> = BTreeSet::new();
    let mut chimeric_seen: BTreeSet<&str> = BTreeSet::new();
    let mut kept = Vec::new();
    for rec in records {
        let class_of =
            |name: &str| -> ReadClass { classes.get(name).copied().unwrap_or(ReadClass::Regular) };
        let q = class_of(&rec.qname);
        let t = class_of(&rec.tname);
        for (name, class) in [(&rec.qname, q), (&rec.tname, t)] {
            if classes.get(name.as_str()).is_none() {
                unclassified.insert(name);
            }
            if class == ReadClass::Chimeric {
                chimeric_seen.insert(name);
            }
        }
        if q == ReadClass::Chimeric || t == ReadClass::Chimeric {
            report.overlaps_dropped_chimeric += 1;
            continue;
        }
        let repeat_pair = matches!(
            (q, t),
            (ReadClass::LeftRepeat, ReadClass::RightRepeat)
                | (ReadClass::RightRepeat, ReadClass::LeftRepeat)
        );
        if repeat_pair {
            report.overlaps_dropped_repeat_pair += 1;
            continue;
        }
        kept.push(rec.clone());
    }
    report.overlaps_kept = kept.len();
    report.reads_dropped = chimeric_seen.len();
    report.unclassified_reads = unclassified.len();
    debug_assert_eq!(
        report.overlaps_kept
            + report.overlaps_dropped_chimeric
            + report.overlaps_dropped_repeat_pair,
        records.len()
    );
    (kept, report)
}

/// One read id per line: every read classified chimeric.
pub fn blacklist(classes: &BTreeMap<String, ReadClass>) -> String {
    let mut out = String::new();
    for (id, &c) in classes {
        if c == ReadClass::Chimeric {
            writeln!(out, "{id}").unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContigStats {
    pub n_contigs: usize,
    /// Shortest contig such that it and all longer contigs cover at least
    /// half the reference genome; `None` when the assembly is too small.
    pub ng50: Option<usize>,
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("contig lengths must be positive")]
    BadContig,
    #[error("genome length must be positive")]
    BadGenome,
    #[error("line {0}: not a positive integer contig length")]
    BadLengthLine(usize),
}

/// NG50: sort descending, accumulate until the running total first reaches
/// half the genome (2*sum >= G in exact integer arithmetic).
pub fn ng50(contig_lengths: &[usize], genome_length: usize) -> Result<ContigStats, StatsError> {
    if genome_length == 0 {
        return Err(StatsError::BadGenome);
    }
    if contig_lengths.iter().any(|&l| l == 0) {
        return Err(StatsError::BadContig);
    }
    let mut sorted = contig_lengths.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut cumulative = 0usize;
    let mut value = None;
    for &len in &sorted {
        cumulative += len;
        if 2 * cumulative >= genome_length {
            value = Some(len);
            break;
        }
    }
    Ok(ContigStats {
        n_contigs: contig_lengths.len(),
        ng50: value,
    })
}

/// Contig lengths from FASTA (sequence lengths only) or a plain
/// one-length-per-line file; FASTA is detected by a leading '>'.
pub fn parse_contig_lengths(text: &str) -> Result<Vec<usize>, StatsError> {
    let first = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or_default();
    if first.starts_with('>') {
        let mut lengths = Vec::new();
        let mut current: Option<usize> = None;
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix('>') {
                let _ = rest;
                if let Some(len) = current.take() {
                    lengths.push(len);
                }
                current = Some(0);
            } else if let Some(len) = current.as_mut() {
                *len += line.trim().len();
            }
        }
        if let Some(len) = current {
            lengths.push(len);
        }
        if lengths.iter().any(|&l| l == 0) {
            return Err(StatsError::BadContig);
        }
        Ok(lengths)
    } else {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&v| v > 0)
                    .ok_or(StatsError::BadLengthLine(i + 1))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlap::Strand;
    use crate::rng::Rng;

    fn rec(q: &str, t: &str) -> OverlapRecord {
        OverlapRecord {
            qname: q.into(),
            qlen: 1000,
            qstart: 0,
            qend: 600,
            strand: Strand::Forward,
            tname: t.into(),
            tlen: 1000,
            tstart: 100,
            tend: 700,
            nmatch: 500,
            alnlen: 600,
            mapq: 60,
        }
    }

    fn classes(pairs: &[(&str, ReadClass)]) -> BTreeMap<String, ReadClass> {
        pairs.iter().map(|(n, c)| (n.to_string(), *c)).collect()
    }

    #[test]
    fn chimeric_reads_take_their_overlaps_down() {
        let records = vec![rec("r1", "r2"), rec("r2", "r3")];
        let classes = classes(&[
            ("r1", ReadClass::Chimeric),
            ("r2", ReadClass::Regular),
            ("r3", ReadClass::Regular),
        ]);
        let (kept, report) = filter_overlaps(&records, &classes);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].qname, "r2");
        assert_eq!(report.reads_dropped, 1);
        assert_eq!(report.overlaps_dropped_chimeric, 1);
        assert_eq!(report.overlaps_kept, 1);
    }

    #[test]
    fn left_right_repeat_pairs_dropped_both_orders() {
        let records = vec![rec("r4", "r5"), rec("r5", "r4"), rec("r4", "r6")];
        let classes = classes(&[
            ("r4", ReadClass::LeftRepeat),
            ("r5", ReadClass::RightRepeat),
            ("r6", ReadClass::LeftRepeat),
        ]);
        let (kept, report) = filter_overlaps(&records, &classes);
        // left-left overlap survives; only left-right pairs are dropped
        assert_eq!(kept.len(), 1);
        assert_eq!(report.overlaps_dropped_repeat_pair, 2);
    }

    #[test]
    fn all_regular_is_identity() {
        let records = vec![rec("a", "b"), rec("b", "c")];
        let classes = classes(&[
            ("a", ReadClass::Regular),
            ("b", ReadClass::Regular),
            ("c", ReadClass::Regular),
        ]);
        let (kept, report) = filter_overlaps(&records, &classes);
        assert_eq!(kept, records);
        assert_eq!(report.reads_dropped, 0);
        assert_eq!(report.overlaps_dropped_chimeric, 0);
        assert_eq!(report.overlaps_dropped_repeat_pair, 0);
    }

    #[test]
    fn unclassified_reads_default_to_regular_with_count() {
        let records = vec![rec("a", "mystery")];
        let classes = classes(&[("a", ReadClass::Regular)]);
        let (kept, report) = filter_overlaps(&records, &classes);
        assert_eq!(kept.len(), 1);
        assert_eq!(report.unclassified_reads, 1);
    }

    #[test]
    fn filtering_is_idempotent() {
        let mut rng = Rng::new(13);
        let names: Vec<String> = (0..12).map(|i| format!("r{i}")).collect();
        let all_classes: BTreeMap<String, ReadClass> = names
            .iter()
            .map(|n| (n.clone(), ReadClass::ALL[rng.below(4)]))
            .collect();
        let records: Vec<OverlapRecord> = (0..80)
            .map(|_| {
                rec(
                    &names[rng.below(names.len())],
                    &names[rng.below(names.len())],
                )
            })
            .collect();
        let (kept, _) = filter_overlaps(&records, &all_classes);
        let (kept2, report2) = filter_overlaps(&kept, &all_classes);
        assert_eq!(kept, kept2);
        assert_eq!(report2.overlaps_dropped_chimeric, 0);
        assert_eq!(report2.overlaps_dropped_repeat_pair, 0);
        // no kept overlap mentions a chimeric read
        for r in &kept {
            assert_ne!(all_classes[&r.qname], ReadClass::Chimeric);
            assert_ne!(all_classes[&r.tname], ReadClass::Chimeric);
        }
    }

    #[test]
    fn blacklist_lists_chimeric_reads() {
        let classes = classes(&[
            ("b", ReadClass::Chimeric),
            ("a", ReadClass::Regular),
            ("c", ReadClass::Chimeric),
        ]);
        assert_eq!(blacklist(&classes), "b\nc\n");
    }

    #[test]
    fn ng50_hand_cases() {
        assert_eq!(
            ng50(&[500, 300, 200], 1000).unwrap(),
            ContigStats {
                n_contigs: 3,
                ng50: Some(500)
            }
        );
        assert_eq!(
            ng50(&[400, 300, 200], 1000).unwrap(),
            ContigStats {
                n_contigs: 3,
                ng50: Some(300)
            }
        );
        assert_eq!(
            ng50(&[100], 1000).unwrap(),
            ContigStats {
                n_contigs: 1,
                ng50: None
            }
        );
    }

    #[test]
    fn ng50_rejects_degenerate_inputs() {
        assert!(matches!(ng50(&[10, 0], 100), Err(StatsError::BadContig)));
        assert!(matches!(ng50(&[10], 0), Err(StatsError::BadGenome)));
    }

    #[test]
    fn ng50_matches_prefix_enumeration_oracle() {
        let mut rng = Rng::new(14);
        for _ in 0..1000 {
            let n = rng.range_inclusive(1, 30);
            let lengths: Vec<usize> = (0..n).map(|_| rng.range_inclusive(1, 5000)).collect();
            let genome = rng.range_inclusive(1, 40_000);
            let got = ng50(&lengths, genome).unwrap();
            // oracle: enumerate every prefix of the descending sort
            let mut sorted = lengths.clone();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            let mut want = None;
            for k in 1..=sorted.len() {
                let sum: usize = sorted[..k].iter().sum();
                if 2 * sum >= genome {
                    want = Some(sorted[k - 1]);
                    break;
                }
            }
            assert_eq!(got.ng50, want);
            if let Some(v) = got.ng50 {
                assert!(lengths.contains(&v));
            }
        }
    }

    #[test]
    fn contig_lengths_from_plain_and_fasta() {
        assert_eq!(
            parse_contig_lengths("500\n300\n200\n").unwrap(),
            vec![500, 300, 200]
        );
        let fasta = ">c1 desc\nACGT\nACGT\n>c2\nAC\n";
        assert_eq!(parse_contig_lengths(fasta).unwrap(), vec![8, 2]);
        assert!(parse_contig_lengths("12\nnope\n").is_err());
    }
}
