//! Per-read coverage graphs: how many overlaps cover each base of a read.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::overlap::{OverlapRecord, ReadTable};

/// Integer depth per base of one read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageGraph {
    pub read_id: String,
    pub depth: Vec<u32>,
}

#[derive(Debug, Error)]
pub enum CoverageError {
    #[error("record references read {0} absent from the read table")]
    UnknownRead(String),
    #[error("record interval [{start}, {end}) exceeds length {len} of read {read}")]
    IntervalOutOfRange {
        read: String,
        start: usize,
        end: usize,
        len: usize,
    },
}

fn check_interval(
    read: &str,
    start: usize,
    end: usize,
    reads: &ReadTable,
) -> Result<usize, CoverageError> {
    let len = reads
        .get(read)
        .ok_or_else(|| CoverageError::UnknownRead(read.to_string()))?;
    if end > len || start >= end {
        return Err(CoverageError::IntervalOutOfRange {
            read: read.to_string(),
            start,
            end,
            len,
        });
    }
    Ok(len)
}

/// Build coverage graphs for every read in the table.
///
/// Each non-self record raises the depth over its query span on the query
/// read and over its target span on the target read. Implemented with a
/// difference array plus prefix sum, linear in bases + records.
pub fn build_coverage(
    records: &[OverlapRecord],
    reads: &ReadTable,
) -> Result<BTreeMap<String, CoverageGraph>, CoverageError> {
    let mut diffs: BTreeMap<&str, Vec<i64>> = BTreeMap::new();
    for (id, len) in reads.iter() {
        diffs.insert(id, vec![0i64; len + 1]);
    }
    for rec in records {
        check_interval(&rec.qname, rec.qstart, rec.qend, reads)?;
        check_interval(&rec.tname, rec.tstart, rec.tend, reads)?;
        if rec.is_self_overlap() {
            continue;
        }
        let q = diffs.get_mut(rec.qname.as_str()).expect("checked above");
        q[rec.qstart] += 1;
        q[rec.qend] -= 1;
        let t = diffs.get_mut(rec.tname.as_str()).expect("checked above");
        t[rec.tstart] += 1;
        t[rec.tend] -= 1;
    }
    let mut out = BTreeMap::new();
    for (id, diff) in diffs {
        let mut depth = Vec::with_capacity(diff.len() - 1);
        let mut acc = 0i64;
        for d in &diff[..diff.len() - 1] {
            acc += d;
            debug_assert!(acc >= 0);
            depth.push(acc as u32);
        }
        out.insert(
            id.to_string(),
            CoverageGraph {
                read_id: id.to_string(),
                depth,
            },
        );
    }
    Ok(out)
}

/// Naive per-position counting; O(bases x records). Kept as an independent
/// reference for `build_coverage`.
pub fn coverage_oracle(
    records: &[OverlapRecord],
    reads: &ReadTable,
) -> Result<BTreeMap<String, CoverageGraph>, CoverageError> {
    let mut out = BTreeMap::new();
    for (id, len) in reads.iter() {
        let mut depth = vec![0u32; len];
        for rec in records {
            check_interval(&rec.qname, rec.qstart, rec.qend, reads)?;
            check_interval(&rec.tname, rec.tstart, rec.tend, reads)?;
            if rec.is_self_overlap() {
                continue;
            }
            for (pos, d) in depth.iter_mut().enumerate() {
                if rec.qname == id && rec.qstart <= pos && pos < rec.qend {
                    *d += 1;
                }
                if rec.tname == id && rec.tstart <= pos && pos < rec.tend {
                    *d += 1;
                }
            }
        }
        out.insert(
            id.to_string(),
            CoverageGraph {
                read_id: id.to_string(),
                depth,
            },
        );
    }
    Ok(out)
}

/// Tab-separated dump: `read_id<TAB>d0,d1,...,dn-1`, one read per line.
pub fn write_coverage_tsv(graphs: &BTreeMap<String, CoverageGraph>) -> String {
    let mut out = String::new();
    for (id, g) in graphs {
        write!(out, "{id}\t").unwrap();
        for (i, d) in g.depth.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{d}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
pub enum CoverageParseError {
    #[error("line {0}: expected read_id<TAB>comma-separated depths")]
    BadLine(usize),
    #[error("line {line}: bad depth value {value:?}")]
    BadDepth { line: usize, value: String },
}

pub fn parse_coverage_tsv(text: &str) -> Result<BTreeMap<String, CoverageGraph>, CoverageParseError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (id, rest) = raw
            .split_once('\t')
            .ok_or(CoverageParseError::BadLine(line))?;
        let depth = rest
            .split(',')
            .map(|v| {
                v.parse::<u32>().map_err(|_| CoverageParseError::BadDepth {
                    line,
                    value: v.to_string(),
                })
            })
            .collect::<Result<Vec<u32>, _>>()?;
        if depth.is_empty() {
            return Err(CoverageParseError::BadLine(line));
        }
        out.insert(
            id.to_string(),
            CoverageGraph {
                read_id: id.to_string(),
                depth,
            },
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlap::{parse_paf, Strand};
    use crate::rng::Rng;

    fn rec(q: &str, qlen: usize, qs: usize, qe: usize, t: &str, tlen: usize, ts: usize, te: usize) -> OverlapRecord {
        OverlapRecord {
            qname: q.into(),
            qlen,
            qstart: qs,
            qend: qe,
            strand: Strand::Forward,
            tname: t.into(),
            tlen,
            tstart: ts,
            tend: te,
            nmatch: qe - qs,
            alnlen: qe - qs,
            mapq: 60,
        }
    }

    fn table(entries: &[(&str, usize)]) -> ReadTable {
        let mut t = ReadTable::new();
        for (id, len) in entries {
            t.insert(id, *len).unwrap();
        }
        t
    }

    #[test]
    fn no_records_means_zero_depth() {
        let reads = table(&[("r", 10)]);
        let out = build_coverage(&[], &reads).unwrap();
        assert_eq!(out["r"].depth, vec![0; 10]);
    }

    #[test]
    fn overlapping_query_spans_accumulate() {
        let reads = table(&[("r", 10), ("x", 20), ("y", 20)]);
        let records = vec![rec("r", 10, 0, 5, "x", 20, 0, 5), rec("r", 10, 3, 8, "y", 20, 0, 5)];
        let out = build_coverage(&records, &reads).unwrap();
        assert_eq!(out["r"].depth, vec![1, 1, 1, 2, 2, 1, 1, 1, 0, 0]);
    }

    #[test]
    fn record_contributes_to_both_sides() {
        let reads = table(&[("a", 100), ("b", 80)]);
        let records = vec![rec("a", 100, 10, 60, "b", 80, 20, 75)];
        let out = build_coverage(&records, &reads).unwrap();
        let sum_a: u32 = out["a"].depth.iter().sum();
        let sum_b: u32 = out["b"].depth.iter().sum();
        assert_eq!(sum_a as usize, 60 - 10);
        assert_eq!(sum_b as usize, 75 - 20);
    }

    #[test]
    fn self_overlap_skipped() {
        let reads = table(&[("a", 100)]);
        let records = vec![rec("a", 100, 0, 50, "a", 100, 40, 90)];
        let out = build_coverage(&records, &reads).unwrap();
        assert_eq!(out["a"].depth, vec![0; 100]);
    }

    #[test]
    fn unknown_read_is_error() {
        let reads = table(&[("a", 100)]);
        let records = vec![rec("a", 100, 0, 50, "ghost", 80, 0, 40)];
        assert!(matches!(
            build_coverage(&records, &reads),
            Err(CoverageError::UnknownRead(r)) if r == "ghost"
        ));
    }

    #[test]
    fn full_length_overlap_is_all_ones_both_sides() {
        let reads = table(&[("a", 50), ("b", 50)]);
        let records = vec![rec("a", 50, 0, 50, "b", 50, 0, 50)];
        for graphs in [
            build_coverage(&records, &reads).unwrap(),
            coverage_oracle(&records, &reads).unwrap(),
        ] {
            assert_eq!(graphs["a"].depth, vec![1; 50]);
            assert_eq!(graphs["b"].depth, vec![1; 50]);
        }
    }

    fn random_instance(rng: &mut Rng, max_reads: usize, max_records: usize) -> (Vec<OverlapRecord>, ReadTable) {
        let n_reads = rng.range_inclusive(1, max_reads);
        let mut reads = ReadTable::new();
        let mut names = Vec::new();
        for i in 0..n_reads {
            let name = format!("r{i}");
            let len = rng.range_inclusive(1, 120);
            reads.insert(&name, len).unwrap();
            names.push((name, len));
        }
        let n_records = rng.below(max_records + 1);
        let mut records = Vec::new();
        for _ in 0..n_records {
            let (qname, qlen) = names[rng.below(names.len())].clone();
            let (tname, tlen) = names[rng.below(names.len())].clone();
            let qstart = rng.below(qlen);
            let qend = rng.range_inclusive(qstart + 1, qlen);
            let tstart = rng.below(tlen);
            let tend = rng.range_inclusive(tstart + 1, tlen);
            records.push(rec(&qname, qlen, qstart, qend, &tname, tlen, tstart, tend));
        }
        (records, reads)
    }

    #[test]
    fn matches_oracle_on_random_instances() {
        let mut rng = Rng::new(2024);
        for _ in 0..200 {
            let (records, reads) = random_instance(&mut rng, 10, 50);
            let fast = build_coverage(&records, &reads).unwrap();
            let slow = coverage_oracle(&records, &reads).unwrap();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn permutation_invariant_and_mass_preserving() {
        let mut rng = Rng::new(7);
        let (mut records, reads) = random_instance(&mut rng, 8, 40);
        let before = build_coverage(&records, &reads).unwrap();
        let expected_mass: usize = records
            .iter()
            .filter(|r| !r.is_self_overlap())
            .map(|r| (r.qend - r.qstart) + (r.tend - r.tstart))
            .sum();
        let actual_mass: u64 = before
            .values()
            .map(|g| g.depth.iter().map(|&d| d as u64).sum::<u64>())
            .sum();
        assert_eq!(actual_mass as usize, expected_mass);
        rng.shuffle(&mut records);
        let after = build_coverage(&records, &reads).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn duplicate_records_count_twice() {
        let reads = table(&[("a", 10), ("b", 10)]);
        let r0 = rec("a", 10, 0, 5, "b", 10, 0, 5);
        let out = build_coverage(&[r0.clone(), r0], &reads).unwrap();
        assert_eq!(out["a"].depth[..5], [2, 2, 2, 2, 2]);
    }

    #[test]
    fn coverage_tsv_round_trip() {
        let text = "a\t2000\t0\t1000\t+\tb\t1500\t500\t1500\t900\t1000\t255\n";
        let (records, reads) = parse_paf(text).unwrap();
        let graphs = build_coverage(&records, &reads).unwrap();
        let dumped = write_coverage_tsv(&graphs);
        let parsed = parse_coverage_tsv(&dumped).unwrap();
        assert_eq!(parsed, graphs);
    }
}
