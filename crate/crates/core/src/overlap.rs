//! PAF overlap records and the read-length table derived from them.
//!
//! Only the 12 mandatory PAF columns are kept; optional SAM-style tags are
//! dropped on parse (and therefore absent after a round-trip).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

/// Alignment strand of the query relative to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strand {
    Forward,
    Reverse,
}

impl Strand {
    pub fn as_char(self) -> char {
        match self {
            Strand::Forward => '+',
            Strand::Reverse => '-',
        }
    }
}

/// One pairwise read overlap: a single PAF row.
///
/// Coordinates are 0-based half-open, as in the PAF spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapRecord {
    pub qname: String,
    pub qlen: usize,
    pub qstart: usize,
    pub qend: usize,
    pub strand: Strand,
    pub tname: String,
    pub tlen: usize,
    pub tstart: usize,
    pub tend: usize,
    pub nmatch: usize,
    pub alnlen: usize,
    pub mapq: u8,
}

impl OverlapRecord {
    /// A record mapping a read onto itself carries no external evidence;
    /// coverage building skips these.
    pub fn is_self_overlap(&self) -> bool {
        self.qname == self.tname
    }

    fn validate(&self, line: usize) -> Result<(), PafError> {
        let fail = |reason: String| PafError::Malformed { line, reason };
        if self.qname.is_empty() || self.tname.is_empty() {
            return Err(fail("empty read name".into()));
        }
        if !(self.qstart < self.qend && self.qend <= self.qlen) {
            return Err(fail(format!(
                "query coordinates out of range: start {} end {} len {}",
                self.qstart, self.qend, self.qlen
            )));
        }
        if !(self.tstart < self.tend && self.tend <= self.tlen) {
            return Err(fail(format!(
                "target coordinates out of range: start {} end {} len {}",
                self.tstart, self.tend, self.tlen
            )));
        }
        if self.nmatch > self.alnlen {
            return Err(fail(format!(
                "nmatch {} exceeds alignment length {}",
                self.nmatch, self.alnlen
            )));
        }
        Ok(())
    }
}

/// Read id -> read length in bases, for every read seen in the overlaps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReadTable {
    lengths: BTreeMap<String, usize>,
}

impl ReadTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a read length, rejecting conflicting lengths for the same id.
    pub fn insert(&mut self, id: &str, len: usize) -> Result<(), PafError> {
        assert!(len > 0, "read length must be positive");
        match self.lengths.get(id) {
            Some(&prev) if prev != len => Err(PafError::LengthConflict {
                read: id.to_string(),
                first: prev,
                second: len,
                line: 0,
            }),
            Some(_) => Ok(()),
            None => {
                self.lengths.insert(id.to_string(), len);
                Ok(())
            }
        }
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.lengths.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.lengths.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

#[derive(Debug, Error)]
pub enum PafError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: read {read} appears with conflicting lengths {first} and {second}")]
    LengthConflict {
        read: String,
        first: usize,
        second: usize,
        line: usize,
    },
}

fn parse_int(field: &str, what: &str, line: usize) -> Result<usize, PafError> {
    field.parse::<usize>().map_err(|_| PafError::Malformed {
        line,
        reason: format!("{what} is not a non-negative integer: {field:?}"),
    })
}

/// Parse a PAF text stream into records plus the read-length table.
///
/// Lines must carry at least the 12 mandatory tab-separated columns; extra
/// columns are ignored. Blank lines are skipped. Line numbers in errors are
/// 1-based.
pub fn parse_paf(text: &str) -> Result<(Vec<OverlapRecord>, ReadTable), PafError> {
    let mut records = Vec::new();
    let mut table = ReadTable::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() < 12 {
            return Err(PafError::Malformed {
                line,
                reason: format!("expected at least 12 fields, found {}", fields.len()),
            });
        }
        let strand = match fields[4] {
            "+" => Strand::Forward,
            "-" => Strand::Reverse,
            other => {
                return Err(PafError::Malformed {
                    line,
                    reason: format!("strand must be + or -, found {other:?}"),
                })
            }
        };
        let mapq_raw = parse_int(fields[11], "mapq", line)?;
        if mapq_raw > 255 {
            return Err(PafError::Malformed {
                line,
                reason: format!("mapq {mapq_raw} out of range 0..=255"),
            });
        }
        let rec = OverlapRecord {
            qname: fields[0].to_string(),
            qlen: parse_int(fields[1], "query length", line)?,
            qstart: parse_int(fields[2], "query start", line)?,
            qend: parse_int(fields[3], "query end", line)?,
            strand,
            tname: fields[5].to_string(),
            tlen: parse_int(fields[6], "target length", line)?,
            tstart: parse_int(fields[7], "target start", line)?,
            tend: parse_int(fields[8], "target end", line)?,
            nmatch: parse_int(fields[9], "match count", line)?,
            alnlen: parse_int(fields[10], "alignment length", line)?,
            mapq: mapq_raw as u8,
        };
        rec.validate(line)?;
        for (name, len) in [(&rec.qname, rec.qlen), (&rec.tname, rec.tlen)] {
            table.insert(name, len).map_err(|e| match e {
                PafError::LengthConflict {
                    read,
                    first,
                    second,
                    ..
                } => PafError::LengthConflict {
                    read,
                    first,
                    second,
                    line,
                },
                other => other,
            })?;
        }
        records.push(rec);
    }
    Ok((records, table))
}

/// Serialize records as PAF. `parse_paf(&write_paf(rs))` reproduces `rs`
/// field for field.
pub fn write_paf(records: &[OverlapRecord]) -> String {
    let mut out = String::new();
    for r in records {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.qname,
            r.qlen,
            r.qstart,
            r.qend,
            r.strand.as_char(),
            r.tname,
            r.tlen,
            r.tstart,
            r.tend,
            r.nmatch,
            r.alnlen,
            r.mapq
        )
        .expect("writing to String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    const LINE: &str = "a\t1000\t0\t500\t+\tb\t800\t300\t800\t450\t500\t255";

    #[test]
    fn empty_stream() {
        let (recs, table) = parse_paf("").unwrap();
        assert!(recs.is_empty());
        assert!(table.is_empty());
    }

    #[test]
    fn single_line() {
        let (recs, table) = parse_paf(&format!("{LINE}\n")).unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.qname, "a");
        assert_eq!(r.qlen, 1000);
        assert_eq!(r.qstart, 0);
        assert_eq!(r.qend, 500);
        assert_eq!(r.strand, Strand::Forward);
        assert_eq!(r.tname, "b");
        assert_eq!(r.tlen, 800);
        assert_eq!(r.tstart, 300);
        assert_eq!(r.tend, 800);
        assert_eq!(r.nmatch, 450);
        assert_eq!(r.alnlen, 500);
        assert_eq!(r.mapq, 255);
        assert_eq!(table.get("a"), Some(1000));
        assert_eq!(table.get("b"), Some(800));
        assert_eq!(table.len(), 2);
    }

    #[test]
    fn length_conflict_names_read_and_line() {
        let text = "a\t1000\t0\t500\t+\tb\t800\t300\t800\t450\t500\t255\n\
                    c\t700\t0\t600\t-\ta\t900\t0\t600\t500\t600\t60\n";
        let err = parse_paf(text).unwrap_err();
        match err {
            PafError::LengthConflict {
                read,
                first,
                second,
                line,
            } => {
                assert_eq!(read, "a");
                assert_eq!(first, 1000);
                assert_eq!(second, 900);
                assert_eq!(line, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_report_position() {
        for (text, needle) in [
            ("a\t1000\t0\t500\t+\tb\t800\t300\t800\t450\t500", "12 fields"),
            ("a\tx\t0\t500\t+\tb\t800\t300\t800\t450\t500\t255", "integer"),
            ("a\t1000\t500\t500\t+\tb\t800\t300\t800\t450\t500\t255", "range"),
            ("a\t1000\t0\t500\t*\tb\t800\t300\t800\t450\t500\t255", "strand"),
            ("a\t1000\t0\t500\t+\tb\t800\t300\t900\t450\t500\t255", "range"),
            ("a\t1000\t0\t500\t+\tb\t800\t300\t800\t450\t500\t300", "mapq"),
            ("a\t1000\t0\t500\t+\tb\t800\t300\t800\t600\t500\t255", "nmatch"),
        ] {
            let err = parse_paf(text).unwrap_err().to_string();
            assert!(err.contains("line 1"), "{err}");
            assert!(err.to_lowercase().contains(needle), "{err} vs {needle}");
        }
    }

    #[test]
    fn extra_fields_ignored() {
        let (recs, _) = parse_paf(&format!("{LINE}\tcm:i:42\ttp:A:P\n")).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(write_paf(&recs).trim_end(), LINE);
    }

    #[test]
    fn write_empty_is_empty() {
        assert_eq!(write_paf(&[]), "");
    }

    #[test]
    fn self_overlap_flagged() {
        let text = "a\t1000\t0\t500\t+\ta\t1000\t400\t900\t450\t500\t255\n";
        let (recs, _) = parse_paf(text).unwrap();
        assert!(recs[0].is_self_overlap());
    }

    fn random_record(rng: &mut Rng, names: &[(String, usize)]) -> OverlapRecord {
        let (qname, qlen) = names[rng.below(names.len())].clone();
        let (tname, tlen) = names[rng.below(names.len())].clone();
        let qstart = rng.below(qlen);
        let qend = rng.range_inclusive(qstart + 1, qlen);
        let tstart = rng.below(tlen);
        let tend = rng.range_inclusive(tstart + 1, tlen);
        let alnlen = rng.range_inclusive(1, 2000);
        OverlapRecord {
            qname,
            qlen,
            qstart,
            qend,
            strand: if rng.below(2) == 0 {
                Strand::Forward
            } else {
                Strand::Reverse
            },
            tname,
            tlen,
            tstart,
            tend,
            nmatch: rng.below(alnlen + 1),
            alnlen,
            mapq: rng.below(256) as u8,
        }
    }

    #[test]
    fn round_trip_random_records() {
        let mut rng = Rng::new(99);
        let names: Vec<(String, usize)> = (0..10)
            .map(|i| (format!("read{i}"), rng.range_inclusive(100, 5000)))
            .collect();
        let records: Vec<OverlapRecord> =
            (0..100).map(|_| random_record(&mut rng, &names)).collect();
        let (reparsed, table) = parse_paf(&write_paf(&records)).unwrap();
        assert_eq!(reparsed, records);
        for r in &records {
            assert_eq!(table.get(&r.qname), Some(r.qlen));
            assert_eq!(table.get(&r.tname), Some(r.tlen));
        }
    }
}
