//! Synthetic data generation: labeled signals with the four class
//! signatures, and a coordinate-true read/overlap simulator so the whole
//! pipeline can be exercised at desk scale with known ground truth.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::class::ReadClass;
use crate::overlap::{OverlapRecord, ReadTable, Strand};
use crate::rng::Rng;
use crate::signal::Signal;

/// Parameters for shaped-signal generation.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Output signal length.
    pub len: usize,
    /// How many signals to generate per class.
    pub per_class: BTreeMap<ReadClass, usize>,
    /// Base coverage level range (pre-normalization scale).
    pub base_level: (f64, f64),
    /// Chimera notch width range, as a fraction of the length.
    pub notch_width: (f64, f64),
    /// Upper bound on the notch multiplier: values inside the notch are the
    /// base scaled by a factor drawn below this.
    pub notch_depth: f64,
    /// Repeat boost factor range applied to one side.
    pub boost: (f64, f64),
    /// Repeat boundary position range, as a fraction of the length.
    pub boundary: (f64, f64),
    /// Amplitude range of the smooth low-frequency undulation riding on the
    /// base level. Real coverage graphs are never flat; this is the
    /// within-class variation that makes the classification task depend on
    /// shape rather than level.
    pub undulation: (f64, f64),
    /// Additive Gaussian noise level; noisy values are clamped to [0, 1].
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(len: usize, n_per_class: usize, noise_sigma: f64, seed: u64) -> Self {
        let mut per_class = BTreeMap::new();
        for c in ReadClass::ALL {
            per_class.insert(c, n_per_class);
        }
        SynthConfig {
            len,
            per_class,
            base_level: (0.3, 0.8),
            notch_width: (0.02, 0.08),
            notch_depth: 0.1,
            boost: (2.0, 4.0),
            boundary: (0.35, 0.65),
            undulation: (0.0, 0.0),
            noise_sigma,
            seed,
        }
    }

    /// Same defaults but with an undulating base, for benchmarks where the
    /// class signal must not be learnable from a handful of labels.
    pub fn with_undulation(mut self, lo: f64, hi: f64) -> Self {
        self.undulation = (lo, hi);
        self
    }
}

const TAPER_FRACTION: f64 = 0.05;
const NOTCH_CENTER: (f64, f64) = (0.2, 0.8);

fn apply_taper(values: &mut [f64]) {
    let n = values.len();
    let t = (TAPER_FRACTION * n as f64).floor() as usize;
    for i in 0..t {
        let f = (i + 1) as f64 / (t + 1) as f64;
        values[i] *= f;
        values[n - 1 - i] *= f;
    }
}

/// Smooth pseudo-random profile in [-1, 1]: two sinusoids with random low
/// frequencies, phases and weights, peak-normalized.
fn undulation_profile(len: usize, rng: &mut Rng) -> Vec<f64> {
    let params: Vec<(f64, f64, f64)> = (0..2)
        .map(|_| {
            (
                rng.uniform(1.0, 5.0),
                rng.uniform(0.0, 2.0 * std::f64::consts::PI),
                rng.uniform(0.3, 1.0),
            )
        })
        .collect();
    let mut u: Vec<f64> = (0..len)
        .map(|i| {
            let t = i as f64 / len as f64;
            params
                .iter()
                .map(|&(f, phi, w)| w * (2.0 * std::f64::consts::PI * f * t + phi).sin())
                .sum()
        })
        .collect();
    let peak = u.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1e-12);
    for x in &mut u {
        *x /= peak;
    }
    u
}

fn shape_for(class: ReadClass, len: usize, cfg: &SynthConfig, rng: &mut Rng) -> Vec<f64> {
    let base = rng.uniform(cfg.base_level.0, cfg.base_level.1);
    let amplitude = rng.uniform(cfg.undulation.0, cfg.undulation.1);
    let profile = undulation_profile(len, rng);
    let mut v: Vec<f64> = profile
        .iter()
        .map(|&u| base * (1.0 + amplitude * u))
        .collect();
    apply_taper(&mut v);
    match class {
        ReadClass::Regular => {}
        ReadClass::Chimeric => {
            let width = ((rng.uniform(cfg.notch_width.0, cfg.notch_width.1) * len as f64).round()
                as usize)
                .max(1);
            let center = (rng.uniform(NOTCH_CENTER.0, NOTCH_CENTER.1) * len as f64).round() as usize;
            let start = center.saturating_sub(width / 2).min(len - width);
            let factor = rng.uniform(0.0, cfg.notch_depth);
            for x in &mut v[start..start + width] {
                *x *= factor;
            }
        }
        ReadClass::RightRepeat | ReadClass::LeftRepeat => {
            let boundary = (rng.uniform(cfg.boundary.0, cfg.boundary.1) * len as f64) as usize;
            let boost = rng.uniform(cfg.boost.0, cfg.boost.1);
            if class == ReadClass::RightRepeat {
                for x in &mut v[boundary..] {
                    *x *= boost;
                }
            } else {
                for x in &mut v[..len - boundary] {
                    *x *= boost;
                }
            }
            // rescale so the shape stays at base scale before noise
            let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for x in &mut v {
                *x *= base / max;
            }
        }
    }
    v
}

/// Generate labeled signals. Output is grouped by class in canonical class
/// order; deterministic given the seed.
pub fn synth_signals(cfg: &SynthConfig) -> (Vec<Signal>, Vec<ReadClass>) {
    let mut rng = Rng::derive(cfg.seed, 0x5196);
    let mut signals = Vec::new();
    let mut labels = Vec::new();
    for class in ReadClass::ALL {
        let count = cfg.per_class.get(&class).copied().unwrap_or(0);
        for idx in 0..count {
            let mut v = shape_for(class, cfg.len, cfg, &mut rng);
            if cfg.noise_sigma > 0.0 {
                for x in &mut v {
                    *x = (*x + rng.normal_scaled(0.0, cfg.noise_sigma)).clamp(0.0, 1.0);
                }
            }
            let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(max > 0.0, "synthetic signal collapsed to zero");
            for x in &mut v {
                *x /= max;
            }
            signals.push(Signal {
                read_id: format!("{class}_{idx:04}"),
                values: v,
            });
            labels.push(class);
        }
    }
    (signals, labels)
}

/// A duplicated genome segment: positions [copy_a, copy_a+len) and
/// [copy_b, copy_b+len) carry identical sequence.
#[derive(Debug, Clone, Copy)]
pub struct RepeatSpec {
    pub copy_a: usize,
    pub copy_b: usize,
    pub len: usize,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub genome_len: usize,
    pub n_reads: usize,
    /// Ordinary read length range, inclusive.
    pub read_len: (usize, usize),
    pub chimera_rate: f64,
    pub repeat: Option<RepeatSpec>,
    /// Minimum interval intersection that yields an overlap record.
    pub min_overlap: usize,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(genome_len: usize, n_reads: usize, read_len: (usize, usize), seed: u64) -> Self {
        PipelineConfig {
            genome_len,
            n_reads,
            read_len,
            chimera_rate: 0.0,
            repeat: None,
            min_overlap: 500,
            seed,
        }
    }
}

/// Fused reads join two source segments this much longer than ordinary
/// reads, so the junction dip is clearly interior to the coverage graph.
const CHIMERA_PART_SCALE: f64 = 2.5;

/// Minimum gap between the two source segments of a fused read, as a
/// fraction of the genome.
const CHIMERA_GAP_FRACTION: f64 = 0.1;

/// One genome-anchored piece of a read: genome interval plus where it sits
/// in read-local coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadPart {
    pub genome_start: usize,
    pub len: usize,
    pub read_offset: usize,
}

#[derive(Debug, Clone)]
pub struct SynthRead {
    pub id: String,
    pub parts: Vec<ReadPart>,
    pub label: ReadClass,
}

impl SynthRead {
    pub fn total_len(&self) -> usize {
        self.parts.iter().map(|p| p.len).sum()
    }
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub reads: ReadTable,
    pub records: Vec<OverlapRecord>,
    pub labels: BTreeMap<String, ReadClass>,
    /// Construction truth, for tests that re-check coordinates.
    pub layout: Vec<SynthRead>,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
}

fn interval_intersection(a: (usize, usize), b: (usize, usize)) -> Option<(usize, usize)> {
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    (lo < hi).then_some((lo, hi))
}

/// Genome intervals a part is equivalent to: itself, plus its image through
/// the repeat in each direction. Each alias remembers how to map a genome
/// position back into read-local coordinates.
fn aliases(part: &ReadPart, repeat: Option<&RepeatSpec>) -> Vec<(usize, usize, i64)> {
    let g = (part.genome_start, part.genome_start + part.len);
    // (start, end, genome_pos - read_pos) for this alias
    let base_shift = part.genome_start as i64 - part.read_offset as i64;
    let mut out = vec![(g.0, g.1, base_shift)];
    if let Some(r) = repeat {
        let copy_a = (r.copy_a, r.copy_a + r.len);
        let copy_b = (r.copy_b, r.copy_b + r.len);
        if let Some((lo, hi)) = interval_intersection(g, copy_a) {
            let delta = r.copy_b as i64 - r.copy_a as i64;
            out.push(((lo as i64 + delta) as usize, (hi as i64 + delta) as usize, base_shift + delta));
        }
        if let Some((lo, hi)) = interval_intersection(g, copy_b) {
            let delta = r.copy_a as i64 - r.copy_b as i64;
            out.push(((lo as i64 + delta) as usize, (hi as i64 + delta) as usize, base_shift + delta));
        }
    }
    out
}

fn label_for(parts: &[ReadPart], total: usize, repeat: Option<&RepeatSpec>) -> ReadClass {
    let Some(r) = repeat else {
        return ReadClass::Regular;
    };
    // read-local extent of repeat-equivalent sequence
    let mut lo = usize::MAX;
    let mut hi = 0usize;
    for part in parts {
        let g = (part.genome_start, part.genome_start + part.len);
        for copy in [
            (r.copy_a, r.copy_a + r.len),
            (r.copy_b, r.copy_b + r.len),
        ] {
            if let Some((a, b)) = interval_intersection(g, copy) {
                let local_a = a - part.genome_start + part.read_offset;
                let local_b = b - part.genome_start + part.read_offset;
                lo = lo.min(local_a);
                hi = hi.max(local_b);
            }
        }
    }
    if lo >= hi {
        return ReadClass::Regular;
    }
    let tol = total / 10;
    let touches_left = lo <= tol;
    let touches_right = hi >= total - tol;
    match (touches_left, touches_right) {
        (true, false) => ReadClass::LeftRepeat,
        (false, true) => ReadClass::RightRepeat,
        // fully inside the repeat (uniformly elevated) or an interior bump:
        // neither one-sided signature applies
        _ => ReadClass::Regular,
    }
}

/// Sample reads on a linear genome and emit exact-coordinate overlap records
/// for every interval intersection of at least `min_overlap` bases,
/// including intersections through the repeat copies.
pub fn synth_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput, SynthError> {
    let g = cfg.genome_len;
    if cfg.read_len.0 == 0 || cfg.read_len.0 > cfg.read_len.1 {
        return Err(SynthError::Infeasible(format!(
            "bad read length range {:?}",
            cfg.read_len
        )));
    }
    if cfg.read_len.1 > g {
        return Err(SynthError::Infeasible(format!(
            "reads up to {} bases do not fit in a {} base genome",
            cfg.read_len.1, g
        )));
    }
    let gap = (g as f64 * CHIMERA_GAP_FRACTION) as usize;
    let part_max = (CHIMERA_PART_SCALE * cfg.read_len.1 as f64).ceil() as usize;
    if cfg.chimera_rate > 0.0 && 2 * part_max + gap > g {
        return Err(SynthError::Infeasible(
            "genome too short for fused reads with the required gap".into(),
        ));
    }
    if let Some(r) = &cfg.repeat {
        let ok = r.len > 0
            && r.copy_a + r.len <= g
            && r.copy_b + r.len <= g
            && interval_intersection((r.copy_a, r.copy_a + r.len), (r.copy_b, r.copy_b + r.len))
                .is_none();
        if !ok {
            return Err(SynthError::Infeasible("repeat copies must be disjoint and in range".into()));
        }
    }

    let mut rng = Rng::derive(cfg.seed, 0x9e1e);
    let mut layout = Vec::with_capacity(cfg.n_reads);
    for i in 0..cfg.n_reads {
        let id = format!("read_{i:05}");
        let fused = cfg.chimera_rate > 0.0 && rng.next_f64() < cfg.chimera_rate;
        if fused {
            let l1 = (CHIMERA_PART_SCALE * rng.range_inclusive(cfg.read_len.0, cfg.read_len.1) as f64)
                .round() as usize;
            let l2 = (CHIMERA_PART_SCALE * rng.range_inclusive(cfg.read_len.0, cfg.read_len.1) as f64)
                .round() as usize;
            let (s1, s2) = loop {
                let s1 = rng.below(g - l1 + 1);
                let s2 = rng.below(g - l2 + 1);
                let gap_ab = s2 as i64 - (s1 + l1) as i64;
                let gap_ba = s1 as i64 - (s2 + l2) as i64;
                if gap_ab.max(gap_ba) >= gap as i64 {
                    break (s1, s2);
                }
            };
            layout.push(SynthRead {
                id,
                parts: vec![
                    ReadPart {
                        genome_start: s1,
                        len: l1,
                        read_offset: 0,
                    },
                    ReadPart {
                        genome_start: s2,
                        len: l2,
                        read_offset: l1,
                    },
                ],
                label: ReadClass::Chimeric,
            });
        } else {
            let len = rng.range_inclusive(cfg.read_len.0, cfg.read_len.1);
            let start = rng.below(g - len + 1);
            let parts = vec![ReadPart {
                genome_start: start,
                len,
                read_offset: 0,
            }];
            let label = label_for(&parts, len, cfg.repeat.as_ref());
            layout.push(SynthRead { id, parts, label });
        }
    }

    let mut reads = ReadTable::new();
    let mut labels = BTreeMap::new();
    for r in &layout {
        reads
            .insert(&r.id, r.total_len())
            .expect("fresh ids cannot conflict");
        labels.insert(r.id.clone(), r.label);
    }

    let mut records = Vec::new();
    for i in 0..layout.len() {
        for j in (i + 1)..layout.len() {
            let (a, b) = (&layout[i], &layout[j]);
            for pa in &a.parts {
                let alias_list = aliases(pa, cfg.repeat.as_ref());
                for pb in &b.parts {
                    let direct = (pb.genome_start, pb.genome_start + pb.len);
                    let shift_b = pb.genome_start as i64 - pb.read_offset as i64;
                    for &(alo, ahi, shift_a) in &alias_list {
                        let Some((lo, hi)) = interval_intersection((alo, ahi), direct) else {
                            continue;
                        };
                        if hi - lo < cfg.min_overlap {
                            continue;
                        }
                        let span = hi - lo;
                        records.push(OverlapRecord {
                            qname: a.id.clone(),
                            qlen: a.total_len(),
                            qstart: (lo as i64 - shift_a) as usize,
                            qend: (hi as i64 - shift_a) as usize,
                            strand: Strand::Forward,
                            tname: b.id.clone(),
                            tlen: b.total_len(),
                            tstart: (lo as i64 - shift_b) as usize,
                            tend: (hi as i64 - shift_b) as usize,
                            nmatch: span,
                            alnlen: span,
                            mapq: 255,
                        });
                    }
                }
            }
        }
    }

    Ok(PipelineOutput {
        reads,
        records,
        labels,
        layout,
    })
}
