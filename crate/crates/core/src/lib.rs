//! Classification of long sequencing reads from their coverage graphs, and
//! the filtering of read/overlap sets it enables.
//!
//! The pipeline: PAF overlaps -> per-read coverage graphs -> fixed-length
//! normalized signals -> classifiers (a supervised convolutional baseline
//! and two semi-supervised models) -> per-read class labels -> filtered
//! overlap sets plus assembly statistics.

pub mod class;
pub mod coverage;
pub mod checkpoint;
pub mod eval;
pub mod heuristic;
pub mod nn;
pub mod models;
pub mod overlap;
pub mod rng;
pub mod signal;
pub mod filter;
pub mod svg;
pub mod synth;
pub mod tsne;
pub mod train;

pub use class::{ReadClass, NUM_CLASSES};
pub use signal::Signal;
