//! A minimal reverse-mode differentiation engine: just the layer set the
//! classifiers need, in double precision, fully deterministic given a seed.

pub mod conv;
pub mod gemm;
pub mod gradcheck;
pub mod optim;
pub mod params;
pub mod tape;
pub mod tensor;

pub use optim::{adam_step, AdamConfig, AdamState};
pub use params::{Param, ParameterSet};
pub use tape::{Grads, Mode, Tape, Var};
pub use tensor::Tensor;
