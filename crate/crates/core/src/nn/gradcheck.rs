//! Central finite-difference gradient checking.
//!
//! The checker perturbs individual parameter coordinates and compares the
//! symmetric difference quotient of the loss against the gradient from the
//! reverse pass. It is deliberately independent of the tape internals: it
//! only needs a closure that evaluates the loss for a parameter set.

use super::params::ParameterSet;
use crate::rng::Rng;

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-4;

#[derive(Debug)]
pub struct GradCheckFailure {
    pub name: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

impl std::fmt::Display for GradCheckFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}[{}]: analytic {:.6e} vs numeric {:.6e} (rel {:.3e})",
            self.name, self.index, self.analytic, self.numeric, self.rel_error
        )
    }
}

fn rel_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(1e-4);
    (a - b).abs() / scale
}

/// Check `probes` random coordinates of every trainable parameter.
///
/// `loss_fn` must be a deterministic function of the parameter values (fix
/// any sampling noise before calling). `grad_fn` fills `grad` on the set.
pub fn check_gradients(
    params: &mut ParameterSet,
    probes_per_param: usize,
    rng: &mut Rng,
    mut loss_fn: impl FnMut(&ParameterSet) -> f64,
    mut grad_fn: impl FnMut(&mut ParameterSet),
) -> Result<usize, GradCheckFailure> {
    params.zero_grads();
    grad_fn(params);
    let analytic: Vec<(String, Vec<f64>)> = params
        .iter()
        .filter(|(_, p)| p.trainable)
        .map(|(name, p)| (name.to_string(), p.grad.data().to_vec()))
        .collect();

    let mut checked = 0;
    for (name, grad) in &analytic {
        let len = grad.len();
        let probes: Vec<usize> = if len <= probes_per_param {
            (0..len).collect()
        } else {
            (0..probes_per_param).map(|_| rng.below(len)).collect()
        };
        for idx in probes {
            let original = params.get(name).value.data()[idx];
            params.get_mut(name).value.data_mut()[idx] = original + FD_STEP;
            let plus = loss_fn(params);
            params.get_mut(name).value.data_mut()[idx] = original - FD_STEP;
            let minus = loss_fn(params);
            params.get_mut(name).value.data_mut()[idx] = original;
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            let err = rel_error(grad[idx], numeric);
            if err >= FD_TOLERANCE {
                return Err(GradCheckFailure {
                    name: name.clone(),
                    index: idx,
                    analytic: grad[idx],
                    numeric,
                    rel_error: err,
                });
            }
            checked += 1;
        }
    }
    Ok(checked)
}
