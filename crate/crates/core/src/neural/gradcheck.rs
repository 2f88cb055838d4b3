use super::Mlp;
use crate::{Error, Result};

/// Denominator floor for relative errors, so gradients that are zero up to
/// rounding compare by absolute difference.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

/// Worst disagreement between analytic and central-difference gradients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheck {
    pub checked: usize,
    pub max_rel_error: f64,
    /// Flat index of the worst entry.
    pub worst_index: usize,
}

/// |a − n| / max(|a|, |n|, [`REL_ERROR_FLOOR`]).
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

fn objective(net: &Mlp, inputs: &[f64], rows: usize, weights: &[f64]) -> Result<f64> {
    let out = net.predict_batch(inputs, rows)?;
    Ok(out.iter().zip(weights).map(|(o, w)| o * w).sum())
}

fn fold(pairs: impl Iterator<Item = (usize, f64, f64)>) -> GradCheck {
    let mut report = GradCheck {
        checked: 0,
        max_rel_error: 0.0,
        worst_index: 0,
    };
    for (i, a, n) in pairs {
        let e = relative_error(a, n);
        report.checked += 1;
        if e > report.max_rel_error || report.checked == 1 {
            report.max_rel_error = e;
            report.worst_index = i;
        }
    }
    report
}

fn check_shapes(net: &Mlp, inputs: &[f64], rows: usize, weights: &[f64], step: f64) -> Result<()> {
    if !(step > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    if weights.len() != rows * net.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: rows * net.output_dim(),
            actual: weights.len(),
        });
    }
    if inputs.len() != rows * net.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: rows * net.input_dim(),
            actual: inputs.len(),
        });
    }
    Ok(())
}

/// Compares backpropagated parameter gradients of Σ weights·output with
/// central differences of step `step`. `indices` selects flat parameter
/// positions; `None` checks every parameter.
pub fn check_parameter_gradients(
    net: &Mlp,
    inputs: &[f64],
    rows: usize,
    weights: &[f64],
    step: f64,
    indices: Option<&[usize]>,
) -> Result<GradCheck> {
    check_shapes(net, inputs, rows, weights, step)?;
    let (_, cache) = net.forward_batch(inputs, rows)?;
    let (grads, _) = net.backward(&cache, weights)?;
    let analytic: Vec<f64> = grads.values().collect();
    let all: Vec<usize>;
    let indices = match indices {
        Some(ix) => ix,
        None => {
            all = (0..analytic.len()).collect();
            &all
        }
    };
    let mut probe = net.clone();
    let mut pairs = Vec::with_capacity(indices.len());
    for &i in indices {
        let p = probe
            .parameters_mut()
            .nth(i)
            .ok_or_else(|| Error::invalid(format!("parameter index {i} out of range")))?;
        let original = *p;
        *p = original + step;
        let plus = objective(&probe, inputs, rows, weights)?;
        *probe.parameters_mut().nth(i).expect("index checked") = original - step;
        let minus = objective(&probe, inputs, rows, weights)?;
        *probe.parameters_mut().nth(i).expect("index checked") = original;
        pairs.push((i, analytic[i], (plus - minus) / (2.0 * step)));
    }
    Ok(fold(pairs.into_iter()))
}

/// Same comparison for the gradient with respect to the inputs.
pub fn check_input_gradient(net: &Mlp, inputs: &[f64], rows: usize, weights: &[f64], step: f64) -> Result<GradCheck> {
    check_shapes(net, inputs, rows, weights, step)?;
    let (_, cache) = net.forward_batch(inputs, rows)?;
    let analytic = net.input_gradient(&cache, weights)?;
    let mut x = inputs.to_vec();
    let mut pairs = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let original = x[i];
        x[i] = original + step;
        let plus = objective(net, &x, rows, weights)?;
        x[i] = original - step;
        let minus = objective(net, &x, rows, weights)?;
        x[i] = original;
        pairs.push((i, analytic[i], (plus - minus) / (2.0 * step)));
    }
    Ok(fold(pairs.into_iter()))
}
