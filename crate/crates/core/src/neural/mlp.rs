use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output.
    #[inline]
    fn derivative(self, out: f64) -> f64 {
        match self {
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - out * out,
            Activation::Identity => 1.0,
        }
    }
}

/// Affine map followed by an elementwise activation. Weights are stored
/// `out × in`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    weights: Vec<f64>,
    biases: Vec<f64>,
    activation: Activation,
    inputs: usize,
    outputs: usize,
}

impl DenseLayer {
    pub fn new(
        inputs: usize,
        outputs: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::invalid("layer dimensions must be positive"));
        }
        if weights.len() != inputs * outputs {
            return Err(Error::DimensionMismatch {
                expected: inputs * outputs,
                actual: weights.len(),
            });
        }
        if biases.len() != outputs {
            return Err(Error::DimensionMismatch {
                expected: outputs,
                actual: biases.len(),
            });
        }
        Ok(Self {
            weights,
            biases,
            activation,
            inputs,
            outputs,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.inputs
    }

    pub fn output_dim(&self) -> usize {
        self.outputs
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

/// Per-layer activations recorded by a forward pass, consumed by `backward`.
#[derive(Clone, Debug)]
pub struct Cache {
    rows: usize,
    /// `activations[0]` is the input batch, `activations[i + 1]` the output of layer `i`.
    activations: Vec<Vec<f64>>,
}

impl Cache {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("cache holds the input at least")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// Parameter gradients, shape-congruent with the network that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(f64::is_finite)
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|g| *g *= factor);
            l.biases.iter_mut().for_each(|g| *g *= factor);
        }
    }

    /// Flattened view in the same order as [`Mlp::parameters`].
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied())
    }

    pub fn matches(&self, net: &Mlp) -> bool {
        self.layers.len() == net.layers.len()
            && self
                .layers
                .iter()
                .zip(&net.layers)
                .all(|(g, l)| g.weights.len() == l.weights.len() && g.biases.len() == l.biases.len())
    }
}

impl Mlp {
    /// Builds a network with layer sizes `dims` (input first). Hidden layers
    /// draw weights and biases uniformly from ±1/√fan_in, the final layer
    /// from ±3e-3.
    pub fn init<R: Rng + ?Sized>(dims: &[usize], activations: &[Activation], rng: &mut R) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::invalid("network needs at least one layer"));
        }
        if activations.len() != dims.len() - 1 {
            return Err(Error::DimensionMismatch {
                expected: dims.len() - 1,
                actual: activations.len(),
            });
        }
        if dims.contains(&0) {
            return Err(Error::invalid("layer sizes must be positive"));
        }
        let last = dims.len() - 2;
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (i, (pair, &act)) in dims.windows(2).zip(activations).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = if i == last { 3e-3 } else { 1.0 / (fan_in as f64).sqrt() };
            let weights = (0..fan_in * fan_out).map(|_| rng.random_range(-bound..bound)).collect();
            let biases = (0..fan_out).map(|_| rng.random_range(-bound..bound)).collect();
            layers.push(DenseLayer::new(fan_in, fan_out, weights, biases, act)?);
        }
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("network needs at least one layer"));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::DimensionMismatch {
                    expected: pair[0].outputs,
                    actual: pair[1].inputs,
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    /// Layer sizes, input first.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    /// Flattened parameters: per layer, weights then biases.
    pub fn parameters(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied())
    }

    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn is_finite(&self) -> bool {
        self.parameters().all(f64::is_finite)
    }

    pub fn same_shape(&self, other: &Mlp) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.inputs == b.inputs && a.outputs == b.outputs)
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, Cache)> {
        self.forward_batch(input, 1)
    }

    /// Forward pass over `rows` samples stored row-major in `inputs`.
    pub fn forward_batch(&self, inputs: &[f64], rows: usize) -> Result<(Vec<f64>, Cache)> {
        let expected = rows * self.input_dim();
        if rows == 0 || inputs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: inputs.len(),
            });
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(inputs.to_vec());
        for layer in &self.layers {
            let next = layer_forward(layer, activations.last().unwrap(), rows);
            activations.push(next);
        }
        let output = activations.last().unwrap().clone();
        Ok((output, Cache { rows, activations }))
    }

    /// Forward pass without recording a cache.
    pub fn predict_batch(&self, inputs: &[f64], rows: usize) -> Result<Vec<f64>> {
        let expected = rows * self.input_dim();
        if rows == 0 || inputs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: inputs.len(),
            });
        }
        let mut current = layer_forward(&self.layers[0], inputs, rows);
        for layer in &self.layers[1..] {
            current = layer_forward(layer, &current, rows);
        }
        Ok(current)
    }

    /// Reverse pass: gradients of `Σ output · output_grad` (summed over the
    /// batch) with respect to every parameter and to the input batch.
    pub fn backward(&self, cache: &Cache, output_grad: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        self.reverse(cache, output_grad, None, true)
            .map(|(g, dx)| (g.expect("parameter gradients requested"), dx))
    }

    /// Like [`Mlp::backward`] with `preact_grad` added to the gradient of the
    /// output layer's pre-activation, which stays informative where the
    /// output activation saturates.
    pub fn backward_with_preactivation(
        &self,
        cache: &Cache,
        output_grad: &[f64],
        preact_grad: &[f64],
    ) -> Result<(Gradients, Vec<f64>)> {
        if preact_grad.len() != output_grad.len() {
            return Err(Error::DimensionMismatch {
                expected: output_grad.len(),
                actual: preact_grad.len(),
            });
        }
        self.reverse(cache, output_grad, Some(preact_grad), true)
            .map(|(g, dx)| (g.expect("parameter gradients requested"), dx))
    }

    /// Like [`Mlp::backward`] but only propagates to the input.
    pub fn input_gradient(&self, cache: &Cache, output_grad: &[f64]) -> Result<Vec<f64>> {
        self.reverse(cache, output_grad, None, false).map(|(_, dx)| dx)
    }

    /// Output layer pre-activation for the batch recorded in `cache`.
    pub fn output_preactivation(&self, cache: &Cache) -> Result<Vec<f64>> {
        let last = self.layers.last().expect("network has layers");
        let n = self.layers.len();
        let input = cache
            .activations
            .get(n - 1)
            .filter(|a| cache.activations.len() == n + 1 && a.len() == cache.rows * last.inputs)
            .ok_or_else(|| Error::invalid("cache does not belong to this network"))?;
        Ok(layer_affine(last, input, cache.rows))
    }

    fn reverse(
        &self,
        cache: &Cache,
        output_grad: &[f64],
        preact_grad: Option<&[f64]>,
        with_params: bool,
    ) -> Result<(Option<Gradients>, Vec<f64>)> {
        if cache.activations.len() != self.layers.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.layers.len() + 1,
                actual: cache.activations.len(),
            });
        }
        for (layer, act) in self.layers.iter().zip(&cache.activations[1..]) {
            if act.len() != cache.rows * layer.outputs {
                return Err(Error::invalid("cache does not belong to this network"));
            }
        }
        if cache.activations[0].len() != cache.rows * self.input_dim() {
            return Err(Error::invalid("cache does not belong to this network"));
        }
        let rows = cache.rows;
        let expected = rows * self.output_dim();
        if output_grad.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: output_grad.len(),
            });
        }

        let mut grads = with_params.then(|| Gradients::zeros_like(self));
        let mut upstream = output_grad.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let out = &cache.activations[i + 1];
            let input = &cache.activations[i];
            // dZ = dA ∘ f'(A)
            for (g, &a) in upstream.iter_mut().zip(out) {
                *g *= layer.activation.derivative(a);
            }
            if let Some(extra) = preact_grad.filter(|_| i + 1 == self.layers.len()) {
                for (g, e) in upstream.iter_mut().zip(extra) {
                    *g += e;
                }
            }
            let dz = upstream;
            if let Some(grads) = grads.as_mut() {
                let lg = &mut grads.layers[i];
                // dW (out×in) = dZᵀ (out×rows) · X (rows×in)
                gemm(
                    layer.outputs,
                    rows,
                    layer.inputs,
                    &dz,
                    (1, layer.outputs as isize),
                    input,
                    (layer.inputs as isize, 1),
                    &mut lg.weights,
                    0.0,
                );
                for row in dz.chunks_exact(layer.outputs) {
                    for (b, &g) in lg.biases.iter_mut().zip(row) {
                        *b += g;
                    }
                }
            }
            // dX (rows×in) = dZ (rows×out) · W (out×in)
            let mut dx = vec![0.0; rows * layer.inputs];
            gemm(
                rows,
                layer.outputs,
                layer.inputs,
                &dz,
                (layer.outputs as isize, 1),
                &layer.weights,
                (layer.inputs as isize, 1),
                &mut dx,
                0.0,
            );
            upstream = dx;
        }
        Ok((grads, upstream))
    }
}

fn layer_forward(layer: &DenseLayer, input: &[f64], rows: usize) -> Vec<f64> {
    let mut out = layer_affine(layer, input, rows);
    let act = layer.activation;
    if act != Activation::Identity {
        out.iter_mut().for_each(|z| *z = act.apply(*z));
    }
    out
}

fn layer_affine(layer: &DenseLayer, input: &[f64], rows: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * layer.outputs);
    for _ in 0..rows {
        out.extend_from_slice(&layer.biases);
    }
    // Z (rows×out) = X (rows×in) · Wᵀ (in×out) + b
    gemm(
        rows,
        layer.inputs,
        layer.outputs,
        input,
        (layer.inputs as isize, 1),
        &layer.weights,
        (1, layer.inputs as isize),
        &mut out,
        1.0,
    );
    out
}

/// `C (m×n) = A (m×k) · B (k×n) + beta·C` with `C` row-major and `A`, `B`
/// addressed through (row, column) strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_strides: (isize, isize),
    b: &[f64],
    b_strides: (isize, isize),
    c: &mut [f64],
    beta: f64,
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() == m * n);
    // SAFETY: the asserts above bound every index the strides can reach,
    // since each operand is a dense m×k / k×n / m×n block in some order.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            a_strides.0,
            a_strides.1,
            b.as_ptr(),
            b_strides.0,
            b_strides.1,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
