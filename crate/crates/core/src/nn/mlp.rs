use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use super::MinMaxStats;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
}

impl Activation {
    fn apply(self, z: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Linear => z.clone(),
            Activation::Relu => z.mapv(|x| x.max(0.0)),
        }
    }

    /// Multiply `delta` by the activation derivative at `z` in place.
    fn gate(self, delta: &mut Array2<f64>, z: &Array2<f64>) {
        if self == Activation::Relu {
            delta.zip_mut_with(z, |d, &x| {
                if x <= 0.0 {
                    *d = 0.0
                }
            });
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Activation::Linear),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }
}

/// Fully connected network with ReLU hidden layers.
///
/// `weights[l]` is `layer_dims[l+1] × layer_dims[l]`. The normalization
/// statistics travel with the model so [`predict`](super::predict) can map
/// raw snapshots in and out.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub output_activation: Activation,
    pub norm_in: MinMaxStats,
    pub norm_out: MinMaxStats,
}

/// Parameter-shaped container, used for gradients and Adam moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &Mlp) -> Self {
        Gradients {
            weights: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            biases: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|x| x.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|x| x.is_finite()))
    }
}

/// Per-layer activations from a batched forward pass (samples are columns).
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Pre-activations `z_l = W_l a_{l−1} + b_l`.
    pub pre: Vec<Array2<f64>>,
    /// Post-activations; `post[0]` is the input, the last entry the output.
    pub post: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.post.last().expect("cache always holds the input")
    }
}

impl Mlp {
    /// Random network with He-uniform weights and zero biases.
    pub fn new<R: Rng + ?Sized>(layer_dims: &[usize], output_activation: Activation, rng: &mut R) -> Result<Self> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return Err(Error::domain(format!("invalid layer dimensions {layer_dims:?}")));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layer_dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            weights.push(Array2::from_shape_simple_fn((fan_out, fan_in), || {
                rng.random_range(-bound..bound)
            }));
            biases.push(Array1::zeros(fan_out));
        }
        Ok(Mlp {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
            output_activation,
            norm_in: MinMaxStats::identity(layer_dims[0]),
            norm_out: MinMaxStats::identity(*layer_dims.last().unwrap()),
        })
    }

    /// Emulator layout for `low` and `high` virtual element counts:
    /// `[2L, 2L, 2L, 2H, 2H]`.
    pub fn emulator<R: Rng + ?Sized>(
        low: usize,
        high: usize,
        output_activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        Self::new(&[2 * low, 2 * low, 2 * low, 2 * high, 2 * high], output_activation, rng)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Structural checks: dimension chain, finite parameters, sane statistics.
    pub fn validate(&self) -> Result<()> {
        let n = self.layer_dims.len();
        if n < 2 || self.weights.len() != n - 1 || self.biases.len() != n - 1 {
            return Err(Error::dim("layer count does not match parameter lists"));
        }
        for l in 0..n - 1 {
            if self.weights[l].dim() != (self.layer_dims[l + 1], self.layer_dims[l])
                || self.biases[l].len() != self.layer_dims[l + 1]
            {
                return Err(Error::dim(format!("layer {l} parameters do not match dims")));
            }
        }
        let params = Gradients {
            weights: self.weights.clone(),
            biases: self.biases.clone(),
        };
        if !params.is_finite() {
            return Err(Error::domain("model has non-finite parameters"));
        }
        if self.norm_in.len() != self.input_dim() || self.norm_out.len() != self.output_dim() {
            return Err(Error::dim("normalization statistics do not match layer dims"));
        }
        self.norm_in.validate()?;
        self.norm_out.validate()
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.weights.len() {
            self.output_activation
        } else {
            Activation::Relu
        }
    }

    /// Forward pass on a batch of columns (normalized space).
    pub fn forward_batch(&self, input: ArrayView2<'_, f64>) -> Result<ForwardCache> {
        if input.nrows() != self.input_dim() {
            return Err(Error::dim(format!(
                "input has {} features, network expects {}",
                input.nrows(),
                self.input_dim()
            )));
        }
        let mut pre = Vec::with_capacity(self.weights.len());
        let mut post = Vec::with_capacity(self.weights.len() + 1);
        post.push(input.to_owned());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w.dot(post.last().unwrap());
            z += &b.view().insert_axis(Axis(1));
            post.push(self.activation(l).apply(&z));
            pre.push(z);
        }
        Ok(ForwardCache { pre, post })
    }

    /// Forward pass for one sample.
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        let x = ArrayView2::from_shape((input.len(), 1), input).map_err(|e| Error::dim(e.to_string()))?;
        let cache = self.forward_batch(x)?;
        Ok((cache.output().column(0).to_vec(), cache))
    }

    /// Gradients of the batch loss `(1/B) Σ_b (1/(2D)) ‖o_b − t_b‖²`, `D` the
    /// output width, together with the batch mean squared error.
    pub fn backward_batch(&self, input: ArrayView2<'_, f64>, target: ArrayView2<'_, f64>) -> Result<(Gradients, f64)> {
        let cache = self.forward_batch(input)?;
        let out = cache.output();
        if target.dim() != out.dim() {
            return Err(Error::dim(format!(
                "target is {:?}, network output is {:?}",
                target.dim(),
                out.dim()
            )));
        }
        let (d, b) = out.dim();
        let mut delta = out - &target;
        let mse = delta.iter().map(|e| e * e).sum::<f64>() / (d * b) as f64;
        delta.mapv_inplace(|e| e / (d * b) as f64);

        let layers = self.weights.len();
        let mut grads = Gradients::zeros_like(self);
        for l in (0..layers).rev() {
            self.activation(l).gate(&mut delta, &cache.pre[l]);
            grads.weights[l] = delta.dot(&cache.post[l].t());
            grads.biases[l] = delta.sum_axis(Axis(1));
            if l > 0 {
                delta = self.weights[l].t().dot(&delta);
            }
        }
        Ok((grads, mse))
    }

    /// Single-sample gradients, same loss convention with `B = 1`.
    pub fn backward(&self, input: &[f64], target: &[f64]) -> Result<Gradients> {
        let x = ArrayView2::from_shape((input.len(), 1), input).map_err(|e| Error::dim(e.to_string()))?;
        let t = ArrayView2::from_shape((target.len(), 1), target).map_err(|e| Error::dim(e.to_string()))?;
        Ok(self.backward_batch(x, t)?.0)
    }

    /// Mean squared error over a batch without computing gradients.
    pub fn mse(&self, input: ArrayView2<'_, f64>, target: ArrayView2<'_, f64>) -> Result<f64> {
        let cache = self.forward_batch(input)?;
        let out = cache.output();
        if target.dim() != out.dim() {
            return Err(Error::dim("target shape does not match output"));
        }
        Ok(out
            .iter()
            .zip(target.iter())
            .map(|(o, t)| (o - t) * (o - t))
            .sum::<f64>()
            / out.len() as f64)
    }
}
