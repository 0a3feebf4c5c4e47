//! Minimal feedforward networks, synthetic data and input perturbation.
//!
//! A [`NetworkSpec`] is a chain of dense layers. With [`OutputRule::Argmax`]
//! the final layer is a readout: its values pick the predicted class and it is
//! not traced. Every other layer is "hidden", and the concatenation of hidden
//! activations is the neuron set whose correlations the rest of the crate
//! studies.

mod data;
mod io;
mod theorem;
mod train;

pub use data::{
    overlay_trigger, perturb_pixelwise, sample_gaussian_pair, GaussianPairConfig, MixtureKind,
    PerturbConfig, TriggerSpec,
};
pub use io::{read_dataset, read_network, write_dataset, write_network, NETWORK_FORMAT_VERSION};
pub use theorem::{build_theorem_networks, gaussian_pair_means};
pub use train::{train_classifier, TrainConfig};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A labelled input point.
pub type Sample = (Vec<f64>, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    /// `1` when the pre-activation is `>= 0`, else `0`.
    Indicator,
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Indicator => {
                if z >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Indicator => "indicator",
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "indicator" => Ok(Activation::Indicator),
            "relu" => Ok(Activation::Relu),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::InvalidNetwork(format!("unknown activation `{other}`"))),
        }
    }
}

/// How the final layer turns into a class prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputRule {
    /// The last layer is a readout (not traced); prediction is the index of
    /// its largest value, lowest index on ties.
    Argmax,
    /// No readout: every layer is traced and the prediction is the argmax of
    /// the last layer's activations.
    Identity,
}

impl fmt::Display for OutputRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputRule::Argmax => "argmax",
            OutputRule::Identity => "identity",
        })
    }
}

impl FromStr for OutputRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "argmax" => Ok(OutputRule::Argmax),
            "identity" => Ok(OutputRule::Identity),
            other => Err(Error::InvalidNetwork(format!("unknown output rule `{other}`"))),
        }
    }
}

/// One dense layer, `activation(W x + b)` with `W` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation,
}

impl Layer {
    pub fn new(
        rows: usize,
        cols: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidNetwork("layer with zero width".into()));
        }
        if weights.len() != rows * cols || bias.len() != rows {
            return Err(Error::InvalidNetwork(format!(
                "layer {rows}x{cols} given {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::InvalidNetwork("non-finite weight or bias".into()));
        }
        Ok(Self {
            rows,
            cols,
            weights,
            bias,
            activation,
        })
    }

    /// Builds a layer from nested rows, convenient for hand-written matrices.
    pub fn from_rows(rows: &[Vec<f64>], bias: Vec<f64>, activation: Activation) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidNetwork("ragged weight rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat(), bias, activation)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    fn forward_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, b) in self.weights.chunks_exact(self.cols).zip(&self.bias) {
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b;
            out.push(self.activation.apply(z));
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    layers: Vec<Layer>,
    output_rule: OutputRule,
}

impl NetworkSpec {
    pub fn new(layers: Vec<Layer>, output_rule: OutputRule) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidNetwork("network has no layers".into()));
        }
        if output_rule == OutputRule::Argmax && layers.len() < 2 {
            return Err(Error::InvalidNetwork(
                "argmax readout needs at least one hidden layer".into(),
            ));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[1].cols != pair[0].rows {
                return Err(Error::DimensionMismatch {
                    layer: k + 1,
                    expected: pair[0].rows,
                    found: pair[1].cols,
                });
            }
        }
        Ok(Self {
            layers,
            output_rule,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn output_rule(&self) -> OutputRule {
        self.output_rule
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    /// Layers whose activations are traced.
    pub fn hidden_layers(&self) -> &[Layer] {
        match self.output_rule {
            OutputRule::Argmax => &self.layers[..self.layers.len() - 1],
            OutputRule::Identity => &self.layers,
        }
    }

    pub fn hidden_count(&self) -> usize {
        self.hidden_layers().iter().map(Layer::rows).sum()
    }

    /// Hidden-layer index of every traced neuron, in activation order.
    pub fn hidden_layer_of(&self) -> Vec<usize> {
        self.hidden_layers()
            .iter()
            .enumerate()
            .flat_map(|(k, l)| std::iter::repeat_n(k, l.rows))
            .collect()
    }

    /// Evaluates the network on `x`, returning the concatenated hidden
    /// activations and the predicted class.
    pub fn eval(&self, x: &[f64]) -> Result<(Vec<f64>, usize)> {
        let mut activations = Vec::with_capacity(self.hidden_count());
        let prediction = self.eval_into(x, &mut activations)?;
        Ok((activations, prediction))
    }

    /// Like [`eval`](Self::eval) but appends activations to `out`.
    pub fn eval_into(&self, x: &[f64], out: &mut Vec<f64>) -> Result<usize> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                layer: 0,
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let hidden = self.hidden_layers().len();
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            layer.forward_into(&cur, &mut next);
            if k < hidden {
                out.extend_from_slice(&next);
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(argmax(&cur))
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let mut scratch = Vec::new();
        self.eval_into(x, &mut scratch)
    }
}

/// Evaluates `net` on `x`: hidden activations in layer order and the class.
pub fn eval_network(net: &NetworkSpec, x: &[f64]) -> Result<(Vec<f64>, usize)> {
    net.eval(x)
}

/// Fraction of `data` that `net` misclassifies.
pub fn empirical_risk(net: &NetworkSpec, data: &[Sample]) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let mut wrong = 0usize;
    for (x, y) in data {
        if net.predict(x)? != *y {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / data.len() as f64)
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
