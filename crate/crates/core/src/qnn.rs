// SPDX-License-Identifier: Apache-2.0

//! Layered feedforward network of basis neurons.
//!
//! The quantum forward pass simulates every neuron's phase-estimation
//! circuit, reads the most probable register code and hands the decoded
//! activation of one layer to the next as a basis-encoded sample. Training is
//! classical: full-batch gradient descent with gradients taken through the
//! smooth activation.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activations::Activation;
use crate::error::{Error, Result};
use crate::exec::map_slice;
use crate::fixedpoint::{encode_features, FixedPointFormat, Rounding};
use crate::neuron::{basis_register_mode, BasisNeuronConfig};
use crate::Execution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForwardMode {
    #[default]
    Quantum,
    Surrogate,
}

impl fmt::Display for ForwardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ForwardMode::Quantum => "quantum",
            ForwardMode::Surrogate => "surrogate",
        })
    }
}

impl FromStr for ForwardMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum" => Ok(ForwardMode::Quantum),
            "surrogate" | "classical" | "classical_surrogate" => Ok(ForwardMode::Surrogate),
            other => Err(Error::Config(format!("unknown forward mode {other:?}"))),
        }
    }
}

/// `weights[l][j][i]`: weight from input `i` of layer `l` into neuron `j`.
pub type Weights = Vec<Vec<Vec<f64>>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QFNNConfig {
    pub layer_sizes: Vec<usize>,
    pub weights: Weights,
    pub m: u32,
    pub fb: u32,
    pub activation: Activation,
    /// Format of the network inputs.
    pub input_format: FixedPointFormat,
}

impl QFNNConfig {
    /// Network with every weight zero.
    pub fn zeros(layer_sizes: Vec<usize>, m: u32, fb: u32, activation: Activation) -> Result<Self> {
        let weights = layer_sizes
            .windows(2)
            .map(|w| vec![vec![0.0; w[0]]; w[1]])
            .collect();
        let net = Self {
            layer_sizes,
            weights,
            m,
            fb,
            activation,
            input_format: FixedPointFormat::unsigned(1, 0)?,
        };
        net.validate()?;
        Ok(net)
    }

    /// The 2-2-1 sigmoid network with `m = 10`, `fb = 4`. The register
    /// holds pre-activations in `[-32, 32)`, enough for the weights the
    /// default training run reaches.
    pub fn xor_default() -> Self {
        Self::zeros(vec![2, 2, 1], 10, 4, Activation::Sigmoid).expect("static shape")
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 || self.layer_sizes.contains(&0) {
            return Err(Error::Config(format!(
                "layer sizes {:?} need at least two non-empty layers",
                self.layer_sizes
            )));
        }
        if self.weights.len() != self.layer_sizes.len() - 1 {
            return Err(Error::Config(
                "one weight matrix per layer transition expected".into(),
            ));
        }
        for (l, layer) in self.weights.iter().enumerate() {
            let (fan_in, fan_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            if layer.len() != fan_out || layer.iter().any(|row| row.len() != fan_in) {
                return Err(Error::Config(format!(
                    "weights of layer {} must be {fan_out}x{fan_in}",
                    l + 1
                )));
            }
            if layer.iter().flatten().any(|w| !w.is_finite()) {
                return Err(Error::Config(format!(
                    "non-finite weight in layer {}",
                    l + 1
                )));
            }
        }
        FixedPointFormat::register(self.m, self.fb)?;
        Ok(())
    }

    /// Format of every neuron's register and activation output; hidden
    /// activations are handed to the next layer in this format.
    pub fn register_format(&self) -> FixedPointFormat {
        FixedPointFormat::register(self.m, self.fb).expect("validated")
    }

    pub fn num_weights(&self) -> usize {
        self.weights.iter().flatten().map(Vec::len).sum()
    }

    pub fn flat_weights(&self) -> Vec<f64> {
        self.weights.iter().flatten().flatten().copied().collect()
    }

    pub fn set_flat_weights(&mut self, flat: &[f64]) {
        let mut it = flat.iter();
        for w in self.weights.iter_mut().flatten().flatten() {
            *w = *it.next().expect("flat weight count");
        }
    }

    /// Uniform initialisation in `[-scale, scale]`.
    pub fn init_uniform(&mut self, scale: f64, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in self.weights.iter_mut().flatten().flatten() {
            *w = if scale > 0.0 {
                rng.random_range(-scale..=scale)
            } else {
                0.0
            };
        }
    }

    /// Format in which hidden activations are handed to the next layer:
    /// `fb` fraction bits, and only as many integer bits as the activation's
    /// range needs.
    pub fn handoff_format(&self) -> FixedPointFormat {
        let reg = self.register_format();
        match self.activation {
            Activation::Sigmoid => FixedPointFormat::unsigned(1, self.fb),
            Activation::Relu => FixedPointFormat::unsigned(reg.int_bits, self.fb),
            Activation::Tanh | Activation::Gelu => Ok(reg),
        }
        .expect("register widths are validated")
    }

    fn neuron_format(&self, layer: usize) -> FixedPointFormat {
        if layer == 0 {
            self.input_format
        } else {
            self.handoff_format()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardOutput {
    pub z: f64,
    /// Decoded pre-activations per layer (excluding the input layer).
    pub pre_activations: Vec<Vec<f64>>,
    /// Activations per layer, the input layer first.
    pub activations: Vec<Vec<f64>>,
}

pub fn forward(net: &QFNNConfig, x: &[f64], mode: ForwardMode) -> Result<ForwardOutput> {
    if x.len() != net.layer_sizes[0] {
        return Err(Error::LengthMismatch {
            expected: net.layer_sizes[0],
            found: x.len(),
        });
    }
    match mode {
        ForwardMode::Surrogate => Ok(forward_surrogate(net, x)),
        ForwardMode::Quantum => forward_quantum(net, x),
    }
}

fn forward_surrogate(net: &QFNNConfig, x: &[f64]) -> ForwardOutput {
    let mut activations = vec![x.to_vec()];
    let mut pre_activations = Vec::new();
    for layer in &net.weights {
        let input = activations.last().expect("input layer");
        let pre: Vec<f64> = layer
            .iter()
            .map(|row| row.iter().zip(input).map(|(w, a)| w * a).sum())
            .collect();
        activations.push(pre.iter().map(|&t| net.activation.eval(t)).collect());
        pre_activations.push(pre);
    }
    ForwardOutput {
        z: activations.last().expect("output layer")[0],
        pre_activations,
        activations,
    }
}

fn forward_quantum(net: &QFNNConfig, x: &[f64]) -> Result<ForwardOutput> {
    let mut activations = vec![x.to_vec()];
    let mut pre_activations = Vec::new();
    for (l, layer) in net.weights.iter().enumerate() {
        let fmt = net.neuron_format(l);
        let sample = encode_features(
            activations.last().expect("input layer"),
            fmt,
            Rounding::NearestEven,
        )?;
        let mut pre = Vec::with_capacity(layer.len());
        let mut act = Vec::with_capacity(layer.len());
        for (j, row) in layer.iter().enumerate() {
            let cfg = BasisNeuronConfig::with_activation(
                row.clone(),
                fmt,
                net.m,
                net.fb,
                net.activation,
            )?;
            let code = basis_register_mode(&cfg, &sample).map_err(|e| match e {
                Error::RegisterOverflow {
                    value, min, max, ..
                } => Error::RegisterOverflow {
                    layer: l + 1,
                    neuron: j + 1,
                    value,
                    min,
                    max,
                },
                other => other,
            })?;
            pre.push(cfg.register_format().decode(code));
            act.push(cfg.output_format.decode(cfg.activation.eval(code)));
        }
        pre_activations.push(pre);
        activations.push(act);
    }
    Ok(ForwardOutput {
        z: activations.last().expect("output layer")[0],
        pre_activations,
        activations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<(Vec<f64>, f64)>,
}

impl Dataset {
    pub fn xor() -> Self {
        Self {
            samples: vec![
                (vec![0.0, 0.0], 0.0),
                (vec![0.0, 1.0], 1.0),
                (vec![1.0, 0.0], 1.0),
                (vec![1.0, 1.0], 0.0),
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Mean squared error over `data`.
pub fn loss(net: &QFNNConfig, data: &Dataset, mode: ForwardMode, exec: Execution) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Config("empty dataset".into()));
    }
    let residuals = map_slice(exec, &data.samples, |(x, d)| {
        forward(net, x, mode).map(|out| (d - out.z).powi(2))
    });
    let mut total = 0.0;
    for r in residuals {
        total += r?;
    }
    Ok(total / data.len() as f64)
}

/// Surrogate-mode gradient of the loss with respect to every weight, in the
/// layout of [`QFNNConfig::flat_weights`].
pub fn gradient(net: &QFNNConfig, data: &Dataset, exec: Execution) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::Config("empty dataset".into()));
    }
    let per_sample = map_slice(exec, &data.samples, |(x, d)| sample_gradient(net, x, *d));
    let mut total = vec![0.0; net.num_weights()];
    for g in per_sample {
        for (t, v) in total.iter_mut().zip(g?) {
            *t += v;
        }
    }
    let q = data.len() as f64;
    Ok(total.into_iter().map(|g| g / q).collect())
}

fn sample_gradient(net: &QFNNConfig, x: &[f64], d: f64) -> Result<Vec<f64>> {
    let fwd = forward(net, x, ForwardMode::Surrogate)?;
    let layers = net.weights.len();
    // delta = dL/d(pre-activation), back to front.
    let mut delta: Vec<f64> = vec![
        -2.0 * (d - fwd.z)
            * net
                .activation
                .derivative(fwd.pre_activations[layers - 1][0]),
    ];
    let mut grads: Vec<Vec<Vec<f64>>> = vec![Vec::new(); layers];
    for l in (0..layers).rev() {
        let input = &fwd.activations[l];
        grads[l] = delta
            .iter()
            .map(|dj| input.iter().map(|a| dj * a).collect())
            .collect();
        if l > 0 {
            delta = (0..net.layer_sizes[l])
                .map(|i| {
                    let back: f64 = net.weights[l]
                        .iter()
                        .zip(&delta)
                        .map(|(row, dj)| row[i] * dj)
                        .sum();
                    back * net.activation.derivative(fwd.pre_activations[l - 1][i])
                })
                .collect();
        }
    }
    Ok(grads.into_iter().flatten().flatten().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub eta: f64,
    pub epochs: usize,
    pub seed: u64,
    pub init_scale: f64,
    /// Forward pass used for the recorded curve.
    pub mode: ForwardMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            eta: 4.0,
            epochs: 600,
            seed: 9,
            init_scale: 1.0,
            mode: ForwardMode::Quantum,
        }
    }
}

impl TrainConfig {
    /// Epochs after which the default run's quantum-forward curve no longer
    /// rises.
    pub const DEFAULT_BURN_IN: usize = 320;

    pub fn validate(&self) -> Result<()> {
        if self.eta < 0.0 || !self.eta.is_finite() {
            return Err(Error::Config(format!(
                "step length {} must be finite and >= 0",
                self.eta
            )));
        }
        if self.init_scale < 0.0 || !self.init_scale.is_finite() {
            return Err(Error::Config(format!(
                "init scale {} must be finite and >= 0",
                self.init_scale
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Loss before training and after each epoch.
    pub curve: Vec<f64>,
    pub initial_weights: Weights,
    pub weights: Weights,
    pub final_loss: f64,
    pub config: TrainConfig,
}

impl TrainReport {
    /// CSV with header `epoch,loss`.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("epoch,loss\n");
        for (e, l) in self.curve.iter().enumerate() {
            out.push_str(&format!("{e},{}\n", crate::activations::fmt_sig(*l)));
        }
        out
    }
}

/// Initialises `net` from `cfg.seed` and runs full-batch gradient descent.
pub fn train(
    net: &QFNNConfig,
    data: &Dataset,
    cfg: &TrainConfig,
    exec: Execution,
) -> Result<TrainReport> {
    cfg.validate()?;
    net.validate()?;
    let mut net = net.clone();
    net.init_uniform(cfg.init_scale, cfg.seed);
    let initial_weights = net.weights.clone();
    let initial = loss(&net, data, cfg.mode, exec)?;
    let mut curve = Vec::with_capacity(cfg.epochs + 1);
    curve.push(initial);
    for epoch in 1..=cfg.epochs {
        let grad = gradient(&net, data, exec)?;
        let updated: Vec<f64> = net
            .flat_weights()
            .iter()
            .zip(&grad)
            .map(|(w, g)| w - cfg.eta * g)
            .collect();
        net.set_flat_weights(&updated);
        let l = loss(&net, data, cfg.mode, exec)?;
        if !l.is_finite() || l > 10.0 * initial {
            return Err(Error::Divergence {
                epoch,
                loss: l,
                initial,
            });
        }
        curve.push(l);
    }
    Ok(TrainReport {
        final_loss: *curve.last().expect("initial loss"),
        curve,
        initial_weights,
        weights: net.weights,
        config: *cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_output_half() {
        let net = QFNNConfig::xor_default();
        for mode in [ForwardMode::Quantum, ForwardMode::Surrogate] {
            for (x, _) in Dataset::xor().samples {
                let out = forward(&net, &x, mode).unwrap();
                assert_eq!(out.z, 0.5);
                assert!(out.activations[1].iter().all(|&a| a == 0.5));
            }
            assert_eq!(
                loss(&net, &Dataset::xor(), mode, Execution::default()).unwrap(),
                0.25
            );
        }
    }

    #[test]
    fn perfect_predictor_has_zero_loss() {
        // Sigmoid never reaches 0 or 1; use a dataset matched to the outputs.
        let mut net = QFNNConfig::xor_default();
        net.init_uniform(1.0, 3);
        let data = Dataset {
            samples: Dataset::xor()
                .samples
                .into_iter()
                .map(|(x, _)| {
                    let z = forward(&net, &x, ForwardMode::Surrogate).unwrap().z;
                    (x, z)
                })
                .collect(),
        };
        assert_eq!(
            loss(&net, &data, ForwardMode::Surrogate, Execution::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn empty_dataset_rejected() {
        let net = QFNNConfig::xor_default();
        let empty = Dataset { samples: vec![] };
        assert!(loss(&net, &empty, ForwardMode::Surrogate, Execution::default()).is_err());
    }

    #[test]
    fn shape_validation() {
        let mut net = QFNNConfig::xor_default();
        net.weights[0].pop();
        assert!(net.validate().is_err());
        assert!(QFNNConfig::zeros(vec![2], 8, 4, Activation::Sigmoid).is_err());
        let net = QFNNConfig::xor_default();
        assert!(forward(&net, &[1.0], ForwardMode::Surrogate).is_err());
    }

    #[test]
    fn overflow_reports_position() {
        let mut net = QFNNConfig::xor_default();
        net.weights[0][1] = vec![20.0, 20.0];
        match forward(&net, &[1.0, 1.0], ForwardMode::Quantum) {
            Err(Error::RegisterOverflow { layer, neuron, .. }) => {
                assert_eq!((layer, neuron), (1, 2))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_step_gives_flat_curve() {
        let cfg = TrainConfig {
            eta: 0.0,
            epochs: 5,
            ..TrainConfig::default()
        };
        let r = train(
            &QFNNConfig::xor_default(),
            &Dataset::xor(),
            &cfg,
            Execution::default(),
        )
        .unwrap();
        assert_eq!(r.weights, r.initial_weights);
        assert!(r.curve.iter().all(|&l| l == r.curve[0]));
        assert_eq!(r.curve.len(), 6);
    }

    #[test]
    fn negative_step_rejected() {
        let cfg = TrainConfig {
            eta: -1.0,
            ..TrainConfig::default()
        };
        assert!(train(
            &QFNNConfig::xor_default(),
            &Dataset::xor(),
            &cfg,
            Execution::default()
        )
        .is_err());
    }

    #[test]
    fn csv_header() {
        let cfg = TrainConfig {
            epochs: 2,
            mode: ForwardMode::Surrogate,
            ..TrainConfig::default()
        };
        let r = train(
            &QFNNConfig::xor_default(),
            &Dataset::xor(),
            &cfg,
            Execution::default(),
        )
        .unwrap();
        let csv = r.curve_csv();
        assert!(csv.starts_with("epoch,loss\n0,"));
        assert_eq!(csv.lines().count(), 4);
    }
}
