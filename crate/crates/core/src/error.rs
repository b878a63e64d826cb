// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {requested} outside supported range 1..={max}")]
    QubitCount { requested: usize, max: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("cannot normalise a zero vector")]
    ZeroVector,
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitIndex { index: usize, num_qubits: usize },
    #[error("qubit {0} used more than once in a gate")]
    QubitCollision(usize),
    #[error("qubit subset must be nonempty")]
    EmptySubset,
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("invalid bitstring {0:?}")]
    Bitstring(String),
    #[error("value {value} not representable in {format} (range [{min}, {max}])")]
    Overflow {
        value: f64,
        format: String,
        min: f64,
        max: f64,
    },
    #[error("invalid fixed-point format: {0}")]
    Format(String),
    #[error("value {value} outside the half-open domain [0, 1)")]
    FeatureDomain { value: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("oracle kind/shape mismatch: {0}")]
    KindMismatch(String),
    #[error("size cap exceeded: {what} = {value} > {max}")]
    SizeCap {
        what: &'static str,
        value: usize,
        max: usize,
    },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("circuit cannot be folded: {0}")]
    NotFoldable(String),
    #[error("register overflow at layer {layer}, neuron {neuron}: scaled inner product {value} outside [{min}, {max})")]
    RegisterOverflow {
        layer: usize,
        neuron: usize,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("training diverged at epoch {epoch}: loss {loss} > 10x initial {initial}")]
    Divergence {
        epoch: usize,
        loss: f64,
        initial: f64,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("probability {name} = {value} outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attaches the offending path to an I/O failure.
    pub fn file(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::File {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence { .. } | Error::RegisterOverflow { .. } => 3,
            _ => 2,
        }
    }
}
