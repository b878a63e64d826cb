// SPDX-License-Identifier: Apache-2.0

//! Reference activation functions and their fixed-point tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixedpoint::FixedPointFormat;
use crate::oracles::{tabulate_activation, BooleanTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
    Relu,
    Tanh,
    /// Exact erf form `0.5·t·(1 + erf(t/√2))`.
    Gelu,
}

impl Activation {
    pub const ALL: [Activation; 4] = [
        Activation::Sigmoid,
        Activation::Relu,
        Activation::Tanh,
        Activation::Gelu,
    ];

    pub fn eval(self, t: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-t).exp()),
            Activation::Relu => t.max(0.0),
            Activation::Tanh => t.tanh(),
            Activation::Gelu => 0.5 * t * (1.0 + libm::erf(t / std::f64::consts::SQRT_2)),
        }
    }

    /// First derivative, used by the classical gradient path.
    pub fn derivative(self, t: f64) -> f64 {
        match self {
            Activation::Sigmoid => {
                let s = self.eval(t);
                s * (1.0 - s)
            }
            Activation::Relu => {
                if t > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - t.tanh().powi(2),
            Activation::Gelu => {
                let cdf = 0.5 * (1.0 + libm::erf(t / std::f64::consts::SQRT_2));
                let pdf = (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
                cdf + t * pdf
            }
        }
    }

    pub fn is_monotone(self) -> bool {
        !matches!(self, Activation::Gelu)
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Gelu => "gelu",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "gelu" => Ok(Activation::Gelu),
            other => Err(Error::Config(format!(
                "unknown activation {other:?} (expected sigmoid, relu, tanh or gelu)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationSpec {
    pub activation: Activation,
    pub in_fmt: FixedPointFormat,
    pub out_fmt: FixedPointFormat,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub input: f64,
    pub exact: f64,
    pub quantized: f64,
}

impl ActivationSpec {
    pub fn new(activation: Activation, fmt: FixedPointFormat) -> Self {
        Self {
            activation,
            in_fmt: fmt,
            out_fmt: fmt,
        }
    }

    pub fn eval_exact(&self, t: f64) -> f64 {
        self.activation.eval(t)
    }

    pub fn table(&self) -> Result<BooleanTable> {
        let a = self.activation;
        tabulate_activation(move |t| a.eval(t), self.in_fmt, self.out_fmt)
    }

    /// One row per representable input, ascending.
    pub fn curve(&self) -> Result<Vec<CurveRow>> {
        let table = self.table()?;
        Ok(self
            .in_fmt
            .grid()
            .into_iter()
            .map(|(code, input)| CurveRow {
                input,
                exact: self.eval_exact(input),
                quantized: self.out_fmt.decode(table.eval(code)),
            })
            .collect())
    }

    /// CSV with header `input,exact,quantized`, 10 significant digits.
    pub fn curve_csv(&self) -> Result<String> {
        let mut out = String::from("input,exact,quantized\n");
        for r in self.curve()? {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_sig(r.input),
                fmt_sig(r.exact),
                fmt_sig(r.quantized)
            ));
        }
        Ok(out)
    }
}

/// Formats `v` with 10 significant digits, trailing zeros trimmed.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() {
            "0".into()
        } else {
            v.to_string()
        };
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (9 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q8() -> FixedPointFormat {
        "1:3:4".parse().unwrap()
    }

    #[test]
    fn exact_values() {
        assert_eq!(Activation::Sigmoid.eval(0.0), 0.5);
        assert_eq!(Activation::Relu.eval(-3.0), 0.0);
        assert_eq!(Activation::Gelu.eval(0.0), 0.0);
        assert!((Activation::Gelu.eval(1.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert_eq!(Activation::Tanh.eval(0.0), 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for a in Activation::ALL {
            for &t in &[-2.3, -0.4, 0.7, 3.1] {
                let h = 1e-6;
                let fd = (a.eval(t + h) - a.eval(t - h)) / (2.0 * h);
                assert!((fd - a.derivative(t)).abs() < 1e-6, "{a} at {t}");
            }
        }
    }

    #[test]
    fn curve_rows() {
        let spec = ActivationSpec::new(Activation::Relu, q8());
        let rows = spec.curve().unwrap();
        assert_eq!(rows.len(), 256);
        assert_eq!(rows[0].input, -8.0);
        let worst = rows
            .iter()
            .map(|r| (r.quantized - r.exact).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1.0 / 32.0);

        let tanh = ActivationSpec::new(Activation::Tanh, q8()).curve().unwrap();
        let zero = tanh.iter().find(|r| r.input == 0.0).unwrap();
        assert_eq!((zero.exact, zero.quantized), (0.0, 0.0));
    }

    #[test]
    fn relu_fixed_points() {
        let spec = ActivationSpec::new(Activation::Relu, q8());
        for r in spec.curve().unwrap() {
            if r.input >= 0.0 {
                assert_eq!(r.quantized, r.input);
            }
        }
    }

    #[test]
    fn csv_format() {
        let csv = ActivationSpec::new(Activation::Sigmoid, q8())
            .curve_csv()
            .unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("input,exact,quantized"));
        assert_eq!(csv.lines().count(), 257);
        assert!(csv.contains("\n0,0.5,0.5\n"));
        assert!(csv.contains("\n-8,0.0003353501305,0\n"));
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(-8.0), "-8");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.3333333333");
        assert_eq!(fmt_sig(123.456789012345), "123.456789");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn names_parse() {
        assert_eq!("GELU".parse::<Activation>().unwrap(), Activation::Gelu);
        assert!("swish".parse::<Activation>().is_err());
    }
}
