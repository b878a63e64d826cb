// SPDX-License-Identifier: Apache-2.0

//! Binary fixed-point codes for register contents.
//!
//! Signed formats use two's complement over `total_bits`, which is exactly
//! what modular phase estimation produces: a register reading `v` encodes
//! `(2^fb · value) mod 2^m`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Widest supported code.
pub const MAX_BITS: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedPointFormat {
    pub signed: bool,
    pub int_bits: u32,
    pub frac_bits: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rounding {
    /// Nearest representable value, ties to the even code.
    #[default]
    NearestEven,
    /// Toward negative infinity.
    Truncate,
}

impl FixedPointFormat {
    pub fn new(signed: bool, int_bits: u32, frac_bits: u32) -> Result<Self> {
        let f = Self {
            signed,
            int_bits,
            frac_bits,
        };
        let m = f.total_bits();
        if m == 0 || m > MAX_BITS {
            return Err(Error::Format(format!(
                "{f}: total bits must be in 1..={MAX_BITS}"
            )));
        }
        Ok(f)
    }

    pub fn signed(int_bits: u32, frac_bits: u32) -> Result<Self> {
        Self::new(true, int_bits, frac_bits)
    }

    pub fn unsigned(int_bits: u32, frac_bits: u32) -> Result<Self> {
        Self::new(false, int_bits, frac_bits)
    }

    /// Signed `m`-bit register with `fb` fraction bits.
    pub fn register(m: u32, fb: u32) -> Result<Self> {
        if m < fb + 1 {
            return Err(Error::Format(format!(
                "register of {m} bits cannot hold a sign bit and {fb} fraction bits"
            )));
        }
        Self::signed(m - 1 - fb, fb)
    }

    pub fn total_bits(&self) -> u32 {
        u32::from(self.signed) + self.int_bits + self.frac_bits
    }

    pub fn num_codes(&self) -> u64 {
        1u64 << self.total_bits()
    }

    /// Value of one least-significant bit.
    pub fn step(&self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn min_value(&self) -> f64 {
        if self.signed {
            -(self.int_bits as f64).exp2()
        } else {
            0.0
        }
    }

    pub fn max_value(&self) -> f64 {
        (self.int_bits as f64).exp2() - self.step()
    }

    fn scaled_range(&self) -> (i64, i64) {
        let m = self.total_bits();
        if self.signed {
            (-(1i64 << (m - 1)), (1i64 << (m - 1)) - 1)
        } else {
            (0, (1i64 << m) - 1)
        }
    }

    fn scaled(&self, value: f64, rounding: Rounding) -> f64 {
        let s = value * (self.frac_bits as f64).exp2();
        match rounding {
            Rounding::NearestEven => s.round_ties_even(),
            Rounding::Truncate => s.floor(),
        }
    }

    fn code_of(&self, scaled: i64) -> u64 {
        (scaled as u64) & (self.num_codes() - 1)
    }

    /// Code of the representable value nearest to (or truncated from)
    /// `value`; errors when that value is out of range.
    pub fn quantize(&self, value: f64, rounding: Rounding) -> Result<u64> {
        let (lo, hi) = self.scaled_range();
        let s = self.scaled(value, rounding);
        if !s.is_finite() || s < lo as f64 || s > hi as f64 {
            return Err(Error::Overflow {
                value,
                format: self.to_string(),
                min: self.min_value(),
                max: self.max_value(),
            });
        }
        Ok(self.code_of(s as i64))
    }

    /// Like [`quantize`](Self::quantize) but clamps to the representable
    /// range. NaN maps to zero.
    pub fn quantize_saturating(&self, value: f64, rounding: Rounding) -> u64 {
        let (lo, hi) = self.scaled_range();
        let s = self.scaled(value, rounding);
        let s = if s.is_nan() {
            0.0
        } else {
            s.clamp(lo as f64, hi as f64)
        };
        self.code_of(s as i64)
    }

    /// Integer the code stands for before scaling by `2^-fb`.
    pub fn decode_scaled(&self, code: u64) -> i64 {
        let m = self.total_bits();
        let code = code & (self.num_codes() - 1);
        if self.signed && code >= 1u64 << (m - 1) {
            code as i64 - (1i64 << m)
        } else {
            code as i64
        }
    }

    pub fn decode(&self, code: u64) -> f64 {
        self.decode_scaled(code) as f64 * self.step()
    }

    /// Every representable value in ascending order, paired with its code.
    pub fn grid(&self) -> Vec<(u64, f64)> {
        let (lo, hi) = self.scaled_range();
        (lo..=hi)
            .map(|s| (self.code_of(s), s as f64 * self.step()))
            .collect()
    }

    /// Weight of bit `k` (0 = most significant) of a code.
    pub fn bit_weight(&self, k: u32) -> f64 {
        let m = self.total_bits();
        let w = ((m - 1 - k) as f64 - self.frac_bits as f64).exp2();
        if self.signed && k == 0 {
            -w
        } else {
            w
        }
    }
}

impl fmt::Display for FixedPointFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}",
            u8::from(self.signed),
            self.int_bits,
            self.frac_bits
        )
    }
}

/// Parses the `"s:i:f"` triple, e.g. `"1:3:4"`.
impl FromStr for FixedPointFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Format(format!("expected \"s:i:f\", got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<u32> = parts
            .iter()
            .map(|p| p.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if nums[0] > 1 {
            return Err(bad());
        }
        Self::new(nums[0] == 1, nums[1], nums[2])
    }
}

/// Basis encoding of a feature vector: each feature's code written MSB-first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleEncoding {
    pub format: FixedPointFormat,
    pub codes: Vec<u64>,
}

impl SampleEncoding {
    /// Bits per feature.
    pub fn p(&self) -> usize {
        self.format.total_bits() as usize
    }

    pub fn n(&self) -> usize {
        self.codes.len()
    }

    pub fn bits(&self) -> Vec<bool> {
        let p = self.p();
        self.codes
            .iter()
            .flat_map(|&c| (0..p).map(move |k| (c >> (p - 1 - k)) & 1 == 1))
            .collect()
    }

    pub fn bitstring(&self) -> String {
        self.bits()
            .into_iter()
            .map(|b| if b { '1' } else { '0' })
            .collect()
    }

    /// Feature values represented by the codes.
    pub fn values(&self) -> Vec<f64> {
        self.codes.iter().map(|&c| self.format.decode(c)).collect()
    }
}

/// Writes every feature with `format` using `rounding`.
pub fn encode_features(
    x: &[f64],
    format: FixedPointFormat,
    rounding: Rounding,
) -> Result<SampleEncoding> {
    let codes = x
        .iter()
        .map(|&v| format.quantize(v, rounding))
        .collect::<Result<_>>()?;
    Ok(SampleEncoding { format, codes })
}

/// `p` fraction bits per feature, truncated; features must lie in `[0, 1)`.
pub fn basis_encode_sample(x: &[f64], p: u32) -> Result<SampleEncoding> {
    if let Some(&bad) = x.iter().find(|v| !(0.0..1.0).contains(*v)) {
        return Err(Error::FeatureDomain { value: bad });
    }
    encode_features(x, FixedPointFormat::unsigned(0, p)?, Rounding::Truncate)
}
