//! Successive-cancellation decoders for pre-transformed polar codes: SC,
//! list SC (leaf by leaf) and fast simplified list SC on a pruned polar
//! factor tree with dynamic frozen bits.

mod fast;
mod sc;
mod subsets;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::pretransform::PolarCode;

pub use fast::FastDecoder;
pub use sc::{sc_decode, scl_decode};
pub use tree::{build_pft, node_bit_index, NodeKind, PolarFactorTree, TreeNode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FVariant {
    #[default]
    MinSum,
    BoxPlus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpecialNodes {
    pub rate0: bool,
    pub rate1: bool,
    pub rep: bool,
    pub spc: bool,
    /// Largest node size that may be pruned.
    pub max_size: usize,
}

impl Default for SpecialNodes {
    fn default() -> Self {
        Self {
            rate0: true,
            rate1: true,
            rep: true,
            spc: true,
            max_size: usize::MAX,
        }
    }
}

impl SpecialNodes {
    pub fn none() -> Self {
        Self {
            rate0: false,
            rate1: false,
            rep: false,
            spc: false,
            max_size: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoderConfig {
    pub list_size: usize,
    pub f_variant: FVariant,
    pub special_nodes: SpecialNodes,
    /// Rate-1 and SPC nodes never flip positions with `|α|` above this
    /// value (at least one SPC position stays eligible). Off by default;
    /// enabling it gives up exact agreement with leaf-level SCL.
    pub flip_threshold: Option<f64>,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            list_size: 8,
            f_variant: FVariant::MinSum,
            special_nodes: SpecialNodes::default(),
            flip_threshold: None,
        }
    }
}

impl DecoderConfig {
    pub fn with_list_size(list_size: usize) -> Self {
        Self {
            list_size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.list_size == 0 {
            return Err(Error::Precondition("list size must be at least 1".into()));
        }
        if self.flip_threshold.is_some_and(|t| t.is_nan() || t < 0.0) {
            return Err(Error::Precondition("flip threshold must be non-negative".into()));
        }
        Ok(())
    }
}

/// One surviving decoding path.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodedPath {
    /// Decoded pre-transformed message `u`.
    pub u: BitVector,
    pub pm: f64,
}

#[inline]
pub fn f_func(variant: FVariant, a: f64, b: f64) -> f64 {
    match variant {
        FVariant::MinSum => {
            let m = a.abs().min(b.abs());
            if (a < 0.0) != (b < 0.0) {
                -m
            } else {
                m
            }
        }
        FVariant::BoxPlus => {
            // 2 atanh(tanh(a/2) tanh(b/2)) without overflow
            let m = a.abs().min(b.abs());
            let corr = (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p();
            if (a < 0.0) != (b < 0.0) {
                corr - m
            } else {
                m + corr
            }
        }
    }
}

#[inline]
pub fn g_func(a: f64, b: f64, beta: u8) -> f64 {
    if beta == 0 {
        b + a
    } else {
        b - a
    }
}

/// `(beta_l XOR beta_r, beta_r)`.
pub fn h_combine(left: &[u8], right: &[u8]) -> Vec<u8> {
    debug_assert_eq!(left.len(), right.len());
    left.iter()
        .zip(right)
        .map(|(l, r)| l ^ r)
        .chain(right.iter().copied())
        .collect()
}

/// Hard decision: 1 iff the LLR is negative.
#[inline]
pub fn hd(alpha: f64) -> u8 {
    u8::from(alpha < 0.0)
}

/// Best path of a ranked list and its recovered message.
pub fn select_output(list: &[DecodedPath], code: &PolarCode) -> Result<(BitVector, BitVector)> {
    let best = list
        .first()
        .ok_or_else(|| Error::Precondition("empty decoder output list".into()))?;
    let m = code.message_from_u(&best.u)?;
    Ok((best.u.clone(), m))
}

/// Sorts by ascending PM; equal metrics keep their incoming order.
pub(crate) fn rank_paths(list: &mut [DecodedPath]) {
    list.sort_by(|a, b| a.pm.total_cmp(&b.pm));
}

/// Decoding algorithm selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Sc,
    Scl,
    #[default]
    Fsscl,
}

/// A decoder bound to one code, reusable across frames.
pub struct Decoder {
    code: PolarCode,
    config: DecoderConfig,
    algorithm: Algorithm,
    fast: Option<FastDecoder>,
}

impl Decoder {
    pub fn new(code: PolarCode, config: DecoderConfig, algorithm: Algorithm) -> Result<Self> {
        config.validate()?;
        let fast = match algorithm {
            Algorithm::Fsscl => Some(FastDecoder::new(&code, config)?),
            _ => None,
        };
        Ok(Self {
            code,
            config,
            algorithm,
            fast,
        })
    }

    pub fn code(&self) -> &PolarCode {
        &self.code
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    pub fn decode(&self, llr: &[f64]) -> Result<Vec<DecodedPath>> {
        match self.algorithm {
            Algorithm::Sc => {
                let u = sc_decode(llr, &self.code, self.config.f_variant)?;
                Ok(vec![DecodedPath { u, pm: 0.0 }])
            }
            Algorithm::Scl => scl_decode(llr, &self.code, &self.config),
            Algorithm::Fsscl => self.fast.as_ref().expect("fast decoder").decode(llr),
        }
    }
}
