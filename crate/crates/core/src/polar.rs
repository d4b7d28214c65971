//! Bit-index arithmetic, the polar transform, the synthetic-channel partial
//! order and rate-profiles.
//!
//! Indices use the natural MSB-first binary expansion: bit `l` of `i` is
//! `(i >> l) & 1` and `G_N` is the plain Kronecker power of `[[1,0],[1,1]]`
//! without bit reversal, so row `N-1` is all-ones and row `0` is `e_0`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Largest tree depth accepted by default (N = 2^20).
pub const DEFAULT_MAX_DEPTH: usize = 20;

/// Hamming weight of the binary expansion of `i`.
#[inline]
pub fn hamming_weight(i: usize) -> u32 {
    i.count_ones()
}

/// Weight of row `g_i` of `G_N`, which is `2^w(i)`.
#[inline]
pub fn row_weight(i: usize) -> usize {
    1usize << i.count_ones()
}

/// `log2(len)` if `len` is a power of two.
pub fn log2_exact(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

pub(crate) fn check_depth(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::DepthTooLarge { n, max });
    }
    Ok(())
}

const STRIDE_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// In-place `x <- x * G_N` on packed words.
pub fn polar_transform_in_place(x: &mut BitVector) -> Result<()> {
    let n = log2_exact(x.len())?;
    check_depth(n, DEFAULT_MAX_DEPTH)?;
    let words = x.words_mut();
    for (s, mask) in STRIDE_MASKS.iter().enumerate().take(n.min(6)) {
        let stride = 1 << s;
        for w in words.iter_mut() {
            *w ^= (*w >> stride) & mask;
        }
    }
    // Strides of 64 and above act on whole words.
    let mut stride = 1;
    while stride < words.len() {
        for block in (0..words.len()).step_by(2 * stride) {
            for j in block..block + stride {
                words[j] ^= words[j + stride];
            }
        }
        stride *= 2;
    }
    Ok(())
}

/// `u * G_N`. The transform is its own inverse over F_2.
pub fn polar_transform(u: &BitVector) -> Result<BitVector> {
    let mut x = u.clone();
    polar_transform_in_place(&mut x)?;
    Ok(x)
}

/// Transform on an unpacked slice, used by the decoders on small node vectors.
pub fn polar_transform_bits(x: &mut [u8]) {
    let len = x.len();
    debug_assert!(len.is_power_of_two());
    let mut stride = 1;
    while stride < len {
        for block in (0..len).step_by(2 * stride) {
            for j in block..block + stride {
                x[j] ^= x[j + stride];
            }
        }
        stride *= 2;
    }
}

/// Synthetic-channel partial order `i ⪯ j` on `n`-bit indices: `j` is `i`
/// with extra one bits and/or one bits moved towards the MSB.
///
/// Decided by suffix dominance: for every level `l`, `j` has at least as many
/// ones at positions `>= l` as `i`.
pub fn partial_order_leq(i: usize, j: usize, n: usize) -> bool {
    (0..n).all(|l| (j >> l).count_ones() >= (i >> l).count_ones())
}

/// Immediate upward neighbours of `i` under the two generating rules
/// (set a zero bit, or move a one bit up by one position into a zero).
pub(crate) fn upward_neighbours(i: usize, n: usize) -> impl Iterator<Item = usize> {
    (0..n).flat_map(move |l| {
        let mut out = [None, None];
        if (i >> l) & 1 == 0 {
            out[0] = Some(i | (1 << l));
        } else if l + 1 < n && (i >> (l + 1)) & 1 == 0 {
            out[1] = Some(i ^ (0b11 << l));
        }
        out.into_iter().flatten()
    })
}

/// Information set `I` together with its complement `F` over `Z_N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct RateProfile {
    n: usize,
    info: Vec<usize>,
    mask: BitVector,
}

#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    n: usize,
    info: Vec<usize>,
}

impl TryFrom<ProfileRepr> for RateProfile {
    type Error = Error;

    fn try_from(r: ProfileRepr) -> Result<Self> {
        RateProfile::new(r.n, r.info)
    }
}

impl From<RateProfile> for ProfileRepr {
    fn from(p: RateProfile) -> Self {
        ProfileRepr {
            n: p.n,
            info: p.info,
        }
    }
}

impl RateProfile {
    pub fn new<I: IntoIterator<Item = usize>>(n: usize, info: I) -> Result<Self> {
        check_depth(n, DEFAULT_MAX_DEPTH)?;
        let len = 1usize << n;
        let mut mask = BitVector::zeros(len);
        for i in info {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
            mask.set(i, true);
        }
        let info = mask.ones_iter().collect();
        Ok(Self { n, info, mask })
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::new(n, 0..1usize << n)
    }

    /// Union of upward closures of a minimal information set.
    pub fn expand_minimal_set(minimal: &[usize], n: usize) -> Result<Self> {
        check_depth(n, DEFAULT_MAX_DEPTH)?;
        let len = 1usize << n;
        let mut mask = BitVector::zeros(len);
        let mut queue = VecDeque::new();
        for &i in minimal {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
            if !mask.get(i) {
                mask.set(i, true);
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            for j in upward_neighbours(i, n) {
                if !mask.get(j) {
                    mask.set(j, true);
                    queue.push_back(j);
                }
            }
        }
        Self::new(n, mask.ones_iter())
    }

    /// `RM(r, n)`, i.e. the closure of `{2^(n-r) - 1}`.
    pub fn reed_muller(r: usize, n: usize) -> Result<Self> {
        if r > n {
            return Err(Error::Precondition(format!("RM order {r} exceeds n = {n}")));
        }
        Self::expand_minimal_set(&[(1usize << (n - r)) - 1], n)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Code length `N`.
    #[inline]
    pub fn len(&self) -> usize {
        1 << self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Code dimension `K`.
    #[inline]
    pub fn k(&self) -> usize {
        self.info.len()
    }

    #[inline]
    pub fn is_info(&self, i: usize) -> bool {
        self.mask.get(i)
    }

    pub fn info(&self) -> &[usize] {
        &self.info
    }

    pub fn info_mask(&self) -> &BitVector {
        &self.mask
    }

    pub fn frozen(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.mask.get(i)).collect()
    }

    /// Smallest row weight over `I`; zero for an empty profile.
    pub fn w_min(&self) -> usize {
        self.info.iter().map(|&i| row_weight(i)).min().unwrap_or(0)
    }

    /// True iff `I` is closed upwards under the partial order.
    pub fn is_decreasing(&self) -> bool {
        self.info
            .iter()
            .all(|&i| upward_neighbours(i, self.n).all(|j| self.mask.get(j)))
    }

    /// Minimal elements of `I` under the partial order.
    pub fn minimal_set(&self) -> Vec<usize> {
        self.info
            .iter()
            .copied()
            .filter(|&j| {
                !self
                    .info
                    .iter()
                    .any(|&i| i != j && partial_order_leq(i, j, self.n))
            })
            .collect()
    }

    pub(crate) fn with_swapped(&self, remove: usize, add: usize) -> Result<Self> {
        Self::new(
            self.n,
            self.info
                .iter()
                .copied()
                .filter(|&i| i != remove)
                .chain(std::iter::once(add)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Transitive closure of the two generating rules, by brute force.
    fn closure_oracle(n: usize) -> Vec<Vec<bool>> {
        let len = 1 << n;
        let mut rel = vec![vec![false; len]; len];
        for i in 0..len {
            rel[i][i] = true;
            for j in 0..len {
                let dominated = (0..n).all(|l| (i >> l) & 1 <= (j >> l) & 1);
                let left_swap = (0..n.saturating_sub(1)).any(|l| {
                    let bit = |x: usize, p: usize| (x >> p) & 1;
                    bit(i, l) > bit(j, l)
                        && bit(i, l + 1) < bit(j, l + 1)
                        && (0..n)
                            .filter(|&p| p != l && p != l + 1)
                            .all(|p| bit(i, p) == bit(j, p))
                });
                if dominated || left_swap {
                    rel[i][j] = true;
                }
            }
        }
        for k in 0..len {
            for i in 0..len {
                if rel[i][k] {
                    for j in 0..len {
                        if rel[k][j] {
                            rel[i][j] = true;
                        }
                    }
                }
            }
        }
        rel
    }

    #[test]
    fn hamming_and_row_weights() {
        assert_eq!(hamming_weight(0), 0);
        assert_eq!(hamming_weight(10), 2);
        assert_eq!(hamming_weight(29), 4);
        assert_eq!(row_weight(0), 1);
        assert_eq!(row_weight(10), 4);
        assert_eq!(row_weight(127), 128);
    }

    #[test]
    fn transform_examples() {
        let zero = BitVector::zeros(16);
        assert!(polar_transform(&zero).unwrap().is_zero());
        let last = BitVector::unit(16, 15);
        assert_eq!(polar_transform(&last).unwrap(), BitVector::ones(16));
        // Row 10 of G_16 = g_2 (x) g_2 ... expanded by hand: 1010 -> columns {0,2,8,10}.
        let row10 = polar_transform(&BitVector::unit(16, 10)).unwrap();
        assert_eq!(row10.weight(), 4);
        assert_eq!(row10.ones_iter().collect::<Vec<_>>(), vec![0, 2, 8, 10]);
        assert!(matches!(
            polar_transform(&BitVector::zeros(12)),
            Err(Error::NotPowerOfTwo(12))
        ));
    }

    #[test]
    fn row_weight_matches_transform_up_to_256() {
        for n in 0..=8 {
            let len = 1 << n;
            for i in 0..len {
                let row = polar_transform(&BitVector::unit(len, i)).unwrap();
                assert_eq!(row.weight(), row_weight(i), "n={n} i={i}");
            }
        }
        // spot checks at N = 1024
        for i in [0, 1, 341, 512, 777, 1023] {
            let row = polar_transform(&BitVector::unit(1024, i)).unwrap();
            assert_eq!(row.weight(), row_weight(i));
        }
    }

    #[test]
    fn packed_transform_matches_unpacked() {
        let mut state = 0x1234_5678_9abc_def0u64;
        for n in [1, 3, 6, 7, 8, 10] {
            let len = 1 << n;
            let bits: Vec<bool> = (0..len)
                .map(|_| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    state & 1 == 1
                })
                .collect();
            let packed = polar_transform(&BitVector::from_bits(bits.iter().copied())).unwrap();
            let mut unpacked: Vec<u8> = bits.iter().map(|&b| b as u8).collect();
            polar_transform_bits(&mut unpacked);
            assert_eq!(packed.to_bools(), unpacked.iter().map(|&b| b == 1).collect::<Vec<_>>());
        }
    }

    #[test]
    fn partial_order_examples() {
        assert!(partial_order_leq(9, 9, 4));
        assert!(partial_order_leq(0b0101, 0b0110, 4));
        assert!(partial_order_leq(0b0011, 0b0101, 4));
        assert!(!partial_order_leq(0b0110, 0b0101, 4));
        assert!(partial_order_leq(5, 7, 3));
    }

    #[test]
    fn partial_order_matches_closure_oracle() {
        for n in 1..=7 {
            let rel = closure_oracle(n);
            let len = 1 << n;
            for i in 0..len {
                for j in 0..len {
                    assert_eq!(partial_order_leq(i, j, n), rel[i][j], "n={n} i={i} j={j}");
                    if rel[i][j] {
                        assert!(hamming_weight(i) <= hamming_weight(j));
                    }
                }
            }
        }
    }

    #[test]
    fn minimal_set_expansion() {
        let rm13 = RateProfile::expand_minimal_set(&[3], 3).unwrap();
        assert_eq!(rm13.info(), &[3, 5, 6, 7]);
        assert_eq!(RateProfile::reed_muller(1, 3).unwrap(), rm13);
        let rm37 = RateProfile::reed_muller(3, 7).unwrap();
        assert_eq!(rm37.k(), 1 + 7 + 21 + 35);
        let a = RateProfile::expand_minimal_set(&[29, 43, 71], 7).unwrap();
        assert_eq!(a.k(), 60);
        let b = RateProfile::expand_minimal_set(&[63, 115, 157, 167], 8).unwrap();
        assert_eq!(b.k(), 75);
        assert_eq!(a.minimal_set(), vec![29, 43, 71]);
    }

    #[test]
    fn closure_agrees_with_partial_order() {
        let n = 7;
        let profile = RateProfile::expand_minimal_set(&[29, 43, 71], n).unwrap();
        for j in 0..128 {
            let expected = [29, 43, 71].iter().any(|&i| partial_order_leq(i, j, n));
            assert_eq!(profile.is_info(j), expected);
        }
    }

    #[test]
    fn decreasing_checks() {
        assert!(RateProfile::full(4).unwrap().is_decreasing());
        assert!(!RateProfile::new(3, [5]).unwrap().is_decreasing());
        assert!(RateProfile::expand_minimal_set(&[29, 43, 71], 7)
            .unwrap()
            .is_decreasing());
    }

    proptest! {
        #[test]
        fn transform_is_involution(bits in proptest::collection::vec(any::<bool>(), 256)) {
            let u = BitVector::from_bits(bits);
            let back = polar_transform(&polar_transform(&u).unwrap()).unwrap();
            prop_assert_eq!(back, u);
        }

        #[test]
        fn expansion_is_decreasing(mins in proptest::collection::vec(0usize..256, 0..5)) {
            let p = RateProfile::expand_minimal_set(&mins, 8).unwrap();
            prop_assert!(p.is_decreasing());
        }
    }
}
