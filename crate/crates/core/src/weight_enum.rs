//! Exact enumeration of minimum-weight codewords of pre-transformed polar
//! codes by intersecting the coset message trees with the trees of
//! `w_min`-weight messages.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::polar::{hamming_weight, row_weight, RateProfile};
use crate::pretransform::{to_systematic, PolarCode, PreTransform};

/// Default cap on `K` for [`brute_force_spectrum`].
pub const BRUTE_FORCE_CAP: usize = 24;

/// `j` is a core row of coset `i` iff adding `g_j` to `g_i` keeps its weight.
#[inline]
pub fn is_core_row(i: usize, j: usize) -> bool {
    j > i && (!i & j).count_ones() == 1
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreRowSets {
    pub leader: usize,
    /// `K_i`
    pub core: Vec<usize>,
    /// `K_i^c`, the rest of `i+1..N`
    pub complement: Vec<usize>,
}

pub fn core_rows(i: usize, len: usize) -> CoreRowSets {
    let (core, complement) = (i + 1..len).partition(|&j| is_core_row(i, j));
    CoreRowSets {
        leader: i,
        core,
        complement,
    }
}

/// `w(g_i XOR g_j) = 2^w(i) + 2^w(j) - 2^(w(i & j) + 1)`.
pub fn merged_pair_weight(i: usize, j: usize) -> Result<usize> {
    if i == j {
        return Err(Error::Precondition("merged pair needs two distinct rows".into()));
    }
    Ok(row_weight(i) + row_weight(j) - (1usize << (hamming_weight(i & j) + 1)))
}

/// Balancing row index `mu_i(j, k) = (~i & (j | k)) | (j & k)`.
pub fn mu(i: usize, j: usize, k: usize) -> Result<usize> {
    if !i & j & k != 0 {
        return Err(Error::Precondition(format!(
            "mu({i}, {j}, {k}) requires ~i & j & k = 0"
        )));
    }
    if i >= j.min(k) {
        return Err(Error::Precondition(format!(
            "mu({i}, {j}, {k}) requires i < min(j, k)"
        )));
    }
    Ok(mu_unchecked(i, j, k))
}

#[inline]
fn mu_unchecked(i: usize, j: usize, k: usize) -> usize {
    (!i & (j | k)) | (j & k)
}

/// Adds core row `j` to the message `u` of coset `i`, toggling the balancing
/// rows needed to keep the codeword weight at `2^w(i)`.
pub fn update_message(i: usize, j: usize, u: &mut BitVector) {
    let candidates: Vec<usize> = u.ones_in(i + 1, j).collect();
    for k in candidates {
        if !i & j & k == 0 {
            u.toggle(mu_unchecked(i, j, k));
        }
    }
    u.set(j, true);
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CosetClassification {
    pub w_min: usize,
    pub i_wmin: Vec<usize>,
    /// `F_i^* = F & K_i^c & (i, N)` for every `i in I_wmin`.
    pub f_star: BTreeMap<usize, Vec<usize>>,
    /// `F_i^o = (F \ Z_i) \ F_i^*`.
    pub f_circ: BTreeMap<usize, Vec<usize>>,
    /// Cosets whose `F_i^*` is non-empty (pre-transformable).
    pub i_wmin_star: Vec<usize>,
    pub i_wmin_circ: Vec<usize>,
}

pub fn classify_cosets(profile: &RateProfile) -> CosetClassification {
    let w_min = profile.w_min();
    let i_wmin: Vec<usize> = profile
        .info()
        .iter()
        .copied()
        .filter(|&i| row_weight(i) == w_min)
        .collect();
    let frozen = profile.frozen();
    let mut f_star = BTreeMap::new();
    let mut f_circ = BTreeMap::new();
    let mut i_wmin_star = Vec::new();
    let mut i_wmin_circ = Vec::new();
    for &i in &i_wmin {
        let (circ, star): (Vec<usize>, Vec<usize>) = frozen
            .iter()
            .copied()
            .filter(|&f| f > i)
            .partition(|&f| is_core_row(i, f));
        if star.is_empty() {
            i_wmin_circ.push(i);
        } else {
            i_wmin_star.push(i);
        }
        f_star.insert(i, star);
        f_circ.insert(i, circ);
    }
    CosetClassification {
        w_min,
        i_wmin,
        f_star,
        f_circ,
        i_wmin_star,
        i_wmin_circ,
    }
}

/// Counts `w_min`-weight messages of single cosets for a fixed code given by
/// its information mask and, per column, the information rows feeding it in
/// systematic form.
pub struct CosetEnumerator<'a> {
    info: &'a BitVector,
    columns: &'a [Vec<usize>],
    extra: Option<(usize, usize)>,
}

/// Result of a bounded coset count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CosetCount {
    Exact(u128),
    /// The count exceeded the supplied limit; enumeration was abandoned.
    Exceeded,
}

impl<'a> CosetEnumerator<'a> {
    pub fn new(info: &'a BitVector, columns: &'a [Vec<usize>]) -> Self {
        debug_assert_eq!(info.len(), columns.len());
        Self {
            info,
            columns,
            extra: None,
        }
    }

    /// Same code with one additional repetition `t_{i,f} = 1` on top of
    /// `columns`.
    pub fn with_extra_merge(mut self, i: usize, f: usize) -> Self {
        self.extra = Some((i, f));
        self
    }

    pub fn count(&self, i: usize) -> Result<u128> {
        match self.count_bounded(i, u128::MAX)? {
            CosetCount::Exact(c) => Ok(c),
            CosetCount::Exceeded => Err(Error::CountOverflow),
        }
    }

    /// Counts coset `i`, stopping early once the count provably exceeds
    /// `limit`.
    pub fn count_bounded(&self, i: usize, limit: u128) -> Result<CosetCount> {
        let len = self.info.len();
        let f_star = (i + 1..len)
            .rev()
            .find(|&f| !self.info.get(f) && !is_core_row(i, f))
            .unwrap_or(i);
        let free = (f_star + 1..len)
            .filter(|&j| self.info.get(j) && is_core_row(i, j))
            .count() as u32;
        if free >= 128 {
            return Err(Error::CountOverflow);
        }
        let scale = 1u128 << free;
        let mut walk = Walk {
            enumerator: self,
            leader: i,
            last: f_star,
            leaves: 0,
            leaf_limit: limit / scale,
        };
        let mut u = BitVector::zeros(len);
        u.set(i, true);
        if !walk.subtree(i, u) {
            return Ok(CosetCount::Exceeded);
        }
        let total = walk.leaves.checked_mul(scale).ok_or(Error::CountOverflow)?;
        Ok(if total > limit {
            CosetCount::Exceeded
        } else {
            CosetCount::Exact(total)
        })
    }

    #[inline]
    fn dynamic_value(&self, k: usize, u: &BitVector) -> bool {
        let base = self.columns[k].iter().fold(false, |acc, &h| acc ^ u.get(h));
        match self.extra {
            Some((i, f)) if f == k => base ^ u.get(i),
            _ => base,
        }
    }
}

struct Walk<'e, 'a> {
    enumerator: &'e CosetEnumerator<'a>,
    leader: usize,
    last: usize,
    leaves: u128,
    leaf_limit: u128,
}

impl Walk<'_, '_> {
    /// Visits the subtree below level `j` where core row `j` has just been
    /// chosen. Returns false once the leaf limit is exceeded.
    fn subtree(&mut self, j: usize, mut u: BitVector) -> bool {
        let i = self.leader;
        let info = self.enumerator.info;
        if j != i {
            update_message(i, j, &mut u);
        }
        for k in j + 1..=self.last {
            let core = is_core_row(i, k);
            if info.get(k) {
                if core && !self.subtree(k, u.clone()) {
                    return false;
                }
                // information bits outside K_i are free in the coset
                continue;
            }
            let d = self.enumerator.dynamic_value(k, &u);
            if !core {
                if d != u.get(k) {
                    return true;
                }
            } else if d {
                update_message(i, k, &mut u);
            }
        }
        self.leaves += 1;
        self.leaves <= self.leaf_limit
    }
}

/// `A_{w_min}` of a code together with its per-coset breakdown.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinWeightCount {
    pub w_min: usize,
    pub count: u128,
    pub per_coset: BTreeMap<usize, u128>,
}

impl MinWeightCount {
    /// True when the pre-transform removed every `w_min`-weight codeword,
    /// so `d_min > w_min`.
    pub fn eliminated(&self) -> bool {
        self.count == 0
    }
}

/// Column dependency lists of a systematic transform restricted to
/// information rows.
pub fn info_columns(sys: &PreTransform, profile: &RateProfile) -> Vec<Vec<usize>> {
    let mut cols = sys.column_dependencies();
    for col in &mut cols {
        col.retain(|&h| profile.is_info(h));
    }
    cols
}

/// Exact `A_{w_min}` of `P(I, T)`. `T` is brought to systematic form first;
/// cosets are counted in parallel.
pub fn error_coefficient(profile: &RateProfile, t: &PreTransform) -> Result<MinWeightCount> {
    let sys = to_systematic(t, profile)?;
    let cols = info_columns(&sys, profile);
    error_coefficient_columns(profile, &cols)
}

pub fn code_error_coefficient(code: &PolarCode) -> Result<MinWeightCount> {
    let cols = info_columns(code.systematic(), code.profile());
    error_coefficient_columns(code.profile(), &cols)
}

pub(crate) fn error_coefficient_columns(
    profile: &RateProfile,
    cols: &[Vec<usize>],
) -> Result<MinWeightCount> {
    let w_min = profile.w_min();
    let enumerator = CosetEnumerator::new(profile.info_mask(), cols);
    let leaders: Vec<usize> = profile
        .info()
        .iter()
        .copied()
        .filter(|&i| row_weight(i) == w_min)
        .collect();
    let counts: Vec<Result<u128>> = leaders.par_iter().map(|&i| enumerator.count(i)).collect();
    let mut per_coset = BTreeMap::new();
    let mut count = 0u128;
    for (&i, c) in leaders.iter().zip(counts) {
        let c = c?;
        count = count.checked_add(c).ok_or(Error::CountOverflow)?;
        per_coset.insert(i, c);
    }
    Ok(MinWeightCount {
        w_min: if profile.k() == 0 { 0 } else { w_min },
        count,
        per_coset,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Enumerated,
    BruteForce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub weight: usize,
    pub count: u128,
    pub provenance: Provenance,
}

/// Exhaustive weight histogram over all `2^K` codewords (Gray-code walk).
pub fn brute_force_spectrum(
    profile: &RateProfile,
    t: &PreTransform,
    cap: usize,
) -> Result<Vec<SpectrumRecord>> {
    let k = profile.k();
    if k > cap || k >= 64 {
        return Err(Error::BruteForceCap { k, cap });
    }
    let code = PolarCode::new(profile.clone(), t.clone())?;
    let generators: Vec<BitVector> = (0..k)
        .map(|pos| code.encode(&BitVector::unit(k, pos)))
        .collect::<Result<_>>()?;
    let mut hist = vec![0u128; profile.len() + 1];
    let mut c = BitVector::zeros(profile.len());
    hist[0] = 1;
    for step in 1u64..(1u64 << k) {
        c.xor_assign(&generators[step.trailing_zeros() as usize]);
        hist[c.weight()] += 1;
    }
    Ok(hist
        .into_iter()
        .enumerate()
        .filter(|&(_, a)| a > 0)
        .map(|(weight, count)| SpectrumRecord {
            weight,
            count,
            provenance: Provenance::BruteForce,
        })
        .collect())
}

/// Smallest nonzero weight and its multiplicity from a spectrum, if any.
pub fn min_distance(spectrum: &[SpectrumRecord]) -> Option<(usize, u128)> {
    spectrum
        .iter()
        .find(|r| r.weight > 0)
        .map(|r| (r.weight, r.count))
}
