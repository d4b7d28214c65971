//! Upper-triangular pre-transforms (row-merge, CRC, convolutional, generic),
//! encoding of pre-transformed polar codes, and their dynamic-frozen
//! structure.
//!
//! A pre-transform `T` maps the rate-profiled message `v` (with `v_I = m`,
//! `v_F = 0`) to `u = v * T`; the codeword is `c = u * G_N`. Only rows
//! `h in I` of `T` ever contribute, so frozen rows are kept empty.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::polar::{polar_transform_in_place, RateProfile};

/// Dense generic matrices are only accepted up to this length.
pub const DENSE_LIMIT: usize = 4096;

/// 3GPP TS 38.212 CRC11, `x^11 + x^10 + x^9 + x^5 + 1`.
pub const CRC11_NR: u64 = 0xE21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Identity,
    RowMerge,
    Crc,
    Convolution,
    Generic,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TransformKind::Identity => "identity",
            TransformKind::RowMerge => "row_merge",
            TransformKind::Crc => "crc",
            TransformKind::Convolution => "convolution",
            TransformKind::Generic => "generic",
        };
        f.write_str(s)
    }
}

/// Row-merge pairs `(i, d)`: information bit `v_i` is repeated into frozen
/// position `d`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RowMergeSet {
    pairs: Vec<(usize, usize)>,
}

impl RowMergeSet {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn insert(&mut self, info: usize, frozen: usize) {
        if let Err(pos) = self.pairs.binary_search(&(info, frozen)) {
            self.pairs.insert(pos, (info, frozen));
        }
    }

    pub fn contains_target(&self, frozen: usize) -> bool {
        self.pairs.iter().any(|&(_, d)| d == frozen)
    }

    pub fn validate(&self, profile: &RateProfile) -> Result<()> {
        let len = profile.len();
        let mut used = BitVector::zeros(len);
        for &(i, d) in &self.pairs {
            let bad = |reason| Error::InvalidMerge {
                info: i,
                frozen: d,
                reason,
            };
            if i >= len || d >= len {
                return Err(bad("index out of range"));
            }
            if !profile.is_info(i) {
                return Err(bad("source is not an information bit"));
            }
            if profile.is_info(d) {
                return Err(bad("target is not a frozen bit"));
            }
            if i >= d {
                return Err(bad("source must precede target"));
            }
            if used.get(d) {
                return Err(bad("frozen target used more than once"));
            }
            used.set(d, true);
        }
        Ok(())
    }
}

/// Sparse upper-triangular binary matrix over `F_2^{N x N}`, stored as sorted
/// per-row supports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreTransform {
    n: usize,
    rows: Vec<Vec<usize>>,
    kind: TransformKind,
}

impl PreTransform {
    pub fn identity(profile: &RateProfile) -> Self {
        let mut rows = vec![Vec::new(); profile.len()];
        for &i in profile.info() {
            rows[i].push(i);
        }
        Self {
            n: profile.n(),
            rows,
            kind: TransformKind::Identity,
        }
    }

    /// Builds a transform from explicit row supports and checks it against
    /// `profile`. Supports of frozen rows are dropped since `v_F = 0`.
    pub fn from_rows(
        profile: &RateProfile,
        rows: BTreeMap<usize, Vec<usize>>,
        kind: TransformKind,
    ) -> Result<Self> {
        let len = profile.len();
        let mut out = vec![Vec::new(); len];
        for (h, mut support) in rows {
            if h >= len {
                return Err(Error::IndexOutOfRange { index: h, len });
            }
            if !profile.is_info(h) {
                continue;
            }
            support.sort_unstable();
            support.dedup();
            if let Some(&last) = support.last() {
                if last >= len {
                    return Err(Error::IndexOutOfRange { index: last, len });
                }
            }
            out[h] = support;
        }
        let t = Self {
            n: profile.n(),
            rows: out,
            kind,
        };
        t.validate(profile)?;
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    /// `supp(t_h)`.
    pub fn row(&self, h: usize) -> &[usize] {
        &self.rows[h]
    }

    pub fn get(&self, h: usize, j: usize) -> bool {
        self.rows[h].binary_search(&j).is_ok()
    }

    pub fn validate(&self, profile: &RateProfile) -> Result<()> {
        if profile.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: profile.len(),
                got: self.len(),
            });
        }
        for (h, row) in self.rows.iter().enumerate() {
            if let Some(&first) = row.first() {
                if first < h {
                    return Err(Error::InvalidTransform(format!(
                        "row {h} has an entry below the diagonal at column {first}"
                    )));
                }
            }
            if profile.is_info(h) && row.first() != Some(&h) {
                return Err(Error::InvalidTransform(format!(
                    "missing unit diagonal at information row {h}"
                )));
            }
            if !profile.is_info(h) && !row.is_empty() {
                return Err(Error::InvalidTransform(format!(
                    "frozen row {h} must be empty"
                )));
            }
        }
        Ok(())
    }

    /// True iff every information column is a unit column, i.e. `u_I = v_I`.
    pub fn is_systematic(&self, profile: &RateProfile) -> bool {
        profile.info().iter().all(|&h| {
            self.rows[h]
                .iter()
                .all(|&j| j == h || !profile.is_info(j))
        })
    }

    /// Columns restricted to information rows: for each `j`, the rows `h`
    /// with `t_{h,j} = 1` and `h != j`.
    pub fn column_dependencies(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.len()];
        for (h, row) in self.rows.iter().enumerate() {
            for &j in row {
                if j != h {
                    cols[j].push(h);
                }
            }
        }
        cols
    }
}

/// Builds `T` with `t_{i,i} = 1` on `I` and `t_{i,d} = 1` for every merge.
pub fn row_merge_matrix(profile: &RateProfile, merges: &RowMergeSet) -> Result<PreTransform> {
    merges.validate(profile)?;
    let mut t = PreTransform::identity(profile);
    for &(i, d) in merges.pairs() {
        t.rows[i].push(d);
    }
    for row in &mut t.rows {
        row.sort_unstable();
    }
    t.kind = if merges.is_empty() {
        TransformKind::Identity
    } else {
        TransformKind::RowMerge
    };
    Ok(t)
}

/// Parses a generator polynomial written in octal. Bit `e` of the value is
/// the coefficient `p_e`, so `1047` gives `p_0 = p_1 = p_2 = p_5 = p_9 = 1`.
pub fn parse_octal_polynomial(octal: &str) -> Result<Vec<bool>> {
    let octal = octal.trim();
    if octal.is_empty() {
        return Err(Error::Schema("empty polynomial".into()));
    }
    let mut bits = Vec::new();
    for ch in octal.chars() {
        let digit = ch
            .to_digit(8)
            .ok_or_else(|| Error::Schema(format!("invalid octal digit {ch:?}")))?;
        bits.extend([(digit >> 2) & 1 == 1, (digit >> 1) & 1 == 1, digit & 1 == 1]);
    }
    bits.reverse();
    let degree = bits.iter().rposition(|&b| b).map_or(0, |d| d + 1);
    bits.truncate(degree);
    Ok(bits)
}

/// Convolutional (PAC) pre-transform: `t_{h,h+e} = p_e` on information rows.
pub fn conv_matrix(profile: &RateProfile, coefficients: &[bool]) -> Result<PreTransform> {
    if coefficients.first() != Some(&true) {
        return Err(Error::InvalidTransform(
            "convolution polynomial must have p_0 = 1".into(),
        ));
    }
    let len = profile.len();
    let mut rows = vec![Vec::new(); len];
    for &h in profile.info() {
        rows[h] = coefficients
            .iter()
            .enumerate()
            .filter(|&(e, &p)| p && h + e < len)
            .map(|(e, _)| h + e)
            .collect();
    }
    let kind = if coefficients.len() == 1 {
        TransformKind::Identity
    } else {
        TransformKind::Convolution
    };
    Ok(PreTransform {
        n: profile.n(),
        rows,
        kind,
    })
}

/// Degree of a CRC generator given as an integer bit mask (bit `e` is the
/// coefficient of `x^e`).
fn poly_degree(poly: u64) -> Option<usize> {
    (poly != 0).then(|| 63 - poly.leading_zeros() as usize)
}

/// Systematic CRC pre-transform on a `(K+q)`-bit base profile.
///
/// The `q` largest indices of `base` become dynamic frozen check positions;
/// the remaining `K` indices carry the message. The register runs MSB-first
/// over the message bits in natural index order with zero initialisation, and
/// check bit `j` (coefficient of `x^{q-1-j}`) sits at the `j`-th check
/// position. `poly` may include or omit the leading `x^q` term.
pub fn crc_code(base: &RateProfile, poly: u64, q: usize) -> Result<PolarCode> {
    if q == 0 {
        return PolarCode::new(base.clone(), PreTransform::identity(base));
    }
    if q >= base.k() {
        return Err(Error::Precondition(format!(
            "CRC length {q} leaves no message bits in a profile with K = {}",
            base.k()
        )));
    }
    if q > 63 {
        return Err(Error::Precondition("CRC length above 63".into()));
    }
    let generator = match poly_degree(poly) {
        Some(d) if d == q => poly,
        Some(d) if d < q => poly | (1 << q),
        _ => {
            return Err(Error::Precondition(format!(
                "generator 0x{poly:x} does not have degree {q}"
            )))
        }
    };
    let k = base.k() - q;
    let message: Vec<usize> = base.info()[..k].to_vec();
    let checks: Vec<usize> = base.info()[k..].to_vec();
    let profile = RateProfile::new(base.n(), message.iter().copied())?;

    // rem[t] = x^(q + t) mod g, for t = 0..k-1
    let low_mask = (1u64 << q) - 1;
    let mut rem = Vec::with_capacity(k);
    let mut state = generator & low_mask; // x^q mod g
    for _ in 0..k {
        rem.push(state);
        let carry = (state >> (q - 1)) & 1 == 1;
        state = (state << 1) & low_mask;
        if carry {
            state ^= generator & low_mask;
        }
    }

    let len = base.len();
    let mut rows = vec![Vec::new(); len];
    for (pos, &h) in message.iter().enumerate() {
        let r = rem[k - 1 - pos];
        let mut row = vec![h];
        for (j, &c) in checks.iter().enumerate() {
            if (r >> (q - 1 - j)) & 1 == 1 {
                row.push(c);
            }
        }
        rows[h] = row;
    }
    let t = PreTransform {
        n: base.n(),
        rows,
        kind: TransformKind::Crc,
    };
    PolarCode::new(profile, t)
}

/// Brings `T` into systematic form: `(T_sys)_I = RREF(T_I)`, `(T_sys)_F = 0`.
/// The row space of `T_I`, hence the codebook, is unchanged.
pub fn to_systematic(t: &PreTransform, profile: &RateProfile) -> Result<PreTransform> {
    t.validate(profile)?;
    if t.is_systematic(profile) {
        return Ok(t.clone());
    }
    let len = profile.len();
    let mut dense: Vec<Option<BitVector>> = vec![None; len];
    for &h in profile.info().iter().rev() {
        let mut row = BitVector::from_support(len, &t.rows[h]);
        // Later rows are already reduced, so clearing pivot columns left to
        // right never reintroduces an earlier pivot.
        let pivots: Vec<usize> = row
            .ones_in(h + 1, len)
            .filter(|&j| profile.is_info(j))
            .collect();
        for p in pivots {
            if row.get(p) {
                let reduced = dense[p].as_ref().expect("pivot row reduced");
                row.xor_assign(reduced);
            }
        }
        dense[h] = Some(row);
    }
    let rows = dense
        .into_iter()
        .map(|r| r.map(|r| r.ones_iter().collect()).unwrap_or_default())
        .collect();
    Ok(PreTransform {
        n: t.n,
        rows,
        kind: t.kind,
    })
}

/// Dynamic/static split of the frozen set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrozenStructure {
    pub dynamic: Vec<usize>,
    pub static_frozen: Vec<usize>,
    /// For each dynamic frozen bit `d`, the information rows `h < d` with
    /// `t_{h,d} = 1`.
    pub dependencies: BTreeMap<usize, Vec<usize>>,
}

impl FrozenStructure {
    pub fn is_dynamic(&self, d: usize) -> bool {
        self.dependencies.contains_key(&d)
    }
}

pub fn frozen_structure(t: &PreTransform, profile: &RateProfile) -> FrozenStructure {
    let cols = t.column_dependencies();
    let mut dynamic = Vec::new();
    let mut static_frozen = Vec::new();
    let mut dependencies = BTreeMap::new();
    for f in profile.frozen() {
        let deps: Vec<usize> = cols[f]
            .iter()
            .copied()
            .filter(|&h| profile.is_info(h))
            .collect();
        if deps.is_empty() {
            static_frozen.push(f);
        } else {
            dynamic.push(f);
            dependencies.insert(f, deps);
        }
    }
    FrozenStructure {
        dynamic,
        static_frozen,
        dependencies,
    }
}

/// `(|D|, N_XOR)` where `N_XOR` counts the XORs needed to evaluate every
/// dynamic frozen bit from its dependencies in systematic form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ComplexityMetrics {
    pub dynamic_frozen: usize,
    pub xor_ops: usize,
}

pub fn complexity_metrics(t: &PreTransform, profile: &RateProfile) -> Result<ComplexityMetrics> {
    let sys = to_systematic(t, profile)?;
    let fs = frozen_structure(&sys, profile);
    Ok(ComplexityMetrics {
        dynamic_frozen: fs.dynamic.len(),
        xor_ops: fs.dependencies.values().map(|d| d.len() - 1).sum(),
    })
}

/// A pre-transformed polar code `P(I, T)`, with its systematic form cached.
#[derive(Clone, Debug)]
pub struct PolarCode {
    profile: RateProfile,
    transform: PreTransform,
    systematic: PreTransform,
}

impl PolarCode {
    pub fn new(profile: RateProfile, transform: PreTransform) -> Result<Self> {
        transform.validate(&profile)?;
        let systematic = to_systematic(&transform, &profile)?;
        Ok(Self {
            profile,
            transform,
            systematic,
        })
    }

    pub fn plain(profile: RateProfile) -> Self {
        let transform = PreTransform::identity(&profile);
        Self {
            systematic: transform.clone(),
            transform,
            profile,
        }
    }

    pub fn row_merged(profile: RateProfile, merges: &RowMergeSet) -> Result<Self> {
        let t = row_merge_matrix(&profile, merges)?;
        Self::new(profile, t)
    }

    pub fn convolutional(profile: RateProfile, poly_octal: &str) -> Result<Self> {
        let p = parse_octal_polynomial(poly_octal)?;
        let t = conv_matrix(&profile, &p)?;
        Self::new(profile, t)
    }

    pub fn profile(&self) -> &RateProfile {
        &self.profile
    }

    pub fn transform(&self) -> &PreTransform {
        &self.transform
    }

    pub fn systematic(&self) -> &PreTransform {
        &self.systematic
    }

    pub fn n(&self) -> usize {
        self.profile.n()
    }

    pub fn len(&self) -> usize {
        self.profile.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k(&self) -> usize {
        self.profile.k()
    }

    pub fn frozen_structure(&self) -> FrozenStructure {
        frozen_structure(&self.systematic, &self.profile)
    }

    /// `u = v * T` with `v_I = m`.
    pub fn pretransform_message(&self, m: &BitVector) -> Result<BitVector> {
        if m.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                got: m.len(),
            });
        }
        let mut u = BitVector::zeros(self.len());
        for (pos, &h) in self.profile.info().iter().enumerate() {
            if m.get(pos) {
                for &j in self.transform.row(h) {
                    u.toggle(j);
                }
            }
        }
        Ok(u)
    }

    /// `c = (v * T) * G_N`.
    pub fn encode(&self, m: &BitVector) -> Result<BitVector> {
        let mut u = self.pretransform_message(m)?;
        polar_transform_in_place(&mut u)?;
        Ok(u)
    }

    /// Recovers `m` from a pre-transformed message `u` by forward
    /// substitution through the unit-diagonal columns of `T_I`.
    pub fn message_from_u(&self, u: &BitVector) -> Result<BitVector> {
        if u.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: u.len(),
            });
        }
        let info = self.profile.info();
        let mut m = BitVector::zeros(info.len());
        // contribution of already-solved rows to each column
        let mut acc = BitVector::zeros(self.len());
        for (pos, &h) in info.iter().enumerate() {
            let bit = u.get(h) ^ acc.get(h);
            if bit {
                m.set(pos, true);
                for &j in self.transform.row(h) {
                    acc.toggle(j);
                }
            }
        }
        Ok(m)
    }

    /// True iff `u` satisfies every frozen constraint `u_f = XOR v_h t_{h,f}`.
    pub fn satisfies_frozen(&self, u: &BitVector) -> bool {
        let cols = self.systematic.column_dependencies();
        self.profile.frozen().into_iter().all(|f| {
            let expected = cols[f].iter().fold(false, |acc, &h| acc ^ u.get(h));
            u.get(f) == expected
        })
    }
}
