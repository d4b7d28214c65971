//! Rate-profile construction (Gaussian-approximation density evolution, the
//! 5G reliability sequence, Reed-Muller) and row-merge selection.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::{check_depth, row_weight, RateProfile, DEFAULT_MAX_DEPTH};
use crate::pretransform::{row_merge_matrix, RowMergeSet};
use crate::weight_enum::{classify_cosets, info_columns, is_core_row, CosetCount, CosetEnumerator};

const NR_SEQUENCE: &str = include_str!("../data/nr_reliability_sequence.txt");

/// Synthetic channels ordered from most (`q[0]`) to least reliable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelRanking {
    pub q: Vec<usize>,
    /// SC bit error probability per channel index.
    pub error_probability: Vec<f64>,
    pub design_snr_db: f64,
}

impl ChannelRanking {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Profile made of the `k` best channels.
    pub fn top(&self, k: usize) -> Result<RateProfile> {
        if k > self.q.len() {
            return Err(Error::Precondition(format!(
                "K = {k} exceeds N = {}",
                self.q.len()
            )));
        }
        let n = self.q.len().trailing_zeros() as usize;
        RateProfile::new(n, self.q[..k].iter().copied())
    }
}

fn phi_ln(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 10.0 {
        -0.4527 * x.powf(0.86) + 0.0218
    } else {
        0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }
}

/// Inverse of `phi` given `ln(phi(x))`, by bisection.
fn phi_inv_ln(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while phi_ln(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi_ln(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Mean LLR after a check-node combination of two channels with mean `m`.
fn check_node_mean(m: f64) -> f64 {
    let l = phi_ln(m);
    let p = l.exp();
    // 1 - (1 - phi)^2 = phi (2 - phi)
    phi_inv_ln(l + (2.0 - p).ln())
}

/// `Q(x)` via the complementary error function.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Gaussian-approximation density evolution on BPSK/AWGN at the given
/// `E_s/N_0`. The first polarization step acts on the most significant
/// index bit.
pub fn ga_density_evolution(n: usize, design_snr_db: f64) -> Result<ChannelRanking> {
    check_depth(n, DEFAULT_MAX_DEPTH)?;
    let es_n0 = 10f64.powf(design_snr_db / 10.0);
    let mut means = vec![4.0 * es_n0];
    for _ in 0..n {
        let mut next = Vec::with_capacity(means.len() * 2);
        for &m in &means {
            next.push(check_node_mean(m));
            next.push(2.0 * m);
        }
        means = next;
    }
    let error_probability: Vec<f64> = means.iter().map(|&m| q_function((m / 2.0).sqrt())).collect();
    let mut q: Vec<usize> = (0..means.len()).collect();
    q.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
    Ok(ChannelRanking {
        q,
        error_probability,
        design_snr_db,
    })
}

/// The `K` most reliable channels under GA density evolution.
pub fn design_rate_profile(n: usize, k: usize, design_snr_db: f64) -> Result<RateProfile> {
    ga_density_evolution(n, design_snr_db)?.top(k)
}

fn nr_sequence() -> &'static [usize] {
    static SEQ: OnceLock<Vec<usize>> = OnceLock::new();
    SEQ.get_or_init(|| {
        NR_SEQUENCE
            .lines()
            .filter(|l| !l.starts_with('#'))
            .flat_map(str::split_whitespace)
            .map(|t| t.parse().expect("reliability sequence entry"))
            .collect()
    })
}

/// Channel ranking from the 3GPP TS 38.212 reliability sequence restricted
/// to `N = 2^n <= 1024`.
pub fn nr_ranking(n: usize) -> Result<ChannelRanking> {
    if n > 10 {
        return Err(Error::DepthTooLarge { n, max: 10 });
    }
    let len = 1usize << n;
    let mut q: Vec<usize> = nr_sequence().iter().copied().filter(|&i| i < len).collect();
    q.reverse();
    Ok(ChannelRanking {
        error_probability: vec![f64::NAN; len],
        q,
        design_snr_db: f64::NAN,
    })
}

/// 5G rate-profile with `k` information positions (message plus any CRC).
pub fn nr_rate_profile(n: usize, k: usize) -> Result<RateProfile> {
    nr_ranking(n)?.top(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeMode {
    Full,
    /// Only the two smallest unused candidate frozen rows per coset.
    Simplified,
}

/// Minimum-distance statement for a code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DminBound {
    pub value: usize,
    /// True if `value` is the exact minimum distance, false if only a
    /// lower bound.
    pub exact: bool,
}

/// Outcome of [`merge_rows`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeResult {
    pub merges: RowMergeSet,
    pub w_min: usize,
    /// `A_{w_min}` of the final code; zero means every `w_min`-weight
    /// codeword was eliminated.
    pub a_wmin: u128,
    pub iterations: usize,
}

impl MergeResult {
    pub fn eliminated(&self) -> bool {
        self.a_wmin == 0
    }

    pub fn dmin(&self) -> DminBound {
        if self.eliminated() {
            DminBound {
                value: self.w_min + 1,
                exact: false,
            }
        } else {
            DminBound {
                value: self.w_min,
                exact: true,
            }
        }
    }
}

/// Per-coset counts of the current merge set, refreshed after each commit.
struct MergeState<'p> {
    profile: &'p RateProfile,
    columns: Vec<Vec<usize>>,
    leaders: Vec<usize>,
    /// Last frozen non-core index `f_i^*` per leader (or the leader itself).
    last: Vec<usize>,
    counts: Vec<u128>,
}

impl<'p> MergeState<'p> {
    fn new(profile: &'p RateProfile, merges: &RowMergeSet) -> Result<Self> {
        let t = row_merge_matrix(profile, merges)?;
        let columns = info_columns(&t, profile);
        let w_min = profile.w_min();
        let leaders: Vec<usize> = profile
            .info()
            .iter()
            .copied()
            .filter(|&i| row_weight(i) == w_min)
            .collect();
        let last = leaders
            .iter()
            .map(|&i| {
                (i + 1..profile.len())
                    .rev()
                    .find(|&f| !profile.is_info(f) && !is_core_row(i, f))
                    .unwrap_or(i)
            })
            .collect();
        let mut state = Self {
            profile,
            columns,
            leaders,
            last,
            counts: Vec::new(),
        };
        state.counts = state.recount_all()?;
        Ok(state)
    }

    fn recount_all(&self) -> Result<Vec<u128>> {
        let e = CosetEnumerator::new(self.profile.info_mask(), &self.columns);
        self.leaders.par_iter().map(|&i| e.count(i)).collect()
    }

    fn total(&self) -> Result<u128> {
        self.counts
            .iter()
            .try_fold(0u128, |acc, &c| acc.checked_add(c))
            .ok_or(Error::CountOverflow)
    }

    /// Indices into `leaders` whose count can change when `t_{i,f}` is set.
    fn affected(&self, i: usize, f: usize) -> impl Iterator<Item = usize> + '_ {
        self.leaders
            .iter()
            .enumerate()
            .filter(move |&(pos, &l)| l <= i && f <= self.last[pos])
            .map(|(pos, _)| pos)
    }

    /// `A_{w_min}` with `(i, f)` added, or `None` once it exceeds `limit`.
    fn evaluate(&self, i: usize, f: usize, base: u128, limit: u128) -> Result<Option<u128>> {
        let e = CosetEnumerator::new(self.profile.info_mask(), &self.columns).with_extra_merge(i, f);
        let affected: Vec<usize> = self.affected(i, f).collect();
        let untouched = affected
            .iter()
            .try_fold(base, |acc, &pos| acc.checked_sub(self.counts[pos]))
            .ok_or(Error::CountOverflow)?;
        let mut total = untouched;
        for pos in affected {
            if total > limit {
                return Ok(None);
            }
            match e.count_bounded(self.leaders[pos], limit - total)? {
                CosetCount::Exact(c) => total += c,
                CosetCount::Exceeded => return Ok(None),
            }
        }
        Ok((total <= limit).then_some(total))
    }

    fn commit(&mut self, i: usize, f: usize) -> Result<()> {
        let affected: Vec<usize> = self.affected(i, f).collect();
        self.columns[f].push(i);
        self.columns[f].sort_unstable();
        let e = CosetEnumerator::new(self.profile.info_mask(), &self.columns);
        let updated: Vec<Result<u128>> = affected
            .par_iter()
            .map(|&pos| e.count(self.leaders[pos]))
            .collect();
        for (pos, c) in affected.into_iter().zip(updated) {
            self.counts[pos] = c?;
        }
        Ok(())
    }
}

/// Greedy row-merge selection. Starting from `initial`, each round adds the
/// pair `(i, f)` with the lowest resulting `A_{w_min}` (first in ascending
/// `(i, f)` order on ties) as long as it strictly improves. Candidates are
/// first restricted to weight-increasing frozen rows `F_i^*`, then widened
/// by `F_i^o`. The loop stops as soon as every `w_min`-weight codeword is
/// eliminated.
pub fn merge_rows_from(
    profile: &RateProfile,
    mode: MergeMode,
    initial: RowMergeSet,
) -> Result<MergeResult> {
    let mut merges = initial;
    let classes = classify_cosets(profile);
    let mut state = MergeState::new(profile, &merges)?;
    let mut best = state.total()?;
    let mut used = vec![false; profile.len()];
    for &(_, d) in merges.pairs() {
        used[d] = true;
    }
    let mut increase_weight = true;
    let mut iterations = 0;
    while best > 0 {
        let mut candidates = Vec::new();
        for &i in &classes.i_wmin_star {
            let mut pool: Vec<usize> = classes.f_star[&i].clone();
            if !increase_weight {
                pool.extend(classes.f_circ[&i].iter().copied());
                pool.sort_unstable();
            }
            pool.retain(|&f| !used[f]);
            if mode == MergeMode::Simplified {
                pool.truncate(2);
            }
            candidates.extend(pool.into_iter().map(|f| (i, f)));
        }
        let shared = AtomicU64::new(u64::try_from(best - 1).unwrap_or(u64::MAX));
        let results: Vec<Result<Option<u128>>> = candidates
            .par_iter()
            .map(|&(i, f)| {
                let limit = u128::from(shared.load(Ordering::Relaxed));
                let r = state.evaluate(i, f, best, limit)?;
                if let Some(a) = r {
                    shared.fetch_min(u64::try_from(a).unwrap_or(u64::MAX), Ordering::Relaxed);
                }
                Ok(r)
            })
            .collect();
        let mut choice: Option<((usize, usize), u128)> = None;
        for (&cand, r) in candidates.iter().zip(results) {
            if let Some(a) = r? {
                if choice.is_none_or(|(_, b)| a < b) {
                    choice = Some((cand, a));
                }
            }
        }
        match choice {
            Some(((i, f), a)) if a < best => {
                state.commit(i, f)?;
                merges.insert(i, f);
                used[f] = true;
                best = a;
                iterations += 1;
                debug_assert_eq!(state.total()?, best);
            }
            _ if increase_weight => increase_weight = false,
            _ => break,
        }
    }
    Ok(MergeResult {
        merges,
        w_min: classes.w_min,
        a_wmin: best,
        iterations,
    })
}

pub fn merge_rows(profile: &RateProfile, mode: MergeMode) -> Result<MergeResult> {
    merge_rows_from(profile, mode, RowMergeSet::default())
}

/// Output of [`design_nondecreasing`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignResult {
    pub profile: RateProfile,
    pub merges: RowMergeSet,
    pub w_min: usize,
    pub a_wmin: u128,
    /// Number of minimum-weight generators frozen.
    pub kappa: usize,
    pub dmin: DminBound,
}

/// Non-decreasing row-merged design. While the certified minimum distance is
/// below `dmin_target`, the largest minimum-weight information row is frozen,
/// the next channel of `ranking` is unfrozen and the merges are reselected.
///
/// A code with `A_{w_min} > 0` has `d_min = w_min` exactly; once all
/// `w_min`-weight codewords are eliminated only `d_min > w_min` is certified.
pub fn design_nondecreasing(
    ranking: &ChannelRanking,
    k: usize,
    dmin_target: usize,
    mode: MergeMode,
) -> Result<DesignResult> {
    let len = ranking.len();
    let mut profile = ranking.top(k)?;
    let mut merged = merge_rows(&profile, mode)?;
    let mut kappa = 0;
    while merged.dmin().value < dmin_target {
        if k + kappa >= len {
            return Err(Error::DesignFailure { kappa });
        }
        let w_min = profile.w_min();
        let last = *profile
            .info()
            .iter()
            .rev()
            .find(|&&i| row_weight(i) == w_min)
            .expect("non-empty profile");
        profile = profile.with_swapped(last, ranking.q[k + kappa])?;
        merged = merge_rows(&profile, mode)?;
        kappa += 1;
    }
    Ok(DesignResult {
        dmin: merged.dmin(),
        w_min: merged.w_min,
        a_wmin: merged.a_wmin,
        merges: merged.merges,
        profile,
        kappa,
    })
}

/// Minimum distance implied by the rate-profile alone: exact `w_min` for
/// decreasing profiles (any upper-triangular pre-transform), otherwise
/// `w_min` as a lower bound.
pub fn theoretical_dmin(profile: &RateProfile) -> DminBound {
    DminBound {
        value: profile.w_min(),
        exact: profile.is_decreasing(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_inverse_roundtrip() {
        for &x in &[0.05, 0.5, 3.0, 9.9, 10.5, 50.0, 800.0, 5000.0] {
            let back = phi_inv_ln(phi_ln(x));
            assert!((back - x).abs() < 1e-6 * x.max(1.0), "{x} -> {back}");
        }
    }

    #[test]
    fn polarization_direction() {
        for snr in [-5.0, 0.0, 3.0, 10.0] {
            let r = ga_density_evolution(1, snr).unwrap();
            assert_eq!(r.q, vec![1, 0]);
            assert!(r.error_probability[1] < r.error_probability[0]);
        }
    }

    #[test]
    fn ranking_is_a_permutation_with_sorted_errors() {
        let r = ga_density_evolution(8, 1.0).unwrap();
        let mut q = r.q.clone();
        q.sort_unstable();
        assert_eq!(q, (0..256).collect::<Vec<_>>());
        for w in r.q.windows(2) {
            assert!(r.error_probability[w[0]] <= r.error_probability[w[1]]);
        }
    }

    #[test]
    fn extreme_profiles() {
        assert_eq!(design_rate_profile(5, 32, 1.0).unwrap().k(), 32);
        assert_eq!(design_rate_profile(5, 0, 1.0).unwrap().k(), 0);
        assert!(design_rate_profile(5, 33, 1.0).is_err());
    }

    #[test]
    fn nr_sequence_is_complete() {
        let q = nr_ranking(10).unwrap().q;
        assert_eq!(q.len(), 1024);
        assert_eq!(q[0], 1023);
        assert_eq!(q[1023], 0);
        let mut s = q.clone();
        s.sort_unstable();
        assert_eq!(s, (0..1024).collect::<Vec<_>>());
        assert_eq!(nr_ranking(3).unwrap().q.len(), 8);
    }

    #[test]
    fn nothing_to_merge() {
        // all w_min rows are non pre-transformable
        let p = RateProfile::full(4).unwrap();
        let r = merge_rows(&p, MergeMode::Full).unwrap();
        assert!(r.merges.is_empty());
        assert_eq!(r.a_wmin, 16);
    }

    #[test]
    fn theoretical_dmin_flags() {
        let rm = RateProfile::reed_muller(2, 6).unwrap();
        assert_eq!(
            theoretical_dmin(&rm),
            DminBound {
                value: 16,
                exact: true
            }
        );
        let odd = RateProfile::new(3, [5]).unwrap();
        assert!(!theoretical_dmin(&odd).exact);
    }
}
