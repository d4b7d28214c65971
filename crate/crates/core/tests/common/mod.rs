#![allow(dead_code)]

use polarforge::design::nr_rate_profile;
use polarforge::pretransform::{crc_code, CRC11_NR};
use polarforge::sim::{frame_rng, transmit, ChannelModel};
use polarforge::{BitVector, PolarCode, RateProfile, RowMergeSet};
use rand::Rng;

pub const MERGES_128_60: [(usize, usize); 17] = [
    (29, 34), (30, 35), (43, 70), (45, 50), (46, 73), (51, 68), (53, 74), (54, 69), (57, 66),
    (58, 67), (60, 65), (75, 100), (78, 81), (83, 104), (85, 98), (86, 112), (92, 97),
];

pub const MERGES_256_75: [(usize, usize); 24] = [
    (115, 133), (117, 134), (118, 129), (121, 131), (122, 135), (124, 130), (157, 162), (158, 163),
    (167, 201), (171, 198), (173, 178), (174, 208), (179, 197), (181, 194), (182, 202), (185, 204),
    (186, 195), (188, 193), (199, 232), (206, 209), (211, 240), (213, 226), (217, 228), (218, 225),
];

pub const MERGES_1024_512: [(usize, usize); 12] = [
    (720, 769), (720, 774), (736, 770), (736, 777), (808, 833), (808, 912), (816, 960), (834, 904),
    (836, 928), (840, 900), (848, 898), (864, 897),
];

pub fn profile_128_60() -> RateProfile {
    RateProfile::expand_minimal_set(&[29, 43, 71], 7).unwrap()
}

pub fn profile_256_75() -> RateProfile {
    RateProfile::expand_minimal_set(&[63, 115, 157, 167], 8).unwrap()
}

pub fn toy_code() -> PolarCode {
    let p = RateProfile::new(4, [5, 6, 7, 11, 13, 14, 15]).unwrap();
    PolarCode::row_merged(p, &RowMergeSet::new(vec![(5, 10), (6, 12)])).unwrap()
}

pub fn row_merged_128_60() -> PolarCode {
    PolarCode::row_merged(profile_128_60(), &RowMergeSet::new(MERGES_128_60.to_vec())).unwrap()
}

/// 5G NR reliability profile with `k + 11` information rows, the last 11 of
/// which carry CRC-11 checks.
pub fn nr_crc11(n: usize, k: usize) -> PolarCode {
    let base = nr_rate_profile(n, k + 11).unwrap();
    crc_code(&base, CRC11_NR, 11).unwrap()
}

/// Random message, its codeword and noisy channel LLRs.
pub fn noisy_frame(code: &PolarCode, ebn0_db: f64, seed: u64, frame: u64) -> (BitVector, Vec<f64>) {
    let mut rng = frame_rng(seed, 0, frame);
    let m = BitVector::from_bits((0..code.k()).map(|_| rng.random::<bool>()));
    let c = code.encode(&m).unwrap();
    let ch = ChannelModel::new(ebn0_db, code.k(), code.len()).unwrap();
    (m, transmit(&c, &ch, &mut rng))
}
