mod common;

use common::*;
use polarforge::decoder::{
    build_pft, sc_decode, scl_decode, select_output, Algorithm, DecodedPath, Decoder,
    DecoderConfig, FVariant, FastDecoder, NodeKind, SpecialNodes,
};
use polarforge::polar::polar_transform;
use polarforge::{BitVector, PolarCode, RateProfile};

fn sorted(list: &[DecodedPath]) -> Vec<&DecodedPath> {
    let mut v: Vec<_> = list.iter().collect();
    v.sort_by(|x, y| x.pm.total_cmp(&y.pm).then_with(|| x.u.to_bools().cmp(&y.u.to_bools())));
    v
}

fn same_list(a: &[DecodedPath], b: &[DecodedPath]) -> bool {
    a.len() == b.len()
        && sorted(a)
            .iter()
            .zip(sorted(b))
            .all(|(x, y)| x.u == y.u && (x.pm - y.pm).abs() <= 1e-9)
}

fn mismatches(code: &PolarCode, ebn0: f64, frames: u64, cfg: DecoderConfig) -> usize {
    let fast = FastDecoder::new(code, cfg).unwrap();
    (0..frames)
        .filter(|&f| {
            let (_, llr) = noisy_frame(code, ebn0, 11 + cfg.list_size as u64, f);
            !same_list(&scl_decode(&llr, code, &cfg).unwrap(), &fast.decode(&llr).unwrap())
        })
        .count()
}

fn codes() -> Vec<(&'static str, PolarCode)> {
    vec![
        ("toy", toy_code()),
        ("row-merged 128", row_merged_128_60()),
        ("nr crc11 128", nr_crc11(7, 60)),
        ("pac 128", PolarCode::convolutional(profile_128_60(), "1047").unwrap()),
    ]
}

#[test]
fn fast_matches_leaf_level_list_decoding_under_minsum() {
    for (name, code) in codes() {
        for l in [1, 2, 4, 8] {
            let bad = mismatches(&code, 2.0, 100, DecoderConfig::with_list_size(l));
            assert_eq!(bad, 0, "{name}, L = {l}");
        }
    }
}

#[test]
fn fast_matches_with_partial_pruning() {
    let code = row_merged_128_60();
    for special in [
        SpecialNodes::none(),
        SpecialNodes { max_size: 4, ..SpecialNodes::default() },
        SpecialNodes { spc: false, rep: false, ..SpecialNodes::default() },
    ] {
        let cfg = DecoderConfig { list_size: 4, special_nodes: special, ..DecoderConfig::default() };
        assert_eq!(mismatches(&code, 2.0, 50, cfg), 0);
    }
}

#[test]
fn unpruned_fast_decoder_matches_under_boxplus() {
    let cfg = DecoderConfig {
        list_size: 4,
        f_variant: FVariant::BoxPlus,
        special_nodes: SpecialNodes::none(),
        flip_threshold: None,
    };
    assert_eq!(mismatches(&row_merged_128_60(), 2.0, 50, cfg), 0);
}

#[test]
fn sc_equals_list_of_one() {
    for (_, code) in codes() {
        let cfg = DecoderConfig::with_list_size(1);
        for f in 0..250 {
            let (_, llr) = noisy_frame(&code, 1.5, 5, f);
            let sc = sc_decode(&llr, &code, FVariant::MinSum).unwrap();
            assert_eq!(scl_decode(&llr, &code, &cfg).unwrap()[0].u, sc);
        }
    }
}

#[test]
fn noiseless_frames_decode_exactly() {
    for (_, code) in codes() {
        for alg in [Algorithm::Sc, Algorithm::Scl, Algorithm::Fsscl] {
            for l in [1, 3, 8] {
                for variant in [FVariant::MinSum, FVariant::BoxPlus] {
                    let cfg = DecoderConfig { list_size: l, f_variant: variant, ..Default::default() };
                    let dec = Decoder::new(code.clone(), cfg, alg).unwrap();
                    for f in 0..5 {
                        let (m, llr) = noisy_frame(&code, 2.0, 3, f);
                        let c = code.encode(&m).unwrap();
                        let clean: Vec<f64> =
                            (0..code.len()).map(|i| if c.get(i) { -30.0 } else { 30.0 }).collect();
                        assert!(llr.len() == clean.len());
                        let list = dec.decode(&clean).unwrap();
                        let (u, m_hat) = select_output(&list, &code).unwrap();
                        assert_eq!(m_hat, m);
                        assert_eq!(polar_transform(&u).unwrap(), c);
                        assert_eq!(list[0].pm, 0.0);
                    }
                }
            }
        }
    }
}

#[test]
fn every_path_satisfies_frozen_constraints() {
    for (_, code) in codes() {
        let cfg = DecoderConfig::with_list_size(8);
        let fast = FastDecoder::new(&code, cfg).unwrap();
        for f in 0..40 {
            let (_, llr) = noisy_frame(&code, 0.5, 9, f);
            for list in [fast.decode(&llr).unwrap(), scl_decode(&llr, &code, &cfg).unwrap()] {
                assert_eq!(list.len(), 8);
                assert!(list.windows(2).all(|w| w[0].pm <= w[1].pm));
                assert!(list.iter().all(|p| code.satisfies_frozen(&p.u) && p.pm >= 0.0));
            }
        }
    }
}

#[test]
fn repetition_node_is_maximum_likelihood() {
    let code = PolarCode::plain(RateProfile::new(3, [7]).unwrap());
    let fast = FastDecoder::new(&code, DecoderConfig::with_list_size(1)).unwrap();
    assert_eq!(fast.tree().nodes()[0].kind, NodeKind::Rep);
    for f in 0..200 {
        let (_, llr) = noisy_frame(&code, -1.0, 21, f);
        let sum: f64 = llr.iter().sum();
        let ml = sum < 0.0;
        let list = fast.decode(&llr).unwrap();
        assert_eq!(list[0].u.get(7), ml);
    }
}

#[test]
fn path_metric_penalises_sign_disagreement() {
    let code = PolarCode::plain(RateProfile::new(0, []).unwrap());
    let list = scl_decode(&[-2.5], &code, &DecoderConfig::with_list_size(4)).unwrap();
    assert_eq!(list.len(), 1);
    assert_eq!(list[0].pm, 2.5);
    assert_eq!(list[0].u, BitVector::zeros(1));
}

#[test]
fn toy_code_tree_and_extraction() {
    let code = toy_code();
    let tree = build_pft(code.profile(), &code.frozen_structure(), SpecialNodes::default());
    let spc = &tree.nodes()[tree.node_of_bit(5)];
    assert_eq!((spc.v, spc.kind), (4, NodeKind::Spc));
    assert_eq!(tree.node_of_bit(6), tree.node_of_bit(5));
    let deps = code.frozen_structure().dependencies;
    assert_eq!(deps[&10], vec![5]);
    assert_eq!(deps[&12], vec![6]);
    assert_eq!(tree.nodes()[tree.node_of_bit(10)].v, 5);
    assert_eq!(tree.nodes()[tree.node_of_bit(12)].v, 6);
}

#[test]
fn rejects_wrong_lengths() {
    let code = toy_code();
    let fast = FastDecoder::new(&code, DecoderConfig::default()).unwrap();
    assert!(fast.decode(&[0.0; 8]).is_err());
    assert!(scl_decode(&[0.0; 8], &code, &DecoderConfig::default()).is_err());
    assert!(sc_decode(&[0.0; 8], &code, FVariant::MinSum).is_err());
    assert!(FastDecoder::new(&code, DecoderConfig::with_list_size(0)).is_err());
}

#[test]
fn flip_threshold() {
    let code = row_merged_128_60();
    let exact = DecoderConfig::with_list_size(8);
    let loose = DecoderConfig { flip_threshold: Some(1e300), ..exact };
    let tight = DecoderConfig { flip_threshold: Some(0.0), ..exact };
    let a = FastDecoder::new(&code, exact).unwrap();
    let b = FastDecoder::new(&code, loose).unwrap();
    let c = FastDecoder::new(&code, tight).unwrap();
    for f in 0..50 {
        let (_, llr) = noisy_frame(&code, 2.0, 5, f);
        let want = a.decode(&llr).unwrap();
        assert!(same_list(&want, &b.decode(&llr).unwrap()));
        let pruned = c.decode(&llr).unwrap();
        assert!(!pruned.is_empty());
        for p in &pruned {
            assert!(code.satisfies_frozen(&p.u));
        }
    }
    let bad = DecoderConfig { flip_threshold: Some(-1.0), ..exact };
    assert!(FastDecoder::new(&code, bad).is_err());
}
