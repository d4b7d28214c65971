mod common;

use common::*;
use polarforge::decoder::{Algorithm, DecoderConfig};
use polarforge::sim::{monte_carlo, union_bound, write_csv, SimConfig};
use polarforge::weight_enum::{Provenance, SpectrumRecord};

fn config(workers: usize) -> SimConfig {
    SimConfig {
        min_errors: 20,
        max_frames: 3000,
        seed: 42,
        workers,
        algorithm: Algorithm::Fsscl,
        decoder: DecoderConfig::with_list_size(4),
        noiseless: false,
    }
}

fn csv(records: &[polarforge::sim::SimRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    write_csv(records, &mut out, false).unwrap();
    out
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let code = row_merged_128_60();
    let points = [1.5, 2.5];
    let one = monte_carlo(&code, &points, &config(1)).unwrap();
    for workers in [2, 3, 8] {
        let many = monte_carlo(&code, &points, &config(workers)).unwrap();
        assert_eq!(csv(&one), csv(&many), "{workers} workers");
    }
}

#[test]
fn frame_budget_is_exact() {
    let code = toy_code();
    let cfg = SimConfig { min_errors: 0, max_frames: 10, ..config(3) };
    let r = monte_carlo(&code, &[0.0, 1.0], &cfg).unwrap();
    assert!(r.iter().all(|r| r.frames == 10));
    let cfg = SimConfig { max_frames: 0, ..config(1) };
    let r = monte_carlo(&code, &[0.0], &cfg).unwrap();
    assert_eq!((r[0].frames, r[0].bler), (0, 0.0));
}

#[test]
fn stops_at_the_error_target() {
    let code = toy_code();
    let cfg = SimConfig { min_errors: 7, max_frames: 100_000, ..config(2) };
    let r = monte_carlo(&code, &[-2.0], &cfg).unwrap();
    assert_eq!(r[0].block_errors, 7);
    assert!(r[0].frames < 100_000);
}

#[test]
fn noiseless_channel_has_no_errors() {
    for (code, alg) in [(row_merged_128_60(), Algorithm::Fsscl), (nr_crc11(7, 60), Algorithm::Scl), (toy_code(), Algorithm::Sc)] {
        let cfg = SimConfig { min_errors: 0, max_frames: 200, noiseless: true, algorithm: alg, ..config(1) };
        let r = monte_carlo(&code, &[-5.0], &cfg).unwrap();
        assert_eq!((r[0].block_errors, r[0].bit_errors), (0, 0));
    }
}

#[test]
fn error_rates_are_consistent() {
    let code = row_merged_128_60();
    let cfg = SimConfig { min_errors: 0, max_frames: 2000, ..config(1) };
    let r = monte_carlo(&code, &[0.5, 1.5, 2.5], &cfg).unwrap();
    for rec in &r {
        assert!(rec.ber <= rec.bler);
        assert!(rec.bit_errors >= rec.block_errors);
    }
    assert!(r[0].bler > r[2].bler);
}

#[test]
fn larger_lists_do_not_hurt() {
    let code = row_merged_128_60();
    let bler = |l| {
        let cfg = SimConfig { min_errors: 0, max_frames: 2000, decoder: DecoderConfig::with_list_size(l), ..config(1) };
        monte_carlo(&code, &[2.0], &cfg).unwrap()[0].block_errors
    };
    let (e1, e4, e16) = (bler(1), bler(4), bler(16));
    assert!(e1 > e4 && e4 >= e16, "{e1} {e4} {e16}");
}

#[test]
fn csv_layout() {
    let code = toy_code();
    let cfg = SimConfig { min_errors: 0, max_frames: 5, ..config(1) };
    let r = monte_carlo(&code, &[1.0], &cfg).unwrap();
    let text = String::from_utf8(csv(&r)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ebn0_db,frames,block_errors,bler,ber,seconds"));
    assert!(lines.next().unwrap().starts_with("1,5,"));
    let mut timed = Vec::new();
    write_csv(&r, &mut timed, true).unwrap();
    let timed = String::from_utf8(timed).unwrap();
    assert!(!timed.lines().nth(1).unwrap().ends_with(','));
}

#[test]
fn union_bound_decreases_with_snr() {
    let spectrum = [
        SpectrumRecord { weight: 16, count: 2328, provenance: Provenance::Enumerated },
        SpectrumRecord { weight: 18, count: 1114, provenance: Provenance::Enumerated },
    ];
    let rate = 60.0 / 128.0;
    let values: Vec<f64> = (0..6).map(|i| union_bound(&spectrum, rate, 2.0 + 0.5 * i as f64).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    let single = union_bound(&spectrum[..1], rate, 4.0).unwrap();
    assert!(single < values[4]);
}
