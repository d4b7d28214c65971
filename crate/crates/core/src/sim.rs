//! BPSK/AWGN Monte-Carlo simulation and union-bound analytics.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::decoder::{select_output, Algorithm, Decoder, DecoderConfig};
use crate::design::q_function;
use crate::error::{Error, Result};
use crate::pretransform::PolarCode;
use crate::weight_enum::SpectrumRecord;

/// LLR magnitude used for noiseless transmission.
pub const NOISELESS_LLR: f64 = 1.0e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub ebn0_db: f64,
    pub rate: f64,
    /// Skip the noise draw and emit `±NOISELESS_LLR`.
    #[serde(default)]
    pub noiseless: bool,
}

impl ChannelModel {
    pub fn new(ebn0_db: f64, k: usize, n: usize) -> Result<Self> {
        if k == 0 || n == 0 || k > n {
            return Err(Error::Precondition(format!("invalid code rate {k}/{n}")));
        }
        if !ebn0_db.is_finite() {
            return Err(Error::Precondition("Eb/N0 must be finite".into()));
        }
        Ok(Self {
            ebn0_db,
            rate: k as f64 / n as f64,
            noiseless: false,
        })
    }

    pub fn noiseless(k: usize, n: usize) -> Result<Self> {
        let mut ch = Self::new(0.0, k, n)?;
        ch.noiseless = true;
        Ok(ch)
    }

    /// Noise variance per real dimension, `1 / (2 R Eb/N0)`.
    pub fn sigma2(&self) -> f64 {
        1.0 / (2.0 * self.rate * 10f64.powf(self.ebn0_db / 10.0))
    }

    pub fn llr_scale(&self) -> f64 {
        2.0 / self.sigma2()
    }
}

/// BPSK `x = 1 - 2c` over AWGN; returns the channel LLRs `2y/σ²`.
pub fn transmit<R: Rng + ?Sized>(c: &BitVector, channel: &ChannelModel, rng: &mut R) -> Vec<f64> {
    let x = |i: usize| if c.get(i) { -1.0 } else { 1.0 };
    if channel.noiseless {
        return (0..c.len()).map(|i| x(i) * NOISELESS_LLR).collect();
    }
    let sigma = channel.sigma2().sqrt();
    let scale = channel.llr_scale();
    (0..c.len())
        .map(|i| {
            let z: f64 = rng.sample(StandardNormal);
            scale * (x(i) + sigma * z)
        })
        .collect()
}

/// Truncated union bound `Σ_w A_w Q(sqrt(2 w R Eb/N0))`.
pub fn union_bound(spectrum: &[SpectrumRecord], rate: f64, ebn0_db: f64) -> Result<f64> {
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    let mut sum = 0.0;
    for rec in spectrum {
        if rec.weight == 0 {
            return Err(Error::Precondition("spectrum must exclude weight 0".into()));
        }
        sum += rec.count as f64 * q_function((2.0 * rec.weight as f64 * rate * ebn0).sqrt());
    }
    Ok(sum)
}

/// Noise and message generator of one frame. Every `(seed, point, frame)`
/// triple owns an independent ChaCha8 stream.
pub fn frame_rng(seed: u64, point: usize, frame: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(point as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(frame);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub min_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
    pub workers: usize,
    pub algorithm: Algorithm,
    pub decoder: DecoderConfig,
    pub noiseless: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            min_errors: 1000,
            max_frames: 10_000_000,
            seed: 0,
            workers: 1,
            algorithm: Algorithm::Fsscl,
            decoder: DecoderConfig::default(),
            noiseless: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub ebn0_db: f64,
    pub frames: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    pub bler: f64,
    pub ber: f64,
    pub seconds: f64,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub decoder: DecoderConfig,
}

#[derive(Clone, Copy, Default)]
struct FrameOutcome {
    bit_errors: u64,
}

fn run_frame(
    decoder: &Decoder,
    channel: &ChannelModel,
    seed: u64,
    point: usize,
    frame: u64,
) -> Result<FrameOutcome> {
    let code = decoder.code();
    let mut rng = frame_rng(seed, point, frame);
    let m = BitVector::from_bits((0..code.k()).map(|_| rng.random::<bool>()));
    let c = code.encode(&m)?;
    let llr = transmit(&c, channel, &mut rng);
    let list = decoder.decode(&llr)?;
    let (_, m_hat) = select_output(&list, code)?;
    let mut diff = m_hat;
    diff.xor_assign(&m);
    Ok(FrameOutcome {
        bit_errors: diff.weight() as u64,
    })
}

/// Simulates every Eb/N0 point until `min_errors` block errors or
/// `max_frames` frames. Frames are decoded in parallel batches but counted
/// in frame order, so the result does not depend on `workers`.
pub fn monte_carlo(code: &PolarCode, snr_points: &[f64], config: &SimConfig) -> Result<Vec<SimRecord>> {
    if config.workers == 0 {
        return Err(Error::Precondition("at least one worker is required".into()));
    }
    let decoder = Decoder::new(code.clone(), config.decoder, config.algorithm)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    let batch = 64 * config.workers as u64;
    let mut records = Vec::with_capacity(snr_points.len());
    for (point, &ebn0_db) in snr_points.iter().enumerate() {
        let mut channel = ChannelModel::new(ebn0_db, code.k(), code.len())?;
        channel.noiseless = config.noiseless;
        let started = Instant::now();
        let (mut frames, mut block_errors, mut bit_errors) = (0u64, 0u64, 0u64);
        let done = |frames: u64, errors: u64| {
            frames >= config.max_frames || (config.min_errors > 0 && errors >= config.min_errors)
        };
        while !done(frames, block_errors) {
            let end = (frames + batch).min(config.max_frames);
            let outcomes: Vec<FrameOutcome> = pool.install(|| {
                (frames..end)
                    .into_par_iter()
                    .map(|f| run_frame(&decoder, &channel, config.seed, point, f))
                    .collect::<Result<_>>()
            })?;
            for o in outcomes {
                frames += 1;
                if o.bit_errors > 0 {
                    block_errors += 1;
                    bit_errors += o.bit_errors;
                }
                if done(frames, block_errors) {
                    break;
                }
            }
        }
        let info_bits = (frames * code.k() as u64).max(1);
        records.push(SimRecord {
            ebn0_db,
            frames,
            block_errors,
            bit_errors,
            bler: if frames == 0 { 0.0 } else { block_errors as f64 / frames as f64 },
            ber: bit_errors as f64 / info_bits as f64,
            seconds: started.elapsed().as_secs_f64(),
            seed: config.seed,
            algorithm: config.algorithm,
            decoder: config.decoder,
        });
    }
    Ok(records)
}

pub const CSV_HEADER: [&str; 6] = ["ebn0_db", "frames", "block_errors", "bler", "ber", "seconds"];

/// Writes one CSV row per record. Without `with_time` the `seconds` column
/// is left empty so that reruns produce identical bytes.
pub fn write_csv<W: Write>(records: &[SimRecord], out: W, with_time: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let seconds = if with_time {
            format!("{:.3}", r.seconds)
        } else {
            String::new()
        };
        w.write_record([
            r.ebn0_db.to_string(),
            r.frames.to_string(),
            r.block_errors.to_string(),
            format!("{:e}", r.bler),
            format!("{:e}", r.ber),
            seconds,
        ])?;
    }
    w.flush()?;
    Ok(())
}
