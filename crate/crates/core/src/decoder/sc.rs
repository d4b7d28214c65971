//! Leaf-level SC and SCL decoding. Every path carries its own decoded-bit
//! history, from which dynamic frozen values are evaluated directly.

use super::{f_func, g_func, h_combine, hd, rank_paths, DecodedPath, DecoderConfig, FVariant};
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::pretransform::PolarCode;

fn check_llr(llr: &[f64], code: &PolarCode) -> Result<()> {
    if llr.len() != code.len() {
        return Err(Error::DimensionMismatch {
            expected: code.len(),
            got: llr.len(),
        });
    }
    Ok(())
}

/// Per-bit frozen rule: `None` for information bits, otherwise the
/// information rows whose XOR gives the frozen value.
fn frozen_rules(code: &PolarCode) -> Vec<Option<Vec<usize>>> {
    let fs = code.frozen_structure();
    (0..code.len())
        .map(|i| {
            if code.profile().is_info(i) {
                None
            } else {
                Some(fs.dependencies.get(&i).cloned().unwrap_or_default())
            }
        })
        .collect()
}

struct Sc<'a> {
    rules: &'a [Option<Vec<usize>>],
    variant: FVariant,
    u: Vec<u8>,
}

impl Sc<'_> {
    fn node(&mut self, alpha: &[f64], start: usize) -> Vec<u8> {
        if alpha.len() == 1 {
            let bit = match &self.rules[start] {
                None => hd(alpha[0]),
                Some(deps) => deps.iter().fold(0, |acc, &h| acc ^ self.u[h]),
            };
            self.u[start] = bit;
            return vec![bit];
        }
        let half = alpha.len() / 2;
        let (a, b) = alpha.split_at(half);
        let left_alpha: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| f_func(self.variant, x, y)).collect();
        let left = self.node(&left_alpha, start);
        let right_alpha: Vec<f64> = a
            .iter()
            .zip(b)
            .zip(&left)
            .map(|((&x, &y), &beta)| g_func(x, y, beta))
            .collect();
        let right = self.node(&right_alpha, start + half);
        h_combine(&left, &right)
    }
}

/// Successive-cancellation decoding; returns the decoded `u`.
pub fn sc_decode(llr: &[f64], code: &PolarCode, variant: FVariant) -> Result<BitVector> {
    check_llr(llr, code)?;
    let rules = frozen_rules(code);
    let mut sc = Sc {
        rules: &rules,
        variant,
        u: vec![0; code.len()],
    };
    sc.node(llr, 0);
    Ok(BitVector::from_bits(sc.u.iter().map(|&b| b == 1)))
}

#[derive(Clone)]
struct Path {
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<u8>>,
    beta_left: Vec<Vec<u8>>,
    u: Vec<u8>,
    pm: f64,
}

struct Scl<'a> {
    rules: &'a [Option<Vec<usize>>],
    variant: FVariant,
    list_size: usize,
    paths: Vec<Path>,
}

impl Scl<'_> {
    fn node(&mut self, layer: usize, start: usize) {
        if layer == 0 {
            self.leaf(start);
            return;
        }
        let half = 1 << (layer - 1);
        let variant = self.variant;
        for p in &mut self.paths {
            let (a, b) = p.alpha[layer].split_at(half);
            let next: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| f_func(variant, x, y)).collect();
            p.alpha[layer - 1] = next;
        }
        self.node(layer - 1, start);
        for p in &mut self.paths {
            let left = std::mem::take(&mut p.beta[layer - 1]);
            let (a, b) = p.alpha[layer].split_at(half);
            let next: Vec<f64> = a
                .iter()
                .zip(b)
                .zip(&left)
                .map(|((&x, &y), &beta)| g_func(x, y, beta))
                .collect();
            p.alpha[layer - 1] = next;
            p.beta_left[layer - 1] = left;
        }
        self.node(layer - 1, start + half);
        for p in &mut self.paths {
            p.beta[layer] = h_combine(&p.beta_left[layer - 1], &p.beta[layer - 1]);
        }
    }

    fn leaf(&mut self, i: usize) {
        match &self.rules[i] {
            Some(deps) => {
                for p in &mut self.paths {
                    let a = p.alpha[0][0];
                    let bit = deps.iter().fold(0, |acc, &h| acc ^ p.u[h]);
                    if bit != hd(a) {
                        p.pm += a.abs();
                    }
                    p.u[i] = bit;
                    p.beta[0] = vec![bit];
                }
            }
            None => {
                let mut candidates = Vec::with_capacity(2 * self.paths.len());
                for (l, p) in self.paths.iter().enumerate() {
                    let a = p.alpha[0][0];
                    candidates.push((l, hd(a), p.pm));
                    candidates.push((l, 1 - hd(a), p.pm + a.abs()));
                }
                candidates.sort_by(|x, y| x.2.total_cmp(&y.2));
                candidates.truncate(self.list_size);
                let old = std::mem::take(&mut self.paths);
                self.paths = candidates
                    .into_iter()
                    .map(|(l, bit, pm)| {
                        let mut p = old[l].clone();
                        p.u[i] = bit;
                        p.beta[0] = vec![bit];
                        p.pm = pm;
                        p
                    })
                    .collect();
            }
        }
    }
}

/// List SC decoding with leaf-by-leaf path splitting. Returns the surviving
/// paths sorted by ascending path metric.
pub fn scl_decode(llr: &[f64], code: &PolarCode, config: &DecoderConfig) -> Result<Vec<DecodedPath>> {
    config.validate()?;
    check_llr(llr, code)?;
    let rules = frozen_rules(code);
    let n = code.n();
    let mut alpha = vec![Vec::new(); n + 1];
    alpha[n] = llr.to_vec();
    let root = Path {
        alpha,
        beta: vec![Vec::new(); n + 1],
        beta_left: vec![Vec::new(); n + 1],
        u: vec![0; code.len()],
        pm: 0.0,
    };
    let mut scl = Scl {
        rules: &rules,
        variant: config.f_variant,
        list_size: config.list_size,
        paths: vec![root],
    };
    scl.node(n, 0);
    let mut out: Vec<DecodedPath> = scl
        .paths
        .into_iter()
        .map(|p| DecodedPath {
            u: BitVector::from_bits(p.u.iter().map(|&b| b == 1)),
            pm: p.pm,
        })
        .collect();
    rank_paths(&mut out);
    Ok(out)
}
