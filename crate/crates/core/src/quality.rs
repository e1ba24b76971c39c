//! Statistical battery for keystream bytes, plus collision and avalanche scans
//! of the hash.

use std::collections::{HashMap, HashSet};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::oneway::{hash8, BaseConfig, Digest256, KeyBlock};

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const MIN_BITS: usize = 2048;
pub const MIN_BYTES: usize = 4096;

/// Outcome of one statistical test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub test_name: &'static str,
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub pass: bool,
    pub sample_bits: usize,
}

impl TestReport {
    fn new(test_name: &'static str, statistic: f64, p_value: f64, alpha: f64, sample_bits: usize) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestReport {
            test_name,
            statistic,
            p_value,
            alpha,
            pass: p_value >= alpha,
            sample_bits,
        }
    }
}

fn need(test: &'static str, minimum: usize, got: usize, unit: &'static str) -> Result<()> {
    if got < minimum {
        return Err(Error::SampleTooSmall {
            test,
            minimum,
            got,
            unit,
        });
    }
    Ok(())
}

/// Bits of `bytes`, most significant bit of each byte first.
fn bits(bytes: &[u8]) -> impl Iterator<Item = bool> + Clone + '_ {
    bytes.iter().flat_map(|&b| (0..8).rev().map(move |i| b >> i & 1 == 1))
}

fn two_sided_normal(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Frequency of ones: `|Σ(2b − 1)| / √n` against the normal law.
pub fn monobit(bytes: &[u8], alpha: f64) -> Result<TestReport> {
    let n = 8 * bytes.len();
    need("monobit", MIN_BITS, n, "bits")?;
    let ones: usize = bytes.iter().map(|b| b.count_ones() as usize).sum();
    let s = (2.0 * ones as f64 - n as f64) / (n as f64).sqrt();
    Ok(TestReport::new("monobit", s, two_sided_normal(s), alpha, n))
}

/// Number of runs of identical bits compared with its expectation given the
/// observed proportion of ones. Fails outright when that proportion is too
/// far from one half for the test to apply.
pub fn runs_test(bytes: &[u8], alpha: f64) -> Result<TestReport> {
    let n = 8 * bytes.len();
    need("runs", MIN_BITS, n, "bits")?;
    let nf = n as f64;
    let ones: usize = bytes.iter().map(|b| b.count_ones() as usize).sum();
    let pi = ones as f64 / nf;
    let mut it = bits(bytes);
    let first = it.next().expect("non-empty");
    let runs = 1 + it
        .scan(first, |prev, b| {
            let change = b != *prev;
            *prev = b;
            Some(usize::from(change))
        })
        .sum::<usize>();
    if (pi - 0.5).abs() >= 2.0 / nf.sqrt() {
        return Ok(TestReport::new("runs", runs as f64, 0.0, alpha, n));
    }
    let expected = 2.0 * nf * pi * (1.0 - pi);
    let z = (runs as f64 - expected) / (2.0 * (2.0 * nf).sqrt() * pi * (1.0 - pi));
    Ok(TestReport::new("runs", runs as f64, erfc(z.abs()), alpha, n))
}

/// Pearson chi-square of the 256 byte counts, 255 degrees of freedom,
/// two-sided.
pub fn chi_square_bytes(bytes: &[u8], alpha: f64) -> Result<TestReport> {
    need("chi-square", MIN_BYTES, bytes.len(), "bytes")?;
    let mut counts = [0u64; 256];
    for &b in bytes {
        counts[b as usize] += 1;
    }
    let expected = bytes.len() as f64 / 256.0;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new(255.0).expect("positive degrees of freedom");
    let p = 2.0 * dist.cdf(stat).min(dist.sf(stat));
    Ok(TestReport::new("chi-square", stat, p, alpha, 8 * bytes.len()))
}

/// Lag-one serial correlation of the bit stream, taken cyclically, against
/// the normal approximation with mean `−1/(n−1)` and variance
/// `n²/((n−1)²(n−2))`.
pub fn serial_correlation(bytes: &[u8], alpha: f64) -> Result<TestReport> {
    need("serial-correlation", MIN_BYTES, bytes.len(), "bytes")?;
    let n = 8 * bytes.len();
    let nf = n as f64;
    let (mut s1, mut s2, mut s12) = (0.0, 0.0, 0.0);
    let xs: Vec<f64> = bits(bytes).map(|b| f64::from(u8::from(b))).collect();
    for i in 0..n {
        let (u, v) = (xs[i], xs[(i + 1) % n]);
        s1 += u;
        s2 += u * u;
        s12 += u * v;
    }
    let den = nf * s2 - s1 * s1;
    let r = if den == 0.0 { 1.0 } else { (nf * s12 - s1 * s1) / den };
    let mean = -1.0 / (nf - 1.0);
    let sd = nf / ((nf - 1.0) * (nf - 2.0).sqrt());
    let p = if den == 0.0 { 0.0 } else { two_sided_normal((r - mean) / sd) };
    Ok(TestReport::new("serial-correlation", r, p, alpha, n))
}

/// All four tests in a fixed order.
pub fn battery(bytes: &[u8], alpha: f64) -> Result<Vec<TestReport>> {
    Ok(vec![
        monobit(bytes, alpha)?,
        runs_test(bytes, alpha)?,
        chi_square_bytes(bytes, alpha)?,
        serial_correlation(bytes, alpha)?,
    ])
}

/// Generator behind every scan: ChaCha with 8 rounds, seeded from a `u64`.
pub fn scan_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_key(rng: &mut ChaCha8Rng) -> KeyBlock {
    let mut m = [0u8; 8];
    rng.fill_bytes(&mut m);
    KeyBlock(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionReport {
    pub distinct_inputs: usize,
    pub collisions: usize,
    /// Inputs with equal digests, earlier key first.
    pub pairs: Vec<(KeyBlock, KeyBlock)>,
}

/// Hashes the given keys (duplicates dropped, first occurrence kept) and
/// counts equal digests.
pub fn collision_scan_keys(base: &BaseConfig, keys: &[KeyBlock]) -> Result<CollisionReport> {
    let mut seen = HashSet::new();
    let keys: Vec<KeyBlock> = keys.iter().copied().filter(|k| seen.insert(*k)).collect();
    let digests: Vec<Digest256> = keys.par_iter().map(|k| hash8(base, k)).collect::<Result<_>>()?;
    let mut first: HashMap<Digest256, KeyBlock> = HashMap::with_capacity(keys.len());
    let mut pairs = Vec::new();
    for (k, d) in keys.iter().zip(&digests) {
        if let Some(prev) = first.get(d) {
            pairs.push((*prev, *k));
        } else {
            first.insert(*d, *k);
        }
    }
    Ok(CollisionReport {
        distinct_inputs: keys.len(),
        collisions: pairs.len(),
        pairs,
    })
}

/// `n` distinct keys drawn from [`scan_rng`]`(seed)`.
pub fn scan_keys(n: usize, seed: u64) -> Vec<KeyBlock> {
    let mut rng = scan_rng(seed);
    let mut seen = HashSet::with_capacity(n);
    let mut keys = Vec::with_capacity(n);
    while keys.len() < n {
        let k = random_key(&mut rng);
        if seen.insert(k) {
            keys.push(k);
        }
    }
    keys
}

/// Collision count over `n` distinct pseudorandom keys.
pub fn collision_scan(base: &BaseConfig, n: usize, seed: u64) -> Result<CollisionReport> {
    if n == 0 {
        return Err(Error::Config("collision scan needs n ≥ 1".into()));
    }
    collision_scan_keys(base, &scan_keys(n, seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AvalancheReport {
    pub trials: usize,
    pub mean_distance: f64,
    /// Fraction of trials in which each digest bit changed.
    pub bit_frequency: Vec<f64>,
    pub distances: Vec<u32>,
}

impl AvalancheReport {
    pub fn min_frequency(&self) -> f64 {
        self.bit_frequency.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_frequency(&self) -> f64 {
        self.bit_frequency.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub const MIN_AVALANCHE_TRIALS: usize = 100;

/// The `(key, bit)` pairs an avalanche scan with this seed uses.
pub fn avalanche_trials(trials: usize, seed: u64) -> Vec<(KeyBlock, u32)> {
    let mut rng = scan_rng(seed);
    (0..trials)
        .map(|_| {
            let k = random_key(&mut rng);
            (k, rng.next_u32() % 64)
        })
        .collect()
}

/// Digest differences between a random key and the same key with one
/// random bit flipped.
pub fn avalanche_scan(base: &BaseConfig, trials: usize, seed: u64) -> Result<AvalancheReport> {
    if trials < MIN_AVALANCHE_TRIALS {
        return Err(Error::SampleTooSmall {
            test: "avalanche",
            minimum: MIN_AVALANCHE_TRIALS,
            got: trials,
            unit: "trials",
        });
    }
    let diffs: Vec<[u8; 32]> = avalanche_trials(trials, seed)
        .par_iter()
        .map(|&(k, bit)| {
            let (a, b) = (hash8(base, &k)?, hash8(base, &k.flip_bit(bit))?);
            Ok(std::array::from_fn(|i| a.0[i] ^ b.0[i]))
        })
        .collect::<Result<_>>()?;
    Ok(avalanche_report(&diffs))
}

/// Summarises per-trial XOR differences of digests.
pub fn avalanche_report(diffs: &[[u8; 32]]) -> AvalancheReport {
    let mut counts = [0usize; 256];
    let mut distances = Vec::with_capacity(diffs.len());
    for d in diffs {
        let d = Digest256(*d);
        for (i, c) in counts.iter_mut().enumerate() {
            *c += usize::from(d.bit(i));
        }
        distances.push(d.hamming(&Digest256([0; 32])));
    }
    let n = diffs.len().max(1) as f64;
    AvalancheReport {
        trials: diffs.len(),
        mean_distance: distances.iter().map(|&d| f64::from(d)).sum::<f64>() / n,
        bit_frequency: counts.iter().map(|&c| c as f64 / n).collect(),
        distances,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimum_sizes() {
        assert!(matches!(
            monobit(&[0; 255], DEFAULT_ALPHA),
            Err(Error::SampleTooSmall { minimum: 2048, got: 2040, .. })
        ));
        assert!(runs_test(&[0; 256], DEFAULT_ALPHA).is_ok());
        assert!(chi_square_bytes(&[0; 4095], DEFAULT_ALPHA).is_err());
        assert!(serial_correlation(&[0; 4095], DEFAULT_ALPHA).is_err());
    }

    #[test]
    fn biased_streams_fail() {
        let zeros = [0u8; 512];
        let r = monobit(&zeros, DEFAULT_ALPHA).unwrap();
        assert!(r.p_value < 1e-100 && !r.pass);
        let alt = [0x55u8; 4096];
        let m = monobit(&alt, DEFAULT_ALPHA).unwrap();
        assert_eq!(m.statistic, 0.0);
        assert!(m.pass);
        let s = serial_correlation(&alt, DEFAULT_ALPHA).unwrap();
        assert_eq!(s.statistic, -1.0);
        assert!(!s.pass);
        assert!(!runs_test(&alt, DEFAULT_ALPHA).unwrap().pass);
        assert!(!chi_square_bytes(&alt, DEFAULT_ALPHA).unwrap().pass);
    }

    #[test]
    fn runs_worked_example() {
        // 1001101011 padded to bytes changes the count, so check a whole-byte
        // stream by hand: 0xF0 repeated has two runs per byte
        let r = runs_test(&[0xF0; 256], DEFAULT_ALPHA).unwrap();
        assert_eq!(r.statistic, 512.0);
        assert!(!r.pass);
    }

    #[test]
    fn zero_flip_control() {
        let r = avalanche_report(&[[0u8; 32]; 3]);
        assert_eq!(r.mean_distance, 0.0);
        assert_eq!(r.distances, vec![0, 0, 0]);
        assert_eq!(r.max_frequency(), 0.0);
    }

    #[test]
    fn duplicate_inputs_are_not_collisions() {
        let base = BaseConfig::default();
        let k = KeyBlock(*b"dupe-key");
        let r = collision_scan_keys(&base, &[k, k]).unwrap();
        assert_eq!(r.distinct_inputs, 1);
        assert_eq!(r.collisions, 0);
    }

    #[test]
    fn scan_keys_are_distinct_and_seeded() {
        let a = scan_keys(5000, 7);
        assert_eq!(a.iter().collect::<HashSet<_>>().len(), 5000);
        assert_eq!(a, scan_keys(5000, 7));
        assert_ne!(a[..10], scan_keys(10, 8)[..]);
        assert_eq!(avalanche_trials(50, 3), avalanche_trials(50, 3));
    }
}
