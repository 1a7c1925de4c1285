//! Seeded randomness. Everything runs on SplitMix64 so that a run is
//! reproducible from its integer seeds alone.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

pub type Rng = SplitMix64;

pub fn seeded(seed: u64) -> Rng {
    SplitMix64::seed_from_u64(seed)
}

/// Derives an independent stream seed from a base seed and a path of indices
/// (epoch, instance, sample, ...).
pub fn derive(base: u64, path: &[u64]) -> u64 {
    let mut r = seeded(base);
    let mut s = r.next_u64();
    for &p in path {
        let mut q = seeded(s ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        s = q.next_u64();
    }
    s
}

/// Uniform in `[0, 1)` with 53 random bits.
pub fn uniform(r: &mut Rng) -> f64 {
    (r.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn uniform_range(r: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform(r)
}

/// Integer in `lo..=hi`.
pub fn int_range(r: &mut Rng, lo: i64, hi: i64) -> i64 {
    let span = (hi - lo + 1) as u64;
    lo + (r.next_u64() % span) as i64
}

/// Box-Muller standard normal pair.
pub fn normal_pair(r: &mut Rng) -> (f64, f64) {
    let u1 = 1.0 - uniform(r);
    let u2 = uniform(r);
    let rad = (-2.0 * u1.ln()).sqrt();
    let th = std::f64::consts::TAU * u2;
    (rad * th.cos(), rad * th.sin())
}

/// `k` standard normal draws, consumed in Box-Muller pairs.
pub fn normals(r: &mut Rng, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    while out.len() < k {
        let (a, b) = normal_pair(r);
        out.push(a);
        out.push(b);
    }
    out.truncate(k);
    out
}
