//! Halton low-discrepancy points: deterministic stand-ins for random
//! samples so that repeated runs write identical files.

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut r) = (inv, 0.0);
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Point `index` (starting at 1; index 0 is the origin) of the Halton
/// sequence in `D ≤ 16` dimensions.
pub fn halton<const D: usize>(index: u64) -> [f64; D] {
    assert!(D <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
    core::array::from_fn(|d| radical_inverse(index, PRIMES[d]))
}
