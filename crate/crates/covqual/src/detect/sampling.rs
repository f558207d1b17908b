//! Reproducible Monte Carlo draws of the LLRT quadratic forms.
//!
//! Each sample gets its own counter-based PRNG stream keyed by
//! (seed, sample index), so results are bit-identical for any worker count:
//! parallelism only changes which thread evaluates a given index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// One draw of the quadratic-form pair (K₀, K₁) for sample `index`.
///
/// The stream layout is fixed: the first n variates feed K₀ = Σ w0ᵢ Wᵢ²,
/// the next n feed K₁ = Σ w1ᵢ Zᵢ².
fn quadratic_pair(seed: u64, index: u64, w0: &[f64], w1: &[f64]) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut k0 = 0.0;
    for &w in w0 {
        let x: f64 = StandardNormal.sample(&mut rng);
        k0 += w * x * x;
    }
    let mut k1 = 0.0;
    for &w in w1 {
        let z: f64 = StandardNormal.sample(&mut rng);
        k1 += w * z * z;
    }
    (k0, k1)
}

/// i.i.d. samples of f(K₀, K₁); the worker pool partitions the index range.
pub(crate) fn sample_map<T: Send>(
    count: usize,
    seed: u64,
    w0: &[f64],
    w1: &[f64],
    f: impl Fn(f64, f64) -> T + Sync,
) -> Vec<T> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let (k0, k1) = quadratic_pair(seed, i, w0, w1);
            f(k0, k1)
        })
        .collect()
}
