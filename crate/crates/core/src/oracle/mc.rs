//! Seeded Monte Carlo samplers.
//!
//! Every check derives its own ChaCha stream from `(seed, check name)`, and
//! each chunk of samples uses a distinct stream index, so results are
//! identical regardless of thread count or of which other checks run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const CHUNK: usize = 1 << 14;

/// 64-bit key for a named check. FNV-1a over the name, mixed with the seed.
pub fn stream_key(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix(h ^ splitmix(seed))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, name))
}

fn chunk_rng(key: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `samples` draws split into fixed chunks; `draw` accumulates one sample
/// into a per-chunk state, and chunk states are merged in chunk order.
pub fn chunked<S, D, M>(key: u64, samples: usize, init: fn() -> S, draw: D, merge: M) -> S
where
    S: Send,
    D: Fn(&mut ChaCha8Rng, &mut S) + Sync,
    M: Fn(&mut S, S),
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<S> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(key, c);
            let mut state = init();
            let count = CHUNK.min(samples - c * CHUNK);
            for _ in 0..count {
                draw(&mut rng, &mut state);
            }
            state
        })
        .collect();
    let mut total = init();
    for p in parts {
        merge(&mut total, p);
    }
    total
}

/// Power sums of `‖e‖` over draws of `e ~ MN(0, σ²I_N)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NormSums {
    pub count: usize,
    /// `raw[p] = Σ ‖e‖^p` for `p = 0..=8`.
    pub raw: [f64; 9],
    /// `shifted[p] = Σ (‖e‖ − shift)^p` for `p = 0..=4`.
    pub shifted: [f64; 5],
    pub shift: f64,
}

impl NormSums {
    pub fn raw_mean(&self, p: usize) -> f64 {
        self.raw[p] / self.count as f64
    }

    fn shifted_mean(&self, p: usize) -> f64 {
        self.shifted[p] / self.count as f64
    }

    pub fn mean(&self) -> f64 {
        self.shift + self.shifted_mean(1)
    }

    pub fn variance(&self) -> f64 {
        let d1 = self.shifted_mean(1);
        self.shifted_mean(2) - d1 * d1
    }

    /// Fourth central moment.
    pub fn central4(&self) -> f64 {
        let (d1, d2, d3, d4) = (
            self.shifted_mean(1),
            self.shifted_mean(2),
            self.shifted_mean(3),
            self.shifted_mean(4),
        );
        d4 - 4.0 * d1 * d3 + 6.0 * d1 * d1 * d2 - 3.0 * d1.powi(4)
    }
}

/// Draws `samples` error vectors of length `n` with spread `sigma`.
pub fn sample_error_norms(key: u64, n: usize, sigma: f64, samples: usize) -> NormSums {
    // Shift by a crude center to keep the central-moment sums well conditioned.
    let shift = (n as f64).sqrt() * sigma;
    let mut sums = chunked(
        key,
        samples,
        NormSums::default,
        |rng, s: &mut NormSums| {
            let sq: f64 = (0..n)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    z * z
                })
                .sum();
            let r = sigma * sq.sqrt();
            let mut p = 1.0;
            for slot in s.raw.iter_mut() {
                *slot += p;
                p *= r;
            }
            let d = r - shift;
            let mut p = 1.0;
            for slot in s.shifted.iter_mut() {
                *slot += p;
                p *= d;
            }
            s.count += 1;
        },
        |total, part| {
            total.count += part.count;
            for (t, p) in total.raw.iter_mut().zip(part.raw) {
                *t += p;
            }
            for (t, p) in total.shifted.iter_mut().zip(part.shifted) {
                *t += p;
            }
        },
    );
    sums.shift = shift;
    sums
}
