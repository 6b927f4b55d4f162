//! Parallel coupon collector: `C` collectors each draw one of `N` coupon
//! types uniformly per round; `T(N, C)` is the round at which the last
//! collector completes its set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{invalid, GenError};

/// Samples drawn from each ChaCha8 stream. Sample block `b` uses
/// `ChaCha8Rng::seed_from_u64(seed)` on stream `b`, so results do not depend
/// on the number of worker threads.
pub const SAMPLES_PER_STREAM: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverTimeEstimate {
    pub coupons: u32,
    pub collectors: u32,
    pub samples: u64,
    /// Mean of T in rounds.
    pub mean: f64,
    pub stderr: f64,
}

/// n-th harmonic number.
pub fn harmonic(n: u32) -> f64 {
    (1..=n).map(|i| 1.0 / f64::from(i)).sum()
}

/// `max(N·H_N, ln(C)/6)`.
pub fn cover_time_lower_bound(coupons: u32, collectors: u32) -> f64 {
    (f64::from(coupons) * harmonic(coupons)).max(f64::from(collectors).ln() / 6.0)
}

struct Collectors {
    coupons: u32,
    words: usize,
    bits: Vec<u64>,
    missing: Vec<u32>,
    active: Vec<usize>,
}

impl Collectors {
    fn new(coupons: u32, collectors: u32) -> Self {
        let words = (coupons as usize).div_ceil(64);
        Self {
            coupons,
            words,
            bits: vec![0; words * collectors as usize],
            missing: vec![coupons; collectors as usize],
            active: Vec::with_capacity(collectors as usize),
        }
    }

    /// One realization of T. Finished collectors stop drawing; their later
    /// draws could not change T.
    fn sample(&mut self, rng: &mut ChaCha8Rng) -> u64 {
        self.bits.fill(0);
        self.missing.fill(self.coupons);
        self.active.clear();
        self.active.extend(0..self.missing.len());
        let mut rounds = 0;
        while !self.active.is_empty() {
            rounds += 1;
            let mut i = 0;
            while i < self.active.len() {
                let c = self.active[i];
                let coupon = rng.gen_range(0..self.coupons) as usize;
                let word = &mut self.bits[c * self.words + coupon / 64];
                let mask = 1u64 << (coupon % 64);
                if *word & mask == 0 {
                    *word |= mask;
                    self.missing[c] -= 1;
                }
                if self.missing[c] == 0 {
                    self.active.swap_remove(i);
                } else {
                    i += 1;
                }
            }
        }
        rounds
    }
}

/// Monte Carlo estimate of `E[T(N, C)]` with its standard error.
pub fn coupon_cover_time(
    coupons: u32,
    collectors: u32,
    samples: u64,
    seed: u64,
) -> Result<CoverTimeEstimate, GenError> {
    if coupons == 0 || collectors == 0 || samples == 0 {
        return Err(invalid(format!(
            "coupon collector needs N, C, samples >= 1 (got N={coupons}, C={collectors}, samples={samples})"
        )));
    }
    let blocks = samples.div_ceil(SAMPLES_PER_STREAM);
    let partials: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = SAMPLES_PER_STREAM.min(samples - b * SAMPLES_PER_STREAM);
            let mut state = Collectors::new(coupons, collectors);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                let t = state.sample(&mut rng) as f64;
                sum += t;
                sum_sq += t * t;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partials
        .iter()
        .fold((0.0, 0.0), |(s, q), &(a, b)| (s + a, q + b));
    let n = samples as f64;
    let mean = sum / n;
    let stderr = if samples > 1 {
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(CoverTimeEstimate {
        coupons,
        collectors,
        samples,
        mean,
        stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic(1), 1.0);
        assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-12);
        assert_eq!(cover_time_lower_bound(2, 1), 3.0);
        assert!((cover_time_lower_bound(1, 1_000_000_000) - (1e9f64).ln() / 6.0).abs() < 1e-12);
    }

    #[test]
    fn single_coupon_takes_one_round() {
        let e = coupon_cover_time(1, 7, 1000, 3).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn classical_expectation() {
        let e = coupon_cover_time(4, 1, 100_000, 1).unwrap();
        assert!((e.mean - 25.0 / 3.0).abs() < 0.02 * 25.0 / 3.0, "{e:?}");
        assert!(e.stderr > 0.0 && e.stderr < 0.05);
    }

    #[test]
    fn wide_coupon_sets_use_multiple_words() {
        let e = coupon_cover_time(70, 2, 300, 5).unwrap();
        // N·H_N ≈ 338 for N = 70; two collectors only push it up
        assert!(e.mean > 330.0, "{e:?}");
    }

    #[test]
    fn seeded_and_thread_independent() {
        let a = coupon_cover_time(3, 5, 10_000, 9).unwrap();
        let b = coupon_cover_time(3, 5, 10_000, 9).unwrap();
        assert_eq!(a, b);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = single.install(|| coupon_cover_time(3, 5, 10_000, 9).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn bad_arguments() {
        assert!(coupon_cover_time(0, 1, 1, 0).is_err());
        assert!(coupon_cover_time(1, 0, 1, 0).is_err());
        assert!(coupon_cover_time(1, 1, 0, 0).is_err());
    }

    #[test]
    fn mean_grows_with_coupons_and_collectors() {
        let grid: Vec<Vec<CoverTimeEstimate>> = [2u32, 3, 5]
            .iter()
            .map(|&n| {
                [1u32, 4, 16]
                    .iter()
                    .map(|&c| coupon_cover_time(n, c, 20_000, 21).unwrap())
                    .collect()
            })
            .collect();
        for row in &grid {
            for w in row.windows(2) {
                assert!(w[1].mean + 3.0 * w[1].stderr >= w[0].mean - 3.0 * w[0].stderr);
            }
        }
        for rows in grid.windows(2) {
            for (a, b) in rows[0].iter().zip(&rows[1]) {
                assert!(b.mean + 3.0 * b.stderr >= a.mean - 3.0 * a.stderr);
            }
        }
    }
}
