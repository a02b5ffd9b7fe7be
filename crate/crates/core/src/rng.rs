//! Seeded random streams shared by every instance generator.
//!
//! The stream is pinned so that other implementations can reproduce instances
//! bit for bit:
//!
//! * state: xoshiro256** whose four state words are the first four outputs of
//!   SplitMix64 started at `seed` (increment `0x9e3779b97f4a7c15`, mixers
//!   `0xbf58476d1ce4e5b9` / `0x94d049bb133111eb`, shifts 30/27/31);
//! * uniform: `(next_u64 >> 11) * 2^-53`, a value in `[0, 1)`;
//! * normal: Box–Muller on `u1 = 1 - uniform`, `u2 = uniform` drawn in that
//!   order, returning `sqrt(-2 ln u1) * cos(2π u2)` first and the matching
//!   `sin` variate on the next call.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct Stream {
    inner: Xoshiro256StarStar,
    spare_normal: Option<f64>,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in `0..bound` by rejection-free multiply-shift; only used
    /// by tests and random-matrix helpers where exact uniformity is irrelevant.
    pub fn index(&mut self, bound: usize) -> usize {
        ((self.next_u64() >> 32) * bound as u64 >> 32) as usize
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * angle.sin());
        r * angle.cos()
    }

    /// A point drawn uniformly from the open probability simplex.
    pub fn simplex_point(&mut self, n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| -(1.0 - self.uniform()).ln()).collect();
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent reference for the pinned stream.
    fn splitmix(x: &mut u64) -> u64 {
        *x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = *x;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn xoshiro(s: &mut [u64; 4]) -> u64 {
        let out = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        out
    }

    #[test]
    fn stream_matches_reference_algorithm() {
        for seed in [0u64, 1, 42, u64::MAX] {
            let mut x = seed;
            let mut state = [splitmix(&mut x), splitmix(&mut x), splitmix(&mut x), splitmix(&mut x)];
            let mut stream = Stream::new(seed);
            for _ in 0..64 {
                assert_eq!(stream.next_u64(), xoshiro(&mut state));
            }
        }
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut s = Stream::new(9);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn normal_moments() {
        let mut s = Stream::new(3);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn simplex_points_are_feasible() {
        let mut s = Stream::new(5);
        for n in 1..20 {
            let p = s.simplex_point(n);
            assert!(p.iter().all(|&x| x > 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
