//! Seedable counter-based random number generation.
//!
//! Noise streams must be reproducible: the same seed has to produce the same
//! stream on every platform and in every run, because a training job that
//! restarts mid-stream must be able to regenerate exactly the rows it already
//! emitted. A counter-based generator gives that for free — output `i` is a
//! pure function of `(seed, i)` — so we use the SplitMix64 finalizer over an
//! incrementing counter:
//!
//! ```text
//! u64(i) = mix(seed + i * 0x9E3779B97F4A7C15)
//! mix(z) = let z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//!          let z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//!          z ^ (z >> 31)
//! ```
//!
//! Uniform doubles take the top 53 bits into `(0, 1]`, and Gaussian samples
//! come from the Box-Muller transform on consecutive uniform pairs. Integer
//! output is bit-exact everywhere; the Gaussian stream is deterministic up to
//! the platform's `ln`/`sin`/`cos` rounding, which is stable on any one
//! platform.
//!
//! This generator is for simulation and testing. It is not a cryptographic
//! RNG and must not back a production privacy deployment.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Counter-based generator: output `i` depends only on `(seed, i)`.
#[derive(Clone, Debug)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
    cached_normal: Option<f64>,
}

impl CounterRng {
    /// Creates a generator positioned at the start of the stream for `seed`.
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            counter: 0,
            cached_normal: None,
        }
    }

    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Next 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        Self::mix(
            self.seed
                .wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)),
        )
    }

    /// Uniform draw in `(0, 1]`.
    pub fn uniform(&mut self) -> f64 {
        // Top 53 bits; the +1 keeps 0 out of the support so ln() is safe.
        ((self.next_u64() >> 11) as f64 + 1.0) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (1.0 - self.uniform())
    }

    /// Standard normal draw (Box-Muller; pairs are cached).
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(v) = self.cached_normal.take() {
            return v;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (sin, cos) = (std::f64::consts::TAU * u2).sin_cos();
        self.cached_normal = Some(radius * sin);
        radius * cos
    }

    /// Fills `out` with normal draws of the given standard deviation.
    pub fn fill_normal(&mut self, out: &mut [f64], std_dev: f64) {
        for v in out {
            *v = std_dev * self.standard_normal();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = CounterRng::new(42);
        let mut b = CounterRng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn different_seeds_differ() {
        let mut a = CounterRng::new(1);
        let mut b = CounterRng::new(2);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut rng = CounterRng::new(7);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!(u > 0.0 && u <= 1.0);
        }
    }

    #[test]
    fn normal_moments_are_sane() {
        let mut rng = CounterRng::new(3);
        let n = 200_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let x = rng.standard_normal();
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
