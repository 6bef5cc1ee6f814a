//! Counter-based deterministic random number generation.
//!
//! Every random quantity in a simulation is a pure function of an identity
//! key: site occupancies are keyed by `(run seed, trial, vertex)`, frog paths
//! by `(run seed, trial, vertex, layer, frog index)`. Regenerating a stream
//! from the same key yields the identical sequence, which is what makes the
//! processing-order and thread-count invariance of the engines literally
//! testable rather than merely plausible.

use rand::RngCore;

/// First Weyl increment (golden ratio fraction of 2^64).
const PHI1: u64 = 0x9E37_79B9_7F4A_7C15;
/// Second, independent odd increment.
const PHI2: u64 = 0xD1B5_4A32_D192_ED03;

/// SplitMix64 finalizer (Stafford variant 13). Full-avalanche 64-bit mix.
#[inline(always)]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A 128-bit stream key.
///
/// Keys are built by absorbing identity words into a two-lane sponge; each
/// absorbed word is fully mixed into both lanes so that any single-bit change
/// in the identity produces an unrelated stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Key128 {
    pub hi: u64,
    pub lo: u64,
}

impl Key128 {
    /// Root key for a run: separates the 64-bit user seed into two lanes.
    pub fn from_seed(seed: u64) -> Self {
        Key128 {
            hi: mix64(seed ^ PHI2),
            lo: mix64(seed.wrapping_add(PHI1)),
        }
    }

    /// Absorb one identity word.
    #[inline]
    pub fn absorb(self, word: u64) -> Self {
        let lo = mix64(self.lo ^ word.wrapping_mul(PHI1).wrapping_add(PHI2));
        let hi = mix64(self.hi ^ lo ^ PHI1);
        Key128 { hi, lo }
    }

    /// Absorb a 128-bit word (used for packed vertex ids).
    #[inline]
    pub fn absorb_u128(self, word: u128) -> Self {
        self.absorb(word as u64).absorb((word >> 64) as u64)
    }

    /// Counter stream for this key.
    #[inline]
    pub fn stream(self) -> CounterRng {
        CounterRng {
            hi: self.hi,
            lo: self.lo,
            ctr: 0,
        }
    }
}

/// Counter-mode generator over a [`Key128`].
///
/// Output `n` is `mix64(mix64(lo ^ n·PHI1) + hi)`: a pure function of
/// `(key, n)`, so streams can be regenerated or advanced independently of
/// any shared state. Implements [`rand::RngCore`] so the `rand_distr`
/// samplers work on top of it unchanged.
#[derive(Debug, Clone)]
pub struct CounterRng {
    hi: u64,
    lo: u64,
    ctr: u64,
}

impl CounterRng {
    #[inline(always)]
    pub fn next(&mut self) -> u64 {
        self.ctr = self.ctr.wrapping_add(1);
        mix64(mix64(self.lo ^ self.ctr.wrapping_mul(PHI1)).wrapping_add(self.hi))
    }

    /// Uniform value in `[0, n)` by Lemire's multiply-shift with rejection.
    #[inline(always)]
    pub fn below(&mut self, n: u32) -> u32 {
        debug_assert!(n > 0);
        loop {
            let x = self.next() as u32;
            let m = (x as u64).wrapping_mul(n as u64);
            let low = m as u32;
            if low >= n && low < n.wrapping_neg() {
                // fast accept covers all but ~n/2^32 of cases
                return (m >> 32) as u32;
            }
            // exact acceptance bound
            if low >= n.wrapping_neg() % n {
                return (m >> 32) as u32;
            }
        }
    }

    /// Uniform f64 in [0, 1) with 53 random bits.
    #[inline(always)]
    pub fn unit_f64(&mut self) -> f64 {
        (self.next() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.next()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let v = self.next().to_le_bytes();
            chunk.copy_from_slice(&v[..chunk.len()]);
        }
    }
}

/// Poisson sampler that is a pure function of the stream.
///
/// Zero rate is the point mass at zero; positive rates delegate to
/// `rand_distr`'s Poisson (inversion below λ≈12, rejection above).
#[derive(Debug, Clone, Copy)]
pub struct PoissonSampler {
    inner: Option<rand_distr::Poisson<f64>>,
}

impl PoissonSampler {
    pub fn new(rate: f64) -> crate::Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(crate::FrogError::argument(format!(
                "Poisson rate must be finite and nonnegative, got {rate}"
            )));
        }
        let inner = if rate == 0.0 {
            None
        } else {
            Some(rand_distr::Poisson::new(rate).map_err(|e| {
                crate::FrogError::argument(format!("invalid Poisson rate {rate}: {e}"))
            })?)
        };
        Ok(PoissonSampler { inner })
    }

    #[inline]
    pub fn sample(&self, rng: &mut CounterRng) -> u64 {
        match self.inner {
            None => 0,
            Some(p) => rand_distr::Distribution::sample(&p, rng) as u64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regeneration_is_identical() {
        let key = Key128::from_seed(7).absorb(11).absorb_u128(1 << 90);
        let a: Vec<u64> = {
            let mut s = key.stream();
            (0..100).map(|_| s.next()).collect()
        };
        let b: Vec<u64> = {
            let mut s = key.stream();
            (0..100).map(|_| s.next()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn absorb_order_matters() {
        let base = Key128::from_seed(1);
        assert_ne!(base.absorb(2).absorb(3), base.absorb(3).absorb(2));
        assert_ne!(base.absorb(2), base.absorb(3));
    }

    #[test]
    fn below_is_unbiased_roughly() {
        let mut s = Key128::from_seed(42).stream();
        let mut counts = [0u32; 3];
        let n = 300_000;
        for _ in 0..n {
            counts[s.below(3) as usize] += 1;
        }
        // 4-sigma band around n/3 for a binomial(n, 1/3)
        let expect = n as f64 / 3.0;
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for &c in &counts {
            assert!((c as f64 - expect).abs() < 4.0 * sigma, "counts {counts:?}");
        }
    }

    #[test]
    fn poisson_zero_rate_is_point_mass() {
        let sampler = PoissonSampler::new(0.0).unwrap();
        let mut s = Key128::from_seed(5).stream();
        for _ in 0..32 {
            assert_eq!(sampler.sample(&mut s), 0);
        }
    }

    #[test]
    fn poisson_mean_matches_rate() {
        let sampler = PoissonSampler::new(2.5).unwrap();
        let mut s = Key128::from_seed(9).stream();
        let n = 200_000u64;
        let total: u64 = (0..n).map(|_| sampler.sample(&mut s)).sum();
        let mean = total as f64 / n as f64;
        // sigma of the mean = sqrt(2.5/n)
        assert!((mean - 2.5).abs() < 4.0 * (2.5f64 / n as f64).sqrt());
    }

    #[test]
    fn unit_f64_in_range() {
        let mut s = Key128::from_seed(3).stream();
        for _ in 0..1000 {
            let u = s.unit_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
