//! Deterministic random streams for the simulators.
//!
//! xoshiro256++ state seeded through SplitMix64 from (seed, stream index).
//! The contract is reproducibility at the algorithm level: the same seed and
//! stream index produce the same draw sequence on any platform, and distinct
//! stream indices give independent substreams without overlap in practice.

use crate::dist::Dist;

#[derive(Debug, Clone)]
pub struct Stream {
    s: [u64; 4],
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut init = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream);
        let mut s = [0u64; 4];
        for slot in &mut s {
            *slot = splitmix64(&mut init);
        }
        // all-zero state is invalid for xoshiro
        if s == [0, 0, 0, 0] {
            s[0] = 0x1;
        }
        Stream { s }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Exponential with the given rate, by inversion; never returns 0.
    #[inline]
    pub fn exp(&mut self, rate: f64) -> f64 {
        -(1.0 - self.uniform()).ln() / rate
    }

    /// Poisson count by Knuth's product method, halving large means first
    /// (a Poisson mean splits into independent halves).
    pub fn poisson(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        if mean > 64.0 {
            let half = mean / 2.0;
            return self.poisson(half) + self.poisson(mean - half);
        }
        let limit = (-mean).exp();
        let mut count = 0u64;
        let mut prod = self.uniform();
        while prod > limit {
            count += 1;
            prod *= self.uniform();
        }
        count
    }

    /// Index drawn from a categorical law given by `probs` (assumed to sum
    /// to 1; the last index absorbs rounding).
    pub fn pick(&mut self, probs: &[f64]) -> usize {
        let u = self.uniform();
        let mut acc = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.len() - 1
    }

    /// Draws from a catalog law.
    pub fn sample(&mut self, dist: &Dist) -> f64 {
        match dist {
            Dist::Exponential { rate } => self.exp(*rate),
            Dist::Deterministic { value } => *value,
            Dist::Erlang { shape, rate } => {
                (0..*shape).map(|_| self.exp(*rate)).sum()
            }
            Dist::HyperExponential { weights, rates } => {
                let branch = self.pick(weights);
                self.exp(rates[branch])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic() {
        let mut a = Stream::new(42, 7);
        let mut b = Stream::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = Stream::new(42, 8);
        assert_ne!(a.next_u64(), c.next_u64());
    }

    #[test]
    fn uniform_in_range_and_mixing() {
        let mut s = Stream::new(1, 0);
        let mut sum = 0.0;
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02, "uniform mean off: {mean}");
    }

    #[test]
    fn exponential_mean() {
        let mut s = Stream::new(3, 0);
        let n = 50_000;
        let total: f64 = (0..n).map(|_| s.exp(2.0)).sum();
        let mean = total / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "exp mean off: {mean}");
    }

    #[test]
    fn poisson_mean_small_and_split() {
        let mut s = Stream::new(9, 0);
        for &m in &[0.7, 3.0, 120.0] {
            let n = 20_000;
            let total: u64 = (0..n).map(|_| s.poisson(m)).sum();
            let mean = total as f64 / n as f64;
            assert!(
                (mean - m).abs() < 4.0 * (m / n as f64).sqrt() + 0.01,
                "poisson mean off at {m}: {mean}"
            );
        }
    }

    #[test]
    fn erlang_sample_mean() {
        let d = Dist::erlang(3, 2.0).unwrap();
        let mut s = Stream::new(11, 4);
        let n = 30_000;
        let total: f64 = (0..n).map(|_| s.sample(&d)).sum();
        assert!((total / n as f64 - 1.5).abs() < 0.02);
    }
}
