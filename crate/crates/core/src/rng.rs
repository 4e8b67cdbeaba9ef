//! Counter-based splittable random numbers.
//!
//! Every random protocol in the crate draws from an [`RngStream`], a
//! keyed counter generator: output `i` of a stream is
//! `mix64(key + (i+1) * GOLDEN_GAMMA)` where `mix64` is the SplitMix64
//! finalizer and the key is derived from `(seed, stream_id)` by the same
//! mixer. Streams are cheap 16-byte values, so a protocol can snapshot and
//! replay its generator by cloning, and trial `t` of an experiment always
//! uses `RngStream::new(seed, t)` regardless of how trials are scheduled
//! across workers. That keyed-counter layout is what makes every estimate
//! in the crate bit-reproducible.

/// Weyl increment: 2^64 divided by the golden ratio, forced odd.
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer (Stafford mix 13).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One independent random stream, addressed by `(seed, stream_id)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    key: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> RngStream {
        // For a fixed seed the keys across stream ids are themselves a
        // SplitMix64 sequence, so distinct ids never collide.
        let key = mix64(mix64(seed).wrapping_add(stream_id.wrapping_mul(GOLDEN_GAMMA)));
        RngStream { key, counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Exactly uniform in 0..n (multiply-and-reject, no modulo bias).
    #[inline]
    pub fn uniform_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let mut m = (self.next_u64() as u128) * (n as u128);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                m = (self.next_u64() as u128) * (n as u128);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Poisson(lambda) draw: sequential inversion for lambda <= 30,
    /// transformed rejection above.
    ///
    /// `lambda` must be finite and nonnegative; the Monte Carlo layer
    /// validates user input before it reaches this hot path.
    pub fn poisson(&mut self, lambda: f64) -> u64 {
        debug_assert!(lambda.is_finite() && lambda >= 0.0);
        if lambda == 0.0 {
            0
        } else if lambda <= 30.0 {
            self.poisson_inversion(lambda)
        } else {
            self.poisson_rejection(lambda)
        }
    }

    fn poisson_inversion(&mut self, lambda: f64) -> u64 {
        let u = self.next_f64();
        let mut k = 0u64;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        // The cdf saturates a hair below 1.0; cap the walk so a maximal u
        // cannot loop past the representable tail.
        while u > cdf && k < 1000 {
            k += 1;
            p *= lambda / k as f64;
            cdf += p;
        }
        k
    }

    /// Hormann's PTRS transformed-rejection sampler, valid for lambda >= 10.
    fn poisson_rejection(&mut self, lambda: f64) -> u64 {
        let slam = lambda.sqrt();
        let loglam = lambda.ln();
        let b = 0.931 + 2.53 * slam;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let v_r = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.next_f64() - 0.5;
            let v = self.next_f64();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
            if us >= 0.07 && v <= v_r {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln()
                <= k * loglam - lambda - ln_gamma(k + 1.0)
            {
                return k as u64;
            }
        }
    }
}

/// Natural log of the gamma function (Lanczos, g = 7), good to ~1e-13 for
/// positive arguments, which is all the rejection sampler needs.
pub fn ln_gamma(z: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(z > 0.0);
    let mut x = 0.999_999_999_999_809_93;
    for (i, c) in COEFFS.iter().enumerate() {
        x += c / (z + i as f64);
    }
    let t = z + 6.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z - 0.5) * t.ln() - t + x.ln()
}
