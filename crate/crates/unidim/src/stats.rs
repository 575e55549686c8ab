//! Small statistics helpers shared by the estimators, plus seed derivation
//! for replicable parallel sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// z quantile for two-sided 95% intervals.
pub const Z95: f64 = 1.959963984540054;
/// z quantile for two-sided 99.9% tests (level 0.999).
pub const Z999: f64 = 3.290526731491926;

/// Inverse standard-normal CDF (Acklam's rational approximation, ~1e-9
/// relative accuracy), for Bonferroni-adjusted test thresholds.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let plow = 0.02425;
    if p < plow {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Parallel Monte-Carlo accumulation over replicate indices with a
/// deterministic reduction: fixed blocks accumulated serially, merged in
/// block order regardless of thread scheduling.
pub fn par_accumulate<F>(reps: u64, f: F) -> Accumulator
where
    F: Fn(u64) -> f64 + Sync,
{
    use rayon::prelude::*;
    const BLOCK: u64 = 4096;
    let blocks = reps.div_ceil(BLOCK);
    let mut partials: Vec<Accumulator> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = Accumulator::default();
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(reps);
            for i in lo..hi {
                acc.push(f(i));
            }
            acc
        })
        .collect();
    let mut total = Accumulator::default();
    for acc in partials.drain(..) {
        total.merge(&acc);
    }
    total
}

/// Derives an independent stream for replicate `index` of a seeded experiment.
///
/// Same (seed, index) is bit-reproducible; distinct indices give streams that
/// do not overlap (distinct ChaCha keys via SplitMix64 mixing).
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, index))
}

fn mix(seed: u64, index: u64) -> u64 {
    // SplitMix64 finalizer over the pair.
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        assert!(n > 0, "no samples");
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0)
        } else {
            0.0
        };
        MeanEstimate { mean, se: (var / n as f64).sqrt(), n }
    }

    /// Binomial proportion with normal standard error.
    pub fn from_hits(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        MeanEstimate { mean: p, se: (p * (1.0 - p) / n as f64).sqrt(), n: n as usize }
    }

    pub fn ci95(&self) -> f64 {
        Z95 * self.se
    }

    /// z statistic against a hypothesized mean.
    pub fn z_against(&self, mu: f64) -> f64 {
        if self.se == 0.0 {
            if self.mean == mu {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - mu) / self.se
        }
    }
}

/// Streaming accumulator so estimators can run without storing all samples.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    n: u64,
    sum: f64,
    sumsq: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.n += other.n;
        self.sum += other.sum;
        self.sumsq += other.sumsq;
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn estimate(&self) -> MeanEstimate {
        assert!(self.n > 0, "empty accumulator");
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 { ((self.sumsq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        MeanEstimate { mean, se: (var / n).sqrt(), n: self.n as usize }
    }
}
