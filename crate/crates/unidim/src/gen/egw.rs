//! Eternal Galton-Watson tree heights: the descendants of the root form a
//! critical Galton-Watson tree, so h(o) is its extinction depth. Only the
//! height law is sampled here; it is what the dimension estimate consumes.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum OffspringDistribution {
    /// geometric on {0,1,2,...} with success p: mean (1-p)/p
    Geometric(f64),
    Poisson(f64),
    Table(Vec<f64>),
}

impl OffspringDistribution {
    pub fn mean(&self) -> f64 {
        match self {
            OffspringDistribution::Geometric(p) => (1.0 - p) / p,
            OffspringDistribution::Poisson(mu) => *mu,
            OffspringDistribution::Table(t) => {
                t.iter().enumerate().map(|(k, &p)| k as f64 * p).sum()
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            OffspringDistribution::Geometric(p) => (1.0 - p) / (p * p),
            OffspringDistribution::Poisson(mu) => *mu,
            OffspringDistribution::Table(t) => {
                let m = self.mean();
                t.iter().enumerate().map(|(k, &p)| (k as f64 - m).powi(2) * p).sum()
            }
        }
    }

    pub fn p0(&self) -> f64 {
        match self {
            OffspringDistribution::Geometric(p) => *p,
            OffspringDistribution::Poisson(mu) => (-mu).exp(),
            OffspringDistribution::Table(t) => t.first().copied().unwrap_or(0.0),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        match self {
            OffspringDistribution::Geometric(p) => {
                // number of failures before the first success
                let mut k = 0u64;
                if *p == 0.5 {
                    // fast path: count leading ones in random bits
                    loop {
                        let bits: u64 = rng.gen();
                        let ones = bits.trailing_ones() as u64;
                        k += ones;
                        if ones < 64 {
                            return k;
                        }
                    }
                }
                while rng.gen::<f64>() >= *p {
                    k += 1;
                }
                k
            }
            OffspringDistribution::Poisson(mu) => {
                // Knuth for small mu (mu = 1 here)
                let l = (-mu).exp();
                let mut k = 0u64;
                let mut p = 1.0;
                loop {
                    p *= rng.gen::<f64>();
                    if p <= l {
                        return k;
                    }
                    k += 1;
                }
            }
            OffspringDistribution::Table(t) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (k, &p) in t.iter().enumerate() {
                    acc += p;
                    if u <= acc {
                        return k as u64;
                    }
                }
                t.len() as u64 - 1
            }
        }
    }
}

/// Height sampler for the eternal Galton-Watson tree. Rejects non-critical
/// offspring laws and the trivial deterministic-one case.
#[derive(Clone)]
pub struct EgwHeights {
    pub offspring: OffspringDistribution,
    pub depth_cap: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct HeightSample {
    pub height: u32,
    /// true when the subtree was still alive at the cap (height >= cap)
    pub censored: bool,
}

impl EgwHeights {
    /// Extinction depth of a critical GW tree started from the root, by
    /// generation-size simulation.
    pub fn sample_height(&self, rng: &mut ChaCha8Rng) -> HeightSample {
        let mut alive = 1u64;
        let mut depth = 0u32;
        while alive > 0 {
            if depth >= self.depth_cap {
                return HeightSample { height: self.depth_cap, censored: true };
            }
            let mut next = 0u64;
            for _ in 0..alive {
                next += self.offspring.sample(rng);
            }
            if next == 0 {
                return HeightSample { height: depth, censored: false };
            }
            alive = next;
            depth += 1;
        }
        HeightSample { height: depth, censored: false }
    }
}

pub fn gen_egw(offspring: OffspringDistribution, depth_cap: u32) -> Result<EgwHeights> {
    let mean = offspring.mean();
    if (mean - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "eternal GW needs a critical offspring law (mean {mean})"
        )));
    }
    if offspring.p0() <= 0.0 {
        // p0 = 0 with mean 1 forces exactly one offspring: the trivial
        // bi-infinite path is excluded
        return Err(Error::domain("trivial deterministic-one offspring excluded"));
    }
    if !offspring.variance().is_finite() {
        return Err(Error::domain("offspring variance must be finite"));
    }
    Ok(EgwHeights { offspring, depth_cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::replicate_rng;

    #[test]
    fn trivial_and_noncritical_rejected() {
        assert!(gen_egw(OffspringDistribution::Table(vec![0.0, 1.0]), 10).is_err());
        assert!(gen_egw(OffspringDistribution::Geometric(0.4), 10).is_err());
        assert!(gen_egw(OffspringDistribution::Poisson(1.1), 10).is_err());
        assert!(gen_egw(OffspringDistribution::Geometric(0.5), 10).is_ok());
        assert!(gen_egw(OffspringDistribution::Poisson(1.0), 10).is_ok());
    }

    #[test]
    fn survival_at_one_is_one_minus_p0() {
        let egw = gen_egw(OffspringDistribution::Geometric(0.5), 64).unwrap();
        let reps = 60_000u64;
        let mut hits = 0u64;
        for i in 0..reps {
            let mut rng = replicate_rng(60, i);
            if egw.sample_height(&mut rng).height >= 1 {
                hits += 1;
            }
        }
        let f = hits as f64 / reps as f64;
        assert!((f - 0.5).abs() < 0.01, "P(h>=1) = {f}, want 1 - p0 = 0.5");
    }

    #[test]
    fn kesten_scaling_n_times_survival_flat() {
        // geometric(1/2): P(h >= n) = 1/(n+1) exactly (classical identity),
        // so n * P(h >= n) approaches 1
        let egw = gen_egw(OffspringDistribution::Geometric(0.5), 1 << 11).unwrap();
        let reps = 60_000u64;
        let mut heights = Vec::with_capacity(reps as usize);
        for i in 0..reps {
            let mut rng = replicate_rng(61, i);
            heights.push(egw.sample_height(&mut rng));
        }
        for n in [8u32, 32, 128] {
            let p = heights.iter().filter(|h| h.height >= n).count() as f64 / reps as f64;
            let exact = 1.0 / (n as f64 + 1.0);
            let se = (exact * (1.0 - exact) / reps as f64).sqrt();
            assert!((p - exact).abs() < 4.0 * se + 1e-3, "n={n}: {p} vs {exact}");
        }
    }
}
