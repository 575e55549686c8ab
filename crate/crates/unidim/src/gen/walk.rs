//! Point processes from random walks: the image of a two-sided walk with
//! positive jumps, the zero set of the simple +-1 walk, and the
//! gap-subdivision construction with its size biasing.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sampling::RootedSampler;
use crate::space::{Marks, Norm, RootedSample};

/// Positive jump laws for the walk image. Pareto is truncated at `cap` by
/// conditioning (resampling), so bias weights stay bounded; the conditional
/// tail is exact below the cap up to the normalizing constant.
#[derive(Debug, Clone)]
pub enum JumpDistribution {
    Deterministic(f64),
    /// P(S > r) = (xm/r)^beta for r >= xm, conditioned on S <= cap
    Pareto { beta: f64, xm: f64, cap: f64 },
    Table(Vec<(f64, f64)>),
}

impl JumpDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            JumpDistribution::Deterministic(d) if *d > 0.0 => Ok(()),
            JumpDistribution::Deterministic(_) => Err(Error::domain("jump must be positive")),
            JumpDistribution::Pareto { beta, xm, cap } => {
                if *beta > 0.0 && *xm > 0.0 && *cap > *xm {
                    Ok(())
                } else {
                    Err(Error::domain("pareto needs beta > 0, 0 < xm < cap"))
                }
            }
            JumpDistribution::Table(t) => {
                if !t.is_empty() && t.iter().all(|&(v, p)| v > 0.0 && p >= 0.0) {
                    Ok(())
                } else {
                    Err(Error::domain("table entries must be positive"))
                }
            }
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            JumpDistribution::Deterministic(d) => *d,
            JumpDistribution::Pareto { beta, xm, cap } => loop {
                let u: f64 = rng.gen::<f64>().max(1e-300);
                let s = xm * u.powf(-1.0 / beta);
                if s <= *cap {
                    return s;
                }
            },
            JumpDistribution::Table(t) => {
                let total: f64 = t.iter().map(|&(_, p)| p).sum();
                let mut u: f64 = rng.gen::<f64>() * total;
                for &(v, p) in t {
                    u -= p;
                    if u <= 0.0 {
                        return v;
                    }
                }
                t.last().unwrap().0
            }
        }
    }

    /// Tail P(S >= r), exact for the law actually sampled.
    pub fn tail(&self, r: f64) -> f64 {
        match self {
            JumpDistribution::Deterministic(d) => {
                if r <= *d {
                    1.0
                } else {
                    0.0
                }
            }
            JumpDistribution::Pareto { beta, xm, cap } => {
                if r <= *xm {
                    1.0
                } else if r > *cap {
                    0.0
                } else {
                    let raw = (xm / r).powf(*beta);
                    let trunc = (xm / cap).powf(*beta);
                    (raw - trunc) / (1.0 - trunc)
                }
            }
            JumpDistribution::Table(t) => {
                let total: f64 = t.iter().map(|&(_, p)| p).sum();
                t.iter().filter(|&&(v, _)| v >= r).map(|&(_, p)| p).sum::<f64>() / total
            }
        }
    }
}

/// Window of the image of a two-sided walk through 0 with i.i.d. positive
/// jumps: points S_{-m} < ... < S_0 = 0 < ... < S_m. Gap marks: slot 0 = 1
/// (original point, used by the subdivision construction).
pub fn gen_srw_image(jumps: JumpDistribution, steps: u32) -> Result<RootedSampler> {
    jumps.validate()?;
    Ok(RootedSampler::new(format!("srw-image {jumps:?}"), 0x5eed1, move |rng| {
        let m = steps as usize;
        let mut pts = Vec::with_capacity(2 * m + 1);
        let mut x = 0.0;
        for _ in 0..m {
            x -= jumps.sample(rng);
            pts.push(x);
        }
        pts.reverse();
        pts.push(0.0);
        let root = pts.len() as u32 - 1;
        let mut y = 0.0;
        for _ in 0..m {
            y += jumps.sample(rng);
            pts.push(y);
        }
        let lo = pts[0];
        let hi = *pts.last().unwrap();
        let interior: Vec<f64> = pts.iter().map(|&p| (p - lo).min(hi - p)).collect();
        RootedSample::from_coords(1, pts, root, interior, Norm::L2)
    }))
}

/// Exact right-gap sampler of the image process (the gap law is the jump
/// law itself).
pub fn image_gap_sampler(jumps: JumpDistribution) -> impl Fn(&mut ChaCha8Rng) -> f64 {
    move |rng| jumps.sample(rng)
}

/// First return time to 0 of the symmetric +-1 walk, capped at `horizon`
/// (capped draws are exact for any statistic of T ∧ horizon).
pub fn zero_gap_sample(rng: &mut ChaCha8Rng, horizon: u64) -> (u64, bool) {
    let mut pos: i64 = if rng.gen::<bool>() { 1 } else { -1 };
    let mut t = 1u64;
    let mut bits: u64 = 0;
    let mut left = 0u32;
    while pos != 0 {
        if t >= horizon {
            return (horizon, true);
        }
        if left == 0 {
            bits = rng.gen();
            left = 64;
        }
        pos += if bits & 1 == 1 { 1 } else { -1 };
        bits >>= 1;
        left -= 1;
        t += 1;
    }
    (t, false)
}

/// Exact no-return probability P(T > 2m) = C(2m, m) / 4^m via the
/// reflection principle; oracle for the return-time law.
pub fn zero_gap_tail_exact(m: u64) -> f64 {
    let mut p = 1.0f64;
    for j in 1..=m {
        p *= (2.0 * j as f64 - 1.0) / (2.0 * j as f64);
    }
    p
}

/// Window of the zero set of the +-1 walk: consecutive zeros differ by
/// independent return times (two-sided through 0).
pub fn gen_srw_zeros(steps: u32, horizon: u64) -> RootedSampler {
    RootedSampler::new("srw-zeros", 0x5eed2, move |rng| {
        let m = steps as usize;
        let mut pts = Vec::with_capacity(2 * m + 1);
        let mut x = 0i64;
        for _ in 0..m {
            let (t, _) = zero_gap_sample(rng, horizon);
            x -= t as i64;
            pts.push(x as f64);
        }
        pts.reverse();
        pts.push(0.0);
        let root = pts.len() as u32 - 1;
        let mut y = 0i64;
        for _ in 0..m {
            let (t, _) = zero_gap_sample(rng, horizon);
            y += t as i64;
            pts.push(y as f64);
        }
        let lo = pts[0];
        let hi = *pts.last().unwrap();
        let interior: Vec<f64> = pts.iter().map(|&p| (p - lo).min(hi - p)).collect();
        RootedSample::from_coords(1, pts, root, interior, Norm::L2)
    })
}

/// Right-gap sampler of the subdivided process: the base gap S is size-
/// biased by w = ceil(S^alpha) via rejection with the given cap, and the
/// root's right gap is S / w. A base draw with w > cap is a hard error.
pub struct Subdivision {
    pub base: JumpDistribution,
    pub alpha: f64,
    pub cap: f64,
}

impl Subdivision {
    pub fn new(base: JumpDistribution, alpha: f64, cap: f64) -> Result<Self> {
        base.validate()?;
        if !(alpha >= 0.0 && alpha < 1.0) {
            return Err(Error::domain("alpha must lie in [0,1)"));
        }
        if !(cap >= 1.0) {
            return Err(Error::domain("cap must be >= 1"));
        }
        Ok(Subdivision { base, alpha, cap })
    }

    /// One biased draw of (S, w) by rejection.
    pub fn sample_biased_gap(&self, rng: &mut ChaCha8Rng) -> Result<(f64, u64)> {
        const MAX_TRIES: u64 = 100_000_000;
        for _ in 0..MAX_TRIES {
            let s = self.base.sample(rng);
            let w = s.powf(self.alpha).ceil();
            if w > self.cap {
                return Err(Error::BiasCapExceeded { got: w, cap: self.cap });
            }
            if rng.gen::<f64>() * self.cap < w {
                return Ok((s, w as u64));
            }
        }
        Err(Error::domain("subdivision rejection sampler exhausted"))
    }

    /// The root's right gap in the subdivided process.
    pub fn sample_root_gap(&self, rng: &mut ChaCha8Rng) -> Result<f64> {
        let (s, w) = self.sample_biased_gap(rng)?;
        Ok(s / w as f64)
    }
}

/// Window sampler of the subdivided point process: the root interval is the
/// biased gap with the root uniform among its subdivision points; other
/// intervals are i.i.d. base gaps, each split into ceil(S^alpha) parts.
/// Marks: slot 0 = 1 for original points of the base process.
pub fn subdivide_process(
    base: JumpDistribution,
    alpha: f64,
    cap: f64,
    intervals_per_side: u32,
) -> Result<RootedSampler> {
    let sub = Subdivision::new(base, alpha, cap)?;
    Ok(RootedSampler::new(format!("subdivision alpha={alpha}"), 0x5eed3, move |rng| {
        let mut pts: Vec<(f64, f64)> = Vec::new(); // (coord, original flag)
        // root interval [a, a + S) with a <= 0 < a + S: root at index j of
        // the subdivision points, uniform in 0..w
        let (s, w) = sub.sample_biased_gap(rng)?;
        let j = rng.gen_range(0..w);
        let step = s / w as f64;
        let a = -(j as f64) * step;
        for i in 0..w {
            pts.push((a + i as f64 * step, if i == 0 { 1.0 } else { 0.0 }));
        }
        pts.push((a + s, 1.0));
        // extend right
        let mut right = a + s;
        for _ in 0..intervals_per_side {
            let g = sub.base.sample(rng);
            let parts = g.powf(sub.alpha).ceil() as u64;
            let step = g / parts as f64;
            for i in 1..=parts {
                pts.push((right + i as f64 * step, if i == parts { 1.0 } else { 0.0 }));
            }
            right += g;
        }
        // extend left
        let mut left = a;
        for _ in 0..intervals_per_side {
            let g = sub.base.sample(rng);
            let parts = g.powf(sub.alpha).ceil() as u64;
            let step = g / parts as f64;
            for i in 1..=parts {
                pts.push((left - i as f64 * step, if i == parts { 1.0 } else { 0.0 }));
            }
            left -= g;
        }
        pts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let root = pts.iter().position(|&(x, _)| x == 0.0).unwrap() as u32;
        let lo = pts[0].0;
        let hi = pts.last().unwrap().0;
        let coords: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let interior: Vec<f64> = coords.iter().map(|&p| (p - lo).min(hi - p)).collect();
        let marks = Marks { arity: 1, values: pts.iter().map(|p| p.1).collect() };
        RootedSample::from_coords(1, coords, root, interior, Norm::L2)?.with_marks(marks)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::replicate_rng;

    #[test]
    fn deterministic_jump_reproduces_lattice() {
        let sampler = gen_srw_image(JumpDistribution::Deterministic(1.0), 10).unwrap();
        let s = sampler.sample(0).unwrap();
        assert_eq!(s.len(), 21);
        for v in 0..21u32 {
            let x = s.coords_of(v).unwrap()[0];
            assert_eq!(x, v as f64 - 10.0);
        }
        let lattice = crate::gen::lattice::lattice_window(
            crate::gen::lattice::LatticeWindowSpec {
                k: 1,
                delta: 1.0,
                half: 10,
                norm: Norm::L2,
            },
        )
        .unwrap();
        // same points, same gaps
        for v in 0..21u32 {
            assert_eq!(s.coords_of(v).unwrap()[0], lattice.coords_of(v).unwrap()[0]);
        }
    }

    #[test]
    fn pareto_tail_matches_frequency() {
        let law = JumpDistribution::Pareto { beta: 0.5, xm: 1.0, cap: 1e8 };
        let reps = 40_000u64;
        let mut hits = [0u64; 3];
        let rs = [2.0, 8.0, 64.0];
        for i in 0..reps {
            let mut rng = replicate_rng(70, i);
            let s = law.sample(&mut rng);
            for (j, &r) in rs.iter().enumerate() {
                if s >= r {
                    hits[j] += 1;
                }
            }
        }
        for (j, &r) in rs.iter().enumerate() {
            let f = hits[j] as f64 / reps as f64;
            let p = law.tail(r);
            let se = (p * (1.0 - p) / reps as f64).sqrt();
            assert!((f - p).abs() < 4.0 * se, "r={r}: {f} vs {p}");
        }
    }

    #[test]
    fn image_gap_survival_equals_jump_tail() {
        // P(Phi ∩ (0, r) = ∅) = P(S_1 >= r): empirical right-gap of the
        // window vs the jump tail
        let law = JumpDistribution::Pareto { beta: 2.0, xm: 1.0, cap: 1e8 };
        let sampler = gen_srw_image(law.clone(), 4).unwrap();
        let reps = 20_000u64;
        let r = 3.0;
        let mut hits = 0u64;
        for i in 0..reps {
            let s = sampler.sample(i).unwrap();
            let o = s.root();
            let x = s.coords_of(o).unwrap()[0];
            let right_gap = s.coords_of(o + 1).unwrap()[0] - x;
            if right_gap >= r {
                hits += 1;
            }
        }
        let f = hits as f64 / reps as f64;
        let p = law.tail(r);
        assert!((f - p).abs() < 0.01, "{f} vs {p}");
    }

    #[test]
    fn zeros_contain_origin_and_even_gaps() {
        let sampler = gen_srw_zeros(6, 1 << 20);
        for i in 0..10 {
            let s = sampler.sample(i).unwrap();
            let root = s.root();
            assert_eq!(s.coords_of(root).unwrap()[0], 0.0);
            for v in 1..s.len() as u32 {
                let gap = s.coords_of(v).unwrap()[0] - s.coords_of(v - 1).unwrap()[0];
                assert!(gap > 0.0);
                assert_eq!(gap as i64 % 2, 0, "consecutive zeros differ by an even number");
            }
        }
    }

    #[test]
    fn return_time_frequencies_match_reflection_oracle() {
        // P(T > 2m) = C(2m,m)/4^m
        let reps = 60_000u64;
        let mut exceed = [0u64; 3];
        let ms = [1u64, 4, 16];
        for i in 0..reps {
            let mut rng = replicate_rng(71, i);
            let (t, _) = zero_gap_sample(&mut rng, 1 << 22);
            for (j, &m) in ms.iter().enumerate() {
                if t > 2 * m {
                    exceed[j] += 1;
                }
            }
        }
        for (j, &m) in ms.iter().enumerate() {
            let f = exceed[j] as f64 / reps as f64;
            let p = zero_gap_tail_exact(m);
            let se = (p * (1.0 - p) / reps as f64).sqrt();
            assert!((f - p).abs() < 4.0 * se, "m={m}: {f} vs {p}");
        }
    }

    #[test]
    fn subdivision_alpha_to_zero_leaves_gaps_unchanged() {
        // at alpha = 0, ceil(S^0) = 1: no points are added and the bias is
        // trivial, so the subdivided process is the base process
        let law = JumpDistribution::Table(vec![(1.0, 0.5), (2.0, 0.5)]);
        let sub = Subdivision::new(law, 0.0, 4.0).unwrap();
        for i in 0..50 {
            let mut rng = replicate_rng(72, i);
            let (s, w) = sub.sample_biased_gap(&mut rng).unwrap();
            assert_eq!(w, 1);
            assert!(s == 1.0 || s == 2.0);
        }
    }

    #[test]
    fn subdivision_gap_survival_matches_biased_formula() {
        // P(Psi ∩ (0,r) = ∅) = E[w 1{S/w > r}] / E[w]
        let law = JumpDistribution::Pareto { beta: 0.8, xm: 1.0, cap: 1e6 };
        let sub = Subdivision::new(law.clone(), 0.5, 1_000.0).unwrap();
        let reps = 30_000u64;
        let r = 4.0;
        let mut hits = 0u64;
        for i in 0..reps {
            let mut rng = replicate_rng(73, i);
            let gap = sub.sample_root_gap(&mut rng).unwrap();
            if gap > r {
                hits += 1;
            }
        }
        let f = hits as f64 / reps as f64;
        // oracle: plain Monte-Carlo of the E-form identity with independent
        // unbiased draws
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..200_000u64 {
            let mut rng = replicate_rng(74, i);
            let s = law.sample(&mut rng);
            let w = s.powf(0.5).ceil();
            den += w;
            if s / w > r {
                num += w;
            }
        }
        let p = num / den;
        assert!((f - p).abs() < 0.015, "{f} vs {p}");
    }

    #[test]
    fn subdivision_window_root_at_zero_with_marks() {
        let law = JumpDistribution::Pareto { beta: 0.8, xm: 1.0, cap: 1e6 };
        let sampler = subdivide_process(law, 0.5, 1_000.0, 4).unwrap();
        let s = sampler.sample(3).unwrap();
        assert_eq!(s.coords_of(s.root()).unwrap()[0], 0.0);
        let m = s.marks().unwrap();
        // original points present on both sides
        let originals =
            (0..s.len() as u32).filter(|&v| m.get(v)[0] == 1.0).count();
        assert!(originals >= 8);
    }
}
