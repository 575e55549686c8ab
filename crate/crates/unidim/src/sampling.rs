//! Uniform-root sampling, mass-transport-principle checks, intensity
//! estimation, and distribution biasing.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::space::{PointId, RootedSample};
use crate::stats::{normal_quantile, par_accumulate, replicate_rng, MeanEstimate};

/// Seeded generator of independent realizations. Same (seed, index) is
/// bit-reproducible; worker i uses the stream derived from (seed, i).
#[derive(Clone)]
pub struct RootedSampler {
    pub name: String,
    pub seed: u64,
    gen: Arc<dyn Fn(&mut ChaCha8Rng) -> Result<RootedSample> + Send + Sync>,
}

impl RootedSampler {
    pub fn new(
        name: impl Into<String>,
        seed: u64,
        gen: impl Fn(&mut ChaCha8Rng) -> Result<RootedSample> + Send + Sync + 'static,
    ) -> Self {
        RootedSampler { name: name.into(), seed, gen: Arc::new(gen) }
    }

    pub fn sample(&self, replicate: u64) -> Result<RootedSample> {
        let mut rng = replicate_rng(self.seed, replicate);
        (self.gen)(&mut rng)
    }

    /// Same generator under a different master seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        RootedSampler { name: self.name.clone(), seed, gen: self.gen.clone() }
    }
}

/// Uniform re-rooting of a finite space (every point interior).
pub fn uniform_root(space: &RootedSample, rng: &mut ChaCha8Rng) -> Result<RootedSample> {
    if space.is_empty() {
        return Err(Error::domain("empty space"));
    }
    let v = rng.gen_range(0..space.len()) as PointId;
    space.rerooted(v)
}

/// Nonnegative transport function g[D,u,v]; must depend only on
/// relabeling-invariant data (distances, marks, coordinates-as-marks).
#[derive(Clone)]
pub struct TransportFunction {
    pub name: String,
    /// pairs with d(u,v) beyond this radius contribute zero
    pub support_radius: f64,
    f: Arc<dyn Fn(&RootedSample, PointId, PointId) -> f64 + Send + Sync>,
}

impl TransportFunction {
    pub fn new(
        name: impl Into<String>,
        support_radius: f64,
        f: impl Fn(&RootedSample, PointId, PointId) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TransportFunction { name: name.into(), support_radius, f: Arc::new(f) }
    }

    pub fn eval(&self, s: &RootedSample, u: PointId, v: PointId) -> f64 {
        (self.f)(s, u, v)
    }

    /// Outgoing mass from the root: sum over the support ball.
    pub fn outgoing(&self, s: &RootedSample) -> Result<f64> {
        let o = s.root();
        let ball = s.ball(o, self.support_radius)?;
        let mut total = self.eval(s, o, o);
        for v in ball.ids {
            if v != o {
                total += self.eval(s, o, v);
            }
        }
        Ok(total)
    }

    /// Incoming mass into the root.
    pub fn incoming(&self, s: &RootedSample) -> Result<f64> {
        let o = s.root();
        let ball = s.ball(o, self.support_radius)?;
        let mut total = self.eval(s, o, o);
        for v in ball.ids {
            if v != o {
                total += self.eval(s, v, o);
            }
        }
        Ok(total)
    }

    /// Spot-check of relabeling invariance by random permutation.
    pub fn check_relabeling_invariance(
        &self,
        s: &RootedSample,
        rng: &mut ChaCha8Rng,
    ) -> Result<bool> {
        use rand::seq::SliceRandom;
        let n = s.len();
        let mut perm: Vec<PointId> = (0..n as u32).collect();
        perm.shuffle(rng);
        let relabeled = s.relabeled(&perm)?;
        for _ in 0..20.min(n * n) {
            let u = rng.gen_range(0..n) as u32;
            let v = rng.gen_range(0..n) as u32;
            let a = self.eval(s, u, v);
            let b = self.eval(&relabeled, perm[u as usize], perm[v as usize]);
            if (a - b).abs() > 1e-9 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone)]
pub struct MtpExactReport {
    pub outgoing: f64,
    pub incoming: f64,
}

impl MtpExactReport {
    pub fn gap(&self) -> f64 {
        (self.outgoing - self.incoming).abs()
    }
}

/// Exact MTP identity on a finite deterministic space under the uniform
/// root: both sides equal (1/|D|) Σ_u Σ_v g[D,u,v]. The two sides are
/// summed in transposed orders; any gap is floating-point only.
pub fn mtp_check_exact(space: &RootedSample, g: &TransportFunction) -> MtpExactReport {
    let n = space.len();
    let mut out = 0.0;
    let mut inc = 0.0;
    for u in 0..n as u32 {
        for v in 0..n as u32 {
            out += g.eval(space, u, v);
        }
    }
    for v in 0..n as u32 {
        for u in 0..n as u32 {
            inc += g.eval(space, v, u);
        }
    }
    MtpExactReport { outgoing: out / n as f64, incoming: inc / n as f64 }
}

#[derive(Debug, Clone)]
pub struct MtpFunctionReport {
    pub name: String,
    pub diff: MeanEstimate,
    pub z: f64,
    pub threshold: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone)]
pub struct MtpStatReport {
    pub per_function: Vec<MtpFunctionReport>,
    pub level: f64,
    pub replicates: u64,
}

impl MtpStatReport {
    pub fn passed(&self) -> bool {
        self.per_function.iter().all(|r| !r.rejected)
    }
}

/// Statistical MTP check: per g, a paired z-test of E[g+(o) - g-(o)] = 0,
/// Bonferroni-corrected across the g list at the given confidence level.
/// Roots must be interior at each g's support radius.
pub fn mtp_check_statistical(
    sampler: &RootedSampler,
    gs: &[TransportFunction],
    reps: u64,
    level: f64,
) -> Result<MtpStatReport> {
    if !(level > 0.5 && level < 1.0) {
        return Err(Error::domain("confidence level must be in (0.5, 1)"));
    }
    let m = gs.len().max(1);
    let alpha = (1.0 - level) / m as f64;
    let threshold = normal_quantile(1.0 - alpha / 2.0);
    let mut per_function = Vec::with_capacity(gs.len());
    for g in gs {
        // fail fast on window-too-small before burning replicates
        let probe = sampler.sample(0)?;
        if !probe.is_interior(probe.root(), g.support_radius) {
            return Err(Error::window(format!(
                "support radius {} of {} exceeds the interior margin",
                g.support_radius, g.name
            )));
        }
        let acc = par_accumulate(reps, |i| {
            let s = sampler.sample(i).expect("sampler failed");
            let out = g.outgoing(&s).expect("outgoing");
            let inc = g.incoming(&s).expect("incoming");
            out - inc
        });
        let diff = acc.estimate();
        let z = diff.z_against(0.0);
        per_function.push(MtpFunctionReport {
            name: g.name.clone(),
            diff,
            z,
            threshold,
            rejected: z.abs() > threshold,
        });
    }
    Ok(MtpStatReport { per_function, level, replicates: reps })
}

#[derive(Debug, Clone, Copy)]
pub struct IntensityEstimate {
    pub estimate: f64,
    /// half-width of the 95% normal interval
    pub ci: f64,
    pub n: u64,
}

impl IntensityEstimate {
    pub fn from_mean(est: MeanEstimate) -> Self {
        IntensityEstimate { estimate: est.mean, ci: est.ci95(), n: est.n as u64 }
    }

    pub fn contains(&self, p: f64) -> bool {
        (self.estimate - p).abs() <= self.ci
    }
}

/// Monte-Carlo estimate of P(o ∈ S_D) for a root-membership predicate.
pub fn intensity(
    sampler: &RootedSampler,
    membership: impl Fn(&RootedSample) -> bool + Sync,
    reps: u64,
) -> Result<IntensityEstimate> {
    let acc = par_accumulate(reps, |i| {
        let s = sampler.sample(i).expect("sampler failed");
        if membership(&s) {
            1.0
        } else {
            0.0
        }
    });
    Ok(IntensityEstimate::from_mean(acc.estimate()))
}

/// Rejection-sampling bias of a sampler's law by a bounded weight: accept a
/// draw with probability weight/cap. Downstream estimators stay plain
/// averages. A draw whose weight exceeds the cap invalidates the cap and is
/// a hard error.
pub fn bias_sampler(
    sampler: &RootedSampler,
    weight: impl Fn(&RootedSample) -> f64 + Send + Sync + 'static,
    cap: f64,
) -> Result<RootedSampler> {
    if !(cap > 0.0) {
        return Err(Error::domain("cap must be positive"));
    }
    let inner = sampler.clone();
    let name = format!("{}|biased", sampler.name);
    Ok(RootedSampler::new(name, sampler.seed, move |rng| {
        const MAX_TRIES: u64 = 10_000_000;
        for _ in 0..MAX_TRIES {
            // derive an independent inner replicate from this stream
            let idx: u64 = rng.gen();
            let s = inner.sample(idx)?;
            let w = weight(&s);
            if w < 0.0 {
                return Err(Error::domain("negative bias weight"));
            }
            if w > cap {
                return Err(Error::BiasCapExceeded { got: w, cap });
            }
            if rng.gen::<f64>() * cap < w {
                return Ok(s);
            }
        }
        Err(Error::domain("bias rejection sampler exhausted"))
    }))
}

/// Default transport-function catalog. Coordinate-backed models get the
/// left/right asymmetry functions; level-marked trees get the parent/child
/// conservation function (mark slot 0 = level).
pub fn default_g_catalog(radius: f64) -> Vec<TransportFunction> {
    vec![g_ball_indicator(radius), g_distance_sum(radius), g_right_left(radius), g_child_parent()]
}

/// g = 1{0 < d(u,v) <= rho}: symmetric, sanity anchor.
pub fn g_ball_indicator(rho: f64) -> TransportFunction {
    TransportFunction::new(format!("ball-count<={rho}"), rho, move |s, u, v| {
        if u == v {
            return 0.0;
        }
        if s.dist(u, v) <= rho {
            1.0
        } else {
            0.0
        }
    })
}

/// g = d(u,v) 1{d <= rho}: symmetric with varying magnitude.
pub fn g_distance_sum(rho: f64) -> TransportFunction {
    TransportFunction::new(format!("distance-sum<={rho}"), rho, move |s, u, v| {
        if u == v {
            return 0.0;
        }
        let d = s.dist(u, v);
        if d <= rho {
            d
        } else {
            0.0
        }
    })
}

/// For 1-d coordinate models: g = 1{v lies in (u, u + rho]}. MTP forces
/// E[#points right of the root] = E[#points left of it] within the support.
pub fn g_right_left(rho: f64) -> TransportFunction {
    TransportFunction::new(format!("right-within{rho}"), rho, move |s, u, v| {
        match (s.coords_of(u), s.coords_of(v)) {
            (Some(a), Some(b)) if s.dim() == 1 => {
                let gap = b[0] - a[0];
                if gap > 0.0 && gap <= rho {
                    1.0
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    })
}

/// For level-marked trees (mark slot 0 = level, parent one level up):
/// g(u,v) = 1{v adjacent to u, level(v) = level(u)+1}. Outgoing mass is
/// 1{root has a parent}, incoming is the child count; MTP forces mean
/// offspring 1.
pub fn g_child_parent() -> TransportFunction {
    TransportFunction::new("child-parent", 1.5, move |s, u, v| {
        if u == v {
            return 0.0;
        }
        match s.marks() {
            Some(m) if m.arity >= 1 => {
                let lu = m.get(u)[0];
                let lv = m.get(v)[0];
                if (lv - lu - 1.0).abs() < 1e-9 && s.dist(u, v) <= 1.0 + 1e-9 {
                    1.0
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    })
}
