//! Exact r-embeddability decision and the kappa distance between two finite
//! rooted samples (simple spaces only).
//!
//! An r-embedding of (A,o) into (B,o') is an injection f of the closed ball
//! N_r(o) into B with f(o) = o' and additive distortion at most 1/r on every
//! pair. Two spaces are r-similar when each r-embeds into the other; kappa is
//! 1 ∧ inf{eps > 0 : 1/eps-similar}, located here by bisection.

use crate::error::{Error, Result};
use crate::space::{PointId, RootedSample};

/// Hard cap on the ball size fed to the backtracking injection search.
pub const INJECTION_SEARCH_CAP: usize = 20;

#[derive(Debug, Clone)]
pub struct EmbeddingWitness {
    /// pairs (point of N_r(o_A), image in B)
    pub map: Vec<(PointId, PointId)>,
    pub distortion: f64,
}

struct BallView {
    ids: Vec<PointId>,
    dist: Vec<f64>, // dense |ids| x |ids|
}

impl BallView {
    fn build(sample: &RootedSample, center: PointId, r: f64) -> Result<Self> {
        if !sample.is_interior(center, r) {
            return Err(Error::window(format!(
                "ball of radius {r} around point {center} leaves the window"
            )));
        }
        let mut ids = if r == 0.0 { vec![] } else { sample.ball(center, r)?.ids };
        ids.retain(|&v| v != center);
        ids.insert(0, center);
        let n = ids.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = sample.dist(ids[i], ids[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(BallView { ids, dist })
    }

    fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.ids.len() + j]
    }
}

fn backtrack_embedding(
    source: &BallView,
    target: &BallView,
    order: &[usize],
    assign: &mut Vec<usize>,
    used: &mut [bool],
    tol: f64,
) -> bool {
    let step = assign.len();
    if step == order.len() {
        return true;
    }
    let si = order[step];
    let upper = if step == 0 { 1 } else { target.ids.len() };
    for ti in 0..upper {
        if used[ti] {
            continue;
        }
        let ok = (0..step).all(|p| {
            let sp = order[p];
            let tp = assign[p];
            (source.d(si, sp) - target.d(ti, tp)).abs() <= tol + 1e-12
        });
        if !ok {
            continue;
        }
        used[ti] = true;
        assign.push(ti);
        if backtrack_embedding(source, target, order, assign, used, tol) {
            return true;
        }
        assign.pop();
        used[ti] = false;
    }
    false
}

/// Decides whether (A, o_A) is r-embeddable into (B, o_B) and returns a
/// witness if so. The search restricts candidate images to N_{r+1/r}(o_B),
/// which is exhaustive for injections of distortion <= 1/r.
pub fn is_r_embeddable(
    a: &RootedSample,
    b: &RootedSample,
    r: f64,
) -> Result<Option<EmbeddingWitness>> {
    if !(r > 0.0) {
        return Err(Error::domain("r must be positive"));
    }
    let tol = 1.0 / r;
    let source = BallView::build(a, a.root(), r)?;
    let target = BallView::build(b, b.root(), r + tol)?;
    if source.ids.len() > INJECTION_SEARCH_CAP {
        return Err(Error::InjectionSearchTooLarge(source.ids.len(), INJECTION_SEARCH_CAP));
    }
    if source.ids.len() > target.ids.len() {
        return Ok(None);
    }

    let ns = source.ids.len();
    // order source points by distance from the root: tight prunes early
    let mut order: Vec<usize> = (0..ns).collect();
    order.sort_by(|&i, &j| source.d(0, i).partial_cmp(&source.d(0, j)).unwrap());

    let mut assign: Vec<usize> = Vec::with_capacity(ns);
    let mut used = vec![false; target.ids.len()];

    if backtrack_embedding(&source, &target, &order, &mut assign, &mut used, tol) {
        let mut map = Vec::with_capacity(ns);
        let mut distortion = 0.0f64;
        for (p, &ti) in assign.iter().enumerate() {
            map.push((source.ids[order[p]], target.ids[ti]));
            for (q, &tj) in assign.iter().enumerate().take(p) {
                distortion =
                    distortion.max((source.d(order[p], order[q]) - target.d(ti, tj)).abs());
            }
        }
        map.sort_unstable_by_key(|&(s, _)| s);
        Ok(Some(EmbeddingWitness { map, distortion }))
    } else {
        Ok(None)
    }
}

/// Mutual r-embeddability.
pub fn is_r_similar(a: &RootedSample, b: &RootedSample, r: f64) -> Result<bool> {
    Ok(is_r_embeddable(a, b, r)?.is_some() && is_r_embeddable(b, a, r)?.is_some())
}

#[derive(Debug, Clone)]
pub struct KappaResult {
    /// kappa located to within `tol` (an upper bracket of the true value).
    pub value: f64,
    /// last r at which mutual embeddability held, with witnesses.
    pub bracket_r: f64,
    pub witness_ab: Option<EmbeddingWitness>,
    pub witness_ba: Option<EmbeddingWitness>,
}

/// Computes kappa(A, B) by bisection on eps to absolute tolerance `tol`.
/// Values at or below `tol` mean the spaces are indistinguishable at this
/// resolution (kappa(A, A) reports <= tol).
pub fn kappa(a: &RootedSample, b: &RootedSample, tol: f64) -> Result<KappaResult> {
    if !(tol >= 1e-9) {
        return Err(Error::domain("tol must be at least 1e-9"));
    }
    let similar = |eps: f64| -> Result<bool> { is_r_similar(a, b, 1.0 / eps) };

    if !similar(1.0)? {
        // not even 1-similar; smaller eps is harder, so kappa = 1
        return Ok(KappaResult { value: 1.0, bracket_r: 1.0, witness_ab: None, witness_ba: None });
    }
    // find a failing lower end by halving; stop when eps drops below tol
    let mut hi = 1.0f64;
    let mut lo = 0.5f64;
    while similar(lo)? {
        hi = lo;
        lo /= 2.0;
        if hi <= tol {
            let r = 1.0 / hi;
            let w1 = is_r_embeddable(a, b, r)?;
            let w2 = is_r_embeddable(b, a, r)?;
            return Ok(KappaResult { value: hi, bracket_r: r, witness_ab: w1, witness_ba: w2 });
        }
    }
    // invariant: similar(hi), !similar(lo)
    while hi - lo > tol {
        let mid = 0.5 * (hi + lo);
        if similar(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = 1.0 / hi;
    let w1 = is_r_embeddable(a, b, r)?;
    let w2 = is_r_embeddable(b, a, r)?;
    Ok(KappaResult { value: hi, bracket_r: r, witness_ab: w1, witness_ba: w2 })
}

/// Exhaustive rooted-isomorphism search between two complete finite samples.
/// Distances must match within `tol` (1e-9 for exact constructions).
pub fn find_isomorphism(
    a: &RootedSample,
    b: &RootedSample,
    tol: f64,
) -> Option<Vec<(PointId, PointId)>> {
    if a.len() != b.len() {
        return None;
    }
    let n = a.len();
    let ids_a: Vec<PointId> =
        std::iter::once(a.root()).chain((0..n as u32).filter(|&v| v != a.root())).collect();
    let mut assign: Vec<PointId> = Vec::with_capacity(n);
    let mut used = vec![false; n];

    fn backtrack(
        a: &RootedSample,
        b: &RootedSample,
        ids_a: &[PointId],
        assign: &mut Vec<PointId>,
        used: &mut [bool],
        tol: f64,
    ) -> bool {
        let step = assign.len();
        if step == ids_a.len() {
            return true;
        }
        let candidates: Vec<PointId> =
            if step == 0 { vec![b.root()] } else { (0..b.len() as u32).collect() };
        for cand in candidates {
            if used[cand as usize] {
                continue;
            }
            let ok = (0..step)
                .all(|p| (a.dist(ids_a[step], ids_a[p]) - b.dist(cand, assign[p])).abs() <= tol);
            if !ok {
                continue;
            }
            used[cand as usize] = true;
            assign.push(cand);
            if backtrack(a, b, ids_a, assign, used, tol) {
                return true;
            }
            assign.pop();
            used[cand as usize] = false;
        }
        false
    }

    if backtrack(a, b, &ids_a, &mut assign, &mut used, tol) {
        Some(ids_a.into_iter().zip(assign).collect())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Norm;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn line_space(points: &[f64], root_idx: u32) -> RootedSample {
        let n = points.len();
        RootedSample::from_coords(1, points.to_vec(), root_idx, vec![f64::INFINITY; n], Norm::L2)
            .unwrap()
    }

    fn z_window(half: i64) -> RootedSample {
        let pts: Vec<f64> = (-half..=half).map(|x| x as f64).collect();
        line_space(&pts, half as u32)
    }

    fn two_z_window(half: i64) -> RootedSample {
        let pts: Vec<f64> = (-half..=half).map(|x| (2 * x) as f64).collect();
        line_space(&pts, half as u32)
    }

    #[test]
    fn identity_witness_zero_distortion() {
        let a = z_window(6);
        let w = is_r_embeddable(&a, &a, 2.0).unwrap().unwrap();
        assert_eq!(w.distortion, 0.0);
    }

    #[test]
    fn singleton_ball_embeds_anywhere() {
        let a = line_space(&[0.0], 0);
        let b = line_space(&[0.0, 5.0], 0);
        let w = is_r_embeddable(&a, &b, 1.0).unwrap().unwrap();
        assert_eq!(w.map, vec![(0, 0)]);
        assert_eq!(w.distortion, 0.0);
    }

    #[test]
    fn z_into_2z_fails_at_r2_and_r1() {
        // exhaustive injection search: any injection of {-2..2} into 2Z
        // distorts some unit pair by >= 1 > 1/2, so r=2 fails; the pair
        // (-1, 1) already forces failure at r=1.
        let a = z_window(6);
        let b = two_z_window(6);
        assert!(is_r_embeddable(&a, &b, 2.0).unwrap().is_none());
        assert!(is_r_embeddable(&a, &b, 1.0).unwrap().is_none());
        // direction check: 2Z embeds into Z isometrically whenever the
        // windows support the balls
        assert!(is_r_embeddable(&b, &a, 3.0).unwrap().is_some());
        // and trivially below r=1 where the source ball is the singleton root
        assert!(is_r_embeddable(&a, &b, 0.9).unwrap().is_some());
    }

    #[test]
    fn kappa_z_vs_2z_is_one() {
        // Z is not 1-embeddable into 2Z (previous test), hence the windows
        // are not 1-similar and kappa = 1 exactly.
        let a = z_window(8);
        let b = two_z_window(8);
        let k = kappa(&a, &b, 1e-3).unwrap();
        assert_eq!(k.value, 1.0);
        let k2 = kappa(&b, &a, 1e-3).unwrap();
        assert_eq!(k2.value, k.value);
    }

    #[test]
    fn kappa_self_reports_at_most_tol() {
        let a = z_window(5);
        let k = kappa(&a, &a, 1e-3).unwrap();
        assert!(k.value <= 1e-3);
    }

    #[test]
    fn monotonicity_in_r() {
        let mut rng = crate::stats::replicate_rng(23, 0);
        for _ in 0..10 {
            let n = rng.gen_range(2..8usize);
            let a =
                line_space(&(0..n).map(|_| rng.gen_range(-4.0..4.0)).collect::<Vec<_>>(), 0);
            let m = rng.gen_range(2..8usize);
            let b =
                line_space(&(0..m).map(|_| rng.gen_range(-4.0..4.0)).collect::<Vec<_>>(), 0);
            for r in [2.0, 1.5, 1.0, 0.75] {
                if is_r_embeddable(&a, &b, r).unwrap().is_some() {
                    for s in [0.6, 0.5] {
                        assert!(is_r_embeddable(&a, &b, s).unwrap().is_some());
                    }
                }
            }
        }
    }

    fn random_space(rng: &mut impl Rng, max_pts: usize) -> RootedSample {
        let n = rng.gen_range(1..=max_pts);
        // random points on a coarse grid keep distances well-separated
        let mut pts: Vec<f64> = Vec::new();
        while pts.len() < n {
            let c = (rng.gen_range(-20i32..=20) as f64) * 0.5;
            if pts.iter().all(|&p| (p - c).abs() > 1e-9) {
                pts.push(c);
            }
        }
        let root = rng.gen_range(0..pts.len()) as u32;
        line_space(&pts, root)
    }

    #[test]
    fn metric_axioms_on_random_spaces() {
        let mut rng = crate::stats::replicate_rng(71, 0);
        let tol = 1e-3;
        for _ in 0..20 {
            let a = random_space(&mut rng, 6);
            let b = random_space(&mut rng, 6);
            let c = random_space(&mut rng, 6);
            let kab = kappa(&a, &b, tol).unwrap().value;
            let kba = kappa(&b, &a, tol).unwrap().value;
            assert_eq!(kab, kba, "symmetry");
            let kac = kappa(&a, &c, tol).unwrap().value;
            let kcb = kappa(&c, &b, tol).unwrap().value;
            assert!(kab <= kac + kcb + 3.0 * tol, "triangle: {kab} vs {kac} + {kcb}");
        }
    }

    #[test]
    fn kappa_small_implies_isomorphic() {
        let mut rng = crate::stats::replicate_rng(72, 0);
        for _ in 0..10 {
            let a = random_space(&mut rng, 6);
            // relabeled copy of a
            let n = a.len();
            let mut perm: Vec<u32> = (0..n as u32).collect();
            perm.shuffle(&mut rng);
            let mut pts = vec![0.0; n];
            for v in 0..n {
                pts[perm[v] as usize] = a.coords_of(v as u32).unwrap()[0];
            }
            let b = line_space(&pts, perm[a.root() as usize]);
            let k = kappa(&a, &b, 1e-3).unwrap();
            assert!(k.value <= 1e-3, "relabeling must not change kappa");
            assert!(find_isomorphism(&a, &b, 1e-9).is_some());
        }
    }

    #[test]
    fn injection_cap_enforced() {
        let pts: Vec<f64> = (0..40).map(|x| x as f64 * 0.1).collect();
        let a = line_space(&pts, 0);
        match is_r_embeddable(&a, &a, 10.0) {
            Err(Error::InjectionSearchTooLarge(n, cap)) => assert!(n > cap),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn window_too_small_propagates() {
        let pts: Vec<f64> = (-3..=3).map(|x| x as f64).collect();
        let n = pts.len();
        // interior radius 1 everywhere: radius-2 balls leave the window
        let a = RootedSample::from_coords(1, pts, 3, vec![1.0; n], Norm::L2).unwrap();
        assert!(matches!(is_r_embeddable(&a, &a, 2.0), Err(Error::WindowTooSmall(_))));
    }
}
