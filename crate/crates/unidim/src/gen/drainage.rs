//! Drainage network on the even lattice: every (x,y) with x+y even drains
//! to (x-1,y-1) or (x+1,y-1) with equal probability. Under the parent map
//! F(x,y) = the chosen lower vertex, the descendants of the origin form the
//! upstream basin, whose levels are intervals; h(o) is the number of levels
//! before the two boundary walks cross.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::space::{Marks, RootedSample};
use crate::tree::TreeWindow;

/// Height of the root's basin, by direct simulation of the interval
/// boundaries: per level the left edge moves -1/+1 and the right edge
/// +1/-1, each with probability 1/2, until the interval empties.
pub fn drainage_height_sampler(rng: &mut ChaCha8Rng, cap: u32) -> (u32, bool) {
    let mut lo = 0i64;
    let mut hi = 0i64;
    let mut level = 0u32;
    loop {
        if level >= cap {
            return (cap, true);
        }
        // left boundary vertex (lo-1, level+1) joins iff it picks +1;
        // right boundary vertex (hi+1, level+1) joins iff it picks -1
        lo += if rng.gen::<bool>() { -1 } else { 1 };
        hi += if rng.gen::<bool>() { 1 } else { -1 };
        if lo > hi {
            return (level, false);
        }
        level += 1;
    }
}

/// Exact P(h(o) >= 1): of the 4 equally likely first-step pairs of the two
/// boundary vertices, 3 leave the basin nonempty.
pub const DRAINAGE_SURVIVAL_AT_1: f64 = 0.75;

/// Explicit drainage window on the even lattice box [-half, half]^2 rooted
/// at the origin, as a TreeWindow with planar coordinates (level marks are
/// y + half so they increase away from the end).
pub fn drainage_window(half: i64, rng: &mut ChaCha8Rng) -> Result<TreeWindow> {
    let mut ids = std::collections::HashMap::new();
    let mut coords = Vec::new();
    let mut level = Vec::new();
    for x in -half..=half {
        for y in -half..=half {
            if (x + y).rem_euclid(2) == 0 {
                let id = coords.len() as u32;
                ids.insert((x, y), id);
                coords.push((x as f64, y as f64));
                level.push((y + half) as u32);
            }
        }
    }
    let n = coords.len();
    let mut parent: Vec<Option<u32>> = vec![None; n];
    for (&(x, y), &id) in &ids {
        if y - 1 >= -half {
            let dx = if rng.gen::<bool>() { 1 } else { -1 };
            // a wall vertex may drain out of the window; it then joins the
            // frontier instead of getting a distorted parent
            if let Some(&p) = ids.get(&(x + dx, y - 1)) {
                parent[id as usize] = Some(p);
            }
        }
    }
    // children are complete except on the top row and at the side walls
    let children_complete: Vec<bool> = (0..n as u32)
        .map(|id| {
            let (x, y) = coords[id as usize];
            (y as i64) < half && (x as i64).abs() < half
        })
        .collect();
    let root = ids[&(0, 0)];
    let mut tw = TreeWindow::from_parents(parent, &children_complete, root)?;
    tw.coords = Some(coords);
    tw.level = level;
    Ok(tw)
}

/// Sampler producing drainage windows with planar coordinates and level
/// marks (graph metric; the Euclidean variant re-backs the same window).
pub fn gen_drainage(half: i64) -> crate::sampling::RootedSampler {
    crate::sampling::RootedSampler::new("drainage", 0xd2a1, move |rng| {
        let tw = drainage_window(half, rng)?;
        let s = tw.to_sample()?;
        let marks = Marks { arity: 1, values: tw.level.iter().map(|&l| l as f64).collect() };
        s.with_marks(marks)
    })
}

/// Euclidean-metric view of a drainage window (subspace-of-Z^2 check).
pub fn drainage_euclidean(half: i64, rng: &mut ChaCha8Rng) -> Result<RootedSample> {
    let tw = drainage_window(half, rng)?;
    let s = tw.to_sample()?;
    s.with_backend(crate::space::MetricBackend::Coords(crate::space::Norm::L2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::replicate_rng;

    #[test]
    fn out_degree_one_everywhere() {
        let mut rng = replicate_rng(80, 0);
        let tw = drainage_window(8, &mut rng).unwrap();
        // every vertex above the bottom row drains to exactly one parent
        // (wall vertices may drain out of the window)
        for v in 0..tw.len() {
            let (x, y) = tw.coords.as_ref().unwrap()[v];
            if y as i64 > -8 && (x as i64).abs() < 8 {
                assert!(tw.parent[v].is_some(), "vertex {v} must drain");
            }
            if y as i64 == -8 {
                assert!(tw.parent[v].is_none());
            }
        }
    }

    #[test]
    fn survival_at_one_is_three_quarters() {
        // enumerate the 4 equally likely first-step pairs: both boundary
        // vertices abandoning the basin is the only extinction event
        let reps = 60_000u64;
        let mut hits = 0u64;
        for i in 0..reps {
            let mut rng = replicate_rng(81, i);
            let (h, _) = drainage_height_sampler(&mut rng, 64);
            if h >= 1 {
                hits += 1;
            }
        }
        let f = hits as f64 / reps as f64;
        assert!((f - DRAINAGE_SURVIVAL_AT_1).abs() < 0.01, "{f}");
    }

    #[test]
    fn survival_exponent_is_about_half() {
        // P(h >= n) ~ c n^{-1/2}: check the ratio at n vs 4n is about 1/2
        let reps = 120_000u64;
        let cap = 1 << 12;
        let mut c16 = 0u64;
        let mut c64 = 0u64;
        let mut c256 = 0u64;
        for i in 0..reps {
            let mut rng = replicate_rng(82, i);
            let (h, _) = drainage_height_sampler(&mut rng, cap);
            if h >= 16 {
                c16 += 1;
            }
            if h >= 64 {
                c64 += 1;
            }
            if h >= 256 {
                c256 += 1;
            }
        }
        let r1 = c64 as f64 / c16 as f64;
        let r2 = c256 as f64 / c64 as f64;
        assert!((r1 - 0.5).abs() < 0.06, "ratio 16->64: {r1}");
        assert!((r2 - 0.5).abs() < 0.09, "ratio 64->256: {r2}");
    }

    #[test]
    fn window_heights_match_boundary_walk_simulation() {
        // same realization cross-check: the basin machinery on the window
        // agrees with the direct height of the root where certain
        for seed in 0..20 {
            let mut rng = replicate_rng(83, seed);
            let tw = drainage_window(12, &mut rng).unwrap();
            let root = tw.root;
            if tw.height_certain[root as usize] {
                // recompute by walking the explicit descendant set
                let desc = tw.descendants(root);
                let levels: Vec<u32> =
                    desc.iter().map(|&v| tw.level[v as usize]).collect();
                let h = levels.iter().max().unwrap() - tw.level[root as usize];
                assert_eq!(tw.height[root as usize], h);
            }
        }
    }
}
