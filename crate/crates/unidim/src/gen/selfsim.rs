//! Self-similar unimodular discrete spaces via the inductive rescaled-orbit
//! construction: K_0 = {o}, K_{n+1} = ∪_j f_j(K_n), viewed through the
//! random address chain g_n = f_{u_1}^{-1} ... f_{u_n}^{-1}, which makes the
//! rescaled sets nested. Point multiplicities (number of equal-length
//! addresses landing on the point) are tracked by coincidence detection,
//! and the root keeps its full address set for the covering statistics.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sampling::RootedSampler;
use crate::space::{Norm, RootedSample};

/// Similitude x -> ratio * Q x + t with Q orthogonal (k x k, row-major).
#[derive(Debug, Clone)]
pub struct Similitude {
    pub ratio: f64,
    pub rot: Vec<f64>,
    pub shift: Vec<f64>,
}

impl Similitude {
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let k = self.shift.len();
        for i in 0..k {
            let mut acc = 0.0;
            for j in 0..k {
                acc += self.rot[i * k + j] * x[j];
            }
            out[i] = self.ratio * acc + self.shift[i];
        }
    }

    /// Inverse similitude (ratio 1/r, transposed rotation).
    pub fn inverse(&self) -> Similitude {
        let k = self.shift.len();
        let mut rot = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                rot[i * k + j] = self.rot[j * k + i];
            }
        }
        // x = (1/r) Q^T (y - t)
        let mut shift = vec![0.0; k];
        for i in 0..k {
            let mut acc = 0.0;
            for j in 0..k {
                acc += rot[i * k + j] * self.shift[j];
            }
            shift[i] = -acc / self.ratio;
        }
        Similitude { ratio: 1.0 / self.ratio, rot, shift }
    }

    fn is_orthogonal(&self, k: usize) -> bool {
        for i in 0..k {
            for j in 0..k {
                let mut acc = 0.0;
                for m in 0..k {
                    acc += self.rot[m * k + i] * self.rot[m * k + j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                if (acc - want).abs() > 1e-9 {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
pub struct IfsSpec {
    pub k: usize,
    pub maps: Vec<Similitude>,
    pub base: Vec<f64>,
    /// optional open-set witness box (documentation only)
    pub open_set: Option<(Vec<f64>, Vec<f64>)>,
}

impl IfsSpec {
    pub fn validate(&self) -> Result<()> {
        if self.maps.is_empty() {
            return Err(Error::domain("IFS needs at least one map"));
        }
        let r = self.maps[0].ratio;
        for m in &self.maps {
            if !(m.ratio > 0.0 && m.ratio < 1.0) {
                return Err(Error::domain("similarity ratios must lie in (0,1)"));
            }
            if (m.ratio - r).abs() > 1e-12 {
                return Err(Error::domain("all similarity ratios must be equal"));
            }
            if m.rot.len() != self.k * self.k || m.shift.len() != self.k {
                return Err(Error::domain("map dimensions must match k"));
            }
            if !m.is_orthogonal(self.k) {
                return Err(Error::domain("rotation part must be orthogonal"));
            }
        }
        if self.base.len() != self.k {
            return Err(Error::domain("base point dimension mismatch"));
        }
        Ok(())
    }

    pub fn ratio(&self) -> f64 {
        self.maps[0].ratio
    }

    /// Similarity dimension log l / |log r|.
    pub fn similarity_dimension(&self) -> f64 {
        (self.maps.len() as f64).ln() / self.ratio().recip().ln()
    }

    pub fn cantor() -> IfsSpec {
        IfsSpec {
            k: 1,
            maps: vec![
                Similitude { ratio: 1.0 / 3.0, rot: vec![1.0], shift: vec![0.0] },
                Similitude { ratio: 1.0 / 3.0, rot: vec![1.0], shift: vec![2.0 / 3.0] },
            ],
            base: vec![0.0],
            open_set: Some((vec![0.0], vec![1.0])),
        }
    }

    pub fn sierpinski() -> IfsSpec {
        let h = 3f64.sqrt() / 2.0;
        let verts = [(0.0, 0.0), (1.0, 0.0), (0.5, h)];
        IfsSpec {
            k: 2,
            maps: verts
                .iter()
                .map(|&(x, y)| Similitude {
                    ratio: 0.5,
                    rot: vec![1.0, 0.0, 0.0, 1.0],
                    shift: vec![x / 2.0, y / 2.0],
                })
                .collect(),
            base: vec![0.0, 0.0],
            open_set: Some((vec![0.0, 0.0], vec![1.0, 1.0])),
        }
    }

    /// Koch-curve IFS (4 maps, ratio 1/3, with rotations).
    pub fn koch_curve() -> IfsSpec {
        let c = 0.5f64; // cos 60
        let s = 3f64.sqrt() / 2.0; // sin 60
        let rot = |a: f64, b: f64| vec![a, -b, b, a];
        IfsSpec {
            k: 2,
            maps: vec![
                Similitude { ratio: 1.0 / 3.0, rot: rot(1.0, 0.0), shift: vec![0.0, 0.0] },
                Similitude { ratio: 1.0 / 3.0, rot: rot(c, s), shift: vec![1.0 / 3.0, 0.0] },
                Similitude { ratio: 1.0 / 3.0, rot: rot(c, -s), shift: vec![0.5, s / 3.0] },
                Similitude { ratio: 1.0 / 3.0, rot: rot(1.0, 0.0), shift: vec![2.0 / 3.0, 0.0] },
            ],
            base: vec![0.0, 0.0],
            open_set: None,
        }
    }
}

/// One realization of the rescaled orbit to the given depth.
#[derive(Debug, Clone)]
pub struct SelfSimilarWindow {
    pub k: usize,
    pub depth: u32,
    /// point coordinates (flat)
    pub coords: Vec<f64>,
    /// multiplicity weights w_n(v)
    pub weights: Vec<u64>,
    pub root: u32,
    /// the root's equal-length address set at the final depth (packed
    /// base-l, least-recent symbol in the lowest digit)
    pub root_addresses: Vec<u64>,
    /// chosen chain u_1..u_depth
    pub chain: Vec<u8>,
    /// merge tolerance used for coincidence detection
    pub tol: f64,
}

impl SelfSimilarWindow {
    /// Suffix set of the root's addresses at length m, as packed words.
    pub fn root_suffixes(&self, m: u32, l: u64) -> Vec<u64> {
        let modulus = l.pow(m);
        let mut out: Vec<u64> =
            self.root_addresses.iter().map(|&a| a % modulus).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn to_sample(&self) -> Result<RootedSample> {
        let n = self.weights.len();
        // the window is exact out to the rescaled attractor span; interior
        // radius grows with depth, measured from the span of K_hat_depth
        // minus a diameter margin (points near the rim may gain neighbors
        // at later depths)
        let span: f64 = {
            let mut lo = vec![f64::INFINITY; self.k];
            let mut hi = vec![f64::NEG_INFINITY; self.k];
            for v in 0..n {
                for i in 0..self.k {
                    let c = self.coords[v * self.k + i];
                    lo[i] = lo[i].min(c);
                    hi[i] = hi[i].max(c);
                }
            }
            (0..self.k).map(|i| hi[i] - lo[i]).fold(0.0, f64::max)
        };
        let root_coord: Vec<f64> =
            self.coords[self.root as usize * self.k..(self.root as usize + 1) * self.k].to_vec();
        let interior: Vec<f64> = (0..n)
            .map(|v| {
                let mut d2 = 0.0;
                for i in 0..self.k {
                    let diff = self.coords[v * self.k + i] - root_coord[i];
                    d2 += diff * diff;
                }
                // balls around points close to the root stay complete up to
                // a constant fraction of the current span
                (span / 4.0 - d2.sqrt()).max(0.0)
            })
            .collect();
        RootedSample::from_coords(self.k, self.coords.clone(), self.root, interior, Norm::L2)
    }
}

/// Runs the inductive construction: per step draw u uniform in 1..=l and
/// map every point through g f_u^{-1} f_j g^{-1} for each j, merging
/// coincidences at the guarded tolerance.
pub fn self_similar_window(
    ifs: &IfsSpec,
    depth: u32,
    rng: &mut ChaCha8Rng,
) -> Result<SelfSimilarWindow> {
    ifs.validate()?;
    let l = ifs.maps.len();
    let k = ifs.k;
    // merge tolerance: well below the minimal point separation, which is
    // order 1 in rescaled units for depth-respecting constructions
    let tol = 1e-7;

    // state: coordinates, weights, addresses per point
    let mut coords: Vec<f64> = ifs.base.clone();
    let mut weights: Vec<u64> = vec![1];
    let mut addresses: Vec<Vec<u64>> = vec![vec![0]];
    let mut chain: Vec<u8> = Vec::with_capacity(depth as usize);

    // composed maps g_n (and inverse) kept as explicit similitudes
    let mut g = Similitude {
        ratio: 1.0,
        rot: identity(k),
        shift: vec![0.0; k],
    };

    for step in 0..depth {
        let u = rng.gen_range(0..l);
        chain.push(u as u8);
        // h_j = g f_u^{-1} f_j g^{-1}
        let g_inv = g.inverse();
        let fu_inv = ifs.maps[u].inverse();
        let mut new_pts: HashMap<Vec<i64>, (Vec<f64>, u64, Vec<u64>)> = HashMap::new();
        let mut buf1 = vec![0.0; k];
        let mut buf2 = vec![0.0; k];
        let mut buf3 = vec![0.0; k];
        let npts = weights.len();
        for j in 0..l {
            for v in 0..npts {
                let x = &coords[v * k..(v + 1) * k];
                g_inv.apply(x, &mut buf1);
                ifs.maps[j].apply(&buf1, &mut buf2);
                fu_inv.apply(&buf2, &mut buf3);
                g.apply(&buf3.clone(), &mut buf1);
                let key: Vec<i64> =
                    buf1.iter().map(|&c| (c / tol).round() as i64).collect();
                let entry = new_pts.entry(key).or_insert_with(|| {
                    (buf1.clone(), 0, Vec::new())
                });
                entry.1 += weights[v];
                for &addr in &addresses[v] {
                    entry.2.push(addr * l as u64 + j as u64);
                }
            }
        }
        // rebuild state; guard band: no two clusters within 10 tol
        let mut pts: Vec<(Vec<f64>, u64, Vec<u64>)> = new_pts.into_values().collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in pts.windows(2) {
            let d2: f64 =
                (0..k).map(|i| (w[0].0[i] - w[1].0[i]).powi(2)).sum();
            if d2.sqrt() < 10.0 * tol {
                return Err(Error::domain(format!(
                    "coincidence tolerance ambiguity at step {step}: clusters {d2:e} apart"
                )));
            }
        }
        coords = Vec::with_capacity(pts.len() * k);
        weights = Vec::with_capacity(pts.len());
        addresses = Vec::with_capacity(pts.len());
        for (c, w, a) in pts {
            coords.extend_from_slice(&c);
            weights.push(w);
            addresses.push(a);
        }
        // update g <- g f_u^{-1}
        g = compose(&g, &fu_inv);
    }

    // locate the root: the base point o (it is in every K_hat_n)
    let root = (0..weights.len())
        .find(|&v| {
            (0..k).all(|i| (coords[v * k + i] - ifs.base[i]).abs() <= 10.0 * tol)
        })
        .ok_or_else(|| Error::domain("base point missing from the window"))? as u32;
    let root_addresses = addresses[root as usize].clone();
    Ok(SelfSimilarWindow {
        k,
        depth,
        coords,
        weights,
        root,
        root_addresses,
        chain,
        tol,
    })
}

fn identity(k: usize) -> Vec<f64> {
    let mut m = vec![0.0; k * k];
    for i in 0..k {
        m[i * k + i] = 1.0;
    }
    m
}

/// Composition a ∘ b as a similitude.
fn compose(a: &Similitude, b: &Similitude) -> Similitude {
    let k = a.shift.len();
    let mut rot = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            let mut acc = 0.0;
            for m in 0..k {
                acc += a.rot[i * k + m] * b.rot[m * k + j];
            }
            rot[i * k + j] = acc;
        }
    }
    let mut shift = vec![0.0; k];
    let mut tmp = vec![0.0; k];
    a.apply(&b.shift, &mut tmp);
    shift.copy_from_slice(&tmp);
    Similitude { ratio: a.ratio * b.ratio, rot, shift }
}

/// Sampler of self-similar windows, pre-composed with the 1/w(o) bias so
/// downstream root statistics target the unimodular law. Weights are >= 1,
/// so rejection with cap 1 is exact.
pub fn gen_self_similar(ifs: IfsSpec, depth: u32) -> Result<RootedSampler> {
    ifs.validate()?;
    let name = format!("self-similar l={} r={}", ifs.maps.len(), ifs.ratio());
    let ifs2 = ifs.clone();
    let raw = RootedSampler::new(name.clone(), 0x5e1f, move |rng| {
        self_similar_window(&ifs2, depth, rng)?.to_sample()
    });
    // weight 1/w(o): recompute the window to read the root weight; cheaper
    // path: embed the weight in a mark-free closure by regenerating
    let ifs3 = ifs.clone();
    let _ = &raw;
    let sampler = RootedSampler::new(name, 0x5e1f, move |rng| {
        // rejection by 1/w(o) with cap 1
        const MAX_TRIES: u32 = 10_000;
        for _ in 0..MAX_TRIES {
            let w = self_similar_window(&ifs3, depth, rng)?;
            let weight = 1.0 / w.weights[w.root as usize] as f64;
            if rng.gen::<f64>() < weight {
                return w.to_sample();
            }
        }
        Err(Error::domain("self-similar bias sampler exhausted"))
    });
    Ok(sampler)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::replicate_rng;

    #[test]
    fn single_map_orbit_is_the_base_point() {
        let ifs = IfsSpec {
            k: 1,
            maps: vec![Similitude { ratio: 0.5, rot: vec![1.0], shift: vec![0.25] }],
            base: vec![0.5], // fixed point of the map
            open_set: None,
        };
        let mut rng = replicate_rng(110, 0);
        let w = self_similar_window(&ifs, 6, &mut rng).unwrap();
        assert_eq!(w.weights.len(), 1);
        assert_eq!(w.weights[0], 1);
        assert!((w.coords[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn cantor_ifs_matches_nested_construction_in_law() {
        // K_hat_n of the Cantor IFS and the nested cantor windows have the
        // same point sets up to the (coupled) sign choices: spot-check the
        // size and the span law
        let ifs = IfsSpec::cantor();
        let mut sizes = std::collections::HashSet::new();
        for seed in 0..10 {
            let mut rng = replicate_rng(111, seed);
            let w = self_similar_window(&ifs, 5, &mut rng).unwrap();
            assert_eq!(w.weights.len(), 32); // 2^5 points, multiplicity 1
            assert!(w.weights.iter().all(|&x| x == 1));
            // rescaled coordinates are integers (scaled by 3^5) spanning
            // 3^5 - 1
            let pts: Vec<i64> = (0..32)
                .map(|v| (w.coords[v] * 1.0).round() as i64)
                .collect();
            let span = pts.iter().max().unwrap() - pts.iter().min().unwrap();
            assert_eq!(span, 242);
            sizes.insert(span);
        }
    }

    #[test]
    fn weights_match_brute_force_address_enumeration() {
        // oracle: enumerate all l^n addresses, apply g_n^= f_{delta_n}^{-1}
        // f_sigma to the base point, and count coincidences
        let ifs = IfsSpec::koch_curve();
        let depth = 5u32;
        let mut rng = replicate_rng(112, 3);
        let w = self_similar_window(&ifs, depth, &mut rng).unwrap();
        let l = ifs.maps.len();
        // rebuild g from the recorded chain
        let k = ifs.k;
        let mut g = Similitude { ratio: 1.0, rot: identity(k), shift: vec![0.0; k] };
        for &u in &w.chain {
            g = compose(&g, &ifs.maps[u as usize].inverse());
        }
        let mut counts: HashMap<Vec<i64>, u64> = HashMap::new();
        let total = (l as u64).pow(depth);
        let mut buf = vec![0.0; k];
        let mut cur = vec![0.0; k];
        for addr in 0..total {
            // decode address: least-significant digit = last map applied
            let mut digits = Vec::with_capacity(depth as usize);
            let mut a = addr;
            for _ in 0..depth {
                digits.push((a % l as u64) as usize);
                a /= l as u64;
            }
            cur.copy_from_slice(&ifs.base);
            for &d in &digits {
                ifs.maps[d].apply(&cur.clone(), &mut buf);
                cur.copy_from_slice(&buf);
            }
            g.apply(&cur.clone(), &mut buf);
            let key: Vec<i64> = buf.iter().map(|&c| (c / 1e-7).round() as i64).collect();
            *counts.entry(key).or_default() += 1;
        }
        assert_eq!(counts.len(), w.weights.len(), "same point count");
        let total_weight: u64 = w.weights.iter().sum();
        assert_eq!(total_weight, total, "weights partition the addresses");
        // every merged weight appears in the brute-force census
        let mut brute: Vec<u64> = counts.into_values().collect();
        let mut ours = w.weights.clone();
        brute.sort_unstable();
        ours.sort_unstable();
        assert_eq!(brute, ours);
    }

    #[test]
    fn nesting_under_coupled_depths() {
        // K_hat_n ⊆ K_hat_{n+1} for the same stream
        let ifs = IfsSpec::sierpinski();
        let mut rng1 = replicate_rng(113, 0);
        let w1 = self_similar_window(&ifs, 4, &mut rng1).unwrap();
        let mut rng2 = replicate_rng(113, 0);
        let w2 = self_similar_window(&ifs, 5, &mut rng2).unwrap();
        let set2: std::collections::HashSet<(i64, i64)> = (0..w2.weights.len())
            .map(|v| {
                (
                    (w2.coords[2 * v] / 1e-6).round() as i64,
                    (w2.coords[2 * v + 1] / 1e-6).round() as i64,
                )
            })
            .collect();
        for v in 0..w1.weights.len() {
            let key = (
                (w1.coords[2 * v] / 1e-6).round() as i64,
                (w1.coords[2 * v + 1] / 1e-6).round() as i64,
            );
            assert!(set2.contains(&key), "point {v} missing at depth 5");
        }
    }

    #[test]
    fn base_in_open_set_gives_unit_weights() {
        for (ifs, depth) in [(IfsSpec::cantor(), 7u32), (IfsSpec::sierpinski(), 6)] {
            for seed in 0..5 {
                let mut rng = replicate_rng(114, seed);
                let w = self_similar_window(&ifs, depth, &mut rng).unwrap();
                assert!(w.weights.iter().all(|&x| x == 1), "w != 1 found");
                assert_eq!(w.root_addresses.len(), 1);
            }
        }
    }

    #[test]
    fn sierpinski_point_counts() {
        // with unit weights the window has exactly l^n points
        let ifs = IfsSpec::sierpinski();
        let mut rng = replicate_rng(115, 0);
        let w = self_similar_window(&ifs, 6, &mut rng).unwrap();
        assert_eq!(w.weights.len(), 3usize.pow(6));
    }
}
