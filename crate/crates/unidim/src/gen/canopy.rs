//! Canopy trees and the generalized canopy construction.
//!
//! The canopy tree C_k has levels L_0, L_1, ...; every level-n vertex has k
//! children below and one parent above, and the root level is drawn with
//! P(L = n) proportional to k^{-n} (renormalized to a depth cap here; the
//! omitted tail mass is reported). Every vertex's height equals its level.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sampling::RootedSampler;
use crate::space::{Marks, RootedSample};
use crate::tree::TreeWindow;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanopyMetric {
    Graph,
    /// edge between levels n and n+1 has length a^n
    Geometric(f64),
    /// edge between levels n and n+1 has length n!
    Factorial,
}

impl CanopyMetric {
    pub fn edge_len(&self, lower_level: u32) -> f64 {
        match self {
            CanopyMetric::Graph => 1.0,
            CanopyMetric::Geometric(a) => a.powi(lower_level as i32),
            CanopyMetric::Factorial => (1..=lower_level as u64).map(|x| x as f64).product(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Canopy {
    pub k: u32,
    pub metric: CanopyMetric,
    pub depth: u32,
    /// probability mass beyond the depth cap before renormalization
    pub tail_mass: f64,
    level_cdf: Vec<f64>,
}

impl Canopy {
    pub fn new(k: u32, metric: CanopyMetric, depth: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::domain("canopy needs k >= 2"));
        }
        if depth == 0 {
            return Err(Error::domain("depth must be positive"));
        }
        let q = 1.0 / k as f64;
        // P(L = n) ∝ q^n truncated at depth
        let tail_mass = q.powi(depth as i32 + 1);
        let norm: f64 = (0..=depth).map(|n| q.powi(n as i32)).sum();
        let mut level_cdf = Vec::with_capacity(depth as usize + 1);
        let mut acc = 0.0;
        for n in 0..=depth {
            acc += q.powi(n as i32) / norm;
            level_cdf.push(acc);
        }
        Ok(Canopy { k, metric, depth, tail_mass, level_cdf })
    }

    /// Exact truncated root-level probability P(L = n).
    pub fn level_prob(&self, n: u32) -> f64 {
        if n > self.depth {
            return 0.0;
        }
        let prev = if n == 0 { 0.0 } else { self.level_cdf[n as usize - 1] };
        self.level_cdf[n as usize] - prev
    }

    /// Exact truncated survival P(L >= n).
    pub fn level_survival(&self, n: u32) -> f64 {
        if n == 0 {
            return 1.0;
        }
        if n > self.depth {
            return 0.0;
        }
        1.0 - self.level_cdf[n as usize - 1]
    }

    pub fn sample_level(&self, rng: &mut ChaCha8Rng) -> u32 {
        let u: f64 = rng.gen();
        self.level_cdf.iter().position(|&c| u <= c).unwrap_or(self.depth as usize) as u32
    }

    /// Materializes the window around a root at the sampled level: the
    /// ancestor chain up to `margin` levels above, and around each chain
    /// vertex everything within graph distance `margin` of the root.
    pub fn window(&self, root_level: u32, margin: u32, rng: &mut ChaCha8Rng) -> CanopyWindow {
        let _ = rng;
        // vertices: (level, key) where key encodes the position relative to
        // the root chain; build by BFS limited to distance margin from root
        let top = (root_level + margin).min(self.depth + margin);
        // chain vertices a_0 = root (level root_level) .. a_m (level top)
        let chain_len = (top - root_level) as usize + 1;
        let mut parent: Vec<Option<u32>> = Vec::new();
        let mut level: Vec<u32> = Vec::new();
        let mut edge_len: Vec<f64> = Vec::new();
        // chain first
        for j in 0..chain_len {
            let lv = root_level + j as u32;
            parent.push(if j + 1 < chain_len { Some(j as u32 + 1) } else { None });
            level.push(lv);
            edge_len.push(if j + 1 < chain_len { self.metric.edge_len(lv) } else { 1.0 });
        }
        // subtrees: for each chain vertex at level lv > 0, its children are
        // k vertices at level lv-1; one of them is the next chain vertex
        // (when lv > root_level); fill the remaining ones down to the
        // distance budget
        let mut frontier: Vec<(u32, u32, u32)> = Vec::new(); // (vertex, level, remaining budget)
        for j in 0..chain_len {
            let lv = root_level + j as u32;
            if lv == 0 {
                continue;
            }
            let budget = margin.saturating_sub(j as u32);
            if budget == 0 {
                continue;
            }
            let missing = if j == 0 { self.k } else { self.k - 1 };
            for _ in 0..missing {
                let id = parent.len() as u32;
                parent.push(Some(j as u32));
                level.push(lv - 1);
                edge_len.push(self.metric.edge_len(lv - 1));
                if lv - 1 > 0 && budget > 1 {
                    frontier.push((id, lv - 1, budget - 1));
                }
            }
        }
        while let Some((v, lv, budget)) = frontier.pop() {
            for _ in 0..self.k {
                let id = parent.len() as u32;
                parent.push(Some(v));
                level.push(lv - 1);
                edge_len.push(self.metric.edge_len(lv - 1));
                if lv - 1 > 0 && budget > 1 {
                    frontier.push((id, lv - 1, budget - 1));
                }
            }
        }
        // children-complete wherever the full k children were materialized:
        // level-0 vertices trivially, others iff their subtree budget allowed
        let n = parent.len();
        let mut child_count = vec![0u32; n];
        for v in 0..n {
            if let Some(p) = parent[v] {
                child_count[p as usize] += 1;
            }
        }
        let children_complete: Vec<bool> =
            (0..n).map(|v| level[v] == 0 || child_count[v] == self.k).collect();
        let mut tw = TreeWindow::from_parents(parent, &children_complete, 0).unwrap();
        tw.level = level;
        tw.edge_len = Some(edge_len);
        CanopyWindow { tree: tw, root_level, margin }
    }
}

#[derive(Debug, Clone)]
pub struct CanopyWindow {
    pub tree: TreeWindow,
    pub root_level: u32,
    pub margin: u32,
}

impl CanopyWindow {
    /// Graph/weighted sample with level marks; interior radius of the root
    /// is the materialized graph-distance budget.
    pub fn to_sample(&self) -> Result<RootedSample> {
        let s = self.tree.to_sample()?;
        let marks =
            Marks { arity: 1, values: self.tree.level.iter().map(|&l| l as f64).collect() };
        let n = s.len();
        // interior radius: the window was built to hold everything within
        // graph distance `margin` of the root; other vertices keep the
        // distance-to-frontier radius computed by the tree conversion
        let _ = n;
        s.with_marks(marks)
    }
}

/// Canopy-tree sampler producing windows with level marks. The root level
/// is drawn from the truncated law; windows hold everything within graph
/// distance `margin` of the root.
pub fn gen_canopy(k: u32, metric: CanopyMetric, depth: u32, margin: u32) -> Result<RootedSampler> {
    let canopy = Canopy::new(k, metric, depth)?;
    let name = match metric {
        CanopyMetric::Graph => format!("canopy k={k}"),
        CanopyMetric::Geometric(a) => format!("canopy k={k} geometric a={a}"),
        CanopyMetric::Factorial => format!("canopy k={k} factorial"),
    };
    Ok(RootedSampler::new(name, 0xca0 ^ k as u64, move |rng| {
        let level = canopy.sample_level(rng);
        canopy.window(level, margin, rng).to_sample()
    }))
}

// ---------------------------------------------------------------------------
// generalized canopy
// ---------------------------------------------------------------------------

/// Level-law presets for the generalized canopy.
#[derive(Debug, Clone)]
pub enum LevelLaw {
    /// p_n ∝ k^{-n} (the ordinary canopy tree)
    Geometric(f64),
    /// explicit table p_0.. (will be renormalized)
    Table(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct GeneralizedCanopy {
    /// renormalized level probabilities p_0..p_depth
    pub p: Vec<f64>,
    /// reported truncation mass before renormalization
    pub tail_mass: f64,
    cdf: Vec<f64>,
}

impl GeneralizedCanopy {
    pub fn new(law: LevelLaw, depth: u32) -> Result<Self> {
        let raw: Vec<f64> = match &law {
            LevelLaw::Geometric(k) => {
                if *k <= 1.0 {
                    return Err(Error::domain("geometric level law needs k > 1"));
                }
                (0..=depth).map(|n| (1.0 / k).powi(n as i32)).collect()
            }
            LevelLaw::Table(t) => {
                if t.is_empty() || t.iter().any(|&p| !(p > 0.0)) {
                    return Err(Error::domain("level table must be positive"));
                }
                t.iter().copied().take(depth as usize + 1).collect()
            }
        };
        let full: f64 = match &law {
            LevelLaw::Geometric(k) => 1.0 / (1.0 - 1.0 / k),
            LevelLaw::Table(t) => t.iter().sum(),
        };
        let kept: f64 = raw.iter().sum();
        let tail_mass = (full - kept).max(0.0) / full;
        let p: Vec<f64> = raw.iter().map(|x| x / kept).collect();
        let mut cdf = Vec::with_capacity(p.len());
        let mut acc = 0.0;
        for &x in &p {
            acc += x;
            cdf.push(acc);
        }
        Ok(GeneralizedCanopy { p, tail_mass, cdf })
    }

    pub fn is_non_increasing(&self) -> bool {
        self.p.windows(2).all(|w| w[0] >= w[1] - 1e-15)
    }

    /// Exact survival q_n = P(level >= n) of the truncated law.
    pub fn survival(&self, n: u32) -> f64 {
        if n == 0 {
            1.0
        } else if n as usize >= self.cdf.len() {
            0.0
        } else {
            1.0 - self.cdf[n as usize - 1]
        }
    }

    pub fn sample_level(&self, rng: &mut ChaCha8Rng) -> u32 {
        let u: f64 = rng.gen();
        self.cdf.iter().position(|&c| u <= c).unwrap_or(self.cdf.len() - 1) as u32
    }

    /// Materializes rows n = 0..=depth of the construction within a
    /// horizontal window around the root: row n is (Z + U_n)/p_n, each
    /// point linked to the closest point of the row above (ties rightward).
    pub fn window(&self, half_extent: f64, rng: &mut ChaCha8Rng) -> Result<TreeWindow> {
        let depth = self.p.len() - 1;
        let root_level = self.sample_level(rng) as usize;
        let u: Vec<f64> = (0..=depth).map(|_| rng.gen::<f64>()).collect();
        let root_x = u[root_level] / self.p[root_level];
        // row points within [root_x - half, root_x + half]
        let mut ids: Vec<Vec<(i64, u32)>> = Vec::new(); // per row: (lattice index, vertex id)
        let mut coords: Vec<(f64, f64)> = Vec::new();
        let mut level: Vec<u32> = Vec::new();
        let mut root = None;
        for (n, &pn) in self.p.iter().enumerate() {
            let spacing = 1.0 / pn;
            let lo = ((root_x - half_extent) / spacing - u[n]).ceil() as i64;
            let hi = ((root_x + half_extent) / spacing - u[n]).floor() as i64;
            let mut row = Vec::new();
            for j in lo..=hi {
                let x = (j as f64 + u[n]) * spacing;
                let id = coords.len() as u32;
                coords.push((x, n as f64));
                level.push(n as u32);
                if n == root_level && j == 0 {
                    root = Some(id);
                }
                row.push((j, id));
            }
            ids.push(row);
        }
        let root = root.ok_or_else(|| Error::window("window does not contain the root"))?;
        // link each row-n point to the closest point of row n+1
        let n_vertices = coords.len();
        let mut parent: Vec<Option<u32>> = vec![None; n_vertices];
        for n in 0..depth {
            for &(_, id) in &ids[n] {
                let x = coords[id as usize].0;
                let up = &ids[n + 1];
                let mut best: Option<(f64, u32)> = None;
                for &(_, pid) in up {
                    let px = coords[pid as usize].0;
                    let d = (px - x).abs();
                    let better = match best {
                        None => true,
                        Some((bd, bid)) => {
                            d < bd - 1e-12
                                || ((d - bd).abs() <= 1e-12
                                    && px > coords[bid as usize].0)
                        }
                    };
                    if better {
                        best = Some((d, pid));
                    }
                }
                parent[id as usize] = best.map(|(_, pid)| pid);
            }
        }
        // children-complete: a row-(n+1) vertex sees all its children iff
        // the row below extends one spacing beyond both sides of its
        // attraction zone; be conservative near the window edge
        let mut children_complete = vec![true; n_vertices];
        for n in 0..=depth {
            for &(j, id) in &ids[n] {
                let lo_edge = j == ids[n][0].0;
                let hi_edge = j == ids[n][ids[n].len() - 1].0;
                if (lo_edge || hi_edge) && n > 0 {
                    children_complete[id as usize] = false;
                }
                if n == depth {
                    // top row: parents absent, children known
                    parent[id as usize] = None;
                }
            }
        }
        let mut tw = TreeWindow::from_parents(parent, &children_complete, root)?;
        tw.level = level;
        tw.coords = Some(coords);
        Ok(tw)
    }
}

/// Generalized canopy sampler: TreeWindow realizations with planar coords.
pub fn gen_generalized_canopy(
    law: LevelLaw,
    depth: u32,
    half_extent: f64,
) -> Result<RootedSampler> {
    let gc = GeneralizedCanopy::new(law, depth)?;
    Ok(RootedSampler::new("generalized-canopy", 0x9ca0, move |rng| {
        let tw = gc.window(half_extent, rng)?;
        let s = tw.to_sample()?;
        let marks = Marks { arity: 1, values: tw.level.iter().map(|&l| l as f64).collect() };
        s.with_marks(marks)
    }))
}
