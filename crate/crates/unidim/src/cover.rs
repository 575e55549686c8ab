//! Equivariant covering constructions, covering audits, lambda_r bounds, and
//! Hausdorff content evaluation.
//!
//! Covering rules come in two forms: window assignments (`CoveringAssignment`
//! on an explicit `RootedSample`, auditable) and root-radius samplers
//! (`RootRadiusRule`) that draw the radius R(o) at the root of a fresh
//! realization, which is all the intensity estimators need.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::space::{PointId, RootedSample};
use crate::stats::{replicate_rng, Accumulator, MeanEstimate};
use crate::tree::{FiniteTree, TreeWindow};

/// Per-point radius map R(v) in {0} ∪ [floor, ∞).
#[derive(Debug, Clone)]
pub struct CoveringAssignment {
    pub radii: Vec<f64>,
    pub floor: f64,
    pub rule: String,
    pub seed: u64,
}

impl CoveringAssignment {
    pub fn validate_floor(&self) -> Result<()> {
        for (v, &r) in self.radii.iter().enumerate() {
            if r != 0.0 && r < self.floor {
                return Err(Error::InvalidRule(format!(
                    "radius {r} at point {v} violates floor {}",
                    self.floor
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CoverAudit {
    pub is_cover: bool,
    pub max_multiplicity: u32,
    pub uncovered: Vec<PointId>,
}

/// Verifies coverage of interior points and reports the max multiplicity K
/// observed on them. Points whose potential coverers could lie outside the
/// window (interior radius below the largest covering radius) are skipped.
pub fn audit_cover(sample: &RootedSample, assignment: &CoveringAssignment) -> CoverAudit {
    let n = sample.len();
    let rmax = assignment.radii.iter().cloned().fold(0.0, f64::max);
    let mut mult = vec![0u32; n];
    for v in 0..n as u32 {
        let r = assignment.radii[v as usize];
        if r > 0.0 {
            if let Ok(ball) = sample.ball(v, r) {
                for u in ball.ids {
                    mult[u as usize] += 1;
                }
            }
        }
    }
    let mut uncovered = Vec::new();
    let mut kmax = 0u32;
    for p in 0..n as u32 {
        if !sample.is_interior(p, rmax) {
            continue;
        }
        if mult[p as usize] == 0 {
            uncovered.push(p);
        }
        kmax = kmax.max(mult[p as usize]);
    }
    CoverAudit { is_cover: uncovered.is_empty(), max_multiplicity: kmax, uncovered }
}

// ---------------------------------------------------------------------------
// lattice rules
// ---------------------------------------------------------------------------

/// Shifted sub-lattice covering of delta*Z^k: centers n*delta*Z^k - delta*U
/// with U uniform in {0..n-1}^k, balls of radius (n - 1/2)*delta. The
/// half-step inset keeps closed balls off the lattice-aligned coincidences,
/// so the multiplicity stays at the generic 2^k; coverage holds for k <= 2.
pub fn shifted_lattice_cover(
    sample: &RootedSample,
    delta: f64,
    n: u32,
    rng: &mut ChaCha8Rng,
) -> Result<CoveringAssignment> {
    let k = sample.dim();
    if k == 0 {
        return Err(Error::domain("shifted lattice rule needs coordinates"));
    }
    if k > 2 {
        return Err(Error::InvalidRule("l2 shifted-lattice rule covers only for k <= 2".into()));
    }
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    let shift: Vec<i64> = (0..k).map(|_| rng.gen_range(0..n as i64)).collect();
    let radius = (n as f64 - 0.5) * delta;
    let mut radii = vec![0.0; sample.len()];
    for v in 0..sample.len() as u32 {
        let c = sample.coords_of(v).expect("coords");
        let is_center = (0..k).all(|i| {
            let q = (c[i] / delta).round() as i64;
            (q + shift[i]).rem_euclid(n as i64) == 0
        });
        if is_center {
            radii[v as usize] = radius;
        }
    }
    Ok(CoveringAssignment { radii, floor: radius, rule: format!("shifted-lattice n={n}"), seed: 0 })
}

/// Disjoint l-infinity covering of delta*Z^k: centers spaced (2n+1) apart,
/// balls (= cubes) of radius n*delta. Optimal by disjointness.
pub fn shifted_lattice_cover_linf(
    sample: &RootedSample,
    delta: f64,
    n: u32,
    rng: &mut ChaCha8Rng,
) -> Result<CoveringAssignment> {
    let k = sample.dim();
    if k == 0 {
        return Err(Error::domain("shifted lattice rule needs coordinates"));
    }
    let span = 2 * n as i64 + 1;
    let shift: Vec<i64> = (0..k).map(|_| rng.gen_range(0..span)).collect();
    let radius = n as f64 * delta;
    let mut radii = vec![0.0; sample.len()];
    for v in 0..sample.len() as u32 {
        let c = sample.coords_of(v).expect("coords");
        let is_center = (0..k).all(|i| {
            let q = (c[i] / delta).round() as i64;
            (q + shift[i]).rem_euclid(span) == 0
        });
        if is_center {
            radii[v as usize] = radius;
        }
    }
    Ok(CoveringAssignment {
        radii,
        floor: radius,
        rule: format!("shifted-lattice-linf n={n}"),
        seed: 0,
    })
}

// ---------------------------------------------------------------------------
// line rule
// ---------------------------------------------------------------------------

/// 3-bounded r-covering for discrete subsets of R: shift cells
/// [m r + U, (m+1) r + U) by a uniform U in [0, r) and center a ball of
/// radius r at the largest point of each nonempty cell.
pub fn interval_cover_line(
    sample: &RootedSample,
    r: f64,
    rng: &mut ChaCha8Rng,
) -> Result<CoveringAssignment> {
    if sample.dim() != 1 {
        return Err(Error::domain("interval rule needs 1-d coordinates"));
    }
    if !(r > 0.0) {
        return Err(Error::domain("r must be positive"));
    }
    let u: f64 = rng.gen_range(0.0..r);
    let n = sample.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| {
        sample.coords_of(a).unwrap()[0].partial_cmp(&sample.coords_of(b).unwrap()[0]).unwrap()
    });
    let mut radii = vec![0.0; n];
    let mut cur_cell = f64::NEG_INFINITY;
    let mut cur_max: Option<u32> = None;
    for &v in &order {
        let x = sample.coords_of(v).unwrap()[0];
        let cell = ((x - u) / r).floor();
        if cell > cur_cell {
            if let Some(c) = cur_max {
                radii[c as usize] = r;
            }
            cur_cell = cell;
        }
        cur_max = Some(v); // points are sorted: the last one in a cell is its max
    }
    if let Some(c) = cur_max {
        radii[c as usize] = r;
    }
    Ok(CoveringAssignment { radii, floor: r, rule: format!("interval r={r}"), seed: 0 })
}

// ---------------------------------------------------------------------------
// finite trees: greedy minimum n-covering
// ---------------------------------------------------------------------------

/// Greedy minimum n-covering of a finite tree: repeatedly take a deepest
/// uncovered vertex (uniform among ties) and center a ball at its n-th
/// ancestor. The rooting is a uniformly random vertex, so the rule stays
/// equivariant; the output size is the exact minimum for every rooting.
pub fn greedy_finite_tree_cover(tree: &FiniteTree, n: u32, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let nv = tree.len();
    let root = rng.gen_range(0..nv) as u32;
    // BFS rooting
    let mut parent = vec![u32::MAX; nv];
    let mut depth = vec![0u32; nv];
    let mut order = Vec::with_capacity(nv);
    let mut queue = std::collections::VecDeque::from([root]);
    parent[root as usize] = root;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &tree.adj[v as usize] {
            if parent[w as usize] == u32::MAX && w != root {
                parent[w as usize] = v;
                depth[w as usize] = depth[v as usize] + 1;
                queue.push_back(w);
            }
        }
    }
    let mut covered = vec![false; nv];
    let mut centers = Vec::new();
    let mut remaining = nv;
    while remaining > 0 {
        let max_depth = (0..nv)
            .filter(|&v| !covered[v])
            .map(|v| depth[v])
            .max()
            .unwrap();
        let deepest: Vec<u32> = (0..nv as u32)
            .filter(|&v| !covered[v as usize] && depth[v as usize] == max_depth)
            .collect();
        let v = deepest[rng.gen_range(0..deepest.len())];
        let mut c = v;
        for _ in 0..n.min(depth[v as usize]) {
            c = parent[c as usize];
        }
        centers.push(c);
        // mark the ball of radius n at c
        let mut q = std::collections::VecDeque::from([(c, 0u32)]);
        let mut seen = std::collections::HashSet::from([c]);
        while let Some((x, d)) = q.pop_front() {
            if !covered[x as usize] {
                covered[x as usize] = true;
                remaining -= 1;
            }
            if d == n {
                continue;
            }
            for &w in &tree.adj[x as usize] {
                if !seen.contains(&w) {
                    seen.insert(w);
                    q.push_back((w, d + 1));
                }
            }
        }
    }
    centers.sort_unstable();
    centers
}

/// Exhaustive minimum n-covering size; oracle for small trees.
pub fn brute_force_min_cover(tree: &FiniteTree, n: u32) -> usize {
    let nv = tree.len();
    assert!(nv <= 16, "brute force limited to small trees");
    let dist = tree.distances();
    for size in 1..=nv {
        // iterate subsets of the given size
        let mut subset: Vec<usize> = (0..size).collect();
        loop {
            let covers = (0..nv)
                .all(|p| subset.iter().any(|&c| dist[c][p] <= n));
            if covers {
                return size;
            }
            // next combination
            let mut i = size;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if subset[i] != i + nv - size {
                    subset[i] += 1;
                    for j in i + 1..size {
                        subset[j] = subset[j - 1] + 1;
                    }
                    break;
                }
            }
            if subset[0] == nv - size && (0..size).all(|j| subset[j] == nv - size + j) {
                break;
            }
            if i == 0 && subset[0] + size > nv {
                break;
            }
        }
    }
    nv
}

// ---------------------------------------------------------------------------
// one-ended trees: ball and cone coverings
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct OneEndedCover {
    pub centers: Vec<u32>,
    /// true where the window could not determine the fixed point
    pub censored: Vec<bool>,
}

/// Greedy ball covering of a one-ended tree window: rounds select all
/// vertices of current height n; covered balls are deleted and finite
/// leftover components are finished like finite trees. Vertices whose
/// status would depend on structure beyond the frontier stay censored.
pub fn one_ended_ball_cover(tree: &TreeWindow, n: u32, rng: &mut ChaCha8Rng) -> Result<OneEndedCover> {
    let nv = tree.len();
    if nv == 0 {
        return Err(Error::window("empty tree window"));
    }
    if tree.height_certain.iter().all(|&c| !c) {
        return Err(Error::window("no vertex has a certain height"));
    }
    let mut alive = vec![true; nv];
    let mut censored: Vec<bool> = tree.height_certain.iter().map(|&c| !c).collect();
    let mut centers = Vec::new();

    // adjacency view of the window
    let neighbors = |v: u32| -> Vec<u32> {
        let mut out = tree.children[v as usize].clone();
        if let Some(p) = tree.parent[v as usize] {
            out.push(p);
        }
        out
    };

    loop {
        // components of the remaining forest
        let mut comp_id = vec![usize::MAX; nv];
        let mut comps: Vec<Vec<u32>> = Vec::new();
        for v in 0..nv as u32 {
            if alive[v as usize] && comp_id[v as usize] == usize::MAX {
                let id = comps.len();
                let mut queue = std::collections::VecDeque::from([v]);
                comp_id[v as usize] = id;
                let mut members = Vec::new();
                while let Some(x) = queue.pop_front() {
                    members.push(x);
                    for w in neighbors(x) {
                        if alive[w as usize] && comp_id[w as usize] == usize::MAX {
                            comp_id[w as usize] = id;
                            queue.push_back(w);
                        }
                    }
                }
                comps.push(members);
            }
        }
        if comps.is_empty() {
            break;
        }
        let mut selected_round: Vec<u32> = Vec::new();
        let mut progressed = false;
        for comp in &comps {
            // frontier components carry structure beyond the window
            let has_frontier = comp
                .iter()
                .any(|&v| tree.parent[v as usize].is_none() || censored[v as usize]);
            let heights = forest_heights(tree, comp, &alive);
            let max_h = comp.iter().map(|&v| heights[v as usize]).max().unwrap();
            if max_h >= n {
                for &v in comp {
                    if heights[v as usize] == n {
                        selected_round.push(v);
                    }
                }
                progressed = true;
            } else if !has_frontier {
                // finite certain component: one ball at the top finishes it
                let tops: Vec<u32> =
                    comp.iter().copied().filter(|&v| heights[v as usize] == max_h).collect();
                selected_round.push(tops[rng.gen_range(0..tops.len())]);
                progressed = true;
            } else {
                // the infinite tree would cover this from above the window
                for &v in comp {
                    censored[v as usize] = true;
                    alive[v as usize] = false;
                }
            }
        }
        if !progressed {
            break;
        }
        // delete covered balls: multi-source BFS over this round's centers
        let mut queue = std::collections::VecDeque::new();
        let mut seen = std::collections::HashSet::new();
        for &c in &selected_round {
            centers.push(c);
            seen.insert(c);
            alive[c as usize] = false;
            queue.push_back((c, 0u32));
        }
        while let Some((v, d)) = queue.pop_front() {
            if d == n {
                continue;
            }
            for w in neighbors(v) {
                if alive[w as usize] && !seen.contains(&w) {
                    seen.insert(w);
                    alive[w as usize] = false;
                    queue.push_back((w, d + 1));
                }
            }
        }
    }
    centers.sort_unstable();
    Ok(OneEndedCover { centers, censored })
}

/// Heights of the remaining forest, computed from the leaves up using only
/// alive vertices (parent links into dead vertices are cut).
fn forest_heights(tree: &TreeWindow, members: &[u32], alive: &[bool]) -> Vec<u32> {
    let nv = tree.len();
    let mut height = vec![0u32; nv];
    // process members in an order where children come first; children lists
    // are forest edges, so a reverse BFS from the component top works
    let mut remaining: Vec<u32> = members
        .iter()
        .map(|&v| {
            tree.children[v as usize].iter().filter(|&&c| alive[c as usize]).count() as u32
        })
        .collect();
    let idx: std::collections::HashMap<u32, usize> =
        members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut queue: Vec<u32> = members
        .iter()
        .enumerate()
        .filter(|(i, _)| remaining[*i] == 0)
        .map(|(_, &v)| v)
        .collect();
    let mut qi = 0;
    while qi < queue.len() {
        let v = queue[qi];
        qi += 1;
        let mut h = 0;
        for &c in &tree.children[v as usize] {
            if alive[c as usize] {
                h = h.max(height[c as usize] + 1);
            }
        }
        height[v as usize] = h;
        if let Some(p) = tree.parent[v as usize] {
            if alive[p as usize] {
                if let Some(&pi) = idx.get(&p) {
                    remaining[pi] -= 1;
                    if remaining[pi] == 0 {
                        queue.push(p);
                    }
                }
            }
        }
    }
    height
}

/// Covering of a one-ended tree window by cones C_n(v) = N_n(v) ∩ D(v):
/// the fixed point of repeatedly selecting height-n vertices and deleting
/// their descendants.
#[derive(Debug, Clone)]
pub struct ConeCovering {
    pub selected: Vec<u32>,
    pub cone_height: u32,
    pub censored: Vec<bool>,
}

pub fn cone_cover(tree: &TreeWindow, n: u32) -> Result<ConeCovering> {
    let nv = tree.len();
    if nv == 0 {
        return Err(Error::window("empty tree window"));
    }
    if tree.height_certain.iter().all(|&c| !c) {
        return Err(Error::window("no vertex has a certain height"));
    }
    let mut alive = vec![true; nv];
    let mut censored: Vec<bool> = tree.height_certain.iter().map(|&c| !c).collect();
    let mut selected = Vec::new();
    let mut heights: Vec<u32> = tree.height.clone();
    loop {
        let round: Vec<u32> = (0..nv as u32)
            .filter(|&v| alive[v as usize] && !censored[v as usize] && heights[v as usize] == n)
            .collect();
        if round.is_empty() {
            break;
        }
        for &v in &round {
            selected.push(v);
            for d in tree.descendants(v) {
                alive[d as usize] = false;
            }
        }
        // recompute heights over the remaining forest
        let members: Vec<u32> = (0..nv as u32).filter(|&v| alive[v as usize]).collect();
        if members.is_empty() {
            break;
        }
        let h = forest_heights(tree, &members, &alive);
        for &v in &members {
            heights[v as usize] = h[v as usize];
        }
    }
    // survivors would be handled by rounds above the window
    for v in 0..nv {
        if alive[v] {
            censored[v] = true;
        }
    }
    selected.sort_unstable();
    Ok(ConeCovering { selected, cone_height: n, censored })
}

// ---------------------------------------------------------------------------
// regular trees: disjoint coverings (perfect codes)
// ---------------------------------------------------------------------------

/// Window of the k-regular tree of the given depth around vertex 0, as a
/// TreeWindow-free plain sample, plus its per-level counts.
pub fn regular_tree_window(k: u32, depth: u32) -> (RootedSample, Vec<u64>) {
    let mut edges: Vec<(u32, u32, f64)> = Vec::new();
    let mut level_of: Vec<u32> = vec![0];
    let mut frontier = vec![0u32];
    let mut next = 1u32;
    let mut level_counts = vec![1u64];
    for d in 0..depth {
        let mut nf = Vec::new();
        for &v in &frontier {
            let children = if d == 0 { k } else { k - 1 };
            for _ in 0..children {
                edges.push((v, next, 1.0));
                level_of.push(d + 1);
                nf.push(next);
                next += 1;
            }
        }
        level_counts.push(nf.len() as u64);
        frontier = nf;
    }
    let n = next as usize;
    let interior: Vec<f64> =
        level_of.iter().map(|&l| (depth - l) as f64).collect();
    let sample = RootedSample::from_graph(n, &edges, 0, interior).unwrap();
    (sample, level_counts)
}

/// Sphere sizes |S_j(o)| of the k-regular tree for j = 0..=rmax, by BFS on
/// an explicitly built window.
pub fn regular_tree_sphere_sizes(k: u32, rmax: u32) -> Vec<u64> {
    let (_, counts) = regular_tree_window(k, rmax);
    counts
}

/// Disjoint r-covering of a k-regular tree window: the root's ball gets a
/// uniformly random phase (distance of the root to its covering center) and
/// the perfect code extends outward; every point is covered exactly once on
/// the interior. Root-center probability is 1/|N_r(o)| by construction.
pub fn regular_tree_cover(
    k: u32,
    r: u32,
    depth: u32,
    rng: &mut ChaCha8Rng,
) -> Result<(RootedSample, CoveringAssignment)> {
    if k < 3 {
        return Err(Error::domain("regular tree rule needs k >= 3"));
    }
    if depth < 2 * r + 1 {
        return Err(Error::window(format!("depth {depth} too shallow for radius {r}")));
    }
    let (sample, _) = regular_tree_window(k, depth);
    let n = sample.len();
    // phase: distance of root to its center, weighted by sphere sizes
    let spheres = regular_tree_sphere_sizes(k, r);
    let total: u64 = spheres.iter().sum();
    let mut pick = rng.gen_range(0..total);
    let mut phase = 0u32;
    for (j, &s) in spheres.iter().enumerate() {
        if pick < s {
            phase = j as u32;
            break;
        }
        pick -= s;
    }
    // choose the root's center uniformly on sphere `phase`
    let ball = sample.ball(0, phase as f64 + 0.25)?;
    let at_phase: Vec<u32> = ball
        .ids
        .iter()
        .copied()
        .filter(|&v| (sample.dist(0, v) - phase as f64).abs() < 0.25)
        .collect();
    let first_center = at_phase[rng.gen_range(0..at_phase.len())];

    let mut radii = vec![0.0; n];
    let mut covered = vec![false; n];
    let mut center_dist = vec![u32::MAX; n]; // distance to owning center
    let mut place = |c: u32, radii: &mut Vec<f64>, covered: &mut Vec<bool>, center_dist: &mut Vec<u32>| {
        radii[c as usize] = r as f64;
        for (v, d) in sample.graph_distances(c, r as f64).unwrap() {
            covered[v as usize] = true;
            center_dist[v as usize] = center_dist[v as usize].min(d as u32);
        }
    };
    place(first_center, &mut radii, &mut covered, &mut center_dist);

    // grow outward: any uncovered vertex adjacent to the covered region must
    // head a new ball whose center lies at depth r below it, away from the
    // covered side
    loop {
        // find an uncovered vertex with a covered neighbor (boundary vertex)
        let mut boundary: Option<(u32, u32)> = None; // (vertex, covered neighbor)
        'scan: for v in 0..n as u32 {
            if covered[v as usize] {
                continue;
            }
            if let Some(adj) = sample.adjacency() {
                for &(w, _) in adj.neighbors(v) {
                    if covered[w as usize] {
                        boundary = Some((v, w));
                        break 'scan;
                    }
                }
            }
        }
        let Some((u, toward)) = boundary else { break };
        // walk r steps below u away from `toward`, choosing uniformly
        let mut prev = toward;
        let mut cur = u;
        let mut ok = true;
        for _ in 0..r {
            let nexts: Vec<u32> = sample
                .adjacency()
                .unwrap()
                .neighbors(cur)
                .iter()
                .map(|&(w, _)| w)
                .filter(|&w| w != prev)
                .collect();
            if nexts.is_empty() {
                // window boundary: leave uncovered (outside interior)
                ok = false;
                break;
            }
            let nxt = nexts[rng.gen_range(0..nexts.len())];
            prev = cur;
            cur = nxt;
        }
        if ok {
            place(cur, &mut radii, &mut covered, &mut center_dist);
        } else {
            covered[u as usize] = true; // boundary artifact; not interior
        }
    }

    Ok((
        sample,
        CoveringAssignment {
            radii,
            floor: r as f64,
            rule: format!("regular-tree k={k} r={r}"),
            seed: 0,
        },
    ))
}

// ---------------------------------------------------------------------------
// root-radius rules and the estimators consuming them
// ---------------------------------------------------------------------------

/// Samples the covering radius at the root of a fresh realization.
pub trait RootRadiusRule: Sync {
    fn name(&self) -> String;
    /// Declared multiplicity bound K (audited separately on windows).
    fn k_bound(&self) -> u32;
    /// All nonzero radii are >= this floor (the r of an r-covering).
    fn floor(&self) -> f64;
    fn sample_root_radius(&self, rng: &mut ChaCha8Rng) -> f64;
}

#[derive(Debug, Clone)]
pub struct LambdaBounds {
    pub r: f64,
    pub p_hat: MeanEstimate,
    pub k_bound: u32,
}

impl LambdaBounds {
    pub fn lower(&self) -> f64 {
        self.p_hat.mean / self.k_bound as f64
    }
    pub fn upper(&self) -> f64 {
        self.p_hat.mean
    }
}

/// Estimates P(R(o) != 0) for a K-bounded rule; [p/K, p] brackets lambda_r.
pub fn lambda_r_bounds(rule: &dyn RootRadiusRule, reps: u64, seed: u64) -> LambdaBounds {
    let mut hits = 0u64;
    for i in 0..reps {
        let mut rng = replicate_rng(seed, i);
        if rule.sample_root_radius(&mut rng) != 0.0 {
            hits += 1;
        }
    }
    LambdaBounds {
        r: rule.floor(),
        p_hat: MeanEstimate::from_hits(hits, reps),
        k_bound: rule.k_bound(),
    }
}

/// Monte-Carlo estimate of E[R(o)^alpha] for one rule; floor-checked.
pub fn content_of_rule(
    rule: &dyn RootRadiusRule,
    alpha: f64,
    floor: f64,
    reps: u64,
    seed: u64,
) -> Result<MeanEstimate> {
    if rule.floor() < floor {
        return Err(Error::InvalidRule(format!(
            "rule {} has floor {} below requested M={floor}",
            rule.name(),
            rule.floor()
        )));
    }
    let mut acc = Accumulator::default();
    for i in 0..reps {
        let mut rng = replicate_rng(seed, i);
        let r = rule.sample_root_radius(&mut rng);
        // 0^0 := 0 by the content convention
        acc.push(if r == 0.0 { 0.0 } else { r.powf(alpha) });
    }
    Ok(acc.estimate())
}

/// Min over a rule family of estimated E[R(o)^alpha]; an upper bound on the
/// Hausdorff content H_{alpha,M}.
pub fn content_estimate(
    family: &[&dyn RootRadiusRule],
    alpha: f64,
    floor: f64,
    reps: u64,
    seed: u64,
) -> Result<MeanEstimate> {
    if family.is_empty() {
        return Err(Error::InvalidRule("empty rule family".into()));
    }
    let mut best: Option<MeanEstimate> = None;
    for rule in family {
        let est = content_of_rule(*rule, alpha, floor, reps, seed)?;
        if best.as_ref().map_or(true, |b| est.mean < b.mean) {
            best = Some(est);
        }
    }
    Ok(best.unwrap())
}

/// Root statistic of a generalized (cone-style) covering: present iff the
/// root is a center, carrying the diameter of the owning subset.
pub trait RootSubsetRule: Sync {
    fn name(&self) -> String;
    fn sample_root_subset(&self, rng: &mut ChaCha8Rng) -> Option<f64>;
}

/// E[(M ∨ diam/2)^alpha · 1{o in S}] for a generalized covering rule.
pub fn generalized_content(
    rule: &dyn RootSubsetRule,
    alpha: f64,
    m_floor: f64,
    reps: u64,
    seed: u64,
) -> MeanEstimate {
    let mut acc = Accumulator::default();
    for i in 0..reps {
        let mut rng = replicate_rng(seed, i);
        match rule.sample_root_subset(&mut rng) {
            Some(diam) => acc.push(m_floor.max(0.5 * diam).powf(alpha)),
            None => acc.push(0.0),
        }
    }
    acc.estimate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Norm, RootedSample};

    fn z_window(half: i64) -> RootedSample {
        let pts: Vec<f64> = (-half..=half).map(|x| x as f64).collect();
        let _ = pts.len();
        let interior: Vec<f64> = (-half..=half).map(|x| (half - x.abs()) as f64).collect();
        RootedSample::from_coords(1, pts, half as u32, interior, Norm::L2).unwrap()
    }

    fn z2_window(half: i64, norm: Norm) -> RootedSample {
        let mut pts = Vec::new();
        let mut interior = Vec::new();
        let mut root = 0;
        let mut idx = 0u32;
        for x in -half..=half {
            for y in -half..=half {
                if x == 0 && y == 0 {
                    root = idx;
                }
                pts.push(x as f64);
                pts.push(y as f64);
                interior.push((half - x.abs()).min(half - y.abs()) as f64);
                idx += 1;
            }
        }
        RootedSample::from_coords(2, pts, root, interior, norm).unwrap()
    }

    #[test]
    fn all_radius_one_covering_of_z_has_k3() {
        let s = z_window(10);
        let assignment = CoveringAssignment {
            radii: vec![1.0; s.len()],
            floor: 1.0,
            rule: "all-ones".into(),
            seed: 0,
        };
        let audit = audit_cover(&s, &assignment);
        assert!(audit.is_cover);
        assert_eq!(audit.max_multiplicity, 3);
    }

    #[test]
    fn radius_zero_everywhere_is_not_a_cover() {
        let s = z_window(5);
        let assignment = CoveringAssignment {
            radii: vec![0.0; s.len()],
            floor: 1.0,
            rule: "none".into(),
            seed: 0,
        };
        let audit = audit_cover(&s, &assignment);
        assert!(!audit.is_cover);
    }

    #[test]
    fn shifted_lattice_k1_center_every_n() {
        let s = z_window(12);
        let mut rng = replicate_rng(3, 0);
        let a = shifted_lattice_cover(&s, 1.0, 3, &mut rng).unwrap();
        // exactly one center in every 3 consecutive integers
        let centers: Vec<i64> = (0..s.len())
            .filter(|&v| a.radii[v] > 0.0)
            .map(|v| s.coords_of(v as u32).unwrap()[0] as i64)
            .collect();
        for w in centers.windows(2) {
            assert_eq!(w[1] - w[0], 3);
        }
        let audit = audit_cover(&s, &a);
        assert!(audit.is_cover);
        assert!(audit.max_multiplicity <= 2);
    }

    #[test]
    fn shifted_lattice_k2_l2_multiplicity_at_most_4() {
        for seed in 0..5 {
            let s = z2_window(12, Norm::L2);
            let mut rng = replicate_rng(seed, 0);
            let a = shifted_lattice_cover(&s, 1.0, 4, &mut rng).unwrap();
            let audit = audit_cover(&s, &a);
            assert!(audit.is_cover, "uncovered: {:?}", audit.uncovered);
            assert!(audit.max_multiplicity <= 4, "K = {}", audit.max_multiplicity);
        }
    }

    #[test]
    fn linf_lattice_cover_is_disjoint() {
        for seed in 0..5 {
            let s = z2_window(12, Norm::Linf);
            let mut rng = replicate_rng(seed, 1);
            let a = shifted_lattice_cover_linf(&s, 1.0, 2, &mut rng).unwrap();
            let audit = audit_cover(&s, &a);
            assert!(audit.is_cover);
            assert_eq!(audit.max_multiplicity, 1);
        }
    }

    #[test]
    fn interval_cover_z_every_point_is_center() {
        let s = z_window(10);
        let mut rng = replicate_rng(5, 0);
        let a = interval_cover_line(&s, 1.0, &mut rng).unwrap();
        // every unit cell holds exactly one integer, so every point centers
        for v in 0..s.len() {
            assert!(a.radii[v] > 0.0);
        }
        let audit = audit_cover(&s, &a);
        assert!(audit.is_cover);
        assert!(audit.max_multiplicity <= 3);
    }

    #[test]
    fn interval_cover_poisson_windows_are_3_bounded() {
        use rand::Rng as _;
        for seed in 0..200 {
            let mut rng = replicate_rng(9, seed);
            // Poisson-ish window: exponential gaps through 0
            let mut pts = vec![0.0f64];
            let mut x = 0.0;
            for _ in 0..40 {
                x += -(rng.gen::<f64>().max(1e-12)).ln();
                pts.push(x);
            }
            let mut y = 0.0;
            for _ in 0..40 {
                y -= -(rng.gen::<f64>().max(1e-12)).ln();
                pts.push(y);
            }
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let root = pts.iter().position(|&p| p == 0.0).unwrap() as u32;
            let n = pts.len();
            let span = pts[n - 1].min(-pts[0]);
            let interior: Vec<f64> =
                pts.iter().map(|&p| (span - p.abs()).max(0.0)).collect();
            let s = RootedSample::from_coords(1, pts, root, interior, Norm::L2).unwrap();
            let r = 1.0 + (seed % 3) as f64;
            let a = interval_cover_line(&s, r, &mut rng).unwrap();
            let audit = audit_cover(&s, &a);
            assert!(audit.is_cover, "seed {seed}: uncovered {:?}", audit.uncovered);
            assert!(audit.max_multiplicity <= 3, "seed {seed}: K={}", audit.max_multiplicity);
        }
    }

    #[test]
    fn greedy_path_examples() {
        let mut rng = replicate_rng(1, 0);
        let p3 = FiniteTree::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(greedy_finite_tree_cover(&p3, 1, &mut rng), vec![1]);
        let p5 = FiniteTree::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let centers = greedy_finite_tree_cover(&p5, 1, &mut rng);
        assert_eq!(centers.len(), 2);
        assert_eq!(brute_force_min_cover(&p5, 1), 2);
    }

    #[test]
    fn greedy_matches_brute_force_on_random_trees() {
        use rand::Rng as _;
        for seed in 0..60 {
            let mut rng = replicate_rng(17, seed);
            let n = rng.gen_range(2..=9usize);
            let mut edges = Vec::new();
            for v in 1..n as u32 {
                edges.push((rng.gen_range(0..v), v));
            }
            let t = FiniteTree::from_edges(n, &edges).unwrap();
            for cover_n in [1u32, 2] {
                let greedy = greedy_finite_tree_cover(&t, cover_n, &mut rng);
                let best = brute_force_min_cover(&t, cover_n);
                assert_eq!(greedy.len(), best, "tree seed {seed} n={cover_n} edges {edges:?}");
            }
        }
    }

    fn ray_window(len: usize) -> TreeWindow {
        // 0 <- 1 <- ... <- len-1 (frontier at the top)
        let parent: Vec<Option<u32>> =
            (0..len).map(|v| if v + 1 < len { Some(v as u32 + 1) } else { None }).collect();
        TreeWindow::from_parents(parent, &vec![true; len], 0).unwrap()
    }

    #[test]
    fn ball_cover_on_ray_has_density_one_over_2n_plus_1() {
        // loop oracle: simulate on a long path and count. Balls of radius n
        // on a path cover 2n+1 vertices, and the greedy fixed point places
        // centers every 2n+1 vertices, matching the finite-path optimum.
        let mut rng = replicate_rng(2, 0);
        let t = ray_window(3000);
        let res = one_ended_ball_cover(&t, 2, &mut rng).unwrap();
        let interior: Vec<u32> =
            (0..3000u32).filter(|&v| !res.censored[v as usize]).collect();
        let frac = res.centers.len() as f64 / interior.len() as f64;
        assert!((frac - 0.2).abs() < 0.01, "got {frac}");
        assert_eq!(res.centers[0], 2);
        assert_eq!(res.centers[1], 7);
    }

    #[test]
    fn cone_cover_on_ray_selects_every_n_plus_1() {
        let t = ray_window(3000);
        let res = cone_cover(&t, 1).unwrap();
        let frac = res.selected.len() as f64 / 3000.0;
        assert!((frac - 0.5).abs() < 0.01, "got {frac}");
        assert_eq!(&res.selected[..3], &[1, 3, 5]);
        let res2 = cone_cover(&t, 2).unwrap();
        let frac2 = res2.selected.len() as f64 / 3000.0;
        assert!((frac2 - 1.0 / 3.0).abs() < 0.01, "got {frac2}");
    }

    #[test]
    fn cone_cover_covers_uncensored_vertices() {
        // binary one-ended window: full binary tree of depth 10 under the
        // frontier vertex
        let depth = 10u32;
        let mut parent: Vec<Option<u32>> = vec![None];
        let mut level = vec![depth];
        let mut frontier = vec![0u32];
        for d in (0..depth).rev() {
            let mut nf = Vec::new();
            for &v in &frontier {
                for _ in 0..2 {
                    parent.push(Some(v));
                    level.push(d);
                    nf.push(parent.len() as u32 - 1);
                }
            }
            frontier = nf;
        }
        let t = TreeWindow::from_parents(parent, &vec![true; level.len()], 1).unwrap();
        let n = 2;
        let res = cone_cover(&t, n).unwrap();
        // audit: every uncensored vertex must be within distance n below a
        // selected ancestor
        let mut covered = vec![false; t.len()];
        for &s in &res.selected {
            let mut stack = vec![(s, 0u32)];
            while let Some((v, d)) = stack.pop() {
                covered[v as usize] = true;
                if d < n {
                    for &c in &t.children[v as usize] {
                        stack.push((c, d + 1));
                    }
                }
            }
        }
        for v in 0..t.len() {
            if !res.censored[v] {
                assert!(covered[v], "vertex {v} (height {}) uncovered", t.height[v]);
            }
        }
        // heights = levels here; selection is levels ≡ n mod (n+1)
        for &s in &res.selected {
            assert_eq!(t.height[s as usize] % (n + 1), n);
        }
    }

    #[test]
    fn regular_tree_cover_is_disjoint_on_interior() {
        for seed in 0..5 {
            let mut rng = replicate_rng(31, seed);
            let (sample, assignment) = regular_tree_cover(3, 2, 7, &mut rng).unwrap();
            let audit = audit_cover(&sample, &assignment);
            assert!(audit.is_cover, "uncovered {:?}", &audit.uncovered[..audit.uncovered.len().min(5)]);
            assert_eq!(audit.max_multiplicity, 1);
        }
    }

    #[test]
    fn regular_tree_ball_sizes_match_bfs_oracle() {
        let spheres = regular_tree_sphere_sizes(3, 3);
        assert_eq!(spheres, vec![1, 3, 6, 12]);
        let ball: u64 = spheres[..3].iter().sum();
        assert_eq!(ball, 10); // |N_2(o)| in T_3
    }

    struct FixedRule {
        p: f64,
        r: f64,
        k: u32,
    }
    impl RootRadiusRule for FixedRule {
        fn name(&self) -> String {
            "fixed".into()
        }
        fn k_bound(&self) -> u32 {
            self.k
        }
        fn floor(&self) -> f64 {
            self.r
        }
        fn sample_root_radius(&self, rng: &mut ChaCha8Rng) -> f64 {
            if rng.gen::<f64>() < self.p {
                self.r
            } else {
                0.0
            }
        }
    }

    #[test]
    fn lambda_bounds_collapse_for_disjoint_rule() {
        let rule = FixedRule { p: 0.125, r: 4.0, k: 1 };
        let b = lambda_r_bounds(&rule, 20_000, 7);
        assert_eq!(b.lower(), b.upper());
        assert!((b.p_hat.mean - 0.125).abs() < 3.0 * b.p_hat.se + 1e-9);
    }

    #[test]
    fn content_estimate_monotone_in_alpha() {
        let rule = FixedRule { p: 0.5, r: 2.0, k: 2 };
        let fam: Vec<&dyn RootRadiusRule> = vec![&rule];
        let c1 = content_estimate(&fam, 0.5, 1.0, 10_000, 3).unwrap();
        let c2 = content_estimate(&fam, 1.5, 1.0, 10_000, 3).unwrap();
        assert!(c1.mean <= c2.mean);
        // alpha = 0 reduces to the center intensity
        let c0 = content_estimate(&fam, 0.0, 1.0, 10_000, 3).unwrap();
        assert!((c0.mean - 0.5).abs() < 0.02);
    }

    #[test]
    fn floor_violation_is_invalid_rule() {
        let rule = FixedRule { p: 0.5, r: 2.0, k: 2 };
        assert!(content_of_rule(&rule, 1.0, 4.0, 10, 0).is_err());
    }
}
