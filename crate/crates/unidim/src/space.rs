//! Finite realizations of rooted boundedly-finite discrete metric spaces.
//!
//! A `RootedSample` is one realization on a finite window: an indexed point
//! set with either coordinate-backed or graph-distance-backed metric, a root,
//! optional per-point marks, and per-point interior radii recording how large
//! a ball around each point is guaranteed to be complete within the window.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type PointId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Norm::L2 => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Norm::Linf => a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
        }
    }
}

/// Which of the two optional structures backs the metric `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricBackend {
    Coords(Norm),
    Graph,
}

/// Finite truncation window of an (often infinite) space.
#[derive(Debug, Clone, PartialEq)]
pub enum Window {
    /// Axis-aligned box `[-extent_i, extent_i]` per axis.
    Box(Vec<f64>),
    /// Graph radius around the root.
    GraphRadius(f64),
    /// Generation depth (trees, self-similar constructions).
    Depth(u32),
}

impl Window {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Window::Box(e) => !e.is_empty() && e.iter().all(|x| *x > 0.0),
            Window::GraphRadius(r) => *r > 0.0,
            Window::Depth(d) => *d > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain("window extent must be positive"))
        }
    }
}

/// Adjacency in CSR form with positive edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    offsets: Vec<u32>,
    edges: Vec<(PointId, f64)>,
}

impl Adjacency {
    pub fn from_edge_list(n: usize, edges: &[(PointId, PointId, f64)]) -> Result<Self> {
        let mut deg = vec![0u32; n];
        for &(u, v, len) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::UnknownPoint(u.max(v)));
            }
            if !(len > 0.0) {
                return Err(Error::NonpositiveEdgeLength { u, v, len });
            }
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        let mut offsets = vec![0u32; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut flat = vec![(0u32, 0.0f64); offsets[n] as usize];
        for &(u, v, len) in edges {
            flat[fill[u as usize] as usize] = (v, len);
            fill[u as usize] += 1;
            flat[fill[v as usize] as usize] = (u, len);
            fill[v as usize] += 1;
        }
        Ok(Adjacency { offsets, edges: flat })
    }

    pub fn neighbors(&self, v: PointId) -> &[(PointId, f64)] {
        &self.edges[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    /// Undirected edge list (u < v), sorted, for serialization.
    pub fn edge_list(&self, n: usize) -> Vec<(PointId, PointId, f64)> {
        let mut out = Vec::new();
        for u in 0..n as u32 {
            for &(v, len) in self.neighbors(u) {
                if u < v {
                    out.push((u, v, len));
                }
            }
        }
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }
}

/// Per-point real-tuple marks with fixed arity.
#[derive(Debug, Clone, PartialEq)]
pub struct Marks {
    pub arity: usize,
    pub values: Vec<f64>,
}

impl Marks {
    pub fn get(&self, v: PointId) -> &[f64] {
        let a = self.arity;
        &self.values[v as usize * a..(v as usize + 1) * a]
    }
}

/// Result of a ball query; `boundary_biased` is set when the query radius
/// exceeded the interior radius of the center.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub ids: Vec<PointId>,
    pub boundary_biased: bool,
}

#[derive(Debug, Clone)]
pub struct RootedSample {
    k: usize,
    coords: Option<Vec<f64>>,
    adj: Option<Adjacency>,
    backend: MetricBackend,
    root: PointId,
    interior_radius: Vec<f64>,
    marks: Option<Marks>,
}

impl RootedSample {
    pub fn from_coords(
        k: usize,
        coords: Vec<f64>,
        root: PointId,
        interior_radius: Vec<f64>,
        norm: Norm,
    ) -> Result<Self> {
        if k == 0 || coords.len() % k != 0 {
            return Err(Error::domain("coords length must be a multiple of k"));
        }
        let n = coords.len() / k;
        if n == 0 {
            return Err(Error::domain("empty point set"));
        }
        if root as usize >= n {
            return Err(Error::UnknownPoint(root));
        }
        if interior_radius.len() != n {
            return Err(Error::domain("interior_radius length mismatch"));
        }
        Ok(RootedSample {
            k,
            coords: Some(coords),
            adj: None,
            backend: MetricBackend::Coords(norm),
            root,
            interior_radius,
            marks: None,
        })
    }

    pub fn from_graph(
        n: usize,
        edges: &[(PointId, PointId, f64)],
        root: PointId,
        interior_radius: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("empty point set"));
        }
        if root as usize >= n {
            return Err(Error::UnknownPoint(root));
        }
        if interior_radius.len() != n {
            return Err(Error::domain("interior_radius length mismatch"));
        }
        Ok(RootedSample {
            k: 0,
            coords: None,
            adj: Some(Adjacency::from_edge_list(n, edges)?),
            backend: MetricBackend::Graph,
            root,
            interior_radius,
            marks: None,
        })
    }

    /// Attaches planar/spatial coordinates to a graph-backed sample (the
    /// metric stays graph-backed unless `with_backend` switches it).
    pub fn with_coords(mut self, k: usize, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != self.len() * k {
            return Err(Error::domain("coords length mismatch"));
        }
        self.k = k;
        self.coords = Some(coords);
        Ok(self)
    }

    /// Chooses which structure backs the metric when both are present.
    pub fn with_backend(mut self, backend: MetricBackend) -> Result<Self> {
        match backend {
            MetricBackend::Coords(_) if self.coords.is_none() => {
                return Err(Error::domain("no coords to back the metric"))
            }
            MetricBackend::Graph if self.adj.is_none() => {
                return Err(Error::domain("no adjacency to back the metric"))
            }
            _ => {}
        }
        self.backend = backend;
        Ok(self)
    }

    pub fn with_marks(mut self, marks: Marks) -> Result<Self> {
        if marks.values.len() != self.len() * marks.arity {
            return Err(Error::domain("marks length mismatch"));
        }
        self.marks = Some(marks);
        Ok(self)
    }

    /// Rejects zero-distance distinct points (simple spaces only). O(n^2);
    /// intended for small spaces such as kappa inputs.
    pub fn validate_simple(&self) -> Result<()> {
        let n = self.len();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                if self.dist(u, v) <= 0.0 {
                    return Err(Error::domain(format!(
                        "pseudo-metric pair ({u},{v}): zero distance between distinct points"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.interior_radius.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn root(&self) -> PointId {
        self.root
    }

    pub fn backend(&self) -> MetricBackend {
        self.backend
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn coords_of(&self, v: PointId) -> Option<&[f64]> {
        self.coords.as_ref().map(|c| &c[v as usize * self.k..(v as usize + 1) * self.k])
    }

    pub fn adjacency(&self) -> Option<&Adjacency> {
        self.adj.as_ref()
    }

    pub fn marks(&self) -> Option<&Marks> {
        self.marks.as_ref()
    }

    pub fn interior_radius(&self, v: PointId) -> f64 {
        self.interior_radius[v as usize]
    }

    /// True iff balls of radius `r` around `v` are complete in this window.
    pub fn is_interior(&self, v: PointId, r: f64) -> bool {
        self.interior_radius[v as usize] >= r
    }

    /// Re-roots the sample at `v` without touching the underlying space.
    pub fn rerooted(&self, v: PointId) -> Result<Self> {
        if v as usize >= self.len() {
            return Err(Error::UnknownPoint(v));
        }
        let mut s = self.clone();
        s.root = v;
        Ok(s)
    }

    /// Relabels point ids by a permutation (`perm[old] = new`). Statistics
    /// must be invariant under this.
    pub fn relabeled(&self, perm: &[PointId]) -> Result<Self> {
        let n = self.len();
        if perm.len() != n {
            return Err(Error::domain("permutation length mismatch"));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p as usize >= n || seen[p as usize] {
                return Err(Error::domain("not a permutation"));
            }
            seen[p as usize] = true;
        }
        let coords = self.coords.as_ref().map(|c| {
            let mut out = vec![0.0; c.len()];
            for old in 0..n {
                let new = perm[old] as usize;
                out[new * self.k..(new + 1) * self.k]
                    .copy_from_slice(&c[old * self.k..(old + 1) * self.k]);
            }
            out
        });
        let adj = match &self.adj {
            Some(a) => {
                let edges: Vec<(PointId, PointId, f64)> = a
                    .edge_list(n)
                    .into_iter()
                    .map(|(u, v, len)| (perm[u as usize], perm[v as usize], len))
                    .collect();
                Some(Adjacency::from_edge_list(n, &edges)?)
            }
            None => None,
        };
        let mut interior = vec![0.0; n];
        for old in 0..n {
            interior[perm[old] as usize] = self.interior_radius[old];
        }
        let marks = self.marks.as_ref().map(|m| {
            let mut values = vec![0.0; m.values.len()];
            for old in 0..n {
                let new = perm[old] as usize;
                values[new * m.arity..(new + 1) * m.arity]
                    .copy_from_slice(&m.values[old * m.arity..(old + 1) * m.arity]);
            }
            Marks { arity: m.arity, values }
        });
        Ok(RootedSample {
            k: self.k,
            coords,
            adj,
            backend: self.backend,
            root: perm[self.root as usize],
            interior_radius: interior,
            marks,
        })
    }

    /// Metric evaluation. Graph-backed distance runs a full Dijkstra; prefer
    /// `graph_distances` or `ball` for batched queries.
    pub fn dist(&self, u: PointId, v: PointId) -> f64 {
        match self.backend {
            MetricBackend::Coords(norm) => {
                let cs = self.coords.as_ref().expect("coords backend");
                norm.dist(
                    &cs[u as usize * self.k..(u as usize + 1) * self.k],
                    &cs[v as usize * self.k..(v as usize + 1) * self.k],
                )
            }
            MetricBackend::Graph => {
                if u == v {
                    return 0.0;
                }
                self.dijkstra(u, f64::INFINITY, Some(v))
                    .into_iter()
                    .find(|&(w, _)| w == v)
                    .map(|(_, d)| d)
                    .unwrap_or(f64::INFINITY)
            }
        }
    }

    /// Shortest-path distances from `v` to all points within `rmax`;
    /// unreached points omitted.
    pub fn graph_distances(&self, v: PointId, rmax: f64) -> Result<Vec<(PointId, f64)>> {
        if v as usize >= self.len() {
            return Err(Error::UnknownPoint(v));
        }
        if self.adj.is_none() {
            return Err(Error::domain("graph_distances requires adjacency backend"));
        }
        Ok(self.dijkstra(v, rmax, None))
    }

    fn dijkstra(&self, src: PointId, rmax: f64, stop_at: Option<PointId>) -> Vec<(PointId, f64)> {
        #[derive(PartialEq)]
        struct Item(f64, PointId);
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> Ordering {
                // min-heap on distance
                other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal)
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let adj = self.adj.as_ref().expect("adjacency present");
        let mut dist = vec![f64::INFINITY; self.len()];
        let mut done = vec![false; self.len()];
        let mut out = Vec::new();
        let mut heap = BinaryHeap::new();
        dist[src as usize] = 0.0;
        heap.push(Item(0.0, src));
        while let Some(Item(d, u)) = heap.pop() {
            if done[u as usize] {
                continue;
            }
            done[u as usize] = true;
            out.push((u, d));
            if stop_at == Some(u) {
                break;
            }
            for &(w, len) in adj.neighbors(u) {
                let nd = d + len;
                if nd <= rmax && nd < dist[w as usize] {
                    dist[w as usize] = nd;
                    heap.push(Item(nd, w));
                }
            }
        }
        out
    }

    /// Closed ball `{u : d(v,u) <= r}`; empty when `r = 0`.
    pub fn ball(&self, v: PointId, r: f64) -> Result<Ball> {
        if v as usize >= self.len() {
            return Err(Error::UnknownPoint(v));
        }
        if r < 0.0 {
            return Err(Error::domain("negative radius"));
        }
        let boundary_biased = !self.is_interior(v, r);
        if r == 0.0 {
            return Ok(Ball { ids: Vec::new(), boundary_biased: false });
        }
        let ids = match self.backend {
            MetricBackend::Coords(_) => {
                (0..self.len() as u32).filter(|&u| self.dist(v, u) <= r).collect()
            }
            MetricBackend::Graph => {
                let mut ids: Vec<PointId> =
                    self.dijkstra(v, r, None).into_iter().map(|(u, _)| u).collect();
                ids.sort_unstable();
                ids
            }
        };
        Ok(Ball { ids, boundary_biased })
    }

    /// Max pairwise distance over a finite nonempty subset.
    pub fn diameter(&self, subset: &[PointId]) -> Result<f64> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        for &v in subset {
            if v as usize >= self.len() {
                return Err(Error::UnknownPoint(v));
            }
        }
        match self.backend {
            MetricBackend::Coords(_) => {
                let mut best = 0.0f64;
                for (i, &u) in subset.iter().enumerate() {
                    for &v in &subset[i + 1..] {
                        best = best.max(self.dist(u, v));
                    }
                }
                Ok(best)
            }
            MetricBackend::Graph => {
                let mut best = 0.0f64;
                for &u in subset {
                    let d = self.dijkstra(u, f64::INFINITY, None);
                    for &(w, dw) in &d {
                        if subset.contains(&w) {
                            best = best.max(dw);
                        }
                    }
                }
                Ok(best)
            }
        }
    }

    // ---- serialization -------------------------------------------------

    /// Line-oriented text format; round-trips bit-exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let backend = match self.backend {
            MetricBackend::Coords(Norm::L1) => "coords-l1",
            MetricBackend::Coords(Norm::L2) => "coords-l2",
            MetricBackend::Coords(Norm::Linf) => "coords-linf",
            MetricBackend::Graph => "graph",
        };
        let _ = writeln!(s, "unidim-space 1");
        let _ = writeln!(s, "k {}", self.k);
        let _ = writeln!(s, "backend {backend}");
        let _ = writeln!(s, "root {}", self.root);
        for v in 0..self.len() as u32 {
            let _ = write!(s, "p {} {}", v, fmt_f64(self.interior_radius[v as usize]));
            if let Some(c) = self.coords_of(v) {
                for x in c {
                    let _ = write!(s, " {}", fmt_f64(*x));
                }
            }
            let _ = writeln!(s);
        }
        if let Some(adj) = &self.adj {
            for (u, v, len) in adj.edge_list(self.len()) {
                let _ = writeln!(s, "e {} {} {}", u, v, fmt_f64(len));
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty file".into()))?;
        if header.trim() != "unidim-space 1" {
            return Err(Error::Parse(format!("bad header: {header}")));
        }
        let mut k = 0usize;
        let mut backend = None;
        let mut root = 0u32;
        let mut points: Vec<(u32, f64, Vec<f64>)> = Vec::new();
        let mut edges: Vec<(u32, u32, f64)> = Vec::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_ascii_whitespace();
            match it.next() {
                Some("k") => k = parse(it.next())?,
                Some("backend") => {
                    backend = Some(match it.next() {
                        Some("coords-l1") => MetricBackend::Coords(Norm::L1),
                        Some("coords-l2") => MetricBackend::Coords(Norm::L2),
                        Some("coords-linf") => MetricBackend::Coords(Norm::Linf),
                        Some("graph") => MetricBackend::Graph,
                        other => return Err(Error::Parse(format!("bad backend {other:?}"))),
                    })
                }
                Some("root") => root = parse(it.next())?,
                Some("p") => {
                    let id: u32 = parse(it.next())?;
                    let ir: f64 = parse_f64(it.next())?;
                    let cs: Vec<f64> =
                        it.map(|t| parse_f64(Some(t))).collect::<Result<_>>()?;
                    points.push((id, ir, cs));
                }
                Some("e") => {
                    let u: u32 = parse(it.next())?;
                    let v: u32 = parse(it.next())?;
                    let len: f64 = parse_f64(it.next())?;
                    edges.push((u, v, len));
                }
                other => return Err(Error::Parse(format!("bad line tag {other:?}"))),
            }
        }
        let backend = backend.ok_or_else(|| Error::Parse("missing backend".into()))?;
        points.sort_by_key(|p| p.0);
        let n = points.len();
        for (i, p) in points.iter().enumerate() {
            if p.0 as usize != i {
                return Err(Error::Parse("point ids must be dense".into()));
            }
        }
        let interior: Vec<f64> = points.iter().map(|p| p.1).collect();
        let has_coords = k > 0 && points.iter().all(|p| p.2.len() == k);
        let coords: Option<Vec<f64>> = if has_coords {
            Some(points.iter().flat_map(|p| p.2.iter().copied()).collect())
        } else {
            None
        };
        let mut sample = match backend {
            MetricBackend::Coords(norm) => {
                let coords = coords.ok_or_else(|| Error::Parse("coords backend without coords".into()))?;
                RootedSample::from_coords(k, coords, root, interior, norm)?
            }
            MetricBackend::Graph => {
                let s = RootedSample::from_graph(n, &edges, root, interior)?;
                if let Some(coords) = coords {
                    s.with_coords(k, coords)?
                } else {
                    s
                }
            }
        };
        if backend != MetricBackend::Graph && !edges.is_empty() {
            sample.adj = Some(Adjacency::from_edge_list(n, &edges)?);
        }
        Ok(sample)
    }
}

/// f64 formatting that round-trips exactly (shortest repr; inf spelled out).
fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x}")
    }
}

fn parse<T: std::str::FromStr>(tok: Option<&str>) -> Result<T> {
    tok.ok_or_else(|| Error::Parse("missing token".into()))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad token {tok:?}")))
}

fn parse_f64(tok: Option<&str>) -> Result<f64> {
    match tok {
        Some("inf") => Ok(f64::INFINITY),
        t => parse(t),
    }
}
