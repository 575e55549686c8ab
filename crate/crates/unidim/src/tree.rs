//! Rooted tree windows with parent maps, descendant heights, and truncation
//! flags, plus a plain finite-tree type for the minimum-covering algorithms.

use crate::error::{Error, Result};
use crate::space::RootedSample;

/// Window of a one-ended tree encoded through its parent map. `parent[v]`
/// is `None` exactly where the parent chain exits the window (the frontier).
#[derive(Debug, Clone)]
pub struct TreeWindow {
    pub parent: Vec<Option<u32>>,
    pub children: Vec<Vec<u32>>,
    /// True iff the window is known to hold every child of the vertex.
    pub children_complete: Vec<bool>,
    /// Descendant-subtree depth, valid where `height_certain`.
    pub height: Vec<u32>,
    /// False where the window may be missing descendants.
    pub height_certain: Vec<bool>,
    /// Level marks (canopy rows, drainage y-offset); 0 when unused.
    pub level: Vec<u32>,
    pub root: u32,
    /// Planar coordinates where the model has them.
    pub coords: Option<Vec<(f64, f64)>>,
    /// Length of the edge to the parent (1 when absent).
    pub edge_len: Option<Vec<f64>>,
}

impl TreeWindow {
    /// Builds from a parent map. `children_complete[v]` must be true iff the
    /// window is known to contain every child of v.
    pub fn from_parents(
        parent: Vec<Option<u32>>,
        children_complete: &[bool],
        root: u32,
    ) -> Result<Self> {
        let n = parent.len();
        if root as usize >= n {
            return Err(Error::UnknownPoint(root));
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                if *p as usize >= n {
                    return Err(Error::UnknownPoint(*p));
                }
                children[*p as usize].push(v as u32);
            }
        }
        let (height, height_certain) = compute_heights(&parent, &children, children_complete)?;
        Ok(TreeWindow {
            parent,
            children,
            children_complete: children_complete.to_vec(),
            height,
            height_certain,
            level: vec![0; n],
            root,
            coords: None,
            edge_len: None,
        })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Descendant set of v inside the window (v included).
    pub fn descendants(&self, v: u32) -> Vec<u32> {
        let mut out = vec![v];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i] as usize]);
            i += 1;
        }
        out
    }

    /// Graph-backed sample with unit (or stored) edge lengths; interior
    /// radii are graph distances to the nearest frontier vertex.
    pub fn to_sample(&self) -> Result<RootedSample> {
        let n = self.len();
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        for v in 0..n {
            if let Some(p) = self.parent[v] {
                let len = self.edge_len.as_ref().map_or(1.0, |l| l[v]);
                edges.push((v as u32, p, len));
            }
        }
        let sample = RootedSample::from_graph(n, &edges, self.root, vec![0.0; n])?;
        // interior radius: distance to the nearest vertex with an unknown
        // neighborhood (absent parent or incomplete children)
        let mut interior = vec![f64::INFINITY; n];
        let mut frontier: Vec<u32> = (0..n as u32)
            .filter(|&v| {
                self.parent[v as usize].is_none() || !self.children_complete[v as usize]
            })
            .collect();
        if !frontier.is_empty() {
            // multi-source Dijkstra over the tree
            use std::cmp::Ordering;
            use std::collections::BinaryHeap;
            #[derive(PartialEq)]
            struct Item(f64, u32);
            impl Eq for Item {}
            impl Ord for Item {
                fn cmp(&self, other: &Self) -> Ordering {
                    other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal)
                }
            }
            impl PartialOrd for Item {
                fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                    Some(self.cmp(other))
                }
            }
            let mut dist = vec![f64::INFINITY; n];
            let mut heap = BinaryHeap::new();
            for v in frontier.drain(..) {
                dist[v as usize] = 0.0;
                heap.push(Item(0.0, v));
            }
            let adj = |v: u32| -> Vec<(u32, f64)> {
                let mut out = Vec::new();
                if let Some(p) = self.parent[v as usize] {
                    out.push((p, self.edge_len.as_ref().map_or(1.0, |l| l[v as usize])));
                }
                for &c in &self.children[v as usize] {
                    out.push((c, self.edge_len.as_ref().map_or(1.0, |l| l[c as usize])));
                }
                out
            };
            while let Some(Item(d, u)) = heap.pop() {
                if d > dist[u as usize] {
                    continue;
                }
                for (w, len) in adj(u) {
                    let nd = d + len;
                    if nd < dist[w as usize] {
                        dist[w as usize] = nd;
                        heap.push(Item(nd, w));
                    }
                }
            }
            for v in 0..n {
                interior[v] = dist[v];
            }
        }
        let mut s = sample;
        if let Some(coords) = &self.coords {
            let flat: Vec<f64> = coords.iter().flat_map(|&(x, y)| [x, y]).collect();
            s = s.with_coords(2, flat)?;
        }
        // replace placeholder interior radii
        let text_root = s.root();
        let mut edges2 = Vec::new();
        if let Some(adj) = s.adjacency() {
            edges2 = adj.edge_list(n);
        }
        let mut rebuilt = RootedSample::from_graph(n, &edges2, text_root, interior)?;
        if let Some(coords) = &self.coords {
            let flat: Vec<f64> = coords.iter().flat_map(|&(x, y)| [x, y]).collect();
            rebuilt = rebuilt.with_coords(2, flat)?;
        }
        Ok(rebuilt)
    }
}

/// Heights from the leaves up. A vertex's height is certain iff its child
/// set is complete in the window and all children have certain heights.
fn compute_heights(
    parent: &[Option<u32>],
    children: &[Vec<u32>],
    children_complete: &[bool],
) -> Result<(Vec<u32>, Vec<bool>)> {
    let n = parent.len();
    if children_complete.len() != n {
        return Err(Error::domain("children_complete length mismatch"));
    }
    // topological order: leaves first
    let mut remaining: Vec<u32> = children.iter().map(|c| c.len() as u32).collect();
    let mut queue: Vec<u32> =
        (0..n as u32).filter(|&v| remaining[v as usize] == 0).collect();
    let mut height = vec![0u32; n];
    let mut certain = vec![false; n];
    let mut seen = 0usize;
    let mut qi = 0;
    while qi < queue.len() {
        let v = queue[qi] as usize;
        qi += 1;
        seen += 1;
        let mut h = 0;
        let mut c_ok = children_complete[v];
        for &c in &children[v] {
            h = h.max(height[c as usize] + 1);
            c_ok &= certain[c as usize];
        }
        height[v] = h;
        certain[v] = c_ok;
        if let Some(p) = parent[v] {
            remaining[p as usize] -= 1;
            if remaining[p as usize] == 0 {
                queue.push(p);
            }
        }
    }
    if seen != n {
        return Err(Error::domain("parent map contains a cycle"));
    }
    Ok((height, certain))
}

/// Plain finite unrooted tree for the minimum-covering algorithms.
#[derive(Debug, Clone)]
pub struct FiniteTree {
    pub adj: Vec<Vec<u32>>,
}

impl FiniteTree {
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("empty tree"));
        }
        if edges.len() + 1 != n {
            return Err(Error::domain("a tree on n vertices has n-1 edges"));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::UnknownPoint(u.max(v)));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let t = FiniteTree { adj };
        if !t.is_connected() {
            return Err(Error::domain("edge list is not a connected tree"));
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    fn is_connected(&self) -> bool {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 0;
        while let Some(v) = stack.pop() {
            count += 1;
            for &w in &self.adj[v as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// Leaf-stripping heights: T_0 = T, T_{i+1} deletes the leaves of T_i;
    /// a vertex's height is the last round it survives.
    pub fn stripping_heights(&self) -> Vec<u32> {
        let n = self.len();
        let mut deg: Vec<u32> = self.adj.iter().map(|a| a.len() as u32).collect();
        let mut height = vec![0u32; n];
        let mut alive = vec![true; n];
        let mut current: Vec<u32> = (0..n as u32)
            .filter(|&v| deg[v as usize] <= 1)
            .collect();
        let mut round = 0;
        let mut removed = 0;
        while removed < n {
            let mut next = Vec::new();
            for &v in &current {
                height[v as usize] = round;
                alive[v as usize] = false;
                removed += 1;
            }
            for &v in &current {
                for &w in &self.adj[v as usize] {
                    if alive[w as usize] {
                        deg[w as usize] -= 1;
                        if deg[w as usize] <= 1 && !next.contains(&w) {
                            next.push(w);
                        }
                    }
                }
            }
            // isolated leftover (two-vertex cores strip together)
            current = next;
            round += 1;
            if current.is_empty() && removed < n {
                current = (0..n as u32).filter(|&v| alive[v as usize]).collect();
            }
        }
        height
    }

    /// All-pairs graph distances (BFS per vertex).
    pub fn distances(&self) -> Vec<Vec<u32>> {
        let n = self.len();
        let mut out = vec![vec![u32::MAX; n]; n];
        for s in 0..n {
            let d = &mut out[s];
            d[s] = 0;
            let mut queue = std::collections::VecDeque::from([s as u32]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v as usize] {
                    if d[w as usize] == u32::MAX {
                        d[w as usize] = d[v as usize] + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heights_on_explicit_window() {
        // path 0 <- 1 <- 2 <- 3 (3 at frontier), plus a leaf 4 under 2
        let parent = vec![Some(1), Some(2), Some(3), None, Some(2)];
        let complete = vec![true; 5];
        let t = TreeWindow::from_parents(parent, &complete, 0).unwrap();
        assert_eq!(t.height[0], 0);
        assert_eq!(t.height[1], 1);
        assert_eq!(t.height[2], 2);
        assert_eq!(t.height[3], 3);
        assert!(t.height_certain.iter().all(|&c| c));
        assert_eq!(t.descendants(2).len(), 4);
    }

    #[test]
    fn incomplete_children_censor_heights() {
        let parent = vec![Some(1), None];
        let complete = vec![true, false];
        let t = TreeWindow::from_parents(parent, &complete, 0).unwrap();
        assert!(t.height_certain[0]);
        assert!(!t.height_certain[1]);
    }

    #[test]
    fn stripping_heights_of_path() {
        let t = FiniteTree::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(t.stripping_heights(), vec![0, 1, 2, 1, 0]);
    }

    #[test]
    fn tree_window_to_sample_interior() {
        // ray window: 0 <- 1 <- 2 <- 3 (frontier at 3)
        let parent = vec![Some(1), Some(2), Some(3), None];
        let t = TreeWindow::from_parents(parent, &[true; 4], 0).unwrap();
        let s = t.to_sample().unwrap();
        assert_eq!(s.interior_radius(3), 0.0);
        assert_eq!(s.interior_radius(0), 3.0);
        assert_eq!(s.dist(0, 3), 3.0);
    }
}
