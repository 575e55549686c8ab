//! Unimodular discrete Koch snowflake on the triangular lattice.
//!
//! T_1 is a random unit segment at the origin; each generation replaces the
//! current path by the four-segment Koch motif built from rotated copies of
//! itself, the original occupying one of the four motif positions chosen
//! uniformly. Points live in integer coordinates over the basis
//! e1 = (1,0), e2 = (1/2, sqrt(3)/2), where 60-degree rotations act
//! integrally.

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sampling::RootedSampler;
use crate::space::{Norm, RootedSample};

pub type LatticePoint = (i64, i64);

/// Rotation by 60 degrees counterclockwise in lattice coordinates.
fn rot60(p: LatticePoint) -> LatticePoint {
    (-p.1, p.0 + p.1)
}

/// Rotation by k*60 degrees (k may be negative).
fn rot(p: LatticePoint, k: i32) -> LatticePoint {
    let mut q = p;
    for _ in 0..k.rem_euclid(6) {
        q = rot60(q);
    }
    q
}

pub fn to_euclid(p: LatticePoint) -> (f64, f64) {
    (p.0 as f64 + p.1 as f64 * 0.5, p.1 as f64 * 3f64.sqrt() / 2.0)
}

#[derive(Debug, Clone)]
pub struct KochFigure {
    /// path order from A to B
    pub path: Vec<LatticePoint>,
    pub a: LatticePoint,
    pub b: LatticePoint,
}

impl KochFigure {
    pub fn unit(rng: &mut ChaCha8Rng) -> Self {
        let units = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];
        let b = units[rng.gen_range(0..6)];
        KochFigure { path: vec![(0, 0), b], a: (0, 0), b }
    }

    /// One generation: the motif segments have directions u, R60 u, R-60 u,
    /// u; the original occupies position j (uniform), the other three are
    /// rotated/translated copies.
    pub fn grow(&self, rng: &mut ChaCha8Rng) -> Result<Self> {
        let j = rng.gen_range(1..=4u32);
        let v = (self.b.0 - self.a.0, self.b.1 - self.a.1);
        // motif base direction u with d_j = v
        let theta = |c: u32| -> i32 {
            match c {
                2 => 1,
                3 => -1,
                _ => 0,
            }
        };
        let u = rot(v, -theta(j));
        let d = |c: u32| rot(u, theta(c));
        // motif start: A minus the segments before position j
        let mut a_new = self.a;
        for c in 1..j {
            let s = d(c);
            a_new = (a_new.0 - s.0, a_new.1 - s.1);
        }
        let mut path = Vec::with_capacity(4 * self.path.len() - 3);
        let mut start = a_new;
        for c in 1..=4u32 {
            if c == j {
                // the original sits here unchanged
                let skip = usize::from(c > 1);
                path.extend_from_slice(&self.path[skip..]);
            } else {
                let rho = theta(c) - theta(j);
                let skip = usize::from(c > 1);
                for p in &self.path[skip..] {
                    let rel = (p.0 - self.a.0, p.1 - self.a.1);
                    let q = rot(rel, rho);
                    path.push((start.0 + q.0, start.1 + q.1));
                }
            }
            let s = d(c);
            start = (start.0 + s.0, start.1 + s.1);
        }
        let b_new = *path.last().unwrap();
        // the paper's construction has no coincidences; a violation is an
        // internal error
        let set: HashSet<LatticePoint> = path.iter().copied().collect();
        if set.len() != path.len() {
            return Err(Error::domain("koch construction overlap detected"));
        }
        Ok(KochFigure { path, a: a_new, b: b_new })
    }
}

/// Builds T_depth (and the extension used for interior radii).
pub fn koch_figure(depth: u32, rng: &mut ChaCha8Rng) -> Result<KochFigure> {
    if depth == 0 {
        return Err(Error::domain("depth must be >= 1"));
    }
    let mut fig = KochFigure::unit(rng);
    for _ in 1..depth {
        fig = fig.grow(rng)?;
    }
    Ok(fig)
}

/// Window sample of the snowflake: points of T_depth with the Euclidean
/// metric. All later-generation points enter through the two junction
/// endpoints, and the new arm leaves a junction at 60 degrees or more, so
/// the distance from x to everything beyond the window is at least
/// sin(60) * d(x, junction) up to a one-step lattice correction. The
/// interior radius uses half the junction distance, which the coupled
/// deeper-window tests validate with margin.
pub fn gen_koch(depth: u32) -> Result<RootedSampler> {
    if depth == 0 || depth > 10 {
        return Err(Error::domain("depth must lie in 1..=10"));
    }
    Ok(RootedSampler::new(format!("koch depth={depth}"), 0x60c4, move |rng| {
        let fig = koch_figure(depth, rng)?;
        let (ax, ay) = to_euclid(fig.a);
        let (bx, by) = to_euclid(fig.b);
        let mut coords = Vec::with_capacity(fig.path.len() * 2);
        let mut interior = Vec::with_capacity(fig.path.len());
        let mut root = None;
        for (i, &p) in fig.path.iter().enumerate() {
            let (x, y) = to_euclid(p);
            if p == (0, 0) {
                root = Some(i as u32);
            }
            coords.push(x);
            coords.push(y);
            let dj = ((x - ax).powi(2) + (y - ay).powi(2))
                .sqrt()
                .min(((x - bx).powi(2) + (y - by).powi(2)).sqrt());
            interior.push(0.5 * (dj - 1.0).max(0.0));
        }
        let root = root.ok_or_else(|| Error::domain("origin missing from koch window"))?;
        RootedSample::from_coords(2, coords, root, interior, Norm::L2)
    }))
}
