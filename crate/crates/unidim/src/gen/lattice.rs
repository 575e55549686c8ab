//! Lattice windows: delta*Z^k rooted at the origin, with the Euclidean or
//! l-infinity metric, and Z^2 Cayley-graph variants under the graph metric.

use crate::error::{Error, Result};
use crate::sampling::RootedSampler;
use crate::space::{Norm, RootedSample};

#[derive(Debug, Clone, Copy)]
pub struct LatticeWindowSpec {
    pub k: usize,
    pub delta: f64,
    /// half-extent in lattice steps per axis
    pub half: i64,
    pub norm: Norm,
}

/// Deterministic window of delta*Z^k rooted at 0; interior radii are the
/// distance to the window boundary.
pub fn lattice_window(spec: LatticeWindowSpec) -> Result<RootedSample> {
    let LatticeWindowSpec { k, delta, half, norm } = spec;
    if !(delta > 0.0) {
        return Err(Error::domain("delta must be positive"));
    }
    if k == 0 || k > 2 {
        return Err(Error::domain("lattice windows support k in {1,2}"));
    }
    let side = (2 * half + 1) as usize;
    let n = side.pow(k as u32);
    let mut coords = Vec::with_capacity(n * k);
    let mut interior = Vec::with_capacity(n);
    let mut root = 0u32;
    let mut idx = 0u32;
    let mut emit = |x: &[i64], idx: &mut u32| {
        if x.iter().all(|&c| c == 0) {
            root = *idx;
        }
        let margin = x.iter().map(|&c| half - c.abs()).min().unwrap() as f64 * delta;
        for &c in x {
            coords.push(c as f64 * delta);
        }
        interior.push(margin);
        *idx += 1;
    };
    match k {
        1 => {
            for x in -half..=half {
                emit(&[x], &mut idx);
            }
        }
        _ => {
            for x in -half..=half {
                for y in -half..=half {
                    emit(&[x, y], &mut idx);
                }
            }
        }
    }
    RootedSample::from_coords(k, coords, root, interior, norm)
}

/// Sampler wrapper around the deterministic lattice window.
pub fn gen_lattice(spec: LatticeWindowSpec) -> Result<RootedSampler> {
    lattice_window(spec)?; // validate eagerly
    Ok(RootedSampler::new(
        format!("lattice k={} delta={}", spec.k, spec.delta),
        0x1a77 ^ spec.k as u64,
        move |_| lattice_window(spec),
    ))
}

/// Symmetric generating sets for the Z^2 Cayley variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Z2Generators {
    Axes,
    AxesAndDiagonal,
}

/// Window of the Z^2 Cayley graph under the graph-distance metric for the
/// chosen generating set, rooted at the origin.
pub fn gen_lattice_cayley(half: i64, generators: Z2Generators) -> Result<RootedSampler> {
    let name = match generators {
        Z2Generators::Axes => "z2-cayley-axes",
        Z2Generators::AxesAndDiagonal => "z2-cayley-diag",
    };
    Ok(RootedSampler::new(name, 0xca71e, move |_| {
        let side = (2 * half + 1) as usize;
        let n = side * side;
        let at = |x: i64, y: i64| -> u32 { ((x + half) * side as i64 + (y + half)) as u32 };
        let mut edges = Vec::new();
        let mut coords = Vec::with_capacity(2 * n);
        let mut interior = Vec::with_capacity(n);
        for x in -half..=half {
            for y in -half..=half {
                coords.push(x as f64);
                coords.push(y as f64);
                interior.push(((half - x.abs()).min(half - y.abs())) as f64);
                if x + 1 <= half {
                    edges.push((at(x, y), at(x + 1, y), 1.0));
                }
                if y + 1 <= half {
                    edges.push((at(x, y), at(x, y + 1), 1.0));
                }
                if generators == Z2Generators::AxesAndDiagonal && x + 1 <= half && y + 1 <= half {
                    edges.push((at(x, y), at(x + 1, y + 1), 1.0));
                }
            }
        }
        let s = RootedSample::from_graph(n, &edges, at(0, 0), interior)?;
        s.with_coords(2, coords)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_point_count() {
        let s = lattice_window(LatticeWindowSpec { k: 1, delta: 1.0, half: 10, norm: Norm::L2 })
            .unwrap();
        assert_eq!(s.len(), 21);
        assert_eq!(s.coords_of(s.root()).unwrap()[0], 0.0);
    }

    #[test]
    fn linf_ball_counts_match_closed_form() {
        // |N_r(0)| = (2 floor(r/delta) + 1)^k under l-infinity; oracle is
        // direct enumeration by the ball query itself on a big window.
        for (k, delta) in [(1usize, 1.0f64), (2, 1.0), (2, 0.5)] {
            let s = lattice_window(LatticeWindowSpec { k, delta, half: 12, norm: Norm::Linf })
                .unwrap();
            for r in [0.7, 1.0, 2.3, 3.0] {
                let ball = s.ball(s.root(), r).unwrap();
                let m = (2 * (r / delta).floor() as usize + 1).pow(k as u32);
                assert_eq!(ball.ids.len(), m, "k={k} delta={delta} r={r}");
            }
        }
    }

    #[test]
    fn cayley_variants_are_quasi_isometric() {
        let axes = gen_lattice_cayley(8, Z2Generators::Axes).unwrap().sample(0).unwrap();
        let diag =
            gen_lattice_cayley(8, Z2Generators::AxesAndDiagonal).unwrap().sample(0).unwrap();
        // graph distances: l1 for axes, Chebyshev-like for axes+diagonal
        for (dx, dy, d_axes, d_diag) in
            [(1i64, 0i64, 1.0, 1.0), (1, 1, 2.0, 1.0), (3, 2, 5.0, 3.0), (2, -2, 4.0, 4.0)]
        {
            let side = 17i64;
            let at = |x: i64, y: i64| ((x + 8) * side + (y + 8)) as u32;
            assert_eq!(axes.dist(at(0, 0), at(dx, dy)), d_axes);
            assert_eq!(diag.dist(at(0, 0), at(dx, dy)), d_diag);
        }
    }
}
