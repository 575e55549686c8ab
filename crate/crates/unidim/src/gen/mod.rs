//! Seeded constructors for the example spaces: lattices, canopy trees,
//! eternal Galton-Watson heights, random-walk sets, the subdivision
//! construction, the drainage network, and self-similar sets.

pub mod canopy;
pub mod cantor;
pub mod drainage;
pub mod egw;
pub mod koch;
pub mod lattice;
pub mod selfsim;
pub mod walk;

pub use canopy::{gen_canopy, gen_generalized_canopy, CanopyMetric, GeneralizedCanopy};
pub use cantor::{gen_cantor, CantorConstruction};
pub use drainage::{drainage_height_sampler, gen_drainage};
pub use egw::{gen_egw, OffspringDistribution};
pub use koch::gen_koch;
pub use lattice::{gen_lattice, gen_lattice_cayley, LatticeWindowSpec};
pub use selfsim::{gen_self_similar, IfsSpec, Similitude};
pub use walk::{gen_srw_image, gen_srw_zeros, subdivide_process, JumpDistribution};

/// Model catalog entry for the CLI.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ModelInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub parameters: &'static str,
    pub dimension_route: &'static str,
}

pub fn catalog() -> Vec<ModelInfo> {
    vec![
        ModelInfo {
            name: "lattice",
            summary: "scaled lattice delta*Z^k rooted at 0",
            parameters: "k (1|2), delta > 0, window extent",
            dimension_route: "shifted-lattice coverings + ball growth",
        },
        ModelInfo {
            name: "lattice-cayley",
            summary: "Z^2 Cayley graph with a chosen symmetric generating set",
            parameters: "generators (axes | axes+diag), window extent",
            dimension_route: "shifted-lattice coverings under the graph metric",
        },
        ModelInfo {
            name: "canopy",
            summary: "canopy tree C_k, root level law ~ k^-n",
            parameters: "k >= 2, metric (graph | geometric a | factorial), depth",
            dimension_route: "height survival (graph) / covering decay + growth (geometric)",
        },
        ModelInfo {
            name: "generalized-canopy",
            summary: "stationary rows 1/p_n (Z+U) linked to the closest upper point",
            parameters: "p (geometric k | designed alpha,beta), depth",
            dimension_route: "height survival",
        },
        ModelInfo {
            name: "egw",
            summary: "eternal Galton-Watson tree heights (critical offspring)",
            parameters: "offspring (geometric | poisson | table), depth cap",
            dimension_route: "height survival",
        },
        ModelInfo {
            name: "srw-image",
            summary: "image of a two-sided walk with positive i.i.d. jumps",
            parameters: "jumps (deterministic d | pareto beta), steps",
            dimension_route: "gap survival integral",
        },
        ModelInfo {
            name: "srw-zeros",
            summary: "zero set of the symmetric simple random walk on Z",
            parameters: "horizon",
            dimension_route: "gap survival integral",
        },
        ModelInfo {
            name: "subdivision",
            summary: "gap-subdivided point process, biased by ceil(S^alpha)",
            parameters: "base (pareto beta), alpha, cap",
            dimension_route: "gap survival integral",
        },
        ModelInfo {
            name: "drainage",
            summary: "drainage network on the even lattice",
            parameters: "window / height cap",
            dimension_route: "height survival (graph metric)",
        },
        ModelInfo {
            name: "cantor",
            summary: "unimodular discrete Cantor set",
            parameters: "depth <= 20, construction (digit | nested)",
            dimension_route: "ball growth + self-similar coverings",
        },
        ModelInfo {
            name: "koch",
            summary: "unimodular discrete Koch snowflake",
            parameters: "depth <= 10",
            dimension_route: "ball growth + self-similar coverings",
        },
        ModelInfo {
            name: "self-similar",
            summary: "equal-ratio IFS orbit (cantor | sierpinski | koch presets)",
            parameters: "preset, depth",
            dimension_route: "ball growth + address coverings",
        },
        ModelInfo {
            name: "regular-tree",
            summary: "k-regular tree with its disjoint ball covering",
            parameters: "k >= 3, radius grid",
            dimension_route: "disjoint covering intensities (super-polynomial)",
        },
        ModelInfo {
            name: "finite",
            summary: "uniformly rooted finite template (path | random tree | pair)",
            parameters: "template, size",
            dimension_route: "dimension 0 / H^0 measure",
        },
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn catalog_lists_at_least_12_models() {
        assert!(super::catalog().len() >= 12);
    }
}
