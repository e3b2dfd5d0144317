//! Finite k-metric spaces.
//!
//! A k-metric assigns a non-negative value to every k-subset of a finite point
//! set. This crate builds them, checks the weak and strong simplex
//! inequalities, and moves between several families:
//!
//! * [`simplex`]: complete simplicial complexes, chains, boundary and
//!   coboundary operators.
//! * [`lp`]: a dense two-phase simplex solver used by everything that needs
//!   an optimization.
//! * [`metric`]: the [`KMetric`] table, weak verification, minimum bounding
//!   chains, and strong verification.
//! * [`coboundary`]: k-metrics induced by a matrix of chains and a norm, the
//!   ℓ∞ embedding of strong k-metrics, and random-projection embeddings.
//! * [`apex`]: apex extension and the lift/projection operators.
//! * [`volume`]: simplex volumes of point clouds and their coboundary form.
//! * [`hypertree`]: minimum-bounding-chain k-metrics of weighted complexes and
//!   the hypertree to ℓ1 construction.
//! * [`corpus`]: named instances and seeded random families.

pub mod apex;
pub mod coboundary;
pub mod corpus;
pub mod hypertree;
pub mod linalg;
pub mod lp;
pub mod metric;
pub mod simplex;
pub mod volume;

pub use apex::{apex_extend, apex_extend_chain_matrix, lift_operator, project_operator, ApexExtension};
pub use coboundary::{eval_coboundary_metric, frechet_embed, max_distortion, ChainMatrix, Norm};
pub use hypertree::{hypertree_to_l1, is_hypertree, mbc_metric, HypertreeReport, WeightedComplex};
pub use lp::{solve, solve_bounded_free, LpSolution, LpStatus, StandardFormLp};
pub use metric::{check_strong, check_weak, min_bounding_chain, KMetric, VerificationReport, VerifyOptions};
pub use simplex::{
    apply, boundary_operator, coboundary_operator, enumerate_simplices, orientation_sign, Chain,
    LinearChainOperator, OrientedSimplex, SimplexKey,
};
pub use volume::PointCloud;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("boundary not fillable: {0}")]
    NotFillable(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("input not strong: simplex {simplex:?} has value {value} but the best non-expanding column reaches {achieved}")]
    NotStrong { simplex: Vec<usize>, value: f64, achieved: f64 },

    #[error("facet column is not a coboundary: facet {facet:?} leaves residual {residual:.3e}")]
    NotCoboundary { facet: Vec<usize>, residual: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
