//! Mirror maps, Bregman divergences and projections, and mirror averaging.

mod average;
mod mirror;
mod simplex;
mod stack;

pub use average::mirror_average;
pub use mirror::{
    bregman_divergence, bregman_project, mirror_pull, mirror_push, norm_ratio, FeasibleSet, MirrorMap, ENTROPY_FLOOR,
    SIMPLEX_SUM_TOL,
};
pub use simplex::euclidean_simplex_projection;
pub(crate) use simplex::project_simplex_into;
pub use stack::StackedPoint;
