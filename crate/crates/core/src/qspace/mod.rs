//! Unordered Q-tuples in R^n and the assignment metrics between them.

pub mod assignment;
pub mod branches;
pub mod metric;
pub mod split;
pub mod tuple;

pub use branches::{select_branches, BranchSelection};
pub use metric::{
    dist, dist_sorted_1d, distance, distance_value, pairing_cost, squared_distance, Matching, MetricKind,
};
pub use split::{concatenate, concatenate_all, local_split, split_distance, support_sigma, LocalSplit, SupportPoint};
pub use tuple::QTuple;
