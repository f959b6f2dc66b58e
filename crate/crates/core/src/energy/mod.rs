//! Grid-sampled Q-valued maps, their p-energy and the Dirichlet problem.

pub mod discrete;
mod fill;
pub mod grid;
pub mod solver;
pub mod truncation;

pub use discrete::{discrete_energy, dp_distance, edge_term, trace, truncate_coords, EdgeEnergy, EnergyReport, Trace};
pub use grid::{Edge, Grid, GridFunction, NodeKind};
pub use solver::{
    complex_sqrt_pair, solve_dirichlet, BoundaryData, DirichletSolution, DomainShape, InnerSolver, RunSummary,
    SolveOptions,
};
pub use truncation::{lipschitz_truncation, local_quotients, LipschitzTruncation};
