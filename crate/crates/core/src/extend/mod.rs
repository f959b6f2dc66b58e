//! Lipschitz extension of Q-valued data.

pub mod cone;
pub mod plane;
pub mod whitney;

pub use cone::{cone_extend, BallNorm, BoundarySample, ConeExtension, ConeTree, SamplePoint};
pub use plane::extend_to_plane;
pub use whitney::{depth_cap, whitney_extend, DataPoint, DomainBox, WhitneyExtension};
