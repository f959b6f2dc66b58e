//! Embeddings of Q-tuples into vector spaces.

pub mod almgren;
pub mod frame;
pub mod whitney;
pub mod zeta;

pub use almgren::{decode, pi_e, xi, xi0, xi_isometry_radius, DecodeOptions, EmbeddedVector};
pub use frame::{build_frame, empirical_epsilon, DirectionFrame, FrameOptions};
pub use whitney::{
    coefficient_count, whitney_eta, whitney_eta_complex, whitney_eta_inverse_1d, whitney_eta_inverse_real,
    WhitneyCoefficients, WhitneyTerm,
};
pub use zeta::{zeta_dual_gap, ZetaGap};
