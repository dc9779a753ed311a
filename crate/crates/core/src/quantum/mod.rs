//! Finite-dimensional quantum states and algebras: restriction,
//! relative entropy, decoherence and switch-state conditions.

pub mod algebra;
pub mod decoherence;
pub mod operator;
pub mod random;
pub mod state;
pub mod switch;

pub use algebra::{eigh, generate_algebra, Algebra, AlgebraSpec, Block};
pub use decoherence::{is_decoherent, purity_property_check, DecoherenceReport, PurityReport, DECOHERENCE_DELTA};
pub use operator::{partial_trace, Mat, Operator, ProjectionPair, Vector};
pub use state::{app, app_on, max_projection_gap, rel_entropy, restrict, AlgebraState, SPECTRAL_CUTOFF};
pub use switch::{check_f, SwitchStateReport};
