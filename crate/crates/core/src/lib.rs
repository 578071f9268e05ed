//! Numerical toolkit for two-point sequential quantum measurements.
//!
//! The library computes joint outcome statistics for the protocol
//! "prepare ρ, measure {P_i}, evolve through a channel ℰ, measure {Q_j}":
//! the projective-update probabilities, the Margenau-Hill quasiprobability
//! distribution, and the disturbance term relating the two. Every scenario
//! is encoded by a single bipartite operator (the state over time
//! `½{ρ⊗𝟙, J[ℰ]}`) whose Born-rule pairing with P_i ⊗ Q_j reproduces the
//! Margenau-Hill table. On top of that sit channel Bayesian inversion,
//! time-reversal checks, tomographic reconstruction, and search tools for
//! probing when the projective-update statistics admit such an encoding.
//!
//! Bipartite index convention throughout: (i_a, i_b) ↦ i_a·dim_b + i_b.

pub mod bayes;
pub mod channel;
pub mod config;
pub mod distributions;
pub mod error;
pub mod explorer;
pub mod hermitian;
pub mod io;
pub mod matrix;
pub mod random;
pub mod sot;
pub mod states;

mod lstsq;

pub use channel::{JamiolkowskiOperator, QuantumChannel};
pub use config::Tolerances;
pub use distributions::{DistributionKind, JointQuasiDistribution, TpsmScenario};
pub use error::{Error, Result};
pub use hermitian::{EigDecomposition, HermitianOperator};
pub use matrix::{BipartiteIndex, Complex64, ComplexMatrix, Subsystem};
pub use sot::{SpectrumReport, StateOverTime};
pub use states::{DensityOperator, ProjectiveMeasurement};
