//! Output statistics of multiphoton Hong-Ou-Mandel interference, read as a
//! single step of a continuous-time quantum walk on the line of population
//! differences `Δ = K - L`.
//!
//! Three independent routes give the same distribution: the closed form and
//! its double-sum expansion ([`closed_form`]), and direct evolution under the
//! tridiagonal walk Hamiltonian ([`oracle`]).

pub mod channels;
pub mod cli;
pub mod closed_form;
pub mod error;
pub mod metrics;
pub mod numeric;
pub mod oracle;
pub mod state;

pub use error::{Error, Result};
pub use numeric::{NumericMode, Rational, Scalar};
pub use state::{BeamSplitter, DeltaDistribution, DeltaMarginal, FockPair, JointCountDistribution};
