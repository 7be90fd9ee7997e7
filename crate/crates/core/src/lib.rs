//! Multi-mode Bogoliubov transformations of travelling quantum light pulses.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`], [`mode`], [`kernel`]: uniform grids, wave-packet mode functions,
//!   inner products and Hermitian kernel eigendecomposition.
//! - [`bogoliubov`]: the kernel pair `(F, G)` with `a_out = F a_in + G* a_in†`,
//!   composition, symplectic checks and the pullback of an output mode.
//! - [`devices`]: kernel builders for a pulse-pumped OPO, a single-pass OPA and
//!   a TWPA modelled as a chain of OPO stages.
//! - [`coherence`]: the output first-order coherence function and its split
//!   into (at most two) input-seeded modes and squeezed-vacuum modes.
//! - [`state`]: Fock-basis states, the three-mode decomposition of an output
//!   mode, characteristic-function propagation, Wigner functions, the
//!   Bloch–Messiah parameterisation and joint two-mode states.
//! - [`metrics`]: purity, fidelity, quadrature statistics and the squeezing
//!   fidelity optimisation.
//!
//! All kernels are dense matrices on a uniform grid; the continuum measure is
//! carried explicitly by the grid spacing `dt`.

pub mod bogoliubov;
pub mod coherence;
pub mod devices;
mod error;
pub mod export;
pub mod grid;
pub mod kernel;
pub mod linalg;
pub mod metrics;
pub mod mode;
pub mod pipeline;
pub mod state;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use bogoliubov::{BogoliubovKernels, SymplecticReport};
pub use coherence::{InputMoments, ModeSpectrum};
pub use grid::TemporalGrid;
pub use kernel::HermitianKernel;
pub use mode::ModeFunction;
pub use state::QuantumState;
