//! Numerical toolkit for the semi-relativistic Pauli-Fierz fiber Hamiltonian
//!
//! ```text
//! H(P) = γ √((P − P_f + eA(0))² + σ·B(0) + M²) + H_f
//! ```
//!
//! acting on ℂ² ⊗ (truncated photon Fock space). The photon field is
//! discretized into finitely many modes inside the ultraviolet ball
//! ([`modes`]), the Fock space is truncated by total photon number
//! ([`fock`]), and the fiber operators are assembled as exact compressions
//! of their infinite-dimensional counterparts ([`hamiltonian`]).
//!
//! On top of that sit the low-lying spectrum and the emission gap Δ(P)
//! ([`spectral`]), the explicit comparison operators L₋(P) ≤ H(P) ≤ L₊(P)
//! and min-max eigenvalue counting ([`bounds`]), and time-reversal /
//! Kramers-degeneracy certificates ([`kramers`]).

pub mod bounds;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod kramers;
pub mod linalg;
pub mod modes;
pub mod params;
pub mod spectral;

pub use error::{Error, Result};
pub use hamiltonian::{FiberModel, SpinorOperator, TForm};
pub use params::{DirectionSet, Envelope, GridSpec, ModelParams};

/// Complex scalar used for every operator entry.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<C64>;
/// Real 3-vector (momenta, wavevectors, polarizations).
pub type Vec3 = nalgebra::Vector3<f64>;
