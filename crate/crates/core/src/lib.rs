//! Wigner quasiprobability distributions for one-particle states, their
//! quadrature images, and sequential testing protocols that bet against them.
//!
//! The numerical modules are generic over the scalar type ([`Real`]: `f32`
//! or `f64`). The aliases at the crate root fix the scalar to `f64`, which is
//! what the protocol engine and the command line use; `*F32` aliases are
//! provided for single precision.

// `!(x > 0.0)` rejects NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod interp;
pub mod io;
pub mod protocol;
pub mod quadrature;
pub mod quasi;
pub mod real;
pub mod state;
pub mod wigner;

pub use error::{Error, Result};
pub use quadrature::{frft, interval_probability, quadrature_distribution, QuadratureSpec};
pub use quasi::{l1_distance, pushforward_linear};
pub use real::Real;
pub use state::{fock_state, fourier_state, gaussian_state, superpose, Fixture};
pub use wigner::{marginal_p, marginal_x, wigner, wigner_with_residue};

pub type Grid1D = state::Grid1D<f64>;
pub type WaveFunction = state::WaveFunction<f64>;
pub type SignedDensity1D = quasi::SignedDensity1D<f64>;
pub type SignedDensity2D = quasi::SignedDensity2D<f64>;
pub type ProbabilityDensity1D = quasi::ProbabilityDensity1D<f64>;

pub type Grid1DF32 = state::Grid1D<f32>;
pub type WaveFunctionF32 = state::WaveFunction<f32>;
pub type SignedDensity1DF32 = quasi::SignedDensity1D<f32>;
pub type SignedDensity2DF32 = quasi::SignedDensity2D<f32>;
pub type ProbabilityDensity1DF32 = quasi::ProbabilityDensity1D<f32>;

/// Complex amplitude type used by [`WaveFunction`].
pub type Complex64 = num_complex::Complex<f64>;
