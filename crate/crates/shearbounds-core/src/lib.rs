//! Converging two-sided bounds for the effective quasistatic shear speed of
//! 2D periodic two- and three-phase composites.
//!
//! The crate computes the effective shear coefficient of a square unit cell
//! with piecewise-constant shear modulus and density by two routes that
//! bracket the exact value from above and below:
//!
//! * [`pwe`] — plane-wave-expansion bounds obtained by truncating the shear
//!   operator onto `(2N+1)^2` Fourier harmonics,
//! * [`mm`] — monodromy-matrix bounds obtained from the transfer matrix of
//!   the cross-section ODE system with `2N+1` harmonics in `x2`.
//!
//! Both pairs converge monotonically in `N`, and the monodromy pair always
//! lies inside the plane-wave pair. Supporting modules provide the unit-cell
//! model ([`cell`]), Fourier tables and Toeplitz cross-section profiles
//! ([`fourier`]), a dense matrix exponential ([`expm`]), and independent
//! reference computations used by the test suites ([`oracles`]).
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature for embedded or wasm targets.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cell;
pub mod expm;
pub mod fourier;
pub mod mm;
pub mod oracles;
pub mod pwe;
mod quad;

pub use cell::{CellAverages, CellError, CellField, CellGeometry, Material, NestedShape,
               StepProfile, SymmetryFlags};
pub use fourier::{FourierError, FourierTable2D, ProfileSegment, ToeplitzProfile};
pub use mm::{BlockHamiltonian, MmBackend, MmBound, MmError, MmOptions, TransferMatrix};
pub use pwe::{PweError, PweSystem};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;
