//! Galerkin-reduced model of a rigid body with a cavity completely filled by a
//! viscous incompressible fluid.
//!
//! The fluid velocity relative to the body is expanded in divergence-free,
//! boundary-vanishing polynomial modes on a ball ([`basis`]); the coupled
//! fluid/body operators are assembled by exact quadrature ([`assembly`]). On
//! top of that the crate integrates the nonlinear dynamics ([`dynamics`]),
//! enumerates and classifies permanent rotations ([`equilibria`]) and computes
//! the spectrum of the linearisation at an equilibrium ([`spectrum`]).
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
// `!(x > 0.0)` style checks are meant to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `num_traits::Float` supplies float methods without std; with std linked the
// inherent methods shadow it.
#![cfg_attr(any(test, feature = "std"), allow(unused_imports))]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assembly;
pub mod basis;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod inertia;
pub mod poly;
pub mod quadrature;
pub mod spectrum;
mod vec3;

pub use assembly::{AssembledOperators, CoupledSystem, EBlocks};
pub use basis::{build_basis, CavitySpec, GalerkinBasis, Mode, ModeKind};
pub use dynamics::{IntegratorConfig, Scheme, State, Trajectory};
pub use equilibria::{Equilibrium, SymmetryCase, Verdict};
pub use error::{Error, Result};
pub use inertia::InertiaSpec;
pub use quadrature::BallQuadrature;
pub use spectrum::{Classification, SpectrumReport};

