//! Numerical verification lab for sharp log-Sobolev, hypercontractivity, and
//! isoperimetric inequalities on weighted model cones.
//!
//! The crate models the radial geometry of cones ([`spaces`]), provides
//! weighted quadrature and Sobolev-type functionals ([`calculus`]), decreasing
//! rearrangement ([`rearrange`]), the discrete Hopf-Lax transform
//! ([`hopf_lax`]), and end-to-end inequality verifiers with sharpness sweeps
//! ([`inequalities`]).

pub mod calculus;
pub mod constants;
pub mod error;
pub mod hopf_lax;
pub mod inequalities;
pub mod rearrange;
pub mod report;
pub mod spaces;

pub use error::{Error, Result};
