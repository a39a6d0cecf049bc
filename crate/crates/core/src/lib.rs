//! Stability analysis and simulation of complex-valued fractional-order
//! Hopfield networks.
//!
//! The crate covers the whole pipeline from a network description to a
//! stability verdict:
//!
//! * [`model`] holds the network description, topology detection and the
//!   equivalent real system of twice the dimension.
//! * [`activation`] evaluates the complex activations together with their
//!   real Jacobians and complex derivatives.
//! * [`equilibrium`] finds steady states with Newton's method.
//! * [`spectral`] assembles the complex Jacobian, computes its spectrum and
//!   applies the argument criterion for Caputo systems of order `q`.
//! * [`hub`] and [`ring`] give closed-form critical orders for hub and ring
//!   connectivity.
//! * [`sim`] integrates trajectories with the fractional
//!   Adams-Bashforth-Moulton scheme.
//! * [`mittag_leffler`] evaluates `E_q(x)` by series for checking the
//!   integrator.
//! * [`cli`] binds everything to the `frac-hopfield` command line tool.

pub mod activation;
pub mod angle;
pub mod cli;
pub mod eigen;
pub mod equilibrium;
pub mod error;
pub mod hub;
pub mod mittag_leffler;
pub mod model;
pub mod ring;
pub mod sim;
pub mod spectral;

pub use num_complex::Complex64;

pub use activation::{Activation, RealJacobian2x2};
pub use equilibrium::EquilibriumState;
pub use error::{Error, Result};
pub use model::{NetworkSpec, RealSplitSystem, TopologyTag};
pub use spectral::{SpectrumReport, Verdict};
