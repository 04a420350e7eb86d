//! Generalized quantum calculus built on the (sigma, tau) divided difference
//!
//! ```text
//! D f(p) = [f(tau(p)) - f(sigma(p))] / theta(tau(p), sigma(p))
//! ```
//!
//! over a tension space, with the D-polynomial bases it generates, a
//! finite-dimensional exact model of right invertible operators, and the
//! corresponding Taylor expansion.
//!
//! Modules:
//! - [`tension`]: points, tension functions, shift maps, frame validation.
//! - [`derivative`]: quantum difference/derivative, presets, Leibniz rule.
//! - [`algebra`]: exact rational matrices, right inverses, initial operators.
//! - [`basis`]: quantum integers, theta/zeta/Lambda bases, degree detection.
//! - [`taylor`]: orbit-lattice right inverses and the Taylor expansion.

pub mod algebra;
pub mod basis;
pub mod config;
pub mod derivative;
pub mod error;
pub mod polynomial;
pub mod scalar;
pub mod taylor;
pub mod tension;

pub use derivative::{make_preset, qderiv, qderiv_iter, qdiff, FrameKind, ScalarFn};
pub use error::{QcalcError, Result};
pub use polynomial::Polynomial;
pub use scalar::{parse_rational, Rational, Scalar};
pub use tension::{Direction, QuantumFrame, ShiftMap, TensionFn};
