//! Structured Hilbert-space operators and their power sequences.
//!
//! * [`opcore`]: operator expressions, exact or precision-controlled actions,
//!   adjoints and matrix elements of powers.
//! * [`shiftlab`]: weighted-shift weight rules (inflation, 2-isometry,
//!   Berger, monotone) with exact power norms.
//! * [`powerdyn`]: convergence classification, limit projections, kernels,
//!   identity-part splits, numerical radius.
//! * [`circlemeasure`]: decomposed circle measures, Fourier coefficients,
//!   Rajchman tests and unitary verdicts.
//! * [`semispectral`]: spectral data of normal matrices and stability
//!   criteria.
//! * [`suites`]: randomized property suites shared by the CLI and tests.
//!
//! The algebra is generic over the real field: [`OperatorF64`],
//! [`OperatorExt`] (double-double) and [`OperatorQ`] (exact rationals).

pub mod circlemeasure;
pub mod error;
pub mod linalg;
pub mod opcore;
pub mod powerdyn;
pub mod random;
pub mod scalar;
pub mod semispectral;
pub mod shiftlab;
pub mod suites;

pub use error::{Error, Result};
pub use scalar::{PosReal, Rat, Scalar};

pub type OperatorF64 = opcore::OperatorExpr<f64>;
pub type OperatorF32 = opcore::OperatorExpr<f32>;
pub type OperatorExt = opcore::OperatorExpr<twofloat::TwoFloat>;
pub type OperatorQ = opcore::OperatorExpr<num_rational::BigRational>;
pub type VectorF64 = opcore::Vector<f64>;
pub type VectorQ = opcore::Vector<num_rational::BigRational>;
