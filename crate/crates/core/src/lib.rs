//! Numerical toolkit for one-sided fractional derivatives, fractional
//! Laplacians, maximal operators, and weight-class estimators, with the
//! quadrature machinery they share.

pub mod catalog;
pub mod error;
pub mod fracderiv;
pub mod fraclap;
pub mod function;
pub mod grid;
pub mod maximal;
pub mod mollify;
pub mod norms;
pub mod quad;
pub mod special;
pub mod weight;

pub use catalog::{CatalogEntry, ClosedForm1D, ClosedFormND, DecayClass, Family};
pub use error::{FracError, Result};
pub use function::{SampledFunction1D, SampledFunctionND};
pub use grid::{Grid1D, GridND};
pub use quad::{QuadratureSpec, Substitution};
pub use special::{cns, gamma, FracOrder};
