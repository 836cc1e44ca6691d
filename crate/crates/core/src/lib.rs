//! Multiple divided differences, box-n-convexity, pseudo-polynomials,
//! integral representations of box-convex functions and the convex-type
//! stochastic orders they induce.

pub mod catalog;
pub mod divdiff;
pub mod error;
pub mod exprfn;
pub mod geometry;
pub mod inequalities;
pub mod io;
pub mod measures;
pub mod orders;
pub mod pseudopoly;
pub mod quadrature;
pub mod represent;
pub mod sampling;

pub use error::{Error, EvalError, Result};
pub use exprfn::{FunctionSpec, RealFunction};
pub use geometry::{AxisSubset, BoxDomain, Interval, MultiIndex, PointSystem, Side};
