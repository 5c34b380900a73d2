//! Two-sided numerical estimates of invariant metrics near boundary points of
//! smoothly bounded convex domains in `C^n`.
//!
//! Lower bounds come from explicit plurisubharmonic candidates whose Levi form
//! at the base point bounds the Sibony metric from below; upper bounds come
//! from analytic discs that certify the Kobayashi metric from above. On convex
//! domains both metrics agree, so the pair sandwiches a single quantity
//! `F(P_delta, xi)`, whose blow-up rate as `P_delta = P - delta * nu` approaches
//! the boundary is `|xi| / delta^(1/m)` in complex-tangential directions of line
//! type `m` and `1 / delta` in the normal direction.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`domain`] | defining functions, corpus domains, boundary frames |
//! | [`line`] | boundary radii along complex lines, line type, gradient law |
//! | [`sibony`] | plurisubharmonic candidates and Sibony lower bounds |
//! | [`disc`] | analytic-disc upper bounds and closed-form oracles |
//! | [`psh`] | sampled plurisubharmonicity and admissibility checks |
//! | [`scaling`] | delta sweeps, exponent fits, sandwich constants, reports |

pub mod corpus;
pub mod cvec;
pub mod disc;
pub mod domain;
pub mod error;
pub mod line;
pub mod polynomial;
pub mod psh;
pub mod regression;
pub mod sampling;
pub mod scaling;
pub mod sibony;

pub use cvec::{CMatrix, CVector, C64};
pub use domain::{BoundaryFrame, ComplexDirection, ConvexDomain, DefiningFunction};
pub use error::{MetricError, Result};
