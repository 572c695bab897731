//! Regularized extragradient methods for equilibrium problems on flat
//! Hadamard manifolds.
//!
//! The crate provides:
//!
//! * [`manifold`] — distance, exponential/logarithm maps, inner products and
//!   geodesics for the log-metric positive orthant and for Euclidean space;
//! * [`busemann`] — Busemann functions on those manifolds (closed form,
//!   finite-ray approximation, and the ray/log-map pairing identity);
//! * [`equilibrium`] — log-affine bifunctions, the two regularized
//!   resolvents, the proximal step, and sampling-based monotonicity probes;
//! * [`solvers`] — the REMB and REMD extragradient iterations with step
//!   schedules, stopping rules and per-iteration traces;
//! * [`diagnostics`] — runtime validators for Fejér monotonicity, the
//!   per-iteration descent inequality, the strong-pseudomonotone error
//!   bound, and the R-linear envelope.
//!
//! All operations are pure functions over immutable values and are safe to
//! call concurrently.

pub mod busemann;
pub mod diagnostics;
pub mod equilibrium;
pub mod manifold;
pub(crate) mod numeric;
pub mod solvers;

pub use manifold::{GeometryError, ManifoldKind, Point, Tangent};
