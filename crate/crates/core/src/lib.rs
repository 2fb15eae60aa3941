//! Conditional large-deviation rate functions on finite-dimensional spaces.
//!
//! Given a model with a closed-form free energy `Ψ(λ₁, λ₂)` for a pair
//! `(X_n, Y_n)`, this crate
//!
//! - conjugates free energies numerically on grids ([`convex`]),
//! - solves the tilt equation `∇₁Ψ(λ₀, 0) = x₀` and builds the conditioning
//!   half-space (or thickened shell) through `x₀` ([`conditional`]),
//! - forms the conditional rate `I_B = I − inf I(B)` on `closure(B)`, the
//!   conditional marginal rate of `Y` and the conditional free energy,
//! - checks the resulting asymptotics against seeded Monte Carlo estimates of
//!   `a_n⁻¹ log P_n(A | B)` ([`empirics`]).

pub mod conditional;
pub mod convex;
pub mod empirics;
pub mod error;
pub mod field;
pub mod grid;
pub mod models;
pub mod reduce;
pub mod rng;
pub mod sets;
pub mod value;

pub use conditional::{ConditionalRate, TiltSolution};
pub use error::{LdpError, Result};
pub use field::ScalarField;
pub use grid::{Axis, Grid};
pub use models::{Draw, JointModel};
pub use sets::{ConditioningSet, Mode, Region};
pub use value::{Extended, LogValue};
