//! Impulsive mechanics of holonomic systems in generalized coordinates.
//!
//! The crate resolves single-point frictional impacts of a mechanical system
//! against a unilateral constraint. The mass matrix is treated as a metric
//! on velocity space; a left velocity is split into a surface-orthogonal
//! part, a tangential part orthogonal to the stick conditions of the contact
//! point, and a remainder satisfying both. Constitutive laws (ideal,
//! restitution, double restitution, static and dynamic Coulomb friction)
//! map that split to a reactive impulse with natural stick/slip branching,
//! and an event-driven simulator chains impacts along free-flight arcs.
//!
//! Modules:
//!
//! - [`dsl`] — scalar expression language for user-defined metrics,
//!   surfaces, and stick rows, with symbolic derivatives.
//! - [`geometry`] — configuration-space data model and the metric-weighted
//!   projections, plus an independent KKT projection oracle.
//! - [`laws`] — the constitutive characterizations and the energy balance.
//! - [`models`] — builtin point/disk/rod models with hard-coded analytic
//!   split and outcome formulas used as oracles.
//! - [`sim`] — free flight, impact detection, event-driven runs, and
//!   parameter sweeps.
//!
//! A sliding particle striking a rough floor:
//!
//! ```
//! use nalgebra::DVector;
//! use percuss_core::geometry::GeneralizedState;
//! use percuss_core::laws::{Branch, ContactLaw};
//! use percuss_core::models::build_point;
//!
//! # fn main() -> percuss_core::Result<()> {
//! let point = build_point(1.0)?;
//! let state = GeneralizedState::new(
//!     0.0,
//!     DVector::from_row_slice(&[0.0, 0.0]),
//!     DVector::from_row_slice(&[1.0, -1.0]),
//! )?;
//! let law = ContactLaw::CoulombStatic { e_s: 0.5, mu_s: 0.5 };
//! let outcome = point.resolve(&state, &law)?;
//! assert_eq!(outcome.branch, Branch::Slip);
//! assert!((outcome.right_velocity[0] - 0.5).abs() < 1e-12);
//! assert!((outcome.right_velocity[1] - 0.5).abs() < 1e-12);
//! assert!(outcome.delta_energy < 0.0);
//! # Ok(())
//! # }
//! ```

pub mod dsl;
pub mod error;
pub mod geometry;
pub mod laws;
pub mod models;
pub mod sim;
pub mod tol;

pub use error::{Error, Result};
