//! Numerical thresholds used across the crate.
//!
//! Every tolerance is defined here with a short note on where it applies,
//! so no module carries its own ad-hoc magic numbers.

/// Relative tolerance for comparing a closed-form projection against an
/// independently computed reference (KKT solve or hard-coded model formula).
///
/// Both routes are direct dense solves on well-conditioned systems, so the
/// disagreement is a handful of ulps; 1e-9 leaves ample headroom.
pub const ORACLE_REL: f64 = 1e-9;

/// Relative tolerance for consistency identities evaluated along a single
/// code path (split reconstruction, Pythagoras, energy balance vs direct
/// kinetic-energy difference).
pub const IDENTITY_REL: f64 = 1e-9;

/// Scale-aware threshold under which a velocity component counts as zero:
/// a vector `v` is "zero" when its kinetic-metric norm is below
/// `ZERO_VEL_REL * (1 + |qdot|_G)`.
pub const ZERO_VEL_REL: f64 = 1e-12;

/// A symmetric factorization reports numerical rank deficiency when the
/// smallest pivot falls below this fraction of the largest pivot.
pub const PIVOT_RATIO_MIN: f64 = 1e-12;

/// A state counts as lying on the contact surface when
/// `|s(q)| <= CONTACT_TOL * (1 + |q|_inf)`.
///
/// Two orders looser than the impact-detection residual bound, so states
/// produced by the detector always qualify.
pub const CONTACT_TOL: f64 = 1e-8;

/// Impact detection bisects the crossing time down to `DETECT_TIME_REL * dt`.
pub const DETECT_TIME_REL: f64 = 1e-12;

/// Residual bound on the surface value at a detected impact:
/// `|s(q)| <= DETECT_RESIDUAL * (1 + |q|_inf)`.
pub const DETECT_RESIDUAL: f64 = 1e-10;

/// Relative step for central finite differences when checking symbolic
/// derivatives and surface gradients: `h = FD_STEP_REL * (1 + |x|)`.
pub const FD_STEP_REL: f64 = 1e-6;

/// Relative tolerance for a symbolic derivative against its central
/// finite-difference estimate (truncation O(h^2) plus cancellation both
/// land near 1e-8 for the step above; 1e-6 is conservative).
pub const FD_CHECK_REL: f64 = 1e-6;

/// Default settle speed (kinetic-metric norm of the surface-orthogonal
/// velocity) under which an impact chain is declared settled.
pub const DEFAULT_SETTLE_SPEED: f64 = 1e-6;

/// Number of subintervals scanned for the earliest sign change before
/// bisecting within one integration step.
pub const DETECT_SUBDIVISIONS: usize = 8;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_ordered() {
        assert!(ZERO_VEL_REL < DEFAULT_SETTLE_SPEED);
        assert!(DETECT_RESIDUAL < CONTACT_TOL);
        assert!(ORACLE_REL <= FD_CHECK_REL);
    }
}
