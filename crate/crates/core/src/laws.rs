//! Constitutive characterizations of the contact: the rules mapping a left
//! velocity to a reactive impulse and a right velocity.
//!
//! Every law acts on the triple split of the left velocity. Writing `V_S`
//! and `V_B` for the two orthogonal components, the reactive impulse always
//! has the shape
//!
//! ```text
//! I = -(1 + e_S) V_S - lambda V_B
//! ```
//!
//! and the laws differ only in `e_S` and in how `lambda` is selected. The
//! Coulomb laws pick `lambda` piecewise from the dry-friction inequality
//! `|V_B| <= mu_s |V_S|` (norms in the kinetic metric): inside the cone the
//! stick branch takes `lambda = 1`, wiping the tangential component; outside
//! it the slip branch saturates at `lambda = mu |V_S| / |V_B| < 1`, leaving
//! a residual slide along `V_B`. The kinetic-energy change of any such rule
//! is
//!
//! ```text
//! dT = -(1 - e_S^2)/2 |V_S|^2 - (1 - (1 - lambda)^2)/2 |V_B|^2
//! ```
//!
//! which is non-positive and vanishes only for `e_S = 1, lambda = 0`.

use std::fmt;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{
    surface_data, triple_split, zero_velocity_threshold, ContactSurface, GeneralizedState,
    MassMetric, StickConstraint, VelocitySplit,
};
use crate::tol;

/// Constitutive characterization selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContactLaw {
    /// Complete reflection of the surface-orthogonal component.
    Ideal,
    /// Partial restitution of the surface-orthogonal component.
    Restitution { e_s: f64 },
    /// Independent restitution coefficients for both orthogonal components.
    DoubleRestitution { e_s: f64, e_b: f64 },
    /// Dry friction with a single static coefficient.
    CoulombStatic { e_s: f64, mu_s: f64 },
    /// Dry friction with distinct static and dynamic coefficients; the
    /// branch test uses `mu_s`, the slip magnitude uses `mu_d`.
    CoulombDynamic { e_s: f64, mu_s: f64, mu_d: f64 },
}

impl ContactLaw {
    /// Coefficient restituting the surface-orthogonal velocity (1 for the
    /// ideal law).
    pub fn restitution_normal(&self) -> f64 {
        match self {
            ContactLaw::Ideal => 1.0,
            ContactLaw::Restitution { e_s }
            | ContactLaw::DoubleRestitution { e_s, .. }
            | ContactLaw::CoulombStatic { e_s, .. }
            | ContactLaw::CoulombDynamic { e_s, .. } => *e_s,
        }
    }

    /// Validate coefficient ranges. `e_s = 1` is admitted everywhere (it is
    /// the elastic limit of the ideal law).
    pub fn validate(&self) -> Result<()> {
        let check_es = |e_s: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&e_s) {
                return Err(Error::InvalidLaw(format!("e_s = {e_s} outside [0, 1]")));
            }
            Ok(())
        };
        match *self {
            ContactLaw::Ideal => Ok(()),
            ContactLaw::Restitution { e_s } => check_es(e_s),
            ContactLaw::DoubleRestitution { e_s, e_b } => {
                check_es(e_s)?;
                if !(0.0..1.0).contains(&e_b) {
                    return Err(Error::InvalidLaw(format!("e_b = {e_b} outside [0, 1)")));
                }
                Ok(())
            }
            ContactLaw::CoulombStatic { e_s, mu_s } => {
                check_es(e_s)?;
                if !(mu_s >= 0.0) {
                    return Err(Error::InvalidLaw(format!("mu_s = {mu_s} must be >= 0")));
                }
                Ok(())
            }
            ContactLaw::CoulombDynamic { e_s, mu_s, mu_d } => {
                check_es(e_s)?;
                if !(mu_s >= 0.0) {
                    return Err(Error::InvalidLaw(format!("mu_s = {mu_s} must be >= 0")));
                }
                if !(mu_d >= 0.0) {
                    return Err(Error::InvalidLaw(format!("mu_d = {mu_d} must be >= 0")));
                }
                if mu_d > mu_s {
                    return Err(Error::InvalidLaw(format!(
                        "mu_d = {mu_d} exceeds mu_s = {mu_s}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Stick/slip outcome of the Coulomb branch test; the non-breakable laws
/// report `NotApplicable`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Stick,
    Slip,
    NotApplicable,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Stick => write!(f, "stick"),
            Branch::Slip => write!(f, "slip"),
            Branch::NotApplicable => write!(f, "n/a"),
        }
    }
}

/// Resolved impact: impulse, right velocity, branch, the factor multiplying
/// the tangential component in the impulse, and the kinetic-energy change.
#[derive(Debug, Clone)]
pub struct ImpactOutcome {
    pub impulse: DVector<f64>,
    pub right_velocity: DVector<f64>,
    pub branch: Branch,
    /// Coefficient `lambda` multiplying `V_B` in the impulse: 1 on the stick
    /// branch, `mu |V_S| / |V_B| < 1` on the slip branch, 0 for the purely
    /// normal laws, `1 + e_b` for double restitution.
    pub effective_tangential_factor: f64,
    pub delta_energy: f64,
}

/// Reactive impulse of a law applied to a split left velocity.
///
/// Returns the impulse, the selected branch, and the tangential factor
/// `lambda`. The boundary tie `|V_B| = mu_s |V_S|` selects the stick branch.
pub fn reactive_impulse(
    law: &ContactLaw,
    split: &VelocitySplit,
) -> Result<(DVector<f64>, Branch, f64)> {
    let (e_s, lambda, branch) = match *law {
        ContactLaw::Ideal => (1.0, 0.0, Branch::NotApplicable),
        ContactLaw::Restitution { e_s } => (e_s, 0.0, Branch::NotApplicable),
        ContactLaw::DoubleRestitution { e_s, e_b } => (e_s, 1.0 + e_b, Branch::NotApplicable),
        ContactLaw::CoulombStatic { e_s, mu_s } => {
            if split.norm_ortho_b <= mu_s * split.norm_ortho_s {
                (e_s, 1.0, Branch::Stick)
            } else {
                // norm_ortho_b > mu_s * norm_ortho_s >= 0, so the ratio is finite
                (e_s, mu_s * split.norm_ortho_s / split.norm_ortho_b, Branch::Slip)
            }
        }
        ContactLaw::CoulombDynamic { e_s, mu_s, mu_d } => {
            if split.norm_ortho_b <= mu_s * split.norm_ortho_s {
                (e_s, 1.0, Branch::Stick)
            } else {
                (e_s, mu_d * split.norm_ortho_s / split.norm_ortho_b, Branch::Slip)
            }
        }
    };
    let impulse = &split.ortho_s * (-(1.0 + e_s)) + &split.ortho_b * (-lambda);
    Ok((impulse, branch, lambda))
}

/// Kinetic-energy balance of an impulse with normal restitution `e_s` and
/// tangential factor `lambda`:
///
/// ```text
/// dT = -(1 - e_s^2)/2 |V_S|^2 - (1 - (1 - lambda)^2)/2 |V_B|^2
/// ```
///
/// Equals the direct difference `T(qdot_R) - T(qdot_L)`.
pub fn energy_balance(split: &VelocitySplit, e_s: f64, lambda: f64) -> f64 {
    let ns2 = split.norm_ortho_s * split.norm_ortho_s;
    let nb2 = split.norm_ortho_b * split.norm_ortho_b;
    -(1.0 - e_s * e_s) / 2.0 * ns2 - (1.0 - (1.0 - lambda) * (1.0 - lambda)) / 2.0 * nb2
}

/// Tangential restitution coefficient that makes the double-restitution rule
/// reproduce the static Coulomb rule:
///
/// ```text
/// e_b = -1 + min(|V_B|, mu_s |V_S|) / |V_B|
/// ```
///
/// Undefined when `|V_B| = 0`; callers use the stick branch directly there.
pub fn friction_restitution_eb(split: &VelocitySplit, mu_s: f64) -> Result<f64> {
    if split.norm_ortho_b == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(-1.0 + split.norm_ortho_b.min(mu_s * split.norm_ortho_s) / split.norm_ortho_b)
}

/// Resolve a single impact: split the left velocity, apply the law, and
/// assemble the outcome.
///
/// Preconditions: the state lies on the surface (`|s(q)|` within the contact
/// tolerance) and approaches it (`grad . qdot < 0`). Grazing states (no
/// surface-orthogonal velocity) are rejected with [`Error::Grazing`];
/// separating states with [`Error::Separating`].
pub fn resolve_impact(
    metric: &MassMetric,
    surface: &ContactSurface,
    stick: &StickConstraint,
    state: &GeneralizedState,
    law: &ContactLaw,
) -> Result<ImpactOutcome> {
    law.validate()?;
    metric.validate_at(&state.q)?;
    let (s, _, approach) = surface_data(surface, state)?;
    let s_tol = tol::CONTACT_TOL * (1.0 + state.q.amax());
    if s.abs() > s_tol {
        return Err(Error::OffSurface { s, tol: s_tol });
    }
    let split = triple_split(metric, surface, stick, state)?;
    let zero_tol = zero_velocity_threshold(metric, &state.q, &state.qdot)?;
    if split.norm_ortho_s <= zero_tol {
        return Err(Error::Grazing {
            speed: split.norm_ortho_s,
            threshold: zero_tol,
        });
    }
    if approach > 0.0 {
        return Err(Error::Separating { speed: approach });
    }
    outcome_from_split(state, law, split)
}

/// Assemble an outcome from an already-computed split (used by the resolver
/// and by the simulator, which has the split at hand from the settle check).
pub(crate) fn outcome_from_split(
    state: &GeneralizedState,
    law: &ContactLaw,
    split: VelocitySplit,
) -> Result<ImpactOutcome> {
    let (impulse, branch, lambda) = reactive_impulse(law, &split)?;
    let right_velocity = &state.qdot + &impulse;
    let delta_energy = energy_balance(&split, law.restitution_normal(), lambda);
    Ok(ImpactOutcome {
        impulse,
        right_velocity,
        branch,
        effective_tangential_factor: lambda,
        delta_energy,
    })
}
