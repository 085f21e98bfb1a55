//! Seeded random generators shared by the integration suites.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use percuss_core::geometry::{ContactSurface, GeneralizedState, MassMetric, StickConstraint};
use percuss_core::laws::ContactLaw;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Well-conditioned random SPD matrix: A^T A plus a positive shift.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let shift: f64 = rng.gen_range(0.3..1.0);
    a.transpose() * a + DMatrix::identity(n, n) * shift
}

/// Random surface row with norm bounded away from zero.
pub fn random_surface_row(rng: &mut ChaCha8Rng, n: usize) -> RowDVector<f64> {
    loop {
        let row = RowDVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        if row.norm() > 0.5 {
            return row;
        }
    }
}

/// Random stick rows whose stack with the surface gradient keeps full rank
/// with a comfortable margin.
pub fn random_stick_rows(
    rng: &mut ChaCha8Rng,
    k: usize,
    grad: &RowDVector<f64>,
) -> DMatrix<f64> {
    let n = grad.len();
    loop {
        let rows = DMatrix::from_fn(k, n, |_, _| rng.gen_range(-1.0..1.0));
        let mut stacked = DMatrix::zeros(k + 1, n);
        stacked.row_mut(0).copy_from(grad);
        stacked.view_mut((1, 0), (k, n)).copy_from(&rows);
        let svd = stacked.svd(false, false);
        let max_sv = svd.singular_values.max();
        let min_sv = svd.singular_values.min();
        if min_sv > 1e-2 * max_sv {
            return rows;
        }
    }
}

/// A random constrained system: SPD metric, linear surface through the
/// origin, and stick rows. The origin is an on-surface configuration.
pub struct RandomSystem {
    pub metric: MassMetric,
    pub g: DMatrix<f64>,
    pub grad: RowDVector<f64>,
    pub surface: ContactSurface,
    pub stick_rows: DMatrix<f64>,
    pub stick: StickConstraint,
}

pub fn random_system(rng: &mut ChaCha8Rng, n: usize) -> RandomSystem {
    let g = random_spd(rng, n);
    let grad = random_surface_row(rng, n);
    let k = rng.gen_range(1..n);
    let stick_rows = random_stick_rows(rng, k, &grad);
    RandomSystem {
        metric: MassMetric::constant(g.clone()).unwrap(),
        g,
        grad: grad.clone(),
        surface: ContactSurface::linear(grad, 0.0).unwrap(),
        stick_rows: stick_rows.clone(),
        stick: StickConstraint::constant(stick_rows).unwrap(),
    }
}

/// Random on-surface state approaching the surface (grad . qdot < 0 with a
/// margin, so it is never grazing).
pub fn random_impact_state(rng: &mut ChaCha8Rng, sys: &RandomSystem) -> GeneralizedState {
    let n = sys.g.nrows();
    loop {
        let mut qdot = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
        let approach = (&sys.grad * &qdot)[(0, 0)];
        if approach.abs() < 0.1 {
            continue;
        }
        if approach > 0.0 {
            qdot = -qdot;
        }
        return GeneralizedState::new(0.0, DVector::zeros(n), qdot).unwrap();
    }
}

/// Cycle through all five laws with random admissible coefficients.
pub fn random_law(rng: &mut ChaCha8Rng, index: usize) -> ContactLaw {
    match index % 5 {
        0 => ContactLaw::Ideal,
        1 => ContactLaw::Restitution {
            e_s: rng.gen_range(0.0..1.0),
        },
        2 => ContactLaw::DoubleRestitution {
            e_s: rng.gen_range(0.0..1.0),
            e_b: rng.gen_range(0.0..1.0),
        },
        3 => ContactLaw::CoulombStatic {
            e_s: rng.gen_range(0.0..1.0),
            mu_s: rng.gen_range(0.0..2.0),
        },
        _ => {
            let mu_s = rng.gen_range(0.0..2.0);
            ContactLaw::CoulombDynamic {
                e_s: rng.gen_range(0.0..1.0),
                mu_s,
                mu_d: rng.gen_range(0.0..=mu_s),
            }
        }
    }
}

/// Relative closeness helper: |a - b| <= tol * (1 + |b|).
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

/// Vector closeness in the same scale-aware sense.
pub fn vec_close(a: &DVector<f64>, b: &DVector<f64>, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}
