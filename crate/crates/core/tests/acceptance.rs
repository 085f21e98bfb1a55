//! Acceptance suite: one test per shipped criterion, each printing a
//! PASS line with the measured worst case. Run with
//! `cargo test -p percuss-core --test acceptance -- --nocapture` to see the
//! per-criterion report.

mod common;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use common::*;
use percuss_core::geometry::{
    kinetic_energy, project_ortho_b, project_ortho_s, projection_oracle, triple_split,
    GeneralizedState,
};
use percuss_core::laws::{resolve_impact, Branch, ContactLaw};
use percuss_core::models::{
    build_disk, build_point, build_rod, disk_outcome_oracle, rod_rebound_threshold,
};
use percuss_core::sim::{
    run_simulation, sweep, RunOutcome, ScalarSpec, ScenarioConfig, ScenarioTemplate, SimParams,
};

fn pass(id: u32, detail: &str) {
    println!("acceptance {id:02} PASS: {detail}");
}

fn point_state(qdot: &[f64]) -> GeneralizedState {
    GeneralizedState::new(
        0.0,
        DVector::from_row_slice(&[0.0, 0.0]),
        DVector::from_row_slice(qdot),
    )
    .unwrap()
}

/// Criterion 1: the worked point example, both branches, against direct
/// substitution into the piecewise closed form. Tolerance 1e-12.
#[test]
fn criterion_01_point_worked_example() {
    let model = build_point(1.0).unwrap();
    let (e_s, mu_s) = (0.5, 0.5);
    let law = ContactLaw::CoulombStatic { e_s, mu_s };

    // independent piecewise formula for the point
    let oracle = |xd: f64, yd: f64| -> (DVector<f64>, Branch) {
        if xd.abs() <= mu_s * yd.abs() {
            (DVector::from_row_slice(&[0.0, -e_s * yd]), Branch::Stick)
        } else {
            (
                DVector::from_row_slice(&[(1.0 - mu_s * yd.abs() / xd.abs()) * xd, -e_s * yd]),
                Branch::Slip,
            )
        }
    };

    let mut worst = 0.0_f64;
    for (qdot, want_branch, want_qr) in [
        ([1.0, -1.0], Branch::Slip, [0.5, 0.5]),
        ([0.4, -1.0], Branch::Stick, [0.0, 0.5]),
    ] {
        let out = model.resolve(&point_state(&qdot), &law).unwrap();
        assert_eq!(out.branch, want_branch);
        let (qr_oracle, branch_oracle) = oracle(qdot[0], qdot[1]);
        assert_eq!(out.branch, branch_oracle);
        for i in 0..2 {
            let dev = (out.right_velocity[i] - want_qr[i])
                .abs()
                .max((out.right_velocity[i] - qr_oracle[i]).abs());
            worst = worst.max(dev);
            assert!(dev <= 1e-12, "component {i}: deviation {dev}");
        }
    }
    pass(1, &format!("point slip/stick right velocities, worst deviation {worst:.2e}"));
}

/// Criterion 2: 1000 random disks against the transcribed per-branch right
/// velocities, 1e-9 relative; branch matches the closed-form inequality.
#[test]
fn criterion_02_disk_oracle_sweep() {
    let mut rng = rng(2);
    let mut worst = 0.0_f64;
    for case in 0..1000 {
        let m = rand::Rng::gen_range(&mut rng, 0.2..3.0);
        let r = rand::Rng::gen_range(&mut rng, 0.2..3.0);
        let a = rand::Rng::gen_range(&mut rng, 0.05..3.0);
        let e_s = rand::Rng::gen_range(&mut rng, 0.0..1.0);
        let mu_s = rand::Rng::gen_range(&mut rng, 0.0..2.0);
        let qdot = DVector::from_row_slice(&[
            rand::Rng::gen_range(&mut rng, -3.0..3.0),
            -rand::Rng::gen_range(&mut rng, 0.05..3.0),
            rand::Rng::gen_range(&mut rng, -3.0..3.0),
        ]);
        let model = build_disk(m, r, a).unwrap();
        let state = GeneralizedState::new(
            0.0,
            DVector::from_row_slice(&[0.0, r, 0.0]),
            qdot.clone(),
        )
        .unwrap();
        let law = ContactLaw::CoulombStatic { e_s, mu_s };
        let out = model.resolve(&state, &law).unwrap();
        let (qr_oracle, branch_oracle) = disk_outcome_oracle(m, r, a, e_s, mu_s, &qdot);
        assert_eq!(out.branch, branch_oracle, "case {case}");
        let dev = (&out.right_velocity - &qr_oracle).norm() / (1.0 + qr_oracle.norm());
        worst = worst.max(dev);
        assert!(dev <= 1e-9, "case {case}: deviation {dev}");
    }
    pass(2, &format!("1000 random disks vs closed forms, worst relative deviation {worst:.2e}"));
}

/// Criterion 3: the disk's three qualitative regimes over parameter grids.
#[test]
fn criterion_03_disk_qualitative_cases() {
    let mut checked = 0;
    for m in [0.5, 1.0, 2.0] {
        for r in [0.5, 1.0, 2.0] {
            for a in [0.2 * m * r * r, 0.5 * m * r * r, m * r * r] {
                for e_s in [0.0, 0.5, 0.9] {
                    for mu_s in [0.1, 0.5, 1.0, 2.0] {
                        let model = build_disk(m, r, a).unwrap();
                        let law = ContactLaw::CoulombStatic { e_s, mu_s };
                        let resolve = |qdot: [f64; 3]| {
                            let state = GeneralizedState::new(
                                0.0,
                                DVector::from_row_slice(&[0.0, r, 0.0]),
                                DVector::from_row_slice(&qdot),
                            )
                            .unwrap();
                            model.resolve(&state, &law).unwrap()
                        };

                        // (a) rolling contact: only the normal component reacts
                        for td in [-2.0, 1.0] {
                            let out = resolve([r * td, -1.0, td]);
                            assert!((out.right_velocity[0] - r * td).abs() <= 1e-12 * (1.0 + r * td.abs()));
                            assert!((out.right_velocity[2] - td).abs() <= 1e-12 * (1.0 + td.abs()));
                            assert!((out.right_velocity[1] - e_s).abs() <= 1e-12);
                        }

                        // (b) pure spin: forward push, damped rotation
                        let td = 2.0;
                        let out = resolve([0.0, -1.0, td]);
                        assert!(out.right_velocity[0] > 0.0, "m={m} r={r} a={a} mu={mu_s}");
                        assert!(out.right_velocity[2].abs() < td);

                        // (c) pure sliding: braked translation, forward spin
                        let xd = 1.5;
                        let out = resolve([xd, -1.0, 0.0]);
                        assert!(out.right_velocity[0] < xd);
                        assert!(out.right_velocity[2] > 0.0);

                        checked += 1;
                    }
                }
            }
        }
    }
    pass(3, &format!("disk qualitative regimes over {checked} parameter combinations"));
}

/// Criterion 4: the vertical rod rebounds vertically for every mu_s, to
/// 1e-12.
#[test]
fn criterion_04_rod_vertical_rebound() {
    let model = build_rod(1.0, 1.0, 1.0 / 3.0).unwrap();
    let th = std::f64::consts::FRAC_PI_2;
    let mut worst = 0.0_f64;
    for e_s in [0.0, 0.5, 1.0] {
        for mu_s in [0.0, 0.3, 1.0, 10.0] {
            for yd in [-1.0, -4.0] {
                let state = GeneralizedState::new(
                    0.0,
                    DVector::from_row_slice(&[0.0, 1.0, th]),
                    DVector::from_row_slice(&[0.0, yd, 0.0]),
                )
                .unwrap();
                let law = ContactLaw::CoulombStatic { e_s, mu_s };
                let out = model.resolve(&state, &law).unwrap();
                let dev = (out.right_velocity[0].abs())
                    .max((out.right_velocity[1] + e_s * yd).abs())
                    .max(out.right_velocity[2].abs());
                worst = worst.max(dev);
                assert!(dev <= 1e-12, "e_s={e_s} mu_s={mu_s} yd={yd}: deviation {dev}");
            }
        }
    }
    pass(4, &format!("vertical rod rebound across mu_s grid, worst deviation {worst:.2e}"));
}

/// Criterion 5: the rod rebound threshold. A 10^4-angle sweep brackets both
/// vertical-velocity sign flips within one grid step of the analytic
/// threshold angles.
#[test]
fn criterion_05_rod_rebound_threshold_sweep() {
    let (m, l, a, e_s) = (1.0, 1.0, 1.0 / 3.0, 0.5);
    let threshold = rod_rebound_threshold(m, l, a, e_s);
    assert!((threshold - 1.0 / 3.0).abs() <= 1e-15);
    let th_star = threshold.sqrt().acos();

    let template = ScenarioTemplate {
        model: build_rod(m, l, a).unwrap(),
        law: ContactLaw::CoulombStatic { e_s, mu_s: 1.0 },
        params: [("th0".to_string(), std::f64::consts::FRAC_PI_2)]
            .into_iter()
            .collect(),
        initial_time: 0.0,
        initial_q: vec![
            ScalarSpec::Number(0.0),
            ScalarSpec::Expr(percuss_core::dsl::parse("L*sin(th0)").unwrap()),
            ScalarSpec::Expr(percuss_core::dsl::parse("th0").unwrap()),
        ],
        initial_qdot: vec![
            ScalarSpec::Number(0.0),
            ScalarSpec::Number(-1.0),
            ScalarSpec::Number(0.0),
        ],
        force: DVector::from_row_slice(&[0.0, -10.0, 0.0]),
        sim: SimParams {
            t_end: 1.0,
            step: 1e-3,
            max_impacts: 8,
            settle_speed: 1e-6,
        },
    };

    let count = 10_000;
    let (lo, hi) = (0.2, std::f64::consts::PI - 0.2);
    let grid_step = (hi - lo) / (count as f64 - 1.0);
    let values: Vec<f64> = (0..count).map(|i| lo + grid_step * i as f64).collect();
    let rows = sweep(&template, "th0", &values).unwrap();
    assert_eq!(rows.len(), count);
    assert!(rows.iter().all(|row| row.branch == Branch::Stick));

    let flips: Vec<(f64, f64)> = rows
        .windows(2)
        .filter(|w| (w[0].right_velocity[1] > 0.0) != (w[1].right_velocity[1] > 0.0))
        .map(|w| (w[0].value, w[1].value))
        .collect();
    assert_eq!(flips.len(), 2, "expected two sign flips, got {flips:?}");
    let expected = [th_star, std::f64::consts::PI - th_star];
    for ((lo_v, hi_v), target) in flips.iter().zip(expected) {
        assert!(
            *lo_v <= target && target <= *hi_v,
            "flip ({lo_v}, {hi_v}) does not bracket {target}"
        );
        assert!(hi_v - lo_v <= grid_step * (1.0 + 1e-9));
    }
    pass(5, &format!(
        "rebound sign flips bracket th* = {th_star:.6} and pi - th* within one grid step of {grid_step:.2e}"
    ));
}

/// Criterion 6: rod branch selection is invariant under scaling the fall
/// speed, over 100 random inclination/friction pairs.
#[test]
fn criterion_06_rod_branch_velocity_independence() {
    let mut rng = rng(6);
    let model = build_rod(1.0, 1.0, 1.0 / 3.0).unwrap();
    let mut sticks = 0;
    let mut slips = 0;
    for case in 0..100 {
        let th: f64 = rand::Rng::gen_range(&mut rng, 0.1..std::f64::consts::PI - 0.1);
        let mu_s = rand::Rng::gen_range(&mut rng, 0.0..1.5);
        let law = ContactLaw::CoulombStatic { e_s: 0.5, mu_s };
        let q = DVector::from_row_slice(&[0.0, th.sin(), th]);
        let branch_at = |yd: f64| {
            let state =
                GeneralizedState::new(0.0, q.clone(), DVector::from_row_slice(&[0.0, yd, 0.0]))
                    .unwrap();
            model.resolve(&state, &law).unwrap().branch
        };
        let reference = branch_at(-1.0);
        match reference {
            Branch::Stick => sticks += 1,
            Branch::Slip => slips += 1,
            Branch::NotApplicable => unreachable!(),
        }
        for alpha in [0.01, 1.0, 100.0] {
            assert_eq!(branch_at(-alpha), reference, "case {case}: th={th} mu_s={mu_s}");
        }
    }
    assert!(sticks > 10 && slips > 10, "both branches must occur: {sticks}/{slips}");
    pass(6, &format!(
        "branch unchanged under fall-speed scaling (100 cases: {sticks} stick, {slips} slip)"
    ));
}

/// Criterion 7: energy identity over 1000 random impacts of all laws; the
/// identity matches the direct kinetic-energy difference, the change is
/// never positive, and it vanishes exactly in the elastic limit.
#[test]
fn criterion_07_energy_identity() {
    let mut rng = rng(7);
    let mut worst = 0.0_f64;
    for case in 0..1000 {
        let n = 2 + case % 5;
        let sys = random_system(&mut rng, n);
        let state = random_impact_state(&mut rng, &sys);
        let law = random_law(&mut rng, case);
        let out = resolve_impact(&sys.metric, &sys.surface, &sys.stick, &state, &law).unwrap();

        let t_l = kinetic_energy(&sys.metric, &state.q, &state.qdot).unwrap();
        let t_r = kinetic_energy(&sys.metric, &state.q, &out.right_velocity).unwrap();
        let direct = t_r - t_l;
        let dev = (direct - out.delta_energy).abs() / (1.0 + out.delta_energy.abs());
        worst = worst.max(dev);
        assert!(dev <= 1e-9, "case {case}: {direct} vs {}", out.delta_energy);

        // never an energy gain
        assert!(out.delta_energy <= 0.0, "case {case}");
        assert!(direct <= 1e-12 * (1.0 + t_l.abs()), "case {case}");

        // strict dissipation away from the elastic limit
        let split = triple_split(&sys.metric, &sys.surface, &sys.stick, &state).unwrap();
        if law.restitution_normal() < 1.0 && split.norm_ortho_s > 1e-9 {
            assert!(out.delta_energy < 0.0, "case {case}");
        }
        // the ideal law conserves energy exactly
        if matches!(law, ContactLaw::Ideal) {
            assert_eq!(out.delta_energy, 0.0, "case {case}");
        }
    }
    pass(7, &format!(
        "energy identity vs direct difference over 1000 impacts, worst relative deviation {worst:.2e}"
    ));
}

/// Criterion 8: closed-form projectors against the KKT least-squares oracle
/// over 1000 random instances, 1e-9 relative.
#[test]
fn criterion_08_projector_oracle_equivalence() {
    let mut rng = rng(8);
    let mut worst = 0.0_f64;
    for case in 0..1000 {
        let n = 2 + case % 5;
        let sys = random_system(&mut rng, n);
        let state = random_impact_state(&mut rng, &sys);

        let grad_rows = DMatrix::from_rows(std::slice::from_ref(&sys.grad));
        let w_s = projection_oracle(&sys.g, &grad_rows, &state.qdot).unwrap();
        let v_s_oracle = &state.qdot - &w_s;
        let v_s = project_ortho_s(&sys.metric, &sys.surface, &state).unwrap();
        let dev_s = (&v_s - &v_s_oracle).norm() / (1.0 + v_s_oracle.norm());

        let k = sys.stick_rows.nrows();
        let mut stacked = DMatrix::zeros(k + 1, n);
        stacked.row_mut(0).copy_from(&sys.grad);
        stacked.view_mut((1, 0), (k, n)).copy_from(&sys.stick_rows);
        let w_sb = projection_oracle(&sys.g, &stacked, &state.qdot).unwrap();
        let v_b_oracle = &w_s - &w_sb;
        let v_b = project_ortho_b(&sys.metric, &sys.surface, &sys.stick, &state).unwrap();
        let dev_b = (&v_b - &v_b_oracle).norm() / (1.0 + v_b_oracle.norm());

        // the parallel part is the fully constrained argmin
        let split = triple_split(&sys.metric, &sys.surface, &sys.stick, &state).unwrap();
        let dev_p = (&split.parallel_b - &w_sb).norm() / (1.0 + w_sb.norm());

        worst = worst.max(dev_s).max(dev_b).max(dev_p);
        assert!(dev_s <= 1e-9 && dev_b <= 1e-9 && dev_p <= 1e-9, "case {case}");
    }
    pass(8, &format!(
        "closed-form projectors vs KKT oracle over 1000 instances, worst relative deviation {worst:.2e}"
    ));
}

/// Criterion 9: frictionless Coulomb reduces to plain restitution, 1e-12
/// over 500 random impacts.
#[test]
fn criterion_09_zero_friction_reduction() {
    let mut rng = rng(9);
    let mut worst = 0.0_f64;
    for case in 0..500 {
        let n = 2 + case % 5;
        let sys = random_system(&mut rng, n);
        let state = random_impact_state(&mut rng, &sys);
        let e_s = rand::Rng::gen_range(&mut rng, 0.0..1.0);
        let coulomb = resolve_impact(
            &sys.metric,
            &sys.surface,
            &sys.stick,
            &state,
            &ContactLaw::CoulombStatic { e_s, mu_s: 0.0 },
        )
        .unwrap();
        let plain = resolve_impact(
            &sys.metric,
            &sys.surface,
            &sys.stick,
            &state,
            &ContactLaw::Restitution { e_s },
        )
        .unwrap();
        let dev = (&coulomb.right_velocity - &plain.right_velocity).norm()
            / (1.0 + plain.right_velocity.norm());
        worst = worst.max(dev);
        assert!(dev <= 1e-12, "case {case}: deviation {dev}");
    }
    pass(9, &format!(
        "CoulombStatic(e_s, 0) equals Restitution(e_s) over 500 impacts, worst deviation {worst:.2e}"
    ));
}

/// Criterion 10: both Coulomb branch formulas agree at the cone boundary,
/// 1e-9 over 200 random boundary instances.
#[test]
fn criterion_10_cone_boundary_continuity() {
    let mut rng = rng(10);
    let mut worst = 0.0_f64;
    let mut tested = 0;
    while tested < 200 {
        let n = 2 + tested % 5;
        let sys = random_system(&mut rng, n);
        let state = random_impact_state(&mut rng, &sys);
        let split = triple_split(&sys.metric, &sys.surface, &sys.stick, &state).unwrap();
        if split.norm_ortho_b < 1e-2 || split.norm_ortho_s < 1e-2 {
            continue;
        }
        tested += 1;
        let e_s = rand::Rng::gen_range(&mut rng, 0.0..1.0);
        // friction coefficient putting this impact exactly on the boundary
        let mu_s = split.norm_ortho_b / split.norm_ortho_s;
        let stick_qr = &split.parallel_b - &split.ortho_s * e_s;
        let lambda = mu_s * split.norm_ortho_s / split.norm_ortho_b;
        let slip_qr = &stick_qr + &split.ortho_b * (1.0 - lambda);
        let dev = (&slip_qr - &stick_qr).norm() / (1.0 + stick_qr.norm());
        worst = worst.max(dev);
        assert!(dev <= 1e-9, "deviation {dev}");
    }
    pass(10, &format!(
        "stick and slip formulas agree at the cone boundary, worst relative deviation {worst:.2e}"
    ));
}

/// Criterion 11: the bouncing point reproduces the geometric rebound series
/// and settles under the Zeno guard.
#[test]
fn criterion_11_bounce_series_and_settling() {
    let (h, g, e_s) = (1.0, 10.0, 0.5);
    let config = ScenarioConfig {
        model: build_point(1.0).unwrap(),
        law: ContactLaw::CoulombStatic { e_s, mu_s: 0.0 },
        initial: GeneralizedState::new(
            0.0,
            DVector::from_row_slice(&[0.0, h]),
            DVector::from_row_slice(&[0.0, 0.0]),
        )
        .unwrap(),
        force: DVector::from_row_slice(&[0.0, -g]),
        sim: SimParams {
            t_end: 3.0,
            step: 1e-3,
            max_impacts: 128,
            settle_speed: 1e-6,
        },
    };
    let traj = run_simulation(&config).unwrap();
    assert!(
        matches!(traj.outcome, RunOutcome::Settled { .. }),
        "outcome {:?}",
        traj.outcome
    );
    assert!(traj.events.len() >= 5);
    let mut worst = 0.0_f64;
    for (k, ev) in traj.events.iter().take(5).enumerate() {
        let apex = ev.post_qdot[1] * ev.post_qdot[1] / (2.0 * g);
        let expected = h * e_s.powi(2 * (k as i32 + 1));
        let dev = (apex - expected).abs() / expected;
        worst = worst.max(dev);
        assert!(dev <= 1e-6, "bounce {k}: apex {apex} vs {expected}");
    }
    pass(11, &format!(
        "five rebound apexes match h e^(2k) (worst relative deviation {worst:.2e}), run settled after {} impacts",
        traj.events.len()
    ));
}

/// Criterion 12 (library half): surface gradients of the builtin models and
/// of a configuration-dependent custom system match central finite
/// differences to 1e-6 relative. The CLI half drives `check` over the
/// shipped scenario files.
#[test]
fn criterion_12_gradient_finite_difference_checks() {
    let mut rng = rng(12);
    let mut worst = 0.0_f64;

    let mut check_surface = |surface: &percuss_core::geometry::ContactSurface,
                             samples: &[DVector<f64>]| {
        for q in samples {
            let grad = surface.gradient(q).unwrap();
            let scale = 1.0 + grad.amax();
            for i in 0..q.len() {
                let h = 1e-6 * (1.0 + q[i].abs());
                let mut qp = q.clone();
                qp[i] += h;
                let mut qm = q.clone();
                qm[i] -= h;
                let fd = (surface.value(&qp).unwrap() - surface.value(&qm).unwrap()) / (2.0 * h);
                let dev = (grad[i] - fd).abs() / scale;
                worst = worst.max(dev);
                assert!(dev <= 1e-6, "component {i} at {q:?}: {} vs {fd}", grad[i]);
            }
        }
    };

    let point = build_point(1.3).unwrap();
    let disk = build_disk(1.0, 0.7, 0.4).unwrap();
    let rod = build_rod(1.0, 1.2, 0.5).unwrap();
    let samples2: Vec<DVector<f64>> = (0..8)
        .map(|_| DVector::from_fn(2, |_, _| rand::Rng::gen_range(&mut rng, -2.0..2.0)))
        .collect();
    let samples3: Vec<DVector<f64>> = (0..8)
        .map(|i| {
            DVector::from_row_slice(&[
                rand::Rng::gen_range(&mut rng, -2.0..2.0),
                rand::Rng::gen_range(&mut rng, -2.0..2.0),
                0.3 + 0.3 * i as f64,
            ])
        })
        .collect();
    check_surface(&point.surface, &samples2);
    check_surface(&disk.surface, &samples3);
    check_surface(&rod.surface, &samples3);

    // a custom configuration-dependent surface
    let def = percuss_core::models::CustomModelDef {
        coords: vec!["r".into(), "phi".into()],
        metric_entries: vec![
            vec!["m".into(), "0".into()],
            vec!["0".into(), "m*r^2".into()],
        ],
        surface: "r - R0".into(),
        surface_gradient: None,
        stick_rows: vec![vec!["0".into(), "r".into()]],
    };
    let params: BTreeMap<String, f64> = [("m".to_string(), 2.0), ("R0".to_string(), 1.0)]
        .into_iter()
        .collect();
    let custom = percuss_core::models::build_custom("tether", def, params).unwrap();
    let samples_polar: Vec<DVector<f64>> = (0..8)
        .map(|i| DVector::from_row_slice(&[1.1 + 0.2 * i as f64, 0.4 * i as f64]))
        .collect();
    check_surface(&custom.surface, &samples_polar);

    pass(12, &format!(
        "builtin and custom surface gradients vs finite differences, worst relative deviation {worst:.2e}"
    ));
}
