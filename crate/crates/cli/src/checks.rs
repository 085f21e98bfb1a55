//! Scenario diagnostics for the `check` subcommand: gradient
//! finite-difference checks, metric definiteness, constraint ranks, and
//! oracle-vs-generic projector comparisons.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use percuss_core::geometry::{
    project_ortho_b, project_ortho_s, projection_oracle, triple_split, GeneralizedState,
};
use percuss_core::models::{analytic_split_oracle, ModelSpec};
use percuss_core::sim::ScenarioConfig;
use percuss_core::tol;

pub struct CheckLine {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Run all diagnostics; returns the per-check report lines and the overall
/// verdict. Failures are collected, never fatal.
pub fn run(config: &ScenarioConfig) -> (Vec<CheckLine>, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let model = &config.model;
    let configs = sample_configs(&mut rng, model, &config.initial.q);

    let mut lines = vec![
        check_metric(model, &configs),
        check_gradient(model, &configs),
        check_ranks(model, &configs),
        check_kkt_oracle(&mut rng, model, &configs),
    ];
    if let Some(line) = check_analytic_oracle(&mut rng, model, &configs) {
        lines.push(line);
    }
    let all_pass = lines.iter().all(|l| l.pass);
    (lines, all_pass)
}

/// The initial configuration plus moderate perturbations of it, filtered
/// through the model's domain guard.
fn sample_configs(
    rng: &mut ChaCha8Rng,
    model: &ModelSpec,
    q0: &DVector<f64>,
) -> Vec<DVector<f64>> {
    let mut out = Vec::new();
    if model.check_config(q0).is_ok() {
        out.push(q0.clone());
    }
    let n = q0.len();
    for _ in 0..64 {
        if out.len() >= 25 {
            break;
        }
        let q = DVector::from_fn(n, |i, _| {
            q0[i] + 0.25 * (1.0 + q0[i].abs()) * rng.gen_range(-1.0..1.0)
        });
        if model.check_config(&q).is_ok() {
            out.push(q);
        }
    }
    out
}

fn check_metric(model: &ModelSpec, configs: &[DVector<f64>]) -> CheckLine {
    let mut min_eig = f64::INFINITY;
    for q in configs {
        match model.metric.validate_at(q) {
            Ok(()) => {
                let g = model.metric.evaluate(q).unwrap();
                let eig = g.symmetric_eigen().eigenvalues;
                min_eig = min_eig.min(eig.min());
            }
            Err(e) => {
                return CheckLine {
                    name: "metric_spd",
                    pass: false,
                    detail: format!("at q = {:?}: {e}", q.as_slice()),
                };
            }
        }
    }
    CheckLine {
        name: "metric_spd",
        pass: true,
        detail: format!("min eigenvalue {min_eig:.3e} over {} configurations", configs.len()),
    }
}

fn check_gradient(model: &ModelSpec, configs: &[DVector<f64>]) -> CheckLine {
    let mut worst = 0.0_f64;
    for q in configs {
        let grad = match model.surface.gradient(q) {
            Ok(g) => g,
            Err(e) => {
                return CheckLine {
                    name: "surface_gradient_fd",
                    pass: false,
                    detail: format!("gradient evaluation failed at q = {:?}: {e}", q.as_slice()),
                };
            }
        };
        let scale = 1.0 + grad.amax();
        for i in 0..q.len() {
            let h = tol::FD_STEP_REL * (1.0 + q[i].abs());
            let mut qp = q.clone();
            qp[i] += h;
            let mut qm = q.clone();
            qm[i] -= h;
            let (sp, sm) = match (model.surface.value(&qp), model.surface.value(&qm)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    return CheckLine {
                        name: "surface_gradient_fd",
                        pass: false,
                        detail: format!("surface evaluation failed near q = {:?}: {e}", q.as_slice()),
                    };
                }
            };
            let fd = (sp - sm) / (2.0 * h);
            worst = worst.max((grad[i] - fd).abs() / scale);
        }
    }
    CheckLine {
        name: "surface_gradient_fd",
        pass: worst <= tol::FD_CHECK_REL,
        detail: format!("max relative deviation {worst:.3e} (tolerance {:.0e})", tol::FD_CHECK_REL),
    }
}

fn check_ranks(model: &ModelSpec, configs: &[DVector<f64>]) -> CheckLine {
    let mut worst_ratio = f64::INFINITY;
    for q in configs {
        let grad = match model.surface.gradient(q) {
            Ok(g) => g,
            Err(e) => {
                return CheckLine {
                    name: "stick_rank",
                    pass: false,
                    detail: e.to_string(),
                };
            }
        };
        let c = match model.stick.evaluate(q) {
            Ok(c) => c,
            Err(e) => {
                return CheckLine {
                    name: "stick_rank",
                    pass: false,
                    detail: e.to_string(),
                };
            }
        };
        let k = c.nrows();
        let n = c.ncols();
        let mut stacked = DMatrix::zeros(k + 1, n);
        stacked.row_mut(0).copy_from(&grad);
        stacked.view_mut((1, 0), (k, n)).copy_from(&c);
        let sv = stacked.svd(false, false).singular_values;
        let ratio = sv.min() / sv.max();
        worst_ratio = worst_ratio.min(ratio);
        if !(ratio > 1e-10) {
            return CheckLine {
                name: "stick_rank",
                pass: false,
                detail: format!(
                    "stacked gradient and stick rows lose rank at q = {:?} (singular value ratio {ratio:.3e})",
                    q.as_slice()
                ),
            };
        }
    }
    CheckLine {
        name: "stick_rank",
        pass: true,
        detail: format!(
            "rank {} + 1 stack regular, worst singular value ratio {worst_ratio:.3e}",
            model.stick.row_count()
        ),
    }
}

fn check_kkt_oracle(
    rng: &mut ChaCha8Rng,
    model: &ModelSpec,
    configs: &[DVector<f64>],
) -> CheckLine {
    let mut worst = 0.0_f64;
    let mut states = 0;
    for q in configs {
        for _ in 0..4 {
            let qdot = DVector::from_fn(q.len(), |_, _| rng.gen_range(-2.0..2.0));
            let state = GeneralizedState::new(0.0, q.clone(), qdot.clone()).unwrap();
            let result = (|| -> percuss_core::Result<f64> {
                let g = model.metric.evaluate(q)?;
                let grad = model.surface.gradient(q)?;
                let c = model.stick.evaluate(q)?;
                let grad_rows = DMatrix::from_rows(std::slice::from_ref(&grad));
                let w_s = projection_oracle(&g, &grad_rows, &qdot)?;
                let v_s = project_ortho_s(&model.metric, &model.surface, &state)?;
                let dev_s = (&v_s - (&qdot - &w_s)).norm() / (1.0 + qdot.norm());

                let k = c.nrows();
                let mut stacked = DMatrix::zeros(k + 1, q.len());
                stacked.row_mut(0).copy_from(&grad);
                stacked.view_mut((1, 0), (k, q.len())).copy_from(&c);
                let w_sb = projection_oracle(&g, &stacked, &qdot)?;
                let v_b = project_ortho_b(&model.metric, &model.surface, &model.stick, &state)?;
                let dev_b = (&v_b - (&w_s - &w_sb)).norm() / (1.0 + qdot.norm());
                Ok(dev_s.max(dev_b))
            })();
            match result {
                Ok(dev) => {
                    worst = worst.max(dev);
                    states += 1;
                }
                Err(e) => {
                    return CheckLine {
                        name: "split_vs_kkt_oracle",
                        pass: false,
                        detail: format!("at q = {:?}: {e}", q.as_slice()),
                    };
                }
            }
        }
    }
    CheckLine {
        name: "split_vs_kkt_oracle",
        pass: worst <= tol::ORACLE_REL,
        detail: format!("max relative deviation {worst:.3e} over {states} states"),
    }
}

fn check_analytic_oracle(
    rng: &mut ChaCha8Rng,
    model: &ModelSpec,
    configs: &[DVector<f64>],
) -> Option<CheckLine> {
    // probe one state to see whether an analytic oracle exists
    let q0 = configs.first()?;
    let probe = GeneralizedState::new(0.0, q0.clone(), DVector::zeros(q0.len())).unwrap();
    if analytic_split_oracle(model, &probe).is_err() {
        return None;
    }
    let mut worst = 0.0_f64;
    let mut states = 0;
    for q in configs {
        for _ in 0..4 {
            let qdot = DVector::from_fn(q.len(), |_, _| rng.gen_range(-2.0..2.0));
            let state = GeneralizedState::new(0.0, q.clone(), qdot).unwrap();
            let generic =
                match triple_split(&model.metric, &model.surface, &model.stick, &state) {
                    Ok(s) => s,
                    Err(e) => {
                        return Some(CheckLine {
                            name: "split_vs_analytic",
                            pass: false,
                            detail: e.to_string(),
                        });
                    }
                };
            let oracle = analytic_split_oracle(model, &state).unwrap();
            let scale = 1.0 + state.qdot.norm();
            let dev = ((&generic.parallel_b - &oracle.parallel_b).norm()
                + (&generic.ortho_b - &oracle.ortho_b).norm()
                + (&generic.ortho_s - &oracle.ortho_s).norm())
                / scale;
            worst = worst.max(dev);
            states += 1;
        }
    }
    Some(CheckLine {
        name: "split_vs_analytic",
        pass: worst <= tol::ORACLE_REL,
        detail: format!("max relative deviation {worst:.3e} over {states} states"),
    })
}
