//! Event-driven time evolution: free flight between impacts, impact-time
//! detection on the contact surface, impulse application, termination
//! guards.
//!
//! Between impacts the state advances under `qddot = G(q)^-1 f` with a
//! constant generalized force `f` — exactly for a constant metric, by
//! classical fourth-order Runge-Kutta otherwise. A sign change of `s(q(t))`
//! within a step is bracketed by an eight-way subdivision (earliest
//! crossing first) and bisected to a time tolerance of `1e-12 * dt`. At the
//! detected contact the velocity is split and either resolved through the
//! scenario's contact law or, when the surface-orthogonal speed has fallen
//! below the settle threshold, the run halts with a settle outcome — the
//! Zeno guard against infinite impact chains under geometric restitution.

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::dsl::Expr;
use crate::error::{Error, Result};
use crate::geometry::{triple_split, zero_velocity_threshold, GeneralizedState};
use crate::laws::{outcome_from_split, Branch, ContactLaw};
use crate::models::ModelSpec;
use crate::tol;

/// Simulation block of a scenario.
#[derive(Debug, Clone, Copy)]
pub struct SimParams {
    pub t_end: f64,
    pub step: f64,
    pub max_impacts: usize,
    pub settle_speed: f64,
}

/// A fully resolved scenario: model, law, numeric initial state, constant
/// generalized force, and the simulation block.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub model: ModelSpec,
    pub law: ContactLaw,
    pub initial: GeneralizedState,
    pub force: DVector<f64>,
    pub sim: SimParams,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.model.dim();
        if self.initial.dim() != n {
            return Err(Error::dim(n, self.initial.dim(), "initial state"));
        }
        if self.force.len() != n {
            return Err(Error::dim(n, self.force.len(), "force vector"));
        }
        self.law.validate()?;
        if !(self.sim.step > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "step = {} must be > 0",
                self.sim.step
            )));
        }
        if !(self.sim.t_end > self.initial.time) {
            return Err(Error::InvalidScenario(format!(
                "t_end = {} must exceed the initial time {}",
                self.sim.t_end, self.initial.time
            )));
        }
        if self.sim.max_impacts == 0 {
            return Err(Error::InvalidScenario("max_impacts must be >= 1".into()));
        }
        if !(self.sim.settle_speed >= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "settle_speed = {} must be >= 0",
                self.sim.settle_speed
            )));
        }
        self.model.check_config(&self.initial.q)?;
        self.model.metric.validate_at(&self.initial.q)?;
        Ok(())
    }
}

/// An initial-state entry: a plain number or an expression over the
/// scenario and model parameters.
#[derive(Debug, Clone)]
pub enum ScalarSpec {
    Number(f64),
    Expr(Expr),
}

impl ScalarSpec {
    fn eval(&self, env: &BTreeMap<String, f64>) -> Result<f64> {
        match self {
            ScalarSpec::Number(v) => Ok(*v),
            ScalarSpec::Expr(e) => Ok(e.evaluate(env)?),
        }
    }
}

/// A scenario before numeric resolution: initial-state entries may be
/// expressions over named parameters, which is what makes parameter sweeps
/// over configuration quantities (for example a contact angle that the
/// initial height must track) well-posed.
#[derive(Debug, Clone)]
pub struct ScenarioTemplate {
    pub model: ModelSpec,
    pub law: ContactLaw,
    /// Scenario-level named values usable in initial-state expressions.
    pub params: BTreeMap<String, f64>,
    pub initial_time: f64,
    pub initial_q: Vec<ScalarSpec>,
    pub initial_qdot: Vec<ScalarSpec>,
    pub force: DVector<f64>,
    pub sim: SimParams,
}

impl ScenarioTemplate {
    /// Evaluate the initial-state entries and produce a runnable config.
    pub fn resolve_config(&self) -> Result<ScenarioConfig> {
        let n = self.model.dim();
        if self.initial_q.len() != n {
            return Err(Error::dim(n, self.initial_q.len(), "initial q entries"));
        }
        if self.initial_qdot.len() != n {
            return Err(Error::dim(n, self.initial_qdot.len(), "initial qdot entries"));
        }
        let mut env = self.model.params().clone();
        for (k, v) in &self.params {
            env.insert(k.clone(), *v);
        }
        let q = DVector::from_iterator(
            n,
            self.initial_q
                .iter()
                .map(|s| s.eval(&env))
                .collect::<Result<Vec<_>>>()?,
        );
        let qdot = DVector::from_iterator(
            n,
            self.initial_qdot
                .iter()
                .map(|s| s.eval(&env))
                .collect::<Result<Vec<_>>>()?,
        );
        Ok(ScenarioConfig {
            model: self.model.clone(),
            law: self.law,
            initial: GeneralizedState::new(self.initial_time, q, qdot)?,
            force: self.force.clone(),
            sim: self.sim,
        })
    }

    /// Rebuild the template with one named parameter changed.
    ///
    /// Accepted names: `law.<coeff>` for a law coefficient, `model.<p>` for
    /// a model parameter, or a bare name looked up first among the scenario
    /// parameters and then among the model parameters.
    pub fn with_param(&self, name: &str, value: f64) -> Result<ScenarioTemplate> {
        let mut out = self.clone();
        if let Some(coeff) = name.strip_prefix("law.") {
            out.law = law_with_coeff(&self.law, coeff, value)?;
        } else if let Some(p) = name.strip_prefix("model.") {
            out.model = self.model.with_param(p, value)?;
        } else if self.params.contains_key(name) {
            out.params.insert(name.to_string(), value);
        } else if self.model.params().contains_key(name) {
            out.model = self.model.with_param(name, value)?;
        } else {
            return Err(Error::UnknownSweepParameter(name.to_string()));
        }
        Ok(out)
    }
}

fn law_with_coeff(law: &ContactLaw, coeff: &str, value: f64) -> Result<ContactLaw> {
    use ContactLaw::*;
    let updated = match (*law, coeff) {
        (Restitution { .. }, "e_s") => Restitution { e_s: value },
        (DoubleRestitution { e_b, .. }, "e_s") => DoubleRestitution { e_s: value, e_b },
        (DoubleRestitution { e_s, .. }, "e_b") => DoubleRestitution { e_s, e_b: value },
        (CoulombStatic { mu_s, .. }, "e_s") => CoulombStatic { e_s: value, mu_s },
        (CoulombStatic { e_s, .. }, "mu_s") => CoulombStatic { e_s, mu_s: value },
        (CoulombDynamic { mu_s, mu_d, .. }, "e_s") => CoulombDynamic { e_s: value, mu_s, mu_d },
        (CoulombDynamic { e_s, mu_d, .. }, "mu_s") => CoulombDynamic { e_s, mu_s: value, mu_d },
        (CoulombDynamic { e_s, mu_s, .. }, "mu_d") => CoulombDynamic { e_s, mu_s, mu_d: value },
        _ => {
            return Err(Error::UnknownSweepParameter(format!("law.{coeff}")));
        }
    };
    Ok(updated)
}

/// One resolved impact along a trajectory.
#[derive(Debug, Clone)]
pub struct ImpactEvent {
    pub time: f64,
    pub pre_qdot: DVector<f64>,
    pub post_qdot: DVector<f64>,
    pub branch: Branch,
    pub impulse: DVector<f64>,
    pub delta_energy: f64,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunOutcome {
    /// Integrated to `t_end`.
    ReachedEnd,
    /// Impact budget exhausted.
    MaxImpacts,
    /// Surface-orthogonal speed at a contact fell below the settle
    /// threshold (or the post-impact state could not separate).
    Settled { time: f64, speed: f64 },
}

/// Sampled run: flight samples in strictly increasing time plus the impact
/// events.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<GeneralizedState>,
    pub events: Vec<ImpactEvent>,
    pub outcome: RunOutcome,
}

/// Advance the state by `dt` under the constant generalized force.
///
/// Requires an admissible start (`s(q) > 0`). For a constant metric this is
/// the exact ballistic update; otherwise one RK4 step.
pub fn integrate_free_flight(
    model: &ModelSpec,
    force: &DVector<f64>,
    state: &GeneralizedState,
    dt: f64,
) -> Result<GeneralizedState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidScenario(format!("dt = {dt} must be > 0")));
    }
    let s = model.surface.value(&state.q)?;
    if s <= 0.0 {
        return Err(Error::InadmissibleState { s, time: state.time });
    }
    flight(model, force, state, dt)
}

fn flight(
    model: &ModelSpec,
    force: &DVector<f64>,
    state: &GeneralizedState,
    dt: f64,
) -> Result<GeneralizedState> {
    let n = model.dim();
    if force.len() != n {
        return Err(Error::dim(n, force.len(), "force vector"));
    }
    if model.metric.is_constant() {
        let accel = accel_at(model, force, &state.q)?;
        let q = &state.q + &state.qdot * dt + &accel * (0.5 * dt * dt);
        let qdot = &state.qdot + &accel * dt;
        return GeneralizedState::new(state.time + dt, q, qdot);
    }
    // classical 4-stage Runge-Kutta on (q, qdot)
    let k1q = state.qdot.clone();
    let k1v = accel_at(model, force, &state.q)?;
    let k2q = &state.qdot + &k1v * (dt / 2.0);
    let k2v = accel_at(model, force, &(&state.q + &k1q * (dt / 2.0)))?;
    let k3q = &state.qdot + &k2v * (dt / 2.0);
    let k3v = accel_at(model, force, &(&state.q + &k2q * (dt / 2.0)))?;
    let k4q = &state.qdot + &k3v * dt;
    let k4v = accel_at(model, force, &(&state.q + &k3q * dt))?;
    let q = &state.q + (&k1q + &k2q * 2.0 + &k3q * 2.0 + &k4q) * (dt / 6.0);
    let qdot = &state.qdot + (&k1v + &k2v * 2.0 + &k3v * 2.0 + &k4v) * (dt / 6.0);
    GeneralizedState::new(state.time + dt, q, qdot)
}

fn accel_at(model: &ModelSpec, force: &DVector<f64>, q: &DVector<f64>) -> Result<DVector<f64>> {
    let g = model.metric.evaluate(q)?;
    let chol = g.cholesky().ok_or(Error::MetricNotPositiveDefinite { eigenvalue: 0.0 })?;
    Ok(chol.solve(force))
}

/// Locate the earliest surface crossing within a step, if any.
///
/// The step `[0, dt]` is scanned in eight subintervals; the first one whose
/// start is admissible and whose end is not gets bisected to a time
/// tolerance of [`tol::DETECT_TIME_REL`]` * dt`. The returned state lies on
/// the inadmissible side of the crossing, with `|s|` bounded by the
/// crossing speed times the time tolerance.
pub fn detect_impact(
    model: &ModelSpec,
    force: &DVector<f64>,
    state: &GeneralizedState,
    next: &GeneralizedState,
    dt: f64,
) -> Result<Option<GeneralizedState>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidScenario(format!("dt = {dt} must be > 0")));
    }
    let s0 = model.surface.value(&state.q)?;
    if s0 < 0.0 {
        return Ok(None);
    }
    let m = tol::DETECT_SUBDIVISIONS;
    let mut s_vals = Vec::with_capacity(m + 1);
    s_vals.push(s0);
    for j in 1..=m {
        let tau = dt * j as f64 / m as f64;
        let s = if j == m {
            model.surface.value(&next.q)?
        } else {
            model.surface.value(&flight(model, force, state, tau)?.q)?
        };
        s_vals.push(s);
    }
    let bracket = (0..m).find(|&j| s_vals[j] > 0.0 && s_vals[j + 1] <= 0.0);
    let Some(j) = bracket else {
        return Ok(None);
    };
    let mut a = dt * j as f64 / m as f64;
    let mut b = dt * (j + 1) as f64 / m as f64;
    let time_tol = tol::DETECT_TIME_REL * dt;
    while b - a > time_tol {
        let mid = 0.5 * (a + b);
        let s_mid = model.surface.value(&flight(model, force, state, mid)?.q)?;
        if s_mid <= 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(Some(flight(model, force, state, b)?))
}

/// Run the event-driven simulation.
///
/// Alternates free flight, impact detection, and impulse application until
/// `t_end`, the impact budget, or the settle guard stops the run. Grazing
/// contacts pass through without an impulse.
pub fn run_simulation(config: &ScenarioConfig) -> Result<Trajectory> {
    config.validate()?;
    let model = &config.model;
    let s0 = model.surface.value(&config.initial.q)?;
    if s0 <= 0.0 {
        return Err(Error::InadmissibleState {
            s: s0,
            time: config.initial.time,
        });
    }
    let mut samples = vec![config.initial.clone()];
    let mut events: Vec<ImpactEvent> = Vec::new();
    let mut state = config.initial.clone();
    let mut outcome = RunOutcome::ReachedEnd;

    let push_sample = |samples: &mut Vec<GeneralizedState>, st: &GeneralizedState| {
        if st.time > samples.last().map_or(f64::NEG_INFINITY, |s| s.time) {
            samples.push(st.clone());
        }
    };

    'run: while state.time < config.sim.t_end {
        let dt = (config.sim.t_end - state.time).min(config.sim.step);
        if !(dt > 0.0) {
            break;
        }
        let next = flight(model, &config.force, &state, dt)?;
        let hit = detect_impact(model, &config.force, &state, &next, dt)?;
        let Some(hit) = hit else {
            push_sample(&mut samples, &next);
            state = next;
            continue;
        };

        let event_index = events.len();
        let with_context = |e: Error| Error::AtEvent {
            index: event_index,
            time: hit.time,
            source: Box::new(e),
        };

        model.check_config(&hit.q).map_err(with_context)?;
        let split =
            triple_split(&model.metric, &model.surface, &model.stick, &hit).map_err(with_context)?;

        // Zeno guard: halt once the approach speed is negligible.
        if split.norm_ortho_s < config.sim.settle_speed {
            outcome = RunOutcome::Settled {
                time: hit.time,
                speed: split.norm_ortho_s,
            };
            push_sample(&mut samples, &hit);
            break 'run;
        }
        // Grazing contact: no orthogonal content to reflect, pass through.
        let zero_tol =
            zero_velocity_threshold(&model.metric, &hit.q, &hit.qdot).map_err(with_context)?;
        if split.norm_ortho_s <= zero_tol {
            push_sample(&mut samples, &next);
            state = next;
            continue;
        }

        let resolved = outcome_from_split(&hit, &config.law, split).map_err(with_context)?;
        events.push(ImpactEvent {
            time: hit.time,
            pre_qdot: hit.qdot.clone(),
            post_qdot: resolved.right_velocity.clone(),
            branch: resolved.branch,
            impulse: resolved.impulse.clone(),
            delta_energy: resolved.delta_energy,
        });

        let post = GeneralizedState::new(hit.time, hit.q.clone(), resolved.right_velocity)?;
        if events.len() >= config.sim.max_impacts {
            outcome = RunOutcome::MaxImpacts;
            push_sample(&mut samples, &post);
            break 'run;
        }

        // Nudge along the outgoing flight until the state is admissible
        // again, so the same contact is not immediately re-detected.
        match nudge_separation(model, &config.force, &post, dt)? {
            Some(nudged) => {
                push_sample(&mut samples, &nudged);
                state = nudged;
            }
            None => {
                // Cannot separate (zero outgoing normal velocity): the
                // contact would persist, which is outside the event-driven
                // scope; halt as settled.
                outcome = RunOutcome::Settled {
                    time: post.time,
                    speed: 0.0,
                };
                push_sample(&mut samples, &post);
                break 'run;
            }
        }
    }

    Ok(Trajectory {
        samples,
        events,
        outcome,
    })
}

fn nudge_separation(
    model: &ModelSpec,
    force: &DVector<f64>,
    post: &GeneralizedState,
    dt: f64,
) -> Result<Option<GeneralizedState>> {
    let mut tau = tol::DETECT_TIME_REL * dt;
    for _ in 0..64 {
        let candidate = flight(model, force, post, tau)?;
        if model.surface.value(&candidate.q)? > 0.0 {
            return Ok(Some(candidate));
        }
        tau *= 2.0;
        if tau > dt {
            break;
        }
    }
    Ok(None)
}

/// One row of a parameter sweep: the swept value and the single-impact
/// resolution of the scenario at that value.
#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub value: f64,
    pub branch: Branch,
    pub right_velocity: DVector<f64>,
    pub delta_energy: f64,
}

/// Resolve the scenario's initial impact once per parameter value.
pub fn sweep(
    template: &ScenarioTemplate,
    param: &str,
    values: &[f64],
) -> Result<Vec<SweepSummary>> {
    let mut out = Vec::with_capacity(values.len());
    for &value in values {
        let instance = template.with_param(param, value)?;
        instance.law.validate()?;
        let config = instance.resolve_config()?;
        let resolved = config.model.resolve(&config.initial, &config.law)?;
        out.push(SweepSummary {
            value,
            branch: resolved.branch,
            right_velocity: resolved.right_velocity,
            delta_energy: resolved.delta_energy,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_disk, build_point, build_rod};

    fn point_config(e_s: f64, mu_s: f64, h: f64, g: f64) -> ScenarioConfig {
        let model = build_point(1.0).unwrap();
        ScenarioConfig {
            model,
            law: ContactLaw::CoulombStatic { e_s, mu_s },
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
                max_impacts: 64,
                settle_speed: 1e-6,
            },
        }
    }

    #[test]
    fn zero_force_flight_is_uniform() {
        let model = build_point(1.0).unwrap();
        let state = GeneralizedState::new(
            0.0,
            DVector::from_row_slice(&[0.0, 2.0]),
            DVector::from_row_slice(&[1.5, -0.5]),
        )
        .unwrap();
        let out = integrate_free_flight(&model, &DVector::zeros(2), &state, 0.4).unwrap();
        assert!((out.q[0] - 0.6).abs() < 1e-15);
        assert!((out.q[1] - 1.8).abs() < 1e-15);
        assert_eq!(out.qdot, state.qdot);
    }

    #[test]
    fn ballistic_flight_is_exact() {
        let model = build_point(1.0).unwrap();
        let state = GeneralizedState::new(
            0.0,
            DVector::from_row_slice(&[0.0, 1.0]),
            DVector::from_row_slice(&[0.0, 0.0]),
        )
        .unwrap();
        let out =
            integrate_free_flight(&model, &DVector::from_row_slice(&[0.0, -10.0]), &state, 0.1)
                .unwrap();
        assert!((out.q[1] - 0.95).abs() < 1e-15);
        assert!((out.qdot[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn disk_angle_advances_linearly_without_force() {
        let model = build_disk(1.0, 1.0, 0.5).unwrap();
        let state = GeneralizedState::new(
            0.0,
            DVector::from_row_slice(&[0.0, 2.0, 0.3]),
            DVector::from_row_slice(&[0.0, 0.0, 2.0]),
        )
        .unwrap();
        let out = integrate_free_flight(&model, &DVector::zeros(3), &state, 0.25).unwrap();
        assert!((out.q[2] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn detect_finds_closed_form_root() {
        let model = build_point(1.0).unwrap();
        let force = DVector::from_row_slice(&[0.0, -10.0]);
        let state = GeneralizedState::new(
            0.0,
            DVector::from_row_slice(&[0.0, 1.0]),
            DVector::from_row_slice(&[0.0, 0.0]),
        )
        .unwrap();
        let dt = 0.6;
        let next = flight(&model, &force, &state, dt).unwrap();
        let hit = detect_impact(&model, &force, &state, &next, dt)
            .unwrap()
            .expect("crossing expected");
        let t_star = 0.2_f64.sqrt();
        assert!((hit.time - t_star).abs() <= 1e-12, "err {}", hit.time - t_star);
        assert!(hit.q[1].abs() <= 1e-10 * (1.0 + hit.q.amax()));
    }

    #[test]
    fn detect_returns_none_without_crossing() {
        let model = build_point(1.0).unwrap();
        let force = DVector::from_row_slice(&[0.0, -10.0]);
        let state = GeneralizedState::new(
            0.0,
            DVector::from_row_slice(&[0.0, 1.0]),
            DVector::from_row_slice(&[0.0, 0.0]),
        )
        .unwrap();
        let dt = 0.1;
        let next = flight(&model, &force, &state, dt).unwrap();
        assert!(detect_impact(&model, &force, &state, &next, dt)
            .unwrap()
            .is_none());
    }

    #[test]
    fn detect_ignores_separation_from_the_surface() {
        let model = build_point(1.0).unwrap();
        let force = DVector::zeros(2);
        let state = GeneralizedState::new(
            0.0,
            DVector::from_row_slice(&[0.0, 0.0]),
            DVector::from_row_slice(&[0.0, 1.0]),
        )
        .unwrap();
        let dt = 0.1;
        let next = flight(&model, &force, &state, dt).unwrap();
        assert!(detect_impact(&model, &force, &state, &next, dt)
            .unwrap()
            .is_none());
    }

    #[test]
    fn bouncing_point_rebounds_geometrically() {
        let config = point_config(0.5, 0.0, 1.0, 10.0);
        let traj = run_simulation(&config).unwrap();
        assert!(matches!(traj.outcome, RunOutcome::Settled { .. }));
        assert!(traj.events.len() >= 5);
        let v0 = 20.0_f64.sqrt();
        for (k, ev) in traj.events.iter().take(5).enumerate() {
            let expected = v0 * 0.5_f64.powi(k as i32 + 1);
            assert!(
                (ev.post_qdot[1] - expected).abs() <= 1e-6 * expected,
                "bounce {k}: {} vs {expected}",
                ev.post_qdot[1]
            );
            assert!(ev.delta_energy <= 0.0);
        }
        // times strictly increase
        for w in traj.samples.windows(2) {
            assert!(w[1].time > w[0].time);
        }
    }

    #[test]
    fn rod_vertical_drop_preserves_verticality() {
        let model = build_rod(1.0, 1.0, 1.0 / 3.0).unwrap();
        let config = ScenarioConfig {
            model,
            law: ContactLaw::CoulombStatic { e_s: 0.5, mu_s: 0.8 },
            initial: GeneralizedState::new(
                0.0,
                DVector::from_row_slice(&[0.0, 1.5, std::f64::consts::FRAC_PI_2]),
                DVector::from_row_slice(&[0.0, 0.0, 0.0]),
            )
            .unwrap(),
            force: DVector::from_row_slice(&[0.0, -10.0, 0.0]),
            sim: SimParams {
                t_end: 2.0,
                step: 1e-3,
                max_impacts: 16,
                settle_speed: 1e-4,
            },
        };
        let traj = run_simulation(&config).unwrap();
        assert!(!traj.events.is_empty());
        for ev in &traj.events {
            assert!(ev.post_qdot[0].abs() < 1e-9, "x velocity {}", ev.post_qdot[0]);
            assert!(ev.post_qdot[2].abs() < 1e-9, "angular velocity {}", ev.post_qdot[2]);
        }
    }

    #[test]
    fn rod_leaving_its_domain_fails_with_event_context() {
        // spinning fast enough that th has passed pi by the time the end
        // touches the floor
        let model = build_rod(1.0, 1.0, 1.0 / 3.0).unwrap();
        let config = ScenarioConfig {
            model,
            law: ContactLaw::Restitution { e_s: 0.5 },
            initial: GeneralizedState::new(
                0.0,
                DVector::from_row_slice(&[0.0, 1.5, 3.0]),
                DVector::from_row_slice(&[0.0, -1.0, 1.0]),
            )
            .unwrap(),
            force: DVector::from_row_slice(&[0.0, -10.0, 0.0]),
            sim: SimParams {
                t_end: 2.0,
                step: 1e-3,
                max_impacts: 8,
                settle_speed: 1e-6,
            },
        };
        match run_simulation(&config) {
            Err(Error::AtEvent { index, source, .. }) => {
                assert_eq!(index, 0);
                assert!(matches!(*source, Error::ConfigurationDomain(_)));
            }
            other => panic!("expected a contextualized domain error, got {other:?}"),
        }
    }

    #[test]
    fn config_invariants_are_enforced() {
        let mut config = point_config(0.5, 0.0, 1.0, 10.0);
        config.sim.max_impacts = 0;
        assert!(matches!(
            run_simulation(&config),
            Err(Error::InvalidScenario(_))
        ));
        let mut config = point_config(0.5, 0.0, 1.0, 10.0);
        config.sim.step = 0.0;
        assert!(run_simulation(&config).is_err());
        // starting below the surface
        let mut config = point_config(0.5, 0.0, -1.0, 10.0);
        config.sim.t_end = 1.0;
        assert!(matches!(
            run_simulation(&config),
            Err(Error::InadmissibleState { .. })
        ));
    }

    #[test]
    fn identical_configs_produce_bit_identical_trajectories() {
        let config = point_config(0.5, 0.3, 1.0, 9.81);
        let a = run_simulation(&config).unwrap();
        let b = run_simulation(&config).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        assert_eq!(a.events.len(), b.events.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!(x.time == y.time && x.q == y.q && x.qdot == y.qdot);
        }
        for (x, y) in a.events.iter().zip(&b.events) {
            assert!(x.time == y.time && x.impulse == y.impulse);
        }
    }

    #[test]
    fn sweep_over_empty_values_is_empty() {
        let model = build_point(1.0).unwrap();
        let template = ScenarioTemplate {
            model,
            law: ContactLaw::CoulombStatic { e_s: 0.5, mu_s: 0.5 },
            params: BTreeMap::new(),
            initial_time: 0.0,
            initial_q: vec![ScalarSpec::Number(0.0), ScalarSpec::Number(0.0)],
            initial_qdot: vec![ScalarSpec::Number(1.0), ScalarSpec::Number(-1.0)],
            force: DVector::from_row_slice(&[0.0, -10.0]),
            sim: SimParams {
                t_end: 1.0,
                step: 1e-3,
                max_impacts: 8,
                settle_speed: 1e-6,
            },
        };
        assert!(sweep(&template, "law.mu_s", &[]).unwrap().is_empty());
        assert!(matches!(
            sweep(&template, "nope", &[1.0]),
            Err(Error::UnknownSweepParameter(_))
        ));
    }

    #[test]
    fn sweep_over_mu_flips_branch_once() {
        let model = build_point(1.0).unwrap();
        let template = ScenarioTemplate {
            model,
            law: ContactLaw::CoulombStatic { e_s: 0.5, mu_s: 0.5 },
            params: BTreeMap::new(),
            initial_time: 0.0,
            initial_q: vec![ScalarSpec::Number(0.0), ScalarSpec::Number(0.0)],
            initial_qdot: vec![ScalarSpec::Number(1.0), ScalarSpec::Number(-1.0)],
            force: DVector::from_row_slice(&[0.0, -10.0]),
            sim: SimParams {
                t_end: 1.0,
                step: 1e-3,
                max_impacts: 8,
                settle_speed: 1e-6,
            },
        };
        let values: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        let rows = sweep(&template, "law.mu_s", &values).unwrap();
        let flips = rows
            .windows(2)
            .filter(|w| w[0].branch != w[1].branch)
            .count();
        assert_eq!(flips, 1);
        assert_eq!(rows.first().unwrap().branch, Branch::Slip);
        assert_eq!(rows.last().unwrap().branch, Branch::Stick);
    }
}
