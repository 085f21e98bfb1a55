//! Serialized outputs: CSV trajectory files, JSON reports, text tables.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite f64 exactly.

use std::fmt::Write as _;

use nalgebra::DVector;
use serde_json::json;

use percuss_core::geometry::VelocitySplit;
use percuss_core::laws::ImpactOutcome;
use percuss_core::sim::{RunOutcome, SweepSummary, Trajectory};

/// 17-significant-digit decimal form of an f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_vec(line: &mut String, v: &DVector<f64>) {
    for x in v.iter() {
        line.push(',');
        line.push_str(&num(*x));
    }
}

/// Samples CSV: header `t,q1..qn,qd1..qdn`, LF line endings.
pub fn samples_csv(trajectory: &Trajectory, n: usize) -> String {
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",q{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",qd{i}");
    }
    out.push('\n');
    for sample in &trajectory.samples {
        let mut line = num(sample.time);
        push_vec(&mut line, &sample.q);
        push_vec(&mut line, &sample.qdot);
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Events CSV: header `t,branch,dE,I1..In,pre_qd1..pre_qdn,post_qd1..post_qdn`.
/// A settled run ends with a marker row whose branch column is `settled`.
pub fn events_csv(trajectory: &Trajectory, n: usize) -> String {
    let mut out = String::from("t,branch,dE");
    for i in 1..=n {
        let _ = write!(out, ",I{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",pre_qd{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",post_qd{i}");
    }
    out.push('\n');
    for ev in &trajectory.events {
        let mut line = format!("{},{},{}", num(ev.time), ev.branch, num(ev.delta_energy));
        push_vec(&mut line, &ev.impulse);
        push_vec(&mut line, &ev.pre_qdot);
        push_vec(&mut line, &ev.post_qdot);
        out.push_str(&line);
        out.push('\n');
    }
    if let RunOutcome::Settled { time, .. } = trajectory.outcome {
        let final_qdot = trajectory
            .samples
            .last()
            .map(|s| s.qdot.clone())
            .unwrap_or_else(|| DVector::zeros(n));
        let mut line = format!("{},settled,{}", num(time), num(0.0));
        push_vec(&mut line, &DVector::zeros(n));
        push_vec(&mut line, &final_qdot);
        push_vec(&mut line, &final_qdot);
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Sweep summary CSV: `value,branch,qdR1..qdRn,dE`.
pub fn sweep_csv(rows: &[SweepSummary], n: usize) -> String {
    let mut out = String::from("value,branch");
    for i in 1..=n {
        let _ = write!(out, ",qdR{i}");
    }
    out.push_str(",dE\n");
    for row in rows {
        let mut line = format!("{},{}", num(row.value), row.branch);
        push_vec(&mut line, &row.right_velocity);
        line.push(',');
        line.push_str(&num(row.delta_energy));
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn vec_json(v: &DVector<f64>) -> serde_json::Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

/// JSON report of a single resolved impact.
pub fn resolve_json(
    coords: &[String],
    split: &VelocitySplit,
    outcome: &ImpactOutcome,
    left: &DVector<f64>,
) -> serde_json::Value {
    json!({
        "coordinates": coords,
        "split": {
            "parallel_B": vec_json(&split.parallel_b),
            "ortho_B": vec_json(&split.ortho_b),
            "ortho_S": vec_json(&split.ortho_s),
            "norm_ortho_B": split.norm_ortho_b,
            "norm_ortho_S": split.norm_ortho_s,
        },
        "branch": outcome.branch.to_string(),
        "lambda": outcome.effective_tangential_factor,
        "impulse": vec_json(&outcome.impulse),
        "left_velocity": vec_json(left),
        "right_velocity": vec_json(&outcome.right_velocity),
        "delta_energy": outcome.delta_energy,
    })
}

/// JSON form of a whole trajectory.
pub fn trajectory_json(trajectory: &Trajectory) -> serde_json::Value {
    let outcome = match trajectory.outcome {
        RunOutcome::ReachedEnd => json!({"kind": "reached_end"}),
        RunOutcome::MaxImpacts => json!({"kind": "max_impacts"}),
        RunOutcome::Settled { time, speed } => {
            json!({"kind": "settled", "time": time, "speed": speed})
        }
    };
    json!({
        "samples": trajectory.samples.iter().map(|s| json!({
            "t": s.time,
            "q": vec_json(&s.q),
            "qdot": vec_json(&s.qdot),
        })).collect::<Vec<_>>(),
        "events": trajectory.events.iter().map(|e| json!({
            "t": e.time,
            "branch": e.branch.to_string(),
            "dE": e.delta_energy,
            "impulse": vec_json(&e.impulse),
            "pre_qdot": vec_json(&e.pre_qdot),
            "post_qdot": vec_json(&e.post_qdot),
        })).collect::<Vec<_>>(),
        "outcome": outcome,
    })
}

/// Aligned text table for a resolved impact.
pub fn resolve_table(
    coords: &[String],
    split: &VelocitySplit,
    outcome: &ImpactOutcome,
    left: &DVector<f64>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<16}{}", "branch", outcome.branch);
    let _ = writeln!(out, "{:<16}{:.12}", "lambda", outcome.effective_tangential_factor);
    let _ = writeln!(out, "{:<16}{:.12e}", "delta_energy", outcome.delta_energy);
    let _ = writeln!(out, "{:<16}{:.12e}", "norm_ortho_B", split.norm_ortho_b);
    let _ = writeln!(out, "{:<16}{:.12e}", "norm_ortho_S", split.norm_ortho_s);
    let mut header = format!("{:<16}", "quantity");
    for c in coords {
        let _ = write!(header, "{c:>22}");
    }
    let _ = writeln!(out, "{header}");
    let mut row = |label: &str, v: &DVector<f64>| {
        let mut line = format!("{label:<16}");
        for x in v.iter() {
            let _ = write!(line, "{x:>22.12e}");
        }
        let _ = writeln!(out, "{line}");
    };
    row("parallel_B", &split.parallel_b);
    row("ortho_B", &split.ortho_b);
    row("ortho_S", &split.ortho_s);
    row("impulse", &outcome.impulse);
    row("left_velocity", left);
    row("right_velocity", &outcome.right_velocity);
    out
}
