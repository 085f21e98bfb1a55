//! Scenario file schema and loading.
//!
//! Scenarios are JSON documents:
//!
//! ```json
//! {
//!   "model": { "builtin": "rod", "parameters": { "m": 1.0, "L": 1.0, "A": 0.333 } },
//!   "law": { "variant": "coulomb_static", "e_s": 0.5, "mu_s": 1.0 },
//!   "params": { "th0": 1.2 },
//!   "initial": { "t": 0.0, "q": [0.0, "L*sin(th0)", "th0"], "qdot": [0.0, -1.0, 0.0] },
//!   "force": [0.0, -10.0, 0.0],
//!   "simulation": { "t_end": 3.0, "step": 0.001, "max_impacts": 64, "settle_speed": 1e-6 },
//!   "output": { "format": "csv", "path": "out" }
//! }
//! ```
//!
//! Instead of a builtin, `model.custom` may declare coordinates plus
//! expressions for the metric entries, the surface (optionally with a
//! hand-written gradient), and the stick rows. Initial-state entries may be
//! expressions over the model and scenario parameters, which keeps swept
//! initial configurations (for example a contact angle) on the surface.
//! Angles are radians; all units SI.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use percuss_core::dsl;
use percuss_core::laws::ContactLaw;
use percuss_core::models::{build_builtin, build_custom, CustomModelDef, ModelSpec};
use percuss_core::sim::{ScalarSpec, ScenarioTemplate, SimParams};
use percuss_core::tol;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub model: ModelSection,
    pub law: LawSection,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub initial: InitialSection,
    pub force: Vec<f64>,
    #[serde(default)]
    pub simulation: Option<SimulationSection>,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub custom: Option<CustomSection>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSection {
    #[serde(default)]
    pub name: Option<String>,
    pub coordinates: Vec<String>,
    pub metric: Vec<Vec<String>>,
    pub surface: String,
    #[serde(default)]
    pub surface_gradient: Option<Vec<String>>,
    pub stick: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSection {
    Ideal,
    Restitution { e_s: f64 },
    DoubleRestitution { e_s: f64, e_b: f64 },
    CoulombStatic { e_s: f64, mu_s: f64 },
    CoulombDynamic { e_s: f64, mu_s: f64, mu_d: f64 },
}

impl From<LawSection> for ContactLaw {
    fn from(section: LawSection) -> ContactLaw {
        match section {
            LawSection::Ideal => ContactLaw::Ideal,
            LawSection::Restitution { e_s } => ContactLaw::Restitution { e_s },
            LawSection::DoubleRestitution { e_s, e_b } => {
                ContactLaw::DoubleRestitution { e_s, e_b }
            }
            LawSection::CoulombStatic { e_s, mu_s } => ContactLaw::CoulombStatic { e_s, mu_s },
            LawSection::CoulombDynamic { e_s, mu_s, mu_d } => {
                ContactLaw::CoulombDynamic { e_s, mu_s, mu_d }
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub t: f64,
    pub q: Vec<NumOrExpr>,
    pub qdot: Vec<NumOrExpr>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum NumOrExpr {
    Num(f64),
    Expr(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub t_end: f64,
    pub step: f64,
    pub max_impacts: usize,
    #[serde(default = "default_settle_speed")]
    pub settle_speed: f64,
}

fn default_settle_speed() -> f64 {
    tol::DEFAULT_SETTLE_SPEED
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

/// A loaded scenario: the runnable template plus file-level metadata.
pub struct Scenario {
    pub template: ScenarioTemplate,
    pub output: Option<OutputSection>,
    /// Whether the file carried a simulation block (required by `simulate`).
    pub has_simulation: bool,
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))?;
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| {
        CliError::Schema(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    build_template(file, path)
}

fn build_template(file: ScenarioFile, path: &Path) -> Result<Scenario, CliError> {
    let schema = |msg: String| CliError::Schema(format!("{}: {msg}", path.display()));

    let model = build_model(&file.model).map_err(&schema)?;
    let n = model.dim();

    let law: ContactLaw = file.law.into();
    law.validate().map_err(|e| schema(e.to_string()))?;

    if file.initial.q.len() != n || file.initial.qdot.len() != n {
        return Err(schema(format!(
            "initial state needs {n} entries for q and qdot, got {} and {}",
            file.initial.q.len(),
            file.initial.qdot.len()
        )));
    }
    if file.force.len() != n {
        return Err(schema(format!(
            "force vector needs {n} entries, got {}",
            file.force.len()
        )));
    }

    let parse_entries = |entries: &[NumOrExpr], label: &str| -> Result<Vec<ScalarSpec>, CliError> {
        entries
            .iter()
            .enumerate()
            .map(|(i, entry)| match entry {
                NumOrExpr::Num(v) => Ok(ScalarSpec::Number(*v)),
                NumOrExpr::Expr(text) => dsl::parse(text)
                    .map(ScalarSpec::Expr)
                    .map_err(|e| schema(format!("initial.{label}[{i}] = '{text}': {e}"))),
            })
            .collect()
    };
    let initial_q = parse_entries(&file.initial.q, "q")?;
    let initial_qdot = parse_entries(&file.initial.qdot, "qdot")?;

    let has_simulation = file.simulation.is_some();
    let sim = match &file.simulation {
        Some(s) => SimParams {
            t_end: s.t_end,
            step: s.step,
            max_impacts: s.max_impacts,
            settle_speed: s.settle_speed,
        },
        // placeholder for resolve/sweep/check runs on impact scenarios
        None => SimParams {
            t_end: file.initial.t + 1.0,
            step: 1e-3,
            max_impacts: 64,
            settle_speed: tol::DEFAULT_SETTLE_SPEED,
        },
    };

    if let Some(out) = &file.output {
        if let Some(fmt) = &out.format {
            if fmt != "csv" && fmt != "json" {
                return Err(schema(format!("output.format '{fmt}' is not csv or json")));
            }
        }
    }

    Ok(Scenario {
        template: ScenarioTemplate {
            model,
            law,
            params: file.params,
            initial_time: file.initial.t,
            initial_q,
            initial_qdot,
            force: nalgebra::DVector::from_vec(file.force),
            sim,
        },
        output: file.output,
        has_simulation,
    })
}

fn build_model(section: &ModelSection) -> Result<ModelSpec, String> {
    match (&section.builtin, &section.custom) {
        (Some(name), None) => build_builtin(name, &section.parameters).map_err(|e| e.to_string()),
        (None, Some(custom)) => {
            let def = CustomModelDef {
                coords: custom.coordinates.clone(),
                metric_entries: custom.metric.clone(),
                surface: custom.surface.clone(),
                surface_gradient: custom.surface_gradient.clone(),
                stick_rows: custom.stick.clone(),
            };
            let name = custom.name.clone().unwrap_or_else(|| "custom".to_string());
            build_custom(&name, def, section.parameters.clone()).map_err(|e| e.to_string())
        }
        (Some(_), Some(_)) => Err("model declares both builtin and custom".into()),
        (None, None) => Err("model needs either builtin or custom".into()),
    }
}
