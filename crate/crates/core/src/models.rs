//! Builtin parameterized models and their hard-coded analytic formulas.
//!
//! Three planar systems impacting a rough horizontal floor are provided:
//!
//! - `point` — a particle, coordinates `(x, y)`, metric `diag(m, m)`,
//!   surface `y = 0`, stick row `xdot = 0`;
//! - `disk` — coordinates `(x, y, th)`, metric `diag(m, m, A)`, surface
//!   `y - R = 0`, stick row `xdot - R*thdot = 0`;
//! - `rod` — half-length `L`, contact end at angle `th in (0, pi)`, surface
//!   `y - L*sin(th) = 0`, stick row `xdot - L*sin(th)*thdot = 0`.
//!
//! For each model the closed-form velocity split is transcribed directly
//! (not derived through the generic projectors), so it can serve as an
//! independent oracle; the disk and rod additionally get closed-form
//! right-velocity oracles for both friction branches.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::dsl;
use crate::error::{Error, Result};
use crate::geometry::{
    parse_entries, triple_split, ContactSurface, GeneralizedState, MassMetric, StickConstraint,
    VelocitySplit,
};
use crate::laws::{resolve_impact, Branch, ContactLaw, ImpactOutcome};

/// Definition of a user-supplied model: coordinate names and expression
/// sources for the metric entries, the surface, and the stick rows.
/// Parameters are substituted as constants when the model is built.
#[derive(Debug, Clone)]
pub struct CustomModelDef {
    pub coords: Vec<String>,
    pub metric_entries: Vec<Vec<String>>,
    pub surface: String,
    /// Optional hand-written gradient; when absent the gradient is derived
    /// symbolically.
    pub surface_gradient: Option<Vec<String>>,
    pub stick_rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone)]
enum Recipe {
    Point,
    Disk,
    Rod,
    Custom(CustomModelDef),
}

/// A built model: named coordinates, parameter values, and the three
/// geometric objects consumed by the projections and the resolver.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    name: String,
    coords: Vec<String>,
    params: BTreeMap<String, f64>,
    recipe: Recipe,
    pub metric: MassMetric,
    pub surface: ContactSurface,
    pub stick: StickConstraint,
}

impl ModelSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// Rebuild the model with one parameter changed.
    pub fn with_param(&self, name: &str, value: f64) -> Result<ModelSpec> {
        if !self.params.contains_key(name) {
            return Err(Error::UnknownSweepParameter(name.to_string()));
        }
        let mut params = self.params.clone();
        params.insert(name.to_string(), value);
        rebuild(&self.name, &self.recipe, &params)
    }

    /// Reject configurations outside the model's domain (the rod contact
    /// formula holds for `th in (0, pi)` only).
    pub fn check_config(&self, q: &DVector<f64>) -> Result<()> {
        if q.len() != self.dim() {
            return Err(Error::dim(self.dim(), q.len(), "configuration vector"));
        }
        if let Recipe::Rod = self.recipe {
            let th = q[2];
            if !(th > 0.0 && th < std::f64::consts::PI) {
                return Err(Error::ConfigurationDomain(format!(
                    "rod angle th = {th} outside (0, pi)"
                )));
            }
        }
        Ok(())
    }

    /// Triple split of the state's velocity through the generic projectors.
    pub fn split(&self, state: &GeneralizedState) -> Result<VelocitySplit> {
        self.check_config(&state.q)?;
        triple_split(&self.metric, &self.surface, &self.stick, state)
    }

    /// Resolve a single impact of this model under the given law.
    pub fn resolve(&self, state: &GeneralizedState, law: &ContactLaw) -> Result<ImpactOutcome> {
        self.check_config(&state.q)?;
        resolve_impact(&self.metric, &self.surface, &self.stick, state, law)
    }

    fn is_builtin(&self) -> Option<&Recipe> {
        match self.recipe {
            Recipe::Custom(_) => None,
            ref r => Some(r),
        }
    }
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter(format!("{name} = {value} must be > 0")))
    }
}

fn rebuild(name: &str, recipe: &Recipe, params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    let get = |key: &str| -> Result<f64> {
        params
            .get(key)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("missing parameter '{key}'")))
    };
    match recipe {
        Recipe::Point => build_point(get("m")?),
        Recipe::Disk => build_disk(get("m")?, get("R")?, get("A")?),
        Recipe::Rod => build_rod(get("m")?, get("L")?, get("A")?),
        Recipe::Custom(def) => build_custom(name, def.clone(), params.clone()),
    }
}

/// Particle of mass `m` above a rough horizontal line.
pub fn build_point(m: f64) -> Result<ModelSpec> {
    let m = positive("m", m)?;
    Ok(ModelSpec {
        name: "point".into(),
        coords: vec!["x".into(), "y".into()],
        params: [("m".to_string(), m)].into_iter().collect(),
        recipe: Recipe::Point,
        metric: MassMetric::diagonal(&[m, m]),
        surface: ContactSurface::linear(RowDVector::from_row_slice(&[0.0, 1.0]), 0.0)?,
        stick: StickConstraint::constant(DMatrix::from_row_slice(1, 2, &[1.0, 0.0]))?,
    })
}

/// Disk of radius `R`, mass `m`, moment of inertia `A`.
pub fn build_disk(m: f64, r: f64, a: f64) -> Result<ModelSpec> {
    let m = positive("m", m)?;
    let r = positive("R", r)?;
    let a = positive("A", a)?;
    Ok(ModelSpec {
        name: "disk".into(),
        coords: vec!["x".into(), "y".into(), "th".into()],
        params: [
            ("m".to_string(), m),
            ("R".to_string(), r),
            ("A".to_string(), a),
        ]
        .into_iter()
        .collect(),
        recipe: Recipe::Disk,
        metric: MassMetric::diagonal(&[m, m, a]),
        surface: ContactSurface::linear(RowDVector::from_row_slice(&[0.0, 1.0, 0.0]), r)?,
        stick: StickConstraint::constant(DMatrix::from_row_slice(1, 3, &[1.0, 0.0, -r]))?,
    })
}

/// Rod of half-length `L`, mass `m`, moment of inertia `A`, touching the
/// floor with one end; valid for `th in (0, pi)`.
pub fn build_rod(m: f64, l: f64, a: f64) -> Result<ModelSpec> {
    let m = positive("m", m)?;
    let l = positive("L", l)?;
    let a = positive("A", a)?;
    let coords: Vec<String> = vec!["x".into(), "y".into(), "th".into()];
    let params: BTreeMap<String, f64> = [
        ("m".to_string(), m),
        ("L".to_string(), l),
        ("A".to_string(), a),
    ]
    .into_iter()
    .collect();
    let surface_expr = dsl::parse("y - L*sin(th)")?.substitute(&params);
    let stick_rows = parse_entries(
        &[vec!["1".into(), "0".into(), "-L*sin(th)".into()]],
        &params,
    )?;
    Ok(ModelSpec {
        name: "rod".into(),
        coords: coords.clone(),
        params,
        recipe: Recipe::Rod,
        metric: MassMetric::diagonal(&[m, m, a]),
        surface: ContactSurface::from_expr(coords.clone(), surface_expr)?,
        stick: StickConstraint::from_exprs(coords, stick_rows)?,
    })
}

/// Build a model from user-supplied expressions. Parameters are folded into
/// the expressions as constants; any name left over that is not a declared
/// coordinate is rejected up front.
pub fn build_custom(
    name: &str,
    def: CustomModelDef,
    params: BTreeMap<String, f64>,
) -> Result<ModelSpec> {
    let coords = def.coords.clone();
    let n = coords.len();
    if n == 0 {
        return Err(Error::InvalidParameter("custom model needs coordinates".into()));
    }
    let check_names = |expr: &dsl::Expr, what: String| -> Result<()> {
        for var in expr.variables() {
            if !coords.contains(&var) {
                return Err(Error::InvalidParameter(format!(
                    "{what} references '{var}', which is neither a coordinate nor a parameter"
                )));
            }
        }
        Ok(())
    };

    let metric_entries = parse_entries(&def.metric_entries, &params)?;
    for (i, row) in metric_entries.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            check_names(entry, format!("metric[{i}][{j}]"))?;
        }
    }
    let metric = MassMetric::from_exprs(coords.clone(), metric_entries)?;

    let surface_expr = dsl::parse(&def.surface)?.substitute(&params);
    check_names(&surface_expr, "surface".into())?;
    let surface = match &def.surface_gradient {
        Some(rows) => {
            let grad = rows
                .iter()
                .enumerate()
                .map(|(i, text)| {
                    let expr = dsl::parse(text)?.substitute(&params);
                    check_names(&expr, format!("surface_gradient[{i}]"))?;
                    Ok(expr)
                })
                .collect::<Result<Vec<_>>>()?;
            ContactSurface::from_expr_with_gradient(coords.clone(), surface_expr, grad)?
        }
        None => ContactSurface::from_expr(coords.clone(), surface_expr)?,
    };

    let stick_rows = parse_entries(&def.stick_rows, &params)?;
    for (i, row) in stick_rows.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            check_names(entry, format!("stick[{i}][{j}]"))?;
        }
    }
    let stick = StickConstraint::from_exprs(coords.clone(), stick_rows)?;

    Ok(ModelSpec {
        name: name.to_string(),
        coords,
        params,
        recipe: Recipe::Custom(def),
        metric,
        surface,
        stick,
    })
}

/// Build a builtin model by name from a parameter map.
pub fn build_builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    let get = |key: &str| -> Result<f64> {
        params
            .get(key)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("model '{name}' needs parameter '{key}'")))
    };
    match name {
        "point" => build_point(get("m")?),
        "disk" => build_disk(get("m")?, get("R")?, get("A")?),
        "rod" => build_rod(get("m")?, get("L")?, get("A")?),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// Evaluate the transcribed closed-form split of a builtin model.
///
/// The component formulas are hard-coded per model and never call the
/// generic projectors, so this is a genuinely independent reference.
pub fn analytic_split_oracle(model: &ModelSpec, state: &GeneralizedState) -> Result<VelocitySplit> {
    let recipe = model
        .is_builtin()
        .ok_or_else(|| Error::UnknownModel(model.name.clone()))?;
    let p = |key: &str| model.params[key];
    let qd = &state.qdot;
    match recipe {
        Recipe::Point => {
            let m = p("m");
            let (xd, yd) = (qd[0], qd[1]);
            Ok(split_from_parts(
                &[m, m],
                DVector::from_row_slice(&[0.0, 0.0]),
                DVector::from_row_slice(&[xd, 0.0]),
                DVector::from_row_slice(&[0.0, yd]),
            ))
        }
        Recipe::Disk => {
            let (m, r, a) = (p("m"), p("R"), p("A"));
            let (xd, yd, td) = (qd[0], qd[1], qd[2]);
            let denom = m * r * r + a;
            let z = (m * r * xd + a * td) / denom;
            let u = xd - r * td;
            Ok(split_from_parts(
                &[m, m, a],
                DVector::from_row_slice(&[r * z, 0.0, z]),
                DVector::from_row_slice(&[a * u / denom, 0.0, -m * r * u / denom]),
                DVector::from_row_slice(&[0.0, yd, 0.0]),
            ))
        }
        Recipe::Rod => {
            let (m, l, a) = (p("m"), p("L"), p("A"));
            let th = state.q[2];
            let (s, c) = th.sin_cos();
            let (xd, yd, td) = (qd[0], qd[1], qd[2]);
            let b = m * l * l;
            let d_s = b * c * c + a;
            let k = (m * l * xd * s + m * l * yd * c + a * td) / (b + a);
            let w = yd - l * td * c;
            let u = xd - l * s * (m * l * yd * c + a * td) / d_s;
            Ok(split_from_parts(
                &[m, m, a],
                DVector::from_row_slice(&[l * s * k, l * c * k, k]),
                DVector::from_row_slice(&[
                    d_s * u / (b + a),
                    -b * s * c * u / (b + a),
                    -m * l * s * u / (b + a),
                ]),
                DVector::from_row_slice(&[0.0, a * w / d_s, -m * l * c * w / d_s]),
            ))
        }
        Recipe::Custom(_) => unreachable!(),
    }
}

fn split_from_parts(
    masses: &[f64],
    parallel_b: DVector<f64>,
    ortho_b: DVector<f64>,
    ortho_s: DVector<f64>,
) -> VelocitySplit {
    let quad = |v: &DVector<f64>| -> f64 {
        v.iter()
            .zip(masses)
            .map(|(vi, mi)| mi * vi * vi)
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    };
    let norm_ortho_b = quad(&ortho_b);
    let norm_ortho_s = quad(&ortho_s);
    VelocitySplit {
        parallel_b,
        ortho_b,
        ortho_s,
        norm_ortho_b,
        norm_ortho_s,
    }
}

/// Closed-form right velocity of the disk under the static Coulomb law,
/// transcribed from the per-branch formulas. Returns the right velocity and
/// the branch selected by the inequality
///
/// ```text
/// |xd - R td| sqrt(A / (m R^2 + A)) <= mu_s |yd|
/// ```
pub fn disk_outcome_oracle(
    m: f64,
    r: f64,
    a: f64,
    e_s: f64,
    mu_s: f64,
    qdot: &DVector<f64>,
) -> (DVector<f64>, Branch) {
    let (xd, yd, td) = (qdot[0], qdot[1], qdot[2]);
    let denom = m * r * r + a;
    let u = xd - r * td;
    let tangential_speed = u.abs() * (a / denom).sqrt();
    if tangential_speed <= mu_s * yd.abs() {
        let z = (m * r * xd + a * td) / denom;
        (
            DVector::from_row_slice(&[r * z, -e_s * yd, z]),
            Branch::Stick,
        )
    } else {
        let f = mu_s * yd.abs() / tangential_speed;
        (
            DVector::from_row_slice(&[
                xd - f * (a / denom) * u,
                -e_s * yd,
                td + f * (m * r / denom) * u,
            ]),
            Branch::Slip,
        )
    }
}

/// Closed-form right velocity of the rod falling vertically
/// (`xd = td = 0`, `yd < 0`) at angle `th`, under the static Coulomb law.
pub fn rod_vertical_fall_oracle(
    m: f64,
    l: f64,
    a: f64,
    e_s: f64,
    mu_s: f64,
    th: f64,
    yd: f64,
) -> (DVector<f64>, Branch) {
    let (s, c) = th.sin_cos();
    let b = m * l * l;
    let d_s = b * c * c + a;
    let u = -(b * s * c / d_s) * yd;
    let norm_s = (m * a / d_s).sqrt() * yd.abs();
    let norm_b = u.abs() * (m * d_s / (b + a)).sqrt();
    if norm_b <= mu_s * norm_s {
        (
            DVector::from_row_slice(&[
                b * s * c / (b + a) * yd,
                (b * c * c / (b + a) - e_s * a / d_s) * yd,
                (m * l * c / (b + a) + e_s * m * l * c / d_s) * yd,
            ]),
            Branch::Stick,
        )
    } else {
        let ratio = mu_s * norm_s / norm_b;
        (
            DVector::from_row_slice(&[
                ratio * (b * s * c / (b + a)) * yd,
                ((b * c * c - e_s * a) / d_s - ratio * b * b * s * s * c * c / ((b + a) * d_s))
                    * yd,
                (m * l * c / d_s) * (1.0 + e_s - ratio * (b * s * s) / (b + a)) * yd,
            ]),
            Branch::Slip,
        )
    }
}

/// Threshold on `cos^2(th)` below which the rod's stick-branch rebound has a
/// positive vertical velocity:
///
/// ```text
/// cos^2(th) < A / (2 m L^2) * (sqrt(1 + 4 e_s (m L^2 + A) / A) - 1)
/// ```
pub fn rod_rebound_threshold(m: f64, l: f64, a: f64, e_s: f64) -> f64 {
    let b = m * l * l;
    a / (2.0 * b) * ((1.0 + 4.0 * e_s * (b + a) / a).sqrt() - 1.0)
}
