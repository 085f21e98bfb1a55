//! Configuration-space data model and kinetic-metric projections.
//!
//! Everything here is expressed in generalized coordinates. The mass matrix
//! `G(q)` acts as a Riemannian metric on velocity space: all inner products,
//! norms, and orthogonality statements below are taken with respect to `G`,
//! never the Euclidean dot product.
//!
//! A left velocity is decomposed against two nested constraints:
//!
//! ```text
//! qdot = parallel_B + V_B + V_S
//! ```
//!
//! where `V_S` is the metric-orthogonal component relative to the contact
//! surface `s(q) = 0`, `V_B` is tangent to the surface and metric-orthogonal
//! to the stick rows `C(q) qdot = 0`, and `parallel_B` satisfies both
//! constraints. The two projectors have closed weighted-pseudo-inverse
//! forms; an independent KKT-based least-squares oracle
//! ([`projection_oracle`]) is provided for cross-checking them.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::dsl::Expr;
use crate::error::{Error, Result};
use crate::tol;

/// Symmetric positive-definite mass matrix `G(q)`, possibly
/// configuration-dependent through expression entries.
#[derive(Debug, Clone)]
pub struct MassMetric {
    dim: usize,
    form: MetricForm,
}

#[derive(Debug, Clone)]
enum MetricForm {
    Constant(DMatrix<f64>),
    Symbolic {
        coords: Vec<String>,
        entries: Vec<Vec<Expr>>,
    },
}

impl MassMetric {
    /// Constant mass matrix. The matrix must be square and exactly symmetric.
    pub fn constant(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::dim(matrix.nrows(), matrix.ncols(), "mass matrix shape"));
        }
        check_symmetric(&matrix)?;
        Ok(MassMetric {
            dim: matrix.nrows(),
            form: MetricForm::Constant(matrix),
        })
    }

    /// Constant diagonal mass matrix.
    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        MassMetric {
            dim: n,
            form: MetricForm::Constant(DMatrix::from_diagonal(&DVector::from_row_slice(entries))),
        }
    }

    /// Configuration-dependent mass matrix with expression entries over the
    /// named coordinates.
    pub fn from_exprs(coords: Vec<String>, entries: Vec<Vec<Expr>>) -> Result<Self> {
        let n = coords.len();
        if entries.len() != n || entries.iter().any(|row| row.len() != n) {
            return Err(Error::dim(n, entries.len(), "metric expression matrix shape"));
        }
        Ok(MassMetric {
            dim: n,
            form: MetricForm::Symbolic { coords, entries },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when `G` does not depend on the configuration, in which case
    /// free flight under a constant force has an exact quadratic update.
    pub fn is_constant(&self) -> bool {
        matches!(self.form, MetricForm::Constant(_))
    }

    /// Evaluate `G(q)`.
    pub fn evaluate(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        if q.len() != self.dim {
            return Err(Error::dim(self.dim, q.len(), "configuration vector"));
        }
        match &self.form {
            MetricForm::Constant(g) => Ok(g.clone()),
            MetricForm::Symbolic { coords, entries } => {
                let lookup = coord_lookup(coords, q);
                let mut g = DMatrix::zeros(self.dim, self.dim);
                for (i, row) in entries.iter().enumerate() {
                    for (j, entry) in row.iter().enumerate() {
                        g[(i, j)] = entry.eval_with(&lookup)?;
                    }
                }
                Ok(g)
            }
        }
    }

    /// Check symmetry and positive definiteness at a configuration.
    ///
    /// Symmetry must hold exactly; definiteness is certified through the
    /// smallest eigenvalue of the evaluated matrix.
    pub fn validate_at(&self, q: &DVector<f64>) -> Result<()> {
        let g = self.evaluate(q)?;
        check_symmetric(&g)?;
        let min_eig = g
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig <= 0.0 {
            return Err(Error::MetricNotPositiveDefinite { eigenvalue: min_eig });
        }
        Ok(())
    }
}

fn check_symmetric(g: &DMatrix<f64>) -> Result<()> {
    for i in 0..g.nrows() {
        for j in (i + 1)..g.ncols() {
            let dev = (g[(i, j)] - g[(j, i)]).abs();
            if dev != 0.0 {
                return Err(Error::MetricNotSymmetric { i, j, deviation: dev });
            }
        }
    }
    Ok(())
}

fn coord_lookup<'a>(
    coords: &'a [String],
    q: &'a DVector<f64>,
) -> impl Fn(&str) -> Option<f64> + 'a {
    move |name: &str| {
        coords
            .iter()
            .position(|c| c == name)
            .map(|i| q[i])
    }
}

/// State of the system: time, configuration, generalized velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedState {
    pub time: f64,
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
}

impl GeneralizedState {
    pub fn new(time: f64, q: DVector<f64>, qdot: DVector<f64>) -> Result<Self> {
        if q.len() != qdot.len() {
            return Err(Error::dim(q.len(), qdot.len(), "velocity vector"));
        }
        Ok(GeneralizedState { time, q, qdot })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }
}

/// Scalar unilateral constraint `s(q) = 0` with `s > 0` the admissible open
/// region and an explicit gradient row.
#[derive(Debug, Clone)]
pub struct ContactSurface {
    dim: usize,
    form: SurfaceForm,
}

#[derive(Debug, Clone)]
enum SurfaceForm {
    Linear {
        row: RowDVector<f64>,
        offset: f64,
    },
    Symbolic {
        coords: Vec<String>,
        value: Expr,
        gradient: Vec<Expr>,
    },
}

impl ContactSurface {
    /// Affine surface `s(q) = row . q - offset`.
    pub fn linear(row: RowDVector<f64>, offset: f64) -> Result<Self> {
        if row.iter().all(|v| *v == 0.0) {
            return Err(Error::DegenerateSurface { norm: 0.0 });
        }
        Ok(ContactSurface {
            dim: row.len(),
            form: SurfaceForm::Linear { row, offset },
        })
    }

    /// Surface from an expression; the gradient is derived symbolically.
    pub fn from_expr(coords: Vec<String>, value: Expr) -> Result<Self> {
        let gradient = coords
            .iter()
            .map(|c| value.differentiate(c))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(ContactSurface {
            dim: coords.len(),
            form: SurfaceForm::Symbolic {
                coords,
                value,
                gradient,
            },
        })
    }

    /// Surface with a hand-written gradient (bypasses symbolic
    /// differentiation; diagnostic checks compare it to finite differences).
    pub fn from_expr_with_gradient(
        coords: Vec<String>,
        value: Expr,
        gradient: Vec<Expr>,
    ) -> Result<Self> {
        if gradient.len() != coords.len() {
            return Err(Error::dim(coords.len(), gradient.len(), "surface gradient"));
        }
        Ok(ContactSurface {
            dim: coords.len(),
            form: SurfaceForm::Symbolic {
                coords,
                value,
                gradient,
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluate `s(q)`.
    pub fn value(&self, q: &DVector<f64>) -> Result<f64> {
        if q.len() != self.dim {
            return Err(Error::dim(self.dim, q.len(), "configuration vector"));
        }
        match &self.form {
            SurfaceForm::Linear { row, offset } => Ok(row.dot(&q.transpose()) - offset),
            SurfaceForm::Symbolic { coords, value, .. } => {
                Ok(value.eval_with(&coord_lookup(coords, q))?)
            }
        }
    }

    /// Evaluate the gradient row and reject a vanishing one.
    pub fn gradient(&self, q: &DVector<f64>) -> Result<RowDVector<f64>> {
        if q.len() != self.dim {
            return Err(Error::dim(self.dim, q.len(), "configuration vector"));
        }
        let row = match &self.form {
            SurfaceForm::Linear { row, .. } => row.clone(),
            SurfaceForm::Symbolic {
                coords, gradient, ..
            } => {
                let lookup = coord_lookup(coords, q);
                let mut row = RowDVector::zeros(self.dim);
                for (j, entry) in gradient.iter().enumerate() {
                    row[j] = entry.eval_with(&lookup)?;
                }
                row
            }
        };
        let norm = row.norm();
        if norm == 0.0 {
            return Err(Error::DegenerateSurface { norm });
        }
        Ok(row)
    }
}

/// Linear velocity conditions `C(q) qdot = 0` expressing that the contact
/// point of the system is momentarily at rest.
#[derive(Debug, Clone)]
pub struct StickConstraint {
    dim: usize,
    k: usize,
    form: StickForm,
}

#[derive(Debug, Clone)]
enum StickForm {
    Constant(DMatrix<f64>),
    Symbolic {
        coords: Vec<String>,
        rows: Vec<Vec<Expr>>,
    },
}

impl StickConstraint {
    /// Constant row map. Requires `1 <= k <= n - 1`.
    pub fn constant(rows: DMatrix<f64>) -> Result<Self> {
        let (k, n) = (rows.nrows(), rows.ncols());
        check_stick_shape(k, n)?;
        Ok(StickConstraint {
            dim: n,
            k,
            form: StickForm::Constant(rows),
        })
    }

    /// Configuration-dependent row map with expression entries.
    pub fn from_exprs(coords: Vec<String>, rows: Vec<Vec<Expr>>) -> Result<Self> {
        let n = coords.len();
        let k = rows.len();
        check_stick_shape(k, n)?;
        if rows.iter().any(|row| row.len() != n) {
            return Err(Error::dim(n, rows[0].len(), "stick row width"));
        }
        Ok(StickConstraint {
            dim: n,
            k,
            form: StickForm::Symbolic { coords, rows },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stick rows `k`.
    pub fn row_count(&self) -> usize {
        self.k
    }

    /// Evaluate `C(q)`.
    pub fn evaluate(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        if q.len() != self.dim {
            return Err(Error::dim(self.dim, q.len(), "configuration vector"));
        }
        match &self.form {
            StickForm::Constant(rows) => Ok(rows.clone()),
            StickForm::Symbolic { coords, rows } => {
                let lookup = coord_lookup(coords, q);
                let mut c = DMatrix::zeros(self.k, self.dim);
                for (i, row) in rows.iter().enumerate() {
                    for (j, entry) in row.iter().enumerate() {
                        c[(i, j)] = entry.eval_with(&lookup)?;
                    }
                }
                Ok(c)
            }
        }
    }
}

fn check_stick_shape(k: usize, n: usize) -> Result<()> {
    if k == 0 || k + 1 > n {
        return Err(Error::DegenerateConstraint(format!(
            "stick rows must satisfy 1 <= k <= n - 1, got k = {k}, n = {n}"
        )));
    }
    Ok(())
}

/// Triple decomposition of a left velocity, with kinetic-metric norms of the
/// two orthogonal parts.
#[derive(Debug, Clone)]
pub struct VelocitySplit {
    /// Spatial part satisfying both the tangency and stick conditions.
    pub parallel_b: DVector<f64>,
    /// Tangent to the surface, metric-orthogonal to the stick kernel.
    pub ortho_b: DVector<f64>,
    /// Metric-orthogonal to the surface.
    pub ortho_s: DVector<f64>,
    pub norm_ortho_b: f64,
    pub norm_ortho_s: f64,
}

impl VelocitySplit {
    /// Reconstruct the decomposed velocity.
    pub fn reconstruct(&self) -> DVector<f64> {
        &self.parallel_b + &self.ortho_b + &self.ortho_s
    }
}

/// Metric inner product `u^T G(q) v`.
pub fn metric_inner(
    metric: &MassMetric,
    q: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<f64> {
    let n = metric.dim();
    if u.len() != n {
        return Err(Error::dim(n, u.len(), "left vector"));
    }
    if v.len() != n {
        return Err(Error::dim(n, v.len(), "right vector"));
    }
    let g = metric.evaluate(q)?;
    Ok((u.transpose() * &g * v)[(0, 0)])
}

/// Kinetic-metric norm `sqrt(v^T G v)`, clamped against tiny negative
/// round-off.
pub fn metric_norm(metric: &MassMetric, q: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    Ok(metric_inner(metric, q, v, v)?.max(0.0).sqrt())
}

/// Kinetic energy `T = 1/2 qdot^T G qdot`.
pub fn kinetic_energy(metric: &MassMetric, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<f64> {
    Ok(0.5 * metric_inner(metric, q, qdot, qdot)?)
}

/// Surface-orthogonal component of the velocity:
///
/// ```text
/// V_S = G^-1 grad^T (grad G^-1 grad^T)^-1 (grad . qdot)
/// ```
///
/// the unique metric-orthogonal projection of `qdot` onto the metric-normal
/// line of the surface.
pub fn project_ortho_s(
    metric: &MassMetric,
    surface: &ContactSurface,
    state: &GeneralizedState,
) -> Result<DVector<f64>> {
    let g = metric.evaluate(&state.q)?;
    let grad = surface.gradient(&state.q)?;
    ortho_s_with(&g, &grad, &state.qdot)
}

fn ortho_s_with(
    g: &DMatrix<f64>,
    grad: &RowDVector<f64>,
    qdot: &DVector<f64>,
) -> Result<DVector<f64>> {
    if grad.len() != g.nrows() || qdot.len() != g.nrows() {
        return Err(Error::dim(g.nrows(), qdot.len(), "velocity vector"));
    }
    let chol = spd_cholesky(g)?;
    let x = chol.solve(&grad.transpose());
    let denom = (grad * &x)[(0, 0)];
    if !(denom > 0.0) {
        return Err(Error::DegenerateSurface { norm: grad.norm() });
    }
    let coeff = (grad * qdot)[(0, 0)] / denom;
    Ok(x * coeff)
}

/// Component tangent to the surface and metric-orthogonal to the stick
/// kernel, computed inside the tangent space of the surface.
///
/// The tangent space is spanned by an orthonormal (Euclidean) basis of
/// `ker(grad)`; the metric and the stick rows are restricted to that basis
/// and the weighted projection is carried out there, so the result is
/// guaranteed tangent to the surface.
pub fn project_ortho_b(
    metric: &MassMetric,
    surface: &ContactSurface,
    stick: &StickConstraint,
    state: &GeneralizedState,
) -> Result<DVector<f64>> {
    let g = metric.evaluate(&state.q)?;
    let grad = surface.gradient(&state.q)?;
    let c = stick.evaluate(&state.q)?;
    let v_s = ortho_s_with(&g, &grad, &state.qdot)?;
    let tangential = &state.qdot - &v_s;
    ortho_b_with(&g, &grad, &c, &tangential)
}

fn ortho_b_with(
    g: &DMatrix<f64>,
    grad: &RowDVector<f64>,
    c: &DMatrix<f64>,
    tangential: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = g.nrows();
    if c.ncols() != n {
        return Err(Error::dim(n, c.ncols(), "stick row width"));
    }
    let basis = tangent_basis(grad)?;
    let g_t = basis.transpose() * g * &basis;
    let c_t = c * &basis;
    let z = basis.transpose() * tangential;

    let chol_t = spd_cholesky(&g_t)?;
    // Y = G_t^-1 C_t^T, M = C_t G_t^-1 C_t^T
    let y = chol_t.solve(&c_t.transpose());
    let m = &c_t * &y;
    let chol_m = spd_cholesky(&m).map_err(|_| {
        Error::DegenerateConstraint(
            "stick rows are rank deficient, or the stack of surface gradient and stick rows is"
                .into(),
        )
    })?;
    let w = chol_m.solve(&(&c_t * &z));
    Ok(&basis * (y * w))
}

/// Orthonormal basis of the Euclidean kernel of the gradient row, via one
/// Householder reflection mapping the normalized gradient onto an axis.
fn tangent_basis(grad: &RowDVector<f64>) -> Result<DMatrix<f64>> {
    let n = grad.len();
    let norm = grad.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateSurface { norm });
    }
    let u = grad.transpose() / norm;
    let sign = if u[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut w = u;
    w[0] += sign;
    let wtw = w.dot(&w);
    // H = I - 2 w w^T / (w^T w); column 0 is parallel to the gradient,
    // columns 1..n span its orthogonal complement.
    let h = DMatrix::identity(n, n) - (&w * w.transpose()) * (2.0 / wtw);
    Ok(h.columns(1, n - 1).into_owned())
}

/// Full decomposition of the state's velocity.
pub fn triple_split(
    metric: &MassMetric,
    surface: &ContactSurface,
    stick: &StickConstraint,
    state: &GeneralizedState,
) -> Result<VelocitySplit> {
    let g = metric.evaluate(&state.q)?;
    let grad = surface.gradient(&state.q)?;
    let c = stick.evaluate(&state.q)?;
    let ortho_s = ortho_s_with(&g, &grad, &state.qdot)?;
    let tangential = &state.qdot - &ortho_s;
    let ortho_b = ortho_b_with(&g, &grad, &c, &tangential)?;
    let parallel_b = &tangential - &ortho_b;
    let norm_ortho_b = quad_norm(&g, &ortho_b);
    let norm_ortho_s = quad_norm(&g, &ortho_s);
    Ok(VelocitySplit {
        parallel_b,
        ortho_b,
        ortho_s,
        norm_ortho_b,
        norm_ortho_s,
    })
}

fn quad_norm(g: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    (v.transpose() * g * v)[(0, 0)].max(0.0).sqrt()
}

/// Independent least-squares reference for the projectors.
///
/// Returns `argmin_w (v - w)^T G (v - w)` subject to `rows . w = 0`, solved
/// through the dense KKT system
///
/// ```text
/// [ G   R^T ] [ w      ]   [ G v ]
/// [ R    0  ] [ lambda ] = [  0  ]
/// ```
///
/// with full-pivot LU — a code path fully independent of the Cholesky-based
/// closed forms it is used to verify. The orthogonal component is `v - w`.
pub fn projection_oracle(
    g: &DMatrix<f64>,
    rows: &DMatrix<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::dim(n, g.ncols(), "metric matrix shape"));
    }
    if v.len() != n {
        return Err(Error::dim(n, v.len(), "vector"));
    }
    let m = rows.nrows();
    if m == 0 {
        return Ok(v.clone());
    }
    if rows.ncols() != n {
        return Err(Error::dim(n, rows.ncols(), "constraint row width"));
    }
    let size = n + m;
    let mut kkt = DMatrix::zeros(size, size);
    kkt.view_mut((0, 0), (n, n)).copy_from(g);
    kkt.view_mut((0, n), (n, m)).copy_from(&rows.transpose());
    kkt.view_mut((n, 0), (m, n)).copy_from(rows);
    let mut rhs = DVector::zeros(size);
    rhs.rows_mut(0, n).copy_from(&(g * v));
    let lu = kkt.full_piv_lu();
    let sol = lu.solve(&rhs).ok_or(Error::RankDeficient {
        ratio: 0.0,
        threshold: tol::PIVOT_RATIO_MIN,
    })?;
    Ok(sol.rows(0, n).into_owned())
}

/// Cholesky factorization that reports numerical rank deficiency when the
/// pivot ratio drops below [`tol::PIVOT_RATIO_MIN`].
fn spd_cholesky(g: &DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let chol = g.clone().cholesky().ok_or(Error::RankDeficient {
        ratio: 0.0,
        threshold: tol::PIVOT_RATIO_MIN,
    })?;
    let l = chol.l_dirty();
    let mut min_piv = f64::INFINITY;
    let mut max_piv = 0.0_f64;
    for i in 0..g.nrows() {
        let piv = l[(i, i)] * l[(i, i)];
        min_piv = min_piv.min(piv);
        max_piv = max_piv.max(piv);
    }
    let ratio = if max_piv > 0.0 { min_piv / max_piv } else { 0.0 };
    if ratio < tol::PIVOT_RATIO_MIN {
        return Err(Error::RankDeficient {
            ratio,
            threshold: tol::PIVOT_RATIO_MIN,
        });
    }
    Ok(chol)
}

/// Scale-aware zero threshold for velocity-space norms:
/// `ZERO_VEL_REL * (1 + |qdot|_G)`.
pub fn zero_velocity_threshold(
    metric: &MassMetric,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
) -> Result<f64> {
    Ok(tol::ZERO_VEL_REL * (1.0 + metric_norm(metric, q, qdot)?))
}

/// Convenience: evaluate s, gradient, and the approach speed `grad . qdot`.
pub fn surface_data(
    surface: &ContactSurface,
    state: &GeneralizedState,
) -> Result<(f64, RowDVector<f64>, f64)> {
    let s = surface.value(&state.q)?;
    let grad = surface.gradient(&state.q)?;
    let approach = (&grad * &state.qdot)[(0, 0)];
    Ok((s, grad, approach))
}

/// Build expression entries for symbolic constructors out of strings.
///
/// Parameters are substituted as constants, so the resulting expressions
/// depend on coordinates only.
pub fn parse_entries(
    texts: &[Vec<String>],
    params: &BTreeMap<String, f64>,
) -> Result<Vec<Vec<Expr>>> {
    texts
        .iter()
        .map(|row| {
            row.iter()
                .map(|text| Ok(crate::dsl::parse(text)?.substitute(params)))
                .collect()
        })
        .collect()
}
