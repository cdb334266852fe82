// SPDX-License-Identifier: Apache-2.0

//! Picard iteration for determined systems on tensor grids.
//!
//! Component `c`, prescribed along axis `i`, is updated by
//! `u_c(x) = φ_c(x'^i) + ∫_{x̄_i}^{x_i} F_c(x'^i_ξ, u(x'^i_ξ)) dξ`, the
//! integral taken by the composite trapezoid rule outward from the base node
//! along each grid line.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{CompiledExpr, PointEvalError, SlotMap};
use crate::grid::{Grid, GridError};
use crate::sampling::{cube_points, cube_to_l1_ball};
use crate::system::{x_var, RestrictError, ValidatedSystem};

/// Starting iterate for the Picard sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// `u⁰ = φ`, the data extended constantly along each prescribed axis.
    #[default]
    DataExtension,
    Zeros,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PicardOptions {
    /// Absolute sup-norm tolerance on successive iterates.
    pub tol: f64,
    pub max_iter: usize,
    pub init: Init,
    /// Samples for the constants estimate attached to each solution; 0 skips it.
    pub constants_samples: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: 1e-12, max_iter: 200, init: Init::DataExtension, constants_samples: 1024 }
    }
}

/// Consecutive growing updates that count as divergence.
const DIVERGENCE_RUN: usize = 5;

/// Sampled estimates of the existence-theorem constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constants {
    /// Radius of the x-ball (1-norm).
    pub a: f64,
    /// Radius of the u-ball (1-norm) around the data at the base point.
    pub b: f64,
    /// Lipschitz bound of the right-hand sides in u.
    pub l: f64,
    /// Sup bound of the right-hand sides.
    pub m: f64,
    /// `min(a, b / (2 M N))`, or `a` when `M = 0`.
    pub sigma: f64,
    /// Number of scalar unknowns.
    pub n: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstantsError {
    #[error("constants are defined for determined systems only")]
    NotDetermined,
    #[error("radii must be positive and finite (a = {a}, b = {b})")]
    BadRadius { a: f64, b: f64 },
    #[error(transparent)]
    Eval(#[from] PointEvalError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("system is not determined; use the overdetermined solver")]
    NotDetermined,
    #[error("grid does not match the system: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("data field for `{0}` has the wrong length")]
    DataShape(String),
    #[error(
        "no convergence after {iterations} iterations: last update {last_update:e}{}; \
         suspected L*sigma >= 1, try a smaller box",
        ratio.map(|r| format!(", apparent contraction ratio {r:.3}")).unwrap_or_default()
    )]
    NonConvergence { iterations: usize, last_update: f64, ratio: Option<f64> },
    #[error("iteration diverges: update grew for {DIVERGENCE_RUN} consecutive sweeps (iteration {iteration}, update {last_update:e})")]
    Divergence { iteration: usize, last_update: f64 },
    #[error(transparent)]
    Eval(#[from] PointEvalError),
    #[error(transparent)]
    Restrict(#[from] RestrictError),
    #[error("no subsystem solution for `{unknown}` on the hyperplane x{axis} = const")]
    MissingSubsolution { axis: usize, unknown: String },
    #[error("system {axis} (restriction to x{axis} = const): {source}")]
    Subsystem { axis: usize, source: Box<SolveError> },
}

impl SolveError {
    /// True for the iteration failing to settle (as opposed to bad input).
    pub fn is_non_convergence(&self) -> bool {
        match self {
            SolveError::NonConvergence { .. } | SolveError::Divergence { .. } => true,
            SolveError::Subsystem { source, .. } => source.is_non_convergence(),
            _ => false,
        }
    }

    /// Chain of restriction axes leading to the failing subsystem.
    pub fn recursion_path(&self) -> Vec<usize> {
        match self {
            SolveError::Subsystem { axis, source } => {
                let mut path = vec![*axis];
                path.extend(source.recursion_path());
                path
            }
            _ => Vec::new(),
        }
    }
}

/// Fields on a grid, one per scalar component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSolution {
    pub grid: Grid,
    /// Component variable names, in the order of `fields`.
    pub names: Vec<String>,
    pub fields: Vec<Vec<f64>>,
    pub iterations: usize,
    pub final_update: f64,
    /// Sup-norm update of every sweep.
    pub updates: Vec<f64>,
    pub constants: Option<Constants>,
}

impl GridSolution {
    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|k| self.fields[k].as_slice())
    }
}

/// Grid centred at the system's base point.
pub fn grid_for(sys: &ValidatedSystem, half_widths: &[f64], points: &[usize]) -> Result<Grid, GridError> {
    Grid::build(sys.axes(), sys.base_point(), half_widths, points)
}

pub(crate) fn check_grid(sys: &ValidatedSystem, grid: &Grid) -> Result<(), SolveError> {
    if grid.labels() != sys.axes() {
        return Err(SolveError::GridMismatch(format!("grid axes {:?}, system axes {:?}", grid.labels(), sys.axes())));
    }
    if grid.center() != sys.base_point() {
        return Err(SolveError::GridMismatch(format!(
            "grid centre {:?} is not the base point {:?}",
            grid.center(),
            sys.base_point()
        )));
    }
    Ok(())
}

/// Prescribed axis of every component of a determined system.
fn component_axes(sys: &ValidatedSystem) -> Vec<usize> {
    sys.components().iter().map(|c| sys.groups()[c.group].index.min_axis()).collect()
}

/// Estimates `M`, `L` and `σ` by sampling `|x − x̄|₁ ≤ a`, `|u − φ̄|₁ ≤ b`.
pub fn estimate_constants(sys: &ValidatedSystem, a: f64, b: f64, samples: usize) -> Result<Constants, ConstantsError> {
    if !sys.is_determined() {
        return Err(ConstantsError::NotDetermined);
    }
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(ConstantsError::BadRadius { a, b });
    }
    let slots = sys.slot_map();
    let axes = component_axes(sys);
    let rhs: Vec<CompiledExpr> = (0..sys.scalar_count())
        .map(|c| CompiledExpr::new(sys.equation(c, axes[c]).expect("determined"), &slots).expect("closed system"))
        .collect();
    let phi_bar = sys.data_at_base().map_err(|source| PointEvalError {
        what: "data at the base point".into(),
        point: sys.axes().iter().map(|&l| x_var(l)).zip(sys.base_point().iter().copied()).collect(),
        source,
    })?;
    let (n, big_n) = (sys.n(), sys.scalar_count());

    let mut m = 0.0f64;
    let mut l = 0.0f64;
    let mut p = vec![0.0; slots.len()];
    let mut q = vec![0.0; slots.len()];
    for cube in cube_points(samples, n + 2 * big_n) {
        let x = cube_to_l1_ball(&cube[..n]);
        let u = cube_to_l1_ball(&cube[n..n + big_n]);
        let v = cube_to_l1_ball(&cube[n + big_n..]);
        for k in 0..n {
            p[k] = sys.base_point()[k] + a * x[k];
            q[k] = p[k];
        }
        let mut du = 0.0;
        for k in 0..big_n {
            p[n + k] = phi_bar[k] + b * u[k];
            q[n + k] = phi_bar[k] + b * v[k];
            du += (p[n + k] - q[n + k]).abs();
        }
        for (c, f) in rhs.iter().enumerate() {
            let what = || format!("right-hand side of `{}`", sys.components()[c].var);
            let fp = f.eval(&p).map_err(|e| PointEvalError::at(what(), &slots, &p, e))?;
            let fq = f.eval(&q).map_err(|e| PointEvalError::at(what(), &slots, &q, e))?;
            m = m.max(fp.abs()).max(fq.abs());
            if du > 0.0 {
                l = l.max((fp - fq).abs() / du);
            }
        }
    }
    let sigma = if m == 0.0 { a } else { a.min(b / (2.0 * m * big_n as f64)) };
    Ok(Constants { a, b, l, m, sigma, n: big_n, samples })
}

/// Solves a determined system with data taken from its data expressions.
pub fn solve_determined(sys: &ValidatedSystem, grid: &Grid, opts: &PicardOptions) -> Result<GridSolution, SolveError> {
    if !sys.is_determined() {
        return Err(SolveError::NotDetermined);
    }
    check_grid(sys, grid)?;
    let axes = component_axes(sys);
    let mut data = Vec::with_capacity(sys.scalar_count());
    for (c, &axis) in axes.iter().enumerate() {
        let slice = grid.slice(axis)?;
        data.push(evaluate_on_grid(sys.data(c), &slice, || format!("data for `{}`", sys.components()[c].var))?);
    }
    solve_determined_with_data(sys, grid, &data, opts)
}

/// Evaluates an expression in the grid's coordinates at every node.
pub fn evaluate_on_grid(
    expr: &crate::expr::Expr,
    grid: &Grid,
    what: impl Fn() -> String,
) -> Result<Vec<f64>, PointEvalError> {
    let slots = SlotMap::new(grid.labels().into_iter().map(x_var));
    let compiled = CompiledExpr::new(expr, &slots).map_err(|e| PointEvalError { what: what(), point: Vec::new(), source: e })?;
    let mut coords = Vec::with_capacity(grid.dim());
    (0..grid.len())
        .map(|f| {
            grid.write_coordinates(f, &mut coords);
            compiled.eval(&coords).map_err(|e| PointEvalError::at(what(), &slots, &coords, e))
        })
        .collect()
}

/// Solves a determined system whose data are given as fields: `data[c]`
/// holds component `c` on `grid.slice(axis of c)`.
pub fn solve_determined_with_data(
    sys: &ValidatedSystem,
    grid: &Grid,
    data: &[Vec<f64>],
    opts: &PicardOptions,
) -> Result<GridSolution, SolveError> {
    if !sys.is_determined() {
        return Err(SolveError::NotDetermined);
    }
    check_grid(sys, grid)?;
    let big_n = sys.scalar_count();
    let len = grid.len();
    let axes = component_axes(sys);

    // φ extended constantly along each prescribed axis.
    let mut phi = Vec::with_capacity(big_n);
    for c in 0..big_n {
        if data.get(c).map(Vec::len) != Some(grid.slice(axes[c])?.len()) {
            return Err(SolveError::DataShape(sys.components()[c].var.clone()));
        }
        let proj = grid.projection(axes[c])?;
        phi.push(proj.iter().map(|&s| data[c][s]).collect::<Vec<f64>>());
    }

    let slots = sys.slot_map();
    let rhs: Vec<CompiledExpr> = (0..big_n)
        .map(|c| CompiledExpr::new(sys.equation(c, axes[c]).expect("determined"), &slots).expect("closed system"))
        .collect();
    let n = grid.dim();
    let coords: Vec<f64> = (0..len).flat_map(|f| grid.coordinates(f)).collect();
    let lines: Vec<(usize, usize, f64)> = axes
        .iter()
        .map(|&a| {
            let p = grid.position(a).expect("checked");
            (grid.axes()[p].points, grid.stride(p), grid.axes()[p].spacing())
        })
        .collect();

    let mut u: Vec<Vec<f64>> = match opts.init {
        Init::DataExtension => phi.clone(),
        Init::Zeros => vec![vec![0.0; len]; big_n],
    };
    let mut updates = Vec::new();
    let mut growth_run = 0;
    // Node-major integrand buffer.
    let mut g = vec![0.0; len * big_n];

    for iteration in 1..=opts.max_iter {
        let failure = g
            .par_chunks_mut(big_n.max(1))
            .enumerate()
            .filter_map(|(f, out)| {
                let mut vals = Vec::with_capacity(n + big_n);
                vals.extend_from_slice(&coords[f * n..(f + 1) * n]);
                vals.extend(u.iter().map(|field| field[f]));
                for (c, slot) in out.iter_mut().enumerate() {
                    match rhs[c].eval(&vals) {
                        Ok(v) => *slot = v,
                        Err(e) => {
                            let what = format!("right-hand side of `{}`", sys.components()[c].var);
                            return Some((f, PointEvalError::at(what, &slots, &vals, e)));
                        }
                    }
                }
                None
            })
            .min_by_key(|(f, _)| *f);
        if let Some((_, err)) = failure {
            return Err(err.into());
        }

        let next: Vec<Vec<f64>> = (0..big_n)
            .into_par_iter()
            .map(|c| {
                let (m, stride, h) = lines[c];
                let mut field = phi[c].clone();
                let mid = m / 2;
                let at = |start: usize, k: usize| start + k * stride;
                for start in (0..len).filter(|f| (f / stride) % m == 0) {
                    let gi = |k: usize| g[at(start, k) * big_n + c];
                    let mut acc = 0.0;
                    for k in mid + 1..m {
                        acc += 0.5 * h * (gi(k - 1) + gi(k));
                        field[at(start, k)] += acc;
                    }
                    acc = 0.0;
                    for k in (0..mid).rev() {
                        acc -= 0.5 * h * (gi(k) + gi(k + 1));
                        field[at(start, k)] += acc;
                    }
                }
                field
            })
            .collect();

        let update = next
            .iter()
            .zip(&u)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0f64, |m, d| if d.is_nan() || m.is_nan() { f64::NAN } else { m.max(d) });
        u = next;
        if !update.is_finite() {
            return Err(SolveError::Divergence { iteration, last_update: update });
        }
        if updates.last().is_some_and(|&prev| update > prev) {
            growth_run += 1;
        } else {
            growth_run = 0;
        }
        updates.push(update);
        if update <= opts.tol {
            let constants = (opts.constants_samples > 0)
                .then(|| {
                    let a: f64 = grid.axes().iter().map(|ax| ax.half_width).sum();
                    estimate_constants(sys, a, 1.0, opts.constants_samples).ok()
                })
                .flatten();
            return Ok(GridSolution {
                grid: grid.clone(),
                names: sys.components().iter().map(|c| c.var.clone()).collect(),
                fields: u,
                iterations: iteration,
                final_update: update,
                updates,
                constants,
            });
        }
        if growth_run >= DIVERGENCE_RUN {
            return Err(SolveError::Divergence { iteration, last_update: update });
        }
    }
    let k = updates.len();
    let ratio = (k >= 2 && updates[k - 2] > 0.0).then(|| updates[k - 1] / updates[k - 2]);
    Err(SolveError::NonConvergence { iterations: k, last_update: updates.last().copied().unwrap_or(f64::NAN), ratio })
}

#[cfg(test)]
mod tests;
