// SPDX-License-Identifier: Apache-2.0

//! Verification against closed-form solutions: residuals of candidate
//! solutions, grid error norms, convergence-order studies, and CSV I/O for
//! grid solutions.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::darboux::{solve_darboux, DarbouxOptions};
use crate::determined::{GridSolution, SolveError};
use crate::expr::{CompiledExpr, Expr, PointEvalError, SlotMap};
use crate::grid::Grid;
use crate::sampling::cube_points;
use crate::system::{x_var, ValidatedSystem};

/// Closed-form expressions in the coordinates, keyed by component variable.
pub type ExprMap = BTreeMap<String, Expr>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("no expression given for component `{0}`")]
    Missing(String),
    #[error("expression for `{name}` uses `{variable}`, which is not a coordinate of the system")]
    NotACoordinate { name: String, variable: String },
    #[error("a convergence study needs at least 3 levels, got {0}")]
    TooFewLevels(usize),
    #[error("level {level} ({points:?} points): {source}")]
    Level { level: usize, points: Vec<usize>, source: SolveError },
    #[error(transparent)]
    Eval(#[from] PointEvalError),
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
}

fn coordinate_slots(labels: &[usize]) -> SlotMap {
    SlotMap::new(labels.iter().map(|&l| x_var(l)))
}

fn compile_map(sys_axes: &[usize], names: &[String], exprs: &ExprMap) -> Result<Vec<CompiledExpr>, HarnessError> {
    let slots = coordinate_slots(sys_axes);
    names
        .iter()
        .map(|name| {
            let e = exprs.get(name).ok_or_else(|| HarnessError::Missing(name.clone()))?;
            if let Some(v) = e.free_vars().into_iter().find(|v| slots.slot(v).is_none()) {
                return Err(HarnessError::NotACoordinate { name: name.clone(), variable: v });
            }
            Ok(CompiledExpr::new(e, &slots).expect("checked"))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquationResidual {
    pub component: String,
    pub axis: usize,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataResidual {
    pub component: String,
    pub max: f64,
}

/// How far closed-form candidates are from satisfying a system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateReport {
    pub equations: Vec<EquationResidual>,
    pub data: Vec<DataResidual>,
    pub samples: usize,
}

impl CandidateReport {
    pub fn equation_residual(&self) -> f64 {
        self.equations.iter().map(|e| e.max).fold(0.0, f64::max)
    }

    pub fn data_residual(&self) -> f64 {
        self.data.iter().map(|e| e.max).fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.equation_residual().max(self.data_residual())
    }
}

/// Samples `|∂_i s^I − F^I_i(x, s(x))|` over the box `|x_k − x̄_k| ≤ r_k`,
/// and `|s^I − ū^I|` over the same box projected onto `{x_I = x̄_I}`.
pub fn candidate_residual(
    sys: &ValidatedSystem,
    candidate: &ExprMap,
    x_radius: &[f64],
    samples: usize,
) -> Result<CandidateReport, HarnessError> {
    let names: Vec<String> = sys.components().iter().map(|c| c.var.clone()).collect();
    compile_map(sys.axes(), &names, candidate)?;
    let slots = coordinate_slots(sys.axes());
    let subst: std::collections::HashMap<String, Expr> =
        names.iter().map(|n| (n.clone(), candidate[n].clone())).collect();
    let center = sys.base_point();
    let points: Vec<Vec<f64>> = cube_points(samples, sys.n())
        .into_iter()
        .map(|p| p.iter().zip(center).zip(x_radius).map(|((t, c), r)| c + r * t).collect())
        .collect();

    let mut equations = Vec::new();
    let mut data = Vec::new();
    for (c, comp) in sys.components().iter().enumerate() {
        let index = &sys.groups()[comp.group].index;
        for &axis in index.axes() {
            let lhs = candidate[&comp.var].diff(&x_var(axis));
            let rhs = sys.equation(c, axis).expect("closed").substitute(&subst);
            let defect = CompiledExpr::new(&(lhs - rhs), &slots).expect("coordinates only");
            let mut max = 0.0f64;
            for p in &points {
                let what = || format!("residual of `{}` along x{axis}", comp.var);
                let v = defect.eval(p).map_err(|e| PointEvalError::at(what(), &slots, p, e))?;
                max = max.max(v.abs());
            }
            equations.push(EquationResidual { component: comp.var.clone(), axis, max });
        }
        let defect = CompiledExpr::new(&(candidate[&comp.var].clone() - sys.data(c).clone()), &slots).expect("checked");
        let positions: Vec<usize> = index.axes().iter().map(|&a| sys.axis_position(a).expect("live")).collect();
        let mut max = 0.0f64;
        for p in &points {
            let mut q = p.clone();
            for &k in &positions {
                q[k] = center[k];
            }
            let what = || format!("data clause of `{}`", comp.var);
            let v = defect.eval(&q).map_err(|e| PointEvalError::at(what(), &slots, &q, e))?;
            max = max.max(v.abs());
        }
        data.push(DataResidual { component: comp.var.clone(), max });
    }
    Ok(CandidateReport { equations, data, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentError {
    pub component: String,
    pub sup: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub components: Vec<ComponentError>,
}

impl ErrorReport {
    pub fn max_sup(&self) -> f64 {
        self.components.iter().map(|c| c.sup).fold(0.0, f64::max)
    }
}

/// Node-wise sup and RMS errors of every solution component.
pub fn error_report(sol: &GridSolution, reference: &ExprMap) -> Result<ErrorReport, HarnessError> {
    let labels = sol.grid.labels();
    let compiled = compile_map(&labels, &sol.names, reference)?;
    let slots = coordinate_slots(&labels);
    let mut components = Vec::new();
    for ((name, field), exact) in sol.names.iter().zip(&sol.fields).zip(&compiled) {
        let (mut sup, mut sq) = (0.0f64, 0.0f64);
        for (f, &v) in field.iter().enumerate() {
            let x = sol.grid.coordinates(f);
            let want = exact.eval(&x).map_err(|e| PointEvalError::at(format!("reference for `{name}`"), &slots, &x, e))?;
            let d = (v - want).abs();
            sup = sup.max(d);
            sq += d * d;
        }
        components.push(ComponentError { component: name.clone(), sup, rms: (sq / field.len() as f64).sqrt() });
    }
    Ok(ErrorReport { components })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    pub points: Vec<usize>,
    /// Largest grid spacing.
    pub spacing: f64,
    /// Largest sup error over components.
    pub sup_error: f64,
    pub iterations: usize,
}

/// Observed order of accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// Every level reproduces the reference exactly.
    Exact,
    Fitted(f64),
    /// Some but not all errors vanish, so no rate can be fitted.
    Undefined,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Exact => write!(f, "exact"),
            Order::Fitted(p) => write!(f, "{p:.3}"),
            Order::Undefined => write!(f, "undefined"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<Level>,
    /// `log2(e_k / e_{k+1})` for successive levels.
    pub ratios: Vec<f64>,
    /// Least-squares slope of `log e` against `log δ`.
    pub order: Order,
    pub reference: String,
}

/// Least-squares slope of `log e` against `log δ`.
pub fn fit_order(spacings: &[f64], errors: &[f64]) -> Order {
    if errors.iter().all(|&e| e == 0.0) {
        return Order::Exact;
    }
    if errors.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Order::Undefined;
    }
    let xs: Vec<f64> = spacings.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Order::Fitted(sxy / sxx)
}

/// Solves on `levels` successively refined grids starting from `base` and
/// fits the order of the sup error against `reference`.
pub fn convergence_study(
    sys: &ValidatedSystem,
    base: &Grid,
    levels: usize,
    reference: &ExprMap,
    opts: &DarbouxOptions,
) -> Result<ConvergenceReport, HarnessError> {
    if levels < 3 {
        return Err(HarnessError::TooFewLevels(levels));
    }
    let mut grid = base.clone();
    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        let points: Vec<usize> = grid.axes().iter().map(|a| a.points).collect();
        let sol = solve_darboux(sys, &grid, opts)
            .map_err(|source| HarnessError::Level { level, points: points.clone(), source })?;
        let errors = error_report(&sol.solution, reference)?;
        out.push(Level {
            points,
            spacing: grid.max_spacing(),
            sup_error: errors.max_sup(),
            iterations: sol.solution.iterations,
        });
        grid = grid.refine();
    }
    let ratios = out.windows(2).map(|w| (w[0].sup_error / w[1].sup_error).log2()).collect();
    let spacings: Vec<f64> = out.iter().map(|l| l.spacing).collect();
    let errors: Vec<f64> = out.iter().map(|l| l.sup_error).collect();
    let order = fit_order(&spacings, &errors);
    let reference = reference.iter().map(|(k, v)| format!("{k} = {v}")).collect::<Vec<_>>().join("; ");
    Ok(ConvergenceReport { levels: out, ratios, order, reference })
}

/// CSV with one row per node (first axis fastest): coordinates, then the
/// listed components, every value to 17 significant digits.
pub fn write_csv(sol: &GridSolution, columns: &[String]) -> Result<String, HarnessError> {
    let fields: Vec<&[f64]> =
        columns.iter().map(|c| sol.field(c).ok_or_else(|| HarnessError::Missing(c.clone()))).collect::<Result<_, _>>()?;
    let mut out = String::new();
    let header: Vec<String> = sol.grid.labels().into_iter().map(x_var).chain(columns.iter().cloned()).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for f in 0..sol.grid.len() {
        let row: Vec<String> = sol
            .grid
            .coordinates(f)
            .into_iter()
            .chain(fields.iter().map(|field| field[f]))
            .map(|v| format!("{v:.16e}"))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// A parsed CSV file: header and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header.iter().position(|h| h == name).map(|k| self.columns[k].as_slice())
    }
}

pub fn read_csv(text: &str) -> Result<CsvTable, HarnessError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or(HarnessError::Csv { line: 1, message: "empty file".into() })?;
    let header: Vec<String> = head.split(',').map(|h| h.trim().to_string()).collect();
    let mut columns = vec![Vec::new(); header.len()];
    for (k, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(HarnessError::Csv {
                line: k + 1,
                message: format!("{} cells, header has {}", cells.len(), header.len()),
            });
        }
        for (col, cell) in columns.iter_mut().zip(cells) {
            let v = cell
                .trim()
                .parse::<f64>()
                .map_err(|e| HarnessError::Csv { line: k + 1, message: format!("`{cell}`: {e}") })?;
            col.push(v);
        }
    }
    Ok(CsvTable { header, columns })
}
