// SPDX-License-Identifier: Apache-2.0

//! The mixed-partial identity for overdetermined systems.
//!
//! For `i < j` in `I`, the two ways of computing `(u^I_{x_i})_{x_j}` after
//! substituting the system must agree identically in `(x, U)`:
//!
//! `F^I_{i,x_j} + Σ_{J ∈ 𝓘^I_i} F^I_{i,u^J} F^J_j = F^I_{j,x_i} + Σ_{J ∈ 𝓘^I_j} F^I_{j,u^J} F^J_i`.
//!
//! The identity is checked by sampling a box around the base point and the
//! base data, with a tolerance relative to the size of the individual terms.

use rayon::prelude::*;
use serde::Serialize;

use crate::expr::{CompiledExpr, Env, EvalError, Expr, PointEvalError, SlotMap};
use crate::sampling::cube_points;
use crate::system::{x_var, MultiIndex, ValidatedSystem, Violation};

/// One side of the identity for a single scalar component: the list of
/// terms whose sum is `(u^I_{x_i})_{x_j}`.
#[derive(Debug, Clone)]
struct Side {
    terms: Vec<Expr>,
}

impl Side {
    fn build(sys: &ValidatedSystem, c: usize, index: &MultiIndex, i: usize, j: usize) -> Side {
        let f = sys.equation(c, i).expect("closed system");
        let mut terms = vec![f.diff(&x_var(j))];
        for d in sys.dependency_components(index, i) {
            let var = &sys.components()[d].var;
            if f.depends_on(var) {
                let rhs_j = sys.equation(d, j).expect("j lies in every J containing I minus i");
                terms.push((f.diff(var) * rhs_j.clone()).simplify());
            }
        }
        terms.retain(|t| !t.is_zero());
        Side { terms }
    }
}

/// Both sides of the identity for every component of the group with index `I`.
#[derive(Debug, Clone)]
pub struct Identity {
    pub index: MultiIndex,
    pub i: usize,
    pub j: usize,
    sides: Vec<(Side, Side)>,
}

impl Identity {
    /// Panics unless `i != j` both lie in `I ∈ 𝓘` and the system has no dependency violations.
    pub fn new(sys: &ValidatedSystem, index: &MultiIndex, i: usize, j: usize) -> Identity {
        assert!(i != j && index.contains(i) && index.contains(j), "need i != j in {index}");
        let group = sys.group(index).unwrap_or_else(|| panic!("{index} is not a multi-index of the system"));
        let sides = group
            .components
            .iter()
            .map(|&c| (Side::build(sys, c, index, i, j), Side::build(sys, c, index, j, i)))
            .collect();
        Identity { index: index.clone(), i, j, sides }
    }

    fn compile(&self, slots: &SlotMap) -> CompiledIdentity {
        let compile_side = |s: &Side| {
            s.terms.iter().map(|t| CompiledExpr::new(t, slots).expect("terms use system variables")).collect()
        };
        CompiledIdentity { sides: self.sides.iter().map(|(a, b)| (compile_side(a), compile_side(b))).collect() }
    }
}

struct CompiledIdentity {
    sides: Vec<(Vec<CompiledExpr>, Vec<CompiledExpr>)>,
}

impl CompiledIdentity {
    /// `(residual, scale)` maximised over components.
    fn eval(&self, values: &[f64]) -> Result<(f64, f64), EvalError> {
        let mut residual = 0.0f64;
        let mut biggest = 0.0f64;
        for (lhs, rhs) in &self.sides {
            let mut diff = 0.0;
            for t in lhs {
                let v = t.eval(values)?;
                biggest = biggest.max(v.abs());
                diff += v;
            }
            for t in rhs {
                let v = t.eval(values)?;
                biggest = biggest.max(v.abs());
                diff -= v;
            }
            residual = residual.max(diff.abs());
        }
        Ok((residual, 1.0 + biggest))
    }
}

/// All triples `(I, i, j)` with `i < j ∈ I`.
pub fn triples(sys: &ValidatedSystem) -> Vec<(MultiIndex, usize, usize)> {
    let mut out = Vec::new();
    for g in sys.groups() {
        let axes = g.index.axes();
        for (a, &i) in axes.iter().enumerate() {
            for &j in &axes[a + 1..] {
                out.push((g.index.clone(), i, j));
            }
        }
    }
    out
}

fn values_from_env(slots: &SlotMap, env: &Env) -> Result<Vec<f64>, EvalError> {
    slots.names().iter().map(|n| env.get(n).ok_or_else(|| EvalError::Unbound(n.clone()))).collect()
}

/// `|lhs − rhs|` of the identity for `(I, i, j)` at a point, maximised over
/// the components of `u^I`. The environment binds every `x<label>` and
/// every component variable.
pub fn residual_at_point(
    sys: &ValidatedSystem,
    index: &MultiIndex,
    i: usize,
    j: usize,
    point: &Env,
) -> Result<f64, EvalError> {
    residual_and_scale_at_point(sys, index, i, j, point).map(|(r, _)| r)
}

/// Residual together with `1 + max |term|`.
pub fn residual_and_scale_at_point(
    sys: &ValidatedSystem,
    index: &MultiIndex,
    i: usize,
    j: usize,
    point: &Env,
) -> Result<(f64, f64), EvalError> {
    let slots = sys.slot_map();
    let values = values_from_env(&slots, point)?;
    Identity::new(sys, index, i, j).compile(&slots).eval(&values)
}

/// The same residual with every partial derivative replaced by a central
/// difference of step `h`. Used to cross-check the symbolic derivatives.
pub fn residual_at_point_numeric(
    sys: &ValidatedSystem,
    index: &MultiIndex,
    i: usize,
    j: usize,
    point: &Env,
    h: f64,
) -> Result<f64, EvalError> {
    let slots = sys.slot_map();
    let values = values_from_env(&slots, point)?;
    let group = sys.group(index).expect("index of the system");
    let partial = |f: &Expr, var: &str| -> Result<f64, EvalError> {
        let compiled = CompiledExpr::new(f, &slots)?;
        let k = slots.slot(var).expect("known variable");
        let (mut up, mut down) = (values.clone(), values.clone());
        up[k] += h;
        down[k] -= h;
        Ok((compiled.eval(&up)? - compiled.eval(&down)?) / (2.0 * h))
    };
    let side = |c: usize, a: usize, b: usize| -> Result<f64, EvalError> {
        let f = sys.equation(c, a).expect("closed");
        let mut total = partial(f, &x_var(b))?;
        for d in sys.dependency_components(index, a) {
            let var = &sys.components()[d].var;
            if f.depends_on(var) {
                let rhs_b = CompiledExpr::new(sys.equation(d, b).expect("closed"), &slots)?;
                total += partial(f, var)? * rhs_b.eval(&values)?;
            }
        }
        Ok(total)
    };
    let mut residual = 0.0f64;
    for &c in &group.components {
        residual = residual.max((side(c, i, j)? - side(c, j, i)?).abs());
    }
    Ok(residual)
}

/// Sampling box and tolerance for [`check_integrability`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOptions {
    /// Half-width of the x-box along each live axis.
    pub x_radius: Vec<f64>,
    /// Half-width of the U-box along every component.
    pub u_radius: f64,
    pub samples: usize,
    /// Relative tolerance: pass iff residual ≤ tol · scale at every sample.
    pub tol: f64,
}

impl CheckOptions {
    /// Defaults: the given x-radii, U-radius 1, 4096 samples, tolerance 1e-10.
    pub fn with_x_radius(x_radius: Vec<f64>) -> CheckOptions {
        CheckOptions { x_radius, u_radius: 1.0, samples: 4096, tol: 1e-10 }
    }
}

/// Worst sample for one `(I, i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleReport {
    pub index: MultiIndex,
    pub i: usize,
    pub j: usize,
    /// Largest absolute residual over the samples.
    pub max_residual: f64,
    /// Where `max_residual` occurs.
    pub at: Vec<(String, f64)>,
    /// `1 + max |term|` at that point.
    pub scale: f64,
    /// Largest `residual / scale` over the samples.
    pub max_relative: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityReport {
    pub triples: Vec<TripleReport>,
    pub violations: Vec<Violation>,
    pub tol: f64,
    pub samples: usize,
    pub x_radius: Vec<f64>,
    pub u_radius: f64,
    pub pass: bool,
}

/// Checks the structural dependency condition, then samples the identity
/// for every triple. Structural violations fail the check without sampling.
pub fn check_integrability(sys: &ValidatedSystem, opts: &CheckOptions) -> Result<IntegrabilityReport, PointEvalError> {
    let violations = sys.structural_violations();
    let mut report = IntegrabilityReport {
        triples: Vec::new(),
        violations,
        tol: opts.tol,
        samples: opts.samples,
        x_radius: opts.x_radius.clone(),
        u_radius: opts.u_radius,
        pass: false,
    };
    if !report.violations.is_empty() {
        return Ok(report);
    }
    assert_eq!(opts.x_radius.len(), sys.n(), "one x-radius per axis");

    let slots = sys.slot_map();
    let center_u = sys.data_at_base().map_err(|source| PointEvalError {
        what: "data at the base point".into(),
        point: sys.axes().iter().map(|&l| x_var(l)).zip(sys.base_point().iter().copied()).collect(),
        source,
    })?;
    let center: Vec<f64> = sys.base_point().iter().copied().chain(center_u).collect();
    let radius: Vec<f64> =
        opts.x_radius.iter().copied().chain(std::iter::repeat_n(opts.u_radius, sys.scalar_count())).collect();
    let points: Vec<Vec<f64>> = cube_points(opts.samples, center.len())
        .into_iter()
        .map(|p| p.iter().zip(&center).zip(&radius).map(|((t, c), r)| c + r * t).collect())
        .collect();

    for (index, i, j) in triples(sys) {
        let identity = Identity::new(sys, &index, i, j).compile(&slots);
        let evaluated: Vec<Result<(f64, f64), EvalError>> = points.par_iter().map(|p| identity.eval(p)).collect();
        let mut entry = TripleReport {
            index: index.clone(),
            i,
            j,
            max_residual: 0.0,
            at: Vec::new(),
            scale: 1.0,
            max_relative: 0.0,
            pass: true,
        };
        for (p, result) in points.iter().zip(evaluated) {
            let (residual, scale) = result.map_err(|e| {
                PointEvalError::at(format!("integrability identity for I={index}, i={i}, j={j}"), &slots, p, e)
            })?;
            if residual > entry.max_residual || entry.at.is_empty() {
                entry.max_residual = residual;
                entry.scale = scale;
                entry.at = slots.names().iter().cloned().zip(p.iter().copied()).collect();
            }
            entry.max_relative = entry.max_relative.max(residual / scale);
            if residual > opts.tol * scale {
                entry.pass = false;
            }
        }
        report.triples.push(entry);
    }
    report.pass = report.triples.iter().all(|t| t.pass);
    Ok(report)
}

#[cfg(test)]
mod tests;
