// SPDX-License-Identifier: Apache-2.0

//! Overdetermined systems, solved by induction on dimension.
//!
//! For every axis `ℓ` below the last one that some multi-index `I ∋ ℓ`,
//! `|I| > 1` uses, the system restricted to `{x_ℓ = x̄_ℓ}` is solved
//! recursively on the matching slice of the grid. Those solutions supply the
//! data of system n, which keeps only the `min I` equation of every unknown
//! and is solved by Picard iteration. The equations left out of system n are
//! then checked numerically through the defects `Δ^I_i`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::determined::{
    check_grid, evaluate_on_grid, solve_determined, solve_determined_with_data, GridSolution, PicardOptions,
    SolveError,
};
use crate::expr::{CompiledExpr, PointEvalError};
use crate::grid::Grid;
use crate::system::{MultiIndex, ValidatedSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DarbouxOptions {
    pub picard: PicardOptions,
    /// Multiplier `c` in the pass threshold `c (δ² + tol)`.
    pub delta_tol_factor: f64,
}

impl Default for DarbouxOptions {
    fn default() -> Self {
        DarbouxOptions { picard: PicardOptions::default(), delta_tol_factor: 10.0 }
    }
}

impl DarbouxOptions {
    /// `delta_tol_factor · (δ² + tol)` with `δ` the largest spacing of `grid`.
    pub fn threshold(&self, grid: &Grid) -> f64 {
        let d = grid.max_spacing();
        self.delta_tol_factor * (d * d + self.picard.tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaEntry {
    pub index: MultiIndex,
    pub i: usize,
    /// Sup over nodes and components of `|Δ^I_i|`.
    pub sup: f64,
    pub pass: bool,
}

/// Defects of the equations `u^I_{x_i} = F^I_i` with `i > min I`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport {
    pub entries: Vec<DeltaEntry>,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyEntry {
    pub index: MultiIndex,
    pub k: usize,
    pub l: usize,
    /// Sup discrepancy between `u^{k,I}` on `x_l = x̄_l` and `u^{l,I}` on `x_k = x̄_k`.
    pub sup: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub entries: Vec<ConsistencyEntry>,
    pub threshold: f64,
    pub pass: bool,
}

/// Solution of an overdetermined system with its checks and the solutions
/// of the restricted systems it was built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DarbouxSolution {
    /// Fields in the component order of the input system.
    pub solution: GridSolution,
    pub delta: DeltaReport,
    pub consistency: ConsistencyReport,
    /// Restricted-system solutions keyed by the restriction axis.
    pub subsystems: BTreeMap<usize, DarbouxSolution>,
}

impl DarbouxSolution {
    /// All checks pass here and in every subsystem.
    pub fn pass(&self) -> bool {
        self.delta.pass && self.consistency.pass && self.subsystems.values().all(DarbouxSolution::pass)
    }
}

fn empty_reports(threshold: f64) -> (DeltaReport, ConsistencyReport) {
    (
        DeltaReport { entries: Vec::new(), threshold, pass: true },
        ConsistencyReport { entries: Vec::new(), threshold, pass: true },
    )
}

/// Solves `sys` on `grid`. Systems without multi-indices of length > 1 go
/// straight to the Picard solver, so the result is identical to
/// [`solve_determined`].
pub fn solve_darboux(sys: &ValidatedSystem, grid: &Grid, opts: &DarbouxOptions) -> Result<DarbouxSolution, SolveError> {
    let threshold = opts.threshold(grid);
    if sys.is_determined() {
        let solution = solve_determined(sys, grid, &opts.picard)?;
        let (delta, consistency) = empty_reports(threshold);
        return Ok(DarbouxSolution { solution, delta, consistency, subsystems: BTreeMap::new() });
    }
    check_grid(sys, grid)?;

    let live = sys.axes();
    let ells: Vec<usize> =
        live[..live.len() - 1].iter().copied().filter(|&l| !sys.restrictable_groups(l).is_empty()).collect();
    let solved: Vec<(usize, Result<DarbouxSolution, SolveError>)> = ells
        .par_iter()
        .map(|&ell| {
            let result = (|| {
                let restricted = sys.restrict_to_hyperplane(ell)?;
                solve_darboux(&restricted, &grid.slice(ell)?, opts)
            })();
            (ell, result.map_err(|e| SolveError::Subsystem { axis: ell, source: Box::new(e) }))
        })
        .collect();
    let mut subsystems = BTreeMap::new();
    for (ell, result) in solved {
        subsystems.insert(ell, result?);
    }
    let sub_fields: BTreeMap<usize, GridSolution> =
        subsystems.iter().map(|(&l, s): (&usize, &DarbouxSolution)| (l, s.solution.clone())).collect();

    let system_n = sys.build_system_n();
    let data = assemble_data_for_system_n(sys, &system_n, grid, &sub_fields)?;
    let solved_n = solve_determined_with_data(&system_n, grid, &data, &opts.picard)?;
    let fields = sys
        .components()
        .iter()
        .map(|c| solved_n.field(&c.var).expect("system n keeps every component").to_vec())
        .collect();
    let solution = GridSolution { names: sys.components().iter().map(|c| c.var.clone()).collect(), fields, ..solved_n };

    let delta = delta_residuals(sys, &solution, threshold)?;
    let consistency = intersection_consistency(sys, grid, &sub_fields, threshold);
    Ok(DarbouxSolution { solution, delta, consistency, subsystems })
}

/// Data for system n, in its component order. A component of `u^I` gets
/// the field on the slice `{x_{min I} = x̄_{min I}}`: the original data when
/// `|I| = 1`, otherwise the system-`min I` solution copied node for node.
pub fn assemble_data_for_system_n(
    sys: &ValidatedSystem,
    system_n: &ValidatedSystem,
    grid: &Grid,
    subsolutions: &BTreeMap<usize, GridSolution>,
) -> Result<Vec<Vec<f64>>, SolveError> {
    let mut out = Vec::with_capacity(system_n.scalar_count());
    for comp in system_n.components() {
        let c = sys.component_index(&comp.var).expect("system n has the same components");
        let index = &sys.groups()[sys.components()[c].group].index;
        let axis = index.min_axis();
        if index.len() == 1 {
            out.push(evaluate_on_grid(sys.data(c), &grid.slice(axis)?, || format!("data for `{}`", comp.var))?);
            continue;
        }
        let missing = || SolveError::MissingSubsolution { axis, unknown: comp.var.clone() };
        let sub = subsolutions.get(&axis).ok_or_else(missing)?;
        let field = sub.field(&sys.restricted_var(c, axis)).ok_or_else(missing)?;
        if sub.grid != grid.slice(axis)? {
            return Err(SolveError::GridMismatch(format!("subsystem {axis} was solved on a different grid")));
        }
        out.push(field.to_vec());
    }
    Ok(out)
}

/// `Δ^I_i = ∂_i û^I − F^I_i(x, Û)` for `i > min I`, with the derivative
/// taken by finite differences on the grid.
pub fn delta_residuals(sys: &ValidatedSystem, sol: &GridSolution, threshold: f64) -> Result<DeltaReport, SolveError> {
    let grid = &sol.grid;
    let slots = sys.slot_map();
    let fields: Vec<&[f64]> = sys
        .components()
        .iter()
        .map(|c| sol.field(&c.var).ok_or_else(|| SolveError::DataShape(c.var.clone())))
        .collect::<Result<_, _>>()?;
    let mut entries = Vec::new();
    for group in sys.groups() {
        for &i in &group.index.axes()[1..] {
            let mut sup = 0.0f64;
            for &c in &group.components {
                let rhs = CompiledExpr::new(sys.equation(c, i).expect("closed"), &slots).expect("closed");
                let fd = grid.derivative(fields[c], i)?;
                let defects: Vec<Result<f64, PointEvalError>> = (0..grid.len())
                    .into_par_iter()
                    .map(|f| {
                        let mut vals = grid.coordinates(f);
                        vals.extend(fields.iter().map(|field| field[f]));
                        rhs.eval(&vals)
                            .map(|v| (fd[f] - v).abs())
                            .map_err(|e| {
                                let what = format!("defect of `{}` along x{i}", sys.components()[c].var);
                                PointEvalError::at(what, &slots, &vals, e)
                            })
                    })
                    .collect();
                for d in defects {
                    let d = d?;
                    sup = if d.is_nan() { f64::NAN } else { sup.max(d) };
                }
            }
            entries.push(DeltaEntry { index: group.index.clone(), i, sup, pass: sup <= threshold });
        }
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(DeltaReport { entries, threshold, pass })
}

/// Compares `u^{k,I}|_{x_l = x̄_l}` with `u^{l,I}|_{x_k = x̄_k}` for every
/// `I` and `k < l` in `I` with both restricted solutions available.
pub fn intersection_consistency(
    sys: &ValidatedSystem,
    grid: &Grid,
    subsolutions: &BTreeMap<usize, GridSolution>,
    threshold: f64,
) -> ConsistencyReport {
    let mut entries = Vec::new();
    for group in sys.groups().iter().filter(|g| g.index.len() > 1) {
        let axes = group.index.axes();
        for (a, &k) in axes.iter().enumerate() {
            for &l in &axes[a + 1..] {
                let (Some(sk), Some(sl)) = (subsolutions.get(&k), subsolutions.get(&l)) else { continue };
                let (Ok(gk), Ok(gl)) = (grid.slice(k), grid.slice(l)) else { continue };
                let nodes_k = gk.slice_nodes(l).expect("l is live in system k");
                let nodes_l = gl.slice_nodes(k).expect("k is live in system l");
                let mut sup = 0.0f64;
                for &c in &group.components {
                    let (Some(fk), Some(fl)) =
                        (sk.field(&sys.restricted_var(c, k)), sl.field(&sys.restricted_var(c, l)))
                    else {
                        sup = f64::NAN;
                        continue;
                    };
                    for (&nk, &nl) in nodes_k.iter().zip(&nodes_l) {
                        let d = (fk[nk] - fl[nl]).abs();
                        sup = if d.is_nan() || sup.is_nan() { f64::NAN } else { sup.max(d) };
                    }
                }
                entries.push(ConsistencyEntry { index: group.index.clone(), k, l, sup, pass: sup <= threshold });
            }
        }
    }
    let pass = entries.iter().all(|e| e.pass);
    ConsistencyReport { entries, threshold, pass }
}
