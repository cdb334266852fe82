// SPDX-License-Identifier: Apache-2.0

//! Systems in which every equation prescribes one partial derivative of one
//! unknown, `u^I_{x_i} = F^I_i(x; U)`, with data for `u^I` on the hyperplane
//! `{x_I = x̄_I}`.
//!
//! Axes keep their original labels when a system is restricted to a
//! hyperplane, so a system carries its list of live axes rather than a bare
//! dimension. Independent variables are always named `x<label>`.

mod format;
mod index;
mod restrict;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{Env, Expr, Func, SlotMap};

pub use format::{parse_spec_file, write_spec_file, FormatError, PicardSettings, SolveSettings, SpecFile};
pub use restrict::restricted_name;
pub use index::{IndexError, MultiIndex};
pub use restrict::RestrictError;

/// Name of the independent variable for axis `label`.
pub fn x_var(label: usize) -> String {
    format!("x{label}")
}

/// Scalar variable name of component `position` (1-based) of an unknown.
pub fn component_name(unknown: &str, dim: usize, position: usize) -> String {
    if dim == 1 {
        unknown.to_string()
    } else {
        format!("{unknown}_{position}")
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_coordinate_name(s: &str) -> bool {
    s.strip_prefix('x').is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnknownSpec {
    pub name: String,
    pub index: MultiIndex,
    pub dim: usize,
}

impl UnknownSpec {
    pub fn new(name: impl Into<String>, index: MultiIndex, dim: usize) -> UnknownSpec {
        UnknownSpec { name: name.into(), index, dim }
    }

    pub fn component_names(&self) -> Vec<String> {
        (1..=self.dim).map(|k| component_name(&self.name, self.dim, k)).collect()
    }
}

/// One prescribed partial: `∂ unknown[component] / ∂ x_axis = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationSpec {
    pub unknown: String,
    pub component: usize,
    pub axis: usize,
    pub rhs: Expr,
}

/// Data for one scalar component, an expression in the complementary axes.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSpec {
    pub unknown: String,
    pub component: usize,
    pub expr: Expr,
}

/// An unvalidated system description.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub axes: Vec<usize>,
    pub base_point: Vec<f64>,
    pub unknowns: Vec<UnknownSpec>,
    pub equations: Vec<EquationSpec>,
    pub data: Vec<DataSpec>,
}

impl SystemSpec {
    /// Empty system over axes `1..=n`.
    pub fn new(base_point: Vec<f64>) -> SystemSpec {
        SystemSpec {
            axes: (1..=base_point.len()).collect(),
            base_point,
            unknowns: Vec::new(),
            equations: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn unknown(mut self, name: &str, index: &[usize], dim: usize) -> Self {
        let index = MultiIndex::new(index.to_vec()).expect("valid multi-index");
        self.unknowns.push(UnknownSpec::new(name, index, dim));
        self
    }

    /// Adds an equation for component 1 of `unknown`. Panics on a malformed expression.
    pub fn equation(self, unknown: &str, axis: usize, rhs: &str) -> Self {
        self.equation_component(unknown, 1, axis, rhs)
    }

    pub fn equation_component(mut self, unknown: &str, component: usize, axis: usize, rhs: &str) -> Self {
        let rhs = crate::expr::parse(rhs).unwrap_or_else(|e| panic!("bad rhs `{rhs}`: {e}"));
        self.equations.push(EquationSpec { unknown: unknown.into(), component, axis, rhs });
        self
    }

    pub fn data(self, unknown: &str, expr: &str) -> Self {
        self.data_component(unknown, 1, expr)
    }

    pub fn data_component(mut self, unknown: &str, component: usize, expr: &str) -> Self {
        let expr = crate::expr::parse(expr).unwrap_or_else(|e| panic!("bad data `{expr}`: {e}"));
        self.data.push(DataSpec { unknown: unknown.into(), component, expr });
        self
    }
}

/// Structural problems found by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    BadAxes(String),
    BadUnknown { unknown: String, reason: String },
    DuplicateName(String),
    /// The index of `unknown` names an axis the system does not have.
    IndexOutsideAxes { unknown: String, index: MultiIndex },
    /// An equation prescribes a partial that is not in the unknown's index.
    AxisNotInIndex { unknown: String, axis: usize },
    DuplicateEquation { unknown: String, component: usize, axis: usize },
    MissingEquation { unknown: String, component: usize, axis: usize },
    DuplicateData { unknown: String, component: usize },
    MissingData { unknown: String, component: usize },
    /// Data may only depend on the variables of the complementary axes.
    DataVariable { unknown: String, variable: String },
    /// A right-hand side mentions a name that is neither a live coordinate nor an unknown.
    Closure { unknown: String, axis: usize, variable: String },
    /// `F^I_i` depends on an unknown outside `U^I_i`.
    Dependency { index: MultiIndex, axis: usize, unknown: String },
    UnknownTarget { what: &'static str, unknown: String },
    BadComponent { unknown: String, component: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadAxes(msg) => write!(f, "axes: {msg}"),
            Violation::BadUnknown { unknown, reason } => write!(f, "unknown `{unknown}`: {reason}"),
            Violation::DuplicateName(n) => write!(f, "name `{n}` is declared more than once"),
            Violation::IndexOutsideAxes { unknown, index } => {
                write!(f, "unknown `{unknown}` has index {index} outside the system's axes")
            }
            Violation::AxisNotInIndex { unknown, axis } => {
                write!(f, "equation for `{unknown}` along x{axis}, but {axis} is not in its index")
            }
            Violation::DuplicateEquation { unknown, component, axis } => {
                write!(f, "duplicate equation for `{unknown}`[{component}] along x{axis}")
            }
            Violation::MissingEquation { unknown, component, axis } => {
                write!(f, "closure: no equation for `{unknown}`[{component}] along x{axis}")
            }
            Violation::DuplicateData { unknown, component } => {
                write!(f, "duplicate data for `{unknown}`[{component}]")
            }
            Violation::MissingData { unknown, component } => write!(f, "no data for `{unknown}`[{component}]"),
            Violation::DataVariable { unknown, variable } => {
                write!(f, "data for `{unknown}` uses `{variable}`, which is not a complementary coordinate")
            }
            Violation::Closure { unknown, axis, variable } => write!(
                f,
                "closure: equation for `{unknown}` along x{axis} uses `{variable}`, which is not a declared unknown or coordinate"
            ),
            Violation::Dependency { index, axis, unknown } => write!(
                f,
                "dependency: I={index}, i={axis}: right-hand side depends on `{unknown}`, which is not in U^I_i"
            ),
            Violation::UnknownTarget { what, unknown } => write!(f, "{what} refers to undeclared unknown `{unknown}`"),
            Violation::BadComponent { unknown, component } => {
                write!(f, "component {component} is out of range for `{unknown}`")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid system:{}", violations.iter().map(|v| format!("\n  - {v}")).collect::<String>())]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl ValidationError {
    /// True when every violation is a dependency violation.
    pub fn only_dependency(&self) -> bool {
        self.violations.iter().all(|v| matches!(v, Violation::Dependency { .. }))
    }
}

/// A scalar component of an unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// Variable name used in expressions.
    pub var: String,
    pub unknown: String,
    pub position: usize,
    pub dim: usize,
    pub group: usize,
}

/// Unknowns sharing one multi-index, merged into a single vector unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub index: MultiIndex,
    pub members: Vec<String>,
    pub components: Vec<usize>,
}

impl Group {
    pub fn name(&self) -> String {
        self.members.join("+")
    }
}

/// Index sets `𝓘^I_i` and, for a restriction axis `ℓ`, `𝓘^{ℓ,I}_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSets {
    pub full: Vec<MultiIndex>,
    pub restricted: Option<Vec<MultiIndex>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Strictness {
    Strict,
    Lenient,
}

/// A system whose structure has been checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedSystem {
    spec: SystemSpec,
    components: Vec<Component>,
    groups: Vec<Group>,
    group_by_index: HashMap<MultiIndex, usize>,
    equations: HashMap<(usize, usize), Expr>,
    data: Vec<Expr>,
    dependency_violations: Vec<Violation>,
}

/// Validates a system, rejecting any structural violation.
pub fn validate(spec: &SystemSpec) -> Result<ValidatedSystem, ValidationError> {
    validate_impl(spec, Strictness::Strict)
}

/// Like [`validate`], but records dependency violations on the result
/// instead of failing, so the integrability report can show them.
pub fn validate_lenient(spec: &SystemSpec) -> Result<ValidatedSystem, ValidationError> {
    validate_impl(spec, Strictness::Lenient)
}

fn validate_impl(spec: &SystemSpec, strictness: Strictness) -> Result<ValidatedSystem, ValidationError> {
    let mut violations = Vec::new();

    if spec.axes.is_empty() {
        violations.push(Violation::BadAxes("a system needs at least one axis".into()));
    }
    if spec.axes.windows(2).any(|w| w[0] >= w[1]) || spec.axes.first() == Some(&0) {
        violations.push(Violation::BadAxes(format!("axes {:?} must be strictly increasing labels >= 1", spec.axes)));
    }
    if spec.base_point.len() != spec.axes.len() {
        violations.push(Violation::BadAxes(format!(
            "base point has {} coordinates for {} axes",
            spec.base_point.len(),
            spec.axes.len()
        )));
    }
    if spec.base_point.iter().any(|v| !v.is_finite()) {
        violations.push(Violation::BadAxes("base point must be finite".into()));
    }
    if spec.unknowns.is_empty() {
        violations.push(Violation::BadUnknown { unknown: String::new(), reason: "system has no unknowns".into() });
    }
    if !violations.is_empty() {
        return Err(ValidationError { violations });
    }

    // Unknowns and their components.
    let reserved: BTreeSet<&str> = Func::ALL.iter().map(|f| f.name()).collect();
    let mut seen_names = BTreeSet::new();
    let mut unknown_pos = HashMap::new();
    let mut components = Vec::new();
    let mut groups: Vec<Group> = Vec::new();
    let mut group_by_index: HashMap<MultiIndex, usize> = HashMap::new();
    for (k, u) in spec.unknowns.iter().enumerate() {
        if !is_identifier(&u.name) || is_coordinate_name(&u.name) || reserved.contains(u.name.as_str()) {
            violations.push(Violation::BadUnknown {
                unknown: u.name.clone(),
                reason: "not a valid unknown name".into(),
            });
            continue;
        }
        if u.dim == 0 {
            violations.push(Violation::BadUnknown { unknown: u.name.clone(), reason: "dimension must be positive".into() });
            continue;
        }
        if !u.index.axes().iter().all(|a| spec.axes.contains(a)) {
            violations.push(Violation::IndexOutsideAxes { unknown: u.name.clone(), index: u.index.clone() });
            continue;
        }
        if unknown_pos.insert(u.name.clone(), k).is_some() {
            violations.push(Violation::DuplicateName(u.name.clone()));
            continue;
        }
        let g = *group_by_index.entry(u.index.clone()).or_insert_with(|| {
            groups.push(Group { index: u.index.clone(), members: Vec::new(), components: Vec::new() });
            groups.len() - 1
        });
        groups[g].members.push(u.name.clone());
        for (p, var) in u.component_names().into_iter().enumerate() {
            if !seen_names.insert(var.clone()) {
                violations.push(Violation::DuplicateName(var.clone()));
            }
            groups[g].components.push(components.len());
            components.push(Component { var, unknown: u.name.clone(), position: p + 1, dim: u.dim, group: g });
        }
    }
    if !violations.is_empty() {
        return Err(ValidationError { violations });
    }
    // Components are numbered in group order so a group's components are contiguous.
    let order: Vec<usize> = groups.iter().flat_map(|g| g.components.iter().copied()).collect();
    let mut components: Vec<Component> = order.iter().map(|&c| components[c].clone()).collect();
    let mut next = 0;
    for g in groups.iter_mut() {
        for c in g.components.iter_mut() {
            *c = next;
            next += 1;
        }
    }
    for (g, group) in groups.iter().enumerate() {
        for &c in &group.components {
            components[c].group = g;
        }
    }
    let comp_by_key: HashMap<(String, usize), usize> =
        components.iter().enumerate().map(|(i, c)| ((c.unknown.clone(), c.position), i)).collect();
    let comp_by_var: HashMap<&str, usize> = components.iter().enumerate().map(|(i, c)| (c.var.as_str(), i)).collect();

    // Equations.
    let mut equations = HashMap::new();
    for eq in &spec.equations {
        let Some(&k) = unknown_pos.get(&eq.unknown) else {
            violations.push(Violation::UnknownTarget { what: "equation", unknown: eq.unknown.clone() });
            continue;
        };
        let Some(&c) = comp_by_key.get(&(eq.unknown.clone(), eq.component)) else {
            violations.push(Violation::BadComponent { unknown: eq.unknown.clone(), component: eq.component });
            continue;
        };
        if !spec.unknowns[k].index.contains(eq.axis) {
            violations.push(Violation::AxisNotInIndex { unknown: eq.unknown.clone(), axis: eq.axis });
            continue;
        }
        if equations.insert((c, eq.axis), eq.rhs.clone()).is_some() {
            violations.push(Violation::DuplicateEquation {
                unknown: eq.unknown.clone(),
                component: eq.component,
                axis: eq.axis,
            });
        }
    }
    for (c, comp) in components.iter().enumerate() {
        for &axis in groups[comp.group].index.axes() {
            if !equations.contains_key(&(c, axis)) {
                violations.push(Violation::MissingEquation {
                    unknown: comp.unknown.clone(),
                    component: comp.position,
                    axis,
                });
            }
        }
    }

    // Data.
    let mut data: Vec<Option<Expr>> = vec![None; components.len()];
    for d in &spec.data {
        if !unknown_pos.contains_key(&d.unknown) {
            violations.push(Violation::UnknownTarget { what: "data", unknown: d.unknown.clone() });
            continue;
        }
        let Some(&c) = comp_by_key.get(&(d.unknown.clone(), d.component)) else {
            violations.push(Violation::BadComponent { unknown: d.unknown.clone(), component: d.component });
            continue;
        };
        if data[c].replace(d.expr.clone()).is_some() {
            violations.push(Violation::DuplicateData { unknown: d.unknown.clone(), component: d.component });
        }
    }
    for (c, comp) in components.iter().enumerate() {
        let Some(expr) = &data[c] else {
            violations.push(Violation::MissingData { unknown: comp.unknown.clone(), component: comp.position });
            continue;
        };
        let index = &groups[comp.group].index;
        let allowed: BTreeSet<String> =
            spec.axes.iter().filter(|a| !index.contains(**a)).map(|&a| x_var(a)).collect();
        for var in expr.free_vars() {
            if !allowed.contains(&var) {
                violations.push(Violation::DataVariable { unknown: comp.unknown.clone(), variable: var });
            }
        }
    }

    // Closure of right-hand sides.
    let coords: BTreeSet<String> = spec.axes.iter().map(|&a| x_var(a)).collect();
    let mut keys: Vec<&(usize, usize)> = equations.keys().collect();
    keys.sort();
    for &(c, axis) in keys {
        for var in equations[&(c, axis)].free_vars() {
            if !coords.contains(&var) && !comp_by_var.contains_key(var.as_str()) {
                violations.push(Violation::Closure { unknown: components[c].unknown.clone(), axis, variable: var });
            }
        }
    }

    if !violations.is_empty() {
        return Err(ValidationError { violations });
    }

    let mut sys = ValidatedSystem {
        spec: spec.clone(),
        components,
        groups,
        group_by_index,
        equations,
        data: data.into_iter().map(|d| d.expect("checked above")).collect(),
        dependency_violations: Vec::new(),
    };
    let deps = sys.dependency_check();
    if !deps.is_empty() {
        match strictness {
            Strictness::Strict => return Err(ValidationError { violations: deps }),
            Strictness::Lenient => sys.dependency_violations = deps,
        }
    }
    Ok(sys)
}

impl ValidatedSystem {
    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    /// The spec with unknowns listed group by group; validating it again gives an identical system.
    pub fn as_spec(&self) -> SystemSpec {
        let mut spec = self.spec.clone();
        let order: HashMap<&str, usize> = self
            .groups
            .iter()
            .flat_map(|g| g.members.iter())
            .enumerate()
            .map(|(i, m)| (m.as_str(), i))
            .collect();
        spec.unknowns.sort_by_key(|u| order[u.name.as_str()]);
        spec
    }

    pub fn axes(&self) -> &[usize] {
        &self.spec.axes
    }

    /// Component variable names in declaration order (not group order).
    pub fn declared_components(&self) -> Vec<String> {
        self.spec.unknowns.iter().flat_map(UnknownSpec::component_names).collect()
    }

    pub fn base_point(&self) -> &[f64] {
        &self.spec.base_point
    }

    pub fn base_coordinate(&self, label: usize) -> Option<f64> {
        self.axis_position(label).map(|p| self.spec.base_point[p])
    }

    pub fn axis_position(&self, label: usize) -> Option<usize> {
        self.spec.axes.iter().position(|&a| a == label)
    }

    /// Number of independent variables.
    pub fn n(&self) -> usize {
        self.spec.axes.len()
    }

    /// Total number of scalar unknowns.
    pub fn scalar_count(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_index(&self, var: &str) -> Option<usize> {
        self.components.iter().position(|c| c.var == var)
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group(&self, index: &MultiIndex) -> Option<&Group> {
        self.group_by_index.get(index).map(|&g| &self.groups[g])
    }

    /// The set `𝓘` of multi-indices, in group order.
    pub fn index_set(&self) -> Vec<MultiIndex> {
        self.groups.iter().map(|g| g.index.clone()).collect()
    }

    /// Right-hand side for component `c` along `axis`.
    pub fn equation(&self, c: usize, axis: usize) -> Option<&Expr> {
        self.equations.get(&(c, axis))
    }

    pub fn data(&self, c: usize) -> &Expr {
        &self.data[c]
    }

    pub fn is_determined(&self) -> bool {
        self.groups.iter().all(|g| g.index.len() == 1)
    }

    pub fn is_overdetermined(&self) -> bool {
        !self.is_determined()
    }

    /// Groups merged from several declared unknowns.
    pub fn merges(&self) -> Vec<&Group> {
        self.groups.iter().filter(|g| g.members.len() > 1).collect()
    }

    /// Dependency violations recorded by [`validate_lenient`].
    pub fn dependency_violations(&self) -> &[Violation] {
        &self.dependency_violations
    }

    /// Slot layout used for compiled evaluation: live coordinates then components.
    pub fn slot_map(&self) -> SlotMap {
        let mut slots = SlotMap::new(self.spec.axes.iter().map(|&a| x_var(a)));
        for c in &self.components {
            slots.push(c.var.clone());
        }
        slots
    }

    /// Flattens an environment into the [`slot_map`](Self::slot_map) layout.
    pub fn point_values(&self, env: &Env) -> Result<Vec<f64>, crate::expr::EvalError> {
        self.slot_map()
            .names()
            .iter()
            .map(|n| env.get(n).ok_or_else(|| crate::expr::EvalError::Unbound(n.clone())))
            .collect()
    }

    /// `𝓘^I_i`, and `𝓘^{ℓ,I}_i` when `ell` is given.
    pub fn index_sets(&self, index: &MultiIndex, axis: usize, ell: Option<usize>) -> Result<IndexSets, IndexError> {
        if !index.contains(axis) {
            return Err(IndexError::AxisNotInIndex { index: index.clone(), axis });
        }
        let rest = index.without(axis);
        let full: Vec<MultiIndex> =
            self.groups.iter().map(|g| &g.index).filter(|j| j.contains_all(&rest)).cloned().collect();
        let restricted = ell.map(|l| full.iter().filter(|j| j.axes() != [l]).cloned().collect());
        Ok(IndexSets { full, restricted })
    }

    /// Component indices of `U^I_i`.
    pub fn dependency_components(&self, index: &MultiIndex, axis: usize) -> Vec<usize> {
        let rest = index.without(axis);
        self.groups
            .iter()
            .filter(|g| g.index.contains_all(&rest))
            .flat_map(|g| g.components.iter().copied())
            .collect()
    }

    fn dependency_check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for group in &self.groups {
            for &axis in group.index.axes() {
                let allowed: BTreeSet<usize> = self.dependency_components(&group.index, axis).into_iter().collect();
                let mut offenders = BTreeSet::new();
                for &c in &group.components {
                    for var in self.equations[&(c, axis)].free_vars() {
                        if let Some(d) = self.component_index(&var) {
                            if !allowed.contains(&d) {
                                offenders.insert(self.components[d].unknown.clone());
                            }
                        }
                    }
                }
                for unknown in offenders {
                    out.push(Violation::Dependency { index: group.index.clone(), axis, unknown });
                }
            }
        }
        out
    }

    /// Re-runs the structural dependency check (condition on `U^I_i`).
    pub fn structural_violations(&self) -> Vec<Violation> {
        self.dependency_check()
    }

    /// Data values at the base point, one per component.
    pub fn data_at_base(&self) -> Result<Vec<f64>, crate::expr::EvalError> {
        let env: Env = self.spec.axes.iter().zip(&self.spec.base_point).map(|(&a, &v)| (x_var(a), v)).collect();
        self.data.iter().map(|d| d.eval(&env)).collect()
    }
}

#[cfg(test)]
mod tests;
