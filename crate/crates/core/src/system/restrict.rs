// SPDX-License-Identifier: Apache-2.0

//! Derived subsystems: restriction to a coordinate hyperplane through the
//! base point, and the determined "min-axis" system.

use std::collections::HashMap;

use thiserror::Error;

use super::{component_name, validate_impl, x_var, DataSpec, EquationSpec, Strictness, SystemSpec, UnknownSpec};
use super::{ValidatedSystem, ValidationError};
use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RestrictError {
    #[error("x{0} is not an axis of this system")]
    NotAnAxis(usize),
    #[error("no unknown has x{0} in a multi-index of length > 1; nothing to restrict")]
    Empty(usize),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// Name of an unknown in the system restricted to `{x_ell = x̄_ell}`.
pub fn restricted_name(unknown: &str, ell: usize) -> String {
    format!("{unknown}__r{ell}")
}

impl ValidatedSystem {
    /// `𝓘_ℓ`: multi-indices containing `ell` other than `(ell)` itself.
    pub fn restrictable_groups(&self, ell: usize) -> Vec<usize> {
        self.groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.index.contains(ell) && g.index.len() > 1)
            .map(|(k, _)| k)
            .collect()
    }

    /// Variable name of component `c` inside the system restricted along `ell`.
    pub fn restricted_var(&self, c: usize, ell: usize) -> String {
        let comp = &self.components[c];
        component_name(&restricted_name(&comp.unknown, ell), comp.dim, comp.position)
    }

    /// System ℓ: the equations `u^I_{x_i} = F^I_i` for `ℓ ∈ I ≠ (ℓ)` and
    /// `i ∈ I ∖ ℓ`, restricted to `{x_ℓ = x̄_ℓ}`. Occurrences of `u^{(ℓ)}`
    /// are replaced by its data.
    pub fn restrict_to_hyperplane(&self, ell: usize) -> Result<ValidatedSystem, RestrictError> {
        let pos = self.axis_position(ell).ok_or(RestrictError::NotAnAxis(ell))?;
        let kept = self.restrictable_groups(ell);
        if kept.is_empty() {
            return Err(RestrictError::Empty(ell));
        }

        let mut subst: HashMap<String, Expr> = HashMap::new();
        subst.insert(x_var(ell), Expr::Num(self.spec.base_point[pos]));
        for &g in &kept {
            for &c in &self.groups[g].components {
                subst.insert(self.components[c].var.clone(), Expr::Var(self.restricted_var(c, ell)));
            }
        }
        if let Some(pinned) = self.group(&super::MultiIndex::single(ell)) {
            let pin_x = HashMap::from([(x_var(ell), Expr::Num(self.spec.base_point[pos]))]);
            for &c in &pinned.components {
                subst.insert(self.components[c].var.clone(), self.data[c].substitute(&pin_x));
            }
        }

        let mut spec = SystemSpec {
            axes: self.spec.axes.iter().copied().filter(|&a| a != ell).collect(),
            base_point: self
                .spec
                .base_point
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != pos)
                .map(|(_, &v)| v)
                .collect(),
            unknowns: Vec::new(),
            equations: Vec::new(),
            data: Vec::new(),
        };
        for &g in &kept {
            let group = &self.groups[g];
            let index = group.index.removed(ell).expect("group index has length > 1");
            for member in &group.members {
                let dim = self.spec.unknowns.iter().find(|u| &u.name == member).map_or(1, |u| u.dim);
                spec.unknowns.push(UnknownSpec::new(restricted_name(member, ell), index.clone(), dim));
            }
            for &c in &group.components {
                let comp = &self.components[c];
                let name = restricted_name(&comp.unknown, ell);
                for &axis in index.axes() {
                    spec.equations.push(EquationSpec {
                        unknown: name.clone(),
                        component: comp.position,
                        axis,
                        rhs: self.equations[&(c, axis)].substitute(&subst).simplify(),
                    });
                }
                spec.data.push(DataSpec { unknown: name, component: comp.position, expr: self.data[c].clone() });
            }
        }
        let strictness =
            if self.dependency_violations.is_empty() { Strictness::Strict } else { Strictness::Lenient };
        Ok(validate_impl(&spec, strictness)?)
    }

    /// System n: for every `I`, only the equation along `min I`. The result
    /// is determined. Its data for `|I| > 1` are the original `ū^I`, which
    /// only fix the field on `{x_I = x̄_I}`; the overdetermined solver
    /// replaces them with fields from the restricted solves.
    pub fn build_system_n(&self) -> ValidatedSystem {
        let mut spec = self.spec.clone();
        let min_axis: HashMap<&str, usize> =
            spec.unknowns.iter().map(|u| (u.name.as_str(), u.index.min_axis())).collect();
        spec.equations = self
            .spec
            .equations
            .iter()
            .filter(|eq| min_axis.get(eq.unknown.as_str()) == Some(&eq.axis))
            .cloned()
            .collect();
        for u in spec.unknowns.iter_mut() {
            u.index = super::MultiIndex::single(u.index.min_axis());
        }
        // U^(i)_i is every unknown, so no dependency violation can arise.
        validate_impl(&spec, Strictness::Strict).expect("system n of a valid system is valid")
    }
}
