// SPDX-License-Identifier: Apache-2.0

use super::*;
use crate::fixtures;

fn load(name: &str) -> ValidatedSystem {
    validate(&fixtures::get(name).unwrap().load().system).unwrap()
}

fn mi(axes: &[usize]) -> MultiIndex {
    MultiIndex::new(axes.to_vec()).unwrap()
}

#[test]
fn merged_vectors_merges_into_two_vector_unknowns() {
    let sys = load("merged_vectors");
    assert_eq!(sys.index_set(), vec![mi(&[1]), mi(&[2])]);
    assert_eq!(sys.groups()[0].components.len(), 2);
    assert_eq!(sys.groups()[1].components.len(), 2);
    assert_eq!(sys.merges().len(), 2);
    assert_eq!(sys.groups()[1].name(), "w+xi");
    assert!(sys.is_determined());
    assert_eq!(sys.scalar_count(), 4);
}

#[test]
fn coupled_pair_dependency_violation() {
    let spec = fixtures::get("coupled_pair_fault").unwrap().load().system;
    let err = validate(&spec).unwrap_err();
    assert!(err.only_dependency());
    assert_eq!(err.violations, vec![Violation::Dependency { index: mi(&[1, 2]), axis: 1, unknown: "u".into() }]);
    assert!(err.to_string().contains("I=(1,2), i=1"));

    let lenient = validate_lenient(&spec).unwrap();
    assert_eq!(lenient.dependency_violations().len(), 1);
}

#[test]
fn closure_violation_for_undeclared_unknown() {
    let spec = SystemSpec::new(vec![0.0]).unknown("u", &[1], 1).equation("u", 1, "u + z").data("u", "1");
    let err = validate(&spec).unwrap_err();
    assert_eq!(err.violations, vec![Violation::Closure { unknown: "u".into(), axis: 1, variable: "z".into() }]);
}

#[test]
fn missing_equation_and_bad_data() {
    let spec = SystemSpec::new(vec![0.0, 0.0]).unknown("u", &[1, 2], 1).equation("u", 1, "u").data("u", "x1");
    let err = validate(&spec).unwrap_err();
    assert!(err.violations.contains(&Violation::MissingEquation { unknown: "u".into(), component: 1, axis: 2 }));
    assert!(err.violations.contains(&Violation::DataVariable { unknown: "u".into(), variable: "x1".into() }));
}

#[test]
fn index_sets_follow_the_definition() {
    let s5 = load("seven_unknowns");
    let sets = s5.index_sets(&mi(&[1, 2, 3]), 1, None).unwrap();
    assert_eq!(sets.full, vec![mi(&[2, 3]), mi(&[1, 2, 3])]);
    // I = (i): every multi-index qualifies.
    assert_eq!(s5.index_sets(&mi(&[2]), 2, None).unwrap().full.len(), 7);
    // |I| >= 3 with ell in I: restricted and full sets coincide.
    let sets = s5.index_sets(&mi(&[1, 2, 3]), 2, Some(1)).unwrap();
    assert_eq!(sets.restricted.as_ref(), Some(&sets.full));
    assert!(s5.index_sets(&mi(&[1, 2]), 3, None).is_err());

    // Only J containing 2 qualify, so (2) is not even in this system's index set.
    let e41 = load("coupled_pair");
    assert_eq!(e41.index_sets(&mi(&[1, 2]), 1, None).unwrap().full, vec![mi(&[1, 2])]);
    assert_eq!(e41.index_sets(&mi(&[1, 2]), 2, None).unwrap().full, vec![mi(&[1]), mi(&[1, 2])]);
}

#[test]
fn as_spec_is_idempotent() {
    for name in ["merged_vectors", "seven_unknowns", "three_unknown_pair", "frobenius_vector"] {
        let sys = load(name);
        let again = validate(&sys.as_spec()).unwrap();
        assert_eq!(again.components(), sys.components(), "{name}");
        assert_eq!(again.groups(), sys.groups(), "{name}");
        assert_eq!(validate(&again.as_spec()).unwrap(), again, "{name}");
    }
}

#[test]
fn restrict_seven_unknowns_along_first_axis() {
    let sys = load("seven_unknowns");
    let r = sys.restrict_to_hyperplane(1).unwrap();
    assert_eq!(r.axes(), &[2, 3]);
    let names: Vec<&str> = r.components().iter().map(|c| c.var.as_str()).collect();
    assert_eq!(names, vec!["q__r1", "r__r1", "s__r1"]);
    let eq_count: usize = r.groups().iter().map(|g| g.index.len() * g.components.len()).sum();
    assert_eq!(eq_count, 4);
    // u^(1) was replaced by its data and x1 pinned.
    for c in 0..r.scalar_count() {
        for &axis in r.groups()[r.components()[c].group].index.axes() {
            let vars = r.equation(c, axis).unwrap().free_vars();
            assert!(!vars.contains("u") && !vars.contains("x1"), "{vars:?}");
        }
    }
    assert!(r.is_overdetermined());
}

#[test]
fn restrict_three_unknown_pair_gives_single_ode() {
    let sys = load("three_unknown_pair");
    let r = sys.restrict_to_hyperplane(1).unwrap();
    assert_eq!(r.axes(), &[2]);
    assert_eq!(r.scalar_count(), 1);
    assert_eq!(r.components()[0].var, "w__r1");
    // phi = u with u replaced by its data 1 + 0.5*x2.
    assert_eq!(r.equation(0, 2).unwrap().to_string(), "1 + 0.5*x2");
}

#[test]
fn restrict_requires_a_long_index() {
    let sys = load("merged_vectors");
    assert_eq!(sys.restrict_to_hyperplane(1), Err(RestrictError::Empty(1)));
    assert_eq!(sys.restrict_to_hyperplane(7), Err(RestrictError::NotAnAxis(7)));
}

#[test]
fn restricted_systems_validate_recursively() {
    let sys = load("seven_unknowns");
    for ell in [1, 2] {
        let r = sys.restrict_to_hyperplane(ell).unwrap();
        assert!(r.dependency_violations().is_empty());
        if let Ok(rr) = r.restrict_to_hyperplane(r.axes()[0]) {
            assert_eq!(rr.n(), 1);
        }
    }
}

#[test]
fn system_n_keeps_min_axis_equations() {
    let sys = load("seven_unknowns");
    let n = sys.build_system_n();
    assert!(n.is_determined());
    let mut got: Vec<(String, usize)> = n
        .components()
        .iter()
        .map(|c| (c.var.clone(), n.groups()[c.group].index.min_axis()))
        .collect();
    got.sort();
    let want = [("p", 2), ("q", 1), ("r", 1), ("s", 1), ("u", 1), ("v", 2), ("w", 3)];
    assert_eq!(got, want.iter().map(|(a, b)| (a.to_string(), *b)).collect::<Vec<_>>());

    let e42 = load("three_unknown_pair").build_system_n();
    let mut axes: Vec<(String, usize)> =
        e42.components().iter().map(|c| (c.var.clone(), e42.groups()[c.group].index.min_axis())).collect();
    axes.sort();
    assert_eq!(axes, vec![("u".into(), 1), ("v".into(), 2), ("w".into(), 1)]);

    let det = load("merged_vectors");
    assert_eq!(det.build_system_n(), det);
}
