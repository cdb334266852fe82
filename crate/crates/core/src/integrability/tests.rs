// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use super::*;
use crate::fixtures;
use crate::system::{validate, validate_lenient, SystemSpec};

fn load(name: &str) -> (ValidatedSystem, CheckOptions) {
    let file = fixtures::get(name).unwrap().load();
    let sys = validate_lenient(&file.system).unwrap();
    let opts = CheckOptions::with_x_radius(file.solve.unwrap().half_widths);
    (sys, opts)
}

fn mi(axes: &[usize]) -> MultiIndex {
    MultiIndex::new(axes.to_vec()).unwrap()
}

fn generic_point(sys: &ValidatedSystem) -> Env {
    sys.slot_map().names().iter().enumerate().map(|(k, n)| (n.clone(), 0.1 + 0.07 * k as f64)).collect()
}

#[test]
fn constant_right_hand_sides_have_zero_residual() {
    let spec = SystemSpec::new(vec![0.0, 0.0]).unknown("u", &[1, 2], 1).equation("u", 1, "2").equation("u", 2, "-3").data("u", "0");
    let sys = validate(&spec).unwrap();
    assert_eq!(residual_at_point(&sys, &mi(&[1, 2]), 1, 2, &generic_point(&sys)).unwrap(), 0.0);
}

#[test]
fn passing_fixtures_pass() {
    for name in ["frobenius", "frobenius_vector", "coupled_pair", "three_unknown_pair", "seven_unknowns"] {
        let (sys, opts) = load(name);
        let report = check_integrability(&sys, &opts).unwrap();
        assert!(report.pass, "{name}: {report:?}");
        for t in &report.triples {
            assert!(t.max_relative <= 1e-12, "{name} {t:?}");
        }
    }
}

#[test]
fn frobenius_is_identically_zero() {
    let (sys, opts) = load("frobenius");
    let report = check_integrability(&sys, &opts).unwrap();
    assert_eq!(report.triples.len(), 1);
    assert_eq!(report.triples[0].max_residual, 0.0);
}

#[test]
fn coupled_pair_identity_instance() {
    // F = 0, f = w, phi = u*w + exp(x1):
    let spec = SystemSpec::new(vec![0.0, 0.0])
        .unknown("u", &[1], 1)
        .unknown("w", &[1, 2], 1)
        .equation("u", 1, "0")
        .equation("w", 1, "w")
        .equation("w", 2, "u*w + exp(x1)")
        .data("u", "cos(x2)")
        .data("w", "1");
    // f_y + f_w phi = u w + e^x; phi_x + phi_u F + phi_w f = e^x + 0 + u w.
    let sys = validate(&spec).unwrap();
    let report = check_integrability(&sys, &CheckOptions::with_x_radius(vec![0.3, 0.3])).unwrap();
    assert!(report.pass);
    assert!(report.triples[0].max_residual <= 1e-12 * report.triples[0].scale);
}

#[test]
fn perturbation_breaks_the_identity() {
    let (sys, opts) = load("seven_unknowns_fault");
    let p = generic_point(&sys);
    let r = residual_at_point(&sys, &mi(&[1, 2]), 1, 2, &p).unwrap();
    assert!(r >= 0.4, "{r}");
    let report = check_integrability(&sys, &opts).unwrap();
    assert!(!report.pass);
    let worst = report.triples.iter().map(|t| t.max_residual).fold(0.0, f64::max);
    assert!(worst >= 0.1);
    for name in ["frobenius_fault", "three_unknown_pair_fault"] {
        let (sys, opts) = load(name);
        assert!(!check_integrability(&sys, &opts).unwrap().pass, "{name}");
    }
}

#[test]
fn structural_violation_fails_without_sampling() {
    let (sys, opts) = load("coupled_pair_fault");
    let report = check_integrability(&sys, &opts).unwrap();
    assert!(!report.pass);
    assert!(report.triples.is_empty());
    assert_eq!(report.violations, vec![Violation::Dependency { index: mi(&[1, 2]), axis: 1, unknown: "u".into() }]);
}

#[test]
fn antisymmetric_in_i_and_j() {
    let (sys, _) = load("seven_unknowns_fault");
    let p = generic_point(&sys);
    for (index, i, j) in triples(&sys) {
        let a = residual_at_point(&sys, &index, i, j, &p).unwrap();
        let b = residual_at_point(&sys, &index, j, i, &p).unwrap();
        assert!((a - b).abs() <= 1e-14 * (1.0 + a), "{index} {i} {j}: {a} vs {b}");
    }
}

#[test]
fn symbolic_matches_finite_differences() {
    for name in ["seven_unknowns", "seven_unknowns_fault", "three_unknown_pair_fault", "frobenius_vector"] {
        let (sys, _) = load(name);
        let p = generic_point(&sys);
        for (index, i, j) in triples(&sys) {
            let (sym, scale) = residual_and_scale_at_point(&sys, &index, i, j, &p).unwrap();
            let num = residual_at_point_numeric(&sys, &index, i, j, &p, 1e-5).unwrap();
            assert!((sym - num).abs() <= 1e-5 * scale, "{name} {index}: {sym} vs {num}");
        }
    }
}

#[test]
fn relabelling_unknowns_changes_nothing() {
    let (sys, opts) = load("seven_unknowns_fault");
    let names = ["u", "v", "w", "p", "q", "r", "s"];
    let renamed: HashMap<String, crate::expr::Expr> =
        names.iter().map(|n| (n.to_string(), crate::expr::Expr::var(format!("z{n}")))).collect();
    let mut spec = sys.spec().clone();
    spec.unknowns.reverse();
    for u in spec.unknowns.iter_mut() {
        u.name = format!("z{}", u.name);
    }
    for e in spec.equations.iter_mut() {
        e.unknown = format!("z{}", e.unknown);
        e.rhs = e.rhs.substitute(&renamed);
    }
    for d in spec.data.iter_mut() {
        d.unknown = format!("z{}", d.unknown);
    }
    let other = validate(&spec).unwrap();
    let a = check_integrability(&sys, &opts).unwrap();
    let b = check_integrability(&other, &opts).unwrap();
    let key = |r: &IntegrabilityReport| {
        let mut v: Vec<(MultiIndex, usize, usize, bool)> =
            r.triples.iter().map(|t| (t.index.clone(), t.i, t.j, t.pass)).collect();
        v.sort_by(|x, y| x.partial_cmp(y).unwrap());
        v
    };
    assert_eq!(key(&a), key(&b));
    assert_eq!(a.pass, b.pass);
}
