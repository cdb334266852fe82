// SPDX-License-Identifier: Apache-2.0

use super::*;
use crate::fixtures;
use crate::system::{validate, SystemSpec};

fn fixture(name: &str) -> (ValidatedSystem, Grid) {
    let file = fixtures::get(name).unwrap().load();
    let sys = validate(&file.system).unwrap();
    let solve = file.solve.unwrap();
    let grid = grid_for(&sys, &solve.half_widths, &solve.points).unwrap();
    (sys, grid)
}

fn ode(rhs: &str) -> ValidatedSystem {
    validate(&SystemSpec::new(vec![0.0]).unknown("u", &[1], 1).equation("u", 1, rhs).data("u", "1")).unwrap()
}

#[test]
fn zero_rhs_reproduces_data_in_one_sweep() {
    let (sys, grid) = fixture("zero_rhs");
    let sol = solve_determined(&sys, &grid, &PicardOptions::default()).unwrap();
    assert_eq!(sol.iterations, 1);
    assert_eq!(sol.final_update, 0.0);
    for f in 0..grid.len() {
        let c = grid.coordinates(f);
        assert_eq!(sol.field("u").unwrap()[f], (3.0 * c[1]).sin());
        assert_eq!(sol.field("v").unwrap()[f], c[0].powi(2) - 1.0);
    }
}

#[test]
fn exponential_ode() {
    let (sys, grid) = fixture("ode_exp");
    let sol = solve_determined(&sys, &grid, &PicardOptions::default()).unwrap();
    assert!(sol.iterations <= 60, "{} iterations", sol.iterations);
    let err = (0..grid.len()).map(|f| (sol.fields[0][f] - grid.coordinates(f)[0].exp()).abs()).fold(0.0, f64::max);
    assert!(err <= 5e-6, "sup error {err}");
    assert!((sol.fields[0][grid.len() - 1] - 0.5f64.exp()).abs() <= 5e-6);
}

#[test]
fn linear_integrands_are_integrated_exactly() {
    // u = x1 + x2, v = x1 - x2, w = x1 x2.
    let spec = SystemSpec::new(vec![0.0, 0.0])
        .unknown("u", &[1], 1)
        .unknown("v", &[2], 1)
        .unknown("w", &[1], 1)
        .equation("u", 1, "1")
        .equation("v", 2, "-1")
        .equation("w", 1, "x2")
        .data("u", "x2")
        .data("v", "x1")
        .data("w", "0");
    let sys = validate(&spec).unwrap();
    let grid = grid_for(&sys, &[0.5, 0.5], &[33, 33]).unwrap();
    let sol = solve_determined(&sys, &grid, &PicardOptions::default()).unwrap();
    for f in 0..grid.len() {
        let c = grid.coordinates(f);
        assert!((sol.field("u").unwrap()[f] - (c[0] + c[1])).abs() <= 1e-12);
        assert!((sol.field("v").unwrap()[f] - (c[0] - c[1])).abs() <= 1e-12);
        assert!((sol.field("w").unwrap()[f] - c[0] * c[1]).abs() <= 1e-12);
    }
}

#[test]
fn data_hold_exactly_on_base_hyperplanes() {
    let (sys, grid) = fixture("merged_vectors");
    let sol = solve_determined(&sys, &grid, &PicardOptions::default()).unwrap();
    for (c, comp) in sys.components().iter().enumerate() {
        let axis = sys.groups()[comp.group].index.min_axis();
        let slice = grid.slice(axis).unwrap();
        let want = evaluate_on_grid(sys.data(c), &slice, String::new).unwrap();
        for (s, &f) in grid.slice_nodes(axis).unwrap().iter().enumerate() {
            assert_eq!(sol.fields[c][f], want[s], "{}", comp.var);
        }
    }
}

#[test]
fn initialisation_does_not_matter() {
    for name in ["ode_exp", "zero_rhs", "merged_vectors"] {
        let (sys, grid) = fixture(name);
        let opts = PicardOptions::default();
        let a = solve_determined(&sys, &grid, &opts).unwrap();
        let b = solve_determined(&sys, &grid, &PicardOptions { init: Init::Zeros, ..opts }).unwrap();
        for (fa, fb) in a.fields.iter().zip(&b.fields) {
            for (x, y) in fa.iter().zip(fb) {
                assert!((x - y).abs() <= 10.0 * opts.tol, "{name}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn constants_closed_forms() {
    let c = estimate_constants(&ode("2"), 1.0, 1.0, 256).unwrap();
    assert_eq!((c.m, c.l, c.sigma), (2.0, 0.0, 0.25));
    let z = estimate_constants(&ode("0"), 0.7, 1.0, 256).unwrap();
    assert_eq!((z.m, z.sigma), (0.0, 0.7));
}

#[test]
fn constants_sampled_sup_of_linear_rhs() {
    // sup |u| over |u - 1| <= 1 is 2; L is exactly 1.
    let c = estimate_constants(&ode("u"), 0.5, 1.0, 10_000).unwrap();
    assert!((1.9..=2.0).contains(&c.m), "M = {}", c.m);
    assert!((c.l - 1.0).abs() < 1e-9);
}

#[test]
fn constants_report_eval_errors() {
    let err = estimate_constants(&ode("log(x1)"), 0.5, 1.0, 64).unwrap_err();
    assert!(err.to_string().contains("x1="), "{err}");
}

#[test]
fn non_convergence_is_reported() {
    let sys = ode("5*u");
    let grid = grid_for(&sys, &[1.0], &[65]).unwrap();
    let err = solve_determined(&sys, &grid, &PicardOptions { max_iter: 5, ..Default::default() }).unwrap_err();
    assert!(matches!(err, SolveError::NonConvergence { iterations: 5, .. }), "{err}");
    assert!(err.is_non_convergence());
}

#[test]
fn blow_up_is_an_error() {
    let sys = ode("u^2");
    let grid = grid_for(&sys, &[3.0], &[65]).unwrap();
    let err = solve_determined(&sys, &grid, &PicardOptions::default()).unwrap_err();
    assert!(err.is_non_convergence() || matches!(err, SolveError::Eval(_)), "{err}");
}

#[test]
fn eval_error_names_the_node() {
    let sys = ode("log(x1)");
    let grid = grid_for(&sys, &[0.5], &[5]).unwrap();
    let err = solve_determined(&sys, &grid, &PicardOptions::default()).unwrap_err();
    let SolveError::Eval(e) = err else { panic!("{err}") };
    assert_eq!(e.point[0], ("x1".to_string(), -0.5));
}

#[test]
fn grid_must_match() {
    let sys = ode("u");
    let grid = Grid::build(&[1], &[0.1], &[0.5], &[5]).unwrap();
    assert!(matches!(solve_determined(&sys, &grid, &PicardOptions::default()), Err(SolveError::GridMismatch(_))));
}
