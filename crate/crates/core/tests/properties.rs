// SPDX-License-Identifier: Apache-2.0

mod common;

use darboux_core::expr::{parse, Expr};
use darboux_core::fixtures;
use darboux_core::integrability::{residual_and_scale_at_point, residual_at_point_numeric, triples};
use darboux_core::{validate, Env, Grid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tree() -> impl Strategy<Value = Expr> {
    (any::<u64>(), 0u32..5).prop_map(|(seed, depth)| common::tame_tree(&mut ChaCha8Rng::seed_from_u64(seed), depth))
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn printing_round_trips(e in tree(), p in point()) {
        let text = e.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(back.to_string(), text.clone());
        let env = common::env_at(&p);
        prop_assert_eq!(back.eval(&env).unwrap().to_bits(), e.eval(&env).unwrap().to_bits(), "{}", text);
    }

    #[test]
    fn derivative_uses_no_new_variables(e in tree(), v in 0usize..3) {
        let d = e.diff(common::VARS[v]);
        prop_assert!(d.free_vars().is_subset(&e.free_vars()));
    }

    #[test]
    fn derivative_is_linear(a in tree(), b in tree(), s in -3.0f64..3.0, p in point()) {
        let env = common::env_at(&p);
        let combo = Expr::num(s) * a.clone() + b.clone();
        let lhs = combo.diff("x").eval(&env).unwrap();
        let rhs = s * a.diff("x").eval(&env).unwrap() + b.diff("x").eval(&env).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn derivative_matches_finite_differences(e in tree(), v in 0usize..3, p in point()) {
        let exact = e.diff(common::VARS[v]).eval(&common::env_at(&p)).unwrap();
        let fd = common::five_point(&e, common::VARS[v], &p, 1e-3);
        prop_assert!((exact - fd).abs() <= 1e-5 * (1.0 + exact.abs()), "{}: {} vs {}", e, exact, fd);
    }

    #[test]
    fn simplify_preserves_value(e in tree(), p in point()) {
        let env = common::env_at(&p);
        let a = e.eval(&env).unwrap();
        let b = e.simplify().eval(&env).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn integrability_residual_is_antisymmetric_and_matches_fd(
        shift in prop::collection::vec(-0.2f64..0.2, 10),
        fault in any::<bool>(),
    ) {
        let name = if fault { "seven_unknowns_fault" } else { "seven_unknowns" };
        let sys = validate(&fixtures::get(name).unwrap().load().system).unwrap();
        let env: Env = sys.slot_map().names().iter().zip(&shift).map(|(n, s)| (n.clone(), 0.5 + s)).collect();
        for (index, i, j) in triples(&sys) {
            let (r, scale) = residual_and_scale_at_point(&sys, &index, i, j, &env).unwrap();
            let (back, _) = residual_and_scale_at_point(&sys, &index, j, i, &env).unwrap();
            prop_assert!((r - back).abs() <= 1e-14 * scale);
            let fd = residual_at_point_numeric(&sys, &index, i, j, &env, 1e-5).unwrap();
            prop_assert!((r - fd).abs() <= 1e-5 * scale, "{} {} {}: {} vs {}", index, i, j, r, fd);
        }
    }

    #[test]
    fn grid_indexing_round_trips(m1 in 1usize..6, m2 in 1usize..6, f in 0usize..10_000) {
        let grid = Grid::build(&[1, 4], &[0.0, 1.0], &[1.0, 2.0], &[2 * m1 + 1, 2 * m2 + 1]).unwrap();
        let f = f % grid.len();
        prop_assert_eq!(grid.flatten(&grid.unflatten(f)), f);
        let proj = grid.projection(4).unwrap();
        let nodes = grid.slice_nodes(4).unwrap();
        prop_assert_eq!(proj[nodes[proj[f]]], proj[f]);
    }
}
