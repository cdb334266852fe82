// SPDX-License-Identifier: Apache-2.0

//! Random expression trees that are defined and smooth on `[-1, 1]^3`.

#![allow(dead_code)]

use darboux_core::expr::{BinOp, Expr, Func};
use rand::Rng;

pub const VARS: [&str; 3] = ["x", "y", "z"];

/// A tree of depth at most `depth` whose every subexpression stays in the
/// domain of its operator for arguments in `[-1, 1]^3`.
pub fn tame_tree<R: Rng>(rng: &mut R, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.6) {
            Expr::var(VARS[rng.gen_range(0..3)])
        } else {
            Expr::num((rng.gen_range(-20..=20) as f64) / 8.0)
        };
    }
    let a = tame_tree(rng, depth - 1);
    match rng.gen_range(0..11) {
        0 => a + tame_tree(rng, depth - 1),
        1 => a - tame_tree(rng, depth - 1),
        2 | 3 => a * tame_tree(rng, depth - 1),
        4 => a / (Expr::num(2.0) + Expr::call(Func::Cos, tame_tree(rng, depth - 1))),
        5 => Expr::binary(BinOp::Pow, a, Expr::num(rng.gen_range(2..=3) as f64)),
        6 => Expr::binary(
            BinOp::Pow,
            Expr::num(2.0) + Expr::call(Func::Sin, a),
            Expr::call(Func::Tanh, tame_tree(rng, depth - 1)),
        ),
        7 => Expr::call(if rng.gen_bool(0.5) { Func::Sin } else { Func::Cos }, a),
        8 => Expr::call(Func::Exp, Expr::call(Func::Tanh, a)),
        9 => Expr::call(Func::Log, Expr::num(2.0) + Expr::call(Func::Sin, a)),
        _ => Expr::call(Func::Sqrt, Expr::num(1.0) + a.clone() * a),
    }
}

/// Fourth-order central difference of `e` in `var` at `point`.
pub fn five_point(e: &Expr, var: &str, point: &[f64; 3], h: f64) -> f64 {
    let at = |shift: f64| {
        let env: darboux_core::Env =
            VARS.iter().zip(point).map(|(n, v)| (*n, if *n == var { v + shift } else { *v })).collect();
        e.eval(&env).expect("tame")
    };
    (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
}

pub fn env_at(point: &[f64; 3]) -> darboux_core::Env {
    VARS.iter().zip(point).map(|(n, v)| (*n, *v)).collect()
}
