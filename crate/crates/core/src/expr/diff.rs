// SPDX-License-Identifier: Apache-2.0

use super::{BinOp, Expr, Func};

/// Symbolic partial derivative with respect to `var`, lightly simplified.
pub(crate) fn diff(e: &Expr, var: &str) -> Expr {
    raw(e, var).simplify()
}

fn raw(e: &Expr, var: &str) -> Expr {
    if !e.depends_on(var) {
        return Expr::Num(0.0);
    }
    match e {
        Expr::Num(_) => Expr::Num(0.0),
        Expr::Var(name) => Expr::Num(if name == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => Expr::neg(raw(a, var)),
        Expr::Binary(op, a, b) => {
            let (a, b) = (a.as_ref(), b.as_ref());
            match op {
                BinOp::Add => raw(a, var) + raw(b, var),
                BinOp::Sub => raw(a, var) - raw(b, var),
                BinOp::Mul => raw(a, var) * b.clone() + a.clone() * raw(b, var),
                BinOp::Div => {
                    // (a'b - ab') / b^2
                    (raw(a, var) * b.clone() - a.clone() * raw(b, var))
                        / Expr::binary(BinOp::Pow, b.clone(), Expr::Num(2.0))
                }
                BinOp::Pow if !b.depends_on(var) => {
                    let lowered = Expr::binary(BinOp::Pow, a.clone(), (b.clone() - Expr::Num(1.0)).simplify());
                    b.clone() * lowered * raw(a, var)
                }
                BinOp::Pow => {
                    // a^b * (b' log a + b a'/a)
                    let log_a = Expr::call(Func::Log, a.clone());
                    e.clone() * (raw(b, var) * log_a + b.clone() * raw(a, var) / a.clone())
                }
            }
        }
        Expr::Call(f, a) => {
            let inner = raw(a, var);
            let a = a.as_ref().clone();
            let outer = match f {
                Func::Sin => Expr::call(Func::Cos, a),
                Func::Cos => Expr::neg(Expr::call(Func::Sin, a)),
                Func::Exp => Expr::call(Func::Exp, a),
                Func::Log => Expr::Num(1.0) / a,
                Func::Sqrt => Expr::Num(1.0) / (Expr::Num(2.0) * Expr::call(Func::Sqrt, a)),
                Func::Tanh => {
                    let t = Expr::call(Func::Tanh, a);
                    Expr::Num(1.0) - t.clone() * t
                }
            };
            outer * inner
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Env, Expr};

    fn d(src: &str, var: &str) -> Expr {
        parse(src).unwrap().diff(var)
    }

    #[test]
    fn square() {
        assert_eq!(d("x1^2", "x1").to_string(), "2*x1");
    }

    #[test]
    fn absent_variable() {
        assert_eq!(d("sin(w)", "x1"), Expr::Num(0.0));
    }

    #[test]
    fn product_matches_finite_difference() {
        let e = parse("x1*w").unwrap();
        let de = e.diff("w");
        let env = Env::new().with("x1", 2.0).with("w", 5.0);
        let exact = de.eval(&env).unwrap();
        assert_eq!(exact, 2.0);
        // central difference oracle, step 1e-5
        let h = 1e-5;
        let fd = (e.eval(&env.clone().with("w", 5.0 + h)).unwrap() - e.eval(&env.clone().with("w", 5.0 - h)).unwrap())
            / (2.0 * h);
        assert!((exact - fd).abs() <= 1e-6);
    }

    #[test]
    fn elementary_functions() {
        let env = Env::new().with("x", 0.7);
        let cases = [
            ("sin(x)", 0.7f64.cos()),
            ("cos(x)", -(0.7f64.sin())),
            ("exp(2*x)", 2.0 * (1.4f64).exp()),
            ("log(x)", 1.0 / 0.7),
            ("sqrt(x)", 0.5 / 0.7f64.sqrt()),
            ("tanh(x)", 1.0 - 0.7f64.tanh().powi(2)),
            ("x^x", 0.7f64.powf(0.7) * (0.7f64.ln() + 1.0)),
            ("2^x", 2f64.powf(0.7) * 2f64.ln()),
            ("1/x", -1.0 / 0.49),
        ];
        for (src, want) in cases {
            let got = d(src, "x").eval(&env).unwrap();
            assert!((got - want).abs() < 1e-12, "{src}: {got} vs {want}");
        }
    }
}
