// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use thiserror::Error;

use super::{BinOp, Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },
    #[error("non-finite result in {op}")]
    NonFinite { op: &'static str },
}

/// An evaluation failure tagged with what was being evaluated and where.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{what} at ({}): {source}", fmt_point(point))]
pub struct PointEvalError {
    pub what: String,
    pub point: Vec<(String, f64)>,
    pub source: EvalError,
}

fn fmt_point(point: &[(String, f64)]) -> String {
    point.iter().map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(", ")
}

impl PointEvalError {
    /// Builds the error from a slot layout and the values at the failing point.
    pub fn at(what: impl Into<String>, slots: &SlotMap, values: &[f64], source: EvalError) -> PointEvalError {
        let point = slots.names().iter().cloned().zip(values.iter().copied()).collect();
        PointEvalError { what: what.into(), point, source }
    }
}

/// Variable bindings for evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Env(HashMap<String, f64>);

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.0.insert(name.into(), value);
        self
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.0.insert(name.into(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for Env {
    fn from_iter<T: IntoIterator<Item = (S, f64)>>(iter: T) -> Self {
        Env(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

fn finite(op: &'static str, v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { op })
    }
}

pub(crate) fn apply_binary(op: BinOp, a: f64, b: f64) -> Result<f64, EvalError> {
    match op {
        BinOp::Add => finite("addition", a + b),
        BinOp::Sub => finite("subtraction", a - b),
        BinOp::Mul => finite("multiplication", a * b),
        BinOp::Div => {
            if b == 0.0 {
                return Err(EvalError::Domain { op: "division", detail: "division by zero".into() });
            }
            finite("division", a / b)
        }
        BinOp::Pow => {
            let integral = b.fract() == 0.0 && b.abs() <= i32::MAX as f64;
            let r = if integral {
                if a == 0.0 && b < 0.0 {
                    return Err(EvalError::Domain {
                        op: "power",
                        detail: "zero raised to a negative power".into(),
                    });
                }
                a.powi(b as i32)
            } else {
                if a <= 0.0 {
                    return Err(EvalError::Domain {
                        op: "power",
                        detail: format!("non-integer exponent {b} needs a positive base, got {a}"),
                    });
                }
                a.powf(b)
            };
            finite("power", r)
        }
    }
}

pub(crate) fn apply_func(f: Func, a: f64) -> Result<f64, EvalError> {
    match f {
        Func::Sin => finite("sin", a.sin()),
        Func::Cos => finite("cos", a.cos()),
        Func::Exp => finite("exp", a.exp()),
        Func::Tanh => finite("tanh", a.tanh()),
        Func::Log => {
            if a <= 0.0 {
                return Err(EvalError::Domain { op: "log", detail: format!("argument {a} is not positive") });
            }
            finite("log", a.ln())
        }
        Func::Sqrt => {
            if a < 0.0 {
                return Err(EvalError::Domain { op: "sqrt", detail: format!("argument {a} is negative") });
            }
            finite("sqrt", a.sqrt())
        }
    }
}

pub(crate) fn eval_tree(e: &Expr, lookup: &impl Fn(&str) -> Option<f64>) -> Result<f64, EvalError> {
    match e {
        Expr::Num(v) => Ok(*v),
        Expr::Var(name) => lookup(name).ok_or_else(|| EvalError::Unbound(name.clone())),
        Expr::Neg(a) => Ok(-eval_tree(a, lookup)?),
        Expr::Call(f, a) => apply_func(*f, eval_tree(a, lookup)?),
        Expr::Binary(op, a, b) => apply_binary(*op, eval_tree(a, lookup)?, eval_tree(b, lookup)?),
    }
}

/// Assignment of variable names to positions in a flat value slice.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlotMap {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl SlotMap {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> SlotMap {
        let mut map = SlotMap::default();
        for n in names {
            map.push(n);
        }
        map
    }

    /// Adds a name and returns its slot. Re-adding a name returns the existing slot.
    pub fn push(&mut self, name: impl Into<String>) -> usize {
        let name = name.into();
        if let Some(&i) = self.index.get(&name) {
            return i;
        }
        let i = self.names.len();
        self.index.insert(name.clone(), i);
        self.names.push(name);
        i
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Slot(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// An expression with variables resolved to slots, for repeated evaluation
/// on grids and sample sets.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledExpr {
    root: Node,
}

impl CompiledExpr {
    pub fn new(e: &Expr, slots: &SlotMap) -> Result<CompiledExpr, EvalError> {
        Ok(CompiledExpr { root: compile(e, slots)? })
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        eval_node(&self.root, values)
    }
}

fn compile(e: &Expr, slots: &SlotMap) -> Result<Node, EvalError> {
    Ok(match e {
        Expr::Num(v) => Node::Num(*v),
        Expr::Var(name) => Node::Slot(slots.slot(name).ok_or_else(|| EvalError::Unbound(name.clone()))?),
        Expr::Neg(a) => Node::Neg(Box::new(compile(a, slots)?)),
        Expr::Call(f, a) => Node::Call(*f, Box::new(compile(a, slots)?)),
        Expr::Binary(op, a, b) => Node::Binary(*op, Box::new(compile(a, slots)?), Box::new(compile(b, slots)?)),
    })
}

fn eval_node(n: &Node, values: &[f64]) -> Result<f64, EvalError> {
    match n {
        Node::Num(v) => Ok(*v),
        Node::Slot(i) => Ok(values[*i]),
        Node::Neg(a) => Ok(-eval_node(a, values)?),
        Node::Call(f, a) => apply_func(*f, eval_node(a, values)?),
        Node::Binary(op, a, b) => apply_binary(*op, eval_node(a, values)?, eval_node(b, values)?),
    }
}
