// SPDX-License-Identifier: Apache-2.0

//! Line-oriented system-spec files.
//!
//! ```text
//! [vars]      n = 3   base = 0 0 0
//! [unknown]   name = w   index = 1 2   dim = 1
//! [equation]  unknown = w  axis = 1  rhs = "x2 + w*u"
//! [data]      unknown = w  expr = "sin(x3)"
//! [solve]     halfwidth = 0.25 0.25 0.25   points = 33 33 33
//! [picard]    tol = 1e-12   max_iter = 200
//! ```
//!
//! `[equation]` and `[data]` take an optional `component = k` (1-based) for
//! vector unknowns. `#` starts a comment outside quotes.

use std::collections::HashMap;

use thiserror::Error;

use super::{DataSpec, EquationSpec, MultiIndex, SystemSpec, UnknownSpec};
use crate::expr;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

/// Grid settings from the `[solve]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSettings {
    pub half_widths: Vec<f64>,
    pub points: Vec<usize>,
}

/// Iteration settings from the `[picard]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardSettings {
    fn default() -> Self {
        PicardSettings { tol: 1e-12, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub system: SystemSpec,
    pub solve: Option<SolveSettings>,
    pub picard: PicardSettings,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Eq,
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>, FormatError> {
    let mut out = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(_, c)) = chars.peek() {
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                chars.next();
            }
            '=' => {
                chars.next();
                out.push(Tok::Eq);
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some((_, '"')) => break,
                        Some((_, ch)) => s.push(ch),
                        None => return Err(FormatError { line: lineno, message: "unterminated string".into() }),
                    }
                }
                out.push(Tok::Quoted(s));
            }
            _ => {
                let mut s = String::new();
                while let Some(&(_, ch)) = chars.peek() {
                    if ch.is_whitespace() || ch == '=' || ch == '"' || ch == '#' {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                out.push(Tok::Word(s));
            }
        }
    }
    Ok(out)
}

struct Record {
    section: String,
    line: usize,
    values: HashMap<String, Vec<Tok>>,
}

impl Record {
    fn err(&self, message: impl Into<String>) -> FormatError {
        FormatError { line: self.line, message: message.into() }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), FormatError> {
        let mut keys: Vec<&String> = self.values.keys().collect();
        keys.sort();
        for k in keys {
            if !allowed.contains(&k.as_str()) {
                return Err(self.err(format!("unknown key `{k}` in [{}]", self.section)));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Result<&[Tok], FormatError> {
        self.values.get(key).map(Vec::as_slice).ok_or_else(|| self.err(format!("missing key `{key}`")))
    }

    fn words(&self, key: &str) -> Result<Vec<String>, FormatError> {
        self.raw(key)?
            .iter()
            .map(|t| match t {
                Tok::Word(w) => Ok(w.clone()),
                _ => Err(self.err(format!("`{key}` expects bare values"))),
            })
            .collect()
    }

    fn word(&self, key: &str) -> Result<String, FormatError> {
        let w = self.words(key)?;
        match w.as_slice() {
            [one] => Ok(one.clone()),
            _ => Err(self.err(format!("`{key}` expects exactly one value"))),
        }
    }

    fn string(&self, key: &str) -> Result<String, FormatError> {
        match self.raw(key)? {
            [Tok::Quoted(s)] | [Tok::Word(s)] => Ok(s.clone()),
            _ => Err(self.err(format!("`{key}` expects one quoted expression"))),
        }
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<T, FormatError> {
        let w = self.word(key)?;
        w.parse().map_err(|_| self.err(format!("`{key}`: cannot parse `{w}`")))
    }

    fn numbers<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, FormatError> {
        self.words(key)?
            .into_iter()
            .map(|w| w.parse().map_err(|_| self.err(format!("`{key}`: cannot parse `{w}`"))))
            .collect()
    }

    fn optional_number<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, FormatError> {
        if self.values.contains_key(key) {
            self.number(key)
        } else {
            Ok(default)
        }
    }

    fn expr(&self, key: &str) -> Result<expr::Expr, FormatError> {
        let src = self.string(key)?;
        expr::parse(&src).map_err(|e| self.err(format!("`{key}`: {e}")))
    }
}

fn parse_record(line: &str, lineno: usize) -> Result<Option<Record>, FormatError> {
    let trimmed = line.trim_start();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let err = |message: String| FormatError { line: lineno, message };
    let rest = trimmed.strip_prefix('[').ok_or_else(|| err("expected `[section]`".into()))?;
    let close = rest.find(']').ok_or_else(|| err("unterminated section header".into()))?;
    let section = rest[..close].trim().to_string();
    let toks = tokenize(&rest[close + 1..], lineno)?;

    let mut values: HashMap<String, Vec<Tok>> = HashMap::new();
    let mut k = 0;
    while k < toks.len() {
        let key = match (&toks[k], toks.get(k + 1)) {
            (Tok::Word(w), Some(Tok::Eq)) => w.clone(),
            _ => return Err(err("expected `key = value`".into())),
        };
        k += 2;
        let mut vals = Vec::new();
        while k < toks.len() && !(matches!(toks[k], Tok::Word(_)) && toks.get(k + 1) == Some(&Tok::Eq)) {
            if toks[k] == Tok::Eq {
                return Err(err(format!("stray `=` after `{key}`")));
            }
            vals.push(toks[k].clone());
            k += 1;
        }
        if vals.is_empty() {
            return Err(err(format!("`{key}` has no value")));
        }
        if values.insert(key.clone(), vals).is_some() {
            return Err(err(format!("key `{key}` given twice")));
        }
    }
    Ok(Some(Record { section, line: lineno, values }))
}

/// Parses a system-spec file.
pub fn parse_spec_file(text: &str) -> Result<SpecFile, FormatError> {
    let mut vars: Option<(usize, Vec<f64>)> = None;
    let mut unknowns = Vec::new();
    let mut equations = Vec::new();
    let mut data = Vec::new();
    let mut solve = None;
    let mut picard = None;

    for (k, line) in text.lines().enumerate() {
        let Some(rec) = parse_record(line, k + 1)? else { continue };
        match rec.section.as_str() {
            "vars" => {
                rec.check_keys(&["n", "base"])?;
                if vars.is_some() {
                    return Err(rec.err("[vars] given twice"));
                }
                let n: usize = rec.number("n")?;
                let base: Vec<f64> = if rec.values.contains_key("base") { rec.numbers("base")? } else { vec![0.0; n] };
                if n == 0 || base.len() != n {
                    return Err(rec.err(format!("base has {} coordinates but n = {n}", base.len())));
                }
                vars = Some((n, base));
            }
            "unknown" => {
                rec.check_keys(&["name", "index", "dim"])?;
                let index = MultiIndex::new(rec.numbers::<usize>("index")?).map_err(|e| rec.err(e.to_string()))?;
                unknowns.push(UnknownSpec::new(rec.word("name")?, index, rec.optional_number("dim", 1)?));
            }
            "equation" => {
                rec.check_keys(&["unknown", "axis", "component", "rhs"])?;
                equations.push(EquationSpec {
                    unknown: rec.word("unknown")?,
                    component: rec.optional_number("component", 1)?,
                    axis: rec.number("axis")?,
                    rhs: rec.expr("rhs")?,
                });
            }
            "data" => {
                rec.check_keys(&["unknown", "component", "expr"])?;
                data.push(DataSpec {
                    unknown: rec.word("unknown")?,
                    component: rec.optional_number("component", 1)?,
                    expr: rec.expr("expr")?,
                });
            }
            "solve" => {
                rec.check_keys(&["halfwidth", "points"])?;
                solve = Some(SolveSettings { half_widths: rec.numbers("halfwidth")?, points: rec.numbers("points")? });
            }
            "picard" => {
                rec.check_keys(&["tol", "max_iter"])?;
                let defaults = PicardSettings::default();
                picard = Some(PicardSettings {
                    tol: rec.optional_number("tol", defaults.tol)?,
                    max_iter: rec.optional_number("max_iter", defaults.max_iter)?,
                });
            }
            other => return Err(rec.err(format!("unknown section [{other}]"))),
        }
    }

    let (_, base) = vars.ok_or(FormatError { line: 0, message: "missing [vars] section".into() })?;
    if let Some(s) = &solve {
        if s.half_widths.len() != base.len() || s.points.len() != base.len() {
            return Err(FormatError { line: 0, message: "[solve] needs one halfwidth and one point count per axis".into() });
        }
    }
    let mut system = SystemSpec::new(base);
    system.unknowns = unknowns;
    system.equations = equations;
    system.data = data;
    Ok(SpecFile { system, solve, picard: picard.unwrap_or_default() })
}

/// Renders a spec back into the file format.
pub fn write_spec_file(spec: &SpecFile) -> String {
    use std::fmt::Write;
    let sys = &spec.system;
    let join = |v: &[String]| v.join(" ");
    let mut out = String::new();
    let base: Vec<String> = sys.base_point.iter().map(|v| format!("{v:?}")).collect();
    let _ = writeln!(out, "[vars] n = {} base = {}", sys.base_point.len(), join(&base));
    for u in &sys.unknowns {
        let idx: Vec<String> = u.index.axes().iter().map(|a| a.to_string()).collect();
        let _ = writeln!(out, "[unknown] name = {} index = {} dim = {}", u.name, join(&idx), u.dim);
    }
    for e in &sys.equations {
        let _ = writeln!(
            out,
            "[equation] unknown = {} component = {} axis = {} rhs = \"{}\"",
            e.unknown, e.component, e.axis, e.rhs
        );
    }
    for d in &sys.data {
        let _ = writeln!(out, "[data] unknown = {} component = {} expr = \"{}\"", d.unknown, d.component, d.expr);
    }
    if let Some(s) = &spec.solve {
        let hw: Vec<String> = s.half_widths.iter().map(|v| format!("{v:?}")).collect();
        let pts: Vec<String> = s.points.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "[solve] halfwidth = {} points = {}", join(&hw), join(&pts));
    }
    let _ = writeln!(out, "[picard] tol = {:e} max_iter = {}", spec.picard.tol, spec.picard.max_iter);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
# two unknowns, one with a two-axis index
[vars]      n = 2   base = 0 0
[unknown]   name = u   index = 1
[unknown]   name = w   index = 1 2   dim = 1
[equation]  unknown = u  axis = 1  rhs = "u + w"
[equation]  unknown = w  axis = 1  rhs = "x2 + w"   # trailing comment
[equation]  unknown = w  axis = 2  rhs = "x1 + u*w"
[data]      unknown = u  expr = "sin(x2)"
[data]      unknown = w  expr = "1"
[solve]     halfwidth = 0.25 0.25   points = 33 33
[picard]    tol = 1e-10   max_iter = 50
"#;

    #[test]
    fn parses_sample() {
        let f = parse_spec_file(SAMPLE).unwrap();
        assert_eq!(f.system.axes, vec![1, 2]);
        assert_eq!(f.system.unknowns.len(), 2);
        assert_eq!(f.system.equations[2].rhs.to_string(), "x1 + u*w");
        assert_eq!(f.solve.as_ref().unwrap().points, vec![33, 33]);
        assert_eq!(f.picard, PicardSettings { tol: 1e-10, max_iter: 50 });
    }

    #[test]
    fn round_trips_through_writer() {
        let f = parse_spec_file(SAMPLE).unwrap();
        let again = parse_spec_file(&write_spec_file(&f)).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        let e = parse_spec_file("[vars] n = 1 base = 0 colour = red").unwrap_err();
        assert!(e.message.contains("colour"), "{e}");
        let e = parse_spec_file("[vars] n = 1\n[bogus] a = 1").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn reports_expression_errors_with_line() {
        let text = "[vars] n = 1\n[unknown] name = u index = 1\n[equation] unknown = u axis = 1 rhs = \"x1 + + u\"";
        let e = parse_spec_file(text).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("offset 5"), "{e}");
    }

    #[test]
    fn missing_vars() {
        assert!(parse_spec_file("[unknown] name = u index = 1").is_err());
    }
}
