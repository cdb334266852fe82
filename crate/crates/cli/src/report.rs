// SPDX-License-Identifier: Apache-2.0

//! Plain-text report tables.

use std::fmt::Write;

use darboux_core::harness::{CandidateReport, ConvergenceReport, ErrorReport};
use darboux_core::{ConsistencyReport, Constants, DarbouxSolution, DeltaReport, IntegrabilityReport, ValidatedSystem};

/// Left-aligned columns separated by two spaces.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let padded: Vec<String> =
            cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}", w = *w)).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

pub fn system_summary(sys: &ValidatedSystem) -> String {
    let mut out = String::new();
    let kind = if sys.is_determined() { "determined" } else { "overdetermined" };
    let _ = writeln!(
        out,
        "system: {} variables, {} scalar unknowns, {kind}",
        sys.n(),
        sys.scalar_count()
    );
    for g in sys.merges() {
        let _ = writeln!(out, "merged unknowns {} sharing index {} into one vector unknown", g.name(), g.index);
    }
    out
}

pub fn integrability(report: &IntegrabilityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "integrability check: {} samples, tolerance {:e} relative to 1 + max |term|",
        report.samples, report.tol
    );
    if !report.violations.is_empty() {
        let _ = writeln!(out, "structural violations:");
        for v in &report.violations {
            let _ = writeln!(out, "  - {v}");
        }
    }
    if !report.triples.is_empty() {
        let rows: Vec<Vec<String>> = report
            .triples
            .iter()
            .map(|t| {
                let at: Vec<String> = t.at.iter().map(|(n, v)| format!("{n}={v:.4}")).collect();
                vec![
                    format!("{}, {}, {}", t.index, t.i, t.j),
                    sci(t.max_residual),
                    sci(t.scale),
                    sci(t.max_relative),
                    at.join(" "),
                    verdict(t.pass).into(),
                ]
            })
            .collect();
        out.push_str(&table(&["(I, i, j)", "max residual", "scale", "max relative", "at point", "verdict"], &rows));
    } else if report.violations.is_empty() {
        let _ = writeln!(out, "no multi-index has two axes; nothing to check");
    }
    let _ = writeln!(out, "integrability: {}", if report.pass { "PASS" } else { "FAIL" });
    out
}

pub fn delta(report: &DeltaReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "equation defects (threshold {}):", sci(report.threshold));
    if report.entries.is_empty() {
        let _ = writeln!(out, "  none: every equation is integrated directly");
        return out;
    }
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| vec![format!("{}, {}", e.index, e.i), sci(e.sup), verdict(e.pass).into()])
        .collect();
    out.push_str(&table(&["(I, i)", "sup |defect|", "verdict"], &rows));
    out
}

pub fn consistency(report: &ConsistencyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "hyperplane consistency (threshold {}):", sci(report.threshold));
    if report.entries.is_empty() {
        let _ = writeln!(out, "  no pair of restricted systems overlaps");
        return out;
    }
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| vec![format!("{}, {}, {}", e.index, e.k, e.l), sci(e.sup), verdict(e.pass).into()])
        .collect();
    out.push_str(&table(&["(I, k, l)", "sup discrepancy", "verdict"], &rows));
    out
}

pub fn constants(c: &Constants) -> String {
    format!(
        "constants (sampled, {} points): a = {}, b = {}, M = {}, L = {}, N = {}, sigma = {}\n",
        c.samples,
        c.a,
        c.b,
        sci(c.m),
        sci(c.l),
        c.n,
        sci(c.sigma)
    )
}

pub fn solution(sol: &DarbouxSolution) -> String {
    let mut out = String::new();
    let s = &sol.solution;
    let points: Vec<String> = s.grid.axes().iter().map(|a| a.points.to_string()).collect();
    let _ = writeln!(
        out,
        "grid {} nodes ({}), {} Picard iterations, final update {}",
        s.grid.len(),
        points.join(" x "),
        s.iterations,
        sci(s.final_update)
    );
    for (axis, sub) in &sol.subsystems {
        let _ = writeln!(
            out,
            "  system {axis} (x{axis} fixed): {} iterations, final update {}, checks {}",
            sub.solution.iterations,
            sci(sub.solution.final_update),
            verdict(sub.pass())
        );
    }
    if let Some(c) = &s.constants {
        out.push_str(&constants(c));
    }
    out.push_str(&delta(&sol.delta));
    out.push_str(&consistency(&sol.consistency));
    let _ = writeln!(out, "solve: {}", if sol.pass() { "PASS" } else { "FAIL" });
    out
}

pub fn errors(report: &ErrorReport) -> String {
    let rows: Vec<Vec<String>> =
        report.components.iter().map(|c| vec![c.component.clone(), sci(c.sup), sci(c.rms)]).collect();
    table(&["component", "sup error", "rms error"], &rows)
}

pub fn candidate(report: &CandidateReport, tol: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "candidate residuals over {} sample points:", report.samples);
    let mut rows: Vec<Vec<String>> = report
        .equations
        .iter()
        .map(|e| vec![e.component.clone(), format!("equation x{}", e.axis), sci(e.max), verdict(e.max <= tol).into()])
        .collect();
    rows.extend(
        report.data.iter().map(|d| vec![d.component.clone(), "data".into(), sci(d.max), verdict(d.max <= tol).into()]),
    );
    out.push_str(&table(&["component", "clause", "max residual", "verdict"], &rows));
    let _ = writeln!(out, "verify: {} (tolerance {:e})", if report.max() <= tol { "PASS" } else { "FAIL" }, tol);
    out
}

pub fn convergence(report: &ConvergenceReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "convergence study against {}", report.reference);
    let rows: Vec<Vec<String>> = report
        .levels
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let pts: Vec<String> = l.points.iter().map(|p| p.to_string()).collect();
            let ratio = if k == 0 { "-".to_string() } else { format!("{:.3}", report.ratios[k - 1]) };
            vec![pts.join("x"), sci(l.spacing), sci(l.sup_error), ratio, l.iterations.to_string()]
        })
        .collect();
    out.push_str(&table(&["points", "spacing", "sup error", "log2 ratio", "iterations"], &rows));
    let _ = writeln!(out, "observed order: {}", report.order);
    out
}
