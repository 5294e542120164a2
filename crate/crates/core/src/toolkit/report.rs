//! Text and JSON renderings of solver results.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::poly::HDPoly;
use crate::solver::{SolveReport, SolveStats};

pub fn stats_json(s: &SolveStats) -> Value {
    let rules: Map<String, Value> = s
        .rules
        .entries()
        .into_iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    json!({
        "calls": s.calls,
        "nodes": s.nodes.to_string(),
        "leaves": s.leaves.to_string(),
        "branched_vars": s.branched_vars,
        "max_depth": s.max_depth,
        "rules": rules,
    })
}

/// `{"n", "m", "poly", "max_hd", "solutions", "stats"}`, keys in that order.
pub fn report_json(r: &SolveReport) -> Value {
    json!({
        "n": r.n,
        "m": r.m,
        "poly": r.poly.to_json(),
        "max_hd": r.max_hd,
        "solutions": r.solutions.to_string(),
        "stats": stats_json(&r.stats),
    })
}

/// Oracle output: same layout without `stats`.
pub fn oracle_json(n: u32, m: usize, poly: &HDPoly) -> Value {
    json!({
        "n": n,
        "m": m,
        "poly": poly.to_json(),
        "max_hd": poly.degree(),
        "solutions": poly.coeff(0).to_string(),
    })
}

pub fn poly_text(poly: &HDPoly) -> String {
    let max_hd = poly
        .degree()
        .map_or_else(|| "none".to_string(), |d| d.to_string());
    format!("{poly}\nmax_hd = {max_hd}\nsolutions = {}\n", poly.coeff(0))
}

pub fn stats_text(s: &SolveStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "calls = {}", s.calls);
    let _ = writeln!(out, "nodes = {}", s.nodes);
    let _ = writeln!(out, "leaves = {}", s.leaves);
    let _ = writeln!(out, "branched_vars = {}", s.branched_vars);
    let _ = writeln!(out, "max_depth = {}", s.max_depth);
    for (name, count) in s.rules.entries() {
        let _ = writeln!(out, "rule.{name} = {count}");
    }
    out
}
