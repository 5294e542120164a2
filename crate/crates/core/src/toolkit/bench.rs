//! Timing sweeps over planted instances.

use std::time::{Duration, Instant};

use super::generate::{generate, GenerateError};
use crate::solver::{solve, SolveError, SolveOptions};

/// Growth rate of the worst-case bound, shown next to measured leaf counts.
pub const REFERENCE_BASE: f64 = 1.3298;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: u32,
    pub m: usize,
    pub seed: u64,
    pub wall: Duration,
    pub leaves: u128,
    pub nodes: u128,
    pub reference: f64,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub nmin: u32,
    pub nmax: u32,
    pub step: u32,
    pub trials: u32,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

pub fn reference(n: u32) -> f64 {
    REFERENCE_BASE.powi(n as i32)
}

/// One planted instance with `m = ⌊2n/3⌋` per trial; trial `t` at size `n`
/// uses seed `seed + t`.
pub fn run(cfg: &BenchConfig, opts: &SolveOptions) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    let mut n = cfg.nmin;
    while n <= cfg.nmax {
        let m = (2 * n / 3) as usize;
        for t in 0..cfg.trials {
            let seed = cfg.seed.wrapping_add(u64::from(t));
            let inst = generate(n, m, seed, true)?;
            let start = Instant::now();
            let r = solve(&inst.formula, opts)?;
            rows.push(BenchRow {
                n,
                m,
                seed,
                wall: start.elapsed(),
                leaves: r.stats.leaves,
                nodes: r.stats.nodes,
                reference: reference(n),
            });
        }
        match n.checked_add(cfg.step.max(1)) {
            Some(next) => n = next,
            None => break,
        }
    }
    Ok(rows)
}

pub const HEADER: [&str; 7] = [
    "n",
    "m",
    "seed",
    "wall_ms",
    "leaves",
    "nodes",
    "ref_1.3298^n",
];

fn fields(r: &BenchRow) -> [String; 7] {
    [
        r.n.to_string(),
        r.m.to_string(),
        r.seed.to_string(),
        format!("{:.3}", r.wall.as_secs_f64() * 1e3),
        r.leaves.to_string(),
        r.nodes.to_string(),
        format!("{:.1}", r.reference),
    ]
}

pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&fields(r).join(","));
        out.push('\n');
    }
    out
}

pub fn render_table(rows: &[BenchRow]) -> String {
    let body: Vec<[String; 7]> = rows.iter().map(fields).collect();
    let widths: Vec<usize> = (0..7)
        .map(|k| {
            body.iter()
                .map(|f| f[k].len())
                .chain([HEADER[k].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:>w$}"))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(&HEADER.map(String::from));
    for f in &body {
        out.push_str(&line(f));
    }
    out
}
