//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use x3hd::branching::{
    branch_four_neighbour, branch_high_degree_var, branch_semiisolated_2, branch_semiisolated_3,
    eliminate_semiisolated_1, find_config, high_degree_var, Branching, Config,
};
use x3hd::decompose::{
    balanced_bisection, branch_cut_variables, brute_force_base, build_clause_graph,
    connected_components,
};
use x3hd::oracle::{enumerate_solutions, hd_oracle, state_eval};
use x3hd::simplify::{apply_rewrite, next_rewrite, simplify_fixpoint, Rewrite};
use x3hd::solver::RuleCounts;
use x3hd::toolkit::bench::{self, BenchConfig};
use x3hd::toolkit::generate;
use x3hd::toolkit::report::report_json;
use x3hd::{solve, Clause, Formula, HDPoly, Literal, PairState, SolveOptions, SolveReport};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn paper_example() -> Formula {
    Formula::from_signed(7, &[&[1, 2, 3], &[1, 4, 5], &[1, 6, 7], &[2, 4, -6]])
}

fn solve_default(f: &Formula) -> Result<SolveReport, String> {
    solve(f, &SolveOptions::default()).map_err(|e| e.to_string())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let r = solve_default(&paper_example())?;
    let elapsed = start.elapsed();
    let expected = HDPoly::from_terms([(4, 12u32), (0, 4)]);
    check(r.poly == expected, || format!("got {}", r.poly))?;
    check(r.max_hd == Some(4), || format!("max_hd {:?}", r.max_hd))?;
    check(r.solutions == BigUint::from(4u32), || {
        format!("solutions {}", r.solutions)
    })?;
    check(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("{} (max_hd 4, 4 solutions) in {elapsed:?}", r.poly))
}

/// The seeded suite shared by criteria 2 and 4.
fn random_suite() -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..520)
        .map(|k| {
            let n = rng.gen_range(4..=14);
            let m = rng.gen_range(1..=n as usize);
            generate(n, m, rng.gen(), k % 2 == 0).unwrap().formula
        })
        .collect()
}

fn criterion_2(suite: &[Formula], reports: &[SolveReport]) -> Outcome {
    let start = Instant::now();
    let mut satisfiable = 0;
    for (f, r) in suite.iter().zip(reports) {
        let expected = hd_oracle(f).map_err(|e| e.to_string())?;
        check(r.poly == expected, || {
            format!("{f:?}: solver {} vs oracle {expected}", r.poly)
        })?;
        satisfiable += usize::from(!expected.is_zero());
    }
    let planted = suite.len().div_ceil(2);
    Ok(format!(
        "{} instances ({planted} planted, {satisfiable} satisfiable) equal the oracle; oracle pass {:?}",
        suite.len(),
        start.elapsed()
    ))
}

fn negate_var(f: &Formula, v: u32) -> Formula {
    let clauses = f
        .clauses
        .iter()
        .map(|c| {
            Clause::new(
                c.lits()
                    .iter()
                    .map(|&l| match l {
                        Literal::Var { var, neg } if var == v => Literal::Var { var, neg: !neg },
                        other => other,
                    })
                    .collect(),
            )
        })
        .collect();
    Formula::new(f.n_vars, clauses)
}

fn rename(f: &Formula, perm: &[u32], offset: u32) -> Vec<Clause> {
    f.clauses
        .iter()
        .map(|c| {
            Clause::new(
                c.lits()
                    .iter()
                    .map(|&l| match l {
                        Literal::Var { var, neg } => Literal::Var {
                            var: perm[var as usize - 1] + offset,
                            neg,
                        },
                        other => other,
                    })
                    .collect(),
            )
        })
        .collect()
}

fn criterion_4(suite: &[Formula], reports: &[SolveReport]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let zero = BigUint::from(0u32);
    for (f, r) in suite.iter().zip(reports) {
        let count = BigUint::from(enumerate_solutions(f).map_err(|e| e.to_string())?.len());
        check(r.poly.coeff(0) == count, || format!("{f:?}: a0 != |S|"))?;
        check(r.poly.coeff_sum() == &count * &count, || {
            format!("{f:?}: sum != |S|^2")
        })?;
        check(
            r.poly.terms().all(|(k, c)| k == 0 || c % 2u32 == zero),
            || format!("{f:?}: odd coefficient"),
        )?;
        check(r.poly.degree().is_none_or(|d| d <= f.n_vars), || {
            format!("{f:?}: degree above n")
        })?;

        let v = rng.gen_range(1..=f.n_vars);
        let negated = solve_default(&negate_var(f, v))?;
        check(negated.poly == r.poly, || {
            format!("{f:?}: negating x{v} changed the result")
        })?;

        let mut perm: Vec<u32> = (1..=f.n_vars).collect();
        perm.shuffle(&mut rng);
        let renamed = Formula::new(f.n_vars, rename(f, &perm, 0));
        check(solve_default(&renamed)?.poly == r.poly, || {
            format!("{f:?}: renaming by {perm:?} changed the result")
        })?;
    }

    let mut unions = 0;
    let mut nonzero = 0;
    while unions < 50 {
        let a = rng.gen_range(0..suite.len());
        let b = rng.gen_range(0..suite.len());
        let (f, g) = (&suite[a], &suite[b]);
        let ident_f: Vec<u32> = (1..=f.n_vars).collect();
        let ident_g: Vec<u32> = (1..=g.n_vars).collect();
        let mut clauses = rename(f, &ident_f, 0);
        clauses.extend(rename(g, &ident_g, f.n_vars));
        let union = Formula::new(f.n_vars + g.n_vars, clauses);
        let got = solve_default(&union)?.poly;
        let expected = &reports[a].poly * &reports[b].poly;
        check(got == expected, || {
            format!("union of #{a} and #{b}: {got} vs {expected}")
        })?;
        unions += 1;
        nonzero += usize::from(!got.is_zero());
    }
    Ok(format!(
        "{} instances: a0, sum, parity, degree, negation and renaming hold; {unions} disjoint unions multiply ({nonzero} non-zero)",
        suite.len()
    ))
}

/// Rule firings seen while walking the recursion by hand.
#[derive(Default)]
struct Harvest {
    /// Distinct parent states (|V| ≤ 12) whose conservation was checked.
    conserved: BTreeMap<&'static str, HashSet<String>>,
    /// Distinct parent states whose children met the elimination floor.
    floors: BTreeMap<&'static str, HashSet<String>>,
    failures: Vec<String>,
}

const STATE_LIMIT: usize = 12;

impl Harvest {
    fn conserve(&mut self, rule: &'static str, parent: &PairState, ok: bool) {
        let key = parent.to_string();
        if !ok {
            self.failures
                .push(format!("{rule} does not conserve the value of\n{key}"));
        }
        self.conserved.entry(rule).or_default().insert(key);
    }

    fn floor(&mut self, rule: &'static str, parent: &PairState, b: &Branching, allowed: &[usize]) {
        let mut ok = true;
        for (c, &floor) in b.children.iter().zip(&b.floors) {
            let eliminated = parent.active.len() - c.active.len();
            ok &= allowed.contains(&floor) && eliminated >= floor;
        }
        if rule == "1(vii)" {
            ok &= b.floors.iter().filter(|&&f| f == 4).count() <= 1;
        }
        let key = parent.to_string();
        if !ok {
            self.failures.push(format!(
                "{rule} floors {:?} not met by {:?} for\n{key}",
                b.floors,
                b.children
                    .iter()
                    .map(|c| parent.active.len() - c.active.len())
                    .collect::<Vec<_>>()
            ));
        }
        self.floors.entry(rule).or_default().insert(key);
    }
}

fn value(st: &PairState) -> Option<HDPoly> {
    (st.active.len() <= STATE_LIMIT).then(|| state_eval(st).expect("within limit"))
}

fn sum_of(children: &[PairState]) -> HDPoly {
    children
        .iter()
        .map(|c| state_eval(c).expect("within limit"))
        .sum()
}

/// Mirrors the solver's dispatch, checking every step it can evaluate.
fn walk(st: PairState, h: &mut Harvest, budget: &mut usize) {
    if *budget == 0 {
        return;
    }
    *budget -= 1;
    let mut st = st;
    while let Some(rw) = next_rewrite(&st) {
        let rule = match rw {
            Rewrite::Unsat => "1(i)",
            Rewrite::Determined(_) => "1(ii)",
            Rewrite::SmallClause(_) => "1(iii)",
            Rewrite::SharedPair(..) => "1(iv)",
            Rewrite::Duplicate(_) => "1(iv) dedupe",
        };
        let before = value(&st);
        let after = apply_rewrite(st.clone(), rw);
        if let Some(before) = before {
            let got = after
                .as_ref()
                .map_or_else(HDPoly::zero, |c| state_eval(c).unwrap());
            h.conserve(rule, &st, got == before);
        }
        match after {
            Some(next) => st = next,
            None => return,
        }
    }
    if st.p_main.is_zero() {
        return;
    }
    let small = st.active.len() <= STATE_LIMIT;
    let mut counts = RuleCounts::default();
    let parent_value = value(&st);
    let branched = |rule: &'static str, b: Branching, allowed: &[usize], h: &mut Harvest| {
        h.floor(rule, &st, &b, allowed);
        if let Some(v) = &parent_value {
            h.conserve(rule, &st, sum_of(&b.children) == *v);
        }
        b.children
    };
    let children = if let Some(x) = high_degree_var(&st) {
        let b = branch_high_degree_var(&st, x, &mut counts);
        branched("1(v)", b, &[5], h)
    } else if let Some(cfg) = find_config(&st) {
        match cfg {
            Config::Eliminate(si) => {
                let child = eliminate_semiisolated_1(st.clone(), &si);
                if let Some(v) = &parent_value {
                    h.conserve("1(vi).1", &st, state_eval(&child).unwrap() == *v);
                }
                vec![child]
            }
            Config::BranchOne { si, x, .. } => {
                let b = branch_semiisolated_2(&st, &si, x, &mut counts);
                branched("1(vi).2", b, &[5], h)
            }
            Config::BranchThree { si, clause } => {
                let b = branch_semiisolated_3(&st, &si, clause, &mut counts);
                branched("1(vi).3", b, &[8], h)
            }
            Config::FourNeighbour(p) => {
                let b = branch_four_neighbour(&st, p, &mut counts);
                branched("1(vii)", b, &[4, 7], h)
            }
        }
    } else {
        let comps = connected_components(&st);
        if comps.len() > 1 {
            if small {
                let product: HDPoly = comps.iter().map(|c| state_eval(c).unwrap()).product();
                h.conserve(
                    "component split",
                    &st,
                    &st.p_main * &product == parent_value.clone().unwrap(),
                );
            }
            comps
        } else {
            let g = build_clause_graph(&st);
            if small {
                h.conserve(
                    "base",
                    &st,
                    brute_force_base(&st) == parent_value.clone().unwrap(),
                );
            }
            if g.len() < 2 {
                return;
            }
            let cut = balanced_bisection(&g, *budget as u64);
            let b = branch_cut_variables(&st, &cut, &mut counts);
            if small {
                h.conserve(
                    "case-2 split",
                    &st,
                    sum_of(&b.children) == parent_value.clone().unwrap(),
                );
            }
            b.children
        }
    };
    for c in children {
        walk(c, h, budget);
    }
}

/// Formulas over at most three variables per clause with repeated variables,
/// short clauses and one-sided recorded values.
fn messy_state(rng: &mut ChaCha8Rng) -> PairState {
    let n = rng.gen_range(3..=10);
    let m = rng.gen_range(1..=n as usize + 2);
    let clauses = (0..m)
        .map(|_| {
            let len = *[1, 2, 3, 3, 3].choose(rng).unwrap();
            Clause::new(
                (0..len)
                    .map(|_| Literal::Var {
                        var: rng.gen_range(1..=n),
                        neg: rng.gen_bool(0.3),
                    })
                    .collect(),
            )
        })
        .collect();
    let mut st = PairState::initial(&Formula::new(n, clauses));
    for _ in 0..rng.gen_range(0..3) {
        let x = rng.gen_range(1..=n);
        let side = rng.gen_range(0..2);
        let _ = st.s[side].record(x, rng.gen());
    }
    st
}

/// Clauses on three distinct variables, no two sharing two variables.
fn linear_formula(rng: &mut ChaCha8Rng, n: u32, m: usize) -> Formula {
    let mut pairs: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut clauses = Vec::new();
    let vars: Vec<u32> = (1..=n).collect();
    for _ in 0..m * 20 {
        if clauses.len() == m {
            break;
        }
        let mut pick: Vec<u32> = vars.choose_multiple(rng, 3).copied().collect();
        pick.sort_unstable();
        let ps = [(pick[0], pick[1]), (pick[0], pick[2]), (pick[1], pick[2])];
        if ps.iter().any(|p| pairs.contains(p)) {
            continue;
        }
        pairs.extend(ps);
        clauses.push(Clause::new(
            pick.iter()
                .map(|&var| Literal::Var {
                    var,
                    neg: rng.gen_bool(0.3),
                })
                .collect(),
        ));
    }
    Formula::new(n, clauses)
}

fn harvest() -> Harvest {
    let mut h = Harvest::default();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..1500 {
        walk(messy_state(&mut rng), &mut h, &mut 60);
    }
    for k in 0..1500u64 {
        let n = rng.gen_range(8..=12);
        let m = rng.gen_range(n as usize / 2..=n as usize + 2);
        walk(
            PairState::initial(&linear_formula(&mut rng, n, m)),
            &mut h,
            &mut 60,
        );
        let n = rng.gen_range(12..=40);
        let m = (f64::from(n) * rng.gen_range(0.25..0.6)) as usize;
        let f = generate(n, m.max(1), k, k % 2 == 0).unwrap().formula;
        walk(PairState::initial(&f), &mut h, &mut 60);
    }
    // Three-variable boundaries and four-neighbour clauses are rare in small
    // random states; sample small linear formulas until enough have been seen.
    let mut counts = RuleCounts::default();
    let seen = |h: &Harvest, rule| h.conserved.get(rule).map_or(0, HashSet::len);
    for _ in 0..200_000 {
        let need_three = seen(&h, "1(vi).3") < 150;
        let need_four = seen(&h, "1(vii)") < 150;
        if !need_three && !need_four {
            break;
        }
        let n = rng.gen_range(9..=12);
        let m = rng.gen_range(4..=n as usize);
        let st = PairState::initial(&linear_formula(&mut rng, n, m));
        let Some(st) = simplify_fixpoint(st, &mut counts) else {
            continue;
        };
        if high_degree_var(&st).is_some() {
            continue;
        }
        let wanted = match find_config(&st) {
            Some(Config::BranchThree { .. }) => need_three,
            Some(Config::FourNeighbour(_)) => need_four,
            _ => false,
        };
        if wanted {
            walk(st, &mut h, &mut 20);
        }
    }
    h
}

const CONSERVATION_RULES: [&str; 13] = [
    "1(i)",
    "1(ii)",
    "1(iii)",
    "1(iv)",
    "1(iv) dedupe",
    "1(v)",
    "1(vi).1",
    "1(vi).2",
    "1(vi).3",
    "1(vii)",
    "component split",
    "case-2 split",
    "base",
];

fn criterion_3(h: &Harvest) -> Outcome {
    check(h.failures.is_empty(), || h.failures[0].clone())?;
    let mut parts = Vec::new();
    for rule in CONSERVATION_RULES {
        let seen = h.conserved.get(rule).map_or(0, HashSet::len);
        check(seen >= 100, || format!("{rule}: only {seen} states"))?;
        parts.push(format!("{rule}={seen}"));
    }
    Ok(format!("distinct states checked: {}", parts.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut formulas = vec![paper_example()];
    for seed in 0..12 {
        formulas.push(generate(14, 9, seed, true).unwrap().formula);
        formulas.push(generate(60, 24, seed, seed % 2 == 0).unwrap().formula);
    }
    for f in &formulas {
        for seed in [0, 9] {
            let opts = SolveOptions {
                seed,
                base_threshold: 6,
                ..SolveOptions::default()
            };
            let render = |o: &SolveOptions| -> Result<String, String> {
                let r = solve(f, o).map_err(|e| e.to_string())?;
                Ok(serde_json::to_string(&report_json(&r)).unwrap())
            };
            let first = render(&opts)?;
            let second = render(&opts)?;
            let parallel = render(&SolveOptions {
                parallel: true,
                ..opts.clone()
            })?;
            check(first == second, || format!("{f:?}: runs differ"))?;
            check(first == parallel, || format!("{f:?}: parallel run differs"))?;
        }
    }
    Ok(format!(
        "{} instances x 2 seeds: repeated and parallel runs give byte-identical JSON",
        formulas.len()
    ))
}

fn criterion_6(all_reports: &[SolveReport]) -> Outcome {
    let n = 40;
    let m = 2 * n as usize / 3;
    let mut slowest = Duration::ZERO;
    let mut max_leaves = 0;
    for seed in 0..10 {
        let f = generate(n, m, seed, true).unwrap().formula;
        let start = Instant::now();
        let r = solve_default(&f)?;
        let t = start.elapsed();
        check(t < Duration::from_secs(60), || {
            format!("seed {seed} took {t:?}")
        })?;
        check(!r.poly.is_zero(), || {
            format!("planted seed {seed} reported unsatisfiable")
        })?;
        check(r.stats.bounds_hold(), || {
            format!("seed {seed}: {:?}", r.stats)
        })?;
        slowest = slowest.max(t);
        max_leaves = max_leaves.max(r.stats.leaves);
    }
    let bad = all_reports
        .iter()
        .filter(|r| !r.stats.bounds_hold())
        .count();
    check(bad == 0, || {
        format!("{bad} runs violate leaves <= 4^branched")
    })?;

    let cfg = BenchConfig {
        nmin: 10,
        nmax: 20,
        step: 5,
        trials: 2,
        seed: 1,
    };
    let rows = bench::run(&cfg, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let csv = bench::render_csv(&rows);
    check(
        csv.lines().next() == Some("n,m,seed,wall_ms,leaves,nodes,ref_1.3298^n"),
        || format!("bench header: {csv}"),
    )?;
    for r in &rows {
        check(
            (r.reference - 1.3298f64.powi(r.n as i32)).abs() < 1e-9,
            || format!("bench reference for n={}", r.n),
        )?;
    }
    Ok(format!(
        "10 planted n=40 m={m} instances, slowest {slowest:?}, max leaves {max_leaves}; leaves <= 4^branched on {} runs; bench has the 1.3298^n column",
        all_reports.len() + 10
    ))
}

fn criterion_7(h: &Harvest) -> Outcome {
    check(cfg!(debug_assertions), || "run in a debug build".into())?;
    check(h.failures.is_empty(), || h.failures[0].clone())?;
    let mut parts = Vec::new();
    for rule in ["1(v)", "1(vi).2", "1(vi).3", "1(vii)"] {
        let seen = h.floors.get(rule).map_or(0, HashSet::len);
        check(seen >= 20, || format!("{rule}: only {seen} states"))?;
        parts.push(format!("{rule}={seen}"));
    }
    Ok(format!(
        "floors 5/5/8/(4|7) met on every child; states per rule: {}",
        parts.join(", ")
    ))
}

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let mut failed = 0;
    let mut line = |id: usize, name: &str, outcome: std::thread::Result<Outcome>| {
        let text = match outcome {
            Ok(Ok(detail)) => format!("PASS criterion {id} ({name}): {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                format!("FAIL criterion {id} ({name}): {why}")
            }
            Err(_) => {
                failed += 1;
                format!("FAIL criterion {id} ({name}): panicked")
            }
        };
        let mut out = stdout.lock();
        let _ = writeln!(out, "{text}");
        let _ = out.flush();
    };
    let run = |f: &dyn Fn() -> Outcome| catch_unwind(AssertUnwindSafe(f));

    line(1, "worked example", run(&criterion_1));

    let suite = random_suite();
    let solve_start = Instant::now();
    let reports: Vec<SolveReport> = suite.iter().map(|f| solve_default(f).unwrap()).collect();
    let solve_time = solve_start.elapsed();
    line(
        2,
        "oracle equivalence",
        run(&|| criterion_2(&suite, &reports).map(|d| format!("{d}; solver pass {solve_time:?}"))),
    );

    let h = harvest();
    line(3, "per-rule conservation", run(&|| criterion_3(&h)));
    line(
        4,
        "algebraic invariants",
        run(&|| criterion_4(&suite, &reports)),
    );
    line(5, "determinism", run(&criterion_5));
    line(6, "performance smoke test", run(&|| criterion_6(&reports)));
    line(7, "structural floors", run(&|| criterion_7(&h)));

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
