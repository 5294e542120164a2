//! The recursion driver: rule dispatch, result assembly and search-tree
//! statistics.

use std::ops::AddAssign;
use std::panic::{self, AssertUnwindSafe};

use num_bigint::BigUint;
use rayon::prelude::*;
use thiserror::Error;

use crate::branching::{
    branch_four_neighbour, branch_high_degree_var, branch_semiisolated_2, branch_semiisolated_3,
    eliminate_semiisolated_1, find_config, high_degree_var, Branching, Config,
};
use crate::decompose::{
    balanced_bisection, branch_cut_variables, brute_force_base, build_clause_graph,
    connected_components,
};
use crate::model::{Formula, PairState};
use crate::poly::HDPoly;
use crate::simplify::simplify_fixpoint;

/// How often each rule fired.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RuleCounts {
    pub unsat: u64,
    pub determined: u64,
    pub small_clause: u64,
    pub shared_pair: u64,
    pub duplicate: u64,
    pub high_degree: u64,
    pub semi_isolated_elim: u64,
    pub semi_isolated_2: u64,
    pub semi_isolated_3: u64,
    pub four_neighbour: u64,
    pub components: u64,
    pub bisection: u64,
    pub base: u64,
}

impl RuleCounts {
    /// `(name, count)` in a fixed order, used for every rendering.
    pub fn entries(&self) -> [(&'static str, u64); 13] {
        [
            ("unsat", self.unsat),
            ("determined", self.determined),
            ("small_clause", self.small_clause),
            ("shared_pair", self.shared_pair),
            ("duplicate", self.duplicate),
            ("high_degree", self.high_degree),
            ("semi_isolated_elim", self.semi_isolated_elim),
            ("semi_isolated_2", self.semi_isolated_2),
            ("semi_isolated_3", self.semi_isolated_3),
            ("four_neighbour", self.four_neighbour),
            ("components", self.components),
            ("bisection", self.bisection),
            ("base", self.base),
        ]
    }
}

impl AddAssign<&RuleCounts> for RuleCounts {
    fn add_assign(&mut self, o: &RuleCounts) {
        self.unsat += o.unsat;
        self.determined += o.determined;
        self.small_clause += o.small_clause;
        self.shared_pair += o.shared_pair;
        self.duplicate += o.duplicate;
        self.high_degree += o.high_degree;
        self.semi_isolated_elim += o.semi_isolated_elim;
        self.semi_isolated_2 += o.semi_isolated_2;
        self.semi_isolated_3 += o.semi_isolated_3;
        self.four_neighbour += o.four_neighbour;
        self.components += o.components;
        self.bisection += o.bisection;
        self.base += o.base;
    }
}

/// Search statistics.
///
/// `nodes`, `leaves` and `branched_vars` describe the branching tree the
/// recursion is equivalent to: a component split multiplies its parts'
/// trees (each leaf of one part continues into the next part), so leaves
/// multiply and branched variables add along a root-to-leaf path. `calls`
/// and `max_depth` count the recursion as actually executed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub calls: u64,
    pub nodes: u128,
    pub leaves: u128,
    pub branched_vars: u64,
    pub max_depth: u64,
    pub rules: RuleCounts,
}

impl SolveStats {
    /// `leaves ≤ 4^branched_vars` and `nodes ≥ leaves`.
    pub fn bounds_hold(&self) -> bool {
        let cap = BigUint::from(4u32).pow(self.branched_vars as u32);
        self.nodes >= self.leaves && BigUint::from(self.leaves) <= cap
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    /// Largest active set solved by enumeration once no rule applies.
    pub base_threshold: usize,
    /// Seed for the bisection heuristic.
    pub seed: u64,
    /// Evaluate sibling branches on a thread pool.
    pub parallel: bool,
    /// Assert the per-rule variable-elimination floors.
    pub check_floors: bool,
}

pub const DEFAULT_BASE_THRESHOLD: usize = 16;

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            base_threshold: DEFAULT_BASE_THRESHOLD,
            seed: 0,
            parallel: false,
            check_floors: cfg!(debug_assertions),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveReport {
    pub n: u32,
    pub m: usize,
    pub poly: HDPoly,
    pub max_hd: Option<u32>,
    pub solutions: BigUint,
    pub stats: SolveStats,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("malformed formula: {0}")]
    Malformed(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Shape of the subtree below one call.
#[derive(Clone, Copy, Debug)]
struct Tree {
    nodes: u128,
    leaves: u128,
    branched: u64,
}

impl Tree {
    const LEAF: Tree = Tree {
        nodes: 1,
        leaves: 1,
        branched: 0,
    };
}

#[derive(Default)]
struct Tally {
    calls: u64,
    max_depth: u64,
    rules: RuleCounts,
}

impl Tally {
    fn absorb(&mut self, o: &Tally) {
        self.calls += o.calls;
        self.max_depth = self.max_depth.max(o.max_depth);
        self.rules += &o.rules;
    }
}

/// Sibling branches run concurrently only this close to the root.
const PARALLEL_DEPTH: u64 = 6;

struct Driver<'a> {
    opts: &'a SolveOptions,
}

impl Driver<'_> {
    fn mhd(&self, st: PairState, depth: u64, tally: &mut Tally) -> (HDPoly, Tree) {
        tally.calls += 1;
        tally.max_depth = tally.max_depth.max(depth);
        let Some(mut st) = simplify_fixpoint(st, &mut tally.rules) else {
            return (HDPoly::zero(), Tree::LEAF);
        };
        if st.p_main.is_zero() {
            return (HDPoly::zero(), Tree::LEAF);
        }
        if let Some(x) = high_degree_var(&st) {
            tally.rules.high_degree += 1;
            let b = branch_high_degree_var(&st, x, &mut tally.rules);
            return self.branch(&st, b, 1, true, depth, tally);
        }
        if let Some(cfg) = find_config(&st) {
            return match cfg {
                Config::Eliminate(si) => {
                    tally.rules.semi_isolated_elim += 1;
                    st = eliminate_semiisolated_1(st, &si);
                    self.mhd(st, depth + 1, tally)
                }
                Config::BranchOne { si, x, .. } => {
                    tally.rules.semi_isolated_2 += 1;
                    let b = branch_semiisolated_2(&st, &si, x, &mut tally.rules);
                    self.branch(&st, b, 1, true, depth, tally)
                }
                Config::BranchThree { si, clause } => {
                    tally.rules.semi_isolated_3 += 1;
                    let b = branch_semiisolated_3(&st, &si, clause, &mut tally.rules);
                    self.branch(&st, b, 3, true, depth, tally)
                }
                Config::FourNeighbour(pattern) => {
                    tally.rules.four_neighbour += 1;
                    let b = branch_four_neighbour(&st, pattern, &mut tally.rules);
                    self.branch(&st, b, 3, true, depth, tally)
                }
            };
        }
        let comps = connected_components(&st);
        if comps.len() > 1 {
            tally.rules.components += 1;
            return self.product(st.p_main, comps, depth, tally);
        }
        let g = build_clause_graph(&st);
        // A single clause class has no bisection; it is small by construction.
        if st.active.len() <= self.opts.base_threshold || g.len() < 2 {
            tally.rules.base += 1;
            return (brute_force_base(&st), Tree::LEAF);
        }
        tally.rules.bisection += 1;
        let cut = balanced_bisection(&g, self.opts.seed);
        let k = cut.cut_vars.len() as u64;
        let b = branch_cut_variables(&st, &cut, &mut tally.rules);
        self.branch(&st, b, k, false, depth, tally)
    }

    fn branch(
        &self,
        parent: &PairState,
        b: Branching,
        k: u64,
        floors: bool,
        depth: u64,
        tally: &mut Tally,
    ) -> (HDPoly, Tree) {
        if floors && self.opts.check_floors {
            let bad = b.floor_violations(parent);
            assert!(
                bad.is_empty(),
                "children (index, eliminated, floor) {bad:?} below floor for:\n{parent}"
            );
        }
        let pruned = b.pruned as u128;
        let results: Vec<(HDPoly, Tree, Tally)> = if self.opts.parallel && depth < PARALLEL_DEPTH {
            b.children
                .into_par_iter()
                .map(|c| {
                    let mut t = Tally::default();
                    let (p, tree) = self.mhd(c, depth + 1, &mut t);
                    (p, tree, t)
                })
                .collect()
        } else {
            b.children
                .into_iter()
                .map(|c| {
                    let mut t = Tally::default();
                    let (p, tree) = self.mhd(c, depth + 1, &mut t);
                    (p, tree, t)
                })
                .collect()
        };
        let mut total = HDPoly::zero();
        let mut tree = Tree {
            nodes: 1 + pruned,
            leaves: pruned,
            branched: 0,
        };
        let mut deepest = 0;
        for (p, t, sub) in results {
            total += p;
            tree.nodes = tree.nodes.saturating_add(t.nodes);
            tree.leaves = tree.leaves.saturating_add(t.leaves);
            deepest = deepest.max(t.branched);
            tally.absorb(&sub);
        }
        tree.branched = k + deepest;
        if tree.leaves == 0 {
            // No child at all: the node itself ends the path.
            tree.leaves = 1;
        }
        (total, tree)
    }

    fn product(
        &self,
        p_main: HDPoly,
        comps: Vec<PairState>,
        depth: u64,
        tally: &mut Tally,
    ) -> (HDPoly, Tree) {
        let mut acc = p_main;
        let mut tree = Tree {
            nodes: 0,
            leaves: 1,
            branched: 0,
        };
        for c in comps {
            if acc.is_zero() && !cfg!(debug_assertions) {
                break;
            }
            let (p, t) = self.mhd(c, depth + 1, tally);
            acc = &acc * &p;
            tree.nodes = tree
                .nodes
                .saturating_add(tree.leaves.saturating_mul(t.nodes));
            tree.leaves = tree.leaves.saturating_mul(t.leaves);
            tree.branched += t.branched;
        }
        tree.nodes = tree.nodes.saturating_add(1);
        (acc, tree)
    }
}

/// Evaluates a state: `p_main` times the pair sum it stands for.
pub fn mhd(st: PairState, opts: &SolveOptions) -> (HDPoly, SolveStats) {
    let driver = Driver { opts };
    let mut tally = Tally::default();
    let (poly, tree) = driver.mhd(st, 0, &mut tally);
    let stats = SolveStats {
        calls: tally.calls,
        nodes: tree.nodes,
        leaves: tree.leaves,
        branched_vars: tree.branched,
        max_depth: tally.max_depth,
        rules: tally.rules,
    };
    (poly, stats)
}

const SOLVER_STACK: usize = 256 << 20;

fn panic_message(e: Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "solver panicked".into())
}

/// Solves `f` on a thread with a large stack. Internal invariant failures
/// are reported as [`SolveError::Internal`].
pub fn solve(f: &Formula, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    if !f.is_well_formed() {
        return Err(SolveError::Malformed(
            "clauses need 1 to 3 literals over variables 1..=n".into(),
        ));
    }
    let st = PairState::initial(f);
    let opts = opts.clone();
    let run = move || {
        panic::catch_unwind(AssertUnwindSafe(|| {
            if opts.parallel {
                let pool = rayon::ThreadPoolBuilder::new()
                    .stack_size(SOLVER_STACK)
                    .build()
                    .map_err(|e| e.to_string())?;
                Ok(pool.install(|| mhd(st, &opts)))
            } else {
                Ok(mhd(st, &opts))
            }
        }))
        .map_err(panic_message)
        .and_then(|r| r)
    };
    let outcome = std::thread::Builder::new()
        .name("x3hd-solver".into())
        .stack_size(SOLVER_STACK)
        .spawn(run)
        .map_err(|e| SolveError::Internal(e.to_string()))?
        .join()
        .map_err(|e| SolveError::Internal(panic_message(e)))?;
    let (poly, stats) = outcome.map_err(SolveError::Internal)?;
    Ok(SolveReport {
        n: f.n_vars,
        m: f.clauses.len(),
        max_hd: poly.degree(),
        solutions: poly.coeff(0),
        poly,
        stats,
    })
}
