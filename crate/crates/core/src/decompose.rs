//! Sparse formulas: component factorization, balanced bisection of the
//! clause graph, branching on cut variables, and the brute-force base case.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::branching::Branching;
use crate::enumerate::{pair_sum, side_assignments};
use crate::model::{PairState, Var, VarWeights, VALUE_PAIRS};
use crate::poly::HDPoly;
use crate::simplify::simplify_fixpoint;
use crate::solver::RuleCounts;

/// Dissimilar clause classes joined when they share a variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseGraph {
    /// Clause indices of each vertex's class.
    pub classes: Vec<Vec<usize>>,
    /// `adjacency[v]` maps each neighbour to the variables shared with it.
    pub adjacency: Vec<BTreeMap<usize, Vec<Var>>>,
}

impl ClauseGraph {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    fn cut_edges(&self, side: &[bool]) -> usize {
        (0..self.len())
            .map(|v| {
                self.adjacency[v]
                    .keys()
                    .filter(|&&w| side[w] != side[v])
                    .count()
            })
            .sum::<usize>()
            / 2
    }

    fn cut_vars(&self, side: &[bool]) -> BTreeSet<Var> {
        let mut vars = BTreeSet::new();
        for v in 0..self.len() {
            for (&w, shared) in &self.adjacency[v] {
                if side[w] != side[v] {
                    vars.extend(shared.iter().copied());
                }
            }
        }
        vars
    }

    /// Vertices with at least one neighbour, all of them across the cut.
    fn stranded(&self, side: &[bool]) -> Vec<usize> {
        (0..self.len())
            .filter(|&v| {
                !self.adjacency[v].is_empty()
                    && self.adjacency[v].keys().all(|&w| side[w] != side[v])
            })
            .collect()
    }
}

pub fn build_clause_graph(st: &PairState) -> ClauseGraph {
    let classes = st.classes();
    let vars: Vec<Vec<Var>> = classes.iter().map(|c| st.clause_vars(c[0])).collect();
    let mut by_var: BTreeMap<Var, Vec<usize>> = BTreeMap::new();
    for (k, vs) in vars.iter().enumerate() {
        for &v in vs {
            by_var.entry(v).or_default().push(k);
        }
    }
    let mut adjacency = vec![BTreeMap::<usize, Vec<Var>>::new(); classes.len()];
    for (&v, ks) in &by_var {
        for &a in ks {
            for &b in ks.iter().filter(|&&b| b != a) {
                adjacency[a].entry(b).or_default().push(v);
            }
        }
    }
    ClauseGraph { classes, adjacency }
}

/// Splits a state into variable-disjoint sub-states, smallest first. Each
/// sub-state has `p_main = 1`; the caller multiplies the results with the
/// parent's `p_main`. Active variables outside every clause are not included.
pub fn connected_components(st: &PairState) -> Vec<PairState> {
    let mut parent: BTreeMap<Var, Var> = BTreeMap::new();
    fn root(parent: &mut BTreeMap<Var, Var>, v: Var) -> Var {
        let p = *parent.entry(v).or_insert(v);
        if p == v {
            return v;
        }
        let r = root(parent, p);
        parent.insert(v, r);
        r
    }
    for c in &st.phi[0] {
        let vs = c.vars();
        for w in vs.windows(2) {
            let (a, b) = (root(&mut parent, w[0]), root(&mut parent, w[1]));
            if a != b {
                parent.insert(a.max(b), a.min(b));
            }
        }
        if let Some(&v) = vs.first() {
            root(&mut parent, v);
        }
    }
    let mut groups: BTreeMap<Var, (BTreeSet<Var>, Vec<usize>)> = BTreeMap::new();
    for (ci, c) in st.phi[0].iter().enumerate() {
        let Some(&v) = c.vars().first() else {
            // Constant-only clauses are resolved by the simplifier before this point.
            continue;
        };
        let r = root(&mut parent, v);
        groups.entry(r).or_default().1.push(ci);
    }
    let vars: Vec<Var> = parent.keys().copied().collect();
    for v in vars {
        let r = root(&mut parent, v);
        groups.entry(r).or_default().0.insert(v);
    }
    let mut comps: Vec<PairState> = groups
        .into_values()
        .map(|(active, clauses)| {
            let mut weights = VarWeights::default();
            let mut s: [crate::model::PartialAssignment; 2] = Default::default();
            for &v in &active {
                weights.insert(v, st.weights.table(v).expect("active").clone());
                for side in 0..2 {
                    if let Some(b) = st.s[side].get(v) {
                        s[side].record(v, b).expect("fresh assignment");
                    }
                }
            }
            PairState {
                n_vars: st.n_vars,
                phi: [0, 1]
                    .map(|side| clauses.iter().map(|&ci| st.phi[side][ci].clone()).collect()),
                s,
                active,
                p_main: HDPoly::one(),
                weights,
            }
        })
        .collect();
    comps.sort_by_key(|c| c.active.len());
    comps
}

/// Two-way vertex partition with part sizes differing by at most one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bisection {
    pub side: Vec<bool>,
    pub cut_edges: usize,
    pub cut_vars: Vec<Var>,
}

const RESTARTS: u64 = 8;

fn swap_gain(g: &ClauseGraph, side: &[bool], u: usize, v: usize) -> isize {
    let d = |x: usize| {
        g.adjacency[x]
            .keys()
            .map(|&w| if side[w] != side[x] { 1 } else { -1 })
            .sum::<isize>()
    };
    let joined = isize::from(g.adjacency[u].contains_key(&v));
    d(u) + d(v) - 2 * joined
}

/// Kernighan-Lin passes: tentatively swap the best unlocked pair until all
/// are locked, keep the best prefix, repeat while a pass improves the cut.
fn refine(g: &ClauseGraph, side: &mut [bool]) {
    let n = g.len();
    loop {
        let mut trial = side.to_vec();
        let mut locked = vec![false; n];
        let mut swaps = Vec::new();
        let (mut running, mut best_total, mut best_len) = (0isize, 0isize, 0usize);
        loop {
            let mut best: Option<(isize, usize, usize)> = None;
            for u in (0..n).filter(|&u| !trial[u] && !locked[u]) {
                for v in (0..n).filter(|&v| trial[v] && !locked[v]) {
                    let gain = swap_gain(g, &trial, u, v);
                    if best.is_none_or(|b| gain > b.0) {
                        best = Some((gain, u, v));
                    }
                }
            }
            let Some((gain, u, v)) = best else { break };
            trial.swap(u, v);
            locked[u] = true;
            locked[v] = true;
            swaps.push((u, v));
            running += gain;
            if running > best_total {
                best_total = running;
                best_len = swaps.len();
            }
        }
        if best_total <= 0 {
            return;
        }
        for &(u, v) in &swaps[..best_len] {
            side.swap(u, v);
        }
    }
}

/// First half of a breadth-first order from `start` (then any unreached
/// vertices) on one side.
fn grown_start(g: &ClauseGraph, start: usize, order: &[usize]) -> Vec<bool> {
    let n = g.len();
    let mut seen = vec![false; n];
    let mut bfs = Vec::with_capacity(n);
    for root in std::iter::once(start).chain(order.iter().copied()) {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut head = bfs.len();
        bfs.push(root);
        while head < bfs.len() {
            let v = bfs[head];
            head += 1;
            for &w in g.adjacency[v].keys() {
                if !seen[w] {
                    seen[w] = true;
                    bfs.push(w);
                }
            }
        }
    }
    let mut side = vec![true; n];
    for &v in &bfs[..n.div_ceil(2)] {
        side[v] = false;
    }
    side
}

/// Moves vertices so that at most one vertex has all its neighbours across
/// the cut, never increasing the cut. Gives up when no such move exists.
fn repair(g: &ClauseGraph, side: &mut [bool]) {
    loop {
        let stranded = g.stranded(side);
        if stranded.len() <= 1 {
            return;
        }
        let cut = g.cut_edges(side);
        let mut candidates = Vec::new();
        for (ia, &a) in stranded.iter().enumerate() {
            for &b in &stranded[ia + 1..] {
                if side[a] != side[b] {
                    candidates.push((a, b));
                } else {
                    candidates.extend(g.adjacency[b].keys().map(|&n| (a, n)));
                    candidates.extend(g.adjacency[a].keys().map(|&n| (b, n)));
                }
            }
        }
        let improved = candidates.into_iter().find_map(|(p, q)| {
            if side[p] == side[q] {
                return None;
            }
            let mut trial = side.to_vec();
            trial.swap(p, q);
            (g.cut_edges(&trial) <= cut && g.stranded(&trial).len() < stranded.len())
                .then_some(trial)
        });
        match improved {
            Some(trial) => side.copy_from_slice(&trial),
            None => return,
        }
    }
}

/// Seeded local-search bisection: breadth-first and random balanced starts
/// refined by Kernighan-Lin passes and repaired, keeping the result with
/// the fewest cut variables.
pub fn balanced_bisection(g: &ClauseGraph, seed: u64) -> Bisection {
    let n = g.len();
    let mut best: Option<Bisection> = None;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(RESTARTS).wrapping_add(restart));
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut side = if restart % 2 == 0 {
            grown_start(g, order[0], &order)
        } else {
            let mut side = vec![false; n];
            for &v in &order[n.div_ceil(2)..] {
                side[v] = true;
            }
            side
        };
        refine(g, &mut side);
        repair(g, &mut side);
        let cut_vars: Vec<Var> = g.cut_vars(&side).into_iter().collect();
        let candidate = Bisection {
            cut_edges: g.cut_edges(&side),
            cut_vars,
            side,
        };
        let better = best.as_ref().is_none_or(|b| {
            (candidate.cut_vars.len(), candidate.cut_edges) < (b.cut_vars.len(), b.cut_edges)
        });
        if better {
            best = Some(candidate);
        }
    }
    best.expect("at least one restart")
}

/// Whether `b` is balanced and leaves at most one stranded vertex.
pub fn satisfies_repair(g: &ClauseGraph, b: &Bisection) -> bool {
    g.stranded(&b.side).len() <= 1
}

pub fn is_balanced(b: &Bisection) -> bool {
    let ones = b.side.iter().filter(|&&s| s).count();
    let zeros = b.side.len() - ones;
    ones.abs_diff(zeros) <= 1
}

/// Every consistent value pair for every cut variable, in lexicographic
/// order over (variable id, value pair); each child is simplified.
pub fn branch_cut_variables(st: &PairState, b: &Bisection, counts: &mut RuleCounts) -> Branching {
    let mut combos: Vec<Vec<(Var, bool, bool)>> = vec![Vec::new()];
    for &x in &b.cut_vars {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                VALUE_PAIRS
                    .into_iter()
                    .filter(move |&(i, j)| st.allows(x, i, j))
                    .map(move |(i, j)| {
                        let mut c = prefix.clone();
                        c.push((x, i, j));
                        c
                    })
            })
            .collect();
    }
    let mut out = Branching::default();
    for combo in combos {
        let mut child = st.clone();
        for (x, i, j) in combo {
            child.assign(x, i, j);
        }
        let child = simplify_fixpoint(child, counts);
        match child {
            Some(c) => {
                out.children.push(c);
                out.floors.push(b.cut_vars.len());
            }
            None => out.pruned += 1,
        }
    }
    out
}

/// `p_main × Σ Π p[x][β1(x)][β2(x)]` by enumerating each side's solutions
/// over the active variables.
pub fn brute_force_base(st: &PairState) -> HDPoly {
    let vars: Vec<Var> = st.active.iter().copied().collect();
    let clauses: Vec<usize> = (0..st.num_clauses()).collect();
    let left = side_assignments(st, 0, &vars, &clauses);
    let right = side_assignments(st, 1, &vars, &clauses);
    let weight = |k: usize, i: bool, j: bool| st.weights.get(vars[k], i, j).clone();
    &st.p_main * &pair_sum(vars.len(), &left, &right, &weight)
}
