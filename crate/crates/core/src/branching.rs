//! Branching rules for dense formulas: a variable in four or more dissimilar
//! clauses, semi-isolated variable sets, and clauses with four dissimilar
//! neighbours.

use std::collections::{BTreeMap, BTreeSet};

use crate::enumerate::{pair_sum, pair_sum_by_first, side_assignments};
use crate::model::{Literal, PairState, Var, VALUE_PAIRS};
use crate::simplify::{eliminate_determined, simplify_fixpoint};
use crate::solver::RuleCounts;

/// Children of a branching step after simplification. Children that
/// simplified to zero are only counted.
///
/// `floors[k]` is the number of variables child `k` is guaranteed to have
/// lost relative to the parent when the parent was a simplifier fixpoint.
#[derive(Clone, Debug, Default)]
pub struct Branching {
    pub children: Vec<PairState>,
    pub floors: Vec<usize>,
    pub pruned: usize,
}

impl Branching {
    fn push(&mut self, child: Option<PairState>, floor: usize) {
        match child {
            Some(c) => {
                self.children.push(c);
                self.floors.push(floor);
            }
            None => self.pruned += 1,
        }
    }

    /// Children that lost fewer variables than their floor, as
    /// `(child index, eliminated, floor)`.
    pub fn floor_violations(&self, parent: &PairState) -> Vec<(usize, usize, usize)> {
        self.children
            .iter()
            .zip(&self.floors)
            .enumerate()
            .filter_map(|(k, (c, &floor))| {
                let eliminated = parent.active.len() - c.active.len();
                (eliminated < floor).then_some((k, eliminated, floor))
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.children.len() + self.pruned
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A set `inner` (I) whose variables only occur in clauses over
/// `inner ∪ boundary` (I ∪ J). `touching` lists every clause with an I variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiIsolated {
    pub inner: Vec<Var>,
    pub boundary: Vec<Var>,
    pub touching: Vec<usize>,
}

impl SemiIsolated {
    /// Builds the set for `inner`/`boundary`, checking semi-isolation.
    pub fn new(st: &PairState, inner: Vec<Var>, boundary: Vec<Var>) -> Option<Self> {
        let mut touching = Vec::new();
        for (ci, c) in st.phi[0].iter().enumerate() {
            let vs = c.vars();
            if vs.iter().any(|v| inner.contains(v)) {
                if !vs.iter().all(|v| inner.contains(v) || boundary.contains(v)) {
                    return None;
                }
                touching.push(ci);
            }
        }
        Some(SemiIsolated {
            inner,
            boundary,
            touching,
        })
    }
}

/// Clause `clause` with at least four dissimilar neighbours; `x` is the
/// variable of it that occurs in two further dissimilar clauses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeighbourPattern {
    pub clause: usize,
    pub x: Var,
}

/// Which of the neighbour-driven rules applies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Config {
    /// |J| ≤ 1: fold I into the boundary variable without branching.
    Eliminate(SemiIsolated),
    /// |J| = 2: branch on `x`, which shares `clause` with an outside variable.
    BranchOne {
        si: SemiIsolated,
        x: Var,
        clause: usize,
    },
    /// |J| = 3: branch on which literal of `clause` (two J variables, one I variable) is true.
    BranchThree {
        si: SemiIsolated,
        clause: usize,
    },
    FourNeighbour(NeighbourPattern),
}

/// Variable occurring in at least four dissimilar clauses; most classes
/// first, then smallest id.
pub fn high_degree_var(st: &PairState) -> Option<Var> {
    let mut count: BTreeMap<Var, usize> = BTreeMap::new();
    for class in st.classes() {
        for v in st.clause_vars(class[0]) {
            *count.entry(v).or_default() += 1;
        }
    }
    count
        .into_iter()
        .filter(|&(_, c)| c >= 4)
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(v, _)| v)
}

/// Branches on the value pair of `x`; the simplifier then links the
/// remaining pair in each clause of `x`.
pub fn branch_high_degree_var(st: &PairState, x: Var, counts: &mut RuleCounts) -> Branching {
    let mut out = Branching::default();
    for (i, j) in VALUE_PAIRS {
        if !st.allows(x, i, j) {
            continue;
        }
        let mut child = st.clone();
        child.assign(x, i, j);
        out.push(simplify_fixpoint(child, counts), 5);
    }
    out
}

/// Removes a semi-isolated set with at most one boundary variable by
/// enumerating its local solutions and folding them into the boundary
/// variable's weights (or `p_main` when there is no boundary).
pub fn eliminate_semiisolated_1(mut st: PairState, si: &SemiIsolated) -> PairState {
    assert!(si.boundary.len() <= 1, "elimination needs |J| <= 1");
    let vars: Vec<Var> = si.boundary.iter().chain(&si.inner).copied().collect();
    let left = side_assignments(&st, 0, &vars, &si.touching);
    let right = side_assignments(&st, 1, &vars, &si.touching);
    let weights = &st.weights;
    let weight = |k: usize, i: bool, j: bool| weights.get(vars[k], i, j).clone();
    match si.boundary.first() {
        Some(&x) => {
            let sums = pair_sum_by_first(vars.len(), &left, &right, &weight);
            if sums.iter().all(|p| p.is_zero()) {
                st.p_main = Default::default();
            }
            for ((i, j), s) in VALUE_PAIRS.into_iter().zip(sums) {
                let updated = st.weights.get(x, i, j) * &s;
                st.weights.set(x, i, j, updated);
            }
        }
        None => {
            let total = pair_sum(vars.len(), &left, &right, &weight);
            st.p_main = &st.p_main * &total;
        }
    }
    st.remove_clauses(&si.touching.iter().copied().collect());
    for &v in &si.inner {
        st.forget(v);
    }
    if let Some(&x) = si.boundary.first() {
        if !st.phi[0].iter().any(|c| c.contains_var(x)) {
            eliminate_determined(&mut st, x);
        }
    }
    st
}

/// Branches on `x ∈ J = {w, x}`, eliminates I against `{w}`, then simplifies
/// (which links the rest of the clause `x` shares with an outside variable).
pub fn branch_semiisolated_2(
    st: &PairState,
    si: &SemiIsolated,
    x: Var,
    counts: &mut RuleCounts,
) -> Branching {
    assert_eq!(si.boundary.len(), 2);
    assert!(si.boundary.contains(&x));
    let rest = SemiIsolated {
        inner: si.inner.clone(),
        boundary: si.boundary.iter().copied().filter(|&v| v != x).collect(),
        touching: si.touching.clone(),
    };
    let mut out = Branching::default();
    for (i, j) in VALUE_PAIRS {
        if !st.allows(x, i, j) {
            continue;
        }
        let mut child = st.clone();
        child.assign(x, i, j);
        counts.semi_isolated_elim += 1;
        let child = eliminate_semiisolated_1(child, &rest);
        out.push(simplify_fixpoint(child, counts), 5);
    }
    out
}

/// Assigns every variable of a 3-variable clause so that the literal at
/// position `true_at[side]` is the true one on each side. `None` if this
/// contradicts a recorded value.
fn assign_clause_choice(st: &PairState, clause: usize, true_at: [usize; 2]) -> Option<PairState> {
    let values: Vec<(Var, [bool; 2])> = (0..3)
        .map(|pos| {
            let mut vals = [false; 2];
            let mut var = 0;
            for side in 0..2 {
                match st.phi[side][clause].lits()[pos] {
                    Literal::Var { var: v, neg } => {
                        var = v;
                        vals[side] = (pos == true_at[side]) ^ neg;
                    }
                    Literal::Const(_) => unreachable!("branch clause has three variables"),
                }
            }
            (var, vals)
        })
        .collect();
    if !values.iter().all(|&(v, [i, j])| st.allows(v, i, j)) {
        return None;
    }
    let mut child = st.clone();
    for (v, [i, j]) in values {
        child.assign(v, i, j);
    }
    Some(child)
}

/// Branches nine ways on which literal of `clause = (v', w', e)` is true on
/// each side, eliminates the rest of I against the last boundary variable,
/// then simplifies.
pub fn branch_semiisolated_3(
    st: &PairState,
    si: &SemiIsolated,
    clause: usize,
    counts: &mut RuleCounts,
) -> Branching {
    assert_eq!(si.boundary.len(), 3);
    let cvars = st.clause_vars(clause);
    assert_eq!(cvars.len(), 3);
    let rest = SemiIsolated {
        inner: si
            .inner
            .iter()
            .copied()
            .filter(|v| !cvars.contains(v))
            .collect(),
        boundary: si
            .boundary
            .iter()
            .copied()
            .filter(|v| !cvars.contains(v))
            .collect(),
        touching: si.touching.clone(),
    };
    assert_eq!(
        rest.boundary.len(),
        1,
        "clause must hold two boundary variables"
    );
    let mut out = Branching::default();
    for t1 in 0..3 {
        for t2 in 0..3 {
            match assign_clause_choice(st, clause, [t1, t2]) {
                Some(child) => {
                    counts.semi_isolated_elim += 1;
                    let child = eliminate_semiisolated_1(child, &rest);
                    out.push(simplify_fixpoint(child, counts), 8);
                }
                None => continue,
            }
        }
    }
    out
}

/// Branches on a clause with four dissimilar neighbours: either its
/// `x`-literal is false on both sides, or one of the five remaining
/// combinations of which literal is true on each side.
pub fn branch_four_neighbour(
    st: &PairState,
    pattern: NeighbourPattern,
    counts: &mut RuleCounts,
) -> Branching {
    let NeighbourPattern { clause, x } = pattern;
    let lits = st.phi[0][clause].lits();
    assert_eq!(st.clause_vars(clause).len(), 3);
    let px = lits
        .iter()
        .position(|l| l.var() == Some(x))
        .expect("pattern variable in clause");
    let others: Vec<usize> = (0..3).filter(|&p| p != px).collect();
    let (py, pz) = (others[0], others[1]);

    let mut out = Branching::default();
    let neg_x = |side: usize| match st.phi[side][clause].lits()[px] {
        Literal::Var { neg, .. } => neg,
        Literal::Const(_) => unreachable!(),
    };
    // x-literal false on both sides: x takes the value of its negation flag.
    let (i, j) = (neg_x(0), neg_x(1));
    if st.allows(x, i, j) {
        let mut child = st.clone();
        child.assign(x, i, j);
        out.push(simplify_fixpoint(child, counts), 4);
    }
    for true_at in [[px, px], [px, py], [px, pz], [py, px], [pz, px]] {
        if let Some(child) = assign_clause_choice(st, clause, true_at) {
            out.push(simplify_fixpoint(child, counts), 7);
        }
    }
    out
}

struct ClassView {
    /// Variables of each class's representative clause.
    vars: Vec<Vec<Var>>,
    members: Vec<Vec<usize>>,
    by_var: BTreeMap<Var, Vec<usize>>,
}

impl ClassView {
    fn new(st: &PairState) -> Self {
        let members = st.classes();
        let vars: Vec<Vec<Var>> = members.iter().map(|m| st.clause_vars(m[0])).collect();
        let mut by_var: BTreeMap<Var, Vec<usize>> = BTreeMap::new();
        for (k, vs) in vars.iter().enumerate() {
            for &v in vs {
                by_var.entry(v).or_default().push(k);
            }
        }
        ClassView {
            vars,
            members,
            by_var,
        }
    }

    fn neighbours(&self, k: usize) -> BTreeSet<usize> {
        self.vars[k]
            .iter()
            .flat_map(|v| self.by_var[v].iter().copied())
            .filter(|&o| o != k)
            .collect()
    }
}

fn union_find_root(parent: &mut BTreeMap<Var, Var>, v: Var) -> Var {
    let p = *parent.entry(v).or_insert(v);
    if p == v {
        return v;
    }
    let root = union_find_root(parent, p);
    parent.insert(v, root);
    root
}

/// Semi-isolated candidate built from the closed neighbourhood of class `k`.
fn semi_isolated_around(st: &PairState, view: &ClassView, k: usize) -> Option<Config> {
    let mut scope: BTreeSet<Var> = view.vars[k].iter().copied().collect();
    for nb in view.neighbours(k) {
        scope.extend(view.vars[nb].iter().copied());
    }
    let boundary: Vec<Var> = scope
        .iter()
        .copied()
        .filter(|v| {
            view.by_var[v]
                .iter()
                .any(|&c| view.vars[c].iter().any(|u| !scope.contains(u)))
        })
        .collect();
    let inner: Vec<Var> = scope
        .iter()
        .copied()
        .filter(|v| !boundary.contains(v))
        .collect();
    if inner.len() > 10 || boundary.len() > 3 {
        return None;
    }
    let si = SemiIsolated::new(st, inner, boundary)?;
    match si.boundary.len() {
        0 | 1 if !si.inner.is_empty() => Some(Config::Eliminate(si)),
        2 if si.inner.len() >= 3 => {
            let x = si.boundary[0];
            let clause = view.by_var[&x]
                .iter()
                .find(|&&c| view.vars[c].iter().any(|u| !scope.contains(u)))
                .map(|&c| view.members[c][0])?;
            Some(Config::BranchOne { si, x, clause })
        }
        3 if si.inner.len() >= 4 => {
            let clause = (0..view.vars.len()).find(|&c| {
                let vs = &view.vars[c];
                vs.iter().filter(|v| si.boundary.contains(v)).count() == 2
                    && vs.iter().filter(|v| si.inner.contains(v)).count() == 1
            })?;
            Some(Config::BranchThree {
                si,
                clause: view.members[clause][0],
            })
        }
        _ => None,
    }
}

/// Number of independent links the neighbours of class `k` yield once the
/// clause's three variables are all fixed.
fn neighbour_link_rank(view: &ClassView, k: usize) -> usize {
    let mut parent = BTreeMap::new();
    let mut rank = 0;
    for nb in view.neighbours(k) {
        let pair: Vec<Var> = view.vars[nb]
            .iter()
            .copied()
            .filter(|v| !view.vars[k].contains(v))
            .collect();
        if pair.len() != 2 {
            continue;
        }
        let (a, b) = (
            union_find_root(&mut parent, pair[0]),
            union_find_root(&mut parent, pair[1]),
        );
        if a != b {
            parent.insert(a, b);
            rank += 1;
        }
    }
    rank
}

/// Chooses between semi-isolated elimination and four-neighbour branching
/// for a simplified state with no variable in four dissimilar clauses.
///
/// Semi-isolated sets (taken from the neighbourhood of a clause with four
/// dissimilar neighbours) are preferred; otherwise a clause whose neighbours
/// give at least four independent links once its variables are fixed is
/// branched on. Returns `None` iff no clause has four dissimilar neighbours.
pub fn find_config(st: &PairState) -> Option<Config> {
    let view = ClassView::new(st);
    let crowded: Vec<usize> = (0..view.vars.len())
        .filter(|&k| view.neighbours(k).len() >= 4)
        .collect();
    if crowded.is_empty() {
        return None;
    }
    if let Some(cfg) = crowded
        .iter()
        .find_map(|&k| semi_isolated_around(st, &view, k))
    {
        return Some(cfg);
    }
    for &k in &crowded {
        let twice: Vec<Var> = view.vars[k]
            .iter()
            .copied()
            .filter(|v| view.by_var[v].len() == 3)
            .collect();
        if !twice.is_empty() && neighbour_link_rank(&view, k) >= 4 {
            return Some(Config::FourNeighbour(NeighbourPattern {
                clause: view.members[k][0],
                x: twice[0],
            }));
        }
    }
    panic!("clause classes {crowded:?} have four dissimilar neighbours but no rule applies:\n{st}");
}
