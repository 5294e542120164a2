//! Formulas, clause predicates and the paired recursion state.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::poly::HDPoly;

/// Variable identifier, `1..=n_vars`.
pub type Var = u32;

/// A literal of an exactly-one clause. Substitution turns variables into constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Const(bool),
    Var { var: Var, neg: bool },
}

impl Literal {
    pub fn pos(var: Var) -> Self {
        Literal::Var { var, neg: false }
    }

    pub fn neg(var: Var) -> Self {
        Literal::Var { var, neg: true }
    }

    /// Reads a signed DIMACS-style integer (`-3` is `¬x3`). Zero is rejected.
    pub fn from_signed(lit: i64) -> Option<Self> {
        let var = Var::try_from(lit.unsigned_abs()).ok().filter(|v| *v > 0)?;
        Some(Literal::Var { var, neg: lit < 0 })
    }

    pub fn var(self) -> Option<Var> {
        match self {
            Literal::Var { var, .. } => Some(var),
            Literal::Const(_) => None,
        }
    }

    pub fn negated(self) -> Self {
        match self {
            Literal::Const(b) => Literal::Const(!b),
            Literal::Var { var, neg } => Literal::Var { var, neg: !neg },
        }
    }

    /// Truth value of the literal given a lookup for its variable.
    pub fn eval(self, value_of: impl Fn(Var) -> bool) -> bool {
        match self {
            Literal::Const(b) => b,
            Literal::Var { var, neg } => value_of(var) ^ neg,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Const(b) => write!(f, "{}", u8::from(*b)),
            Literal::Var { var, neg: false } => write!(f, "x{var}"),
            Literal::Var { var, neg: true } => write!(f, "¬x{var}"),
        }
    }
}

/// An exactly-one clause of one to three literals.
///
/// Literal order is positional: the two formulas of a [`PairState`] keep the
/// same variable at the same position. Logical semantics ignore order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    /// Panics unless `1 <= lits.len() <= 3`.
    pub fn new(lits: Vec<Literal>) -> Self {
        assert!(
            (1..=3).contains(&lits.len()),
            "clause arity {} outside 1..=3",
            lits.len()
        );
        Clause { lits }
    }

    pub fn lits(&self) -> &[Literal] {
        &self.lits
    }

    pub(crate) fn lits_mut(&mut self) -> &mut [Literal] {
        &mut self.lits
    }

    /// Distinct variables, ascending.
    pub fn vars(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self.lits.iter().filter_map(|l| l.var()).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn contains_var(&self, x: Var) -> bool {
        self.lits.iter().any(|l| l.var() == Some(x))
    }

    /// True iff exactly one literal is true.
    pub fn satisfied_by(&self, value_of: impl Fn(Var) -> bool) -> bool {
        self.lits.iter().filter(|l| l.eval(&value_of)).count() == 1
    }

    /// Multiset of literal "shapes" with polarity erased; equal keys mean similar clauses.
    pub fn similarity_key(&self) -> Vec<Option<Var>> {
        let mut key: Vec<Option<Var>> = self.lits.iter().map(|l| l.var()).collect();
        key.sort_unstable();
        key
    }

    /// Order-insensitive identity of the clause.
    pub(crate) fn sorted_lits(&self) -> Vec<Literal> {
        let mut l = self.lits.clone();
        l.sort_unstable();
        l
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

/// Similar clauses differ only in the polarity of some literals
/// (`Const(1)` negates to `Const(0)`), compared as multisets.
pub fn are_similar(c1: &Clause, c2: &Clause) -> bool {
    c1.similarity_key() == c2.similarity_key()
}

pub fn are_neighbours(c1: &Clause, c2: &Clause) -> bool {
    let v2 = c2.vars();
    c1.vars().iter().any(|v| v2.binary_search(v).is_ok())
}

/// Groups clause indices into classes of mutually similar clauses.
/// Classes are ordered by their first member.
pub fn dissimilar_classes(clauses: &[Clause]) -> Vec<Vec<usize>> {
    let mut index: HashMap<Vec<Option<Var>>, usize> = HashMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, c) in clauses.iter().enumerate() {
        let slot = *index.entry(c.similarity_key()).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[slot].push(i);
    }
    classes
}

/// An exactly-one formula over variables `1..=n_vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    pub n_vars: u32,
    pub clauses: Vec<Clause>,
}

impl Formula {
    pub fn new(n_vars: u32, clauses: Vec<Clause>) -> Self {
        Formula { n_vars, clauses }
    }

    /// Builds a formula from signed integer clauses, e.g. `&[&[1, 2, -3]]`.
    pub fn from_signed(n_vars: u32, clauses: &[&[i64]]) -> Self {
        let clauses = clauses
            .iter()
            .map(|c| {
                Clause::new(
                    c.iter()
                        .map(|&l| Literal::from_signed(l).expect("nonzero literal"))
                        .collect(),
                )
            })
            .collect();
        Formula { n_vars, clauses }
    }

    /// Checks that every literal refers to a declared variable.
    pub fn is_well_formed(&self) -> bool {
        self.clauses
            .iter()
            .flat_map(|c| c.lits())
            .filter_map(|l| l.var())
            .all(|v| v >= 1 && v <= self.n_vars)
    }

    /// Whether the full assignment `values[v]` (index 0 unused) satisfies every clause.
    pub fn satisfied_by(&self, values: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.satisfied_by(|v| values[v as usize]))
    }
}

/// Determined variable values for one side of the pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialAssignment(BTreeMap<Var, bool>);

impl PartialAssignment {
    pub fn get(&self, x: Var) -> Option<bool> {
        self.0.get(&x).copied()
    }

    pub fn contains(&self, x: Var) -> bool {
        self.0.contains_key(&x)
    }

    /// Whether `value` agrees with the recorded value (if any).
    pub fn allows(&self, x: Var, value: bool) -> bool {
        self.get(x).is_none_or(|v| v == value)
    }

    /// Records `x = value`. Returns `Err(Conflict)` if a different value is recorded.
    pub fn record(&mut self, x: Var, value: bool) -> Result<(), Conflict> {
        match self.0.get(&x) {
            Some(&old) if old != value => Err(Conflict),
            _ => {
                self.0.insert(x, value);
                Ok(())
            }
        }
    }

    pub fn remove(&mut self, x: Var) -> Option<bool> {
        self.0.remove(&x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A derived determination contradicts an earlier one: the state evaluates to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conflict;

/// Weight polynomials `p[x][i][j]` for each active variable, indexed by
/// (value on side 1, value on side 2).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarWeights(BTreeMap<Var, [HDPoly; 4]>);

impl VarWeights {
    pub fn pristine(vars: impl IntoIterator<Item = Var>) -> Self {
        VarWeights(
            vars.into_iter()
                .map(|x| {
                    (
                        x,
                        [
                            HDPoly::q(false, false),
                            HDPoly::q(false, true),
                            HDPoly::q(true, false),
                            HDPoly::q(true, true),
                        ],
                    )
                })
                .collect(),
        )
    }

    pub fn get(&self, x: Var, i: bool, j: bool) -> &HDPoly {
        &self.0[&x][slot(i, j)]
    }

    pub fn set(&mut self, x: Var, i: bool, j: bool, p: HDPoly) {
        self.0.get_mut(&x).expect("weights for active variable")[slot(i, j)] = p;
    }

    pub fn table(&self, x: Var) -> Option<&[HDPoly; 4]> {
        self.0.get(&x)
    }

    pub fn insert(&mut self, x: Var, table: [HDPoly; 4]) {
        self.0.insert(x, table);
    }

    pub fn remove(&mut self, x: Var) -> Option<[HDPoly; 4]> {
        self.0.remove(&x)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn slot(i: bool, j: bool) -> usize {
    usize::from(i) * 2 + usize::from(j)
}

/// All four `(side1, side2)` value pairs in canonical order.
pub const VALUE_PAIRS: [(bool, bool); 4] =
    [(false, false), (false, true), (true, false), (true, true)];

/// One node of the search tree: two aligned formulas, their partial
/// assignments, the active variables and the accumulated polynomials.
///
/// Its value is `p_main × Σ Π_{x∈V} p[x][β1(x)][β2(x)]` over pairs of
/// assignments to `V` satisfying `phi[0]`/`phi[1]` and consistent with `s[0]`/`s[1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairState {
    pub n_vars: u32,
    pub phi: [Vec<Clause>; 2],
    pub s: [PartialAssignment; 2],
    pub active: BTreeSet<Var>,
    pub p_main: HDPoly,
    pub weights: VarWeights,
}

impl PairState {
    pub fn initial(f: &Formula) -> Self {
        PairState {
            n_vars: f.n_vars,
            phi: [f.clauses.clone(), f.clauses.clone()],
            s: Default::default(),
            active: (1..=f.n_vars).collect(),
            p_main: HDPoly::one(),
            weights: VarWeights::pristine(1..=f.n_vars),
        }
    }

    pub fn phi1(&self) -> &[Clause] {
        &self.phi[0]
    }

    pub fn phi2(&self) -> &[Clause] {
        &self.phi[1]
    }

    pub fn num_clauses(&self) -> usize {
        self.phi[0].len()
    }

    /// Variables of clause `ci` (identical on both sides under the structure lock).
    pub fn clause_vars(&self, ci: usize) -> Vec<Var> {
        self.phi[0][ci].vars()
    }

    /// Clause indices containing each variable, in index order.
    pub fn occurrences(&self) -> BTreeMap<Var, Vec<usize>> {
        let mut occ: BTreeMap<Var, Vec<usize>> = BTreeMap::new();
        for (ci, c) in self.phi[0].iter().enumerate() {
            for v in c.vars() {
                occ.entry(v).or_default().push(ci);
            }
        }
        occ
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        dissimilar_classes(&self.phi[0])
    }

    /// Verifies the structure lock and that every clause variable is active.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.phi[0].len() != self.phi[1].len() {
            return Err(format!(
                "clause counts differ: {} vs {}",
                self.phi[0].len(),
                self.phi[1].len()
            ));
        }
        for (ci, (c1, c2)) in self.phi[0].iter().zip(&self.phi[1]).enumerate() {
            if c1.lits().len() != c2.lits().len() {
                return Err(format!("clause {ci}: arity mismatch {c1} vs {c2}"));
            }
            for (l1, l2) in c1.lits().iter().zip(c2.lits()) {
                if l1.var() != l2.var() {
                    return Err(format!("clause {ci}: misaligned {c1} vs {c2}"));
                }
                if let Some(v) = l1.var() {
                    if !self.active.contains(&v) {
                        return Err(format!("clause {ci}: inactive variable x{v}"));
                    }
                }
            }
        }
        if self.weights.len() != self.active.len()
            || !self.weights.vars().eq(self.active.iter().copied())
        {
            return Err("weights do not match the active set".into());
        }
        Ok(())
    }

    pub(crate) fn debug_check(&self) {
        if cfg!(debug_assertions) {
            if let Err(e) = self.check_invariants() {
                panic!("structure lock violated: {e}");
            }
        }
    }

    /// Whether `(i, j)` is consistent with the recorded values of `x`.
    pub fn allows(&self, x: Var, i: bool, j: bool) -> bool {
        self.s[0].allows(x, i) && self.s[1].allows(x, j)
    }

    /// Replaces `x` by the constants `i`/`j` on the two sides, multiplies
    /// `p_main` by `p[x][i][j]` and drops `x`. The caller checks consistency.
    pub fn assign(&mut self, x: Var, i: bool, j: bool) {
        let w = self
            .weights
            .remove(x)
            .expect("assigning an active variable");
        self.p_main = &self.p_main * &w[slot(i, j)];
        self.substitute_const(x, [i, j]);
        self.forget(x);
    }

    pub(crate) fn substitute_const(&mut self, x: Var, values: [bool; 2]) {
        for (side, value) in values.into_iter().enumerate() {
            for c in &mut self.phi[side] {
                for l in c.lits_mut() {
                    if let Literal::Var { var, neg } = *l {
                        if var == x {
                            *l = Literal::Const(value ^ neg);
                        }
                    }
                }
            }
        }
    }

    /// Removes `x` from the active set, its weights and both assignments.
    pub(crate) fn forget(&mut self, x: Var) {
        self.active.remove(&x);
        self.weights.remove(x);
        self.s[0].remove(x);
        self.s[1].remove(x);
    }

    pub(crate) fn remove_clauses(&mut self, doomed: &BTreeSet<usize>) {
        for side in &mut self.phi {
            let mut idx = 0;
            side.retain(|_| {
                let keep = !doomed.contains(&idx);
                idx += 1;
                keep
            });
        }
    }
}

impl fmt::Display for PairState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "V = {:?}", self.active)?;
        for side in 0..2 {
            write!(f, "phi{}:", side + 1)?;
            for c in &self.phi[side] {
                write!(f, " {c}")?;
            }
            writeln!(f)?;
            writeln!(
                f,
                "s{}: {:?}",
                side + 1,
                self.s[side].iter().collect::<Vec<_>>()
            )?;
        }
        write!(f, "p_main = {}", self.p_main)
    }
}
