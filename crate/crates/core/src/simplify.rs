//! Non-branching rewrites, applied to a fixpoint in priority order:
//! unsatisfiable clauses, fully determined or unused variables, clauses over
//! at most two variables, and pairs of clauses sharing two variables.

use std::collections::{BTreeSet, HashMap};

use crate::model::{Clause, Conflict, Literal, PairState, Var, VALUE_PAIRS};
use crate::poly::HDPoly;
use crate::solver::RuleCounts;

/// `drop` takes the value of `keep` XOR `flip[side]` on each side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Link {
    pub keep: Var,
    pub drop: Var,
    pub flip: [bool; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Forced {
    pub side: usize,
    pub var: Var,
    pub value: bool,
}

/// What an aligned clause pair over at most two variables reduces to.
/// In every case but `Unsat` the clause leaves both formulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SmallClauseAction {
    Unsat,
    Drop,
    Force(Vec<Forced>),
    Link { link: Link, forced: Vec<Forced> },
}

/// Relation a single side's clause imposes on its (at most two) variables.
#[derive(Clone, Debug, PartialEq, Eq)]
enum SideRelation {
    Unsat,
    Free,
    Force(Vec<(Var, bool)>),
    /// `vars[1] = vars[0] XOR flip`.
    Link(bool),
}

/// Satisfying assignments of `c` over `vars`, as bitmasks (bit k ↔ `vars[k]`).
fn local_solutions(c: &Clause, vars: &[Var]) -> Vec<u32> {
    (0..1u32 << vars.len())
        .filter(|&m| {
            c.satisfied_by(|x| {
                let k = vars.iter().position(|&v| v == x).expect("clause variable");
                m >> k & 1 == 1
            })
        })
        .collect()
}

fn classify(c: &Clause, vars: &[Var]) -> SideRelation {
    let sols = local_solutions(c, vars);
    let bit = |m: u32, k: usize| m >> k & 1 == 1;
    match (vars.len(), sols.as_slice()) {
        (_, []) => SideRelation::Unsat,
        (0, _) | (1, [_, _]) | (2, [_, _, _, _]) => SideRelation::Free,
        (1, [m]) => SideRelation::Force(vec![(vars[0], bit(*m, 0))]),
        (2, [m]) => SideRelation::Force(vec![(vars[0], bit(*m, 0)), (vars[1], bit(*m, 1))]),
        (2, [a, b]) => {
            if bit(*a, 0) == bit(*b, 0) {
                SideRelation::Force(vec![(vars[0], bit(*a, 0))])
            } else if bit(*a, 1) == bit(*b, 1) {
                SideRelation::Force(vec![(vars[1], bit(*a, 1))])
            } else {
                SideRelation::Link(bit(*a, 0) != bit(*a, 1))
            }
        }
        _ => panic!(
            "exactly-one clause {c} has {} solutions over {vars:?}",
            sols.len()
        ),
    }
}

/// Classifies an aligned clause pair with at most two distinct variables.
pub fn normalize_small_clause(c1: &Clause, c2: &Clause) -> SmallClauseAction {
    let vars = c1.vars();
    debug_assert!(vars.len() <= 2 && vars == c2.vars());
    let rel = [classify(c1, &vars), classify(c2, &vars)];
    if rel.contains(&SideRelation::Unsat) {
        return SmallClauseAction::Unsat;
    }
    let mut forced = Vec::new();
    for (side, r) in rel.iter().enumerate() {
        if let SideRelation::Force(fs) = r {
            forced.extend(fs.iter().map(|&(var, value)| Forced { side, var, value }));
        }
    }
    let linked = rel.iter().any(|r| matches!(r, SideRelation::Link(_)));
    if !linked {
        return if forced.is_empty() {
            SmallClauseAction::Drop
        } else {
            SmallClauseAction::Force(forced)
        };
    }
    // A side that forces both variables agrees with the link it implies.
    let mut flip = [false; 2];
    for (side, r) in rel.iter().enumerate() {
        flip[side] = match r {
            SideRelation::Link(f) => *f,
            SideRelation::Force(fs) if fs.len() == 2 => fs[0].1 != fs[1].1,
            other => panic!("cannot align {other:?} with a link in {c1} / {c2}"),
        };
    }
    SmallClauseAction::Link {
        link: Link {
            keep: vars[0],
            drop: vars[1],
            flip,
        },
        forced,
    }
}

/// True iff some clause has no satisfying local assignment consistent with `s`.
pub fn detect_unsat(st: &PairState) -> bool {
    (0..2).any(|side| {
        st.phi[side].iter().any(|c| {
            let vars = c.vars();
            !local_solutions(c, &vars).into_iter().any(|m| {
                vars.iter()
                    .enumerate()
                    .all(|(k, &x)| st.s[side].allows(x, m >> k & 1 == 1))
            })
        })
    })
}

/// Folds `x` into `p_main`. Requires `x` determined on both sides or absent
/// from every clause.
pub fn eliminate_determined(st: &mut PairState, x: Var) {
    match (st.s[0].get(x), st.s[1].get(x)) {
        (Some(i), Some(j)) => st.assign(x, i, j),
        _ => {
            debug_assert!(!st.phi[0].iter().any(|c| c.contains_var(x)));
            let table = st.weights.table(x).expect("active variable");
            let factor: HDPoly = VALUE_PAIRS
                .iter()
                .zip(table)
                .filter(|((i, j), _)| st.allows(x, *i, *j))
                .map(|(_, p)| p.clone())
                .sum();
            st.p_main = &st.p_main * &factor;
            st.forget(x);
        }
    }
}

/// Replaces `link.drop` by `link.keep` (with per-side polarity), folding its
/// weights into `keep` and carrying over any determination.
pub fn link_variables(st: &mut PairState, link: Link) -> Result<(), Conflict> {
    let Link { keep, drop, flip } = link;
    debug_assert_ne!(keep, drop);
    let dropped = st.weights.remove(drop).expect("linked variable is active");
    for (i, j) in VALUE_PAIRS {
        let w = &dropped[usize::from(i ^ flip[0]) * 2 + usize::from(j ^ flip[1])];
        let updated = st.weights.get(keep, i, j) * w;
        st.weights.set(keep, i, j, updated);
    }
    for side in 0..2 {
        if let Some(v) = st.s[side].remove(drop) {
            st.s[side].record(keep, v ^ flip[side])?;
        }
        for c in &mut st.phi[side] {
            for l in c.lits_mut() {
                if let Literal::Var { var, neg } = *l {
                    if var == drop {
                        *l = Literal::Var {
                            var: keep,
                            neg: neg ^ flip[side],
                        };
                    }
                }
            }
        }
    }
    st.active.remove(&drop);
    Ok(())
}

fn record_all(st: &mut PairState, forced: &[Forced]) -> Result<(), Conflict> {
    forced
        .iter()
        .try_for_each(|f| st.s[f.side].record(f.var, f.value))
}

/// Applies the small-clause rule to clause `ci`. `Err` means the state is zero.
pub fn apply_small_clause(st: &mut PairState, ci: usize) -> Result<(), Conflict> {
    let action = normalize_small_clause(&st.phi[0][ci], &st.phi[1][ci]);
    let (link, forced) = match action {
        SmallClauseAction::Unsat => return Err(Conflict),
        SmallClauseAction::Drop => (None, Vec::new()),
        SmallClauseAction::Force(f) => (None, f),
        SmallClauseAction::Link { link, forced } => (Some(link), forced),
    };
    st.remove_clauses(&BTreeSet::from([ci]));
    record_all(st, &forced)?;
    if let Some(link) = link {
        link_variables(st, link)?;
    }
    Ok(())
}

/// Two 3-variable clauses `i`, `j` share exactly two variables: the two
/// remaining variables get linked (or both forced false), per side.
pub fn resolve_shared_pair(st: &mut PairState, i: usize, j: usize) -> Result<(), Conflict> {
    let vi = st.clause_vars(i);
    let vj = st.clause_vars(j);
    let shared: Vec<Var> = vi.iter().copied().filter(|v| vj.contains(v)).collect();
    assert_eq!(
        shared.len(),
        2,
        "clauses {i} and {j} must share two variables"
    );
    let w = *vi
        .iter()
        .find(|v| !shared.contains(v))
        .expect("third variable");
    let z = *vj
        .iter()
        .find(|v| !shared.contains(v))
        .expect("third variable");

    let mut forced = Vec::new();
    let mut flips: [Option<bool>; 2] = [None, None];
    for side in 0..2 {
        let neg_in = |ci: usize, x: Var| {
            st.phi[side][ci]
                .lits()
                .iter()
                .find_map(|l| match *l {
                    Literal::Var { var, neg } if var == x => Some(neg),
                    _ => None,
                })
                .expect("variable occurs in clause")
        };
        let (p, q) = (shared[0], shared[1]);
        let same_p = neg_in(i, p) == neg_in(j, p);
        let same_q = neg_in(i, q) == neg_in(j, q);
        let (nw, nz) = (neg_in(i, w), neg_in(j, z));
        match (same_p, same_q) {
            // literal w == literal z
            (true, true) => flips[side] = Some(nw ^ nz),
            // both remaining literals false
            (false, false) => {
                forced.push(Forced {
                    side,
                    var: w,
                    value: nw,
                });
                forced.push(Forced {
                    side,
                    var: z,
                    value: nz,
                });
            }
            // the shared literal of equal polarity is false, literal w == ¬literal z
            (true, false) | (false, true) => {
                let x = if same_p { p } else { q };
                forced.push(Forced {
                    side,
                    var: x,
                    value: neg_in(i, x),
                });
                flips[side] = Some(!(nw ^ nz));
            }
        }
    }
    record_all(st, &forced)?;
    if flips.iter().all(Option::is_none) {
        // Both sides force w = z = 0; determination elimination takes over.
        return Ok(());
    }
    let mut flip = [false; 2];
    for side in 0..2 {
        flip[side] = match flips[side] {
            Some(f) => f,
            None => {
                let value = |v| {
                    forced
                        .iter()
                        .find(|f| f.side == side && f.var == v)
                        .map(|f| f.value)
                        .expect("forced remaining variable")
                };
                value(w) != value(z)
            }
        };
    }
    let (keep, drop) = if w < z { (w, z) } else { (z, w) };
    link_variables(st, Link { keep, drop, flip })
}

fn eliminable_var(st: &PairState) -> Option<Var> {
    let used: BTreeSet<Var> = st.phi[0].iter().flat_map(|c| c.vars()).collect();
    st.active
        .iter()
        .copied()
        .find(|&x| (st.s[0].contains(x) && st.s[1].contains(x)) || !used.contains(&x))
}

fn small_clause(st: &PairState) -> Option<usize> {
    st.phi[0].iter().position(|c| c.vars().len() <= 2)
}

fn shared_pair(st: &PairState) -> Option<(usize, usize)> {
    let occ = st.occurrences();
    for (i, c) in st.phi[0].iter().enumerate() {
        let vi = c.vars();
        for v in &vi {
            for &j in occ[v].iter().filter(|&&j| j > i) {
                let vj = st.phi[0][j].vars();
                if vi.iter().filter(|x| vj.contains(x)).count() == 2 {
                    return Some((i, j));
                }
            }
        }
    }
    None
}

fn duplicate_clause(st: &PairState) -> Option<usize> {
    let mut seen = HashMap::new();
    for ci in 0..st.num_clauses() {
        let key = (st.phi[0][ci].sorted_lits(), st.phi[1][ci].sorted_lits());
        if seen.insert(key, ci).is_some() {
            return Some(ci);
        }
    }
    None
}

/// One non-branching rewrite, in priority order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rewrite {
    Unsat,
    Determined(Var),
    SmallClause(usize),
    SharedPair(usize, usize),
    Duplicate(usize),
}

/// The highest-priority rewrite that applies to `st`, if any.
pub fn next_rewrite(st: &PairState) -> Option<Rewrite> {
    if detect_unsat(st) {
        return Some(Rewrite::Unsat);
    }
    if let Some(x) = eliminable_var(st) {
        return Some(Rewrite::Determined(x));
    }
    if let Some(ci) = small_clause(st) {
        return Some(Rewrite::SmallClause(ci));
    }
    if let Some((i, j)) = shared_pair(st) {
        return Some(Rewrite::SharedPair(i, j));
    }
    duplicate_clause(st).map(Rewrite::Duplicate)
}

/// Applies `rw`; `None` means the state evaluates to zero.
pub fn apply_rewrite(mut st: PairState, rw: Rewrite) -> Option<PairState> {
    let outcome = match rw {
        Rewrite::Unsat => Err(Conflict),
        Rewrite::Determined(x) => {
            eliminate_determined(&mut st, x);
            Ok(())
        }
        Rewrite::SmallClause(ci) => apply_small_clause(&mut st, ci),
        Rewrite::SharedPair(i, j) => resolve_shared_pair(&mut st, i, j),
        Rewrite::Duplicate(ci) => {
            st.remove_clauses(&BTreeSet::from([ci]));
            Ok(())
        }
    };
    outcome.ok().map(|()| st)
}

/// Applies the non-branching rules until none fires. `None` means the state
/// evaluates to the zero polynomial.
pub fn simplify_fixpoint(mut st: PairState, counts: &mut RuleCounts) -> Option<PairState> {
    loop {
        st.debug_check();
        let Some(rw) = next_rewrite(&st) else {
            return Some(st);
        };
        match rw {
            Rewrite::Unsat => {}
            Rewrite::Determined(_) => counts.determined += 1,
            Rewrite::SmallClause(_) => counts.small_clause += 1,
            Rewrite::SharedPair(..) => counts.shared_pair += 1,
            Rewrite::Duplicate(_) => counts.duplicate += 1,
        }
        match apply_rewrite(st, rw) {
            Some(next) => st = next,
            None => {
                counts.unsat += 1;
                return None;
            }
        }
    }
}

/// Whether `st` is a fixpoint of [`simplify_fixpoint`].
pub fn is_simplified(st: &PairState) -> bool {
    next_rewrite(st).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Formula;
    use crate::oracle::state_eval;
    use Literal::Const;

    fn cl(lits: &[Literal]) -> Clause {
        Clause::new(lits.to_vec())
    }
    fn p(v: Var) -> Literal {
        Literal::pos(v)
    }
    fn n(v: Var) -> Literal {
        Literal::neg(v)
    }

    fn state(n_vars: u32, clauses: &[&[i64]]) -> PairState {
        PairState::initial(&Formula::from_signed(n_vars, clauses))
    }

    #[test]
    fn unsat_detection() {
        let mut st = state(2, &[&[1, 2]]);
        st.phi[0][0] = cl(&[Const(false), Const(false), Const(false)]);
        st.phi[1][0] = st.phi[0][0].clone();
        assert!(detect_unsat(&st));
        let st = state(1, &[&[1, 1]]);
        assert!(detect_unsat(&st));
        let mut st = state(2, &[&[1, 2]]);
        st.phi[0][0] = cl(&[Const(true), p(1), n(1)]);
        assert!(detect_unsat(&st));
        let mut st = state(2, &[&[1, 2]]);
        st.phi[0][0] = cl(&[Const(true), p(1), p(2)]);
        st.phi[1][0] = st.phi[0][0].clone();
        assert!(!detect_unsat(&st));
        // Unsatisfiable only in combination with a recorded value.
        st.s[1].record(2, true).unwrap();
        assert!(detect_unsat(&st));
    }

    #[test]
    fn small_clause_actions() {
        let c = cl(&[p(1), n(1)]);
        assert_eq!(normalize_small_clause(&c, &c), SmallClauseAction::Drop);
        let c = cl(&[p(1), p(2)]);
        assert_eq!(
            normalize_small_clause(&c, &c),
            SmallClauseAction::Link {
                link: Link {
                    keep: 1,
                    drop: 2,
                    flip: [true, true]
                },
                forced: vec![]
            }
        );
        let c = cl(&[p(1), p(1)]);
        assert_eq!(normalize_small_clause(&c, &c), SmallClauseAction::Unsat);
        let c = cl(&[p(1), p(1), p(3)]);
        let forced = |side| {
            [
                Forced {
                    side,
                    var: 1,
                    value: false,
                },
                Forced {
                    side,
                    var: 3,
                    value: true,
                },
            ]
        };
        assert_eq!(
            normalize_small_clause(&c, &c),
            SmallClauseAction::Force([forced(0), forced(1)].concat())
        );
        let c = cl(&[Const(true), p(1), p(2)]);
        let zero = |side| {
            [
                Forced {
                    side,
                    var: 1,
                    value: false,
                },
                Forced {
                    side,
                    var: 2,
                    value: false,
                },
            ]
        };
        assert_eq!(
            normalize_small_clause(&c, &c),
            SmallClauseAction::Force([zero(0), zero(1)].concat())
        );
    }

    #[test]
    fn link_on_one_side_force_on_other() {
        let c1 = cl(&[p(1), p(2), Const(false)]);
        let c2 = cl(&[p(1), n(2), Const(true)]);
        // side 2 forces x1 = 0, x2 = 1, i.e. x2 = ¬x1
        assert_eq!(
            normalize_small_clause(&c1, &c2),
            SmallClauseAction::Link {
                link: Link {
                    keep: 1,
                    drop: 2,
                    flip: [true, true]
                },
                forced: vec![
                    Forced {
                        side: 1,
                        var: 1,
                        value: false
                    },
                    Forced {
                        side: 1,
                        var: 2,
                        value: true
                    }
                ]
            }
        );
    }

    #[test]
    fn eliminate_free_and_determined() {
        let mut st = state(1, &[]);
        eliminate_determined(&mut st, 1);
        assert_eq!(st.p_main, HDPoly::from_terms([(1, 2u32), (0, 2)]));
        assert!(st.active.is_empty());

        let mut st = state(1, &[]);
        st.s[0].record(1, false).unwrap();
        st.s[1].record(1, true).unwrap();
        eliminate_determined(&mut st, 1);
        assert_eq!(st.p_main, HDPoly::u());

        let mut st = state(3, &[&[1, 2, 3]]);
        st.s[0].record(1, true).unwrap();
        st.s[1].record(1, true).unwrap();
        eliminate_determined(&mut st, 1);
        assert_eq!(st.p_main, HDPoly::one());
        assert_eq!(st.phi[0][0].lits()[0], Const(true));
        assert_eq!(st.phi[1][0].lits()[0], Const(true));
    }

    #[test]
    fn linking_weights() {
        let mut st = state(2, &[]);
        link_variables(
            &mut st,
            Link {
                keep: 1,
                drop: 2,
                flip: [true, true],
            },
        )
        .unwrap();
        assert_eq!(*st.weights.get(1, false, false), HDPoly::one());
        assert_eq!(*st.weights.get(1, false, true), HDPoly::monomial(2, 1u32));

        let mut st = state(2, &[]);
        st.s[0].record(2, false).unwrap();
        link_variables(
            &mut st,
            Link {
                keep: 1,
                drop: 2,
                flip: [false, true],
            },
        )
        .unwrap();
        assert_eq!(st.s[0].get(1), Some(false));

        let mut st = state(2, &[]);
        st.s[0].record(1, true).unwrap();
        st.s[0].record(2, true).unwrap();
        assert_eq!(
            link_variables(
                &mut st,
                Link {
                    keep: 1,
                    drop: 2,
                    flip: [true, false]
                }
            ),
            Err(Conflict)
        );
    }

    #[test]
    fn mixed_polarity_link_conserves() {
        // (x1, x2) aligned with (x1, ¬x2): x2 = ¬x1 on side 1 and x2 = x1 on side 2.
        let mut st = state(4, &[&[1, 2], &[2, 3, 4]]);
        st.phi[1][0] = cl(&[p(1), n(2)]);
        let before = state_eval(&st).unwrap();
        let expected_weight = |i: bool, j: bool| st.weights.get(1, i, j) * st.weights.get(2, !i, j);
        let expected: Vec<HDPoly> = VALUE_PAIRS
            .iter()
            .map(|&(i, j)| expected_weight(i, j))
            .collect();
        apply_small_clause(&mut st, 0).unwrap();
        assert_eq!(state_eval(&st).unwrap(), before);
        for (k, &(i, j)) in VALUE_PAIRS.iter().enumerate() {
            assert_eq!(*st.weights.get(1, i, j), expected[k]);
        }
    }

    #[test]
    fn shared_pairs() {
        let mut st = state(5, &[&[1, 2, 3], &[1, 2, 4], &[3, 4, 5]]);
        let before = state_eval(&st).unwrap();
        resolve_shared_pair(&mut st, 0, 1).unwrap();
        assert!(!st.active.contains(&4));
        assert_eq!(st.phi[0][1].lits(), &[p(1), p(2), p(3)]);
        assert_eq!(state_eval(&st).unwrap(), before);

        let mut st = state(5, &[&[1, 2, 3], &[-1, -2, 4], &[3, 4, 5]]);
        let before = state_eval(&st).unwrap();
        resolve_shared_pair(&mut st, 0, 1).unwrap();
        for side in 0..2 {
            assert_eq!(st.s[side].get(3), Some(false));
            assert_eq!(st.s[side].get(4), Some(false));
        }
        assert_eq!(state_eval(&st).unwrap(), before);

        let mut st = state(5, &[&[1, 2, 3], &[1, -2, 4], &[3, 4, 5]]);
        let before = state_eval(&st).unwrap();
        resolve_shared_pair(&mut st, 0, 1).unwrap();
        assert_eq!(st.s[0].get(1), Some(false));
        assert!(!st.active.contains(&4));
        assert_eq!(st.phi[0][2].lits(), &[p(3), n(3), p(5)]);
        assert_eq!(state_eval(&st).unwrap(), before);
    }

    #[test]
    fn fixpoints() {
        let mut counts = RuleCounts::default();
        assert!(simplify_fixpoint(state(1, &[&[1, 1, 1]]), &mut counts).is_none());

        let st = simplify_fixpoint(state(3, &[&[1, 2], &[2, 3]]), &mut counts).unwrap();
        assert!(st.phi[0].is_empty());
        // Everything folds: x2 = ¬x1, x3 = ¬x2 leaves one free variable's worth.
        assert_eq!(
            st.p_main,
            state_eval(&state(3, &[&[1, 2], &[2, 3]])).unwrap()
        );

        let example = state(7, &[&[1, 2, 3], &[1, 4, 5], &[1, 6, 7], &[2, 4, -6]]);
        assert!(is_simplified(&example));
    }

    #[test]
    fn duplicates_removed() {
        let mut counts = RuleCounts::default();
        let st = simplify_fixpoint(state(4, &[&[1, 2, 3], &[3, 2, 1], &[2, 3, 4]]), &mut counts);
        assert!(st.is_none() || counts.duplicate >= 1);
        let st = simplify_fixpoint(state(5, &[&[1, 2, 3], &[3, 2, 1], &[3, 4, 5]]), &mut counts)
            .unwrap();
        assert_eq!(st.num_clauses(), 2);
    }
}
