//! Exhaustive per-side enumeration and the paired weighted sum used by the
//! base case and by semi-isolated elimination.

use crate::model::{Clause, PairState, Var};
use crate::poly::HDPoly;

/// Assignments to `vars` (bit `len-1-k` ↔ `vars[k]`, so numeric order is
/// lexicographic in `vars` order) that agree with `st.s[side]` and satisfy
/// every clause in `clauses` on that side. Clause variables must lie in `vars`.
pub(crate) fn side_assignments(
    st: &PairState,
    side: usize,
    vars: &[Var],
    clauses: &[usize],
) -> Vec<u64> {
    let len = vars.len();
    assert!(len < 64, "too many variables to enumerate");
    let depth_of = |x: Var| {
        vars.iter()
            .position(|&v| v == x)
            .unwrap_or_else(|| panic!("x{x} outside enumeration set"))
    };
    // Each clause is checked once its last variable is assigned.
    let mut checks: Vec<Vec<&Clause>> = vec![Vec::new(); len + 1];
    for &ci in clauses {
        let c = &st.phi[side][ci];
        let last = c
            .vars()
            .into_iter()
            .map(|x| depth_of(x) + 1)
            .max()
            .unwrap_or(0);
        checks[last].push(c);
    }
    let fixed: Vec<Option<bool>> = vars.iter().map(|&x| st.s[side].get(x)).collect();
    let mut out = Vec::new();
    let mut values = vec![false; len];

    fn dfs(
        depth: usize,
        values: &mut Vec<bool>,
        vars: &[Var],
        fixed: &[Option<bool>],
        checks: &[Vec<&Clause>],
        out: &mut Vec<u64>,
    ) {
        let ok = checks[depth].iter().all(|c| {
            c.satisfied_by(|x| values[vars.iter().position(|&v| v == x).expect("enumerated")])
        });
        if !ok {
            return;
        }
        if depth == vars.len() {
            let mask = values
                .iter()
                .fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
            out.push(mask);
            return;
        }
        for b in [false, true] {
            if fixed[depth].is_some_and(|f| f != b) {
                continue;
            }
            values[depth] = b;
            dfs(depth + 1, values, vars, fixed, checks, out);
        }
    }

    dfs(0, &mut values, vars, &fixed, &checks, &mut out);
    out
}

/// `Σ_{a∈left, b∈right} Π_k weight(k, a_k, b_k)` over sorted assignment lists,
/// sharing work along common prefixes.
pub(crate) fn pair_sum(
    len: usize,
    left: &[u64],
    right: &[u64],
    weight: &dyn Fn(usize, bool, bool) -> HDPoly,
) -> HDPoly {
    debug_assert!(left.is_sorted() && right.is_sorted());
    if left.is_empty() || right.is_empty() {
        return HDPoly::zero();
    }
    pair_sum_from(0, len, left, right, weight)
}

fn split(list: &[u64], bit: usize) -> [&[u64]; 2] {
    let at = list.partition_point(|m| m >> bit & 1 == 0);
    [&list[..at], &list[at..]]
}

fn pair_sum_from(
    depth: usize,
    len: usize,
    left: &[u64],
    right: &[u64],
    weight: &dyn Fn(usize, bool, bool) -> HDPoly,
) -> HDPoly {
    if depth == len {
        return HDPoly::from_terms([(0, (left.len() * right.len()) as u64)]);
    }
    let bit = len - 1 - depth;
    let l = split(left, bit);
    let r = split(right, bit);
    let mut total = HDPoly::zero();
    for (i, li) in l.iter().enumerate() {
        for (j, rj) in r.iter().enumerate() {
            if li.is_empty() || rj.is_empty() {
                continue;
            }
            let rest = pair_sum_from(depth + 1, len, li, rj, weight);
            total += &weight(depth, i == 1, j == 1) * &rest;
        }
    }
    total
}

/// Like [`pair_sum`] but leaves out the first variable, returning one sum per
/// `(i, j)` value pair of it, in `VALUE_PAIRS` order.
pub(crate) fn pair_sum_by_first(
    len: usize,
    left: &[u64],
    right: &[u64],
    weight: &dyn Fn(usize, bool, bool) -> HDPoly,
) -> [HDPoly; 4] {
    assert!(len >= 1);
    let bit = len - 1;
    let l = split(left, bit);
    let r = split(right, bit);
    let mut out: [HDPoly; 4] = Default::default();
    for i in 0..2 {
        for j in 0..2 {
            if !l[i].is_empty() && !r[j].is_empty() {
                out[i * 2 + j] = pair_sum_from(1, len, l[i], r[j], weight);
            }
        }
    }
    out
}
