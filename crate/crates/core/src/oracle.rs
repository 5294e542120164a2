//! Brute-force reference semantics for formulas and for intermediate states.
//!
//! Nothing here shares code with the solver's enumeration paths; these
//! functions exist to check the solver.

use num_bigint::BigUint;
use thiserror::Error;

use crate::model::{Clause, Formula, Literal, PairState, Var};
use crate::poly::HDPoly;

/// Default largest formula the oracle enumerates.
pub const DEFAULT_FORMULA_LIMIT: u32 = 24;
/// Default largest active set `state_eval` enumerates.
pub const DEFAULT_STATE_LIMIT: usize = 12;
/// Hard cap: assignments are stored as 64-bit masks.
pub const MAX_ENUMERABLE_VARS: u32 = 63;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{vars} variables exceed the brute-force limit of {limit}")]
    LimitExceeded { vars: u64, limit: u64 },
}

/// All satisfying assignments, as bitmasks with bit `v-1` holding `x_v`.
fn solution_masks(f: &Formula, limit: u32) -> Result<Vec<u64>, OracleError> {
    let limit = limit.min(MAX_ENUMERABLE_VARS);
    if f.n_vars > limit {
        return Err(OracleError::LimitExceeded {
            vars: f.n_vars.into(),
            limit: limit.into(),
        });
    }
    let holds = |c: &Clause, mask: u64| {
        c.lits()
            .iter()
            .filter(|l| l.eval(|v| mask >> (v - 1) & 1 == 1))
            .count()
            == 1
    };
    Ok((0..1u64 << f.n_vars)
        .filter(|&mask| f.clauses.iter().all(|c| holds(c, mask)))
        .collect())
}

/// Every solution of `f` as a value vector indexed from variable 1
/// (position 0 is `x1`). Refuses formulas above [`DEFAULT_FORMULA_LIMIT`].
pub fn enumerate_solutions(f: &Formula) -> Result<Vec<Vec<bool>>, OracleError> {
    enumerate_solutions_with_limit(f, DEFAULT_FORMULA_LIMIT)
}

pub fn enumerate_solutions_with_limit(
    f: &Formula,
    limit: u32,
) -> Result<Vec<Vec<bool>>, OracleError> {
    Ok(solution_masks(f, limit)?
        .into_iter()
        .map(|m| (0..f.n_vars).map(|b| m >> b & 1 == 1).collect())
        .collect())
}

/// The Hamming-distance polynomial by squaring the solution list.
pub fn hd_oracle(f: &Formula) -> Result<HDPoly, OracleError> {
    hd_oracle_with_limit(f, DEFAULT_FORMULA_LIMIT)
}

pub fn hd_oracle_with_limit(f: &Formula, limit: u32) -> Result<HDPoly, OracleError> {
    let sols = solution_masks(f, limit)?;
    let mut counts = vec![0u64; f.n_vars as usize + 1];
    for &a in &sols {
        for &b in &sols {
            counts[(a ^ b).count_ones() as usize] += 1;
        }
    }
    Ok(HDPoly::from_terms(
        counts
            .into_iter()
            .enumerate()
            .map(|(k, c)| (k as u32, BigUint::from(c))),
    ))
}

/// Direct evaluation of the value a state stands for:
/// `p_main × Σ_{(β1,β2)} Π_{x∈V} p[x][β1(x)][β2(x)]`.
pub fn state_eval(st: &PairState) -> Result<HDPoly, OracleError> {
    state_eval_with_limit(st, DEFAULT_STATE_LIMIT)
}

pub fn state_eval_with_limit(st: &PairState, limit: usize) -> Result<HDPoly, OracleError> {
    let vars: Vec<Var> = st.active.iter().copied().collect();
    if vars.len() > limit.min(MAX_ENUMERABLE_VARS as usize) {
        return Err(OracleError::LimitExceeded {
            vars: vars.len() as u64,
            limit: limit as u64,
        });
    }
    let pos = |x: Var| {
        vars.binary_search(&x)
            .unwrap_or_else(|_| panic!("clause variable x{x} is not active"))
    };
    let side_solutions = |side: usize| -> Vec<u64> {
        (0..1u64 << vars.len())
            .filter(|&mask| {
                let value = |x: Var| mask >> pos(x) & 1 == 1;
                st.s[side].iter().all(|(x, b)| {
                    // Determinations of inactive variables do not constrain V.
                    vars.binary_search(&x).is_err() || value(x) == b
                }) && st.phi[side]
                    .iter()
                    .all(|c| c.lits().iter().filter(|l: &&Literal| l.eval(value)).count() == 1)
            })
            .collect()
    };
    let left = side_solutions(0);
    let right = side_solutions(1);
    let mut total = HDPoly::zero();
    for &a in &left {
        for &b in &right {
            let mut term = HDPoly::one();
            for (k, &x) in vars.iter().enumerate() {
                term = &term * st.weights.get(x, a >> k & 1 == 1, b >> k & 1 == 1);
            }
            total += term;
        }
    }
    Ok(&st.p_main * &total)
}
