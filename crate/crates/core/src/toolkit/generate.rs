//! Seeded random instances, optionally with a planted solution.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::format::Instance;
use crate::model::{Clause, Formula, Literal, Var};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("need at least 3 variables, got {0}")]
    TooFewVars(u32),
    #[error("need at least 1 clause")]
    NoClauses,
}

/// `m` clauses over three distinct variables each. With `planted`, a hidden
/// assignment is drawn first and every clause has exactly one true literal
/// under it.
pub fn generate(n: u32, m: usize, seed: u64, planted: bool) -> Result<Instance, GenerateError> {
    if n < 3 {
        return Err(GenerateError::TooFewVars(n));
    }
    if m == 0 {
        return Err(GenerateError::NoClauses);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden: Vec<bool> = if planted {
        (0..n).map(|_| rng.gen()).collect()
    } else {
        Vec::new()
    };
    let clauses = (0..m)
        .map(|_| {
            let vars: Vec<Var> = sample(&mut rng, n as usize, 3)
                .into_iter()
                .map(|i| i as Var + 1)
                .collect();
            let lits = if planted {
                let winner = rng.gen_range(0..3);
                vars.iter()
                    .enumerate()
                    .map(|(k, &v)| {
                        // Literal value = hidden value XOR neg.
                        let neg = hidden[v as usize - 1] ^ (k == winner);
                        Literal::Var { var: v, neg }
                    })
                    .collect()
            } else {
                vars.iter()
                    .map(|&v| Literal::Var {
                        var: v,
                        neg: rng.gen(),
                    })
                    .collect()
            };
            Clause::new(lits)
        })
        .collect();
    let mut comments = vec![format!(
        "generated n={n} m={m} seed={seed} planted={planted}"
    )];
    if planted {
        let bits: String = hidden.iter().map(|&b| if b { '1' } else { '0' }).collect();
        comments.push(format!("hidden {bits}"));
    }
    Ok(Instance {
        comments,
        formula: Formula::new(n, clauses),
    })
}
