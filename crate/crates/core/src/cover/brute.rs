use super::{CoverProblem, CoverSolution, CoverStatus};
use crate::bits::BitSet;
use crate::{Error, Result};

/// Largest view count the exhaustive oracle accepts.
pub const BRUTE_FORCE_CAP: usize = 20;

/// Enumerates subsets by increasing size, each size in lexicographic order,
/// and returns the first feasible one.
pub fn brute_force_oracle(problem: &CoverProblem) -> Result<CoverSolution> {
    let n = problem.view_count();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::EnumerationCap { cap: BRUTE_FORCE_CAP, got: n });
    }
    let mut tried = 0u64;
    for k in 0..=n {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            tried += 1;
            let selected = BitSet::from_indices(n, combo.iter().copied());
            if problem.is_feasible(&selected) {
                return Ok(CoverSolution {
                    selected,
                    objective: k,
                    status: CoverStatus::Optimal,
                    bound: None,
                    nodes: tried,
                });
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    Ok(CoverSolution::infeasible(n, tried))
}

/// Advances `combo` to the next k-subset of `0..n` in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let Some(i) = (0..k).rev().find(|&i| combo[i] < n - k + i) else {
        return false;
    };
    combo[i] += 1;
    for j in i + 1..k {
        combo[j] = combo[j - 1] + 1;
    }
    true
}
