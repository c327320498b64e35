//! Extension search: the unextendibility test.
//!
//! A row `r` is orthogonal to a matrix `X` when it is orthogonal to every row
//! of `X`. The value placed in column `j` of `r` can only create
//! orthogonality with the rows holding its perpendicular partner, so the
//! useful candidate values in column `j` are the partners of the symbols
//! occurring there, plus one fresh letter (which creates no orthogonality but
//! fills a column that is not needed for covering). The search is an exact
//! cover over row bitmasks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Symbol, VarMatrix, MAX_ROWS};

/// A row witnessing that a matrix is extendible.
///
/// `symbols[j]` is the value placed in column `j`; a letter index not present
/// in that column of the matrix denotes a fresh variable. `covered[j]` is the
/// bitmask of rows whose orthogonality to the witness is established in
/// column `j` (empty for fresh letters).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionWitness {
    pub symbols: Vec<Symbol>,
    pub covered: Vec<u32>,
}

impl ExtensionWitness {
    /// Space-separated human form, e.g. `a c' e`.
    pub fn pretty(&self) -> String {
        self.symbols
            .iter()
            .map(|s| s.pretty())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Search for a row orthogonal to all rows of `x`.
///
/// Requires `x` to be orthogonal (usage error otherwise). Returns the first
/// witness in deterministic order — columns left to right, candidate values
/// by `(letter, primed)` with the fresh letter last — or `None` when `x` is
/// unextendible.
pub fn find_extension(x: &VarMatrix) -> Result<Option<ExtensionWitness>> {
    x.check_orthogonal()?;
    let m = x.m();
    if m > MAX_ROWS {
        return Err(Error::invalid(format!(
            "extension search supports at most {MAX_ROWS} rows, got {m}"
        )));
    }
    let n = x.n();
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };

    // Candidate values per column with the rows they cover.
    let mut candidates: Vec<Vec<(Symbol, u32)>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut col: Vec<(Symbol, u32)> = Vec::new();
        for l in x.column_letters(j) {
            for primed in [false, true] {
                let value = Symbol::new(l, primed);
                let mut covers = 0u32;
                for i in 0..m {
                    if x.get(i, j) == value.partner() {
                        covers |= 1 << i;
                    }
                }
                if covers != 0 {
                    col.push((value, covers));
                }
            }
        }
        // One fresh letter; covers nothing.
        col.push((Symbol::new(x.fresh_letter(j)?, false), 0));
        candidates.push(col);
    }

    // Union of covers still reachable from column j onward, for pruning.
    let mut reachable = vec![0u32; n + 1];
    for j in (0..n).rev() {
        let any: u32 = candidates[j].iter().fold(0, |acc, &(_, c)| acc | c);
        reachable[j] = reachable[j + 1] | any;
    }

    let mut chosen: Vec<(Symbol, u32)> = Vec::with_capacity(n);
    if search(&candidates, &reachable, full, 0, 0, &mut chosen) {
        let (symbols, covered) = chosen.into_iter().unzip();
        Ok(Some(ExtensionWitness { symbols, covered }))
    } else {
        Ok(None)
    }
}

fn search(
    candidates: &[Vec<(Symbol, u32)>],
    reachable: &[u32],
    full: u32,
    j: usize,
    covered: u32,
    chosen: &mut Vec<(Symbol, u32)>,
) -> bool {
    if j == candidates.len() {
        return covered == full;
    }
    if covered | reachable[j] != full {
        return false;
    }
    for &(value, covers) in &candidates[j] {
        chosen.push((value, covers));
        if search(candidates, reachable, full, j + 1, covered | covers, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Is `x` an unextendible orthogonal matrix?
///
/// Usage error when `x` is not orthogonal.
pub fn is_uom(x: &VarMatrix) -> Result<bool> {
    Ok(find_extension(x)?.is_none())
}
