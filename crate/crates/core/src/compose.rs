//! Block composition of matrices and reducibility factorization.
//!
//! The composite of a head `A` (r rows, s columns) with blocks `B_1..B_r`
//! stacks, for each `k`, `m_k` copies of row `k` of `A` beside the rows of
//! `B_k`. The composite is unextendible exactly when the head and every block
//! are; whether it is maximal or minimal in the identification order is
//! decided by the letter-sharing criteria implemented here.
//!
//! Blocks live in the composite's trailing columns, so all blocks share those
//! columns' letter namespaces: equal letters in the same block-column of two
//! blocks denote the same vector variable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Symbol, VarMatrix};
use crate::order::{down_neighbors, up_neighbors};
use crate::unextend::is_uom;

/// A matrix written as head-with-blocks, as produced by [`factor`] or built
/// directly for [`compose`].
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    /// The r×s head; row `k` is repeated over block `k`.
    pub head: VarMatrix,
    /// One block per head row, all of equal width.
    pub blocks: Vec<VarMatrix>,
    /// Source row of each composite row: composite row `t` (head column
    /// leading) came from row `row_perm[t]` of the factored matrix. Identity
    /// for hand-built decompositions.
    pub row_perm: Vec<usize>,
}

impl Decomposition {
    /// Row counts of the blocks (the multiplicities m_1..m_r).
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(VarMatrix::m).collect()
    }

    /// Rebuild the composite matrix.
    pub fn compose(&self) -> Result<VarMatrix> {
        compose(&self.head, &self.blocks)
    }
}

/// Stack the blocks beside repeated head rows: row `k` of the head is
/// repeated once per row of block `k`, followed by that block row.
pub fn compose(head: &VarMatrix, blocks: &[VarMatrix]) -> Result<VarMatrix> {
    if blocks.len() != head.m() {
        return Err(Error::invalid(format!(
            "need exactly one block per head row: {} rows, {} blocks",
            head.m(),
            blocks.len()
        )));
    }
    let width = blocks[0].n();
    if blocks.iter().any(|b| b.n() != width) {
        return Err(Error::invalid("all blocks must have the same width"));
    }
    let mut rows = Vec::new();
    for (k, block) in blocks.iter().enumerate() {
        for block_row in block.rows() {
            let mut row = head.row(k).to_vec();
            row.extend_from_slice(block_row);
            rows.push(row);
        }
    }
    VarMatrix::from_rows(rows)
}

/// Factor a reducible matrix along its leftmost single-letter column.
///
/// The head is the restriction to that column — `[x; x']` when both signs
/// occur, a single row otherwise — with rows grouped unprimed-first, and the
/// blocks are the groups' restrictions to the remaining columns.
/// `None` when every column carries at least two letters, or when there is
/// only one column (nothing remains to form blocks).
pub fn factor(x: &VarMatrix) -> Option<Decomposition> {
    if x.n() == 1 {
        return None;
    }
    let column = (0..x.n()).find(|&j| x.nu(j) == 1)?;
    let letter = x.column_letters(column).next().expect("column is nonempty");

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut head_rows: Vec<Vec<Symbol>> = Vec::new();
    for primed in [false, true] {
        let members: Vec<usize> = (0..x.m())
            .filter(|&i| x.get(i, column).primed == primed)
            .collect();
        if !members.is_empty() {
            head_rows.push(vec![Symbol::new(letter, primed)]);
            groups.push(members);
        }
    }

    let restrict = |rows: &[usize]| -> VarMatrix {
        let body = rows
            .iter()
            .map(|&i| {
                x.row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != column)
                    .map(|(_, &s)| s)
                    .collect()
            })
            .collect();
        VarMatrix::from_rows(body).expect("restriction of a valid matrix is valid")
    };

    let blocks: Vec<VarMatrix> = groups.iter().map(|g| restrict(g)).collect();
    let row_perm: Vec<usize> = groups.into_iter().flatten().collect();
    let head = VarMatrix::from_rows(head_rows).expect("head of a valid matrix is valid");
    Some(Decomposition {
        head,
        blocks,
        row_perm,
    })
}

/// Is the composite of an unextendible decomposition maximal?
///
/// Exactly when the head is maximal, every block is maximal, and no two
/// blocks share a vector variable (their letter sets are disjoint in every
/// block-column).
pub fn decomposable_is_maximal(d: &Decomposition) -> Result<bool> {
    require_uom_parts(d)?;
    if !up_neighbors(&d.head)?.is_empty() {
        return Ok(false);
    }
    for block in &d.blocks {
        if !up_neighbors(block)?.is_empty() {
            return Ok(false);
        }
    }
    let width = d.blocks[0].n();
    for j in 0..width {
        let mut seen = 0u32;
        for block in &d.blocks {
            let mask = block.letter_mask(j);
            if seen & mask != 0 {
                return Ok(false);
            }
            seen |= mask;
        }
    }
    Ok(true)
}

/// Is the composite of an unextendible decomposition minimal?
///
/// Exactly when the head is minimal, every block is minimal, and in each
/// block-column there is a single block already containing every letter that
/// occurs there in any block.
pub fn decomposable_is_minimal(d: &Decomposition) -> Result<bool> {
    require_uom_parts(d)?;
    if !down_neighbors(&d.head)?.is_empty() {
        return Ok(false);
    }
    for block in &d.blocks {
        if !down_neighbors(block)?.is_empty() {
            return Ok(false);
        }
    }
    let width = d.blocks[0].n();
    for j in 0..width {
        let union = d
            .blocks
            .iter()
            .fold(0u32, |acc, b| acc | b.letter_mask(j));
        if !d.blocks.iter().any(|b| b.letter_mask(j) == union) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn require_uom_parts(d: &Decomposition) -> Result<()> {
    if d.blocks.is_empty() {
        return Err(Error::invalid("decomposition has no blocks"));
    }
    if !is_uom(&d.head)? {
        return Err(Error::NotUnextendible);
    }
    for block in &d.blocks {
        if !is_uom(block)? {
            return Err(Error::NotUnextendible);
        }
    }
    Ok(())
}
