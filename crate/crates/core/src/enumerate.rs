//! Orderly, isomorph-free enumeration of UOM equivalence classes for small
//! shapes.
//!
//! The search grows matrices row by row inside the canonical-representative
//! tree: a partial matrix is extended only when it is itself the canonical
//! representative of its equivalence class. Because the canonical form is the
//! lexicographically minimal row-major serialization, deleting the last row
//! of a canonical matrix leaves a canonical matrix, so every class of
//! pairwise-orthogonal matrices is visited exactly once and no deduplication
//! is needed. Full-height leaves that pass the unextendibility test are the
//! UOM classes.

use serde::Serialize;

use crate::equiv::{canonical_key, is_identity_canonical, CanonicalKey};
use crate::error::{Error, Result};
use crate::matrix::{rows_orthogonal, Symbol, VarMatrix};
use crate::unextend::is_uom;
use crate::util::par_map;

/// Default node budget for the exhaustive search. The largest supported
/// shape expands well under 200k prefixes, so this leaves generous headroom
/// while still halting a misconfigured run.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Outcome of a [`search`] run.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub m: usize,
    pub n: usize,
    /// Canonical keys of the UOM classes, sorted.
    pub classes: Vec<CanonicalKey>,
    /// Pairwise-orthogonal classes reaching full height (unextendible or not).
    pub orthogonal_classes: usize,
    /// Partial matrices expanded by the search.
    pub expanded: usize,
}

/// Serializable summary (keys rendered as hex).
#[derive(Debug, Clone, Serialize)]
pub struct EnumerationSummary {
    pub m: usize,
    pub n: usize,
    pub classes: Vec<String>,
    pub orthogonal_classes: usize,
    pub expanded: usize,
}

impl Enumeration {
    pub fn summary(&self) -> EnumerationSummary {
        EnumerationSummary {
            m: self.m,
            n: self.n,
            classes: self.classes.iter().map(|k| k.to_hex()).collect(),
            orthogonal_classes: self.orthogonal_classes,
            expanded: self.expanded,
        }
    }
}

fn check_shape(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::EmptyShape);
    }
    if m > 8 {
        return Err(Error::invalid(format!(
            "enumeration supports at most 8 rows, got {m}"
        )));
    }
    if m == 8 && n >= 4 {
        return Err(Error::invalid(
            "enumeration of 8-row matrices is limited to at most 3 columns",
        ));
    }
    Ok(())
}

/// All rows that can extend `p` while keeping it pairwise orthogonal and
/// possibly canonical: per column, every existing letter (either prime) or
/// the next fresh letter unprimed. A fresh primed letter or an
/// out-of-sequence letter can always be renamed downward, so such extensions
/// are never canonical and are not generated.
fn extensions(p: &VarMatrix) -> Vec<VarMatrix> {
    let n = p.n();
    let mut alphabet: Vec<Vec<Symbol>> = Vec::with_capacity(n);
    for j in 0..n {
        let fresh = p
            .fresh_letter(j)
            .expect("at most m distinct letters per column");
        let mut symbols = Vec::with_capacity(2 * fresh as usize + 1);
        for letter in 0..fresh {
            symbols.push(Symbol::new(letter, false));
            symbols.push(Symbol::new(letter, true));
        }
        symbols.push(Symbol::new(fresh, false));
        alphabet.push(symbols);
    }
    let mut out = Vec::new();
    let mut row: Vec<Symbol> = Vec::with_capacity(n);
    fill(p, &alphabet, &mut row, &mut out);
    out
}

fn fill(p: &VarMatrix, alphabet: &[Vec<Symbol>], row: &mut Vec<Symbol>, out: &mut Vec<VarMatrix>) {
    if row.len() == alphabet.len() {
        let orthogonal = p.rows().all(|r| {
            rows_orthogonal(r, row).expect("candidate rows have the matrix width")
        });
        if !orthogonal {
            return;
        }
        let child = p
            .append_row(row.clone())
            .expect("candidate rows have the matrix width");
        if is_identity_canonical(&child) {
            out.push(child);
        }
        return;
    }
    for &s in &alphabet[row.len()] {
        row.push(s);
        fill(p, alphabet, row, out);
        row.pop();
    }
}

/// Enumerate every UOM equivalence class of `m`-row, `n`-column matrices.
///
/// `budget` caps the number of partial matrices expanded; exceeding it is a
/// [`Error::BudgetExhausted`] with the progress so far, never a silent
/// truncation. The key list is complete, duplicate-free, and sorted, and is
/// identical across runs and thread counts.
pub fn enumerate_uom_classes(m: usize, n: usize, budget: usize) -> Result<Vec<CanonicalKey>> {
    Ok(search(m, n, budget)?.classes)
}

/// As [`enumerate_uom_classes`], returning search statistics as well.
pub fn search(m: usize, n: usize, budget: usize) -> Result<Enumeration> {
    check_shape(m, n)?;
    let first = VarMatrix::from_rows(vec![vec![Symbol::new(0, false); n]])
        .expect("one all-a row is a valid matrix");
    debug_assert!(is_identity_canonical(&first));
    let mut layer = vec![first];
    let mut expanded = 0usize;
    for _ in 1..m {
        if expanded + layer.len() > budget {
            return Err(Error::BudgetExhausted {
                budget: budget as u64,
                expanded: (expanded + layer.len()) as u64,
                found: 0,
            });
        }
        expanded += layer.len();
        layer = par_map(&layer, extensions).into_iter().flatten().collect();
    }
    let orthogonal_classes = layer.len();
    let verdicts = par_map(&layer, |leaf| {
        is_uom(leaf).expect("orthogonality is maintained by the search")
    });
    let mut classes: Vec<CanonicalKey> = layer
        .iter()
        .zip(verdicts)
        .filter(|(_, uom)| *uom)
        .map(|(leaf, _)| canonical_key(leaf))
        .collect();
    classes.sort();
    debug_assert!(classes.windows(2).all(|w| w[0] != w[1]));
    Ok(Enumeration {
        m,
        n,
        classes,
        orthogonal_classes,
        expanded,
    })
}
