//! Canonical forms and keys under the equivalence group.
//!
//! Two matrices are equivalent when one maps to the other by permuting rows,
//! permuting columns, and renaming vector variables per column, where a
//! renaming must respect the involution (if `x` becomes `y` then `x'` becomes
//! `y'`; a renaming may also swap a pair, sending `x` to `y'`).
//!
//! The canonical key of a matrix is the lexicographically smallest row-major
//! serialization achievable by any group element. Renamings never have to be
//! searched: once a row order and column order are fixed, the smallest
//! serialization renames each letter, at its first occurrence in scan order,
//! to the next rank in appearance order with the first occurrence designated
//! unprimed. The search is therefore a backtracking minimization over column
//! permutations (outer loop) and row orders (depth-first with per-depth
//! minimal-tie expansion), pruned against the best serialization found so
//! far.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{Symbol, VarMatrix, MAX_LETTERS};

/// Complete invariant of an equivalence class.
///
/// Bytes are `[m, n]` followed by the canonical row-major serialization
/// (`rank*2 + primed` per entry). Displays as lowercase hex.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::invalid(format!("bad key hex: {e}")))?;
        if bytes.len() < 2 {
            return Err(Error::invalid("key too short"));
        }
        Ok(CanonicalKey(bytes))
    }

    /// The canonical representative encoded by this key.
    pub fn to_matrix(&self) -> VarMatrix {
        let m = self.0[0] as usize;
        let n = self.0[1] as usize;
        let entries = self.0[2..]
            .iter()
            .map(|&b| Symbol::new(b / 2, b % 2 == 1))
            .collect();
        VarMatrix::from_parts(m, n, entries)
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for CanonicalKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for CanonicalKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        CanonicalKey::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// A witnessing group element.
///
/// Output row `i` is input row `row_perm[i]`; output column `j` is input
/// column `col_perm[j]`; `renames[c]` maps each letter of input column `c`
/// (given unprimed) to its new symbol, with the partner following by the
/// involution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transform {
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
    pub renames: Vec<Vec<(Symbol, Symbol)>>,
}

/// Apply a group element to a matrix.
pub fn apply_transform(x: &VarMatrix, t: &Transform) -> Result<VarMatrix> {
    let (m, n) = (x.m(), x.n());
    if t.row_perm.len() != m || !is_permutation(&t.row_perm) {
        return Err(Error::invalid("row_perm is not a permutation of the rows"));
    }
    if t.col_perm.len() != n || !is_permutation(&t.col_perm) {
        return Err(Error::invalid(
            "col_perm is not a permutation of the columns",
        ));
    }
    if t.renames.len() != n {
        return Err(Error::invalid("renames must have one table per column"));
    }
    // Letter-indexed lookup per original column.
    let mut maps: Vec<[Option<Symbol>; MAX_LETTERS as usize]> =
        vec![[None; MAX_LETTERS as usize]; n];
    for (c, table) in t.renames.iter().enumerate() {
        for &(from, to) in table {
            if from.primed {
                return Err(Error::invalid(
                    "rename sources must be given in unprimed form",
                ));
            }
            let slot = &mut maps[c][from.letter as usize];
            if slot.is_some() {
                return Err(Error::invalid(format!(
                    "duplicate rename for letter '{}' in column {}",
                    from,
                    c + 1
                )));
            }
            *slot = Some(to);
        }
    }
    let mut rows = Vec::with_capacity(m);
    for &src_row in &t.row_perm {
        let mut row = Vec::with_capacity(n);
        for &src_col in &t.col_perm {
            let s = x.get(src_row, src_col);
            let mapped = maps[src_col][s.letter as usize].ok_or_else(|| {
                Error::invalid(format!(
                    "no rename for letter '{}' in column {}",
                    Symbol::new(s.letter, false),
                    src_col + 1
                ))
            })?;
            row.push(if s.primed { mapped.partner() } else { mapped });
        }
        rows.push(row);
    }
    VarMatrix::from_rows(rows)
}

fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter().all(|&p| {
        if p < perm.len() && !seen[p] {
            seen[p] = true;
            true
        } else {
            false
        }
    })
}

/// The canonical key of the equivalence class of `x`.
pub fn canonical_key(x: &VarMatrix) -> CanonicalKey {
    let mut engine = Engine::new(x, Mode::Minimize);
    engine.run();
    let mut bytes = vec![x.m() as u8, x.n() as u8];
    bytes.extend(engine.best.expect("minimization always finds a serialization"));
    CanonicalKey(bytes)
}

/// The canonical representative together with a witnessing transformation.
///
/// The witness reproduces the key exactly:
/// `apply_transform(x, &t).plain_bytes() == canonical_key(x).as_bytes()`.
pub fn canonical_form(x: &VarMatrix) -> (VarMatrix, Transform) {
    let mut engine = Engine::new(x, Mode::Minimize);
    engine.run();
    let key = {
        let mut bytes = vec![x.m() as u8, x.n() as u8];
        bytes.extend(engine.best.clone().unwrap());
        CanonicalKey(bytes)
    };
    let (row_perm, col_perm) = engine.best_witness.expect("witness recorded at minimum");

    // Replay the canonical scan to collect the letter renames.
    let n = x.n();
    let mut renames: Vec<Vec<(Symbol, Symbol)>> = vec![Vec::new(); n];
    let mut assigned: Vec<[bool; MAX_LETTERS as usize]> = vec![[false; MAX_LETTERS as usize]; n];
    let mut next_rank = vec![0u8; n];
    for &i in &row_perm {
        for &c in &col_perm {
            let s = x.get(i, c);
            if !assigned[c][s.letter as usize] {
                assigned[c][s.letter as usize] = true;
                // First occurrence becomes the next rank, designated unprimed:
                // the unprimed source letter maps to (rank, flip) where flip
                // is the primedness of this first occurrence.
                renames[c].push((
                    Symbol::new(s.letter, false),
                    Symbol::new(next_rank[c], s.primed),
                ));
                next_rank[c] += 1;
            }
        }
    }
    let transform = Transform {
        row_perm,
        col_perm,
        renames,
    };
    (key.to_matrix(), transform)
}

/// Does the identity transformation already serialize `x` minimally?
///
/// Used by the orderly enumeration: a matrix is accepted only when it is the
/// canonical representative of its own class.
pub fn is_identity_canonical(x: &VarMatrix) -> bool {
    let body = x.plain_bytes()[2..].to_vec();
    let mut engine = Engine::new(x, Mode::Disprove(body));
    engine.run();
    !engine.found_smaller
}

/// Class equality via canonical keys, with cheap invariant pre-checks.
pub fn are_equivalent(a: &VarMatrix, b: &VarMatrix) -> bool {
    if a.m() != b.m() || a.n() != b.n() {
        return false;
    }
    let mut nu_a = a.nu_vec();
    let mut nu_b = b.nu_vec();
    nu_a.sort_unstable();
    nu_b.sort_unstable();
    if nu_a != nu_b {
        return false;
    }
    canonical_key(a) == canonical_key(b)
}

enum Mode {
    /// Find the global minimum serialization (and a witness).
    Minimize,
    /// Only decide whether anything beats the given serialization.
    Disprove(Vec<u8>),
}

struct Engine<'a> {
    x: &'a VarMatrix,
    m: usize,
    n: usize,
    mode_disprove: bool,
    best: Option<Vec<u8>>,
    best_witness: Option<(Vec<usize>, Vec<usize>)>,
    found_smaller: bool,
    // Scratch, reset per column permutation.
    rename: Vec<[Option<(u8, bool)>; MAX_LETTERS as usize]>,
    next_rank: Vec<u8>,
    rows_chosen: Vec<usize>,
    used: u32,
    bytes: Vec<u8>,
}

impl<'a> Engine<'a> {
    fn new(x: &'a VarMatrix, mode: Mode) -> Self {
        let (m, n) = (x.m(), x.n());
        let (best, mode_disprove) = match mode {
            Mode::Minimize => (None, false),
            Mode::Disprove(reference) => (Some(reference), true),
        };
        Engine {
            x,
            m,
            n,
            mode_disprove,
            best,
            best_witness: None,
            found_smaller: false,
            rename: vec![[None; MAX_LETTERS as usize]; n],
            next_rank: vec![0; n],
            rows_chosen: Vec::with_capacity(m),
            used: 0,
            bytes: Vec::with_capacity(m * n),
        }
    }

    fn run(&mut self) {
        let cols: Vec<usize> = (0..self.n).collect();
        for col_perm in cols.iter().copied().permutations(self.n) {
            self.rename.iter_mut().for_each(|r| r.fill(None));
            self.next_rank.fill(0);
            self.rows_chosen.clear();
            self.used = 0;
            self.bytes.clear();
            self.dfs(&col_perm);
            if self.found_smaller && self.mode_disprove {
                return;
            }
        }
    }

    /// Serialize row `r` under the current rename state without mutating it.
    ///
    /// Each column contributes exactly one symbol per row, so a letter unseen
    /// so far is necessarily a first occurrence here: it would take the next
    /// rank with this occurrence designated unprimed, i.e. byte `rank * 2`.
    fn row_bytes(&self, r: usize, col_perm: &[usize], out: &mut Vec<u8>) {
        out.clear();
        for &c in col_perm {
            let s = self.x.get(r, c);
            match self.rename[c][s.letter as usize] {
                Some((rank, flip)) => out.push(rank * 2 + (s.primed ^ flip) as u8),
                None => out.push(self.next_rank[c] * 2),
            }
        }
    }

    fn dfs(&mut self, col_perm: &[usize]) {
        if self.mode_disprove && self.found_smaller {
            return;
        }
        let depth = self.rows_chosen.len();
        // Prefix pruning against the best serialization so far.
        if let Some(best) = &self.best {
            let len = self.bytes.len();
            match self.bytes.as_slice().cmp(&best[..len]) {
                std::cmp::Ordering::Greater => return,
                std::cmp::Ordering::Less | std::cmp::Ordering::Equal => {}
            }
        }
        if depth == self.m {
            let better = match &self.best {
                None => true,
                Some(best) => self.bytes.as_slice() < best.as_slice(),
            };
            if better {
                if self.mode_disprove {
                    self.found_smaller = true;
                    return;
                }
                self.best = Some(self.bytes.clone());
                self.best_witness = Some((self.rows_chosen.clone(), col_perm.to_vec()));
            }
            return;
        }

        // Minimal candidate rows at this depth (ties by serialized bytes).
        let mut min_bytes: Option<Vec<u8>> = None;
        let mut ties: Vec<usize> = Vec::new();
        let mut scratch = Vec::with_capacity(self.n);
        for r in 0..self.m {
            if self.used & (1 << r) != 0 {
                continue;
            }
            self.row_bytes(r, col_perm, &mut scratch);
            match &min_bytes {
                None => {
                    min_bytes = Some(scratch.clone());
                    ties.push(r);
                }
                Some(cur) => match scratch.cmp(cur) {
                    std::cmp::Ordering::Less => {
                        min_bytes = Some(scratch.clone());
                        ties.clear();
                        ties.push(r);
                    }
                    std::cmp::Ordering::Equal => ties.push(r),
                    std::cmp::Ordering::Greater => {}
                },
            }
        }
        let min_bytes = min_bytes.expect("at least one unused row");

        for r in ties {
            // Commit this row: extend bytes and assign first-occurrence ranks.
            let undo_len = self.bytes.len();
            let mut undo_assign: Vec<(usize, u8)> = Vec::new();
            for &c in col_perm {
                let s = self.x.get(r, c);
                if self.rename[c][s.letter as usize].is_none() {
                    self.rename[c][s.letter as usize] = Some((self.next_rank[c], s.primed));
                    self.next_rank[c] += 1;
                    undo_assign.push((c, s.letter));
                }
            }
            self.bytes.extend_from_slice(&min_bytes);
            self.rows_chosen.push(r);
            self.used |= 1 << r;

            self.dfs(col_perm);

            self.used &= !(1 << r);
            self.rows_chosen.pop();
            self.bytes.truncate(undo_len);
            for (c, l) in undo_assign {
                self.rename[c][l as usize] = None;
                self.next_rank[c] -= 1;
            }
        }
    }
}
