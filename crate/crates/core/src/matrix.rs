//! Symbols, matrices over vector variables, and level statistics.
//!
//! A *symbol* is a vector variable `x` or its perpendicular companion `x'`,
//! scoped to one column: the same letter in different columns denotes
//! unrelated variables. The text form of a matrix is one whitespace-separated
//! token per row; character position within a token selects the column,
//! lowercase letters are unprimed variables and uppercase letters are their
//! primed companions (`aCe` reads as `a c' e`).

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Number of distinct letters representable per column (`a`..`z`).
pub const MAX_LETTERS: u8 = 26;

/// Maximum number of rows supported by the search kernels (row sets are
/// tracked in `u32` bitmasks).
pub const MAX_ROWS: usize = 32;

/// One entry of a matrix: a column-scoped letter plus a primed flag.
///
/// `Ord` sorts by letter first, unprimed before primed (`a < a' < b < b'`),
/// which is the candidate order used by the deterministic searches.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Symbol {
    pub letter: u8,
    pub primed: bool,
}

impl Symbol {
    pub fn new(letter: u8, primed: bool) -> Self {
        Symbol { letter, primed }
    }

    /// The perpendicular companion (`x` ↔ `x'`).
    pub fn partner(self) -> Self {
        Symbol {
            letter: self.letter,
            primed: !self.primed,
        }
    }

    /// Parse from the one-character text form.
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a'..='z' => Some(Symbol::new(c as u8 - b'a', false)),
            'A'..='Z' => Some(Symbol::new(c as u8 - b'A', true)),
            _ => None,
        }
    }

    /// The one-character text form (`c'` prints as `C`).
    pub fn to_char(self) -> char {
        let base = if self.primed { b'A' } else { b'a' };
        (base + self.letter) as char
    }

    /// Human-oriented form with an apostrophe for primed symbols (`c'`).
    pub fn pretty(self) -> String {
        let mut s = String::new();
        s.push((b'a' + self.letter) as char);
        if self.primed {
            s.push('\'');
        }
        s
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_char(self.to_char())
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let c = char::deserialize(deserializer)?;
        Symbol::from_char(c)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid symbol character '{c}'")))
    }
}

/// Are two rows of symbols orthogonal?
///
/// Two rows are orthogonal when some column holds a perpendicular pair
/// (`x` against `x'`). Rows of different lengths are a usage error.
pub fn rows_orthogonal(a: &[Symbol], b: &[Symbol]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::RowLengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).any(|(&x, &y)| x == y.partner()))
}

/// Per-column level statistics of a matrix.
///
/// `nu[j]` counts the distinct letters in column `j`, `level` is their sum,
/// and `mu[j]` is the largest multiplicity of any single symbol (primed and
/// unprimed counted separately) in column `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelProfile {
    pub nu: Vec<usize>,
    pub level: usize,
    pub mu: Vec<usize>,
}

/// A matrix over vector variables.
///
/// Entries are stored row-major. Letters are per-column indices into the
/// alphabet `a..z`; the set of letters used in a column may have gaps (parsing
/// maps characters to fixed indices, and block factorization keeps a shared
/// per-column pool), so `nu` counts the letters present rather than assuming
/// contiguity. Equality and hashing are literal (same entries in the same
/// places); class-level identity lives in [`crate::equiv`].
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VarMatrix {
    m: usize,
    n: usize,
    entries: Vec<Symbol>,
    /// Per-column bitmask of letters present (in either primed form).
    letters: Vec<u32>,
}

impl VarMatrix {
    /// Build a matrix from rows, validating shape and alphabet bounds.
    pub fn from_rows(rows: Vec<Vec<Symbol>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyShape);
        }
        let n = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::RaggedRow {
                    row: i,
                    len: row.len(),
                    expected: n,
                });
            }
        }
        let m = rows.len();
        let mut entries = Vec::with_capacity(m * n);
        for row in &rows {
            for &s in row {
                if s.letter >= MAX_LETTERS {
                    return Err(Error::invalid(format!(
                        "letter index {} out of range (max {})",
                        s.letter,
                        MAX_LETTERS - 1
                    )));
                }
                entries.push(s);
            }
        }
        Ok(Self::from_parts(m, n, entries))
    }

    pub(crate) fn from_parts(m: usize, n: usize, entries: Vec<Symbol>) -> Self {
        debug_assert_eq!(entries.len(), m * n);
        let mut letters = vec![0u32; n];
        for i in 0..m {
            for (j, mask) in letters.iter_mut().enumerate() {
                *mask |= 1 << entries[i * n + j].letter;
            }
        }
        VarMatrix {
            m,
            n,
            entries,
            letters,
        }
    }

    /// Parse the whitespace-separated token form.
    ///
    /// Errors carry 1-based line/column positions into the input text.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<Symbol>> = Vec::new();
        let mut width: Option<usize> = None;
        let mut tok_line = 0usize;
        let mut tok_col = 0usize;
        for (li, line) in text.lines().enumerate() {
            let mut col = 0usize;
            for tok in line.split_whitespace() {
                // Position of this token within the line (1-based).
                let start = line[col..].find(tok).map(|p| col + p).unwrap_or(col);
                col = start + tok.len();
                let mut row = Vec::with_capacity(tok.len());
                for (ci, c) in tok.chars().enumerate() {
                    match Symbol::from_char(c) {
                        Some(s) => row.push(s),
                        None => {
                            return Err(Error::Parse {
                                line: li + 1,
                                col: start + ci + 1,
                                reason: format!("invalid symbol character '{c}'"),
                            })
                        }
                    }
                }
                match width {
                    None => width = Some(row.len()),
                    Some(w) if w != row.len() => {
                        return Err(Error::Parse {
                            line: li + 1,
                            col: start + 1,
                            reason: format!(
                                "row has {} columns, expected {} (as in the first row)",
                                row.len(),
                                w
                            ),
                        })
                    }
                    _ => {}
                }
                tok_line = li + 1;
                tok_col = start + 1;
                rows.push(row);
            }
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 1,
                col: 1,
                reason: "no rows found".into(),
            });
        }
        let _ = (tok_line, tok_col);
        VarMatrix::from_rows(rows)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Symbol {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Symbol] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Overwrite one entry, keeping the per-column letter registry current.
    pub fn set(&mut self, i: usize, j: usize, s: Symbol) {
        debug_assert!(s.letter < MAX_LETTERS);
        self.entries[i * self.n + j] = s;
        self.letters[j] = (0..self.m)
            .map(|r| 1u32 << self.entries[r * self.n + j].letter)
            .fold(0, |acc, bit| acc | bit);
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Symbol]> {
        self.entries.chunks_exact(self.n)
    }

    /// Bitmask of letters present in column `j`.
    pub fn letter_mask(&self, j: usize) -> u32 {
        self.letters[j]
    }

    /// Letters present in column `j`, ascending.
    pub fn column_letters(&self, j: usize) -> impl Iterator<Item = u8> + '_ {
        let mask = self.letters[j];
        (0..MAX_LETTERS).filter(move |l| mask & (1 << l) != 0)
    }

    /// Smallest letter index not used in column `j`.
    pub fn fresh_letter(&self, j: usize) -> Result<u8> {
        (0..MAX_LETTERS)
            .find(|l| self.letters[j] & (1 << l) == 0)
            .ok_or_else(|| Error::invalid(format!("column {} has no free letters left", j + 1)))
    }

    /// Number of distinct letters in column `j`.
    pub fn nu(&self, j: usize) -> usize {
        self.letters[j].count_ones() as usize
    }

    pub fn nu_vec(&self) -> Vec<usize> {
        (0..self.n).map(|j| self.nu(j)).collect()
    }

    /// The level: sum of the per-column distinct-letter counts.
    pub fn level(&self) -> usize {
        (0..self.n).map(|j| self.nu(j)).sum()
    }

    /// Largest symbol multiplicity per column (primed/unprimed separate).
    pub fn mu_vec(&self) -> Vec<usize> {
        (0..self.n)
            .map(|j| {
                let mut counts = [0usize; 2 * MAX_LETTERS as usize];
                for i in 0..self.m {
                    let s = self.get(i, j);
                    counts[s.letter as usize * 2 + s.primed as usize] += 1;
                }
                counts.iter().copied().max().unwrap_or(0)
            })
            .collect()
    }

    pub fn profile(&self) -> LevelProfile {
        let nu = self.nu_vec();
        let level = nu.iter().sum();
        LevelProfile {
            nu,
            level,
            mu: self.mu_vec(),
        }
    }

    /// A column is balanced when every letter occurs exactly as often primed
    /// as unprimed; the matrix is balanced when all columns are.
    pub fn is_balanced(&self) -> bool {
        (0..self.n).all(|j| {
            let mut diff = [0isize; MAX_LETTERS as usize];
            for i in 0..self.m {
                let s = self.get(i, j);
                diff[s.letter as usize] += if s.primed { -1 } else { 1 };
            }
            diff.iter().all(|&d| d == 0)
        })
    }

    /// Reducible: some column uses a single letter.
    pub fn is_reducible(&self) -> bool {
        (0..self.n).any(|j| self.nu(j) == 1)
    }

    /// Are all row pairs orthogonal?
    pub fn is_orthogonal(&self) -> bool {
        self.check_orthogonal().is_ok()
    }

    /// As [`Self::is_orthogonal`], reporting the first offending pair.
    pub fn check_orthogonal(&self) -> Result<()> {
        for i in 0..self.m {
            for j in (i + 1)..self.m {
                if !rows_orthogonal(self.row(i), self.row(j))? {
                    return Err(Error::NotOrthogonal { i, j });
                }
            }
        }
        Ok(())
    }

    /// A copy with one extra row appended.
    pub fn append_row(&self, row: Vec<Symbol>) -> Result<Self> {
        if row.len() != self.n {
            return Err(Error::RaggedRow {
                row: self.m,
                len: row.len(),
                expected: self.n,
            });
        }
        for &s in &row {
            if s.letter >= MAX_LETTERS {
                return Err(Error::invalid(format!(
                    "letter index {} out of range",
                    s.letter
                )));
            }
        }
        let mut entries = self.entries.clone();
        entries.extend(row);
        Ok(Self::from_parts(self.m + 1, self.n, entries))
    }

    /// Literal serialization: `[m, n]` header plus one byte per entry in
    /// row-major order. Used as the reference string by the canonical-form
    /// machinery; only meaningful to compare between matrices of equal shape.
    pub fn plain_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 + self.m * self.n);
        out.push(self.m as u8);
        out.push(self.n as u8);
        for &s in &self.entries {
            out.push(s.letter * 2 + s.primed as u8);
        }
        out
    }
}

impl fmt::Display for VarMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            for &s in row {
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for VarMatrix {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        VarMatrix::parse(s)
    }
}

impl Serialize for VarMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for VarMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        VarMatrix::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mx(text: &str) -> VarMatrix {
        VarMatrix::parse(text).unwrap()
    }

    #[test]
    fn symbol_roundtrip_and_order() {
        let a = Symbol::from_char('a').unwrap();
        let ap = Symbol::from_char('A').unwrap();
        let b = Symbol::from_char('b').unwrap();
        assert_eq!(a.partner(), ap);
        assert_eq!(ap.partner(), a);
        assert_eq!(a.to_char(), 'a');
        assert_eq!(ap.to_char(), 'A');
        assert_eq!(ap.pretty(), "a'");
        assert!(a < ap && ap < b);
    }

    #[test]
    fn tile_matrix_profile() {
        // Four rows over two columns: level statistics nu=[1,2], mu=[2,1].
        let x = mx("ab aB Ac AC");
        assert_eq!(x.m(), 4);
        assert_eq!(x.n(), 2);
        let p = x.profile();
        assert_eq!(p.nu, vec![1, 2]);
        assert_eq!(p.level, 3);
        assert_eq!(p.mu, vec![2, 1]);
        assert!(x.is_orthogonal());
        assert!(x.is_balanced());
        assert!(x.is_reducible());
    }

    #[test]
    fn eight_row_profile() {
        let x = mx("acca aCac aaCC bAAA Abba ABab AaBB BAAA");
        assert_eq!(x.nu_vec(), vec![2, 3, 3, 3]);
        assert_eq!(x.level(), 11);
        assert!(x.is_orthogonal());
        assert!(!x.is_reducible());
    }

    #[test]
    fn wide_example_with_high_letters() {
        // Letters map to fixed indices, so x/y/z/w are valid entries and the
        // per-column letter sets are non-contiguous.
        let x = mx("xyzw Xbde aYDf AcZE aBdW XCDF");
        assert_eq!(x.m(), 6);
        assert_eq!(x.n(), 4);
        assert_eq!(x.nu_vec(), vec![2, 3, 2, 3]);
        assert!(x.is_orthogonal());
        assert_eq!(x.to_string(), "xyzw Xbde aYDf AcZE aBdW XCDF");
    }

    #[test]
    fn unbalanced_column() {
        let x = mx("a a A");
        assert!(!x.is_balanced());
        assert_eq!(x.mu_vec(), vec![2]);
        let y = mx("a A");
        assert!(y.is_balanced());
    }

    #[test]
    fn orthogonality_basics() {
        let a = [Symbol::new(0, false)];
        let ap = [Symbol::new(0, true)];
        assert!(rows_orthogonal(&a, &ap).unwrap());
        assert!(!rows_orthogonal(&a, &a).unwrap());
        let long = [Symbol::new(0, false), Symbol::new(1, false)];
        assert!(matches!(
            rows_orthogonal(&a, &long),
            Err(Error::RowLengthMismatch { left: 1, right: 2 })
        ));
        let bad = mx("ab ab");
        assert!(matches!(
            bad.check_orthogonal(),
            Err(Error::NotOrthogonal { i: 0, j: 1 })
        ));
    }

    #[test]
    fn parse_errors_carry_location() {
        match VarMatrix::parse("ab a?") {
            Err(Error::Parse { line, col, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(col, 5);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        match VarMatrix::parse("ab\nabc") {
            Err(Error::Parse { line, col, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(col, 1);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            VarMatrix::parse("  \n "),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn multiline_parse_matches_single_line() {
        assert_eq!(mx("ab aB\nAc AC"), mx("ab aB Ac AC"));
    }

    #[test]
    fn display_parse_roundtrip() {
        for text in ["a A", "ab aB Ac AC", "ace ADf bCF BdE", "xyzw Xbde aYDf AcZE aBdW XCDF"] {
            let x = mx(text);
            assert_eq!(VarMatrix::parse(&x.to_string()).unwrap(), x);
        }
    }

    #[test]
    fn append_and_fresh() {
        let x = mx("a A");
        assert_eq!(x.fresh_letter(0).unwrap(), 1);
        let y = x
            .append_row(vec![Symbol::new(1, false)])
            .unwrap();
        assert_eq!(y.m(), 3);
        assert_eq!(y.nu(0), 2);
    }

    #[test]
    fn serde_as_text() {
        let x = mx("ab aB Ac AC");
        let js = serde_json::to_string(&x).unwrap();
        assert_eq!(js, "\"ab aB Ac AC\"");
        let back: VarMatrix = serde_json::from_str(&js).unwrap();
        assert_eq!(back, x);
    }
}
