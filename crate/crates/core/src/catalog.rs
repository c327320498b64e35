//! Bundled reference tables of UOM equivalence classes and the arrows
//! between them, with parsers and self-verification.
//!
//! The tables cover the four row counts with nontrivial class structure on
//! four columns: all classes for 8, 9 and 10 rows, and the irreducible
//! classes for 12 rows. Classes are named `level_index` (e.g. `11_6`). Each
//! catalog line is `index tok1 tok2 ... [nu,...]` where row tokens spell one
//! letter per column (lowercase unprimed, uppercase primed) and the bracket
//! repeats the per-column count of independent variables. Each arrow line is
//! `src → t1,t2,... id1,id2,...`: all arrows out of one class, normally with
//! one witness identification per target, wrapped lines repeating the source
//! index.
//!
//! Verification re-derives everything the tables claim: every entry is an
//! unextendible orthogonal matrix with the stated letter counts, entries are
//! pairwise inequivalent, per-level class counts match the shipped structure
//! constants, every listed witness identification lands in the listed target
//! class, the listed arrows are exactly the computed ones (for the complete
//! tables), and the maximal/minimal classes and connected components match.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::equiv::{canonical_key, CanonicalKey};
use crate::error::{Error, Result};
use crate::matrix::{Symbol, VarMatrix};
use crate::order::{
    apply_identification, build_hasse, classify, down_neighbors, up_neighbors, Identification,
};
use crate::unextend::is_uom;
use crate::util::par_map;

/// Highest letter index the tables may use: `a` through `e`. Columns with
/// five independent variables need all five letters; anything beyond that
/// never occurs in a valid table line.
const MAX_TABLE_LETTER: u8 = 4;

/// One catalog line: a class representative with its position in the tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    /// Number of rows.
    pub m: usize,
    /// Level (sum of the per-column counts of independent variables).
    pub level: usize,
    /// 1-based index of the class within its level.
    pub index: usize,
    /// The representative matrix.
    pub matrix: VarMatrix,
    /// The per-column counts declared in the trailing bracket.
    pub declared_nu: Vec<usize>,
}

impl CatalogEntry {
    /// Class label in `level_index` form, e.g. `11_6`.
    pub fn label(&self) -> String {
        format!("{}_{}", self.level, self.index)
    }

    /// Render the entry in the table line format it was parsed from.
    pub fn to_line(&self) -> String {
        let mut s = self.index.to_string();
        for row in self.matrix.rows() {
            s.push(' ');
            for &sym in row {
                s.push(sym.to_char());
            }
        }
        s.push_str(" [");
        for (i, v) in self.declared_nu.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&v.to_string());
        }
        s.push(']');
        s
    }
}

/// One merged arrow-table row: all arrows out of a single source class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrowRecord {
    /// Number of rows of the matrices involved.
    pub m: usize,
    /// Source level; targets live one level below.
    pub level: usize,
    /// 1-based index of the source class within its level.
    pub source: usize,
    /// 1-based indices of the target classes on `level - 1`.
    pub targets: Vec<usize>,
    /// Witness identifications, normally one per target in the same order.
    pub idents: Vec<Identification>,
}

impl ArrowRecord {
    /// Whether the row lists exactly one witness identification per target.
    /// A mismatch is tolerated by the parser and flagged by the verifier,
    /// which then checks each witness against the whole target set.
    pub fn counts_match(&self) -> bool {
        self.targets.len() == self.idents.len()
    }
}

/// Parse a class label of the form `level_index`, e.g. `11_6`.
pub fn parse_label(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::invalid(format!("bad class label '{s}': expected level_index, e.g. 11_6"));
    let (l, k) = s.split_once('_').ok_or_else(bad)?;
    let level: usize = l.parse().map_err(|_| bad())?;
    let index: usize = k.parse().map_err(|_| bad())?;
    if index == 0 {
        return Err(bad());
    }
    Ok((level, index))
}

/// Split a line into (1-based character column, token) pairs.
fn tokens_with_cols(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None; // (char col, byte offset)
    let mut col = 0usize;
    for (byte, ch) in line.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some((c, b)) = start.take() {
                out.push((c, &line[b..byte]));
            }
        } else if start.is_none() {
            start = Some((col, byte));
        }
    }
    if let Some((c, b)) = start {
        out.push((c, &line[b..]));
    }
    out
}

fn parse_err(line: usize, col: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        reason: reason.into(),
    }
}

/// Parse catalog text: one class per line, indices starting at 1 and
/// consecutive, empty lines skipped.
pub fn parse_catalog(text: &str) -> Result<Vec<CatalogEntry>> {
    let mut entries: Vec<CatalogEntry> = Vec::new();
    for (lineno0, raw) in text.lines().enumerate() {
        let lineno = lineno0 + 1;
        let toks = tokens_with_cols(raw);
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 3 {
            return Err(parse_err(
                lineno,
                toks[0].0,
                "expected an index, row tokens and a trailing bracket like [2,3,3,3]",
            ));
        }
        let (icol, itok) = toks[0];
        let index: usize = itok
            .parse()
            .map_err(|_| parse_err(lineno, icol, format!("bad class index '{itok}'")))?;
        if index != entries.len() + 1 {
            return Err(parse_err(
                lineno,
                icol,
                format!("class index {index} out of order, expected {}", entries.len() + 1),
            ));
        }

        let (bcol, btok) = *toks.last().expect("len >= 3");
        let inner = btok
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| {
                parse_err(lineno, bcol, format!("expected a bracket like [2,3,3,3], found '{btok}'"))
            })?;
        let mut declared = Vec::new();
        for part in inner.split(',') {
            let v: usize = part
                .trim()
                .parse()
                .map_err(|_| parse_err(lineno, bcol, format!("bad bracket entry '{part}'")))?;
            declared.push(v);
        }

        let row_toks = &toks[1..toks.len() - 1];
        let n = row_toks[0].1.chars().count();
        let mut rows = Vec::with_capacity(row_toks.len());
        for &(tcol, tok) in row_toks {
            let len = tok.chars().count();
            if len != n {
                return Err(parse_err(
                    lineno,
                    tcol,
                    format!("row token '{tok}' has {len} letters, expected {n}"),
                ));
            }
            let mut row = Vec::with_capacity(n);
            for (k, ch) in tok.chars().enumerate() {
                let sym = Symbol::from_char(ch).ok_or_else(|| {
                    parse_err(lineno, tcol + k, format!("unknown character '{ch}' in row token"))
                })?;
                if sym.letter > MAX_TABLE_LETTER {
                    return Err(parse_err(
                        lineno,
                        tcol + k,
                        format!("unknown letter '{ch}': the table alphabet is a-e and A-E"),
                    ));
                }
                row.push(sym);
            }
            rows.push(row);
        }

        let matrix = VarMatrix::from_rows(rows)
            .map_err(|e| parse_err(lineno, toks[1].0, e.to_string()))?;
        if declared.len() != matrix.n() {
            return Err(parse_err(
                lineno,
                bcol,
                format!(
                    "bracket lists {} counts but the rows have {} columns",
                    declared.len(),
                    matrix.n()
                ),
            ));
        }
        entries.push(CatalogEntry {
            m: matrix.m(),
            level: matrix.level(),
            index,
            matrix,
            declared_nu: declared,
        });
    }
    Ok(entries)
}

/// Parse arrow-table text for sources on the given level. Lines share the
/// format `src → t1,t2,... id1,id2,...`; `->` is accepted for `→`. Adjacent
/// lines with the same source are wrapped rows and are merged into one
/// record. Stray commas are tolerated; empty lines are skipped.
///
/// The table text itself does not repeat `m` or the level (they are fixed by
/// the file the table ships in), so the caller supplies both.
pub fn parse_arrows(text: &str, m: usize, level: usize) -> Result<Vec<ArrowRecord>> {
    let mut records: Vec<ArrowRecord> = Vec::new();
    for (lineno0, raw) in text.lines().enumerate() {
        let lineno = lineno0 + 1;
        let toks = tokens_with_cols(raw);
        if toks.is_empty() {
            continue;
        }
        let (scol, stok) = toks[0];
        let source: usize = stok
            .parse()
            .map_err(|_| parse_err(lineno, scol, format!("bad source index '{stok}'")))?;
        match toks.get(1) {
            Some(&(_, "→")) | Some(&(_, "->")) => {}
            other => {
                let col = other.map_or(scol, |&(c, _)| c);
                return Err(parse_err(lineno, col, "expected '→' after the source index"));
            }
        }
        if toks.len() < 3 {
            return Err(parse_err(lineno, scol, "arrow line lists no targets"));
        }

        let mut targets = Vec::new();
        let mut idents = Vec::new();
        for &(ccol, chunk) in &toks[2..] {
            let mut at = ccol;
            for atom in chunk.split(',') {
                let width = atom.chars().count();
                if width > 0 {
                    if atom.contains('=') {
                        let id = Identification::from_str(atom)
                            .map_err(|e| parse_err(lineno, at, e.to_string()))?;
                        idents.push(id);
                    } else {
                        let t: usize = atom.parse().map_err(|_| {
                            parse_err(lineno, at, format!("bad target index '{atom}'"))
                        })?;
                        targets.push(t);
                    }
                }
                at += width + 1;
            }
        }

        match records.last_mut() {
            Some(last) if last.source == source => {
                last.targets.extend(targets);
                last.idents.extend(idents);
            }
            _ => records.push(ArrowRecord {
                m,
                level,
                source,
                targets,
                idents,
            }),
        }
    }
    Ok(records)
}

struct ShippedTables {
    m: usize,
    /// (level, file text), highest level first.
    catalog: &'static [(usize, &'static str)],
    /// (source level, file text), highest level first.
    arrows: &'static [(usize, &'static str)],
}

static SHIPPED: &[ShippedTables] = &[
    ShippedTables {
        m: 8,
        catalog: &[
            (13, include_str!("../data/uom_8_level13.txt")),
            (12, include_str!("../data/uom_8_level12.txt")),
            (11, include_str!("../data/uom_8_level11.txt")),
            (10, include_str!("../data/uom_8_level10.txt")),
            (9, include_str!("../data/uom_8_level9.txt")),
            (8, include_str!("../data/uom_8_level8.txt")),
            (7, include_str!("../data/uom_8_level7.txt")),
        ],
        arrows: &[
            (13, include_str!("../data/arrows_8_13.txt")),
            (12, include_str!("../data/arrows_8_12.txt")),
            (11, include_str!("../data/arrows_8_11.txt")),
            (10, include_str!("../data/arrows_8_10.txt")),
            (9, include_str!("../data/arrows_8_9.txt")),
            (8, include_str!("../data/arrows_8_8.txt")),
        ],
    },
    ShippedTables {
        m: 9,
        catalog: &[
            (10, include_str!("../data/uom_9_level10.txt")),
            (9, include_str!("../data/uom_9_level9.txt")),
            (8, include_str!("../data/uom_9_level8.txt")),
        ],
        arrows: &[
            (10, include_str!("../data/arrows_9_10.txt")),
            (9, include_str!("../data/arrows_9_9.txt")),
        ],
    },
    ShippedTables {
        m: 10,
        catalog: &[
            (11, include_str!("../data/uom_10_level11.txt")),
            (10, include_str!("../data/uom_10_level10.txt")),
            (9, include_str!("../data/uom_10_level9.txt")),
            (8, include_str!("../data/uom_10_level8.txt")),
        ],
        arrows: &[
            (11, include_str!("../data/arrows_10_11.txt")),
            (10, include_str!("../data/arrows_10_10.txt")),
            (9, include_str!("../data/arrows_10_9.txt")),
        ],
    },
    ShippedTables {
        m: 12,
        catalog: &[
            (12, include_str!("../data/uom_12_level12.txt")),
            (11, include_str!("../data/uom_12_level11.txt")),
            (10, include_str!("../data/uom_12_level10.txt")),
            (9, include_str!("../data/uom_12_level9.txt")),
            (8, include_str!("../data/uom_12_level8.txt")),
        ],
        arrows: &[
            (12, include_str!("../data/arrows_12_12.txt")),
            (11, include_str!("../data/arrows_12_11.txt")),
            (10, include_str!("../data/arrows_12_10.txt")),
            (9, include_str!("../data/arrows_12_9.txt")),
        ],
    },
];

fn shipped(m: usize) -> Result<&'static ShippedTables> {
    SHIPPED
        .iter()
        .find(|t| t.m == m)
        .ok_or_else(|| Error::invalid(format!("no bundled tables for m={m}; available: 8, 9, 10, 12")))
}

/// Row counts with bundled tables, ascending.
pub fn supported_m() -> Vec<usize> {
    SHIPPED.iter().map(|t| t.m).collect()
}

/// Whether the bundled tables for `m` cover all classes (true) or only the
/// irreducible ones (false, for m=12).
pub fn tables_are_complete(m: usize) -> bool {
    m != 12
}

fn load_file(dir: Option<&Path>, name: &str, embedded: &'static str) -> Result<Cow<'static, str>> {
    match dir {
        None => Ok(Cow::Borrowed(embedded)),
        Some(d) => {
            let path = d.join(name);
            std::fs::read_to_string(&path)
                .map(Cow::Owned)
                .map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })
        }
    }
}

fn in_file(name: &str, e: Error) -> Error {
    match e {
        Error::Parse { line, col, reason } => Error::Parse {
            line,
            col,
            reason: format!("{name}: {reason}"),
        },
        other => other,
    }
}

/// All catalog entries for `m`, highest level first, ascending index within
/// each level. When `data_dir` is given, files named `uom_{m}_level{l}.txt`
/// are read from it instead of the bundled copies.
pub fn catalog(m: usize, data_dir: Option<&Path>) -> Result<Vec<CatalogEntry>> {
    let tables = shipped(m)?;
    let mut out = Vec::new();
    for &(level, embedded) in tables.catalog {
        let name = format!("uom_{m}_level{level}.txt");
        let text = load_file(data_dir, &name, embedded)?;
        let entries = parse_catalog(&text).map_err(|e| in_file(&name, e))?;
        for e in &entries {
            if e.m != m || e.level != level {
                return Err(Error::Integrity(format!(
                    "{name} entry {}: {} rows on level {}, expected {} rows on level {}",
                    e.index, e.m, e.level, m, level
                )));
            }
        }
        out.extend(entries);
    }
    Ok(out)
}

/// All arrow records for `m`, highest source level first. When `data_dir` is
/// given, files named `arrows_{m}_{l}.txt` are read from it instead.
pub fn arrows(m: usize, data_dir: Option<&Path>) -> Result<Vec<ArrowRecord>> {
    let tables = shipped(m)?;
    let mut out = Vec::new();
    for &(level, embedded) in tables.arrows {
        let name = format!("arrows_{m}_{level}.txt");
        let text = load_file(data_dir, &name, embedded)?;
        out.extend(parse_arrows(&text, m, level).map_err(|e| in_file(&name, e))?);
    }
    Ok(out)
}

/// Look up a single class by level and index, loading only its level file.
pub fn catalog_entry(
    m: usize,
    level: usize,
    index: usize,
    data_dir: Option<&Path>,
) -> Result<CatalogEntry> {
    let tables = shipped(m)?;
    let &(_, embedded) = tables
        .catalog
        .iter()
        .find(|&&(l, _)| l == level)
        .ok_or_else(|| Error::invalid(format!("no classes on level {level} for m={m}")))?;
    let name = format!("uom_{m}_level{level}.txt");
    let text = load_file(data_dir, &name, embedded)?;
    let entries = parse_catalog(&text).map_err(|e| in_file(&name, e))?;
    entries
        .into_iter()
        .find(|e| e.index == index)
        .ok_or_else(|| Error::invalid(format!("no class {level}_{index} for m={m}")))
}

/// Structure constants the verifier checks the bundled tables against:
/// per-level class counts, maximal/minimal class labels, and connected
/// components of the arrow diagram.
pub mod reference {
    /// (level, class count) pairs, highest level first.
    pub fn level_counts(m: usize) -> Option<&'static [(usize, usize)]> {
        Some(match m {
            8 => &[(13, 1), (12, 1), (11, 6), (10, 29), (9, 46), (8, 43), (7, 18)],
            9 => &[(10, 1), (9, 4), (8, 6)],
            10 => &[(11, 2), (10, 17), (9, 37), (8, 24)],
            12 => &[(12, 2), (11, 18), (10, 51), (9, 64), (8, 26)],
            _ => return None,
        })
    }

    fn range(level: usize, lo: usize, hi: usize) -> impl Iterator<Item = String> {
        (lo..=hi).map(move |k| format!("{level}_{k}"))
    }

    /// Labels of the maximal classes. For m=12 these are the maximal classes
    /// among the irreducible ones (which are maximal outright, since a class
    /// above an irreducible class is irreducible).
    pub fn maximal(m: usize) -> Option<Vec<String>> {
        let mut v: Vec<String> = Vec::new();
        match m {
            8 => {
                v.push("13_1".into());
                v.push("11_6".into());
                v.extend(range(10, 17, 19));
                v.extend(range(10, 22, 29));
                v.push("9_46".into());
                v.push("8_24".into());
                v.push("8_30".into());
            }
            9 => v.extend(["10_1".into(), "9_1".into(), "9_2".into(), "8_6".into()]),
            10 => {
                v.extend(["11_1".into(), "11_2".into()]);
                v.extend(range(10, 8, 17));
                v.extend(["9_17".into(), "9_24".into()]);
            }
            12 => v.extend([
                "12_1".into(),
                "12_2".into(),
                "11_1".into(),
                "11_2".into(),
                "11_17".into(),
                "11_18".into(),
                "10_50".into(),
                "10_51".into(),
            ]),
            _ => return None,
        }
        Some(v)
    }

    /// Labels of the minimal classes. Not defined for m=12: the minimal
    /// classes there are all reducible and outside the bundled tables.
    pub fn minimal(m: usize) -> Option<Vec<String>> {
        let mut v: Vec<String> = Vec::new();
        match m {
            8 => {
                v.extend(range(7, 1, 18));
                v.extend(["8_25".into(), "8_34".into()]);
                v.extend(range(9, 26, 28));
            }
            9 => v.extend(range(8, 1, 6)),
            10 => v.extend(range(8, 1, 24)),
            _ => return None,
        }
        Some(v)
    }

    /// Total component count and the small components (each as a label list),
    /// for the complete tables.
    pub fn components(m: usize) -> Option<(usize, Vec<Vec<String>>)> {
        match m {
            8 => Some((
                4,
                vec![
                    vec!["10_17".into(), "9_26".into()],
                    vec!["10_18".into(), "10_19".into(), "9_27".into(), "9_28".into()],
                    vec![
                        "10_22".into(),
                        "10_23".into(),
                        "9_29".into(),
                        "9_34".into(),
                        "9_35".into(),
                        "9_36".into(),
                        "8_25".into(),
                        "8_34".into(),
                    ],
                ],
            )),
            9 => Some((2, vec![vec!["8_6".into()]])),
            10 => Some((
                2,
                vec![{
                    let mut v: Vec<String> = Vec::new();
                    for k in [10, 12, 13, 16] {
                        v.push(format!("10_{k}"));
                    }
                    for k in [17, 20, 21, 23, 27, 28, 29, 30, 31] {
                        v.push(format!("9_{k}"));
                    }
                    for k in [11, 13, 14, 16, 18, 22, 23] {
                        v.push(format!("8_{k}"));
                    }
                    v
                }],
            )),
            _ => None,
        }
    }
}

/// Result of checking the class tables themselves.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogReport {
    pub m: usize,
    /// Total number of classes in the tables.
    pub classes: usize,
    /// Classes per level, from the tables.
    pub level_counts: BTreeMap<usize, usize>,
    /// Itemized check failures; empty when everything holds.
    pub failures: Vec<String>,
}

impl CatalogReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check the class tables for `m`: per-level counts against the shipped
/// structure constants, unextendibility and declared letter counts of every
/// entry, and pairwise inequivalence.
pub fn verify_catalog(m: usize, data_dir: Option<&Path>) -> Result<CatalogReport> {
    let entries = catalog(m, data_dir)?;
    let mut failures = Vec::new();

    let mut level_counts: BTreeMap<usize, usize> = BTreeMap::new();
    for e in &entries {
        *level_counts.entry(e.level).or_insert(0) += 1;
    }
    let expected = reference::level_counts(m).expect("bundled m always has reference counts");
    for &(level, want) in expected {
        let got = level_counts.get(&level).copied().unwrap_or(0);
        if got != want {
            failures.push(format!("level {level}: {got} classes, expected {want}"));
        }
    }
    for (&level, &got) in &level_counts {
        if !expected.iter().any(|&(l, _)| l == level) {
            failures.push(format!("level {level}: {got} classes, expected none"));
        }
    }

    let validity = par_map(&entries, |e| {
        if !e.matrix.is_orthogonal() {
            return Some(format!("{}: rows are not pairwise orthogonal", e.label()));
        }
        match is_uom(&e.matrix) {
            Ok(true) => {}
            Ok(false) => return Some(format!("{}: matrix is extendible", e.label())),
            Err(err) => return Some(format!("{}: {err}", e.label())),
        }
        if e.matrix.nu_vec() != e.declared_nu {
            return Some(format!("{}: declared counts differ from the matrix", e.label()));
        }
        None
    });
    failures.extend(validity.into_iter().flatten());

    let keys = par_map(&entries, |e| canonical_key(&e.matrix));
    let mut seen: BTreeMap<&CanonicalKey, &CatalogEntry> = BTreeMap::new();
    for (e, k) in entries.iter().zip(keys.iter()) {
        if let Some(prev) = seen.insert(k, e) {
            failures.push(format!("{} and {} are equivalent", prev.label(), e.label()));
        }
    }

    Ok(CatalogReport {
        m,
        classes: entries.len(),
        level_counts,
        failures,
    })
}

/// Result of checking the arrow tables.
#[derive(Debug, Clone, Serialize)]
pub struct ArrowReport {
    pub m: usize,
    /// Number of (source, target) arrows the tables list.
    pub listed_arrows: usize,
    /// Number of witness identifications applied and checked.
    pub witnesses_checked: usize,
    /// Itemized check failures; empty when everything holds.
    pub failures: Vec<String>,
    /// Observations reported without failing verification: witness-count
    /// anomalies in the tables and, for the irreducible 12-row tables,
    /// differences between listed and recomputed arrow sets.
    pub notes: Vec<String>,
}

impl ArrowReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check the arrow tables for `m`.
///
/// Witness check (all `m`): applying each listed identification to its source
/// yields an unextendible matrix equivalent to the listed target. Rows whose
/// witness count differs from their target count are flagged as notes and
/// each of their witnesses is checked against the whole target set instead.
///
/// Completeness check (complete tables, m = 8, 9, 10): the computed
/// one-identification neighbors of every class reproduce exactly the listed
/// arrow set, and every computed neighbor appears in the tables at all. For
/// m = 12 the same recomputation runs restricted to irreducible images (a
/// reducible image is outside the tables by design); because the shipped
/// m = 12 tables are not asserted to be complete, an irreducible image
/// missing from them is reported as a note, as are differences between the
/// computed and listed arrow sets. With complete tables both conditions are
/// failures.
pub fn verify_arrows(m: usize, data_dir: Option<&Path>) -> Result<ArrowReport> {
    let entries = catalog(m, data_dir)?;
    let records = arrows(m, data_dir)?;
    let complete = tables_are_complete(m);

    let keys = par_map(&entries, |e| canonical_key(&e.matrix));
    let mut by_label: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut by_key: BTreeMap<&CanonicalKey, (usize, usize)> = BTreeMap::new();
    for (pos, (e, k)) in entries.iter().zip(keys.iter()).enumerate() {
        by_label.insert((e.level, e.index), pos);
        by_key.insert(k, (e.level, e.index));
    }

    let mut failures: Vec<String> = Vec::new();
    let mut notes: Vec<String> = Vec::new();
    let listed_arrows: usize = records.iter().map(|r| r.targets.len()).sum();

    // Where a freshly computed image landed, for failure messages.
    let landing = |key: &CanonicalKey| -> String {
        match by_key.get(key) {
            Some(&(l, k)) => format!("{l}_{k}"),
            None => "a class outside the tables".into(),
        }
    };

    // (a) Witness checks.
    struct RecordOutcome {
        checked: usize,
        failures: Vec<String>,
        notes: Vec<String>,
    }
    let outcomes = par_map(&records, |rec| {
        let mut out = RecordOutcome {
            checked: 0,
            failures: Vec::new(),
            notes: Vec::new(),
        };
        let src_label = format!("{}_{}", rec.level, rec.source);
        let Some(&src_pos) = by_label.get(&(rec.level, rec.source)) else {
            out.failures
                .push(format!("arrow table: source {src_label} is not in the catalog"));
            return out;
        };
        let src = &entries[src_pos].matrix;

        let mut target_keys: Vec<(usize, Option<&CanonicalKey>)> = Vec::new();
        for &t in &rec.targets {
            match by_label.get(&(rec.level - 1, t)) {
                Some(&pos) => target_keys.push((t, Some(&keys[pos]))),
                None => {
                    out.failures.push(format!(
                        "arrow {src_label} -> {}_{t}: target is not in the catalog",
                        rec.level - 1
                    ));
                    target_keys.push((t, None));
                }
            }
        }

        let mut check = |id: &Identification, expect: Option<(usize, &CanonicalKey)>| {
            out.checked += 1;
            let image = match apply_identification(src, id) {
                Ok(img) => img,
                Err(err) => {
                    out.failures
                        .push(format!("witness {id} on {src_label}: {err}"));
                    return;
                }
            };
            match is_uom(&image) {
                Ok(true) => {}
                Ok(false) => {
                    out.failures
                        .push(format!("witness {id} on {src_label}: image is extendible"));
                    return;
                }
                Err(err) => {
                    out.failures
                        .push(format!("witness {id} on {src_label}: {err}"));
                    return;
                }
            }
            let key = canonical_key(&image);
            match expect {
                Some((t, want)) => {
                    if key != *want {
                        out.failures.push(format!(
                            "arrow {src_label} -> {}_{t}: witness {id} lands in {}",
                            rec.level - 1,
                            landing(&key)
                        ));
                    }
                }
                None => {
                    if !target_keys.iter().any(|(_, k)| *k == Some(&key)) {
                        out.failures.push(format!(
                            "witness {id} on {src_label} lands in {}, outside the listed targets",
                            landing(&key)
                        ));
                    }
                }
            }
        };

        if rec.counts_match() {
            for (&(t, want), id) in target_keys.iter().zip(&rec.idents) {
                match want {
                    Some(want) => check(id, Some((t, want))),
                    None => {} // missing target already reported
                }
            }
        } else {
            out.notes.push(format!(
                "{src_label}: {} targets but {} witnesses listed; checking each witness against the whole target set",
                rec.targets.len(),
                rec.idents.len()
            ));
            for id in &rec.idents {
                check(id, None);
            }
        }
        out
    });
    let mut witnesses_checked = 0;
    for out in outcomes {
        witnesses_checked += out.checked;
        failures.extend(out.failures);
        notes.extend(out.notes);
    }

    // (b) Completeness: recompute the arrow set from the classes.
    type Arrow = ((usize, usize), (usize, usize));
    let computed_per_entry = par_map(&entries, |e| {
        let mut arrows_out: Vec<(String, CanonicalKey)> = Vec::new();
        let mut errs: Vec<String> = Vec::new();
        match down_neighbors(&e.matrix) {
            Ok(neighbors) => {
                for (id, img) in neighbors {
                    if !complete && img.is_reducible() {
                        continue;
                    }
                    arrows_out.push((id.to_string(), canonical_key(&img)));
                }
            }
            Err(err) => errs.push(format!("{}: {err}", e.label())),
        }
        (arrows_out, errs)
    });

    let mut computed: BTreeSet<Arrow> = BTreeSet::new();
    for (e, (arrows_out, errs)) in entries.iter().zip(computed_per_entry.iter()) {
        failures.extend(errs.iter().cloned());
        for (id, key) in arrows_out {
            match by_key.get(key) {
                Some(&tgt) => {
                    computed.insert(((e.level, e.index), tgt));
                }
                None => {
                    let msg = format!(
                        "identification {id} on {} yields a class missing from the tables",
                        e.label()
                    );
                    if complete {
                        failures.push(msg);
                    } else {
                        notes.push(msg);
                    }
                }
            }
        }
    }

    let mut listed: BTreeSet<Arrow> = BTreeSet::new();
    for rec in &records {
        for &t in &rec.targets {
            listed.insert(((rec.level, rec.source), (rec.level - 1, t)));
        }
    }

    let fmt_arrow = |a: &Arrow| format!("{}_{} -> {}_{}", a.0 .0, a.0 .1, a.1 .0, a.1 .1);
    for a in computed.difference(&listed) {
        let msg = format!("computed arrow {} is not listed", fmt_arrow(a));
        if complete {
            failures.push(msg);
        } else {
            notes.push(msg);
        }
    }
    for a in listed.difference(&computed) {
        let msg = format!("listed arrow {} is not realized by any identification", fmt_arrow(a));
        if complete {
            failures.push(msg);
        } else {
            notes.push(msg);
        }
    }

    Ok(ArrowReport {
        m,
        listed_arrows,
        witnesses_checked,
        failures,
        notes,
    })
}

/// Derived order structure of a complete table set, checked against the
/// shipped structure constants.
#[derive(Debug, Clone, Serialize)]
pub struct StructureSummary {
    pub m: usize,
    pub classes: usize,
    /// Arrow count of the recomputed diagram.
    pub arrows: usize,
    pub maximal: Vec<String>,
    pub minimal: Vec<String>,
    pub isolated: Vec<String>,
    /// Connected components, each sorted, largest-first by size then by
    /// first label.
    pub components: Vec<Vec<String>>,
    /// Itemized mismatches against the shipped structure constants.
    pub failures: Vec<String>,
}

impl StructureSummary {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Rebuild the full order diagram for complete tables (m = 8, 9, 10) and
/// compare maximal/minimal classes and connected components against the
/// shipped structure constants.
pub fn verify_structure(m: usize, data_dir: Option<&Path>) -> Result<StructureSummary> {
    if !tables_are_complete(m) {
        return Err(Error::invalid(
            "full structure verification needs complete tables (m = 8, 9 or 10); \
             for m=12 use the maximal-class check",
        ));
    }
    let entries = catalog(m, data_dir)?;
    let labels: Vec<String> = entries.iter().map(|e| e.label()).collect();
    let mats: Vec<VarMatrix> = entries.iter().map(|e| e.matrix.clone()).collect();

    // A broken table (non-orthogonal or extendible entry, or an image that
    // escapes the class list) is a verification failure, not a usage error.
    let broken = |failures: Vec<String>| {
        Ok(StructureSummary {
            m,
            classes: entries.len(),
            arrows: 0,
            maximal: Vec::new(),
            minimal: Vec::new(),
            isolated: Vec::new(),
            components: Vec::new(),
            failures,
        })
    };
    let invalid: Vec<String> = par_map(&entries, |e| {
        if !e.matrix.is_orthogonal() {
            return Some(format!("{}: rows are not pairwise orthogonal", e.label()));
        }
        match is_uom(&e.matrix) {
            Ok(true) => None,
            Ok(false) => Some(format!("{}: matrix is extendible", e.label())),
            Err(err) => Some(format!("{}: {err}", e.label())),
        }
    })
    .into_iter()
    .flatten()
    .collect();
    if !invalid.is_empty() {
        return broken(invalid);
    }
    let diagram = match build_hasse(&mats, Some(&labels)) {
        Ok(d) => d,
        Err(err) => return broken(vec![format!("diagram construction failed: {err}")]),
    };
    let cls = classify(&diagram);

    let to_labels =
        |idx: &[usize]| -> Vec<String> { idx.iter().map(|&i| diagram.nodes[i].label.clone()).collect() };
    let maximal = to_labels(&cls.maximal);
    let minimal = to_labels(&cls.minimal);
    let isolated = to_labels(&cls.isolated);
    let mut components: Vec<Vec<String>> = cls.components.iter().map(|c| to_labels(c)).collect();
    for c in &mut components {
        c.sort();
    }
    components.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

    let mut failures = Vec::new();
    let mut diff = |kind: &str, got: &[String], want: &[String]| {
        let g: BTreeSet<&String> = got.iter().collect();
        let w: BTreeSet<&String> = want.iter().collect();
        for x in g.difference(&w) {
            failures.push(format!("{x} is {kind} but is not expected to be"));
        }
        for x in w.difference(&g) {
            failures.push(format!("{x} is expected to be {kind} but is not"));
        }
    };
    diff("maximal", &maximal, &reference::maximal(m).expect("complete m"));
    diff("minimal", &minimal, &reference::minimal(m).expect("complete m"));

    let (want_count, small) = reference::components(m).expect("complete m");
    if components.len() != want_count {
        failures.push(format!(
            "{} connected components, expected {want_count}",
            components.len()
        ));
    }
    for want in &small {
        let want_set: BTreeSet<&String> = want.iter().collect();
        if !components
            .iter()
            .any(|c| c.iter().collect::<BTreeSet<_>>() == want_set)
        {
            failures.push(format!("expected connected component {want:?} not found"));
        }
    }

    Ok(StructureSummary {
        m,
        classes: entries.len(),
        arrows: diagram.arrows.len(),
        maximal,
        minimal,
        isolated,
        components,
        failures,
    })
}

/// Result of checking that designated classes admit no splitting.
#[derive(Debug, Clone, Serialize)]
pub struct MaximalCheck {
    pub m: usize,
    /// Labels whose absence of splittings was verified.
    pub checked: Vec<String>,
    pub failures: Vec<String>,
}

impl MaximalCheck {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// For the irreducible 12-row tables: verify that the designated maximal
/// classes admit no splitting (no unextendible matrix one level up). This
/// establishes maximality in the full order, reducible classes included: a
/// splitting never lowers a column's variable count, so every class above an
/// irreducible class is irreducible.
pub fn verify_irreducible_maximal(data_dir: Option<&Path>) -> Result<MaximalCheck> {
    let m = 12;
    let entries = catalog(m, data_dir)?;
    let expected = reference::maximal(m).expect("reference maximal classes for m=12");

    let mut by_label: BTreeMap<String, &CatalogEntry> = BTreeMap::new();
    for e in &entries {
        by_label.insert(e.label(), e);
    }

    let mut checked = Vec::new();
    let mut missing = Vec::new();
    let mut targets: Vec<&CatalogEntry> = Vec::new();
    for label in &expected {
        match by_label.get(label) {
            Some(e) => {
                checked.push(label.clone());
                targets.push(e);
            }
            None => missing.push(format!("expected maximal class {label} is not in the tables")),
        }
    }

    let mut failures = missing;
    let split_failures = par_map(&targets, |e| match up_neighbors(&e.matrix) {
        Ok(ups) if ups.is_empty() => None,
        Ok(ups) => Some(format!(
            "{} admits {} splitting(s) but is expected to be maximal",
            e.label(),
            ups.len()
        )),
        Err(err) => Some(format!("{}: {err}", e.label())),
    });
    failures.extend(split_failures.into_iter().flatten());

    Ok(MaximalCheck {
        m,
        checked,
        failures,
    })
}

/// Combined verification result for one bundled `m`.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub m: usize,
    pub catalog: CatalogReport,
    pub arrows: ArrowReport,
    /// Present for complete tables (m = 8, 9, 10).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureSummary>,
    /// Present for the irreducible tables (m = 12).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maximal_check: Option<MaximalCheck>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.catalog.ok()
            && self.arrows.ok()
            && self.structure.as_ref().map_or(true, |s| s.ok())
            && self.maximal_check.as_ref().map_or(true, |c| c.ok())
    }
}

/// Run every check that applies to the bundled tables for `m`.
pub fn verify(m: usize, data_dir: Option<&Path>) -> Result<VerifyReport> {
    let catalog_report = verify_catalog(m, data_dir)?;
    let arrow_report = verify_arrows(m, data_dir)?;
    let (structure, maximal_check) = if tables_are_complete(m) {
        (Some(verify_structure(m, data_dir)?), None)
    } else {
        (None, Some(verify_irreducible_maximal(data_dir)?))
    };
    Ok(VerifyReport {
        m,
        catalog: catalog_report,
        arrows: arrow_report,
        structure,
        maximal_check,
    })
}
