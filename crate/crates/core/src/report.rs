//! Serializable reports with plain-text renderings, shared by the CLI and
//! the browser demo so both surfaces print identical summaries.

use serde::Serialize;

use crate::catalog::VerifyReport;
use crate::enumerate::EnumerationSummary;
use crate::equiv::{canonical_form, canonical_key, Transform};
use crate::error::Result;
use crate::matrix::VarMatrix;
use crate::numeric::ClosureReport;
use crate::unextend::find_extension;

/// Everything `check` has to say about one matrix.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub rows: usize,
    pub columns: usize,
    pub level: usize,
    pub nu: Vec<usize>,
    pub mu: Vec<usize>,
    pub balanced: bool,
    pub reducible: bool,
    pub orthogonal: bool,
    /// 1-based offending row pair when not orthogonal.
    pub non_orthogonal_rows: Option<(usize, usize)>,
    pub uom: bool,
    /// Pretty-printed extension row when one exists.
    pub extension: Option<String>,
}

impl CheckReport {
    pub fn for_matrix(x: &VarMatrix) -> Result<CheckReport> {
        let mut non_orthogonal_rows = None;
        'scan: for i in 0..x.m() {
            for j in i + 1..x.m() {
                if !crate::matrix::rows_orthogonal(x.row(i), x.row(j))? {
                    non_orthogonal_rows = Some((i + 1, j + 1));
                    break 'scan;
                }
            }
        }
        let orthogonal = non_orthogonal_rows.is_none();
        let extension = if orthogonal {
            find_extension(x)?.map(|w| w.pretty())
        } else {
            None
        };
        Ok(CheckReport {
            rows: x.m(),
            columns: x.n(),
            level: x.level(),
            nu: x.nu_vec(),
            mu: x.mu_vec(),
            balanced: x.is_balanced(),
            reducible: x.is_reducible(),
            orthogonal,
            non_orthogonal_rows,
            uom: orthogonal && extension.is_none(),
            extension,
        })
    }

    pub fn text(&self) -> String {
        let mut first = if self.orthogonal {
            format!(
                "orthogonal: yes, UOM: {}",
                if self.uom { "yes" } else { "no" }
            )
        } else {
            let (i, j) = self.non_orthogonal_rows.expect("set when not orthogonal");
            format!("orthogonal: no (rows {i} and {j}), UOM: no")
        };
        if let Some(ext) = &self.extension {
            first.push_str(&format!(", extension: {ext}"));
        }
        let fmt_vec = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "{first}\nrows: {}, columns: {}, level: {}\nnu: [{}], mu: [{}], balanced: {}, reducible: {}",
            self.rows,
            self.columns,
            self.level,
            fmt_vec(&self.nu),
            fmt_vec(&self.mu),
            if self.balanced { "yes" } else { "no" },
            if self.reducible { "yes" } else { "no" },
        )
    }
}

/// Canonical form of one matrix plus the transform that reaches it.
#[derive(Debug, Clone, Serialize)]
pub struct CanonReport {
    pub key: String,
    pub canonical: VarMatrix,
    pub transform: Transform,
}

impl CanonReport {
    pub fn for_matrix(x: &VarMatrix) -> CanonReport {
        let (canonical, transform) = canonical_form(x);
        CanonReport {
            key: canonical_key(x).to_hex(),
            canonical,
            transform,
        }
    }

    pub fn text(&self) -> String {
        format!(
            "key: {}\ncanonical: {}\nrow permutation: {:?}\ncolumn permutation: {:?}",
            self.key, self.canonical, self.transform.row_perm, self.transform.col_perm,
        )
    }
}

/// Verdict of `equiv`.
#[derive(Debug, Clone, Serialize)]
pub struct EquivReport {
    pub equivalent: bool,
    pub left_key: String,
    pub right_key: String,
}

impl EquivReport {
    pub fn for_pair(a: &VarMatrix, b: &VarMatrix) -> EquivReport {
        let left = canonical_key(a);
        let right = canonical_key(b);
        EquivReport {
            equivalent: left == right,
            left_key: left.to_hex(),
            right_key: right.to_hex(),
        }
    }

    pub fn text(&self) -> String {
        if self.equivalent { "equivalent" } else { "inequivalent" }.to_string()
    }
}

/// One covering neighbor of a matrix.
#[derive(Debug, Clone, Serialize)]
pub struct Neighbor {
    /// The identification used, for downward neighbors.
    pub identification: Option<String>,
    pub level: usize,
    pub key: String,
    pub matrix: VarMatrix,
}

/// Output of `neighbors --up` / `--down`.
#[derive(Debug, Clone, Serialize)]
pub struct NeighborsReport {
    pub direction: String,
    pub neighbors: Vec<Neighbor>,
}

impl NeighborsReport {
    pub fn down(x: &VarMatrix) -> Result<NeighborsReport> {
        let neighbors = crate::order::down_neighbors(x)?
            .into_iter()
            .map(|(id, img)| Neighbor {
                identification: Some(id.to_string()),
                level: img.level(),
                key: canonical_key(&img).to_hex(),
                matrix: img,
            })
            .collect();
        Ok(NeighborsReport {
            direction: "down".into(),
            neighbors,
        })
    }

    pub fn up(x: &VarMatrix) -> Result<NeighborsReport> {
        let neighbors = crate::order::up_neighbors(x)?
            .into_iter()
            .map(|img| Neighbor {
                identification: None,
                level: img.level(),
                key: canonical_key(&img).to_hex(),
                matrix: img,
            })
            .collect();
        Ok(NeighborsReport {
            direction: "up".into(),
            neighbors,
        })
    }

    pub fn text(&self) -> String {
        let mut out = format!("{} {} neighbors", self.neighbors.len(), self.direction);
        for nb in &self.neighbors {
            out.push('\n');
            match &nb.identification {
                Some(id) => out.push_str(&format!("{id}: {}", nb.matrix)),
                None => out.push_str(&format!("level {}: {}", nb.level, nb.matrix)),
            }
        }
        out
    }
}

/// Plain-text rendering of a verification run: one summary line, then any
/// failures and notes, one per line.
pub fn verify_text(report: &VerifyReport) -> String {
    let mut out = match &report.structure {
        Some(s) => format!(
            "{} classes, {} arrows, {} maximal, {} minimal, {} components",
            s.classes,
            s.arrows,
            s.maximal.len(),
            s.minimal.len(),
            s.components.len()
        ),
        None => {
            let mut line = format!(
                "{} classes, {} listed arrows, {} witnesses checked",
                report.catalog.classes, report.arrows.listed_arrows, report.arrows.witnesses_checked
            );
            if let Some(mc) = &report.maximal_check {
                line.push_str(&format!(", {} maximal confirmed", mc.checked.len()));
            }
            line
        }
    };
    for f in report
        .catalog
        .failures
        .iter()
        .chain(&report.arrows.failures)
        .chain(report.structure.iter().flat_map(|s| &s.failures))
        .chain(report.maximal_check.iter().flat_map(|c| &c.failures))
    {
        out.push_str(&format!("\nfailure: {f}"));
    }
    for n in &report.arrows.notes {
        out.push_str(&format!("\nnote: {n}"));
    }
    out
}

/// Result of `eval`: seeded generic-evaluation trials of one matrix.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub trials: usize,
    /// Trials whose evaluation produced an unextendible product set.
    pub unextendible_trials: usize,
    pub seed: u64,
}

impl EvalReport {
    pub fn text(&self) -> String {
        format!(
            "{}/{} generic evaluations are unextendible product sets (seed {})",
            self.unextendible_trials, self.trials, self.seed
        )
    }
}

/// Plain-text rendering of a closure-path walk.
pub fn closure_text(report: &ClosureReport) -> String {
    let generic_interior = report.points.iter().filter(|p| p.t < 1.0).all(|p| p.generic);
    format!(
        "terminal deviation {:.3e} after {} steps (seed {}, {} retries, interior generic: {})",
        report.terminal_deviation,
        report.points.len(),
        report.seed,
        report.retries,
        if generic_interior { "yes" } else { "no" }
    )
}

/// Plain-text rendering of an enumeration run: summary line plus one line
/// per class in the catalog text format.
pub fn enumeration_text(summary: &EnumerationSummary, reps: &[VarMatrix]) -> String {
    let plural = |k: usize| if k == 1 { "class" } else { "classes" };
    let mut out = format!(
        "({},{}): {} {}, {} orthogonal {}, {} nodes expanded",
        summary.m,
        summary.n,
        summary.classes.len(),
        plural(summary.classes.len()),
        summary.orthogonal_classes,
        plural(summary.orthogonal_classes),
        summary.expanded
    );
    for (i, rep) in reps.iter().enumerate() {
        let nu = rep
            .nu_vec()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!("\n{} {} [{}]", i + 1, rep, nu));
    }
    out
}
