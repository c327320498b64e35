//! Numeric bridge: evaluating symbolic matrices into concrete product-vector
//! sets, and the geometric counterparts of the symbolic decisions.
//!
//! An evaluation assigns a unit vector in ℂ² to each letter, with primed
//! letters taking the perpendicular. A generic evaluation of an unextendible
//! matrix yields an unextendible product basis; that correspondence is
//! checked here by a direct geometric extension search, recovery of the
//! symbolic matrix from a product set, and a sampled continuous path showing
//! how the products of an identified matrix arise as limits of the source's.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{Symbol, VarMatrix, MAX_LETTERS};
use crate::order::{apply_identification, Identification};

/// Tolerances for the numeric decisions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Orthogonality and witness validity: inner products below this are zero.
    pub ortho: f64,
    /// Parallel clustering: overlaps above 1 − parallel are the same ray.
    pub parallel: f64,
    /// Genericity margin: pairwise overlaps must stay in (generic, 1 − generic).
    pub generic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ortho: 1e-9,
            parallel: 1e-7,
            generic: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("ortho", self.ortho),
            ("parallel", self.parallel),
            ("generic", self.generic),
        ] {
            if !(v > 0.0 && v < 0.5) {
                return Err(Error::invalid(format!(
                    "tolerance {name} must lie in (0, 0.5), got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// A unit vector in ℂ² (one qubit state).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Qubit {
    pub a: Complex64,
    pub b: Complex64,
}

impl Qubit {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let q = Qubit { a, b };
        let norm = q.norm();
        if norm < 1e-12 {
            return Err(Error::Numeric("zero vector cannot be normalized".into()));
        }
        Ok(Qubit {
            a: a / norm,
            b: b / norm,
        })
    }

    /// Real amplitudes, normalized.
    pub fn real(a: f64, b: f64) -> Result<Self> {
        Qubit::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    }

    pub fn ket0() -> Self {
        Qubit {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn ket1() -> Self {
        Qubit {
            a: Complex64::new(0.0, 0.0),
            b: Complex64::new(1.0, 0.0),
        }
    }

    /// (|0⟩ + |1⟩)/√2.
    pub fn plus() -> Self {
        Qubit::real(1.0, 1.0).unwrap()
    }

    /// (|0⟩ − |1⟩)/√2.
    pub fn minus() -> Self {
        Qubit::real(1.0, -1.0).unwrap()
    }

    pub fn norm(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr()).sqrt()
    }

    pub fn normalized(&self) -> Qubit {
        let n = self.norm();
        Qubit {
            a: self.a / n,
            b: self.b / n,
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Qubit) -> Complex64 {
        self.a.conj() * other.a + self.b.conj() * other.b
    }

    /// |⟨self|other⟩| ∈ [0, 1] for unit vectors.
    pub fn overlap(&self, other: &Qubit) -> f64 {
        self.inner(other).norm()
    }

    /// The unique perpendicular ray: (a, b) ↦ (−conj(b), conj(a)).
    /// `inner(v, v.perp())` is exactly zero in floating point.
    pub fn perp(&self) -> Qubit {
        Qubit {
            a: -self.b.conj(),
            b: self.a.conj(),
        }
    }

    /// Rotate the global phase so the first non-negligible amplitude is real
    /// and positive.
    pub fn phase_normalized(&self) -> Qubit {
        let pick = if self.a.norm() > 1e-12 { self.a } else { self.b };
        let mag = pick.norm();
        if mag <= 1e-12 {
            return *self;
        }
        let factor = pick.conj() / mag;
        Qubit {
            a: self.a * factor,
            b: self.b * factor,
        }
    }

    fn combine(c0: f64, v0: &Qubit, c1: f64, v1: &Qubit) -> Qubit {
        Qubit {
            a: v0.a * c0 + v1.a * c1,
            b: v0.b * c0 + v1.b * c1,
        }
    }
}

impl Serialize for Qubit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [[self.a.re, self.a.im], [self.b.re, self.b.im]].serialize(serializer)
    }
}

/// A per-column assignment of unit vectors to letters. Entries may be stored
/// under either sign of a letter; the other sign takes the perpendicular.
#[derive(Clone, Debug)]
pub struct Evaluation {
    columns: Vec<BTreeMap<Symbol, Qubit>>,
    /// Recorded sampling seed for replay, if this evaluation was sampled.
    pub seed: Option<u64>,
}

impl Evaluation {
    pub fn new(n: usize) -> Self {
        Evaluation {
            columns: vec![BTreeMap::new(); n],
            seed: None,
        }
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    /// Assign a vector (normalized on entry) to one symbol.
    pub fn set(&mut self, col: usize, sym: Symbol, q: Qubit) -> Result<()> {
        if col >= self.columns.len() {
            return Err(Error::invalid(format!(
                "column {} out of range (evaluation has {})",
                col + 1,
                self.columns.len()
            )));
        }
        self.columns[col].insert(sym, q.normalized());
        Ok(())
    }

    /// The vector of a symbol: its own entry if stored, otherwise the
    /// perpendicular of its partner's entry.
    pub fn get(&self, col: usize, sym: Symbol) -> Result<Qubit> {
        let map = self.columns.get(col).ok_or_else(|| {
            Error::invalid(format!("column {} out of range", col + 1))
        })?;
        if let Some(&q) = map.get(&sym) {
            return Ok(q);
        }
        if let Some(q) = map.get(&sym.partner()) {
            return Ok(q.perp());
        }
        Err(Error::MissingAssignment {
            col: col + 1,
            letter: Symbol::new(sym.letter, false).to_char(),
        })
    }

    /// Check that every letter of `x` is assigned and that any letter stored
    /// under both signs respects the involution within `tol.ortho`.
    pub fn check_assigns(&self, x: &VarMatrix, tol: Tolerances) -> Result<()> {
        if self.n() != x.n() {
            return Err(Error::invalid(format!(
                "evaluation covers {} columns, matrix has {}",
                self.n(),
                x.n()
            )));
        }
        for j in 0..x.n() {
            for letter in x.column_letters(j) {
                let plain = Symbol::new(letter, false);
                self.get(j, plain)?;
                let map = &self.columns[j];
                if let (Some(u), Some(v)) = (map.get(&plain), map.get(&plain.partner())) {
                    if u.overlap(v) > tol.ortho {
                        return Err(Error::InvolutionViolation {
                            col: j + 1,
                            letter: plain.to_char(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Is this evaluation generic for `x`: within each column, the rays of
    /// independent letters are neither parallel nor perpendicular, with
    /// margin `tol.generic` on the overlap.
    pub fn is_generic_for(&self, x: &VarMatrix, tol: Tolerances) -> Result<bool> {
        for j in 0..x.n() {
            let letters: Vec<u8> = x.column_letters(j).collect();
            let vecs: Vec<Qubit> = letters
                .iter()
                .map(|&l| self.get(j, Symbol::new(l, false)))
                .collect::<Result<_>>()?;
            for i in 0..vecs.len() {
                for k in i + 1..vecs.len() {
                    let o = vecs[i].overlap(&vecs[k]);
                    if o <= tol.generic || o >= 1.0 - tol.generic {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// An ordered set of m product vectors over n qubits, each component
/// normalized in norm and phase (first non-negligible amplitude real
/// positive).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductSet {
    seed: Option<u64>,
    rows: Vec<Vec<Qubit>>,
}

impl ProductSet {
    pub fn from_rows(rows: Vec<Vec<Qubit>>, seed: Option<u64>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyShape);
        }
        let n = rows[0].len();
        let mut normalized = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    len: row.len(),
                    expected: n,
                });
            }
            let mut out = Vec::with_capacity(n);
            for q in row {
                if q.norm() < 1e-12 {
                    return Err(Error::Numeric(format!("zero component in row {}", i + 1)));
                }
                out.push(q.normalized().phase_normalized());
            }
            normalized.push(out);
        }
        Ok(ProductSet {
            seed,
            rows: normalized,
        })
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, i: usize) -> &[Qubit] {
        &self.rows[i]
    }

    pub fn component(&self, i: usize, j: usize) -> &Qubit {
        &self.rows[i][j]
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// |⟨row i, row k⟩| of the full product vectors.
    pub fn product_overlap(&self, i: usize, k: usize) -> f64 {
        (0..self.n())
            .map(|j| self.rows[i][j].overlap(&self.rows[k][j]))
            .product()
    }

    pub fn check_orthogonal(&self, tol: Tolerances) -> Result<()> {
        for i in 0..self.m() {
            for k in i + 1..self.m() {
                if self.product_overlap(i, k) > tol.ortho {
                    return Err(Error::NotOrthogonal { i, j: k });
                }
            }
        }
        Ok(())
    }

    pub fn is_pairwise_orthogonal(&self, tol: Tolerances) -> bool {
        self.check_orthogonal(tol).is_ok()
    }
}

/// Max over rows of 1 − |⟨a_i, b_i⟩|: zero exactly when the two ordered sets
/// agree ray-wise row by row.
pub fn deviation(a: &ProductSet, b: &ProductSet) -> Result<f64> {
    if a.m() != b.m() || a.n() != b.n() {
        return Err(Error::invalid("product sets differ in shape"));
    }
    let mut worst = 0.0f64;
    for i in 0..a.m() {
        let overlap: f64 = (0..a.n())
            .map(|j| a.rows[i][j].overlap(&b.rows[i][j]))
            .product();
        worst = worst.max((1.0 - overlap).max(0.0));
    }
    Ok(worst)
}

/// Map every row of `x` through the evaluation: row i becomes the n-tuple of
/// assigned vectors.
pub fn evaluate(x: &VarMatrix, alpha: &Evaluation, tol: Tolerances) -> Result<ProductSet> {
    alpha.check_assigns(x, tol)?;
    let rows = x
        .rows()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &s)| alpha.get(j, s))
                .collect::<Result<Vec<Qubit>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ProductSet::from_rows(rows, alpha.seed)
}

fn haar_qubit<R: Rng>(rng: &mut R) -> Qubit {
    loop {
        let a = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let b = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        if let Ok(q) = Qubit::new(a, b) {
            return q;
        }
    }
}

const SAMPLE_RETRY_CAP: usize = 256;

/// Draw an independent Haar-random vector per letter, redrawing any vector
/// that lands parallel or perpendicular (within the generic margin) to an
/// earlier letter of the same column. Deterministic in the seed.
pub fn sample_generic(x: &VarMatrix, seed: u64, tol: Tolerances) -> Result<Evaluation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alpha = Evaluation::new(x.n());
    alpha.seed = Some(seed);
    for j in 0..x.n() {
        let mut placed: Vec<Qubit> = Vec::new();
        for letter in x.column_letters(j) {
            let mut accepted = None;
            for _ in 0..SAMPLE_RETRY_CAP {
                let q = haar_qubit(&mut rng);
                let ok = placed.iter().all(|p| {
                    let o = p.overlap(&q);
                    o > tol.generic && o < 1.0 - tol.generic
                });
                if ok {
                    accepted = Some(q);
                    break;
                }
            }
            let q = accepted.ok_or_else(|| {
                Error::Numeric(format!(
                    "could not sample a generic vector for column {} after {} tries",
                    j + 1,
                    SAMPLE_RETRY_CAP
                ))
            })?;
            alpha.set(j, Symbol::new(letter, false), q)?;
            placed.push(q);
        }
    }
    Ok(alpha)
}

/// Verdict of the geometric extension search.
#[derive(Clone, Debug, Serialize)]
pub struct UpbCheck {
    /// True when no product vector is orthogonal to the whole set.
    pub is_upb: bool,
    /// A product vector orthogonal to every row, when one exists
    /// (components phase-normalized).
    pub witness: Option<Vec<Qubit>>,
}

/// Parallel classes of the column-j components, in first-occurrence order:
/// (representative, member-row bitmask).
fn parallel_classes(p: &ProductSet, j: usize, tol: Tolerances) -> Vec<(Qubit, u32)> {
    let mut classes: Vec<(Qubit, u32)> = Vec::new();
    for i in 0..p.m() {
        let q = p.component(i, j);
        match classes
            .iter_mut()
            .find(|(rep, _)| rep.overlap(q) > 1.0 - tol.parallel)
        {
            Some((_, members)) => *members |= 1 << i,
            None => classes.push((*q, 1 << i)),
        }
    }
    classes
}

/// Geometric unextendibility: a hypothetical further product vector must, in
/// each column, be perpendicular to every component it is to kill there; a
/// ℂ² vector is perpendicular to at most one ray, so per column it can cover
/// exactly one parallel class (or none). The set extends iff some choice of
/// one class-or-none per column covers all rows.
pub fn numeric_is_upb(p: &ProductSet, tol: Tolerances) -> Result<UpbCheck> {
    p.check_orthogonal(tol)?;
    if p.m() > 32 {
        return Err(Error::invalid("more than 32 product vectors"));
    }
    let full: u32 = if p.m() == 32 {
        u32::MAX
    } else {
        (1u32 << p.m()) - 1
    };

    // Candidates per column: the common perpendicular of each class (covering
    // that class's rows), then an unconstrained vector covering nothing.
    let per_column: Vec<Vec<(Qubit, u32)>> = (0..p.n())
        .map(|j| {
            let mut cands: Vec<(Qubit, u32)> = parallel_classes(p, j, tol)
                .into_iter()
                .map(|(rep, members)| (rep.perp().phase_normalized(), members))
                .collect();
            cands.push((Qubit::ket0(), 0));
            cands
        })
        .collect();

    // What the columns from j onward can still cover.
    let mut reachable = vec![0u32; p.n() + 1];
    for j in (0..p.n()).rev() {
        reachable[j] = reachable[j + 1]
            | per_column[j]
                .iter()
                .fold(0, |acc, &(_, members)| acc | members);
    }

    fn search(
        per_column: &[Vec<(Qubit, u32)>],
        reachable: &[u32],
        j: usize,
        covered: u32,
        full: u32,
        chosen: &mut Vec<Qubit>,
    ) -> bool {
        if j == per_column.len() {
            return covered == full;
        }
        if covered | reachable[j] != full {
            return false;
        }
        for &(vector, members) in &per_column[j] {
            chosen.push(vector);
            if search(per_column, reachable, j + 1, covered | members, full, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    let mut chosen = Vec::with_capacity(p.n());
    if search(&per_column, &reachable, 0, 0, full, &mut chosen) {
        Ok(UpbCheck {
            is_upb: false,
            witness: Some(chosen),
        })
    } else {
        Ok(UpbCheck {
            is_upb: true,
            witness: None,
        })
    }
}

/// Rebuild the symbolic matrix of a product set: per column, parallel classes
/// become letters, and two mutually perpendicular classes share a letter as
/// x and x'. Row order is preserved.
pub fn recover_uom(p: &ProductSet, tol: Tolerances) -> Result<VarMatrix> {
    p.check_orthogonal(tol)?;
    if p.m() > 32 {
        return Err(Error::invalid("more than 32 product vectors"));
    }
    let mut rows: Vec<Vec<Symbol>> = vec![Vec::with_capacity(p.n()); p.m()];
    for j in 0..p.n() {
        let classes = parallel_classes(p, j, tol);
        // Pair classes whose rays are perpendicular; demand an unambiguous
        // partial matching.
        let mut partner: Vec<Option<usize>> = vec![None; classes.len()];
        for c in 0..classes.len() {
            for d in c + 1..classes.len() {
                if classes[c].0.overlap(&classes[d].0) < tol.parallel {
                    if partner[c].is_some() || partner[d].is_some() {
                        return Err(Error::Numeric(format!(
                            "ambiguous perpendicular pairing in column {}",
                            j + 1
                        )));
                    }
                    partner[c] = Some(d);
                    partner[d] = Some(c);
                }
            }
        }
        let mut symbol_of: Vec<Option<Symbol>> = vec![None; classes.len()];
        let mut next_letter: u8 = 0;
        for c in 0..classes.len() {
            if symbol_of[c].is_some() {
                continue;
            }
            if next_letter >= MAX_LETTERS {
                return Err(Error::Numeric(format!(
                    "column {} needs more than {} letters",
                    j + 1,
                    MAX_LETTERS
                )));
            }
            symbol_of[c] = Some(Symbol::new(next_letter, false));
            if let Some(d) = partner[c] {
                symbol_of[d] = Some(Symbol::new(next_letter, true));
            }
            next_letter += 1;
        }
        for (c, &(_, members)) in classes.iter().enumerate() {
            let sym = symbol_of[c].expect("every class got a symbol");
            for (i, row) in rows.iter_mut().enumerate() {
                if members & (1 << i) != 0 {
                    row.push(sym);
                }
            }
        }
        // Each row received exactly one symbol for this column because the
        // classes partition the rows.
        debug_assert!(rows.iter().all(|r| r.len() == j + 1));
    }
    VarMatrix::from_rows(rows)
}

/// Extend an evaluation of the identified matrix back to the source: the
/// removed letter takes the target symbol's vector, so evaluating the source
/// reproduces the identified matrix's products ray-for-ray.
pub fn extend_evaluation(
    x: &VarMatrix,
    id: &Identification,
    beta: &Evaluation,
) -> Result<Evaluation> {
    apply_identification(x, id)?;
    let target_vec = beta.get(id.column, id.target)?;
    let mut alpha = beta.clone();
    alpha.set(id.column, Symbol::new(id.removed, false), target_vec)?;
    Ok(alpha)
}

/// One sampled point of a closure path.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClosurePoint {
    pub t: f64,
    /// Max over rows of the ray distance to the identified matrix's products.
    pub deviation: f64,
    /// Whether the evaluation at this point is generic for the source.
    pub generic: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub points: Vec<ClosurePoint>,
    pub terminal_deviation: f64,
    /// How many start vectors were rejected before a fully generic interior
    /// was found.
    pub retries: u32,
    pub seed: u64,
}

const PATH_RETRY_CAP: u32 = 64;

/// Walk the removed letter's vector along a great circle from a generic
/// start to the target symbol's vector, evaluating the source matrix along
/// the way. Every interior point must be a generic evaluation; at t = 1 the
/// products coincide with the identified matrix's evaluation.
///
/// `steps` is the number of sampled points t = k/steps for k = 1..=steps;
/// `steps = 1` checks the endpoint only.
pub fn closure_path(
    x: &VarMatrix,
    id: &Identification,
    beta: &Evaluation,
    steps: usize,
    seed: u64,
    tol: Tolerances,
) -> Result<ClosureReport> {
    if steps == 0 {
        return Err(Error::invalid("steps must be positive"));
    }
    let y = apply_identification(x, id)?;
    beta.check_assigns(&y, tol)?;
    if !beta.is_generic_for(&y, tol)? {
        return Err(Error::invalid(
            "the supplied evaluation is not generic for the identified matrix",
        ));
    }
    let target_products = evaluate(&y, beta, tol)?;
    let sigma1 = beta.get(id.column, id.target)?;
    // Vectors the moving letter must stay clear of at interior points.
    let others: Vec<Qubit> = y
        .column_letters(id.column)
        .map(|l| beta.get(id.column, Symbol::new(l, false)))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut retries = 0u32;
    'attempt: loop {
        let sigma0 = haar_qubit(&mut rng);
        let start_generic = others.iter().all(|p| {
            let o = p.overlap(&sigma0);
            o > tol.generic && o < 1.0 - tol.generic
        });
        if !start_generic {
            retries += 1;
            if retries > PATH_RETRY_CAP {
                return Err(Error::Numeric(
                    "no generic start vector found for the closure path".into(),
                ));
            }
            continue;
        }

        // Great circle from sigma0 to sigma1, phase-aligned so the endpoint
        // is hit exactly.
        let c = sigma0.inner(&sigma1);
        let r = c.norm().clamp(0.0, 1.0);
        let omega = r.acos();
        let aligned = Qubit {
            a: sigma1.a * (c.conj() / r),
            b: sigma1.b * (c.conj() / r),
        };
        let sin_omega = omega.sin();
        let sigma_at = |t: f64| -> Qubit {
            if t >= 1.0 {
                return aligned;
            }
            Qubit::combine(
                ((1.0 - t) * omega).sin() / sin_omega,
                &sigma0,
                (t * omega).sin() / sin_omega,
                &aligned,
            )
            .normalized()
        };

        let mut points = Vec::with_capacity(steps);
        for k in 1..=steps {
            let t = k as f64 / steps as f64;
            let sigma = sigma_at(t);
            let mut alpha = beta.clone();
            alpha.set(id.column, Symbol::new(id.removed, false), sigma)?;
            let generic = alpha.is_generic_for(x, tol)?;
            if k < steps && !generic {
                // An interior coincidence: restart with a fresh circle.
                retries += 1;
                if retries > PATH_RETRY_CAP {
                    return Err(Error::Numeric(
                        "closure path kept hitting non-generic interior points".into(),
                    ));
                }
                continue 'attempt;
            }
            let products = evaluate(x, &alpha, tol)?;
            let dev = deviation(&products, &target_products)?;
            points.push(ClosurePoint {
                t,
                deviation: dev,
                generic,
            });
        }
        let terminal_deviation = points.last().expect("steps >= 1").deviation;
        return Ok(ClosureReport {
            points,
            terminal_deviation,
            retries,
            seed,
        });
    }
}

/// The three-qubit one-parameter family of four orthogonal product vectors
/// whose third column rotates with t: an unextendible product basis for
/// t ∈ (0, π/2) but extendible at the endpoints.
pub fn tilted_ops(t: f64) -> ProductSet {
    let rot = Qubit::real(t.cos(), t.sin()).unwrap();
    let rot_perp = Qubit::real(-t.sin(), t.cos()).unwrap();
    ProductSet::from_rows(
        vec![
            vec![Qubit::ket0(), Qubit::ket0(), Qubit::ket0()],
            vec![Qubit::ket1(), Qubit::minus(), rot],
            vec![Qubit::plus(), Qubit::ket1(), rot_perp],
            vec![Qubit::minus(), Qubit::plus(), Qubit::ket1()],
        ],
        None,
    )
    .expect("fixed construction is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unextend::find_extension;

    fn mx(text: &str) -> VarMatrix {
        VarMatrix::parse(text).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn perpendicular_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let q = haar_qubit(&mut rng);
            let p = q.perp();
            assert_eq!(q.inner(&p), Complex64::new(0.0, 0.0));
            // Applying perp twice returns to the ray (opposite vector).
            assert!(p.perp().overlap(&q) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn phase_normalization_fixes_global_phase() {
        let v = Qubit::real(-1.0, 0.0).unwrap().phase_normalized();
        assert!((v.a.re - 1.0).abs() < 1e-15 && v.a.im.abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = haar_qubit(&mut rng);
        let phase = Complex64::from_polar(1.0, 1.234);
        let rotated = Qubit {
            a: q.a * phase,
            b: q.b * phase,
        };
        assert!(
            rotated
                .phase_normalized()
                .overlap(&q.phase_normalized())
                > 1.0 - 1e-12
        );
        let pn = rotated.phase_normalized();
        assert!(pn.a.im.abs() < 1e-12 && pn.a.re >= 0.0);
    }

    #[test]
    fn computational_basis_evaluation() {
        let x = mx("a A");
        let mut alpha = Evaluation::new(1);
        alpha.set(0, Symbol::from_char('a').unwrap(), Qubit::ket0()).unwrap();
        let p = evaluate(&x, &alpha, tol()).unwrap();
        assert_eq!(p.component(0, 0), &Qubit::ket0());
        assert_eq!(p.component(1, 0), &Qubit::ket1());
        assert!(p.is_pairwise_orthogonal(tol()));
    }

    #[test]
    fn evaluation_errors() {
        let x = mx("ab aB Ac AC");
        let mut alpha = Evaluation::new(2);
        alpha.set(0, Symbol::from_char('a').unwrap(), Qubit::ket0()).unwrap();
        alpha.set(1, Symbol::from_char('b').unwrap(), Qubit::plus()).unwrap();
        match evaluate(&x, &alpha, tol()) {
            Err(Error::MissingAssignment { col: 2, letter: 'c' }) => {}
            other => panic!("expected missing assignment, got {other:?}"),
        }
        alpha.set(1, Symbol::from_char('c').unwrap(), Qubit::ket0()).unwrap();
        // Store an explicit primed vector that is not perpendicular.
        alpha.set(1, Symbol::from_char('C').unwrap(), Qubit::plus()).unwrap();
        match evaluate(&x, &alpha, tol()) {
            Err(Error::InvolutionViolation { col: 2, letter: 'c' }) => {}
            other => panic!("expected involution violation, got {other:?}"),
        }
    }

    #[test]
    fn sampling_is_seed_deterministic_and_generic() {
        let x = mx("xyzw Xbde aYDf AcZE aBdW XCDF");
        let a1 = sample_generic(&x, 7, tol()).unwrap();
        let a2 = sample_generic(&x, 7, tol()).unwrap();
        let a3 = sample_generic(&x, 8, tol()).unwrap();
        let p1 = evaluate(&x, &a1, tol()).unwrap();
        let p2 = evaluate(&x, &a2, tol()).unwrap();
        let p3 = evaluate(&x, &a3, tol()).unwrap();
        assert_eq!(p1, p2);
        assert_ne!(p1, p3);
        assert!(a1.is_generic_for(&x, tol()).unwrap());
        assert!(p1.is_pairwise_orthogonal(tol()));
    }

    #[test]
    fn generic_products_of_uoms_are_upbs() {
        for text in ["a A", "ab aB Ac AC", "ace ADf bCF BdE"] {
            let x = mx(text);
            for seed in 0..5 {
                let alpha = sample_generic(&x, seed, tol()).unwrap();
                let p = evaluate(&x, &alpha, tol()).unwrap();
                let check = numeric_is_upb(&p, tol()).unwrap();
                assert!(check.is_upb, "{text} seed {seed}");
            }
        }
    }

    #[test]
    fn extendible_matrix_products_have_valid_witnesses() {
        let y = mx("ace ADe bCE BdE");
        for seed in 0..5 {
            let alpha = sample_generic(&y, seed, tol()).unwrap();
            let p = evaluate(&y, &alpha, tol()).unwrap();
            let check = numeric_is_upb(&p, tol()).unwrap();
            assert!(!check.is_upb);
            let w = check.witness.unwrap();
            for i in 0..p.m() {
                let overlap: f64 = (0..p.n())
                    .map(|j| w[j].overlap(p.component(i, j)))
                    .product();
                assert!(overlap < tol().ortho, "witness not orthogonal to row {i}");
            }
        }
    }

    #[test]
    fn tilted_family_is_orthogonal_everywhere_and_upb_inside() {
        for t in [0.0, 0.3, 0.8, std::f64::consts::FRAC_PI_2] {
            assert!(tilted_ops(t).is_pairwise_orthogonal(tol()), "t={t}");
        }
        assert!(numeric_is_upb(&tilted_ops(0.3), tol()).unwrap().is_upb);
        assert!(numeric_is_upb(&tilted_ops(1.2), tol()).unwrap().is_upb);
    }

    #[test]
    fn tilted_endpoint_has_the_expected_witness() {
        let check = numeric_is_upb(&tilted_ops(0.0), tol()).unwrap();
        assert!(!check.is_upb);
        let w = check.witness.unwrap();
        let expected = [Qubit::ket1(), Qubit::plus(), Qubit::ket0()];
        for (got, want) in w.iter().zip(expected.iter()) {
            assert!(got.overlap(want) > 1.0 - 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn recovery_of_the_computational_basis() {
        let p = ProductSet::from_rows(
            vec![vec![Qubit::ket0()], vec![Qubit::ket1()]],
            None,
        )
        .unwrap();
        assert_eq!(recover_uom(&p, tol()).unwrap(), mx("a A"));
    }

    #[test]
    fn recovery_round_trips_through_evaluation() {
        for text in ["a A", "ab aB Ac AC", "ace ADf bCF BdE", "xyzw Xbde aYDf AcZE aBdW XCDF"] {
            let x = mx(text);
            let alpha = sample_generic(&x, 11, tol()).unwrap();
            let p = evaluate(&x, &alpha, tol()).unwrap();
            let recovered = recover_uom(&p, tol()).unwrap();
            assert!(
                crate::equiv::are_equivalent(&recovered, &x),
                "recovery of {text} not equivalent"
            );
        }
    }

    #[test]
    fn recovered_endpoint_family_is_extendible_symbolically() {
        let recovered = recover_uom(&tilted_ops(0.0), tol()).unwrap();
        assert_eq!(recovered.m(), 4);
        assert_eq!(recovered.n(), 3);
        assert!(find_extension(&recovered).unwrap().is_some());
    }

    #[test]
    fn extending_an_evaluation_reproduces_the_products() {
        let x = mx("ab aB Ac AC");
        for id_text in ["c2=b2", "c2=B2"] {
            let id: Identification = id_text.parse().unwrap();
            let y = apply_identification(&x, &id).unwrap();
            let beta = sample_generic(&y, 3, tol()).unwrap();
            let alpha = extend_evaluation(&x, &id, &beta).unwrap();
            let from_x = evaluate(&x, &alpha, tol()).unwrap();
            let from_y = evaluate(&y, &beta, tol()).unwrap();
            assert!(deviation(&from_x, &from_y).unwrap() < 1e-12, "{id_text}");
        }
    }

    #[test]
    fn closure_path_converges_with_generic_interior() {
        let x = mx("ab aB Ac AC");
        let id: Identification = "c2=b2".parse().unwrap();
        let y = apply_identification(&x, &id).unwrap();
        let beta = sample_generic(&y, 5, tol()).unwrap();
        let report = closure_path(&x, &id, &beta, 16, 9, tol()).unwrap();
        assert_eq!(report.points.len(), 16);
        assert!(report.terminal_deviation < 1e-9);
        for point in &report.points[..15] {
            assert!(point.generic, "interior point t={} not generic", point.t);
            assert!(point.deviation > 0.0);
        }
        // Deviation shrinks towards the endpoint.
        assert!(report.points[14].deviation < report.points[0].deviation);
    }

    #[test]
    fn closure_path_endpoint_only() {
        let x = mx("ab aB Ac AC");
        let id: Identification = "c2=B2".parse().unwrap();
        let y = apply_identification(&x, &id).unwrap();
        let beta = sample_generic(&y, 5, tol()).unwrap();
        let report = closure_path(&x, &id, &beta, 1, 2, tol()).unwrap();
        assert_eq!(report.points.len(), 1);
        assert!(report.terminal_deviation < 1e-12);
    }

    #[test]
    fn closure_path_rejects_non_generic_targets() {
        let x = mx("ab aB Ac AC");
        let id: Identification = "c2=b2".parse().unwrap();
        let mut beta = Evaluation::new(2);
        beta.set(0, Symbol::from_char('a').unwrap(), Qubit::ket0()).unwrap();
        beta.set(1, Symbol::from_char('b').unwrap(), Qubit::plus()).unwrap();
        // The identified matrix has one letter per column, so beta is
        // vacuously generic and the path runs.
        assert!(closure_path(&x, &id, &beta, 4, 1, tol()).is_ok());

        let z = mx("ab aB Ab AB");
        let id2: Identification = "b2=a2".parse().unwrap();
        // Identification needs two letters in the column; z has one, so the
        // path construction must reject it upfront.
        assert!(closure_path(&z, &id2, &beta, 4, 1, tol()).is_err());
    }

    #[test]
    fn product_set_serializes_amplitude_pairs() {
        let p = ProductSet::from_rows(vec![vec![Qubit::ket0(), Qubit::plus()]], None).unwrap();
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["rows"][0][0][0][0], 1.0);
        assert_eq!(v["rows"][0][0][0][1], 0.0);
        let b = v["rows"][0][1][1][0].as_f64().unwrap();
        assert!((b - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(v["seed"].is_null());
    }

    #[test]
    fn tolerance_validation() {
        assert!(tol().validate().is_ok());
        let bad = Tolerances {
            ortho: 0.0,
            ..tol()
        };
        assert!(bad.validate().is_err());
    }
}
