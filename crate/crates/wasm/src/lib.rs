//! Browser bindings: thin string-in/string-out wrappers around the core
//! kernels, compiled to WebAssembly for the static demo page in `www/`.
//!
//! Every exported function takes matrix text (rows of letters, whitespace
//! separated, an uppercase letter being the primed companion of its lowercase
//! twin) and returns a JSON string:
//!
//! * on success `{"report": ..., "text": "..."}`, where `report` has exactly
//!   the shape of the corresponding CLI JSON output (the schemas shipped in
//!   `crates/cli/schemas/` apply verbatim) and `text` is the CLI's plain
//!   rendering;
//! * on failure `{"error": "..."}`, so callers never need to catch exceptions.
//!
//! The functions are ordinary Rust functions as well, which is how the test
//! suite drives them on the host without a browser.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use uom_core::report::{CanonReport, CheckReport, EquivReport};
use uom_core::VarMatrix;

fn emit<T: Serialize>(report: &T, text: String) -> String {
    serde_json::json!({ "report": report, "text": text }).to_string()
}

fn fail(message: impl ToString) -> String {
    serde_json::json!({ "error": message.to_string() }).to_string()
}

fn parse(input: &str) -> Result<VarMatrix, String> {
    VarMatrix::parse(input).map_err(|e| e.to_string())
}

/// Orthogonality, unextendibility, and level statistics of one matrix.
///
/// Reports the first non-orthogonal row pair when there is one, and the
/// lexicographically first extension row when the matrix is extendible.
#[wasm_bindgen]
pub fn check_matrix(input: &str) -> String {
    let x = match parse(input) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    match CheckReport::for_matrix(&x) {
        Ok(report) => {
            let text = report.text();
            emit(&report, text)
        }
        Err(e) => fail(e),
    }
}

/// Canonical form of one matrix: the class key in hex, the canonical
/// representative, and the row/column/renaming transform that reaches it.
#[wasm_bindgen]
pub fn canonical_info(input: &str) -> String {
    match parse(input) {
        Ok(x) => {
            let report = CanonReport::for_matrix(&x);
            let text = report.text();
            emit(&report, text)
        }
        Err(e) => fail(e),
    }
}

/// Equivalence verdict for two matrices under row/column permutation and
/// involution-respecting renaming, with both class keys.
#[wasm_bindgen]
pub fn equivalence(a: &str, b: &str) -> String {
    let left = match parse(a) {
        Ok(x) => x,
        Err(e) => return fail(format!("left matrix: {e}")),
    };
    let right = match parse(b) {
        Ok(x) => x,
        Err(e) => return fail(format!("right matrix: {e}")),
    };
    let report = EquivReport::for_pair(&left, &right);
    let text = report.text();
    emit(&report, text)
}
