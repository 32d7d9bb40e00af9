//! Text format for cached enumerations.
//!
//! ```text
//! q=2 g=1 version=1
//! -2
//! -1
//! 0,-2
//! ```
//!
//! A palindromic polynomial is stored as `a_1,…,a_g`; the others (an odd
//! power of `x^2 - q`) carry all of `a_1,…,a_2g`.

use num_bigint::BigInt;
use thiserror::Error;

use super::{complete_palindromic, validate_poly, FieldSize, WeilError, WeilPolynomial};
use crate::math::poly::IntPolynomial;

pub const CORPUS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("bad corpus header {0:?}")]
    BadHeader(String),
    #[error("line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("corpus is for q={found_q} g={found_g}, expected q={q} g={g}")]
    WrongParameters { q: u64, g: usize, found_q: u64, found_g: usize },
}

pub fn corpus_header(q: u64, g: usize) -> String {
    format!("q={q} g={g} version={CORPUS_VERSION}")
}

pub fn format_corpus(q: u64, g: usize, polys: &[WeilPolynomial]) -> String {
    let mut out = corpus_header(q, g);
    out.push('\n');
    for w in polys {
        let coeffs = if w.is_palindromic() { w.half_coefficients() } else { w.coefficients()[1..].to_vec() };
        let line: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn parse_header(line: &str) -> Option<(u64, usize)> {
    let mut parts = line.split(' ');
    let q = parts.next()?.strip_prefix("q=")?.parse().ok()?;
    let g = parts.next()?.strip_prefix("g=")?.parse().ok()?;
    let version: u32 = parts.next()?.strip_prefix("version=")?.parse().ok()?;
    (parts.next().is_none() && version == CORPUS_VERSION).then_some((q, g))
}

/// Parses and revalidates a corpus for `(q, g)`. Entries must be strictly
/// increasing in coefficient order.
pub fn parse_corpus(text: &str, q: u64, g: usize) -> Result<Vec<WeilPolynomial>, CorpusError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let (found_q, found_g) = parse_header(header).ok_or_else(|| CorpusError::BadHeader(header.to_string()))?;
    if (found_q, found_g) != (q, g) {
        return Err(CorpusError::WrongParameters { q, g, found_q, found_g });
    }
    let field = FieldSize::new(q).map_err(|e| CorpusError::BadHeader(e.to_string()))?;
    let mut out: Vec<WeilPolynomial> = Vec::new();
    for (k, line) in lines.enumerate() {
        let bad = |reason: String| CorpusError::BadLine { line: k + 2, reason };
        let coeffs = line
            .split(',')
            .map(|t| t.parse::<BigInt>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(e.to_string()))?;
        let f = if coeffs.len() == g {
            complete_palindromic(q, g, &coeffs)
        } else if coeffs.len() == 2 * g {
            let mut desc = vec![BigInt::from(1)];
            desc.extend(coeffs);
            IntPolynomial::from_descending(&desc)
        } else {
            return Err(bad(format!("expected {g} or {} coefficients", 2 * g)));
        };
        let w = validate_poly(f, field).map_err(|e: WeilError| bad(e.to_string()))?;
        if let Some(prev) = out.last() {
            if prev.coefficients() >= w.coefficients() {
                return Err(bad("entries out of order".to_string()));
            }
        }
        out.push(w);
    }
    Ok(out)
}
