//! LMFDB-style isogeny class labels `g.q.c_1_c_2_…_c_g`.
//!
//! Each `c_i` is the base-26 spelling of `|a_i|` in the letters `a`–`z`
//! (`a` = 0), with an extra leading `a` for negative values.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::WeilError;

fn base26(n: &BigInt) -> String {
    if n.is_zero() {
        return "a".to_string();
    }
    let radix = BigInt::from(26);
    let mut digits = Vec::new();
    let mut n = n.clone();
    while !n.is_zero() {
        let (q, r) = n.div_rem(&radix);
        digits.push(b'a' + r.to_u8().unwrap());
        n = q;
    }
    digits.reverse();
    String::from_utf8(digits).unwrap()
}

pub fn encode_coefficient(a: &BigInt) -> String {
    if a.is_negative() {
        format!("a{}", base26(&-a))
    } else {
        base26(a)
    }
}

fn decode_coefficient(token: &str, label: &str) -> Result<BigInt, WeilError> {
    let bad = || WeilError::MalformedLabel(label.to_string());
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_lowercase()) {
        return Err(bad());
    }
    let (negative, digits) = match token.strip_prefix('a') {
        Some("") => return Ok(BigInt::zero()),
        Some(rest) => (true, rest),
        None => (false, token),
    };
    // a second leading `a` would be a padded zero digit
    if digits.starts_with('a') {
        return Err(bad());
    }
    let mut n = BigInt::zero();
    for b in digits.bytes() {
        n = n * 26 + (b - b'a');
    }
    Ok(if negative { -n } else { n })
}

pub fn encode_label(g: usize, q: u64, half: &[BigInt]) -> String {
    let coeffs: Vec<String> = half.iter().map(encode_coefficient).collect();
    format!("{g}.{q}.{}", coeffs.join("_"))
}

/// Parses a label into `(g, q, [a_1, …, a_g])`. Weil-ness is not checked.
pub fn decode_label(label: &str) -> Result<(usize, u64, Vec<BigInt>), WeilError> {
    let bad = || WeilError::MalformedLabel(label.to_string());
    let mut parts = label.splitn(3, '.');
    let (Some(g), Some(q), Some(coeffs)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(bad());
    };
    let digits_only = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits_only(g) || !digits_only(q) {
        return Err(bad());
    }
    let g: usize = g.parse().map_err(|_| bad())?;
    let q: u64 = q.parse().map_err(|_| bad())?;
    if g == 0 {
        return Err(bad());
    }
    let half = coeffs
        .split('_')
        .map(|t| decode_coefficient(t, label))
        .collect::<Result<Vec<_>, _>>()?;
    if half.len() != g {
        return Err(bad());
    }
    Ok((g, q, half))
}
