//! Realization certificates, their JSON form and an independent verifier.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::math::arith::factor;
use crate::math::group::FiniteAbelianGroup;
use crate::math::lattice::IntegerLattice;
use crate::math::poly::is_squarefree;
use crate::orders::{frobenius_order, group_of_points, FractionalIdeal, OrderError};
use crate::weil::{validate, FieldSize, WeilPolynomial};

pub const CERTIFICATE_VERSION: u32 = 1;

/// One factor of the realizing variety: an isogeny class and an ideal in
/// its algebra whose group of points is `group`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificatePart {
    pub weil: WeilPolynomial,
    pub ideal: FractionalIdeal,
    pub group: FiniteAbelianGroup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFlags {
    pub all_ordinary: bool,
    /// Total `p`-rank is one less than total dimension.
    pub almost_ordinary: bool,
    pub square_free_parts: bool,
}

impl CertificateFlags {
    fn compute<'a>(parts: impl Iterator<Item = &'a WeilPolynomial> + Clone) -> Self {
        let g: usize = parts.clone().map(|w| w.dimension()).sum();
        let rank: usize = parts.clone().map(|w| w.p_rank()).sum();
        CertificateFlags {
            all_ordinary: parts.clone().all(|w| w.is_ordinary()),
            almost_ordinary: g >= 1 && rank + 1 == g,
            square_free_parts: parts.clone().all(|w| is_squarefree(w.poly())),
        }
    }
}

/// A variety `∏ B_i` over `F_q`, given by its factors, with
/// `∏ B_i(F_q) ≅ target`. No parts means the zero-dimensional variety.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizationCertificate {
    q: u64,
    target: FiniteAbelianGroup,
    parts: Vec<CertificatePart>,
    flags: CertificateFlags,
}

impl RealizationCertificate {
    /// # Panics
    /// If the parts' groups do not multiply to `target`.
    pub fn new(q: u64, target: FiniteAbelianGroup, parts: Vec<CertificatePart>) -> Self {
        let product = parts
            .iter()
            .fold(FiniteAbelianGroup::trivial(), |acc, p| acc.direct_product(&p.group));
        assert_eq!(product, target, "parts do not realize the target group");
        let flags = CertificateFlags::compute(parts.iter().map(|p| &p.weil));
        RealizationCertificate { q, target, parts, flags }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn target(&self) -> &FiniteAbelianGroup {
        &self.target
    }

    pub fn parts(&self) -> &[CertificatePart] {
        &self.parts
    }

    pub fn flags(&self) -> CertificateFlags {
        self.flags
    }

    pub fn dimension_total(&self) -> usize {
        self.parts.iter().map(|p| p.weil.dimension()).sum()
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            q: self.q.to_string(),
            group: strings(self.target.invariant_factors()),
            parts: self
                .parts
                .iter()
                .map(|p| PartJson {
                    coeffs: strings(&p.weil.coefficients()),
                    ideal: LatticeJson::from_lattice(p.ideal.lattice()),
                    group: strings(p.group.invariant_factors()),
                    ordinary: p.weil.is_ordinary(),
                    p_rank: p.weil.p_rank(),
                })
                .collect(),
            flags: self.flags,
            version: CERTIFICATE_VERSION,
        }
    }
}

fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

/// `{"denominator": d, "rows": [[…]]}` in the power basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub denominator: String,
    pub rows: Vec<Vec<String>>,
}

impl LatticeJson {
    pub fn from_lattice(l: &IntegerLattice) -> Self {
        LatticeJson {
            denominator: l.denominator().to_string(),
            rows: l.basis().iter().map(|r| strings(r)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartJson {
    pub coeffs: Vec<String>,
    pub ideal: LatticeJson,
    pub group: Vec<String>,
    pub ordinary: bool,
    pub p_rank: usize,
}

/// Serialized certificate. Integers other than `p_rank` and `version` are
/// decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub q: String,
    pub group: Vec<String>,
    pub parts: Vec<PartJson>,
    pub flags: CertificateFlags,
    pub version: u32,
}

impl CertificateJson {
    pub fn to_pretty_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// One verification failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    /// Dotted path into the certificate, e.g. `parts[1].group`.
    pub field: String,
    pub claimed: String,
    pub computed: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: claimed {}, computed {}", self.field, self.claimed, self.computed)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub mismatches: Vec<Mismatch>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    fn push(&mut self, field: impl Into<String>, claimed: impl fmt::Display, computed: impl fmt::Display) {
        self.mismatches.push(Mismatch {
            field: field.into(),
            claimed: claimed.to_string(),
            computed: computed.to_string(),
        });
    }
}

fn parse_ints(v: &[String]) -> Option<Vec<BigInt>> {
    v.iter().map(|s| s.parse().ok()).collect()
}

fn parse_group(v: &[String]) -> Option<FiniteAbelianGroup> {
    FiniteAbelianGroup::new(parse_ints(v)?).ok()
}

fn is_squarefree_integer(n: &BigInt) -> bool {
    !n.is_zero() && factor(n.magnitude()).map(|f| f.iter().all(|(_, e)| *e == 1)).unwrap_or(false)
}

/// Rechecks a serialized certificate from scratch: every polynomial is
/// revalidated, every ideal is checked to be stable under `Z[π, π̄]`, every
/// group is recomputed as `I / (π - 1) I`, and the flags and the product of
/// the groups are compared with the claims.
///
/// The ideal model is only trusted for ordinary classes and for classes
/// over a prime field without real roots. Any other part is accepted only
/// when `|f(1)|` is square-free, since then every group of that order is
/// cyclic.
pub fn verify_certificate(c: &CertificateJson) -> VerificationReport {
    let mut report = VerificationReport::default();
    if c.version != CERTIFICATE_VERSION {
        report.push("version", c.version, CERTIFICATE_VERSION);
    }
    let Some(field) = c.q.parse::<u64>().ok().and_then(|q| FieldSize::new(q).ok()) else {
        report.push("q", &c.q, "not a prime power");
        return report;
    };
    let Some(target) = parse_group(&c.group) else {
        report.push("group", format!("{:?}", c.group), "not an invariant-factor list");
        return report;
    };
    let mut product = FiniteAbelianGroup::trivial();
    let mut weils = Vec::new();
    for (k, part) in c.parts.iter().enumerate() {
        let at = |s: &str| format!("parts[{k}].{s}");
        let Some(coeffs) = parse_ints(&part.coeffs) else {
            report.push(at("coeffs"), format!("{:?}", part.coeffs), "not integers");
            continue;
        };
        let w = match validate(&coeffs, field.q()) {
            Ok(w) => w,
            Err(e) => {
                report.push(at("coeffs"), format!("{:?}", part.coeffs), e);
                continue;
            }
        };
        if w.p_rank() != part.p_rank {
            report.push(at("p_rank"), part.p_rank, w.p_rank());
        }
        if w.is_ordinary() != part.ordinary {
            report.push(at("ordinary"), part.ordinary, w.is_ordinary());
        }
        match verify_part_group(&w, part) {
            Ok(g) => product = product.direct_product(&g),
            Err(reason) => report.push(at("group"), format!("{:?}", part.group), reason),
        }
        weils.push(w);
    }
    if weils.len() == c.parts.len() {
        let flags = CertificateFlags::compute(weils.iter());
        if flags != c.flags {
            report.push("flags", format!("{:?}", c.flags), format!("{flags:?}"));
        }
        if report.passed() && product != target {
            report.push("group", &target, &product);
        }
    }
    report
}

fn verify_part_group(w: &WeilPolynomial, part: &PartJson) -> Result<FiniteAbelianGroup, String> {
    let claimed = parse_group(&part.group).ok_or("not an invariant-factor list")?;
    let order = frobenius_order(w).map_err(|e| e.to_string())?;
    let den: BigInt = part.ideal.denominator.parse().map_err(|_| "bad denominator")?;
    let rows: Vec<Vec<BigInt>> = part
        .ideal
        .rows
        .iter()
        .map(|r| parse_ints(r).ok_or("bad ideal entry"))
        .collect::<Result<_, _>>()?;
    let n = 2 * w.dimension();
    let lattice = IntegerLattice::from_scaled_rows(&rows, den, n).map_err(|e| e.to_string())?;
    let ideal = FractionalIdeal::new(order, lattice).map_err(|e| match e {
        OrderError::NotStable => "ideal is not stable under π and π̄".to_string(),
        e => e.to_string(),
    })?;
    let computed = group_of_points(&ideal).map_err(|e| e.to_string())?;
    if computed != claimed {
        return Err(format!("{computed}"));
    }
    let model_applies = w.is_ordinary() || (w.field().is_prime() && !w.has_real_root());
    if !model_applies && !is_squarefree_integer(&w.point_count().abs()) {
        return Err("group of a non-ordinary class outside the ideal model".to_string());
    }
    Ok(computed)
}
