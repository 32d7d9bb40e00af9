//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use fqgroups::math::group::{enumerate_abelian_groups, FiniteAbelianGroup};
use fqgroups::math::lattice::{brute_force_group, quotient_group, snf_invariants, IntegerLattice};
use fqgroups::math::poly::{is_squarefree, squarefree_part, IntPolynomial};
use fqgroups::math::quadratic::QuadraticRingElement;
use fqgroups::math::sturm::sturm_count;
use fqgroups::orders::{
    frobenius_order, group_of_points, maximal_order, verschiebung_acts_as_q, FractionalIdeal, DEFAULT_CANDIDATE_CAP,
};
use fqgroups::realize::{
    dimension_bound, nonexistence_check, verify_certificate, CertificateJson, NonexistenceOutcome,
    ObstructionReason,
};
use fqgroups::weil::{enumerate, newton_polygon_p_rank, validate_i64, WeilPolynomial};
use fqgroups_cli::{cmd_batches, cmd_realize, cmd_search, BatchesArgs, Context, RealizeArgs, SearchArgs};

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn grp(f: &[u64]) -> FiniteAbelianGroup {
    FiniteAbelianGroup::from_u64s(f).unwrap()
}

fn group_arg(g: &FiniteAbelianGroup) -> String {
    if g.is_trivial() {
        "1".into()
    } else {
        g.invariant_factors().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
    }
}

fn golden_values() -> Check {
    let start = Instant::now();
    let surface = validate_i64(&[1, -3, 7, -12, 16], 4).map_err(|e| e.to_string())?;
    ensure(surface.point_count() == BigInt::from(9), || "2.4.ad_h point count".into())?;
    ensure(surface.is_ordinary(), || "2.4.ad_h ordinary".into())?;
    let max = maximal_order(&frobenius_order(&surface).unwrap(), DEFAULT_CANDIDATE_CAP).unwrap();
    let g = group_of_points(&FractionalIdeal::unit(&max)).unwrap();
    ensure(g == grp(&[3, 3]), || format!("maximal order group {g}"))?;

    let e = validate_i64(&[1, -2, 4], 4).unwrap();
    ensure(e.point_count() == BigInt::from(3) && e.p_rank() == 0, || "1.4.ac".into())?;
    ensure(e.label().as_deref() == Some("1.4.ac"), || "1.4.ac label".into())?;

    let sq = validate_i64(&[1, 0, -4, 0, 4], 2).unwrap();
    ensure(sq.point_count() == BigInt::one(), || "(x^2-2)^2 point count".into())?;
    ensure(!is_squarefree(sq.poly()) && sq.has_real_root(), || "(x^2-2)^2 predicates".into())?;
    ensure(sq.label().as_deref() == Some("2.2.a_ae"), || "(x^2-2)^2 label".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))
}

fn search_replay(transcript: &mut String) -> Check {
    let ctx = Context::default();
    for m in 1..=300u64 {
        let args = SearchArgs {
            q: 2,
            points: m.to_string(),
            max_dim: dimension_bound(&BigInt::from(m)),
            ordinary: true,
            square_free: true,
            irreducible: false,
            cs: false,
            all: false,
            first: Some(1),
        };
        let out = cmd_search(&ctx, &args);
        transcript.push_str(&out.stdout);
        ensure(out.code == 0, || format!("m = {m}: exit {} {}", out.code, out.stderr))?;
    }
    Ok(())
}

fn cyclicity_sweep() -> Check {
    let mut checked = 0;
    for q in [2u64, 3, 5, 7] {
        for g in 1..=3 {
            for w in enumerate(q, g).unwrap() {
                let cs = w.field().is_prime() && !w.has_real_root();
                if !is_squarefree(w.poly()) || !(w.is_ordinary() || cs) {
                    continue;
                }
                let ideal = FractionalIdeal::unit(&frobenius_order(&w).unwrap());
                let group = group_of_points(&ideal).unwrap();
                let expected = FiniteAbelianGroup::from_cyclic_orders(&[w.point_count().abs()]).unwrap();
                ensure(group == expected, || format!("{w}: group {group}"))?;
                ensure(verschiebung_acts_as_q(&ideal).unwrap(), || format!("{w}: π̄ is not q"))?;
                checked += 1;
            }
        }
    }
    ensure(checked > 1000, || format!("only {checked} classes"))
}

fn parse_certificate(text: &str) -> Result<CertificateJson, String> {
    CertificateJson::parse(text).map_err(|e| e.to_string())
}

/// The F_4 construction needs the supersingular curve exactly when the
/// group is a 3-group with an odd number of `Z/3` primary factors.
fn f4_needs_supersingular(g: &FiniteAbelianGroup) -> bool {
    let threes = g.primary_decomposition().iter().filter(|s| **s == BigInt::from(3)).count();
    threes % 2 == 1 && g.is_p_group(3)
}

fn realize_replay(transcript: &mut String) -> Check {
    for n in 1..=48u64 {
        for g in enumerate_abelian_groups(n) {
            for q in [2u64, 3, 4, 5] {
                let args = RealizeArgs { q, group: group_arg(&g), max_dim: None, out: None };
                let out = cmd_realize(&args);
                transcript.push_str(&out.stdout);
                let ctx = || format!("{g} over F_{q}");
                ensure(out.code == 0, || format!("{}: exit {} {}", ctx(), out.code, out.stderr))?;
                let cert = parse_certificate(&out.stdout)?;
                let report = verify_certificate(&cert);
                ensure(report.passed(), || format!("{}: {:?}", ctx(), report.mismatches))?;
                ensure(cert.flags.square_free_parts, || format!("{}: parts not square-free", ctx()))?;
                if q == 4 {
                    let expect = f4_needs_supersingular(&g);
                    ensure(cert.flags.almost_ordinary == expect, || format!("{}: almost-ordinary flag", ctx()))?;
                    ensure(cert.flags.all_ordinary == !expect, || format!("{}: ordinary flag", ctx()))?;
                } else {
                    ensure(cert.flags.all_ordinary, || format!("{}: not all ordinary", ctx()))?;
                }
            }
        }
    }
    let out = cmd_realize(&RealizeArgs { q: 4, group: "3".into(), max_dim: None, out: None });
    let cert = parse_certificate(&out.stdout)?;
    let labels: Vec<Option<String>> = cert
        .parts
        .iter()
        .map(|p| {
            let c: Vec<i64> = p.coeffs.iter().map(|s| s.parse().unwrap()).collect();
            validate_i64(&c, 4).unwrap().label()
        })
        .collect();
    ensure(labels == vec![Some("1.4.ac".to_string())], || format!("[3] over F_4 gave {labels:?}"))
}

fn f4_exception() -> Check {
    let args = SearchArgs {
        q: 4,
        points: "3".into(),
        max_dim: 4,
        ordinary: true,
        square_free: false,
        irreducible: false,
        cs: false,
        all: true,
        first: None,
    };
    let out = cmd_search(&Context::default(), &args);
    ensure(out.code == 2, || format!("exit {}", out.code))?;
    let report: Value = serde_json::from_str(&out.stdout).map_err(|e| e.to_string())?;
    ensure(report["exhaustive"] == Value::Bool(true), || "not exhaustive".into())?;
    ensure(report["hits"].as_array().is_some_and(|h| h.is_empty()), || "hits present".into())
}

fn prime_power_char(q: u64) -> Option<u64> {
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut r = q;
    while r % p == 0 {
        r /= p;
    }
    (r == 1).then_some(p)
}

fn exponent_obstructions() -> Check {
    for q in 2..=64u64 {
        if prime_power_char(q).is_none() {
            continue;
        }
        for r in 1..=4 {
            let g = grp(&vec![2; r]);
            let outcome = nonexistence_check(&g, q).map_err(|e| e.to_string())?;
            let expected = q == 8 || q > 9;
            let obstructed = matches!(outcome, NonexistenceOutcome::Obstructed(_));
            ensure(obstructed == expected, || format!("(Z/2)^{r} over F_{q}: {outcome:?}"))?;
            if q == 8 {
                let NonexistenceOutcome::Obstructed(rep) = outcome else { unreachable!() };
                ensure(rep.reason == ObstructionReason::ExponentBoundPPower, || "q = 8 reason".into())?;
            }
        }
    }
    Ok(())
}

fn batch_replay(transcript: &mut String) -> Check {
    for n in 1..=12u64 {
        let out = cmd_batches(&BatchesArgs { n, count: 3, max_dim: 4, out: None });
        transcript.push_str(&out.stdout);
        ensure(out.code == 0, || format!("n = {n}: exit {} {}", out.code, out.stderr))?;
        let report: Value = serde_json::from_str(&out.stdout).map_err(|e| e.to_string())?;
        ensure(report["pairwise_coprime"] == Value::Bool(true), || format!("n = {n}: not coprime"))?;
        let batches = report["batches"].as_array().unwrap();
        ensure(batches.len() >= 3, || format!("n = {n}: {} batches", batches.len()))?;
        let groups = enumerate_abelian_groups(n);
        let mut all_factors: Vec<WeilPolynomial> = Vec::new();
        for b in batches {
            let certs = b["certificates"].as_array().unwrap();
            ensure(certs.len() == groups.len(), || format!("n = {n}: {} certificates", certs.len()))?;
            for (c, g) in certs.iter().zip(&groups) {
                let cert: CertificateJson = serde_json::from_value(c.clone()).map_err(|e| e.to_string())?;
                let claimed: Vec<BigInt> = cert.group.iter().map(|s| s.parse().unwrap()).collect();
                ensure(claimed == g.invariant_factors(), || format!("n = {n}: group order"))?;
                let report = verify_certificate(&cert);
                ensure(report.passed(), || format!("n = {n}, {g}: {:?}", report.mismatches))?;
            }
            for f in b["factors"].as_array().unwrap() {
                let c: Vec<i64> = f["coeffs"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().parse().unwrap()).collect();
                all_factors.push(validate_i64(&c, 2).unwrap());
            }
        }
        // distinct irreducible factors make the batch products pairwise coprime
        for (i, a) in all_factors.iter().enumerate() {
            ensure(fqgroups::weil::is_irreducible(a).unwrap(), || format!("n = {n}: {a} reducible"))?;
            ensure(all_factors[..i].iter().all(|b| b != a), || format!("n = {n}: {a} reused"))?;
        }
    }
    Ok(())
}

fn bareiss_det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else { return BigInt::zero() };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> Vec<Vec<BigInt>> {
    (0..n).map(|_| (0..n).map(|_| BigInt::from(rng.gen_range(-bound..=bound))).collect()).collect()
}

fn oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut pairs = 0;
    while pairs < 100 {
        let n = rng.gen_range(1..=4);
        let sup_rows = random_matrix(&mut rng, n, 6);
        let den = BigInt::from(rng.gen_range(1..=3));
        let Ok(sup) = IntegerLattice::from_scaled_rows(&sup_rows, den, n) else { continue };
        let change = random_matrix(&mut rng, n, 5);
        let det = bareiss_det(&change).abs();
        if det.is_zero() || det > BigInt::from(10_000) {
            continue;
        }
        let sup_basis = sup.rational_rows();
        let sub_rows: Vec<Vec<BigRational>> = change
            .iter()
            .map(|row| {
                (0..n)
                    .map(|j| row.iter().zip(&sup_basis).map(|(c, b)| BigRational::from_integer(c.clone()) * &b[j]).sum())
                    .collect()
            })
            .collect();
        let sub = IntegerLattice::from_rational_rows(&sub_rows, n).map_err(|e| e.to_string())?;
        let fast = quotient_group(&sup, &sub).map_err(|e| e.to_string())?;
        let slow = brute_force_group(&sup, &sub, 10_000).map_err(|e| e.to_string())?;
        ensure(fast == slow && fast.order() == det, || format!("quotient {fast} vs {slow}, index {det}"))?;
        pairs += 1;
    }
    for _ in 0..100 {
        let n = rng.gen_range(1..=5);
        let m = random_matrix(&mut rng, n, 20);
        let product: BigInt = snf_invariants(&m).iter().product();
        let det = bareiss_det(&m).abs();
        ensure(product == det, || format!("SNF product {product} vs det {det}"))?;
    }
    for _ in 0..50 {
        let mut f = IntPolynomial::one();
        let mut roots: Vec<f64> = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let a: i64 = rng.gen_range(-8..=8);
            f = &f * &IntPolynomial::from_i64s(&[-a, 1]);
            roots.push(a as f64);
        }
        for _ in 0..rng.gen_range(0..=2) {
            let b: i64 = [2, 3, 5, 6, 7, 10, 11][rng.gen_range(0..7)];
            f = &f * &IntPolynomial::from_i64s(&[-b, 0, 1]);
            roots.push((b as f64).sqrt());
            roots.push(-(b as f64).sqrt());
        }
        let lo_num = rng.gen_range(-70..60);
        let hi_num = rng.gen_range(lo_num + 1..=70);
        let (lo, hi) = (lo_num as f64 / 7.0, hi_num as f64 / 7.0);
        let q = |k: i64| QuadraticRingElement::rational(BigRational::new(k.into(), 7.into()));
        let count = sturm_count(&f, &q(lo_num), &q(hi_num));
        roots.sort_by(f64::total_cmp);
        roots.dedup();
        let known = roots.iter().filter(|r| lo <= **r && **r <= hi).count();
        let bisected = bisection_count(&f, lo, hi);
        ensure(count == known && count == bisected, || format!("{f:?} on [{lo}, {hi}]: sturm {count}, known {known}, bisection {bisected}"))?;
    }
    Ok(())
}

/// Distinct roots of `f` in `[lo, hi]`: sign changes of the square-free part
/// on a fine grid, plus exact zeros at grid points.
fn bisection_count(f: &IntPolynomial, lo: f64, hi: f64) -> usize {
    let s = squarefree_part(f);
    let eval = |x: f64| s.coeffs().iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64().unwrap());
    let steps = 20_000;
    let mut count = 0;
    let mut prev = eval(lo);
    if prev.abs() < 1e-9 {
        count += 1;
    }
    for k in 1..=steps {
        let x = lo + (hi - lo) * k as f64 / steps as f64;
        let v = eval(x);
        let zero = v.abs() < 1e-9;
        if zero || (prev.abs() >= 1e-9 && (prev < 0.0) != (v < 0.0)) {
            count += 1;
        }
        prev = v;
    }
    count
}

fn predicate_cross_check() -> Check {
    for q in [2u64, 3, 4, 5] {
        for g in 1..=3 {
            for w in enumerate(q, g).unwrap() {
                let p = w.field().characteristic();
                let rank = newton_polygon_p_rank(w.poly(), p);
                let unit_middle = (w.middle_coefficient() % BigInt::from(p)) != BigInt::zero();
                ensure((rank == g) == unit_middle, || format!("{w}: p-rank {rank}"))?;
                let n = QuadraticRingElement::rational(BigRational::from_integer(w.point_count().abs()));
                let root = QuadraticRingElement::sqrt_multiple(1, &BigInt::from(q));
                let one = QuadraticRingElement::from_integer(1);
                let lower = root.sub(&one).pow(2 * g as u32);
                let upper = root.add(&one).pow(2 * g as u32);
                ensure(lower <= n && n <= upper, || format!("{w}: outside the Weil interval"))?;
            }
        }
    }
    Ok(())
}

fn determinism(first: &[String; 3]) -> Check {
    let mut again = [String::new(), String::new(), String::new()];
    search_replay(&mut again[0])?;
    realize_replay(&mut again[1])?;
    batch_replay(&mut again[2])?;
    for (k, name) in ["search", "realize", "batches"].iter().enumerate() {
        ensure(first[k] == again[k], || format!("{name} output differs between runs"))?;
    }
    Ok(())
}

#[test]
fn acceptance() {
    let mut transcripts = [String::new(), String::new(), String::new()];
    let mut failed = 0;
    let mut report = |k: usize, name: &str, run: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let r = run();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(()) => println!("criterion {k:>2} PASS  {name} ({secs:.1}s)"),
            Err(e) => {
                failed += 1;
                println!("criterion {k:>2} FAIL  {name} ({secs:.1}s): {e}");
            }
        }
    };
    let [t_search, t_realize, t_batches] = &mut transcripts;
    report(1, "golden values", &mut golden_values);
    report(2, "F_2 point-count search replay", &mut || search_replay(t_search));
    report(3, "cyclic groups of Frobenius orders", &mut cyclicity_sweep);
    report(4, "realization of groups of order <= 48", &mut || realize_replay(t_realize));
    report(5, "no ordinary class with 3 points over F_4", &mut f4_exception);
    report(6, "exponent obstructions for (Z/2)^r", &mut exponent_obstructions);
    report(7, "pairwise coprime batches", &mut || batch_replay(t_batches));
    report(8, "lattice, SNF and Sturm oracles", &mut oracles);
    report(9, "p-rank and Weil bound cross-check", &mut predicate_cross_check);
    report(10, "deterministic output", &mut || determinism(&transcripts));
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
