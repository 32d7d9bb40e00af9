//! Integer factorization helpers: trial division, Miller-Rabin, Pollard rho.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

pub const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;
const RHO_ITERATION_CAP: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorError {
    #[error("cannot factor zero")]
    Zero,
    #[error("Pollard rho failed to split composite cofactor {0}")]
    RhoFailed(BigUint),
}

/// Miller-Rabin with the first twelve prime bases. This is a proof of
/// primality below 3.3·10^24 and a fixed, reproducible test above it.
pub fn is_probable_prime(n: &BigUint) -> bool {
    const BASES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for b in BASES {
        let b = BigUint::from(b);
        if n == &b {
            return true;
        }
        if (n % &b).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'witness: for b in BASES {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn is_prime_u64(n: u64) -> bool {
    is_probable_prime(&BigUint::from(n))
}

fn pollard_brent(n: &BigUint, c: u64) -> Option<BigUint> {
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let mut y = BigUint::from(2u32);
    let mut r: u64 = 1;
    let m: u64 = 128;
    let mut q = BigUint::one();
    let mut iterations = 0u64;
    let mut x;
    let mut ys;
    loop {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        loop {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (q * diff) % n;
            }
            let g = q.gcd(n);
            k += m;
            iterations += m;
            if !g.is_one() {
                if &g == n {
                    // backtrack one step at a time
                    loop {
                        ys = f(&ys);
                        let diff = if x > ys { &x - &ys } else { &ys - &x };
                        let g = diff.gcd(n);
                        if !g.is_one() {
                            return if &g == n { None } else { Some(g) };
                        }
                    }
                }
                return Some(g);
            }
            if k >= r || iterations > RHO_ITERATION_CAP {
                break;
            }
        }
        r *= 2;
        if iterations > RHO_ITERATION_CAP {
            return None;
        }
    }
}

fn split_large(n: BigUint, out: &mut Vec<BigUint>) -> Result<(), FactorError> {
    if n.is_one() {
        return Ok(());
    }
    if is_probable_prime(&n) {
        out.push(n);
        return Ok(());
    }
    let root = n.sqrt();
    if &root * &root == n {
        split_large(root.clone(), out)?;
        return split_large(root, out);
    }
    for c in 1..20 {
        if let Some(d) = pollard_brent(&n, c) {
            let other = &n / &d;
            split_large(d, out)?;
            return split_large(other, out);
        }
    }
    Err(FactorError::RhoFailed(n))
}

/// Prime factorization as sorted `(prime, exponent)` pairs.
pub fn factor(n: &BigUint) -> Result<Vec<(BigUint, u32)>, FactorError> {
    if n.is_zero() {
        return Err(FactorError::Zero);
    }
    let mut primes: Vec<BigUint> = Vec::new();
    let mut rest = n.clone();
    let mut p = 2u64;
    while p <= TRIAL_DIVISION_LIMIT {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            primes.push(pb.clone());
        }
        p += if p == 2 { 1 } else { 2 };
    }
    split_large(rest, &mut primes)?;
    primes.sort();
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    for pr in primes {
        match out.last_mut() {
            Some((last, e)) if *last == pr => *e += 1,
            _ => out.push((pr, 1)),
        }
    }
    Ok(out)
}

pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    factor(&BigUint::from(n))
        .expect("u64 values always factor")
        .into_iter()
        .map(|(p, e)| (p.to_u64().unwrap(), e))
        .collect()
}

/// Decomposes `q = p^a` with `p` prime, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    match factor_u64(q).as_slice() {
        [(p, a)] => Some((*p, *a)),
        _ => None,
    }
}

/// Integer square root if `n` is a perfect square.
pub fn exact_sqrt(n: u64) -> Option<u64> {
    let r = (n as f64).sqrt() as u64;
    (r.saturating_sub(1)..=r + 1).find(|&s| s * s == n)
}
