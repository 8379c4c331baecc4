//! Integer utilities: primality, factorization, divisor lattices.
//!
//! Everything works on `u64`. Factorization is trial division up to
//! [`TRIAL_DIVISION_LIMIT`] followed by Brent's variant of Pollard rho with
//! a deterministic Miller-Rabin test for the cofactors.

use crate::error::{capacity, Result};

pub const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

/// Rho iterations allowed per cofactor before giving up.
const RHO_BUDGET: u64 = 1 << 24;

#[inline]
pub fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for the whole `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn rho(n: u64, seed: u64) -> Option<u64> {
    // Brent's cycle detection with batched gcds.
    let f = |x: u64| (mul_mod(x, x, n) + seed) % n;
    let mut y = 2u64;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut g = 1u64;
    let mut x = y;
    let mut ys = y;
    let mut spent = 0u64;
    const BATCH: u64 = 128;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..BATCH.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = gcd(q, n);
            k += BATCH;
        }
        r *= 2;
        spent += r;
        if spent > RHO_BUDGET {
            return None;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = gcd(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

fn split_large(n: u64, out: &mut Vec<u64>) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    if is_prime(n) {
        out.push(n);
        return Ok(());
    }
    for seed in 1..64 {
        if let Some(f) = rho(n, seed) {
            split_large(f, out)?;
            return split_large(n / f, out);
        }
    }
    Err(capacity!("could not factor cofactor {n} within the rho budget"))
}

/// Prime factorization as `(prime, exponent)` pairs in ascending prime order.
pub fn factorize(mut n: u64) -> Result<Vec<(u64, u32)>> {
    let mut primes = Vec::new();
    if n <= 1 {
        return Ok(Vec::new());
    }
    let mut p = 2u64;
    while p <= TRIAL_DIVISION_LIMIT && p * p <= n {
        while n.is_multiple_of(p) {
            primes.push(p);
            n /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        split_large(n, &mut primes)?;
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    Ok(out)
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Result<Vec<u64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut divs = vec![1u64];
    for (p, e) in factorize(n)? {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    Ok(divs)
}

/// `Some((p, k))` when `n = p^k` with `p` prime.
pub fn prime_power_decomposition(n: u64) -> Result<Option<(u64, u32)>> {
    if n < 2 {
        return Ok(None);
    }
    if is_prime(n) {
        return Ok(Some((n, 1)));
    }
    for k in 2..=63u32 {
        let r = integer_root(n, k);
        if r < 2 {
            break;
        }
        if r.checked_pow(k) == Some(n) && is_prime(r) {
            return Ok(Some((r, k)));
        }
    }
    Ok(None)
}

/// Largest `r` with `r^k <= n`.
pub fn integer_root(n: u64, k: u32) -> u64 {
    if k == 1 || n < 2 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && r.checked_pow(k).is_none_or(|v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

/// Smallest `a ≥ 1` with `base^a ≡ 1 (mod m)`, or `None` when `gcd(base, m) ≠ 1`.
pub fn multiplicative_order(base: u64, m: u64) -> Result<Option<u64>> {
    if m == 1 {
        return Ok(Some(1));
    }
    if gcd(base % m, m) != 1 {
        return Ok(None);
    }
    // The order divides phi(m).
    let mut phi = m;
    for (p, _) in factorize(m)? {
        phi = phi / p * (p - 1);
    }
    for d in divisors(phi)? {
        if pow_mod(base, d, m) == 1 {
            return Ok(Some(d));
        }
    }
    unreachable!("Euler's theorem guarantees an order dividing phi(m)")
}

/// Prime powers in `[start, end]`, ascending.
pub fn prime_powers_in(start: u64, end: u64) -> impl Iterator<Item = u64> {
    (start.max(2)..=end).filter(|&n| matches!(prime_power_decomposition(n), Ok(Some(_))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_factor(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    #[test]
    fn factorization_matches_naive() {
        for n in 1..5000u64 {
            assert_eq!(factorize(n).unwrap(), naive_factor(n), "n={n}");
        }
    }

    #[test]
    fn factors_large_semiprimes() {
        let p = 4_294_967_291u64; // largest prime below 2^32
        let q = 4_294_967_279u64;
        assert_eq!(factorize(p * q).unwrap(), vec![(q, 1), (p, 1)]);
        // 2^64 - 1 = 3 * 5 * 17 * 257 * 641 * 65537 * 6700417
        let f = factorize(u64::MAX).unwrap();
        let primes: Vec<u64> = f.iter().map(|x| x.0).collect();
        assert_eq!(primes, vec![3, 5, 17, 257, 641, 65537, 6700417]);
        // 3^40 - 1
        let n = 3u64.pow(40) - 1;
        let prod: u64 = factorize(n).unwrap().iter().map(|(p, e)| p.pow(*e)).product();
        assert_eq!(prod, n);
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..50).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]);
        assert!(is_prime((1 << 61) - 1));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(1).unwrap(), vec![1]);
        assert_eq!(divisors(12).unwrap(), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(16).unwrap(), vec![1, 2, 4, 8, 16]);
        assert_eq!(divisors(31).unwrap(), vec![1, 31]);
    }

    #[test]
    fn orders() {
        assert_eq!(multiplicative_order(2, 7).unwrap(), Some(3));
        assert_eq!(multiplicative_order(3, 7).unwrap(), Some(6));
        assert_eq!(multiplicative_order(3, 3).unwrap(), None);
        assert_eq!(multiplicative_order(2, 4).unwrap(), None);
    }

    #[test]
    fn roots_and_prime_powers() {
        assert_eq!(integer_root(u64::MAX, 2), 4_294_967_295);
        assert_eq!(integer_root(1 << 63, 63), 2);
        assert_eq!(integer_root(80, 4), 2);
        for n in 2..3000u64 {
            let f = naive_factor(n);
            let expect = (f.len() == 1).then(|| f[0]);
            assert_eq!(prime_power_decomposition(n).unwrap(), expect, "n={n}");
        }
        assert_eq!(prime_power_decomposition(1 << 62).unwrap(), Some((2, 62)));
        assert_eq!(prime_power_decomposition(3u64.pow(40)).unwrap(), Some((3, 40)));
        assert_eq!(prime_power_decomposition(6u64.pow(20)).unwrap(), None);
    }

    #[test]
    fn prime_power_scan() {
        let pp: Vec<u64> = prime_powers_in(1, 20).collect();
        assert_eq!(pp, vec![2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19]);
    }
}
