//! The subgroup-order criterion on field pairs and the constructions built on it:
//! separating networks for a pair, the characteristic-2 family, the Diophantine
//! window search and the cross-characteristic search.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};
use std::cmp::Ordering;
use serde::Serialize;

use crate::error::{capacity, invalid, Error, Result};
use crate::exec::Exec;
use crate::gf::is_prime_power;
use crate::netmodel::NetworkParams;
use crate::numtheory::{ceil_div, divisors, gcd, is_prime, multiplicative_order};
use crate::solvability::{q_min_with, solvable_closed_form, QRANGE_SCAN_LIMIT};

/// Largest `omega` accepted when building a separating network.
pub const OMEGA_LIMIT: u64 = 1 << 16;

/// Largest `k'` examined by [`lemma2_search`].
pub const LEMMA2_KPRIME_LIMIT: u64 = 4096;

fn check_prime_power(q: u64) -> Result<()> {
    if q < 2 || is_prime_power(q)?.is_none() {
        return Err(invalid!("{q} is not a prime power"));
    }
    Ok(())
}

fn proper_divisors(n: u64) -> Result<Vec<u64>> {
    let mut ds = divisors(n)?;
    ds.pop();
    Ok(ds)
}

fn check_order(q: u64, d: u64) -> Result<()> {
    if d <= 1 || d >= q - 1 || !(q - 1).is_multiple_of(d) {
        return Err(invalid!("{d} is not the order of a proper nontrivial subgroup of GF({q})^x"));
    }
    Ok(())
}

fn star_holds(q: u64, qp: u64, d: u64, dps: &[u64]) -> bool {
    dps.iter().all(|&dp| d > dp || q as i128 - d as i128 > qp as i128 - dp as i128)
}

/// Whether the order-`d` subgroup of GF(q)^x beats every proper subgroup of GF(q')^x
/// either in size or in the size of its complement.
pub fn satisfies_star(q: u64, q_prime: u64, d: u64) -> Result<bool> {
    check_prime_power(q)?;
    check_prime_power(q_prime)?;
    check_order(q, d)?;
    Ok(star_holds(q, q_prime, d, &proper_divisors(q_prime - 1)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shortcut {
    /// `q' < q`.
    SmallerField,
    /// `q' - 1` is prime.
    PrimePlusOne,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriterionResult {
    pub q: u64,
    pub q_prime: u64,
    pub valid_orders: Vec<u64>,
    pub shortcut: Option<Shortcut>,
}

impl CriterionResult {
    pub fn satisfied(&self) -> bool {
        !self.valid_orders.is_empty()
    }
}

/// All subgroup orders of GF(q)^x satisfying the criterion against GF(q').
pub fn criterion_search(q: u64, q_prime: u64) -> Result<CriterionResult> {
    check_prime_power(q)?;
    check_prime_power(q_prime)?;
    let dps = proper_divisors(q_prime - 1)?;
    let candidates: Vec<u64> = proper_divisors(q - 1)?.into_iter().filter(|&d| d > 1).collect();
    let valid_orders: Vec<u64> = candidates.iter().copied().filter(|&d| star_holds(q, q_prime, d, &dps)).collect();
    let composite = !candidates.is_empty();
    let shortcut = match () {
        _ if !composite => None,
        _ if q_prime < q => Some(Shortcut::SmallerField),
        _ if is_prime(q_prime - 1) => Some(Shortcut::PrimePlusOne),
        _ => None,
    };
    if shortcut.is_some() && valid_orders != candidates {
        return Err(Error::Internal(format!("({q},{q_prime}) meets a shortcut but rejects some orders")));
    }
    Ok(CriterionResult { q, q_prime, valid_orders, shortcut })
}

/// The unrounded right-hand side of the sharp bound on `omega`.
pub fn omega_sharp_raw(q: u64, q_prime: u64, d: u64) -> Result<Ratio<i128>> {
    check_prime_power(q)?;
    check_prime_power(q_prime)?;
    check_order(q, d)?;
    let rest = q - d - 1;
    let best = divisors(q_prime - 1)?
        .into_iter()
        .filter(|&dp| dp < d)
        .map(|dp| {
            let num = ((q_prime - 1) / dp) as i128 - ceil_div(rest, dp) as i128;
            let den = ceil_div(d, dp) as i128 - 1;
            Ratio::new(num, den) + 1
        })
        .max()
        .expect("1 divides q' - 1 and 1 < d");
    Ok(best)
}

fn clamp_omega(r: &Ratio<i128>) -> Result<u64> {
    let c = r.ceil().to_integer().max(3);
    u64::try_from(c).map_err(|_| capacity!("omega bound {r} out of range"))
}

/// Smallest `omega >= 3` meeting the sharp bound.
pub fn omega_sharp_bound(q: u64, q_prime: u64, d: u64) -> Result<u64> {
    clamp_omega(&omega_sharp_raw(q, q_prime, d)?)
}

/// The unrounded weak bound `(q' - q + d) / (d - d'_max) + 1`.
pub fn omega_weak_raw(q: u64, q_prime: u64, d: u64) -> Result<Ratio<i128>> {
    check_prime_power(q)?;
    check_prime_power(q_prime)?;
    check_order(q, d)?;
    let dmax = divisors(q_prime - 1)?
        .into_iter()
        .filter(|&dp| dp < d)
        .max()
        .ok_or_else(|| invalid!("no divisor of {} below {d}", q_prime - 1))?;
    Ok(Ratio::new(q_prime as i128 - q as i128 + d as i128, (d - dmax) as i128) + 1)
}

/// Smallest `omega >= 3` meeting the weak bound.
pub fn omega_weak_bound(q: u64, q_prime: u64, d: u64) -> Result<u64> {
    clamp_omega(&omega_weak_raw(q, q_prime, d)?)
}

/// A verified separating network: solvable over GF(q) with `q_min = q`,
/// unsolvable over GF(q').
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairDiscovery {
    pub q: u64,
    pub q_prime: u64,
    pub d: u64,
    pub omega: usize,
    pub d_tuple: Vec<u64>,
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PairDiscovery {
    pub fn params(&self) -> NetworkParams {
        NetworkParams { omega: self.omega, d: self.d_tuple.clone() }
    }
}

/// Rejects the range scan up front when it cannot finish.
fn q_min_feasible(params: &NetworkParams, q: u64) -> Result<()> {
    let span = q - params.max_d();
    if span > QRANGE_SCAN_LIMIT {
        return Err(capacity!("confirming q_min = {q} needs a scan over {span} candidates"));
    }
    Ok(())
}

/// Parameters `(omega, (d, .., d, q - d - 1))` with `omega` from the sharp bound,
/// checked against the closed form.
pub fn theorem3_network(q: u64, q_prime: u64, d: u64) -> Result<PairDiscovery> {
    theorem3_network_with(q, q_prime, d, Exec::default())
}

pub fn theorem3_network_with(q: u64, q_prime: u64, d: u64, exec: Exec) -> Result<PairDiscovery> {
    if !satisfies_star(q, q_prime, d)? {
        return Err(invalid!("order {d} does not meet the criterion for ({q},{q_prime})"));
    }
    if q >= q_prime {
        return Err(invalid!("need q < q', got ({q},{q_prime})"));
    }
    let last = q - d - 1;
    if last < 2 {
        return Err(invalid!("q - d - 1 = {last} is below 2"));
    }
    let omega = omega_sharp_bound(q, q_prime, d)?;
    if omega > OMEGA_LIMIT {
        return Err(capacity!("omega = {omega} exceeds {OMEGA_LIMIT}"));
    }
    let omega = omega as usize;
    let mut d_tuple = vec![d; omega - 1];
    d_tuple.push(last);
    let params = NetworkParams::new(omega, d_tuple.clone())?;
    if !solvable_closed_form(&params, q)?.solvable {
        return Err(Error::Internal(format!("{params} unsolvable over GF({q})")));
    }
    if solvable_closed_form(&params, q_prime)?.solvable {
        return Err(Error::Internal(format!("{params} solvable over GF({q_prime})")));
    }
    q_min_feasible(&params, q)?;
    let qmin = q_min_with(&params, exec)?;
    if qmin != q {
        return Err(Error::Internal(format!("{params} has q_min = {qmin}, expected {q}")));
    }
    Ok(PairDiscovery { q, q_prime, d, omega, d_tuple, verified: true, note: None })
}

/// The characteristic-2 instance for one `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Theorem4Instance {
    pub k: u32,
    #[serde(flatten)]
    pub discovery: PairDiscovery,
    /// `q' - q`.
    pub gap: u64,
    /// Present when the downward scan finished within limits.
    pub q_star_max: Option<u64>,
}

/// `q = 4^k`, `q' = 2q`, `d = (q - 1)/3` with `d_tuple = (d, .., d, 2d)`.
pub fn theorem4_instance(k: u32) -> Result<Theorem4Instance> {
    theorem4_instance_with(k, Exec::default())
}

pub fn theorem4_instance_with(k: u32, exec: Exec) -> Result<Theorem4Instance> {
    if k < 2 {
        return Err(invalid!("k must be at least 2, got {k}"));
    }
    if 2 * k + 1 > 63 {
        return Err(capacity!("2^{} exceeds 64 bits", 2 * k + 1));
    }
    let q = 1u64 << (2 * k);
    let q_prime = q << 1;
    let d = (q - 1) / 3;
    let mut discovery = theorem3_network_with(q, q_prime, d, exec)?;
    if discovery.d_tuple.last() != Some(&(2 * d)) {
        return Err(Error::Internal(format!("last out-degree is not 2d = {}", 2 * d)));
    }
    if k == 2 {
        discovery.note = Some("k = 2 lies outside the strict range k > 2 and is verified directly".into());
    }
    let q_star_max = match crate::solvability::q_star_max_with(&discovery.params(), exec) {
        Ok(v) => Some(v),
        Err(Error::Capacity(_)) => None,
        Err(e) => return Err(e),
    };
    if let Some(v) = q_star_max {
        let odd_power_of_two = v.is_power_of_two() && v.trailing_zeros() % 2 == 1;
        if !odd_power_of_two || v < q_prime {
            return Err(Error::Internal(format!("q*_max = {v} is not 2^(2k'+1) with k' >= {k}")));
        }
    }
    Ok(Theorem4Instance { k, discovery, gap: q_prime - q, q_star_max })
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

/// Ordering of `n1^x` against a positive rational.
fn cmp_power(n1: u64, x: i64, rhs: &Ratio<BigUint>) -> Ordering {
    let (num, den) = (rhs.numer(), rhs.denom());
    if x >= 0 {
        (big(n1).pow(x as u32) * den).cmp(num)
    } else {
        den.cmp(&(num * big(n1).pow((-x) as u32)))
    }
}

/// Ordering of `k` against `log_{n1}(rhs) + c`, decided by comparing
/// `n1^{(k - c) b}` with `rhs^b` for the denominator `b` of `c`.
fn cmp_log(n1: u64, k: u64, c: &Ratio<i64>, rhs: &Ratio<BigUint>) -> Ordering {
    let b = *c.denom() as u32;
    let x = k as i64 * *c.denom() - *c.numer();
    cmp_power(n1, x, &Ratio::new(rhs.numer().pow(b), rhs.denom().pow(b)))
}

/// The first `count` pairs `(k, k')` in ascending `k'` with
/// `log_{n1} n2^{k'} + c1 > k > log_{n1}(n2^{k'} + delta) + c2`.
pub fn lemma2_search(n1: u64, n2: u64, c1: Ratio<i64>, c2: Ratio<i64>, delta: Ratio<i64>, count: usize) -> Result<Vec<(u64, u64)>> {
    if n1 < 2 || n2 < 2 || gcd(n1, n2) != 1 {
        return Err(invalid!("need coprime n1, n2 > 1, got ({n1},{n2})"));
    }
    if c1 <= c2 {
        return Err(invalid!("need c1 > c2"));
    }
    let ratio = (n2 as f64).ln() / (n1 as f64).ln();
    let mut out = Vec::new();
    for kp in 1..=LEMMA2_KPRIME_LIMIT {
        if out.len() >= count {
            break;
        }
        let base = big(n2).pow(kp as u32);
        let upper = Ratio::from_integer(base.clone());
        let shifted = Ratio::from_integer(num_bigint::BigInt::from(base)) + to_big_ratio(&delta);
        if !shifted.is_positive() {
            continue;
        }
        let lower = Ratio::new(shifted.numer().magnitude().clone(), shifted.denom().magnitude().clone());
        let approx = kp as f64 * ratio;
        let lo = (approx + c2.to_f64().unwrap_or(0.0)).floor() - 2.0;
        let hi = (approx + c1.to_f64().unwrap_or(0.0)).ceil() + 2.0;
        for k in (lo.max(1.0) as u64)..=(hi.max(1.0) as u64) {
            if cmp_log(n1, k, &c1, &upper).is_lt() && cmp_log(n1, k, &c2, &lower).is_gt() {
                out.push((k, kp));
                if out.len() >= count {
                    break;
                }
            }
        }
    }
    Ok(out)
}

fn to_big_ratio(r: &Ratio<i64>) -> Ratio<num_bigint::BigInt> {
    Ratio::new((*r.numer()).into(), (*r.denom()).into())
}

/// A grid point that could not be settled within limits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedCandidate {
    pub q: u64,
    pub q_prime: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossCharReport {
    pub p: u64,
    pub p_prime: u64,
    /// `p^j`, the smallest power of `p` whose predecessor has a divisor of at least 3.
    pub base: u64,
    /// That smallest divisor of `base - 1`.
    pub divisor: u64,
    /// Order of `p'` modulo `divisor`, or 1 when it has none.
    pub a: u64,
    pub hits: Vec<PairDiscovery>,
    pub skipped: Vec<SkippedCandidate>,
}

/// Pairs `(q, q'') = (base^k, p'^{a k' + 1})` below `2^max_bits` with `q < q''`
/// for which the subgroup of order `(q - 1)/divisor` meets the criterion, each
/// completed to a verified separating network.
pub fn discover_cross_char(p: u64, p_prime: u64, max_bits: u32) -> Result<CrossCharReport> {
    discover_cross_char_with(p, p_prime, max_bits, Exec::default())
}

pub fn discover_cross_char_with(p: u64, p_prime: u64, max_bits: u32, exec: Exec) -> Result<CrossCharReport> {
    if !is_prime(p) || !is_prime(p_prime) || p == p_prime {
        return Err(invalid!("need distinct primes, got ({p},{p_prime})"));
    }
    if !(2..=64).contains(&max_bits) {
        return Err(invalid!("max_bits must lie in 2..=64, got {max_bits}"));
    }
    let bound = |x: u64| max_bits == 64 || x < 1u64 << max_bits;
    let (base, divisor) = {
        let mut b = p;
        loop {
            if let Some(&dv) = divisors(b - 1)?.iter().find(|&&x| x >= 3) {
                break (b, dv);
            }
            b = b.checked_mul(p).ok_or_else(|| capacity!("no usable power of {p} within 64 bits"))?;
        }
    };
    let a = multiplicative_order(p_prime, divisor)?.unwrap_or(1);
    let mut qs = Vec::new();
    let mut q = base;
    while bound(q) {
        qs.push(q);
        match q.checked_mul(base) {
            Some(x) => q = x,
            None => break,
        }
    }
    let mut qps = Vec::new();
    let step = p_prime.checked_pow(a as u32);
    let mut qp = step.and_then(|s| s.checked_mul(p_prime));
    while let Some(x) = qp.filter(|&x| bound(x)) {
        qps.push(x);
        qp = step.and_then(|s| x.checked_mul(s));
    }
    let grid: Vec<(u64, u64)> = qs
        .iter()
        .flat_map(|&q| qps.iter().filter(move |&&x| x > q).map(move |&x| (q, x)))
        .filter(|&(q, _)| (q - 1) / divisor > 1)
        .collect();
    let outcomes = exec.map(&grid, |&(q, qp)| {
        let d = (q - 1) / divisor;
        match satisfies_star(q, qp, d) {
            Ok(false) => None,
            Ok(true) => Some(theorem3_network_with(q, qp, d, Exec::Sequential).map_err(|e| (q, qp, e))),
            Err(e) => Some(Err((q, qp, e))),
        }
    });
    let mut hits = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes.into_iter().flatten() {
        match outcome {
            Ok(hit) => hits.push(hit),
            Err((q, q_prime, Error::Capacity(reason))) => skipped.push(SkippedCandidate { q, q_prime, reason }),
            Err((_, _, e)) => return Err(e),
        }
    }
    Ok(CrossCharReport { p, p_prime, base, divisor, a, hits, skipped })
}
