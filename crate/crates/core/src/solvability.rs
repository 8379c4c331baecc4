//! Closed-form solvability of `N_{omega,d}` over GF(q), the sumset oracle and
//! the field-size range `q_min`, `q*_max`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{capacity, invalid, Result};
use crate::exec::Exec;
use crate::gf::is_prime_power;
use crate::netmodel::NetworkParams;
use crate::numtheory::{ceil_div, divisors};
use crate::zn::{brute_min_sumset_with, DEFAULT_ORACLE_LIMIT};

/// Candidates examined by the `q_min` and `q*_max` scans before giving up.
pub const QRANGE_SCAN_LIMIT: u64 = 1 << 22;

/// Block-decomposition steps allowed when bounding `q_min` from below.
const LOWER_BOUND_BUDGET: u64 = 1 << 22;

const SCAN_BLOCK: u64 = 4096;

/// `d (sum ceil(d_i / d) - omega + 1) + 2`.
pub fn divisor_condition_lhs(params: &NetworkParams, d: u64) -> u128 {
    Degrees::new(params).lhs(d)
}

/// Out-degrees grouped by value.
struct Degrees {
    omega: u128,
    max: u64,
    counts: Vec<(u64, u128)>,
}

impl Degrees {
    fn new(params: &NetworkParams) -> Self {
        let mut map: BTreeMap<u64, u128> = BTreeMap::new();
        for &x in &params.d {
            *map.entry(x).or_default() += 1;
        }
        Self { omega: params.omega as u128, max: params.max_d(), counts: map.into_iter().collect() }
    }

    fn lhs(&self, d: u64) -> u128 {
        let blocks: u128 = self.counts.iter().map(|&(v, c)| c * ceil_div(v, d) as u128).sum();
        d as u128 * (blocks + 1 - self.omega) + 2
    }

    /// Smallest divisor `d` of `q - 1` with `lhs(d) <= q`.
    fn witness(&self, q: u64) -> Result<Option<u64>> {
        if self.max >= q {
            return Ok(None);
        }
        Ok(divisors(q - 1)?.into_iter().find(|&d| self.lhs(d) <= q as u128))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DivisorCheck {
    pub d: u64,
    pub lhs: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolvabilityReport {
    pub params: NetworkParams,
    pub q: u64,
    pub solvable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_divisor: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refutation: Option<Vec<DivisorCheck>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FieldRange {
    pub q_min: u64,
    pub q_star_max: u64,
}

fn check_q(q: u64) -> Result<()> {
    if q < 2 || is_prime_power(q)?.is_none() {
        return Err(invalid!("{q} is not a prime power"));
    }
    Ok(())
}

fn witness_divisor(params: &NetworkParams, q: u64) -> Result<Option<u64>> {
    Degrees::new(params).witness(q)
}

/// Verdict from the divisor condition, with the smallest witness divisor or the
/// full list of failing divisors.
pub fn solvable_closed_form(params: &NetworkParams, q: u64) -> Result<SolvabilityReport> {
    params.validate()?;
    check_q(q)?;
    let witness = witness_divisor(params, q)?;
    let refutation = match witness {
        Some(_) => None,
        None => Some(
            divisors(q - 1)?
                .into_iter()
                .map(|d| DivisorCheck { d, lhs: divisor_condition_lhs(params, d) })
                .collect(),
        ),
    };
    Ok(SolvabilityReport { params: params.clone(), q, solvable: witness.is_some(), witness_divisor: witness, refutation })
}

/// Verdict from an exhaustive search over sets of exponents in `Z_{q-1}`.
pub fn brute_force_solvable(params: &NetworkParams, q: u64) -> Result<bool> {
    brute_force_solvable_with(params, q, DEFAULT_ORACLE_LIMIT, Exec::default())
}

pub fn brute_force_solvable_with(params: &NetworkParams, q: u64, limit: u64, exec: Exec) -> Result<bool> {
    params.validate()?;
    check_q(q)?;
    let n = q - 1;
    if params.max_d() > n {
        return Ok(false);
    }
    Ok(brute_min_sumset_with(n, &params.d, limit, exec)? < n)
}

/// A lower bound on every prime power admitting a solution: the largest
/// out-degree plus one, raised to the minimum of [`divisor_condition_lhs`] over all `x >= 1`
/// when that minimum is cheap to compute.
fn q_min_lower_bound(params: &NetworkParams) -> u128 {
    let degrees = Degrees::new(params);
    let counts = &degrees.counts;
    let floor = degrees.max as u128 + 1;
    let dmax = degrees.max;
    let mut best = u128::MAX;
    let mut x = 1u64;
    let mut steps = 0u64;
    // On each block every ceil(v/x) is constant, so the minimum sits at the left end.
    while x <= dmax {
        steps += counts.len() as u64;
        if steps > LOWER_BOUND_BUDGET {
            return floor;
        }
        let mut blocks = 0u128;
        let mut end = u64::MAX;
        for &(v, c) in counts {
            let k = ceil_div(v, x);
            blocks += c * k as u128;
            end = end.min(if k == 1 { u64::MAX } else { (v - 1) / (k - 1) });
        }
        best = best.min(x as u128 * (blocks + 1 - degrees.omega) + 2);
        if end == u64::MAX {
            break;
        }
        x = end + 1;
    }
    floor.max(best)
}

/// Smallest prime power over which the network is solvable.
pub fn q_min(params: &NetworkParams) -> Result<u64> {
    q_min_with(params, Exec::default())
}

pub fn q_min_with(params: &NetworkParams, exec: Exec) -> Result<u64> {
    params.validate()?;
    let degrees = Degrees::new(params);
    let start = u64::try_from(q_min_lower_bound(params)).map_err(|_| capacity!("q_min of {params} exceeds 64 bits"))?;
    let mut lo = start;
    while lo - start < QRANGE_SCAN_LIMIT {
        let hi = lo.checked_add(SCAN_BLOCK).ok_or_else(|| capacity!("q_min of {params} exceeds 64 bits"))?;
        let block: Vec<u64> = (lo..hi).collect();
        let found = exec.find_map_first(&block, |&q| match is_prime_power(q) {
            Ok(Some(_)) => degrees.witness(q).map(|w| w.map(|_| q)).transpose(),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        });
        if let Some(q) = found {
            return q;
        }
        lo = hi;
    }
    Err(capacity!("no solvable field found for {params} within {QRANGE_SCAN_LIMIT} candidates of {start}"))
}

/// Largest prime power over which the network is unsolvable, or 1 if none.
pub fn q_star_max(params: &NetworkParams) -> Result<u64> {
    q_star_max_with(params, Exec::default())
}

pub fn q_star_max_with(params: &NetworkParams, exec: Exec) -> Result<u64> {
    params.validate()?;
    let top = params.sum_d() + 2 - params.omega as u128;
    let top = u64::try_from(top).map_err(|_| capacity!("q*_max bound for {params} exceeds 64 bits"))?;
    // Every q <= max d_i is unsolvable, so the scan stops there at the latest.
    let degrees = Degrees::new(params);
    let bottom = degrees.max.max(1);
    let mut hi = top;
    while hi > bottom {
        if top - hi >= QRANGE_SCAN_LIMIT {
            return Err(capacity!("q*_max scan for {params} exceeded {QRANGE_SCAN_LIMIT} candidates"));
        }
        let lo = hi.saturating_sub(SCAN_BLOCK).max(bottom);
        let block: Vec<u64> = (lo + 1..=hi).rev().collect();
        let found = exec.find_map_first(&block, |&q| match is_prime_power(q) {
            Ok(Some(_)) => match degrees.witness(q) {
                Ok(Some(_)) => None,
                Ok(None) => Some(Ok(q)),
                Err(e) => Some(Err(e)),
            },
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        });
        if let Some(q) = found {
            return q;
        }
        hi = lo;
    }
    Ok((2..=bottom).rev().find(|&q| matches!(is_prime_power(q), Ok(Some(_)))).unwrap_or(1))
}

pub fn field_range(params: &NetworkParams) -> Result<FieldRange> {
    Ok(FieldRange { q_min: q_min(params)?, q_star_max: q_star_max(params)? })
}

/// True when solvability over `p^k` for the smallest such `k` in `ks`
/// persists for every larger `k` in `ks`.
pub fn check_odd_char_monotonicity(params: &NetworkParams, p: u64, ks: std::ops::RangeInclusive<u32>) -> Result<bool> {
    params.validate()?;
    if p.is_multiple_of(2) || !crate::numtheory::is_prime(p) {
        return Err(invalid!("{p} is not an odd prime"));
    }
    let degrees = Degrees::new(params);
    let mut seen = false;
    for k in ks {
        let q = p.checked_pow(k).ok_or_else(|| capacity!("{p}^{k} exceeds 64 bits"))?;
        let ok = degrees.witness(q)?.is_some();
        if seen && !ok {
            return Ok(false);
        }
        seen |= ok;
    }
    Ok(true)
}
