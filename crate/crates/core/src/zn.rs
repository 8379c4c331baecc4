//! Subsets of the cyclic group Z_n: sumsets, stabilizers and sumset lower bounds.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{capacity, invalid, Result};
use crate::exec::Exec;
use crate::numtheory::{ceil_div, divisors, gcd};

/// Default modulus limit for [`brute_min_sumset`].
pub const DEFAULT_ORACLE_LIMIT: u64 = 16;

/// Hard ceiling of the exhaustive oracle: sets are packed into one machine word.
pub const ORACLE_HARD_LIMIT: u64 = 64;

/// A subset of Z_n stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ZnSet {
    n: u64,
    bits: Vec<u64>,
}

impl std::fmt::Debug for ZnSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Z_{}{:?}", self.n, self.members())
    }
}

impl ZnSet {
    pub fn empty(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(invalid!("modulus must be at least 1"));
        }
        let words = n.div_ceil(64) as usize;
        Ok(Self { n, bits: vec![0; words] })
    }

    /// Builds a set from members in `[0, n)`; duplicates are ignored.
    pub fn new(n: u64, members: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut s = Self::empty(n)?;
        for x in members {
            if x >= n {
                return Err(invalid!("{x} is not a residue mod {n}"));
            }
            s.insert(x);
        }
        Ok(s)
    }

    /// Builds a set from arbitrary integers reduced mod `n`.
    pub fn from_residues(n: u64, members: impl IntoIterator<Item = i64>) -> Result<Self> {
        let mut s = Self::empty(n)?;
        for x in members {
            s.insert(x.rem_euclid(n as i64) as u64);
        }
        Ok(s)
    }

    pub fn full(n: u64) -> Result<Self> {
        Self::new(n, 0..n)
    }

    /// The subgroup of order `d`, i.e. the multiples of `n / d`.
    pub fn subgroup(n: u64, d: u64) -> Result<Self> {
        if d == 0 || !n.is_multiple_of(d) {
            return Err(invalid!("{d} does not divide {n}"));
        }
        let step = n / d;
        Self::new(n, (0..d).map(|j| j * step))
    }

    /// `{0, 1, ..., len - 1}`.
    pub fn interval(n: u64, len: u64) -> Result<Self> {
        if len > n {
            return Err(invalid!("interval of length {len} does not fit in Z_{n}"));
        }
        Self::new(n, 0..len)
    }

    fn insert(&mut self, x: u64) {
        self.bits[(x / 64) as usize] |= 1 << (x % 64);
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, x: u64) -> bool {
        x < self.n && self.bits[(x / 64) as usize] >> (x % 64) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(i as u64 * 64 + b)
            })
        })
    }

    /// Members in ascending order.
    pub fn members(&self) -> Vec<u64> {
        self.iter().collect()
    }

    /// `{x + b mod n : x in self}`.
    pub fn shift(&self, b: u64) -> Self {
        let b = b % self.n;
        if b == 0 {
            return self.clone();
        }
        let n = self.n as usize;
        let mut out = shl(&self.bits, b as usize, n);
        let wrapped = shr(&self.bits, n - b as usize);
        for (o, w) in out.iter_mut().zip(wrapped) {
            *o |= w;
        }
        Self { n: self.n, bits: out }
    }

    fn union_with(&mut self, other: &Self) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    fn is_full(&self) -> bool {
        self.len() == self.n
    }
}

fn top_mask(n: usize) -> u64 {
    match n % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

// Left shift by `s` bits within an `n`-bit window, dropping overflow.
fn shl(src: &[u64], s: usize, n: usize) -> Vec<u64> {
    let len = src.len();
    let (ws, bs) = (s / 64, s % 64);
    let mut out = vec![0u64; len];
    for j in ws..len {
        let mut v = src[j - ws] << bs;
        if bs > 0 && j > ws {
            v |= src[j - ws - 1] >> (64 - bs);
        }
        out[j] = v;
    }
    if let Some(last) = out.last_mut() {
        *last &= top_mask(n);
    }
    out
}

fn shr(src: &[u64], s: usize) -> Vec<u64> {
    let len = src.len();
    let (ws, bs) = (s / 64, s % 64);
    let mut out = vec![0u64; len];
    for j in 0..len.saturating_sub(ws) {
        let mut v = src[j + ws] >> bs;
        if bs > 0 && j + ws + 1 < len {
            v |= src[j + ws + 1] << (64 - bs);
        }
        out[j] = v;
    }
    out
}

impl Serialize for ZnSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            n: u64,
            members: Vec<u64>,
        }
        Repr { n: self.n, members: self.members() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ZnSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            n: u64,
            members: Vec<u64>,
        }
        let r = Repr::deserialize(d)?;
        ZnSet::new(r.n, r.members).map_err(serde::de::Error::custom)
    }
}

/// `{a + b mod n : a in A, b in B}`.
pub fn sumset(a: &ZnSet, b: &ZnSet) -> Result<ZnSet> {
    if a.n != b.n {
        return Err(invalid!("modulus mismatch: {} vs {}", a.n, b.n));
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut out = ZnSet::empty(a.n)?;
    for x in small.iter() {
        out.union_with(&large.shift(x));
        if out.is_full() {
            break;
        }
    }
    Ok(out)
}

/// Left fold of [`sumset`].
pub fn iterated_sumset(sets: &[ZnSet]) -> Result<ZnSet> {
    let (first, rest) = sets.split_first().ok_or_else(|| invalid!("no sets to add"))?;
    rest.iter().try_fold(first.clone(), |acc, s| sumset(&acc, s))
}

/// `{g : g + S = S}`.
pub fn stabilizer(s: &ZnSet) -> ZnSet {
    let n = s.n;
    // The stabilizer is a subgroup, generated by its smallest positive divisor of n.
    let step = divisors(n)
        .expect("n is a bitset length and factors by trial division")
        .into_iter()
        .find(|&m| s.shift(m) == *s)
        .unwrap_or(n);
    ZnSet::new(n, (0..n / step).map(|j| j * step)).expect("members are residues")
}

fn check_nonempty(sets: &[ZnSet]) -> Result<u64> {
    let n = sets.first().ok_or_else(|| invalid!("no sets given"))?.n;
    for s in sets {
        if s.n != n {
            return Err(invalid!("modulus mismatch: {} vs {}", s.n, n));
        }
        if s.is_empty() {
            return Err(invalid!("sumset bounds need nonempty sets"));
        }
    }
    Ok(n)
}

/// `|H| (sum ceil(|A_i|/|H|) - (k-1))` with `H` the stabilizer of the sumset.
pub fn kneser_bound(sets: &[ZnSet]) -> Result<u64> {
    check_nonempty(sets)?;
    let h = stabilizer(&iterated_sumset(sets)?).len();
    let blocks: u64 = sets.iter().map(|s| ceil_div(s.len(), h)).sum();
    Ok(h * (blocks - (sets.len() as u64 - 1)))
}

fn check_cards(n: u64, cards: &[u64]) -> Result<()> {
    if n == 0 {
        return Err(invalid!("modulus must be at least 1"));
    }
    if cards.is_empty() {
        return Err(invalid!("no cardinalities given"));
    }
    if let Some(c) = cards.iter().find(|&&c| c == 0 || c > n) {
        return Err(invalid!("cardinality {c} outside [1, {n}]"));
    }
    Ok(())
}

/// `d (sum ceil(c_i/d) - (k-1))`.
fn divisor_bound(d: u64, cards: &[u64]) -> u128 {
    let blocks: u128 = cards.iter().map(|&c| ceil_div(c, d) as u128).sum();
    d as u128 * (blocks - (cards.len() as u128 - 1))
}

/// Minimum over divisors `d` of `n` of `d (sum ceil(c_i/d) - (k-1))`.
pub fn cd_bound(n: u64, cards: &[u64]) -> Result<u64> {
    check_cards(n, cards)?;
    let best = divisors(n)?
        .into_iter()
        .map(|d| divisor_bound(d, cards))
        .min()
        .expect("n has at least one divisor");
    Ok(best as u64)
}

/// A sumset-minimizing tuple of sets with prescribed sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinSumset {
    pub size: u64,
    /// The smallest minimizing divisor; the witness sets live in cosets of its subgroup.
    pub divisor: u64,
    pub witness: Vec<ZnSet>,
}

/// The exact minimum of `|T_1 + ... + T_k|` over sets with the given sizes,
/// together with a tuple attaining it.
pub fn exact_min_sumset(n: u64, cards: &[u64]) -> Result<MinSumset> {
    check_cards(n, cards)?;
    let (divisor, size) = divisors(n)?
        .into_iter()
        .map(|d| (d, divisor_bound(d, cards).min(n as u128) as u64))
        .min_by_key(|&(d, s)| (s, d))
        .expect("n has at least one divisor");
    let witness = coset_interval_sets(n, cards, divisor)?;
    Ok(MinSumset { size, divisor, witness })
}

/// For each size `c`, the first `c` elements of `{0, .., ceil(c/d) - 1} + <n/d>`.
pub fn coset_interval_sets(n: u64, cards: &[u64], d: u64) -> Result<Vec<ZnSet>> {
    check_cards(n, cards)?;
    let subgroup = ZnSet::subgroup(n, d)?;
    cards
        .iter()
        .map(|&c| {
            let u = sumset(&ZnSet::interval(n, ceil_div(c, d))?, &subgroup)?;
            ZnSet::new(n, u.iter().take(c as usize))
        })
        .collect()
}

/// Exhaustive minimum of `|T_1 + ... + T_k|`, independent of any bound.
pub fn brute_min_sumset(n: u64, cards: &[u64]) -> Result<u64> {
    brute_min_sumset_with(n, cards, DEFAULT_ORACLE_LIMIT, Exec::default())
}

/// [`brute_min_sumset`] with an explicit modulus limit and execution strategy.
///
/// Every set is translated to contain 0, partial sums are kept up to affine
/// equivalence `x -> u x + b`, and partial sums no smaller than the best
/// explicit candidate are dropped since sumsets only grow.
pub fn brute_min_sumset_with(n: u64, cards: &[u64], limit: u64, exec: Exec) -> Result<u64> {
    check_cards(n, cards)?;
    if n > limit.min(ORACLE_HARD_LIMIT) {
        return Err(capacity!("exhaustive sumset search limited to n <= {}", limit.min(ORACLE_HARD_LIMIT)));
    }
    let mut cards = cards.to_vec();
    cards.sort_unstable();
    let floor = *cards.last().expect("cards is nonempty");
    let k = cards.len() as u64;
    if k == 1 {
        return Ok(floor);
    }
    let ctx = MaskCtx::new(n as usize);
    // Intervals give an explicit tuple with sumset size min(n, sum c - k + 1).
    let mut best = n.min(cards.iter().sum::<u64>() + 1 - k);
    if best == floor {
        return Ok(best);
    }

    let mut states: Vec<u64> = {
        let first: BTreeSet<u64> = ctx.masks(cards[0]).into_iter().map(|m| ctx.canonical(m)).collect();
        first.into_iter().collect()
    };
    for (level, &c) in cards.iter().enumerate().skip(1) {
        states.retain(|&p| (p.count_ones() as u64) < best);
        if states.is_empty() {
            break;
        }
        let masks = ctx.masks(c);
        if level + 1 == cards.len() {
            let found = exec
                .map(&states, |&p| {
                    let low = (p.count_ones() as u64).max(c);
                    let mut local = n;
                    for &t in &masks {
                        local = local.min(ctx.sum(p, t).count_ones() as u64);
                        if local == low {
                            break;
                        }
                    }
                    local
                })
                .into_iter()
                .min()
                .unwrap_or(n);
            best = best.min(found);
        } else {
            let bound = best;
            let raw: BTreeSet<u64> = exec
                .flat_map(&states, |&p| {
                    masks
                        .iter()
                        .map(|&t| ctx.sum(p, t))
                        .filter(|s| (s.count_ones() as u64) < bound)
                        .sorted_unstable()
                        .dedup()
                        .collect()
                })
                .into_iter()
                .collect();
            let raw: Vec<u64> = raw.into_iter().collect();
            let canon: BTreeSet<u64> = exec.map(&raw, |&m| ctx.canonical(m)).into_iter().collect();
            states = canon.into_iter().collect();
        }
        if best == floor {
            break;
        }
    }
    Ok(best)
}

/// Word-packed subsets of Z_n for n <= 64.
struct MaskCtx {
    n: usize,
    full: u64,
    unit_maps: Vec<Vec<u8>>,
}

impl MaskCtx {
    fn new(n: usize) -> Self {
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let unit_maps = (1..n.max(2))
            .filter(|&u| gcd(u as u64, n as u64) == 1)
            .map(|u| (0..n).map(|x| (u * x % n) as u8).collect())
            .collect();
        Self { n, full, unit_maps }
    }

    #[inline]
    fn rot(&self, m: u64, s: usize) -> u64 {
        if s == 0 {
            m
        } else {
            ((m << s) | (m >> (self.n - s))) & self.full
        }
    }

    #[inline]
    fn sum(&self, p: u64, t: u64) -> u64 {
        let mut acc = 0;
        let mut t = t;
        while t != 0 {
            acc |= self.rot(p, t.trailing_zeros() as usize);
            t &= t - 1;
        }
        acc
    }

    /// All `c`-subsets containing 0.
    fn masks(&self, c: u64) -> Vec<u64> {
        (1..self.n)
            .combinations(c as usize - 1)
            .map(|rest| rest.into_iter().fold(1u64, |m, x| m | 1 << x))
            .collect()
    }

    /// Smallest mask in the affine orbit.
    fn canonical(&self, m: u64) -> u64 {
        let mut best = u64::MAX;
        for map in &self.unit_maps {
            let mut img = 0u64;
            let mut rest = m;
            while rest != 0 {
                img |= 1 << map[rest.trailing_zeros() as usize];
                rest &= rest - 1;
            }
            for s in 0..self.n {
                best = best.min(self.rot(img, s));
            }
        }
        if self.unit_maps.is_empty() {
            best = m;
        }
        best
    }
}
