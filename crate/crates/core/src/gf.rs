//! Finite fields GF(p^k) with explicit exp/log tables.
//!
//! An element is its coefficient vector over GF(p) packed base-p into an
//! integer in `[0, q)`, the constant coefficient being the least significant
//! digit. The modulus is the monic irreducible polynomial of degree `k` whose
//! non-leading coefficients, packed the same way, form the smallest integer.
//! The primitive element `xi` is the smallest packed element of order `q - 1`.

use serde::{Deserialize, Serialize};

use crate::error::{capacity, invalid, Error, Result};
use crate::numtheory;

/// Packed field element.
pub type Elem = u32;

/// Fields with more elements than this are rejected by [`FiniteField::new`].
pub const FIELD_TABLE_LIMIT: u64 = 1 << 20;

/// `q = p^k` with `p` prime and `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimePower {
    pub p: u64,
    pub k: u32,
    pub q: u64,
}

impl PrimePower {
    pub fn new(q: u64) -> Result<Self> {
        is_prime_power(q)?.ok_or_else(|| invalid!("{q} is not a prime power"))
    }

    pub fn is_even(&self) -> bool {
        self.p == 2
    }
}

/// Decomposes `n` as `p^k`, or returns `None` when `n` is not a prime power.
pub fn is_prime_power(n: u64) -> Result<Option<PrimePower>> {
    if n < 2 {
        return Err(invalid!("prime power test needs n >= 2, got {n}"));
    }
    Ok(numtheory::prime_power_decomposition(n)?.map(|(p, k)| PrimePower { p, k, q: n }))
}

/// Prime powers in `[start, end]`, ascending.
pub fn prime_powers(start: u64, end: u64) -> Vec<u64> {
    numtheory::prime_powers_in(start, end).collect()
}

// Dense polynomials over GF(p), lowest degree first, no trailing zeros.
type Poly = Vec<u64>;

fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Poly {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    let lead_inv = numtheory::pow_mod(m[dm], p - 2, p);
    while r.len() > dm {
        let top = r.len() - 1;
        let c = r[top] * lead_inv % p;
        if c != 0 {
            for (i, &mi) in m.iter().enumerate() {
                let idx = top - dm + i;
                r[idx] = (r[idx] + p - c * mi % p) % p;
            }
        }
        r.pop();
        r = trim(r);
    }
    trim(r)
}

fn poly_mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    poly_rem(&out, m, p)
}

fn poly_pow_mod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Poly {
    let mut acc: Poly = vec![1];
    let mut b = poly_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul_mod(&acc, &b, m, p);
        }
        b = poly_mul_mod(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Poly {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Ben-Or irreducibility test for a monic polynomial of degree `k >= 1`.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let k = f.len() - 1;
    let x: Poly = vec![0, 1];
    let mut h = x.clone();
    for _ in 1..=k / 2 {
        h = poly_pow_mod(&h, p, f, p);
        let g = poly_gcd(f, &poly_sub(&h, &x, p), p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn unpack(v: u64, p: u64, k: usize) -> Poly {
    let mut out = Vec::with_capacity(k);
    let mut v = v;
    for _ in 0..k {
        out.push(v % p);
        v /= p;
    }
    trim(out)
}

fn pack(a: &[u64], p: u64) -> u64 {
    a.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// GF(q) with full exp/log tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteField {
    order: PrimePower,
    modulus: Vec<u64>,
    xi: Elem,
    exp: Vec<Elem>,
    log: Vec<u32>,
}

const NO_LOG: u32 = u32::MAX;

impl FiniteField {
    pub fn new(q: u64) -> Result<Self> {
        let order = is_prime_power(q)?.ok_or_else(|| invalid!("{q} is not a prime power"))?;
        if q > FIELD_TABLE_LIMIT {
            return Err(capacity!("GF({q}) exceeds the table limit {FIELD_TABLE_LIMIT}"));
        }
        let p = order.p;
        let k = order.k as usize;
        let modulus = (0..p.pow(order.k))
            .map(|low| {
                let mut f = unpack(low, p, k);
                f.resize(k, 0);
                f.push(1);
                f
            })
            .find(|f| is_irreducible(f, p))
            .expect("an irreducible polynomial exists in every degree");

        let prime_factors: Vec<u64> = numtheory::factorize(q - 1)?.into_iter().map(|(r, _)| r).collect();
        let one: Poly = vec![1];
        let xi = (1..q)
            .find(|&g| {
                let g = unpack(g, p, k);
                prime_factors.iter().all(|&r| poly_pow_mod(&g, (q - 1) / r, &modulus, p) != one)
            })
            .expect("the multiplicative group of a field is cyclic") as Elem;

        let n = (q - 1) as usize;
        let mut exp = Vec::with_capacity(n);
        let mut log = vec![NO_LOG; q as usize];
        let xi_poly = unpack(xi as u64, p, k);
        let mut cur: Poly = vec![1];
        for i in 0..n {
            let e = pack(&cur, p) as Elem;
            exp.push(e);
            log[e as usize] = i as u32;
            cur = poly_mul_mod(&cur, &xi_poly, &modulus, p);
        }
        Ok(Self { order, modulus, xi, exp, log })
    }

    pub fn order(&self) -> PrimePower {
        self.order
    }

    pub fn q(&self) -> u64 {
        self.order.q
    }

    pub fn characteristic(&self) -> u64 {
        self.order.p
    }

    /// Monic modulus coefficients, constant term first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn primitive_element(&self) -> Elem {
        self.xi
    }

    pub fn exp_table(&self) -> &[Elem] {
        &self.exp
    }

    /// Number of nonzero elements, `q - 1`.
    pub fn group_order(&self) -> u64 {
        self.order.q - 1
    }

    pub fn zero(&self) -> Elem {
        0
    }

    pub fn one(&self) -> Elem {
        1
    }

    pub fn element(&self, v: u64) -> Result<Elem> {
        if v < self.q() {
            Ok(v as Elem)
        } else {
            Err(invalid!("{v} is not an element of GF({})", self.q()))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.q() as Elem
    }

    /// `xi^i` for any integer exponent.
    pub fn exp(&self, i: i64) -> Elem {
        let n = self.group_order() as i64;
        self.exp[i.rem_euclid(n) as usize]
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let p = self.order.p as u32;
        if p == 2 {
            return a ^ b;
        }
        if self.order.k == 1 {
            return (a + b) % p;
        }
        let (mut a, mut b) = (a, b);
        let (mut out, mut place) = (0u32, 1u32);
        while a > 0 || b > 0 {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place = place.wrapping_mul(p);
        }
        out
    }

    pub fn neg(&self, a: Elem) -> Elem {
        let p = self.order.p as u32;
        if p == 2 {
            return a;
        }
        let (mut a, mut out, mut place) = (a, 0u32, 1u32);
        while a > 0 {
            out += ((p - a % p) % p) * place;
            a /= p;
            place = place.wrapping_mul(p);
        }
        out
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.group_order() as usize;
        let s = self.log[a as usize] as usize + self.log[b as usize] as usize;
        self.exp[if s >= n { s - n } else { s }]
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        let n = self.group_order();
        let l = self.log[a as usize] as u64;
        Ok(self.exp[((n - l) % n) as usize])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e`; negative exponents invert, `0^0 = 1`.
    pub fn pow(&self, a: Elem, e: i64) -> Result<Elem> {
        if a == 0 {
            return match e.cmp(&0) {
                std::cmp::Ordering::Less => Err(Error::DivisionByZero),
                std::cmp::Ordering::Equal => Ok(1),
                std::cmp::Ordering::Greater => Ok(0),
            };
        }
        let n = self.group_order() as i128;
        let l = self.log[a as usize] as i128;
        Ok(self.exp[(l * e as i128).rem_euclid(n) as usize])
    }

    /// The `t in [0, q-2]` with `xi^t = x`.
    pub fn discrete_log(&self, x: Elem) -> Result<u64> {
        match self.log.get(x as usize) {
            None => Err(invalid!("{x} is not an element of GF({})", self.q())),
            Some(&NO_LOG) => Err(Error::Domain("discrete log of zero".into())),
            Some(&l) => Ok(l as u64),
        }
    }

    /// The unique multiplicative subgroup of order `d`.
    pub fn subgroup_of_order(&self, d: u64) -> Result<MultiplicativeSubgroup> {
        let n = self.group_order();
        if d == 0 || !n.is_multiple_of(d) {
            return Err(invalid!("{d} does not divide q - 1 = {n}"));
        }
        let step = (n / d) as usize;
        let elements = (0..d as usize).map(|j| self.exp[j * step]).collect();
        Ok(MultiplicativeSubgroup { field_order: self.q(), order: d, elements })
    }

    /// Cosets `xi^i * G` for `i = 0 .. (q-1)/d`; the first one is `G` itself.
    pub fn cosets(&self, g: &MultiplicativeSubgroup) -> Result<Vec<Vec<Elem>>> {
        if g.field_order != self.q() {
            return Err(invalid!(
                "subgroup belongs to GF({}), not GF({})",
                g.field_order,
                self.q()
            ));
        }
        let count = self.group_order() / g.order;
        Ok((0..count as i64)
            .map(|i| {
                let shift = self.exp(i);
                g.elements.iter().map(|&x| self.mul(shift, x)).collect()
            })
            .collect())
    }
}

/// The order-`d` subgroup `{xi^(j(q-1)/d)}` of `GF(q)^x`, listed by ascending `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicativeSubgroup {
    field_order: u64,
    order: u64,
    elements: Vec<Elem>,
}

impl MultiplicativeSubgroup {
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.elements.contains(&x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Multiplicative order by repeated multiplication, for test oracles.
    fn brute_order(f: &FiniteField, a: Elem) -> u64 {
        let mut x = a;
        let mut n = 1;
        while x != 1 {
            x = f.mul(x, a);
            n += 1;
        }
        n
    }

    #[test]
    fn prime_power_detection() {
        assert_eq!(is_prime_power(16).unwrap(), Some(PrimePower { p: 2, k: 4, q: 16 }));
        assert_eq!(is_prime_power(17).unwrap(), Some(PrimePower { p: 17, k: 1, q: 17 }));
        assert_eq!(is_prime_power(12).unwrap(), None);
        assert!(matches!(is_prime_power(1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn gf7_primitive_is_three() {
        // Orders of 2..6 mod 7 computed by hand: 2 -> 3, 3 -> 6.
        let f = FiniteField::new(7).unwrap();
        let orders: Vec<u64> = (2..7).map(|a| {
            let mut x = a;
            let mut n = 1;
            while x != 1 {
                x = x * a % 7;
                n += 1;
            }
            n
        }).collect();
        assert_eq!(orders, vec![3, 6, 3, 6, 2]);
        assert_eq!(f.primitive_element(), 3);
        assert_eq!(f.modulus(), &[0, 1]);
    }

    #[test]
    fn gf2_is_degenerate_cyclic() {
        let f = FiniteField::new(2).unwrap();
        assert_eq!(f.primitive_element(), 1);
        assert_eq!(f.group_order(), 1);
        assert_eq!(f.exp_table(), &[1]);
    }

    #[test]
    fn gf16_uses_x4_x_1() {
        let f = FiniteField::new(16).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 0, 0, 1]);
        assert_eq!(f.primitive_element(), 2);
        assert_eq!(brute_order(&f, 2), 15);
    }

    #[test]
    fn small_field_arithmetic() {
        let f = FiniteField::new(7).unwrap();
        assert_eq!(f.mul(3, 5), 1);
        assert_eq!(f.inv(4).unwrap(), 2);
        assert_eq!(f.add(5, 4), 2);
        assert_eq!(f.sub(2, 5), 4);
        assert_eq!(f.neg(1), 6);
        assert_eq!(f.pow(3, -1).unwrap(), 5);
        assert_eq!(f.pow(3, 6).unwrap(), 1);
        assert_eq!(f.pow(0, 0).unwrap(), 1);
        assert_eq!(f.inv(0), Err(Error::DivisionByZero));
        assert_eq!(f.div(1, 0), Err(Error::DivisionByZero));
        assert_eq!(f.pow(0, -2), Err(Error::DivisionByZero));
    }

    #[test]
    fn gf9_arithmetic_is_polynomial() {
        let f = FiniteField::new(9).unwrap();
        // Smallest monic irreducible quadratic over GF(3) under packed order is x^2 + 1.
        assert_eq!(f.modulus(), &[1, 0, 1]);
        // x * x = x^2 = -1 = 2.
        assert_eq!(f.mul(3, 3), 2);
        // (1 + x) + (2 + 2x) = 0.
        assert_eq!(f.add(4, 8), 0);
    }

    #[test]
    fn discrete_logs_in_gf7() {
        let f = FiniteField::new(7).unwrap();
        assert_eq!(f.discrete_log(1).unwrap(), 0);
        assert_eq!(f.discrete_log(3).unwrap(), 1);
        assert_eq!(f.discrete_log(6).unwrap(), 3);
        assert!(matches!(f.discrete_log(0), Err(Error::Domain(_))));
    }

    #[test]
    fn subgroups_and_cosets_of_gf7() {
        let f = FiniteField::new(7).unwrap();
        assert_eq!(f.subgroup_of_order(3).unwrap().elements(), &[1, 2, 4]);
        assert_eq!(f.subgroup_of_order(2).unwrap().elements(), &[1, 6]);
        assert_eq!(f.subgroup_of_order(1).unwrap().elements(), &[1]);
        assert!(f.subgroup_of_order(4).is_err());
        let g = f.subgroup_of_order(3).unwrap();
        assert_eq!(f.cosets(&g).unwrap(), vec![vec![1, 2, 4], vec![3, 6, 5]]);
        let whole = f.subgroup_of_order(6).unwrap();
        let cs = f.cosets(&whole).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].len(), 6);
    }

    #[test]
    fn gf16_order5_cosets() {
        let f = FiniteField::new(16).unwrap();
        let g = f.subgroup_of_order(5).unwrap();
        let cs = f.cosets(&g).unwrap();
        assert_eq!(cs.len(), 3);
        let mut all: Vec<Elem> = cs.concat();
        all.sort_unstable();
        assert_eq!(all, (1..16).collect::<Vec<_>>());
        let other = FiniteField::new(7).unwrap();
        assert!(other.cosets(&g).is_err());
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(matches!(FiniteField::new(12), Err(Error::InvalidArgument(_))));
        assert!(matches!(FiniteField::new((1 << 20) + 7), Err(Error::InvalidArgument(_)) | Err(Error::Capacity(_))));
        assert!(matches!(FiniteField::new(1 << 21), Err(Error::Capacity(_))));
    }

    #[test]
    fn field_axioms_small_fields() {
        for q in prime_powers(2, 32) {
            let f = FiniteField::new(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "q={q} a={a}");
                    assert_eq!(f.exp(f.discrete_log(a).unwrap() as i64), a);
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    if a != 0 && b != 0 {
                        let n = f.group_order();
                        let lhs = f.discrete_log(f.mul(a, b)).unwrap();
                        let rhs = (f.discrete_log(a).unwrap() + f.discrete_log(b).unwrap()) % n;
                        assert_eq!(lhs, rhs);
                    }
                }
            }
            assert_eq!(brute_order(&f, f.primitive_element()), q - 1);
        }
    }

    #[test]
    fn subgroup_closure_exhaustive() {
        for q in prime_powers(2, 64) {
            let f = FiniteField::new(q).unwrap();
            for d in numtheory::divisors(q - 1).unwrap() {
                let g = f.subgroup_of_order(d).unwrap();
                assert_eq!(g.elements().len() as u64, d);
                assert!(g.contains(1));
                for &a in g.elements() {
                    assert!(g.contains(f.inv(a).unwrap()));
                    for &b in g.elements() {
                        assert!(g.contains(f.mul(a, b)));
                    }
                }
                let cs = f.cosets(&g).unwrap();
                let mut all: Vec<Elem> = cs.iter().flatten().copied().collect();
                assert!(cs.iter().all(|c| c.len() as u64 == d));
                all.sort_unstable();
                all.dedup();
                assert_eq!(all.len() as u64, q - 1);
            }
        }
    }
}
