//! Linear network codes: coding vectors, verification and explicit solutions.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{capacity, invalid, Error, Result};
use crate::exec::Exec;
use crate::gf::{Elem, FiniteField};
use crate::netmodel::{build_combination_network, Network, NetworkKind, NetworkParams};
use crate::numtheory::divisors;
use crate::solvability::divisor_condition_lhs;
use crate::zn::{coset_interval_sets, iterated_sumset, ZnSet};

/// Samples drawn by [`random_search`] when used as refutation evidence.
pub const REFUTATION_SAMPLES: usize = 1000;
pub const REFUTATION_SEED: u64 = 0x5eed_c0de;

/// Projective points examined by [`exhaustive_point_search`] per parent before giving up.
pub const POINT_SEARCH_LIMIT: u64 = 1 << 16;

/// Coefficients `k_{d,e}` on adjacent edge pairs; absent pairs read as 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    field_order: u64,
    coefficients: BTreeMap<(usize, usize), Elem>,
}

impl LinearCode {
    pub fn new(field: &FiniteField) -> Self {
        Self { field_order: field.q(), coefficients: BTreeMap::new() }
    }

    pub fn field_order(&self) -> u64 {
        self.field_order
    }

    pub fn set(&mut self, d: usize, e: usize, k: Elem) {
        if k == 0 {
            self.coefficients.remove(&(d, e));
        } else {
            self.coefficients.insert((d, e), k);
        }
    }

    pub fn get(&self, d: usize, e: usize) -> Elem {
        self.coefficients.get(&(d, e)).copied().unwrap_or(0)
    }

    /// Nonzero coefficients in `(d, e)` order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), Elem)> + '_ {
        self.coefficients.iter().map(|(&k, &v)| (k, v))
    }

    fn check_field(&self, field: &FiniteField) -> Result<()> {
        if self.field_order != field.q() {
            return Err(invalid!("code over GF({}) used with GF({})", self.field_order, field.q()));
        }
        Ok(())
    }

    /// Sets every coefficient from `d` into `e` for all edges `e` leaving a node with a single in-edge.
    fn pass_through(&mut self, net: &Network, node: usize) {
        if let [d] = net.in_edges(node) {
            for &e in net.out_edges(node) {
                self.set(*d, e, 1);
            }
        }
    }
}

/// One `omega`-dimensional coding vector per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingVectors {
    pub omega: usize,
    pub vectors: Vec<Vec<Elem>>,
}

impl CodingVectors {
    pub fn edge(&self, e: usize) -> &[Elem] {
        &self.vectors[e]
    }
}

/// Propagates coding vectors from the source in edge order.
pub fn compute_coding_vectors(net: &Network, field: &FiniteField, code: &LinearCode) -> Result<CodingVectors> {
    code.check_field(field)?;
    let omega = net.omega();
    let mut vectors: Vec<Vec<Elem>> = vec![Vec::new(); net.edges().len()];
    let source_edges = net.out_edges(net.source());
    for (e, &(tail, _)) in net.edges().iter().enumerate() {
        vectors[e] = if tail == net.source() {
            let idx = source_edges.iter().position(|&x| x == e).expect("edge leaves the source");
            (0..omega).map(|i| Elem::from(i == idx)).collect()
        } else {
            let mut acc = vec![0; omega];
            for &d in net.in_edges(tail) {
                let k = code.get(d, e);
                if k == 0 {
                    continue;
                }
                for (a, &x) in acc.iter_mut().zip(&vectors[d]) {
                    *a = field.add(*a, field.mul(k, x));
                }
            }
            acc
        };
    }
    Ok(CodingVectors { omega, vectors })
}

/// Rank of a matrix over the field by Gaussian elimination.
pub fn rank(field: &FiniteField, matrix: &[Vec<Elem>]) -> Result<usize> {
    let cols = matrix.first().map_or(0, Vec::len);
    if matrix.iter().any(|row| row.len() != cols) {
        return Err(invalid!("ragged matrix"));
    }
    if let Some(x) = matrix.iter().flatten().find(|&&x| u64::from(x) >= field.q()) {
        return Err(invalid!("{x} is not an element of GF({})", field.q()));
    }
    let mut m = matrix.to_vec();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        let inv = field.inv(m[r][c])?;
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let f = field.mul(m[i][c], inv);
                for j in c..cols {
                    let sub = field.mul(f, m[r][j]);
                    m[i][j] = field.sub(m[i][j], sub);
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    Ok(r)
}

/// Per-receiver outcome of [`is_solution`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionReport {
    pub solved: bool,
    /// Rank seen by each receiver, in receiver order.
    pub ranks: Vec<usize>,
    /// Receivers whose rank falls short of `omega`.
    pub failing: Vec<usize>,
}

/// Checks that every receiver's incoming coding vectors have full rank.
pub fn is_solution(net: &Network, field: &FiniteField, code: &LinearCode) -> Result<SolutionReport> {
    is_solution_with(net, field, code, Exec::default())
}

pub fn is_solution_with(net: &Network, field: &FiniteField, code: &LinearCode, exec: Exec) -> Result<SolutionReport> {
    let cv = compute_coding_vectors(net, field, code)?;
    let ranks: Vec<usize> = exec
        .map(net.receivers(), |&r| {
            let cols: Vec<Vec<Elem>> = net.in_edges(r).iter().map(|&e| cv.vectors[e].clone()).collect();
            rank(field, &cols)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let failing: Vec<usize> = net
        .receivers()
        .iter()
        .zip(&ranks)
        .filter(|&(_, &rk)| rk < net.omega())
        .map(|(&r, _)| r)
        .collect();
    Ok(SolutionReport { solved: failing.is_empty(), ranks, failing })
}

/// Exponent `t*` with `xi^{t*} = (-1)^{omega-1}` in GF(q).
pub fn target_exponent(omega: usize, q: u64) -> u64 {
    if q.is_multiple_of(2) {
        0
    } else {
        let n = q - 1;
        ((omega as u128 - 1) * (n as u128 / 2) % n as u128) as u64
    }
}

/// Sets `S_i` of distinct nonzero elements with their discrete logs `T_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionWitness {
    pub q: u64,
    pub xi: Elem,
    #[serde(rename = "T")]
    pub t_sets: Vec<Vec<u64>>,
    #[serde(rename = "S")]
    pub s_sets: Vec<Vec<Elem>>,
}

impl SolutionWitness {
    /// Builds a witness from exponent sets `T_i`.
    pub fn from_exponents(field: &FiniteField, t_sets: Vec<Vec<u64>>) -> Self {
        let s_sets = t_sets.iter().map(|t| t.iter().map(|&x| field.exp(x as i64)).collect()).collect();
        Self { q: field.q(), xi: field.primitive_element(), t_sets, s_sets }
    }

    /// Builds a witness from element sets `S_i`; zero is rejected.
    pub fn from_elements(field: &FiniteField, s_sets: Vec<Vec<Elem>>) -> Result<Self> {
        let t_sets = s_sets
            .iter()
            .map(|s| s.iter().map(|&a| field.discrete_log(a)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(Self { q: field.q(), xi: field.primitive_element(), t_sets, s_sets })
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.s_sets.iter().map(|s| s.len() as u64).collect()
    }

    /// Distinct nonzero entries in every `S_i`, and `(-1)^{omega-1}` is no product
    /// of one element from each set.
    pub fn satisfies_product_condition(&self) -> Result<bool> {
        let n = self.q - 1;
        for s in &self.s_sets {
            let mut sorted = s.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != s.len() || sorted.first() == Some(&0) {
                return Ok(false);
            }
        }
        let sets = self
            .t_sets
            .iter()
            .map(|t| ZnSet::new(n, t.iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        let sum = iterated_sumset(&sets)?;
        Ok(!sum.contains(target_exponent(self.s_sets.len(), self.q)))
    }

    /// The layer-4 coding vectors induced by [`sets_to_code`], one column per `n_{i,j}`.
    pub fn matrix(&self, field: &FiniteField) -> Vec<Vec<Elem>> {
        induced_matrix(field, &self.s_sets)
    }
}

fn induced_matrix(field: &FiniteField, s_sets: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
    let omega = s_sets.len();
    let total: usize = s_sets.iter().map(Vec::len).sum();
    let mut m = vec![vec![0; total]; omega];
    let mut col = 0;
    for (i, s) in s_sets.iter().enumerate() {
        let prev = (i + omega - 1) % omega;
        let lead = if i == 0 { field.neg(1) } else { 1 };
        for &a in s {
            m[prev][col] = lead;
            m[i][col] = a;
            col += 1;
        }
    }
    m
}

fn general_params(net: &Network) -> Result<NetworkParams> {
    match net.kind() {
        NetworkKind::General { d } => NetworkParams::new(net.omega(), d.clone()),
        _ => Err(invalid!("expected a general network N_{{omega,d}}")),
    }
}

fn node(net: &Network, label: &str) -> Result<usize> {
    net.node_by_label(label).ok_or_else(|| invalid!("network has no node {label}"))
}

/// The in-edge of `v` whose tail carries `label`.
fn in_edge_from(net: &Network, v: usize, label: &str) -> Result<usize> {
    net.in_edges(v)
        .iter()
        .copied()
        .find(|&e| net.label(net.edges()[e].0) == label)
        .ok_or_else(|| invalid!("no edge {label} -> {}", net.label(v)))
}

/// The code on `N_{omega,d}` whose child of `v_i` number `j` carries
/// `-e_omega + a_{1j} e_1` for `i = 1` and `e_{i-1} + a_{ij} e_i` otherwise.
/// All other coefficients are 1.
pub fn sets_to_code(net: &Network, field: &FiniteField, s_sets: &[Vec<Elem>]) -> Result<LinearCode> {
    let params = general_params(net)?;
    let sizes: Vec<u64> = s_sets.iter().map(|s| s.len() as u64).collect();
    if sizes != params.d {
        return Err(invalid!("set sizes {sizes:?} do not match out-degrees {:?}", params.d));
    }
    if let Some(x) = s_sets.iter().flatten().find(|&&x| u64::from(x) >= field.q()) {
        return Err(invalid!("{x} is not an element of GF({})", field.q()));
    }
    let omega = params.omega;
    let mut code = LinearCode::new(field);
    for v in 0..net.nodes().len() {
        if v != net.source() {
            code.pass_through(net, v);
        }
    }
    for (i, s) in s_sets.iter().enumerate() {
        let v = node(net, &format!("v_{}", i + 1))?;
        let from_prev = in_edge_from(net, v, &format!("u_{}", (i + omega - 1) % omega + 1))?;
        let from_own = in_edge_from(net, v, &format!("u_{}", i + 1))?;
        let lead = if i == 0 { field.neg(1) } else { 1 };
        for (&e, &a) in net.out_edges(v).iter().zip(s) {
            code.set(from_prev, e, lead);
            code.set(from_own, e, a);
        }
    }
    Ok(code)
}

/// An explicit solution over GF(q) from the smallest divisor satisfying the
/// closed-form condition, or `None` when no divisor does.
pub fn construct_solution(params: &NetworkParams, q: u64) -> Result<Option<SolutionWitness>> {
    let field = FiniteField::new(q)?;
    construct_solution_in(params, &field)
}

pub fn construct_solution_in(params: &NetworkParams, field: &FiniteField) -> Result<Option<SolutionWitness>> {
    params.validate()?;
    let q = field.q();
    let n = q - 1;
    let Some(d) = divisors(n)?.into_iter().find(|&d| divisor_condition_lhs(params, d) <= q as u128) else {
        return Ok(None);
    };
    let mut sets = coset_interval_sets(n, &params.d, d)?;
    let sum = iterated_sumset(&sets)?;
    let target = target_exponent(params.omega, q);
    if sum.contains(target) {
        let delta = (1..n)
            .find(|&delta| !sum.contains((target + n - delta) % n))
            .ok_or_else(|| Error::Internal(format!("sumset of {params} exhausts Z_{n}")))?;
        sets[0] = sets[0].shift(delta);
    }
    let witness = SolutionWitness::from_exponents(field, sets.iter().map(ZnSet::members).collect());
    if !witness.satisfies_product_condition()? {
        return Err(Error::Internal(format!("witness for {params} over GF({q}) violates the product condition")));
    }
    Ok(Some(witness))
}

/// Projective points `(1,0), (0,1), (1,x)` used by [`solve_combination`].
fn projective_line(field: &FiniteField) -> impl Iterator<Item = [Elem; 2]> + '_ {
    [[1, 0], [0, 1]].into_iter().chain((1..field.q() as Elem).map(|x| [1, x]))
}

/// Mixing coefficients for the relay of a combination network.
pub fn combination_code(net: &Network, field: &FiniteField, points: &[[Elem; 2]]) -> Result<LinearCode> {
    let NetworkKind::Combination { n, .. } = *net.kind() else {
        return Err(invalid!("expected a combination network"));
    };
    if points.len() != n {
        return Err(invalid!("need {n} points, got {}", points.len()));
    }
    let relay = node(net, "a")?;
    let mut code = LinearCode::new(field);
    for v in 0..net.nodes().len() {
        if v != net.source() && v != relay {
            code.pass_through(net, v);
        }
    }
    let inputs = net.in_edges(relay);
    for (&e, p) in net.out_edges(relay).iter().zip(points) {
        code.set(inputs[0], e, p[0]);
        code.set(inputs[1], e, p[1]);
    }
    Ok(code)
}

/// `n` pairwise independent vectors in GF(q)^2 when `q >= n - 1`, verified on the
/// `(n,2)`-combination network.
pub fn solve_combination(n: usize, q: u64) -> Result<Option<Vec<[Elem; 2]>>> {
    if n < 3 {
        return Err(invalid!("combination network needs n >= 3, got {n}"));
    }
    let field = FiniteField::new(q)?;
    if (q as u128) + 1 < n as u128 {
        return Ok(None);
    }
    let points: Vec<[Elem; 2]> = projective_line(&field).take(n).collect();
    let net = build_combination_network(n, false)?;
    let code = combination_code(&net, &field, &points)?;
    if !is_solution(&net, &field, &code)?.solved {
        return Err(Error::Internal(format!("projective points fail on the ({n},2)-combination network")));
    }
    Ok(Some(points))
}

/// A code on `N_q` over `field`, present exactly when `|field| >= q`.
pub fn prescribed_qmin_code(net: &Network, field: &FiniteField) -> Result<Option<LinearCode>> {
    let NetworkKind::PrescribedQmin { q } = *net.kind() else {
        return Err(invalid!("expected a prescribed-q_min network"));
    };
    if field.q() < q {
        return Ok(None);
    }
    let mut code = LinearCode::new(field);
    for v in 0..net.nodes().len() {
        if v != net.source() {
            code.pass_through(net, v);
        }
    }
    // n_{1,1} = e_1 + e_2, n_{2,1} = e_2 + e_3, n_{3,j} = x_j e_1 + e_3 with the
    // x_j distinct, nonzero and different from -1.
    let minus_one = field.neg(1);
    let mut xs = (1..field.q() as Elem).filter(|&x| x != minus_one);
    for i in 1..=3 {
        let v = node(net, &format!("v_{i}"))?;
        let own = in_edge_from(net, v, &format!("u_{i}"))?;
        let next = in_edge_from(net, v, &format!("u_{}", i % 3 + 1))?;
        for &e in net.out_edges(v) {
            if i == 3 {
                code.set(own, e, 1);
                code.set(next, e, xs.next().expect("field has at least q - 2 candidates"));
            } else {
                code.set(own, e, 1);
                code.set(next, e, 1);
            }
        }
    }
    Ok(Some(code))
}

/// Draws `samples` codes with coefficients uniform over the nonzero elements and
/// returns the first solution found.
pub fn random_search(net: &Network, field: &FiniteField, samples: usize, seed: u64) -> Result<Option<LinearCode>> {
    random_search_with(net, field, samples, seed, Exec::default())
}

pub fn random_search_with(
    net: &Network,
    field: &FiniteField,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<Option<LinearCode>> {
    let pairs: Vec<(usize, usize)> = (0..net.nodes().len())
        .filter(|&v| v != net.source())
        .flat_map(|v| {
            let outs = net.out_edges(v);
            net.in_edges(v).iter().flat_map(move |&d| outs.iter().map(move |&e| (d, e)))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let codes: Vec<LinearCode> = (0..samples)
        .map(|_| {
            let mut code = LinearCode::new(field);
            for &(d, e) in &pairs {
                code.set(d, e, rng.random_range(1..field.q()) as Elem);
            }
            code
        })
        .collect();
    let found = exec.find_map_first(&codes, |code| match is_solution_with(net, field, code, Exec::Sequential) {
        Ok(r) if r.solved => Some(Ok(code.clone())),
        Ok(_) => None,
        Err(e) => Some(Err(e)),
    });
    found.transpose()
}

/// One coding vector per receiver parent from [`exhaustive_point_search`].
pub type PointAssignment = Vec<(usize, Vec<Elem>)>;

/// Exhaustive search for a solution in which every receiver parent carries an
/// arbitrary projective point of the span of the source units reaching it.
///
/// This describes every linear code exactly when each receiver parent has a
/// single in-edge and every node above it can mix its inputs freely, which is
/// the case for all three network families built here.
pub fn exhaustive_point_search(net: &Network, field: &FiniteField) -> Result<Option<PointAssignment>> {
    exhaustive_point_search_with(net, field, Exec::default())
}

pub fn exhaustive_point_search_with(net: &Network, field: &FiniteField, exec: Exec) -> Result<Option<PointAssignment>> {
    let omega = net.omega();
    if omega > 64 {
        return Err(capacity!("point search handles at most 64 source units"));
    }
    let mut reach = vec![0u64; net.nodes().len()];
    for (e, &(a, b)) in net.edges().iter().enumerate() {
        let add = if a == net.source() {
            1u64 << net.out_edges(a).iter().position(|&x| x == e).expect("edge leaves the source")
        } else {
            reach[a]
        };
        reach[b] |= add;
    }
    let supports = net.receiver_supports();
    let mut parents: Vec<usize> = supports.iter().flatten().copied().collect();
    parents.sort_unstable();
    parents.dedup();
    for &p in &parents {
        if net.in_edges(p).len() != 1 {
            return Err(invalid!("receiver parent {} has several in-edges", net.label(p)));
        }
    }
    let options: Vec<Vec<Vec<Elem>>> = parents
        .iter()
        .map(|&p| projective_points(field, reach[p], omega))
        .collect::<Result<_>>()?;
    let slot = |v: usize| parents.binary_search(&v).expect("parent is listed");
    // Receivers grouped by the last parent they depend on.
    let mut due: Vec<Vec<Vec<usize>>> = vec![Vec::new(); parents.len()];
    for s in &supports {
        let slots: Vec<usize> = s.iter().map(|&v| slot(v)).collect();
        let last = *slots.iter().max().expect("receivers have parents");
        due[last].push(slots);
    }
    let search = Search { field, omega, options: &options, due: &due };
    let first: Vec<usize> = (0..options.first().map_or(0, Vec::len)).collect();
    if parents.is_empty() {
        return Ok(Some(Vec::new()));
    }
    let found = exec.find_map_first(&first, |&c| {
        let mut choice = vec![0usize; parents.len()];
        choice[0] = c;
        search.extend(&mut choice, 0).then_some(choice)
    });
    Ok(found.map(|choice| {
        parents.iter().zip(&choice).enumerate().map(|(i, (&p, &c))| (p, options[i][c].clone())).collect()
    }))
}

struct Search<'a> {
    field: &'a FiniteField,
    omega: usize,
    options: &'a [Vec<Vec<Elem>>],
    due: &'a [Vec<Vec<usize>>],
}

impl Search<'_> {
    // Checks receivers completed at `level`, then recurses.
    fn extend(&self, choice: &mut [usize], level: usize) -> bool {
        for slots in &self.due[level] {
            let cols: Vec<Vec<Elem>> = slots.iter().map(|&s| self.options[s][choice[s]].clone()).collect();
            if rank(self.field, &cols).expect("points are field elements") < self.omega {
                return false;
            }
        }
        let next = level + 1;
        if next == choice.len() {
            return true;
        }
        for c in 0..self.options[next].len() {
            choice[next] = c;
            if self.extend(choice, next) {
                return true;
            }
        }
        false
    }
}

/// Normalized nonzero vectors supported on the units in `mask`.
fn projective_points(field: &FiniteField, mask: u64, omega: usize) -> Result<Vec<Vec<Elem>>> {
    let coords: Vec<usize> = (0..omega).filter(|&i| mask >> i & 1 == 1).collect();
    let q = field.q();
    let r = coords.len() as u32;
    let count = q.checked_pow(r).map(|x| (x - 1) / (q - 1));
    if count.is_none_or(|c| c > POINT_SEARCH_LIMIT) {
        return Err(capacity!("span of dimension {r} over GF({q}) has too many points"));
    }
    let mut out = Vec::new();
    for lead in 0..coords.len() {
        let free = coords.len() - lead - 1;
        for mut idx in 0..q.pow(free as u32) {
            let mut v = vec![0; omega];
            v[coords[lead]] = 1;
            for &c in &coords[lead + 1..] {
                v[c] = (idx % q) as Elem;
                idx /= q;
            }
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{build_general_network, build_prescribed_qmin_network};

    fn gf(q: u64) -> FiniteField {
        FiniteField::new(q).unwrap()
    }

    fn params(d: &[u64]) -> NetworkParams {
        NetworkParams::new(d.len(), d.to_vec()).unwrap()
    }

    #[test]
    fn ranks() {
        let f7 = gf(7);
        let id3 = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        assert_eq!(rank(&f7, &id3).unwrap(), 3);
        assert_eq!(rank(&gf(2), &[vec![1, 1], vec![1, 1]]).unwrap(), 1);
        let m = vec![vec![1, 0, 1], vec![1, 1, 0], vec![0, 1, 1]];
        assert_eq!(rank(&f7, &m).unwrap(), 3);
        // Over GF(2) the same matrix has determinant 1 + 1 = 0.
        assert_eq!(rank(&gf(2), &m).unwrap(), 2);
        assert!(rank(&f7, &[vec![1, 2], vec![1]]).is_err());
        assert!(rank(&f7, &[vec![9]]).is_err());
        assert_eq!(rank(&f7, &[]).unwrap(), 0);
    }

    #[test]
    fn coding_vectors_unrolled() {
        let net = build_general_network(&params(&[3, 3, 3])).unwrap();
        let f = gf(7);
        let mut ones = LinearCode::new(&f);
        for v in 0..net.nodes().len() {
            for &d in net.in_edges(v) {
                for &e in net.out_edges(v) {
                    ones.set(d, e, 1);
                }
            }
        }
        let cv = compute_coding_vectors(&net, &f, &ones).unwrap();
        let v1 = net.node_by_label("v_1").unwrap();
        for &e in net.out_edges(v1) {
            assert_eq!(cv.edge(e), &[1, 0, 1]);
        }
        let zero = compute_coding_vectors(&net, &f, &LinearCode::new(&f)).unwrap();
        for (e, &(a, _)) in net.edges().iter().enumerate() {
            if a != net.source() {
                assert!(zero.edge(e).iter().all(|&x| x == 0));
            }
        }
        assert!(compute_coding_vectors(&net, &gf(5), &ones).is_err());
    }

    #[test]
    fn all_ones_fails_over_gf2() {
        let net = build_general_network(&params(&[3, 3, 3])).unwrap();
        let f = gf(2);
        let mut ones = LinearCode::new(&f);
        for v in 0..net.nodes().len() {
            for &d in net.in_edges(v) {
                for &e in net.out_edges(v) {
                    ones.set(d, e, 1);
                }
            }
        }
        let report = is_solution(&net, &f, &ones).unwrap();
        assert!(!report.solved);
        assert!(!report.failing.is_empty());
    }

    #[test]
    fn receiverless_graph_is_vacuously_solved() {
        use crate::netmodel::Node;
        let nodes = vec![
            Node { id: 0, layer: 1, label: "s".into() },
            Node { id: 1, layer: 2, label: "x".into() },
        ];
        let net = Network::new(NetworkKind::Custom, 1, nodes, vec![(0, 1)], vec![]).unwrap();
        let f = gf(3);
        assert!(is_solution(&net, &f, &LinearCode::new(&f)).unwrap().solved);
    }

    #[test]
    fn known_witness_over_gf7() {
        let net = build_general_network(&params(&[3, 3, 3])).unwrap();
        let f = gf(7);
        let w = SolutionWitness::from_elements(&f, vec![vec![3, 6, 5], vec![1, 2, 4], vec![1, 2, 4]]).unwrap();
        assert!(w.satisfies_product_condition().unwrap());
        let code = sets_to_code(&net, &f, &w.s_sets).unwrap();
        assert!(is_solution(&net, &f, &code).unwrap().solved);
        // The induced layer-4 vectors are the matrix columns.
        let cv = compute_coding_vectors(&net, &f, &code).unwrap();
        let m = w.matrix(&f);
        for (col, v) in net.layer_nodes(4).into_iter().enumerate() {
            let e = net.in_edges(v)[0];
            let column: Vec<Elem> = m.iter().map(|row| row[col]).collect();
            assert_eq!(cv.edge(e), &column[..]);
        }
    }

    #[test]
    fn product_violation_fails_at_transversal() {
        let net = build_general_network(&params(&[3, 3, 3])).unwrap();
        let f = gf(7);
        // 1 * 1 * 1 = (-1)^2.
        let w = SolutionWitness::from_elements(&f, vec![vec![1, 2, 4], vec![1, 2, 4], vec![1, 2, 4]]).unwrap();
        assert!(!w.satisfies_product_condition().unwrap());
        let report = is_solution(&net, &f, &sets_to_code(&net, &f, &w.s_sets).unwrap()).unwrap();
        assert!(!report.solved);
        let bad: Vec<Vec<String>> = report
            .failing
            .iter()
            .map(|&r| net.in_edges(r).iter().map(|&e| net.label(net.edges()[e].0).to_string()).collect())
            .collect();
        assert!(bad.contains(&vec!["n_{1,1}".to_string(), "n_{2,1}".into(), "n_{3,1}".into()]));
    }

    #[test]
    fn cardinality_mismatch() {
        let net = build_general_network(&params(&[3, 3, 3])).unwrap();
        let f = gf(7);
        assert!(sets_to_code(&net, &f, &[vec![1], vec![1], vec![1]]).is_err());
    }

    #[test]
    fn constructed_solutions() {
        let w = construct_solution(&params(&[3, 3, 3]), 7).unwrap().unwrap();
        assert!(w.t_sets.iter().all(|t| {
            let mut diffs: Vec<u64> = t.iter().map(|x| (x - t[0]) % 6).collect();
            diffs.sort_unstable();
            diffs == vec![0, 2, 4]
        }));
        let net = build_general_network(&params(&[3, 3, 3])).unwrap();
        let f = gf(7);
        assert!(is_solution(&net, &f, &sets_to_code(&net, &f, &w.s_sets).unwrap()).unwrap().solved);
        assert_eq!(construct_solution(&params(&[3, 3, 3]), 8).unwrap(), None);

        let w = construct_solution(&params(&[5, 5, 10]), 16).unwrap().unwrap();
        assert_eq!(w.t_sets[1], vec![0, 3, 6, 9, 12]);
        assert_eq!(w.t_sets[2].len(), 10);
        assert!(w.satisfies_product_condition().unwrap());
        assert!(construct_solution(&params(&[3, 3, 3]), 6).is_err());
    }

    #[test]
    fn witness_json_shape() {
        let w = construct_solution(&params(&[3, 3, 3]), 7).unwrap().unwrap();
        let v = serde_json::to_value(&w).unwrap();
        assert_eq!(v["q"], 7);
        assert_eq!(v["xi"], 3);
        assert_eq!(v["T"].as_array().unwrap().len(), 3);
        assert_eq!(v["S"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn combination_examples() {
        assert!(solve_combination(6, 5).unwrap().is_some());
        assert_eq!(solve_combination(6, 4).unwrap(), None);
        assert_eq!(solve_combination(3, 2).unwrap().unwrap(), vec![[1, 0], [0, 1], [1, 1]]);
        assert!(solve_combination(2, 2).is_err());
        assert!(solve_combination(4, 6).is_err());
    }

    #[test]
    fn combination_points_oracle() {
        for n in 3..=6usize {
            let net = build_combination_network(n, false).unwrap();
            for q in [2u64, 3, 4, 5] {
                let found = exhaustive_point_search(&net, &gf(q)).unwrap().is_some();
                assert_eq!(found, q + 1 >= n as u64, "n={n} q={q}");
            }
        }
    }

    #[test]
    fn nq_code_and_oracle() {
        for q in [5u64, 7] {
            let net = build_prescribed_qmin_network(q).unwrap();
            let f = gf(q);
            let code = prescribed_qmin_code(&net, &f).unwrap().unwrap();
            assert!(is_solution(&net, &f, &code).unwrap().solved);
            assert!(exhaustive_point_search(&net, &f).unwrap().is_some());
        }
        let net = build_prescribed_qmin_network(5).unwrap();
        assert_eq!(prescribed_qmin_code(&net, &gf(4)).unwrap(), None);
        assert_eq!(exhaustive_point_search(&net, &gf(4)).unwrap(), None);
        assert_eq!(exhaustive_point_search(&net, &gf(3)).unwrap(), None);
    }

    #[test]
    fn random_search_finds_easy_solutions() {
        let net = build_general_network(&params(&[2, 2, 2])).unwrap();
        let f = gf(7);
        let code = random_search(&net, &f, REFUTATION_SAMPLES, REFUTATION_SEED).unwrap().unwrap();
        assert!(is_solution(&net, &f, &code).unwrap().solved);
        let seq = random_search_with(&net, &f, 200, 1, Exec::Sequential).unwrap();
        let par = random_search_with(&net, &f, 200, 1, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn general_oracle_agrees_with_construction() {
        let p = params(&[2, 2, 2]);
        let net = build_general_network(&p).unwrap();
        for q in [3u64, 4, 5] {
            let built = construct_solution(&p, q).unwrap().is_some();
            let searched = exhaustive_point_search(&net, &gf(q)).unwrap().is_some();
            assert_eq!(built, searched, "q={q}");
        }
    }
}
