//! Layered multicast networks: the general family, the prescribed-`q_min`
//! family and combination networks, with max-flow and export.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{capacity, invalid, Result};
use crate::exec::Exec;
use crate::gf::is_prime_power;

/// Candidate receiver sets examined by [`build_general_network`] before giving up.
pub const RECEIVER_ENUM_LIMIT: u128 = 20_000_000;

/// Version stamp of the JSON network format.
pub const JSON_SCHEMA_VERSION: u32 = 1;

/// Source dimension and layer-3 out-degrees of a general network.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NetworkParams {
    pub omega: usize,
    pub d: Vec<u64>,
}

impl NetworkParams {
    pub fn new(omega: usize, d: Vec<u64>) -> Result<Self> {
        let p = Self { omega, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega < 3 {
            return Err(invalid!("source dimension must be at least 3, got {}", self.omega));
        }
        if self.d.len() != self.omega {
            return Err(invalid!("expected {} out-degrees, got {}", self.omega, self.d.len()));
        }
        if let Some(x) = self.d.iter().find(|&&x| x < 2) {
            return Err(invalid!("every out-degree must be at least 2, got {x}"));
        }
        Ok(())
    }

    pub fn sum_d(&self) -> u128 {
        self.d.iter().map(|&x| x as u128).sum()
    }

    pub fn max_d(&self) -> u64 {
        self.d.iter().copied().max().unwrap_or(0)
    }
}

impl std::fmt::Display for NetworkParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "N_{{{},({})}}", self.omega, self.d.iter().join(","))
    }
}

/// Which construction produced a network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NetworkKind {
    General { d: Vec<u64> },
    PrescribedQmin { q: u64 },
    Combination { n: usize, extended: bool },
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub layer: u8,
    pub label: String,
}

/// A layered DAG with a unique source. Node ids are dense and edges are
/// listed so that every edge into a node precedes every edge out of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    kind: NetworkKind,
    omega: usize,
    nodes: Vec<Node>,
    edges: Vec<(usize, usize)>,
    source: usize,
    receivers: Vec<usize>,
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
}

impl Network {
    /// Assembles and validates a network from raw parts.
    pub fn new(
        kind: NetworkKind,
        omega: usize,
        nodes: Vec<Node>,
        edges: Vec<(usize, usize)>,
        receivers: Vec<usize>,
    ) -> Result<Self> {
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(invalid!("node ids must be dense, found {} at position {i}", node.id));
            }
        }
        let mut labels = BTreeSet::new();
        for node in &nodes {
            if !labels.insert(node.label.as_str()) {
                return Err(invalid!("duplicate node label {}", node.label));
            }
        }
        let sources: Vec<usize> = nodes.iter().filter(|n| n.layer == 1).map(|n| n.id).collect();
        let [source] = sources[..] else {
            return Err(invalid!("expected exactly one layer-1 node, found {}", sources.len()));
        };
        let mut in_edges = vec![Vec::new(); nodes.len()];
        let mut out_edges = vec![Vec::new(); nodes.len()];
        for (e, &(a, b)) in edges.iter().enumerate() {
            if a >= nodes.len() || b >= nodes.len() {
                return Err(invalid!("edge {e} references an unknown node"));
            }
            if nodes[a].layer >= nodes[b].layer {
                return Err(invalid!("edge {} -> {} does not go downward", nodes[a].label, nodes[b].label));
            }
            out_edges[a].push(e);
            in_edges[b].push(e);
        }
        if out_edges[source].len() != omega {
            return Err(invalid!("source out-degree {} differs from omega {omega}", out_edges[source].len()));
        }
        for &r in &receivers {
            if r >= nodes.len() {
                return Err(invalid!("unknown receiver {r}"));
            }
            if in_edges[r].len() != omega {
                return Err(invalid!("receiver {} has in-degree {}", nodes[r].label, in_edges[r].len()));
            }
        }
        let mut net = Self { kind, omega, nodes, edges, source, receivers, in_edges, out_edges };
        net.sort_edges_topologically();
        Ok(net)
    }

    // Reorders edges by tail layer (stable), keeping adjacency in sync.
    fn sort_edges_topologically(&mut self) {
        let order: Vec<usize> = (0..self.edges.len())
            .sorted_by_key(|&e| self.nodes[self.edges[e].0].layer)
            .collect();
        if order.iter().enumerate().all(|(i, &e)| i == e) {
            return;
        }
        let mut new_index = vec![0; order.len()];
        for (i, &e) in order.iter().enumerate() {
            new_index[e] = i;
        }
        self.edges = order.iter().map(|&e| self.edges[e]).collect();
        for list in self.in_edges.iter_mut().chain(self.out_edges.iter_mut()) {
            for e in list.iter_mut() {
                *e = new_index[*e];
            }
            list.sort_unstable();
        }
    }

    pub fn kind(&self) -> &NetworkKind {
        &self.kind
    }

    pub fn omega(&self) -> usize {
        self.omega
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn receivers(&self) -> &[usize] {
        &self.receivers
    }

    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.in_edges[node]
    }

    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out_edges[node]
    }

    pub fn label(&self, node: usize) -> &str {
        &self.nodes[node].label
    }

    pub fn node_by_label(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.label == label)
    }

    pub fn layer_nodes(&self, layer: u8) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.layer == layer).map(|n| n.id).collect()
    }

    pub fn num_layers(&self) -> u8 {
        self.nodes.iter().map(|n| n.layer).max().unwrap_or(0)
    }

    /// The `n_*` nodes feeding receivers: layer 4, or layer 3 in combination networks.
    pub fn grey_nodes(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.label.starts_with("n_")).map(|n| n.id).collect()
    }

    /// Maximum number of edge-disjoint paths from the source into `sinks`,
    /// each sink absorbing at most one path.
    pub fn max_flow(&self, sinks: &[usize]) -> Result<usize> {
        if sinks.is_empty() {
            return Err(invalid!("max-flow needs at least one sink"));
        }
        if let Some(s) = sinks.iter().find(|&&s| s >= self.nodes.len()) {
            return Err(invalid!("unknown node {s}"));
        }
        if sinks.contains(&self.source) {
            return Err(invalid!("the source cannot be a sink"));
        }
        Ok(FlowGraph::new(self.nodes.len(), &self.edges, self.source).flow(sinks))
    }

    /// Parent nodes of each receiver, in receiver order.
    pub fn receiver_supports(&self) -> Vec<Vec<usize>> {
        self.receivers
            .iter()
            .map(|&r| self.in_edges[r].iter().map(|&e| self.edges[e].0).collect())
            .collect()
    }

    pub fn size_stats(&self) -> SizeStats {
        SizeStats {
            omega: self.omega,
            receivers: self.receivers.len() as u64,
            nodes: self.nodes.len() as u64,
            edges: self.edges.len() as u64,
        }
    }

    fn title(&self) -> String {
        match &self.kind {
            NetworkKind::General { d } => format!("N_{{{},({})}}", self.omega, d.iter().join(",")),
            NetworkKind::PrescribedQmin { q } => format!("N_{q}"),
            NetworkKind::Combination { n, extended: false } => format!("({n},2)-combination"),
            NetworkKind::Combination { n, extended: true } => format!("extended ({n},2)-combination"),
            NetworkKind::Custom => "network".to_string(),
        }
    }

    pub fn export(&self, format: ExportFormat) -> String {
        match format {
            ExportFormat::Dot => self.to_dot(),
            ExportFormat::Json => self.to_json(),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {:?} {{", self.title());
        out.push_str("  rankdir=TB;\n");
        for layer in 1..=self.num_layers() {
            let names = self.layer_nodes(layer).iter().map(|&v| format!("{:?};", self.label(v))).join(" ");
            let _ = writeln!(out, "  {{ rank=same; {names} }}");
        }
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "  {:?} -> {:?};", self.label(a), self.label(b));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let layers: Vec<Vec<serde_json::Value>> = (1..=self.num_layers())
            .map(|l| {
                self.layer_nodes(l)
                    .into_iter()
                    .map(|v| serde_json::json!({"id": v, "label": self.label(v)}))
                    .collect()
            })
            .collect();
        serde_json::json!({
            "schema": JSON_SCHEMA_VERSION,
            "kind": self.kind,
            "omega": self.omega,
            "layers": layers,
            "edges": self.edges,
            "receivers": self.receiver_supports(),
            "receiver_ids": self.receivers,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("network JSON is serializable");
        s.push('\n');
        s
    }

    /// Parses the JSON produced by [`Network::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct JsonNode {
            id: usize,
            label: String,
        }
        #[derive(Deserialize)]
        struct JsonNetwork {
            schema: u32,
            kind: NetworkKind,
            omega: usize,
            layers: Vec<Vec<JsonNode>>,
            edges: Vec<(usize, usize)>,
            receivers: Vec<Vec<usize>>,
            receiver_ids: Vec<usize>,
        }
        let raw: JsonNetwork = serde_json::from_str(text).map_err(|e| invalid!("malformed network JSON: {e}"))?;
        if raw.schema != JSON_SCHEMA_VERSION {
            return Err(invalid!("unsupported schema version {}", raw.schema));
        }
        let mut nodes: Vec<Node> = raw
            .layers
            .into_iter()
            .enumerate()
            .flat_map(|(i, layer)| {
                layer.into_iter().map(move |n| Node { id: n.id, layer: i as u8 + 1, label: n.label })
            })
            .collect();
        nodes.sort_by_key(|n| n.id);
        let net = Network::new(raw.kind, raw.omega, nodes, raw.edges, raw.receiver_ids)?;
        if net.receiver_supports() != raw.receivers {
            return Err(invalid!("receiver parent lists disagree with the edge list"));
        }
        Ok(net)
    }
}

/// Network export formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl FromStr for ExportFormat {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(Self::Dot),
            "json" => Ok(Self::Json),
            other => Err(invalid!("unknown export format {other:?}, expected dot or json")),
        }
    }
}

/// Parses `format` and renders the network.
pub fn export(net: &Network, format: &str) -> Result<String> {
    Ok(net.export(format.parse()?))
}

/// Node, edge and receiver counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeStats {
    pub omega: usize,
    pub receivers: u64,
    pub nodes: u64,
    pub edges: u64,
}

/// Network families compared by size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    PrescribedQmin,
    Combination,
    ExtendedCombination,
}

/// Closed-form size counts of each family with `q_min = q`, as published.
pub fn published_size_formula(family: Family, q: u64) -> SizeStats {
    let sq = q * q;
    match family {
        Family::PrescribedQmin => SizeStats {
            omega: 3,
            receivers: (sq - q) / 2 + 1,
            nodes: (sq + q) / 2 + 8,
            edges: (3 * sq - q) / 2 + 12,
        },
        Family::Combination => SizeStats {
            omega: 2,
            receivers: (sq + q) / 2 + 1,
            nodes: (sq + 3 * q) / 2 + 3,
            edges: sq + 2 * q + 3,
        },
        Family::ExtendedCombination => SizeStats {
            omega: 3,
            receivers: (sq + q) / 2 + 1,
            nodes: (sq + 3 * q) / 2 + 4,
            edges: (3 * sq + 5 * q) / 2 + 4,
        },
    }
}

struct Builder {
    nodes: Vec<Node>,
    edges: Vec<(usize, usize)>,
}

impl Builder {
    fn new() -> Self {
        Self { nodes: Vec::new(), edges: Vec::new() }
    }

    fn node(&mut self, layer: u8, label: impl Into<String>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node { id, layer, label: label.into() });
        id
    }

    fn edge(&mut self, a: usize, b: usize) {
        self.edges.push((a, b));
    }

    fn receiver(&mut self, layer: u8, parents: &[usize]) -> usize {
        let r = self.node(layer, format!("r_{}", self.receiver_count(layer) + 1));
        for &p in parents {
            self.edge(p, r);
        }
        r
    }

    fn receiver_count(&self, layer: u8) -> usize {
        self.nodes.iter().filter(|n| n.layer == layer).count()
    }
}

/// Which pair of layer-2 nodes feeds `v_i`.
#[derive(Clone, Copy)]
enum Orientation {
    /// `u_{i-1}` and `u_i`, with `u_0 = u_omega`.
    Backward,
    /// `u_i` and `u_{i+1}`, with `u_{omega+1} = u_1`.
    Forward,
}

/// The first four layers shared by the general and prescribed-`q_min` families.
fn upper_layers(b: &mut Builder, d: &[u64], orientation: Orientation) -> (Vec<usize>, Vec<Vec<usize>>) {
    let omega = d.len();
    let s = b.node(1, "s");
    let u: Vec<usize> = (1..=omega).map(|i| b.node(2, format!("u_{i}"))).collect();
    for &ui in &u {
        b.edge(s, ui);
    }
    let v: Vec<usize> = (1..=omega).map(|i| b.node(3, format!("v_{i}"))).collect();
    for i in 0..omega {
        match orientation {
            Orientation::Backward => {
                b.edge(u[(i + omega - 1) % omega], v[i]);
                b.edge(u[i], v[i]);
            }
            Orientation::Forward => {
                b.edge(u[i], v[i]);
                b.edge(u[(i + 1) % omega], v[i]);
            }
        }
    }
    let mut grey = Vec::with_capacity(omega);
    for (i, &di) in d.iter().enumerate() {
        let children: Vec<usize> = (1..=di).map(|j| b.node(4, format!("n_{{{},{}}}", i + 1, j))).collect();
        for &c in &children {
            b.edge(v[i], c);
        }
        grey.push(children);
    }
    (u, grey)
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Builds `N_{omega,d}`: receivers are all `omega`-subsets of layer-4 nodes with full max-flow.
pub fn build_general_network(params: &NetworkParams) -> Result<Network> {
    build_general_network_with(params, Exec::default())
}

pub fn build_general_network_with(params: &NetworkParams, exec: Exec) -> Result<Network> {
    params.validate()?;
    let total = params.sum_d();
    let candidates = binomial(total, params.omega as u128);
    if candidates > RECEIVER_ENUM_LIMIT {
        return Err(capacity!(
            "{params} has {candidates} candidate receiver sets, limit {RECEIVER_ENUM_LIMIT}"
        ));
    }
    let mut b = Builder::new();
    let (_, grey) = upper_layers(&mut b, &params.d, Orientation::Backward);
    let grey: Vec<usize> = grey.concat();
    let flow = FlowGraph::new(b.nodes.len(), &b.edges, 0);
    let omega = params.omega;
    let heads: Vec<usize> = (0..grey.len()).collect();
    let supports: Vec<Vec<usize>> = exec.flat_map(&heads, |&first| {
        grey[first + 1..]
            .iter()
            .copied()
            .combinations(omega - 1)
            .map(|rest| std::iter::once(grey[first]).chain(rest).collect::<Vec<_>>())
            .filter(|set| flow.flow(set) == omega)
            .collect()
    });
    let receivers: Vec<usize> = supports.iter().map(|set| b.receiver(5, set)).collect();
    Network::new(NetworkKind::General { d: params.d.clone() }, omega, b.nodes, b.edges, receivers)
}

/// Builds `N_q`, a network with `q_min = q` for a prime power `q >= 5`.
///
/// Layers 1-4 are the degenerate `N_{3,(1,1,q-2)}` with each `v_i` fed by
/// `u_i` and `u_{i+1}`.
pub fn build_prescribed_qmin_network(q: u64) -> Result<Network> {
    if q < 5 || is_prime_power(q)?.is_none() {
        return Err(invalid!("N_q needs a prime power q >= 5, got {q}"));
    }
    let m = q - 2;
    if m.checked_mul(m).is_none_or(|x| x as u128 > RECEIVER_ENUM_LIMIT) {
        return Err(capacity!("N_{q} is too large to build"));
    }
    let mut b = Builder::new();
    // The receiver families below pair n_{i,j} with u-nodes as if v_i were fed by
    // u_i and u_{i+1}; with the backward wiring half of them would have max-flow 2.
    let (u, grey) = upper_layers(&mut b, &[1, 1, m], Orientation::Forward);
    let (n11, n21, n3) = (grey[0][0], grey[1][0], &grey[2]);
    let mut sets: Vec<[usize; 3]> = vec![[n11, u[1], u[2]], [n21, u[0], u[1]]];
    for &x in n3 {
        sets.push([x, u[1], u[2]]);
        sets.push([x, u[0], u[1]]);
    }
    for &x in &n3[1..] {
        sets.push([n11, n3[0], x]);
    }
    for (&x, &y) in n3[1..].iter().tuple_combinations() {
        sets.push([n21, x, y]);
    }
    for &x in n3 {
        sets.push([n11, n21, x]);
    }
    let receivers: Vec<usize> = sets.iter().map(|set| b.receiver(5, set)).collect();
    Network::new(NetworkKind::PrescribedQmin { q }, 3, b.nodes, b.edges, receivers)
}

/// Builds the `(n,2)`-combination network, optionally extended to source dimension 3
/// by a node fed from the source and feeding every receiver.
pub fn build_combination_network(n: usize, extended: bool) -> Result<Network> {
    if n < 3 {
        return Err(invalid!("combination network needs n >= 3, got {n}"));
    }
    if binomial(n as u128, 2) > RECEIVER_ENUM_LIMIT {
        return Err(capacity!("({n},2)-combination network is too large to build"));
    }
    let mut b = Builder::new();
    let s = b.node(1, "s");
    let a = b.node(2, "a");
    b.edge(s, a);
    b.edge(s, a);
    let w = extended.then(|| {
        let w = b.node(2, "w");
        b.edge(s, w);
        w
    });
    let mids: Vec<usize> = (1..=n).map(|i| b.node(3, format!("n_{i}"))).collect();
    for &m in &mids {
        b.edge(a, m);
    }
    let receivers: Vec<usize> = mids
        .iter()
        .tuple_combinations()
        .map(|(&x, &y)| {
            let mut parents = vec![x, y];
            parents.extend(w);
            b.receiver(4, &parents)
        })
        .collect();
    let omega = if extended { 3 } else { 2 };
    Network::new(NetworkKind::Combination { n, extended }, omega, b.nodes, b.edges, receivers)
}

/// Unit-capacity residual graph for repeated max-flow queries.
struct FlowGraph {
    nodes: usize,
    edges: Vec<(usize, usize)>,
    source: usize,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(nodes: usize, edges: &[(usize, usize)], source: usize) -> Self {
        let mut adj = vec![Vec::new(); nodes + 1];
        for (e, &(a, b)) in edges.iter().enumerate() {
            adj[a].push(e);
            adj[b].push(e);
        }
        Self { nodes, edges: edges.to_vec(), source, adj }
    }

    fn flow(&self, sinks: &[usize]) -> usize {
        let sink = self.nodes;
        let m = self.edges.len();
        let mut edges = self.edges.clone();
        let mut adj = self.adj.clone();
        let mut seen = HashMap::new();
        for &t in sinks {
            if seen.insert(t, ()).is_none() {
                adj[t].push(edges.len());
                adj[sink].push(edges.len());
                edges.push((t, sink));
            }
        }
        let mut used = vec![false; edges.len()];
        let limit = self.adj[self.source].iter().filter(|&&e| self.edges[e].0 == self.source).count();
        let mut total = 0;
        while total < limit {
            let mut prev: Vec<Option<usize>> = vec![None; self.nodes + 1];
            let mut visited = vec![false; self.nodes + 1];
            visited[self.source] = true;
            let mut queue = VecDeque::from([self.source]);
            while let Some(x) = queue.pop_front() {
                if x == sink {
                    break;
                }
                for &e in &adj[x] {
                    let (a, b) = edges[e];
                    let next = if a == x && !used[e] {
                        b
                    } else if b == x && used[e] {
                        a
                    } else {
                        continue;
                    };
                    if !visited[next] {
                        visited[next] = true;
                        prev[next] = Some(e);
                        queue.push_back(next);
                    }
                }
            }
            if !visited[sink] {
                break;
            }
            let mut x = sink;
            while x != self.source {
                let e = prev[x].expect("path reconstructs to the source");
                let (a, b) = edges[e];
                if b == x && !used[e] {
                    used[e] = true;
                    x = a;
                } else {
                    used[e] = false;
                    x = b;
                }
            }
            total += 1;
        }
        debug_assert!(used.len() >= m);
        total
    }
}
