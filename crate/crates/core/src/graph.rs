//! Graph encodings of CNF formulas (LCG, VCG, LIG, VIG and the typed LCG* /
//! VCG* variants), their structural statistics, and the line-oriented record
//! format consumed by the GNN harness.
//!
//! Node numbering is fixed per kind:
//! - literal nodes come first, node `2(v-1)` is `v` and `2(v-1)+1` is `¬v`;
//! - variable nodes come first, node `v-1` is variable `v`;
//! - clause nodes follow, clause `j` is node `offset + j`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, CnfFormula, Lit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraphKind {
    Lcg,
    Vcg,
    Lig,
    Vig,
    LcgStar,
    VcgStar,
}

impl GraphKind {
    pub const ALL: [GraphKind; 6] = [
        GraphKind::Lcg,
        GraphKind::Vcg,
        GraphKind::Lig,
        GraphKind::Vig,
        GraphKind::LcgStar,
        GraphKind::VcgStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Lcg => "lcg",
            GraphKind::Vcg => "vcg",
            GraphKind::Lig => "lig",
            GraphKind::Vig => "vig",
            GraphKind::LcgStar => "lcg_star",
            GraphKind::VcgStar => "vcg_star",
        }
    }

    fn has_literal_nodes(self) -> bool {
        matches!(self, GraphKind::Lcg | GraphKind::LcgStar | GraphKind::Lig)
    }

    fn has_clause_nodes(self) -> bool {
        !matches!(self, GraphKind::Lig | GraphKind::Vig)
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphKind {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let normalized = s.to_ascii_lowercase().replace('*', "_star").replace('-', "_");
        GraphKind::ALL
            .into_iter()
            .find(|k| k.name() == normalized)
            .ok_or_else(|| GraphError::UnknownToken(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeType {
    Literal,
    Variable,
    Clause,
}

impl NodeType {
    pub fn name(self) -> &'static str {
        match self {
            NodeType::Literal => "literal",
            NodeType::Variable => "variable",
            NodeType::Clause => "clause",
        }
    }
}

impl FromStr for NodeType {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(NodeType::Literal),
            "variable" => Ok(NodeType::Variable),
            "clause" => Ok(NodeType::Clause),
            _ => Err(GraphError::UnknownToken(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeType {
    /// Literal (or variable) occurs in clause.
    Occurrence,
    /// Variable occurs positively in clause (VCG*).
    Positive,
    /// Variable occurs negatively in clause (VCG*).
    Negative,
    /// Literal to its negation (LCG*).
    Negation,
    /// Two literals or variables share a clause (LIG, VIG).
    CoOccurrence,
}

impl EdgeType {
    pub fn name(self) -> &'static str {
        match self {
            EdgeType::Occurrence => "occurrence",
            EdgeType::Positive => "positive",
            EdgeType::Negative => "negative",
            EdgeType::Negation => "negation",
            EdgeType::CoOccurrence => "cooccurrence",
        }
    }
}

impl FromStr for EdgeType {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "occurrence" => Ok(EdgeType::Occurrence),
            "positive" => Ok(EdgeType::Positive),
            "negative" => Ok(EdgeType::Negative),
            "negation" => Ok(EdgeType::Negation),
            "cooccurrence" => Ok(EdgeType::CoOccurrence),
            _ => Err(GraphError::UnknownToken(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub id: usize,
    pub node_type: NodeType,
    /// Literal code, variable index (0-based) or clause index.
    pub payload: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub edge_type: EdgeType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedGraph {
    pub kind: GraphKind,
    pub num_vars: usize,
    pub num_clauses: usize,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("operation needs a {expected} graph, got {found}")]
    WrongKind { expected: GraphKind, found: GraphKind },
    #[error("partition covers {found} nodes but the graph has {expected}")]
    PartitionSize { expected: usize, found: usize },
    #[error("{label} labels have {found} entries but the formula has {expected} variables")]
    LabelArity {
        label: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("record line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn literal_node(lit: Lit) -> usize {
    lit.code()
}

fn variable_node(lit: Lit) -> usize {
    lit.var() as usize - 1
}

impl EncodedGraph {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Id of the first clause node (equals the node count for kinds without
    /// clause nodes).
    pub fn clause_offset(&self) -> usize {
        clause_offset(self.kind, self.num_vars)
    }

    pub fn count_edges(&self, edge_type: EdgeType) -> usize {
        self.edges.iter().filter(|e| e.edge_type == edge_type).count()
    }

    pub fn count_nodes(&self, node_type: NodeType) -> usize {
        self.nodes.iter().filter(|n| n.node_type == node_type).count()
    }

    /// Neighbour lists with one entry per edge, ignoring edge types.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes()];
        for e in &self.edges {
            adj[e.src].push(e.dst);
            adj[e.dst].push(e.src);
        }
        adj
    }

    /// Rebuilds the formula from an encoding that keeps polarity and clause
    /// membership (LCG, LCG*, VCG*). Literal order inside clauses follows the
    /// edge order, which is the original clause order.
    pub fn to_formula(&self) -> Option<CnfFormula> {
        if !matches!(self.kind, GraphKind::Lcg | GraphKind::LcgStar | GraphKind::VcgStar) {
            return None;
        }
        let offset = self.clause_offset();
        let mut clauses = vec![Clause::default(); self.num_clauses];
        for e in &self.edges {
            let lit = match (self.kind, e.edge_type) {
                (GraphKind::Lcg | GraphKind::LcgStar, EdgeType::Occurrence) => Lit::from_code(e.src),
                (GraphKind::VcgStar, EdgeType::Positive) => Lit::pos(e.src as u32 + 1),
                (GraphKind::VcgStar, EdgeType::Negative) => Lit::neg(e.src as u32 + 1),
                _ => continue,
            };
            clauses[e.dst - offset].lits_mut().push(lit);
        }
        Some(CnfFormula::new(self.num_vars, clauses))
    }
}

fn clause_offset(kind: GraphKind, num_vars: usize) -> usize {
    if kind.has_literal_nodes() {
        2 * num_vars
    } else {
        num_vars
    }
}

fn make_nodes(kind: GraphKind, num_vars: usize, num_clauses: usize) -> Vec<Node> {
    let mut nodes = Vec::new();
    let (count, node_type) = if kind.has_literal_nodes() {
        (2 * num_vars, NodeType::Literal)
    } else {
        (num_vars, NodeType::Variable)
    };
    nodes.extend((0..count).map(|id| Node {
        id,
        node_type,
        payload: id,
    }));
    if kind.has_clause_nodes() {
        nodes.extend((0..num_clauses).map(|j| Node {
            id: count + j,
            node_type: NodeType::Clause,
            payload: j,
        }));
    }
    nodes
}

pub fn build_graph(formula: &CnfFormula, kind: GraphKind) -> EncodedGraph {
    let n = formula.num_vars;
    let m = formula.num_clauses();
    let offset = clause_offset(kind, n);
    let mut edges = Vec::new();

    match kind {
        GraphKind::Lcg | GraphKind::LcgStar => {
            for (j, clause) in formula.clauses.iter().enumerate() {
                for &lit in clause {
                    edges.push(Edge {
                        src: literal_node(lit),
                        dst: offset + j,
                        edge_type: EdgeType::Occurrence,
                    });
                }
            }
            if kind == GraphKind::LcgStar {
                edges.extend((0..n).map(|v| Edge {
                    src: 2 * v,
                    dst: 2 * v + 1,
                    edge_type: EdgeType::Negation,
                }));
            }
        }
        GraphKind::Vcg | GraphKind::VcgStar => {
            for (j, clause) in formula.clauses.iter().enumerate() {
                for &lit in clause {
                    let edge_type = match (kind, lit.is_positive()) {
                        (GraphKind::Vcg, _) => EdgeType::Occurrence,
                        (_, true) => EdgeType::Positive,
                        (_, false) => EdgeType::Negative,
                    };
                    edges.push(Edge {
                        src: variable_node(lit),
                        dst: offset + j,
                        edge_type,
                    });
                }
            }
        }
        GraphKind::Lig | GraphKind::Vig => {
            let node_of = if kind == GraphKind::Lig {
                literal_node
            } else {
                variable_node
            };
            let mut pairs = BTreeSet::new();
            for clause in &formula.clauses {
                let ids: Vec<usize> = clause.iter().map(|&l| node_of(l)).collect();
                for (a, &x) in ids.iter().enumerate() {
                    for &y in &ids[a + 1..] {
                        if x != y {
                            pairs.insert((x.min(y), x.max(y)));
                        }
                    }
                }
            }
            edges.extend(pairs.into_iter().map(|(src, dst)| Edge {
                src,
                dst,
                edge_type: EdgeType::CoOccurrence,
            }));
        }
    }

    EncodedGraph {
        kind,
        num_vars: n,
        num_clauses: m,
        nodes: make_nodes(kind, n, m),
        edges,
    }
}

/// Mean local clustering coefficient of a VIG; nodes of degree < 2
/// contribute 0.
pub fn clustering_coefficient(graph: &EncodedGraph) -> Result<f64, GraphError> {
    if graph.kind != GraphKind::Vig {
        return Err(GraphError::WrongKind {
            expected: GraphKind::Vig,
            found: graph.kind,
        });
    }
    let n = graph.num_nodes();
    if n == 0 {
        return Ok(0.0);
    }
    let words = n.div_ceil(64);
    let mut bits = vec![0u64; n * words];
    let adj = graph.adjacency();
    for (u, neighbors) in adj.iter().enumerate() {
        for &w in neighbors {
            bits[u * words + w / 64] |= 1 << (w % 64);
        }
    }
    let row = |u: usize| &bits[u * words..(u + 1) * words];
    let mut total = 0.0;
    for (u, neighbors) in adj.iter().enumerate() {
        let degree = neighbors.len();
        if degree < 2 {
            continue;
        }
        // each triangle through u is seen from both of its other corners
        let links: u32 = neighbors
            .iter()
            .map(|&w| {
                row(u)
                    .iter()
                    .zip(row(w))
                    .map(|(a, b)| (a & b).count_ones())
                    .sum::<u32>()
            })
            .sum();
        total += links as f64 / (degree * (degree - 1)) as f64;
    }
    Ok(total / n as f64)
}

/// Community id per node, numbered `0..k` in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub membership: Vec<usize>,
}

impl Partition {
    pub fn from_membership(raw: &[usize]) -> Partition {
        let mut relabel = std::collections::HashMap::new();
        let membership = raw
            .iter()
            .map(|c| {
                let next = relabel.len();
                *relabel.entry(*c).or_insert(next)
            })
            .collect();
        Partition { membership }
    }

    pub fn num_communities(&self) -> usize {
        self.membership.iter().max().map_or(0, |&m| m + 1)
    }
}

/// `Q = Σ_c (e_c / m − (d_c / 2m)²)` over the untyped edges; 0 for a graph
/// without edges.
pub fn modularity(graph: &EncodedGraph, partition: &Partition) -> Result<f64, GraphError> {
    if partition.membership.len() != graph.num_nodes() {
        return Err(GraphError::PartitionSize {
            expected: graph.num_nodes(),
            found: partition.membership.len(),
        });
    }
    let m = graph.edges.len();
    if m == 0 {
        return Ok(0.0);
    }
    let k = partition.num_communities();
    let mut internal = vec![0usize; k];
    let mut degree = vec![0usize; k];
    for e in &graph.edges {
        let (a, b) = (partition.membership[e.src], partition.membership[e.dst]);
        degree[a] += 1;
        degree[b] += 1;
        if a == b {
            internal[a] += 1;
        }
    }
    let m = m as f64;
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(&e, &d)| e as f64 / m - (d as f64 / (2.0 * m)).powi(2))
        .sum())
}

/// Weighted graph used by the Louvain levels. `adj[i]` excludes self-loops,
/// whose weight (counted in both directions) is in `self_loops[i]`.
struct LevelGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degree: Vec<f64>,
    total: f64,
}

impl LevelGraph {
    fn from_encoded(graph: &EncodedGraph) -> LevelGraph {
        let n = graph.num_nodes();
        let mut weights: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n];
        let mut self_loops = vec![0.0; n];
        for e in &graph.edges {
            if e.src == e.dst {
                self_loops[e.src] += 2.0;
            } else {
                *weights[e.src].entry(e.dst).or_default() += 1.0;
                *weights[e.dst].entry(e.src).or_default() += 1.0;
            }
        }
        LevelGraph::from_parts(weights, self_loops)
    }

    fn from_parts(weights: Vec<std::collections::BTreeMap<usize, f64>>, self_loops: Vec<f64>) -> LevelGraph {
        let adj: Vec<Vec<(usize, f64)>> = weights.into_iter().map(|w| w.into_iter().collect()).collect();
        let degree: Vec<f64> = adj
            .iter()
            .zip(&self_loops)
            .map(|(nb, s)| nb.iter().map(|(_, w)| w).sum::<f64>() + s)
            .collect();
        let total = degree.iter().sum();
        LevelGraph {
            adj,
            self_loops,
            degree,
            total,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn modularity(&self, community: &[usize]) -> f64 {
        if self.total == 0.0 {
            return 0.0;
        }
        let k = community.iter().max().map_or(0, |&c| c + 1);
        let mut inside = vec![0.0; k];
        let mut tot = vec![0.0; k];
        for i in 0..self.len() {
            let c = community[i];
            tot[c] += self.degree[i];
            inside[c] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                if community[j] == c {
                    inside[c] += w;
                }
            }
        }
        inside
            .iter()
            .zip(&tot)
            .map(|(&i, &t)| i / self.total - (t / self.total).powi(2))
            .sum()
    }

    /// Moves single nodes between communities in index order until a full
    /// pass improves modularity by at most `MIN_GAIN`. Returns whether any
    /// node moved.
    fn local_moves(&self, community: &mut [usize]) -> bool {
        let n = self.len();
        let mut tot: Vec<f64> = vec![0.0; n];
        for i in 0..n {
            tot[community[i]] += self.degree[i];
        }
        let mut neighbor_weight = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut moved_any = false;
        let mut quality = self.modularity(community);

        loop {
            let mut moved = false;
            for i in 0..n {
                let current = community[i];
                let k_i = self.degree[i];
                for &(j, w) in &self.adj[i] {
                    let c = community[j];
                    if neighbor_weight[c] == 0.0 {
                        touched.push(c);
                    }
                    neighbor_weight[c] += w;
                }
                tot[current] -= k_i;
                let gain = |c: usize, weight: f64| weight - tot[c] * k_i / self.total;
                let mut best = current;
                let mut best_gain = gain(current, neighbor_weight[current]);
                for &c in &touched {
                    let g = gain(c, neighbor_weight[c]);
                    if g > best_gain + 1e-12 || (c < best && best != current && (g - best_gain).abs() <= 1e-12) {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k_i;
                community[i] = best;
                if best != current {
                    moved = true;
                }
                for &c in &touched {
                    neighbor_weight[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            moved_any = true;
            let next = self.modularity(community);
            let improved = next - quality > MIN_GAIN;
            quality = next;
            if !improved {
                break;
            }
        }
        moved_any
    }

    fn aggregate(&self, community: &[usize]) -> LevelGraph {
        let k = community.iter().max().map_or(0, |&c| c + 1);
        let mut weights: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
        let mut self_loops = vec![0.0; k];
        for i in 0..self.len() {
            let ci = community[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                let cj = community[j];
                if ci == cj {
                    self_loops[ci] += w;
                } else {
                    *weights[ci].entry(cj).or_default() += w;
                }
            }
        }
        LevelGraph::from_parts(weights, self_loops)
    }
}

/// Smallest modularity improvement that keeps the optimisation going.
pub const MIN_GAIN: f64 = 1e-6;

/// Louvain-style greedy modularity maximisation: local node moves in node
/// order, then community aggregation, repeated until no level improves
/// modularity by more than [`MIN_GAIN`]. Deterministic for a given graph.
pub fn detect_communities(graph: &EncodedGraph) -> Partition {
    let mut level = LevelGraph::from_encoded(graph);
    let mut membership: Vec<usize> = (0..graph.num_nodes()).collect();
    if level.total == 0.0 {
        return Partition::from_membership(&membership);
    }
    loop {
        let before = level.modularity(&(0..level.len()).collect::<Vec<_>>());
        let mut community: Vec<usize> = (0..level.len()).collect();
        if !level.local_moves(&mut community) {
            break;
        }
        let compact = Partition::from_membership(&community).membership;
        let after = level.modularity(&compact);
        for m in membership.iter_mut() {
            *m = compact[*m];
        }
        if after - before <= MIN_GAIN {
            break;
        }
        level = level.aggregate(&compact);
    }
    Partition::from_membership(&membership)
}

/// Table-style structural statistics of a formula.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub clustering_vig: f64,
    pub modularity_vig: f64,
    pub modularity_vcg: f64,
    pub modularity_lcg: f64,
}

pub fn graph_stats(formula: &CnfFormula) -> GraphStats {
    let detected = |kind| {
        let g = build_graph(formula, kind);
        modularity(&g, &detect_communities(&g)).expect("partition matches graph")
    };
    let vig = build_graph(formula, GraphKind::Vig);
    GraphStats {
        clustering_vig: clustering_coefficient(&vig).expect("vig"),
        modularity_vig: modularity(&vig, &detect_communities(&vig)).expect("partition matches graph"),
        modularity_vcg: detected(GraphKind::Vcg),
        modularity_lcg: detected(GraphKind::Lcg),
    }
}

/// Optional per-instance labels carried in a graph record.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Labels {
    pub sat: Option<bool>,
    /// Satisfying assignment, one bit per variable.
    pub assignment: Option<Vec<bool>>,
    /// Unsat-core membership, one bit per variable.
    pub core_variables: Option<Vec<bool>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphRecord {
    pub family: String,
    pub difficulty: String,
    pub index: u64,
    pub graph: EncodedGraph,
    pub labels: Labels,
}

fn bits(values: &[bool]) -> String {
    values.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Renders one record:
///
/// ```text
/// graph <family> <difficulty> <index> <kind> <n_vars> <n_clauses> <label_sat: 0|1|->
/// nodes <count>
/// <id> <literal|variable|clause>            (one line per node)
/// edges <count>
/// <src> <dst> <edge type>                   (one line per edge)
/// label assignment <bits>                   (optional)
/// label core <bits>                         (optional)
/// end
/// ```
pub fn serialize_graph(record: &GraphRecord) -> Result<String, GraphError> {
    use std::fmt::Write;
    let g = &record.graph;
    for (label, values) in [
        ("assignment", &record.labels.assignment),
        ("core", &record.labels.core_variables),
    ] {
        if let Some(v) = values {
            if v.len() != g.num_vars {
                return Err(GraphError::LabelArity {
                    label,
                    expected: g.num_vars,
                    found: v.len(),
                });
            }
        }
    }
    let sat = match record.labels.sat {
        Some(true) => "1",
        Some(false) => "0",
        None => "-",
    };
    let mut out = String::with_capacity(16 * (g.nodes.len() + g.edges.len()) + 64);
    let w = &mut out;
    writeln!(
        w,
        "graph {} {} {} {} {} {} {}",
        record.family, record.difficulty, record.index, g.kind, g.num_vars, g.num_clauses, sat
    )
    .expect("write to String");
    writeln!(w, "nodes {}", g.nodes.len()).expect("write to String");
    for node in &g.nodes {
        writeln!(w, "{} {}", node.id, node.node_type.name()).expect("write to String");
    }
    writeln!(w, "edges {}", g.edges.len()).expect("write to String");
    for e in &g.edges {
        writeln!(w, "{} {} {}", e.src, e.dst, e.edge_type.name()).expect("write to String");
    }
    if let Some(a) = &record.labels.assignment {
        writeln!(w, "label assignment {}", bits(a)).expect("write to String");
    }
    if let Some(c) = &record.labels.core_variables {
        writeln!(w, "label core {}", bits(c)).expect("write to String");
    }
    w.push_str("end\n");
    Ok(out)
}

/// Parses a stream of records produced by [`serialize_graph`].
pub fn parse_graph_records(text: &str) -> Result<Vec<GraphRecord>, GraphError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    let mut records = Vec::new();
    while lines.peek().is_some() {
        records.push(parse_one(&mut lines)?);
    }
    Ok(records)
}

fn parse_one<'a, I>(lines: &mut std::iter::Peekable<I>) -> Result<GraphRecord, GraphError>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let mut next = |expect: &str| -> Result<(usize, Vec<&'a str>), GraphError> {
        let (i, line) = lines.next().ok_or_else(|| GraphError::Parse {
            line: 0,
            message: format!("unexpected end of input, expected {expect}"),
        })?;
        Ok((i + 1, line.split_whitespace().collect()))
    };
    let err = |line: usize, message: String| GraphError::Parse { line, message };
    let num = |line: usize, s: &str| -> Result<usize, GraphError> {
        s.parse().map_err(|_| err(line, format!("bad integer `{s}`")))
    };

    let (ln, header) = next("graph header")?;
    if header.len() != 8 || header[0] != "graph" {
        return Err(err(ln, "expected `graph <family> <difficulty> <index> <kind> <n_vars> <n_clauses> <label_sat>`".into()));
    }
    let kind: GraphKind = header[4].parse()?;
    let num_vars = num(ln, header[5])?;
    let num_clauses = num(ln, header[6])?;
    let sat = match header[7] {
        "1" => Some(true),
        "0" => Some(false),
        "-" => None,
        other => return Err(err(ln, format!("bad label_sat `{other}`"))),
    };
    let index = header[3]
        .parse()
        .map_err(|_| err(ln, format!("bad index `{}`", header[3])))?;

    let (ln, section) = next("nodes section")?;
    if section.len() != 2 || section[0] != "nodes" {
        return Err(err(ln, "expected `nodes <count>`".into()));
    }
    let expected_nodes = make_nodes(kind, num_vars, num_clauses);
    let count = num(ln, section[1])?;
    if count != expected_nodes.len() {
        return Err(err(ln, format!("{count} nodes but {kind} of this size has {}", expected_nodes.len())));
    }
    for expected in &expected_nodes {
        let (ln, fields) = next("node line")?;
        if fields.len() != 2 || num(ln, fields[0])? != expected.id || fields[1].parse::<NodeType>()? != expected.node_type {
            return Err(err(ln, format!("expected node `{} {}`", expected.id, expected.node_type.name())));
        }
    }

    let (ln, section) = next("edges section")?;
    if section.len() != 2 || section[0] != "edges" {
        return Err(err(ln, "expected `edges <count>`".into()));
    }
    let count = num(ln, section[1])?;
    let mut edges = Vec::with_capacity(count);
    for _ in 0..count {
        let (ln, fields) = next("edge line")?;
        if fields.len() != 3 {
            return Err(err(ln, "expected `<src> <dst> <type>`".into()));
        }
        let (src, dst) = (num(ln, fields[0])?, num(ln, fields[1])?);
        if src >= expected_nodes.len() || dst >= expected_nodes.len() {
            return Err(err(ln, format!("edge {src}-{dst} leaves the node range")));
        }
        edges.push(Edge {
            src,
            dst,
            edge_type: fields[2].parse()?,
        });
    }

    let mut labels = Labels {
        sat,
        ..Labels::default()
    };
    loop {
        let (ln, fields) = next("label or end")?;
        match fields.as_slice() {
            ["end"] => break,
            ["label", name, value] => {
                let parsed: Vec<bool> = value
                    .chars()
                    .map(|c| match c {
                        '1' => Ok(true),
                        '0' => Ok(false),
                        _ => Err(err(ln, format!("bad bit `{c}`"))),
                    })
                    .collect::<Result<_, _>>()?;
                if parsed.len() != num_vars {
                    return Err(GraphError::LabelArity {
                        label: if *name == "core" { "core" } else { "assignment" },
                        expected: num_vars,
                        found: parsed.len(),
                    });
                }
                match *name {
                    "assignment" => labels.assignment = Some(parsed),
                    "core" => labels.core_variables = Some(parsed),
                    other => return Err(err(ln, format!("unknown label `{other}`"))),
                }
            }
            // an empty bit string is legal when there are no variables
            ["label", name] if num_vars == 0 => match *name {
                "assignment" => labels.assignment = Some(Vec::new()),
                "core" => labels.core_variables = Some(Vec::new()),
                other => return Err(err(ln, format!("unknown label `{other}`"))),
            },
            _ => return Err(err(ln, "expected `label <name> <bits>` or `end`".into())),
        }
    }

    Ok(GraphRecord {
        family: header[1].to_string(),
        difficulty: header[2].to_string(),
        index,
        graph: EncodedGraph {
            kind,
            num_vars,
            num_clauses,
            nodes: expected_nodes,
            edges,
        },
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> CnfFormula {
        CnfFormula::from_dimacs_clauses(&[&[1, -2], &[1, 3], &[-1, 2, 3]])
    }

    fn simple(num_nodes: usize, edges: &[(usize, usize)]) -> EncodedGraph {
        EncodedGraph {
            kind: GraphKind::Vig,
            num_vars: num_nodes,
            num_clauses: 0,
            nodes: make_nodes(GraphKind::Vig, num_nodes, 0),
            edges: edges
                .iter()
                .map(|&(src, dst)| Edge {
                    src,
                    dst,
                    edge_type: EdgeType::CoOccurrence,
                })
                .collect(),
        }
    }

    #[test]
    fn running_example_lcg_star() {
        let g = build_graph(&fig2(), GraphKind::LcgStar);
        assert_eq!(g.count_nodes(NodeType::Literal), 6);
        assert_eq!(g.count_nodes(NodeType::Clause), 3);
        assert_eq!(g.count_edges(EdgeType::Occurrence), 7);
        assert_eq!(g.count_edges(EdgeType::Negation), 3);
        assert_eq!(g.to_formula().unwrap(), fig2());
    }

    #[test]
    fn running_example_vcg_star_and_incidence_graphs() {
        let g = build_graph(&fig2(), GraphKind::VcgStar);
        assert_eq!(g.count_edges(EdgeType::Positive), 5);
        assert_eq!(g.count_edges(EdgeType::Negative), 2);
        assert_eq!(g.to_formula().unwrap(), fig2());

        let vig = build_graph(&fig2(), GraphKind::Vig);
        assert_eq!(vig.num_nodes(), 3);
        assert_eq!(vig.edges.len(), 3);
        let lig = build_graph(&fig2(), GraphKind::Lig);
        assert_eq!(lig.num_nodes(), 6);
        // {1,-2}, {1,3}, {-1,2}, {-1,3}, {2,3}
        assert_eq!(lig.edges.len(), 5);
        assert!(build_graph(&fig2(), GraphKind::Vcg).to_formula().is_none());
    }

    #[test]
    fn unit_clause_vig() {
        let f = CnfFormula::from_dimacs_clauses(&[&[1]]);
        let vig = build_graph(&f, GraphKind::Vig);
        assert_eq!(vig.num_nodes(), 1);
        assert!(vig.edges.is_empty());
    }

    #[test]
    fn clustering_examples() {
        let triangle = simple(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!((clustering_coefficient(&triangle).unwrap() - 1.0).abs() < 1e-12);
        let path = simple(3, &[(0, 1), (1, 2)]);
        assert_eq!(clustering_coefficient(&path).unwrap(), 0.0);
        let lcg = build_graph(&fig2(), GraphKind::Lcg);
        assert_eq!(
            clustering_coefficient(&lcg),
            Err(GraphError::WrongKind {
                expected: GraphKind::Vig,
                found: GraphKind::Lcg
            })
        );
    }

    #[test]
    fn modularity_examples() {
        let two_triangles = simple(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        let one = Partition::from_membership(&[0; 6]);
        assert!(modularity(&two_triangles, &one).unwrap().abs() < 1e-12);
        let natural = Partition::from_membership(&[0, 0, 0, 1, 1, 1]);
        assert!((modularity(&two_triangles, &natural).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(modularity(&simple(3, &[]), &Partition::from_membership(&[0, 1, 2])).unwrap(), 0.0);
        assert!(matches!(
            modularity(&two_triangles, &Partition::from_membership(&[0, 1])),
            Err(GraphError::PartitionSize { .. })
        ));
    }

    #[test]
    fn louvain_splits_disjoint_triangles() {
        let g = simple(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        let p = detect_communities(&g);
        assert_eq!(p.num_communities(), 2);
        assert_eq!(p.membership, vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(detect_communities(&g), p);
    }

    #[test]
    fn louvain_on_ring_of_cliques() {
        // six K4s joined in a ring by single edges
        let mut edges = Vec::new();
        for c in 0..6 {
            let base = 4 * c;
            for a in 0..4 {
                for b in a + 1..4 {
                    edges.push((base + a, base + b));
                }
            }
            edges.push((base + 3, (base + 4) % 24));
        }
        let g = simple(24, &edges);
        let p = detect_communities(&g);
        assert_eq!(p.num_communities(), 6);
        let q = modularity(&g, &p).unwrap();
        let expected = 6.0 * (6.0 / 42.0 - (14.0f64 / 84.0).powi(2));
        assert!((q - expected).abs() < 1e-12, "q={q} expected={expected}");
    }

    #[test]
    fn record_round_trip_and_label_checks() {
        let record = GraphRecord {
            family: "sr".into(),
            difficulty: "easy".into(),
            index: 7,
            graph: build_graph(&fig2(), GraphKind::LcgStar),
            labels: Labels {
                sat: Some(true),
                assignment: Some(vec![true, true, true]),
                core_variables: None,
            },
        };
        let text = serialize_graph(&record).unwrap();
        assert!(text.starts_with("graph sr easy 7 lcg_star 3 3 1\nnodes 9\n0 literal\n"));
        assert_eq!(text.matches(" negation\n").count(), 3);
        assert_eq!(parse_graph_records(&text).unwrap(), vec![record.clone()]);

        let mut bad = record;
        bad.labels.core_variables = Some(vec![true]);
        assert_eq!(
            serialize_graph(&bad),
            Err(GraphError::LabelArity {
                label: "core",
                expected: 3,
                found: 1
            })
        );
    }

    #[test]
    fn empty_formula_record() {
        let record = GraphRecord {
            family: "x".into(),
            difficulty: "easy".into(),
            index: 0,
            graph: build_graph(&CnfFormula::default(), GraphKind::Lcg),
            labels: Labels {
                sat: Some(true),
                assignment: Some(vec![]),
                core_variables: None,
            },
        };
        let text = serialize_graph(&record).unwrap();
        let parsed = parse_graph_records(&text).unwrap();
        assert_eq!(parsed[0].graph.count_nodes(NodeType::Clause), 0);
        assert_eq!(parsed, vec![record]);
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("LCG*".parse::<GraphKind>().unwrap(), GraphKind::LcgStar);
        assert_eq!("vcg_star".parse::<GraphKind>().unwrap(), GraphKind::VcgStar);
        assert!("aig".parse::<GraphKind>().is_err());
    }
}
