//! All-communication network and node centralities.
//!
//! Two agents are linked when either retweets, quotes or mentions the other;
//! the edge weight counts those interactions in both directions. The graph is
//! undirected and has no self-loops.
//!
//! Shortest paths for betweenness ignore weights. Eigenvector centrality uses
//! them.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::flips::AgentClass;
use crate::ingest::PostRecord;
use crate::stats::{welch_t_test, TTest};
use crate::{CoreError, CoreResult};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommGraph {
    /// Sorted agent ids; a node's index is its position here.
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    /// Neighbour lists sorted by index, with edge weights.
    adjacency: Vec<Vec<(usize, u64)>>,
}

impl CommGraph {
    /// Builds a graph from `(a, b, weight)` triples; repeated pairs add up,
    /// self-pairs are dropped. `extra_nodes` appear even without edges.
    pub fn from_edges<'a, I, N>(edges: I, extra_nodes: N) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str, u64)>,
        N: IntoIterator<Item = &'a str>,
    {
        let mut pairs: BTreeMap<(&str, &str), u64> = BTreeMap::new();
        let mut names: BTreeMap<&str, ()> = BTreeMap::new();
        for n in extra_nodes {
            names.insert(n, ());
        }
        for (a, b, w) in edges {
            names.insert(a, ());
            names.insert(b, ());
            if a == b || w == 0 {
                continue;
            }
            let key = if a < b { (a, b) } else { (b, a) };
            *pairs.entry(key).or_default() += w;
        }
        let nodes: Vec<String> = names.keys().map(|s| String::from(*s)).collect();
        let index: BTreeMap<String, usize> = nodes.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for ((a, b), w) in pairs {
            let (ia, ib) = (index[a], index[b]);
            adjacency[ia].push((ib, w));
            adjacency[ib].push((ia, w));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        CommGraph { nodes, index, adjacency }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn index_of(&self, agent: &str) -> Option<usize> {
        self.index.get(agent).copied()
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, u64)] {
        &self.adjacency[node]
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<u64> {
        let (ia, ib) = (self.index_of(a)?, self.index_of(b)?);
        self.adjacency[ia].iter().find(|&&(n, _)| n == ib).map(|&(_, w)| w)
    }

    /// Edges as `(a, b, weight)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(&str, &str, u64)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, adj) in self.adjacency.iter().enumerate() {
            for &(j, w) in adj {
                if i < j {
                    out.push((self.nodes[i].as_str(), self.nodes[j].as_str(), w));
                }
            }
        }
        out
    }

    /// Pairs node ids with per-node values.
    pub fn label<'a>(&'a self, values: &'a [f64]) -> impl Iterator<Item = (&'a str, f64)> + 'a {
        self.nodes.iter().map(String::as_str).zip(values.iter().copied())
    }

    /// Connected components as sorted node lists, in order of smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Every author and interaction target becomes a node.
pub fn build_comm_graph(posts: &[PostRecord]) -> CommGraph {
    let edges = posts
        .iter()
        .flat_map(|p| p.interaction_targets().map(move |t| (p.author_id.as_str(), t, 1u64)));
    CommGraph::from_edges(edges, posts.iter().map(|p| p.author_id.as_str()))
}

/// Raw Brandes dependency sums over the given sources. Summed over all
/// sources this counts each unordered pair twice.
pub fn betweenness_partial(graph: &CommGraph, sources: core::ops::Range<usize>) -> Vec<f64> {
    let n = graph.node_count();
    let mut acc = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut stack: Vec<usize> = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);

    for s in sources {
        for &v in &stack {
            sigma[v] = 0.0;
            dist[v] = -1;
            delta[v] = 0.0;
            preds[v].clear();
        }
        stack.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &(w, _) in graph.neighbors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in stack.iter().rev() {
            let coeff = (1.0 + delta[w]) / sigma[w];
            for &v in &preds[w] {
                delta[v] += sigma[v] * coeff;
            }
            if w != s {
                acc[w] += delta[w];
            }
        }
    }
    acc
}

/// Converts summed [`betweenness_partial`] output into normalized scores:
/// halve for undirected double counting, then scale by `2/((n-1)(n-2))`.
pub fn normalize_betweenness(mut raw: Vec<f64>) -> Vec<f64> {
    let n = raw.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let scale = 1.0 / ((n - 1) as f64 * (n - 2) as f64);
    for x in &mut raw {
        *x *= scale;
    }
    raw
}

/// Normalized betweenness for every node, indexed like [`CommGraph::nodes`].
pub fn betweenness(graph: &CommGraph) -> Vec<f64> {
    normalize_betweenness(betweenness_partial(graph, 0..graph.node_count()))
}

/// Unweighted degree over `n - 1`; all zeros when `n < 2`.
pub fn total_degree(graph: &CommGraph) -> Vec<f64> {
    let n = graph.node_count();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n).map(|v| graph.neighbors(v).len() as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenvectorResult {
    /// Unit norm over the component it was computed on, zero elsewhere.
    pub scores: Vec<f64>,
    pub eigenvalue: f64,
    pub iterations: usize,
    /// `max |A v - lambda v|` at the returned vector.
    pub residual: f64,
    pub component_size: usize,
    /// True when nodes outside the largest component were zeroed.
    pub disconnected: bool,
}

pub const EIGEN_TOL: f64 = 1e-8;
pub const EIGEN_MAX_ITER: usize = 1000;

/// Power iteration on the weighted adjacency matrix of the largest
/// connected component (ties go to the component holding the smallest node
/// id), starting from all ones and normalizing to unit Euclidean length each
/// step. Iterates `x <- (A + I) x`: same eigenvectors as `A`, but the shift
/// keeps bipartite components such as paths from oscillating between the
/// `+lambda` and `-lambda` eigenvectors. Stops once successive iterates
/// differ by less than `tol` in max-norm.
pub fn eigenvector_centrality(graph: &CommGraph, tol: f64, max_iter: usize) -> CoreResult<EigenvectorResult> {
    let n = graph.node_count();
    if n == 0 {
        return Err(CoreError::Empty("graph"));
    }
    let components = graph.components();
    let largest = components
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .expect("nonempty graph has a component");
    let m = largest.len();
    let mut local = vec![usize::MAX; n];
    for (i, &v) in largest.iter().enumerate() {
        local[v] = i;
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        for (i, &v) in largest.iter().enumerate() {
            let mut s = 0.0;
            for &(w, wt) in graph.neighbors(v) {
                s += wt as f64 * x[local[w]];
            }
            out[i] = s;
        }
    };

    let mut x = vec![1.0 / libm::sqrt(m as f64); m];
    let mut ax = vec![0.0; m];
    let mut next = vec![0.0; m];
    let mut iterations = 0;
    let mut diff = f64::INFINITY;
    while iterations < max_iter {
        iterations += 1;
        apply(&x, &mut ax);
        for i in 0..m {
            next[i] = ax[i] + x[i];
        }
        let norm = libm::sqrt(next.iter().map(|v| v * v).sum::<f64>());
        for v in &mut next {
            *v /= norm;
        }
        diff = x.iter().zip(&next).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max);
        core::mem::swap(&mut x, &mut next);
        if diff < tol {
            break;
        }
    }
    if diff >= tol {
        return Err(CoreError::NoConvergence { iterations, residual: diff });
    }
    apply(&x, &mut ax);
    let eigenvalue: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
    let residual = x
        .iter()
        .zip(&ax)
        .map(|(v, av)| libm::fabs(av - eigenvalue * v))
        .fold(0.0, f64::max);
    let mut scores = vec![0.0; n];
    for (i, &v) in largest.iter().enumerate() {
        scores[v] = x[i].max(0.0);
    }
    Ok(EigenvectorResult {
        scores,
        eigenvalue,
        iterations,
        residual,
        component_size: m,
        disconnected: m < n,
    })
}

/// Per-agent inputs to the Cyborg versus non-Cyborg comparison.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgentMetrics {
    pub verified: bool,
    /// Times this agent's posts were retweeted.
    pub retweets: f64,
    pub followers: f64,
    pub friends: f64,
    pub betweenness: f64,
    pub eigenvector: f64,
    pub total_degree: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Cyborg,
    NonCyborg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub metric: &'static str,
    pub cyborg_mean: f64,
    pub non_cyborg_mean: f64,
    pub t: f64,
    pub p_value: f64,
    /// Set when `p_value < SIGNIFICANCE`.
    pub higher: Option<Group>,
}

pub const SIGNIFICANCE: f64 = 0.001;

pub const METRIC_NAMES: [&str; 7] = [
    "% verified accounts",
    "Avg # retweets",
    "Avg # followers",
    "Avg # friends",
    "Betweenness centrality",
    "Eigenvector centrality",
    "Degree centrality",
];

/// Welch test on one metric; constant-valued groups get `p = 1` when their
/// means agree and `p = 0` otherwise.
pub fn compare_metric(metric: &'static str, cyborg: &[f64], others: &[f64]) -> CoreResult<ComparisonRow> {
    if cyborg.is_empty() {
        return Err(CoreError::EmptyGroup("cyborg"));
    }
    if others.is_empty() {
        return Err(CoreError::EmptyGroup("non-cyborg"));
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let (mc, mo) = (mean(cyborg), mean(others));
    let test = match welch_t_test(cyborg, others) {
        Ok(t) => t,
        Err(CoreError::Degenerate("zero variance in both samples")) => {
            if mc == mo {
                TTest { t: 0.0, df: f64::NAN, p_value: 1.0 }
            } else {
                let t = if mc > mo { f64::INFINITY } else { f64::NEG_INFINITY };
                TTest { t, df: f64::NAN, p_value: 0.0 }
            }
        }
        Err(e) => return Err(e),
    };
    let higher = (test.p_value < SIGNIFICANCE).then(|| if mc > mo { Group::Cyborg } else { Group::NonCyborg });
    Ok(ComparisonRow { metric, cyborg_mean: mc, non_cyborg_mean: mo, t: test.t, p_value: test.p_value, higher })
}

/// The seven-row Cyborg versus non-Cyborg table. Agents without a class are
/// skipped; `% verified` is reported as a percentage.
pub fn compare_groups(
    metrics: &BTreeMap<String, AgentMetrics>,
    classes: &BTreeMap<String, AgentClass>,
) -> CoreResult<Vec<ComparisonRow>> {
    let mut cy: Vec<&AgentMetrics> = Vec::new();
    let mut other: Vec<&AgentMetrics> = Vec::new();
    for (agent, m) in metrics {
        match classes.get(agent) {
            Some(AgentClass::Cyborg) => cy.push(m),
            Some(_) => other.push(m),
            None => {}
        }
    }
    let extract: [fn(&AgentMetrics) -> f64; 7] = [
        |m| if m.verified { 100.0 } else { 0.0 },
        |m| m.retweets,
        |m| m.followers,
        |m| m.friends,
        |m| m.betweenness,
        |m| m.eigenvector,
        |m| m.total_degree,
    ];
    METRIC_NAMES
        .iter()
        .zip(extract)
        .map(|(&name, f)| {
            let a: Vec<f64> = cy.iter().map(|m| f(m)).collect();
            let b: Vec<f64> = other.iter().map(|m| f(m)).collect();
            compare_metric(name, &a, &b)
        })
        .collect()
}
