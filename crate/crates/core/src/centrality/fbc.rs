//! Centralized flow betweenness (unit capacity on every directed edge).
//!
//! The flow through `v` for an ordered pair `(s, t)` is the drop in maximum
//! flow when `v` is removed. A vertex that carries no flow in some maximum
//! flow cannot lower it, so only vertices on the computed flow are probed. For
//! those, the paths through `v` are cancelled and the remaining flow is
//! re-augmented in the graph without `v`.
//!
//! Scores use the standard normalization: pairs that involve `v` are left out
//! of both numerator and denominator, so a star centre scores exactly 1.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::topology::Topology;
use crate::NodeId;

/// Residual network with paired arcs: arc `2i` is the `i`-th directed edge
/// and arc `2i + 1` its reverse.
#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    head: Vec<NodeId>,
    adj: Vec<Vec<usize>>,
    cap: Vec<u8>,
}

impl FlowNetwork {
    pub(crate) fn new(topology: &Topology) -> Self {
        let n = topology.node_count();
        let mut head = Vec::with_capacity(2 * topology.edge_count());
        let mut adj = vec![Vec::new(); n];
        for u in 0..n {
            for &v in topology.neighbors(u) {
                adj[u].push(head.len());
                head.push(v);
                adj[v].push(head.len());
                head.push(u);
            }
        }
        let mut net = Self { head, adj, cap: Vec::new() };
        net.reset();
        net
    }

    fn reset(&mut self) {
        self.cap = (0..self.head.len()).map(|a| u8::from(a % 2 == 0)).collect();
    }

    fn push_unit(&mut self, arc: usize) {
        self.cap[arc] -= 1;
        self.cap[arc ^ 1] += 1;
    }

    /// One augmenting unit path from `s` to `t` avoiding `blocked`.
    fn augment(&mut self, s: NodeId, t: NodeId, blocked: Option<NodeId>, via: &mut [Option<usize>]) -> bool {
        via.iter_mut().for_each(|x| *x = None);
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        if let Some(b) = blocked {
            seen[b] = true;
        }
        let mut queue = VecDeque::from([s]);
        'search: while let Some(u) = queue.pop_front() {
            for &arc in &self.adj[u] {
                let v = self.head[arc];
                if self.cap[arc] > 0 && !seen[v] {
                    seen[v] = true;
                    via[v] = Some(arc);
                    if v == t {
                        break 'search;
                    }
                    queue.push_back(v);
                }
            }
        }
        if via[t].is_none() {
            return false;
        }
        let mut cur = t;
        while cur != s {
            let arc = via[cur].expect("path back to source");
            self.push_unit(arc);
            cur = self.head[arc ^ 1];
        }
        true
    }

    /// Augments until no path remains; returns the number of added units.
    fn saturate(&mut self, s: NodeId, t: NodeId, blocked: Option<NodeId>) -> u32 {
        let mut via = vec![None; self.adj.len()];
        let mut added = 0;
        while self.augment(s, t, blocked, &mut via) {
            added += 1;
        }
        added
    }

    /// Maximum flow from a clean network.
    pub(crate) fn max_flow(&mut self, s: NodeId, t: NodeId, blocked: Option<NodeId>) -> u32 {
        self.reset();
        self.saturate(s, t, blocked)
    }

    /// Splits the current flow into unit walks from `s` to `t`, each given as
    /// its list of forward arcs. Circulations that no walk uses are dropped.
    fn decompose(&self, s: NodeId, t: NodeId, units: u32) -> Vec<Vec<usize>> {
        let mut used: Vec<bool> = (0..self.head.len()).map(|a| a % 2 == 1 || self.cap[a] > 0).collect();
        let mut walks = Vec::with_capacity(units as usize);
        for _ in 0..units {
            let mut walk = Vec::new();
            let mut cur = s;
            while cur != t {
                let arc = self.adj[cur]
                    .iter()
                    .copied()
                    .find(|&a| !used[a])
                    .expect("flow conservation guarantees an outgoing flow arc");
                used[arc] = true;
                walk.push(arc);
                cur = self.head[arc];
            }
            walks.push(walk);
        }
        walks
    }

    fn load(&mut self, walks: &[&Vec<usize>]) {
        self.reset();
        for walk in walks {
            for &arc in walk.iter() {
                self.push_unit(arc);
            }
        }
    }
}

/// Maximum flow of `(s, t)` and, for every other vertex, how much of it is
/// lost when that vertex is removed.
fn pair_flow(net: &mut FlowNetwork, s: NodeId, t: NodeId, through: &mut [u32]) -> u32 {
    let total = net.max_flow(s, t, None);
    if total == 0 {
        return 0;
    }
    let walks = net.decompose(s, t, total);
    let n = through.len();
    let mut on_walk = vec![Vec::new(); n];
    for (i, walk) in walks.iter().enumerate() {
        for &arc in walk {
            let v = net.head[arc];
            if v != t && on_walk[v].last() != Some(&i) {
                on_walk[v].push(i);
            }
        }
    }
    for v in 0..n {
        if v == s || v == t || on_walk[v].is_empty() {
            continue;
        }
        let kept: Vec<&Vec<usize>> = walks
            .iter()
            .enumerate()
            .filter(|(i, _)| on_walk[v].binary_search(i).is_err())
            .map(|(_, w)| w)
            .collect();
        let residual_units = kept.len() as u32;
        net.load(&kept);
        let without = residual_units + net.saturate(s, t, Some(v));
        through[v] += total.saturating_sub(without);
    }
    total
}

/// Pairwise maximum flows and per-vertex carried flow, reduced in fixed
/// source order.
pub(crate) struct FlowTally {
    /// `max_flow[s * n + t]`
    pub(crate) max_flow: Vec<u32>,
    pub(crate) through: Vec<u64>,
}

pub(crate) fn tally(topology: &Topology) -> FlowTally {
    let n = topology.node_count();
    let base = FlowNetwork::new(topology);
    let per_source: Vec<(Vec<u32>, Vec<u32>)> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut net = base.clone();
            let mut row = vec![0; n];
            let mut through = vec![0; n];
            for t in (0..n).filter(|&t| t != s) {
                row[t] = pair_flow(&mut net, s, t, &mut through);
            }
            (row, through)
        })
        .collect();
    let mut max_flow = Vec::with_capacity(n * n);
    let mut through = vec![0u64; n];
    for (row, th) in per_source {
        max_flow.extend(row);
        for (acc, x) in through.iter_mut().zip(th) {
            *acc += u64::from(x);
        }
    }
    FlowTally { max_flow, through }
}

/// Flow betweenness of every node: carried flow over the total maximum flow
/// of all ordered pairs that exclude the node. Zero when that total is zero.
pub fn flow_betweenness_oracle(topology: &Topology) -> Vec<f64> {
    let n = topology.node_count();
    let FlowTally { max_flow, through } = tally(topology);
    let total: u64 = max_flow.iter().map(|&x| u64::from(x)).sum();
    (0..n)
        .map(|v| {
            let touching: u64 = (0..n)
                .map(|u| u64::from(max_flow[v * n + u]) + u64::from(max_flow[u * n + v]))
                .sum();
            let denom = total - touching;
            if denom == 0 {
                0.0
            } else {
                through[v] as f64 / denom as f64
            }
        })
        .collect()
}
