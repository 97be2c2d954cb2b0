//! Wireless Flow Betweenness.
//!
//! Every node keeps two flow sets: flows it transmitted (`g`, as source or
//! forwarder) and flows it transmitted or overheard (`o`). Transmitters
//! piggyback their current `(w, g)` and overhearers store the latest value per
//! neighbour. A node's estimate is
//!
//! ```text
//! w(v) = g(v) / (o(v) + g(u)/w(u) - g(u)),   u = argmax_{u in N(v)} g(u)
//! ```
//!
//! where the correction term counts flows the busiest neighbour knows about
//! beyond the ones `v` already overheard from it.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{invalid, Error, Result};
use crate::topology::Topology;
use crate::traffic::{FlowSpec, TransmissionLog};
use crate::NodeId;

/// Values a transmitter attaches to every packet it sends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piggyback {
    pub wfb: f64,
    pub forward_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    Transmit,
    Overhear { from: NodeId, piggyback: Piggyback },
}

/// How a node folds neighbour estimates into its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WfbVariant {
    /// Only the neighbour with the highest forwarding count contributes.
    #[default]
    BusiestNeighbor,
    /// Every neighbour contributes its additional-flow estimate. Double counts
    /// flows seen by mutually adjacent neighbours; kept for comparison runs.
    SummedNeighbors,
}

/// Per-node estimator bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityState {
    forwarded: HashSet<FlowSpec>,
    /// Every flow this node transmitted or overheard, with the last hop index
    /// at which it saw that flow.
    observed: HashMap<FlowSpec, u32>,
    wfb: f64,
    neighbor_table: BTreeMap<NodeId, Piggyback>,
    variant: WfbVariant,
}

impl Default for CentralityState {
    fn default() -> Self {
        Self::new(WfbVariant::BusiestNeighbor)
    }
}

impl CentralityState {
    pub fn new(variant: WfbVariant) -> Self {
        Self {
            forwarded: HashSet::new(),
            observed: HashMap::new(),
            wfb: 0.0,
            neighbor_table: BTreeMap::new(),
            variant,
        }
    }

    /// `g`: distinct flows this node transmitted.
    pub fn forward_count(&self) -> u32 {
        self.forwarded.len() as u32
    }

    /// `o`: distinct flows this node transmitted or overheard.
    pub fn overheard_count(&self) -> u32 {
        self.observed.len() as u32
    }

    pub fn wfb(&self) -> f64 {
        self.wfb
    }

    pub fn neighbor_table(&self) -> &BTreeMap<NodeId, Piggyback> {
        &self.neighbor_table
    }

    pub fn piggyback(&self) -> Piggyback {
        Piggyback {
            wfb: self.wfb,
            forward_count: self.forward_count(),
        }
    }

    /// Applies one transmit or overhear event and recomputes the estimate.
    pub fn update(&mut self, observation: Observation, flow: FlowSpec, hop_index: u32) -> Result<()> {
        if let Some(&last) = self.observed.get(&flow) {
            if hop_index < last {
                return Err(Error::LogCorruption(format!(
                    "flow {}->{} seen at hop {hop_index} after hop {last}",
                    flow.source, flow.destination
                )));
            }
        }
        self.observed.insert(flow, hop_index);
        match observation {
            Observation::Transmit => {
                self.forwarded.insert(flow);
            }
            Observation::Overhear { from, piggyback } => {
                if !(0.0..=1.0).contains(&piggyback.wfb) {
                    return Err(invalid(format!("piggybacked wfb {} outside [0, 1]", piggyback.wfb)));
                }
                self.neighbor_table.insert(from, piggyback);
            }
        }
        self.recompute();
        Ok(())
    }

    fn recompute(&mut self) {
        let g = f64::from(self.forward_count());
        let o = f64::from(self.overheard_count());
        if o == 0.0 {
            self.wfb = 0.0;
            return;
        }
        let extra = match self.variant {
            WfbVariant::BusiestNeighbor => self
                .busiest_neighbor()
                .map_or(0.0, |(_, pb)| additional_flows(pb.forward_count, pb.wfb)),
            WfbVariant::SummedNeighbors => self
                .neighbor_table
                .values()
                .map(|pb| additional_flows(pb.forward_count, pb.wfb))
                .sum(),
        };
        self.wfb = g / (o + extra);
    }

    /// Neighbour with the largest forwarding count; smallest id on ties.
    fn busiest_neighbor(&self) -> Option<(NodeId, Piggyback)> {
        let mut best: Option<(NodeId, Piggyback)> = None;
        // BTreeMap iterates in ascending id, so strict > keeps the smallest
        for (&id, &pb) in &self.neighbor_table {
            if best.is_none_or(|(_, b)| pb.forward_count > b.forward_count) {
                best = Some((id, pb));
            }
        }
        best
    }
}

/// Flows a neighbour knows about beyond its own transmissions:
/// `g/w - g`, or 0 when either term is 0.
pub fn additional_flows(forward_count: u32, wfb: f64) -> f64 {
    if forward_count == 0 || wfb <= 0.0 {
        return 0.0;
    }
    let g = f64::from(forward_count);
    (g / wfb - g).max(0.0)
}

/// Egocentric baseline: own forwarding count over the forwarding counts of
/// the closed neighbourhood.
pub fn naive_betweenness(own_forward_count: u32, neighbor_forward_counts: &[u32]) -> f64 {
    let total = own_forward_count + neighbor_forward_counts.iter().sum::<u32>();
    if total == 0 {
        0.0
    } else {
        f64::from(own_forward_count) / f64::from(total)
    }
}

/// Distinct flows each node transmitted in the log.
pub fn forward_counts(node_count: usize, log: &TransmissionLog) -> Vec<u32> {
    let mut seen = vec![HashSet::new(); node_count];
    for e in &log.events {
        seen[e.transmitter].insert(e.flow);
    }
    seen.iter().map(|s| s.len() as u32).collect()
}

/// [`naive_betweenness`] for every node of `topology`.
pub fn naive_betweenness_all(topology: &Topology, log: &TransmissionLog) -> Vec<f64> {
    let g = forward_counts(topology.node_count(), log);
    (0..topology.node_count())
        .map(|v| {
            let nbrs: Vec<u32> = topology.neighbors(v).iter().map(|&u| g[u]).collect();
            naive_betweenness(g[v], &nbrs)
        })
        .collect()
}

/// Replays the log through every node's estimator and returns the final
/// per-node states.
pub fn replay(topology: &Topology, log: &TransmissionLog, variant: WfbVariant) -> Result<Vec<CentralityState>> {
    let n = topology.node_count();
    let mut states = vec![CentralityState::new(variant); n];
    let mut next_hop: Vec<u32> = vec![0; log.flows.len()];
    for (i, e) in log.events.iter().enumerate() {
        let expected = next_hop
            .get_mut(e.flow_id)
            .ok_or_else(|| Error::LogCorruption(format!("event {i} references unknown flow {}", e.flow_id)))?;
        if e.hop_index != *expected {
            return Err(Error::LogCorruption(format!(
                "event {i}: flow {} expected hop {} but got {}",
                e.flow_id, expected, e.hop_index
            )));
        }
        *expected += 1;
        if e.transmitter >= n || e.overhearers.iter().any(|&o| o >= n || o == e.transmitter) {
            return Err(Error::LogCorruption(format!("event {i} names a node outside the topology")));
        }

        states[e.transmitter].update(Observation::Transmit, e.flow, e.hop_index)?;
        let piggyback = states[e.transmitter].piggyback();
        for &o in &e.overhearers {
            let obs = Observation::Overhear {
                from: e.transmitter,
                piggyback,
            };
            states[o].update(obs, e.flow, e.hop_index)?;
        }
    }
    Ok(states)
}

/// Final WFB value of every node after replaying the log.
pub fn run_wfb(topology: &Topology, log: &TransmissionLog) -> Result<Vec<f64>> {
    Ok(replay(topology, log, WfbVariant::BusiestNeighbor)?
        .iter()
        .map(CentralityState::wfb)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::{generate_flows, simulate_flows, TransmissionEvent};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn flow(s: usize, d: usize) -> FlowSpec {
        FlowSpec::new(s, d).unwrap()
    }

    #[test]
    fn additional_flow_examples() {
        assert_eq!(additional_flows(5, 1.0), 0.0);
        assert_eq!(additional_flows(0, 0.3), 0.0);
        assert_eq!(additional_flows(0, 0.0), 0.0);
        assert_eq!(additional_flows(3, 0.0), 0.0);
        assert_abs_diff_eq!(additional_flows(4, 0.5), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn naive_examples() {
        assert_eq!(naive_betweenness(3, &[0, 0, 0]), 1.0);
        assert_eq!(naive_betweenness(0, &[2, 5]), 0.0);
        assert_eq!(naive_betweenness(0, &[]), 0.0);
        assert_abs_diff_eq!(naive_betweenness(2, &[1, 2, 3]), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn chain_trace() {
        let g = Topology::from_undirected_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let log = simulate_flows(&g, &[flow(0, 3)]);
        assert_eq!(run_wfb(&g, &log).unwrap(), vec![1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn one_hop_flow() {
        let g = Topology::from_undirected_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let log = simulate_flows(&g, &[flow(1, 2)]);
        assert_eq!(run_wfb(&g, &log).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(run_wfb(&g, &TransmissionLog::default()).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn star_hub_trace() {
        // hub 0, leaves 1..=4; flows 1->2 then 3->4
        let g = Topology::from_undirected_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let log = simulate_flows(&g, &[flow(1, 2), flow(3, 4)]);
        let w = run_wfb(&g, &log).unwrap();
        assert_eq!(w, vec![1.0, 0.5, 0.0, 0.5, 0.0]);
        assert!(w[1..].iter().all(|&leaf| w[0] > leaf));
    }

    #[test]
    fn overhear_only_node_stays_zero() {
        let mut s = CentralityState::default();
        for k in 0..5 {
            let pb = Piggyback {
                wfb: 0.4,
                forward_count: 3,
            };
            s.update(Observation::Overhear { from: 7, piggyback: pb }, flow(k, k + 10), 0).unwrap();
        }
        assert_eq!(s.overheard_count(), 5);
        assert_eq!(s.wfb(), 0.0);
    }

    #[test]
    fn recompute_ladder() {
        let mut s = CentralityState::default();
        s.update(Observation::Transmit, flow(0, 1), 0).unwrap();
        assert_eq!(s.wfb(), 1.0);
        // busiest neighbour 9 (g=4, w=0.5) adds 4 flows; neighbour 3 ties on g
        // but has the smaller id
        let pb = |wfb, forward_count| Piggyback { wfb, forward_count };
        s.update(Observation::Overhear { from: 9, piggyback: pb(0.5, 4) }, flow(2, 3), 1).unwrap();
        assert_abs_diff_eq!(s.wfb(), 1.0 / (2.0 + 4.0), epsilon = 1e-12);
        s.update(Observation::Overhear { from: 3, piggyback: pb(1.0, 4) }, flow(2, 3), 2).unwrap();
        assert_abs_diff_eq!(s.wfb(), 1.0 / 2.0, epsilon = 1e-12);
        assert_eq!(s.neighbor_table().len(), 2);
    }

    #[test]
    fn hop_regression_is_corruption() {
        let mut s = CentralityState::default();
        s.update(Observation::Transmit, flow(0, 5), 3).unwrap();
        assert!(matches!(s.update(Observation::Transmit, flow(0, 5), 1), Err(Error::LogCorruption(_))));

        let g = Topology::from_undirected_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let mut log = simulate_flows(&g, &[flow(0, 2)]);
        log.events.swap(0, 1);
        assert!(matches!(run_wfb(&g, &log), Err(Error::LogCorruption(_))));
    }

    #[test]
    fn summed_variant_overcounts() {
        let layout = crate::topology::place_connected_nodes(80, 5.0, 5.0, 1.0, 4, 1000).unwrap().0;
        let g = crate::topology::build_omni_graph(&layout);
        let log = simulate_flows(&g, &generate_flows(80, 0.5, 4).unwrap());
        let busiest = replay(&g, &log, WfbVariant::BusiestNeighbor).unwrap();
        let summed = replay(&g, &log, WfbVariant::SummedNeighbors).unwrap();
        let mean = |s: &[CentralityState]| s.iter().map(CentralityState::wfb).sum::<f64>() / s.len() as f64;
        assert!(mean(&summed) < mean(&busiest));
    }

    #[test]
    fn relabelling_permutes_values() {
        // symmetric star relabelled by a permutation
        let perm = [3usize, 0, 4, 1, 2];
        let base = Topology::from_undirected_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let edges: Vec<_> = [(0, 1), (0, 2), (0, 3), (0, 4)].iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        let relabelled = Topology::from_undirected_edges(5, &edges).unwrap();
        let w = run_wfb(&base, &simulate_flows(&base, &[flow(1, 2), flow(3, 4)])).unwrap();
        let flows = [flow(perm[1], perm[2]), flow(perm[3], perm[4])];
        let w2 = run_wfb(&relabelled, &simulate_flows(&relabelled, &flows)).unwrap();
        for v in 0..5 {
            assert_eq!(w[v], w2[perm[v]]);
        }
    }

    /// Random event streams over a random topology, including hops that skip
    /// around the graph; only hop ordering per flow is respected.
    fn arbitrary_log(n: usize, edges: &[(usize, usize)], walks: &[(usize, usize, Vec<usize>)]) -> (Topology, TransmissionLog) {
        let g = Topology::from_undirected_edges(n, edges).unwrap();
        let mut log = TransmissionLog::default();
        for (s, d, steps) in walks {
            let (s, d) = (s % n, d % n);
            let f = match FlowSpec::new(s, d) {
                Ok(f) if !log.flows.contains(&f) => f,
                _ => continue,
            };
            let id = log.flows.len();
            log.flows.push(f);
            let mut cur = s;
            for (h, &step) in steps.iter().enumerate() {
                log.events.push(TransmissionEvent {
                    flow_id: id,
                    flow: f,
                    transmitter: cur,
                    hop_index: h as u32,
                    overhearers: g.neighbors(cur).to_vec(),
                    next_hop: None,
                });
                let nb = g.neighbors(cur);
                if nb.is_empty() {
                    break;
                }
                cur = nb[step % nb.len()];
            }
        }
        (g, log)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn wfb_bounded_and_counts_monotone(
            n in 2usize..12,
            edges in prop::collection::vec((0usize..12, 0usize..12), 0..30),
            walks in prop::collection::vec((0usize..12, 0usize..12, prop::collection::vec(0usize..12, 1..6)), 0..12),
        ) {
            let edges: Vec<_> = edges.into_iter().map(|(a, b)| (a % n, b % n)).filter(|(a, b)| a != b).collect();
            let (g, log) = arbitrary_log(n, &edges, &walks);
            let mut states = vec![CentralityState::default(); n];
            for e in &log.events {
                let before: Vec<_> = states.iter().map(|s| (s.forward_count(), s.overheard_count())).collect();
                states[e.transmitter].update(Observation::Transmit, e.flow, e.hop_index).unwrap();
                let pb = states[e.transmitter].piggyback();
                for &o in &e.overhearers {
                    states[o].update(Observation::Overhear { from: e.transmitter, piggyback: pb }, e.flow, e.hop_index).unwrap();
                }
                for (s, (g0, o0)) in states.iter().zip(before) {
                    prop_assert!(s.forward_count() >= g0 && s.overheard_count() >= o0);
                    prop_assert!(s.overheard_count() >= s.forward_count());
                    prop_assert!((0.0..=1.0).contains(&s.wfb()));
                    if s.overheard_count() == 0 {
                        prop_assert_eq!(s.wfb(), 0.0);
                    }
                }
            }
            let w = run_wfb(&g, &log).unwrap();
            prop_assert_eq!(&w, &states.iter().map(CentralityState::wfb).collect::<Vec<_>>());
            prop_assert_eq!(w, run_wfb(&g, &log).unwrap());
        }
    }
}
