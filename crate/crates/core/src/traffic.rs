//! Traffic flows, routing and the transmission/overhearing event log.
//!
//! Packets are routed atomically along minimum-hop paths: there is no
//! queuing, loss or contention. Each transmission is heard by every
//! out-neighbour of the transmitter, which is all the centrality estimator
//! needs.

use std::fmt::Write as _;

use rand::seq::index;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::rng::{self, Purpose};
use crate::topology::{NodeLayout, Topology};
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlowSpec {
    pub source: NodeId,
    pub destination: NodeId,
}

impl FlowSpec {
    pub fn new(source: NodeId, destination: NodeId) -> Result<Self> {
        if source == destination {
            return Err(invalid(format!("flow source and destination are both {source}")));
        }
        Ok(Self { source, destination })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionEvent {
    /// Index of the flow in [`TransmissionLog::flows`].
    pub flow_id: usize,
    pub flow: FlowSpec,
    pub transmitter: NodeId,
    pub hop_index: u32,
    /// Out-neighbours of the transmitter when it transmitted.
    pub overhearers: Vec<NodeId>,
    pub next_hop: Option<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransmissionLog {
    pub events: Vec<TransmissionEvent>,
    pub flows: Vec<FlowSpec>,
}

impl TransmissionLog {
    /// `flow_id hop_index transmitter next_hop` table; `-` marks no next hop.
    pub fn to_text(&self) -> String {
        let mut out = String::from("flow_id hop_index transmitter next_hop\n");
        for e in &self.events {
            let next = e.next_hop.map_or_else(|| "-".to_string(), |n| n.to_string());
            let _ = writeln!(out, "{} {} {} {}", e.flow_id, e.hop_index, e.transmitter, next);
        }
        out
    }
}

/// `round(f·N)` flows with distinct sources; each destination is uniform over
/// the other `N-1` nodes.
pub fn generate_flows(node_count: usize, fraction: f64, seed: u64) -> Result<Vec<FlowSpec>> {
    if node_count < 2 {
        return Err(invalid("flow generation needs at least two nodes"));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(invalid(format!("traffic fraction must lie in [0, 1], got {fraction}")));
    }
    let count = (fraction * node_count as f64).round() as usize;
    let mut rng = rng::stream(seed, Purpose::Flows);
    let sources = index::sample(&mut rng, node_count, count).into_vec();
    Ok(sources
        .into_iter()
        .map(|source| {
            let mut destination = rng.gen_range(0..node_count - 1);
            if destination >= source {
                destination += 1;
            }
            FlowSpec { source, destination }
        })
        .collect())
}

/// Minimum-hop path by breadth-first search. At equal depth the parent with
/// the smallest id wins. `None` when the destination is unreachable.
pub fn shortest_path_route(topology: &Topology, flow: FlowSpec) -> Option<Vec<NodeId>> {
    let n = topology.node_count();
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let mut visited = vec![false; n];
    visited[flow.source] = true;
    let mut frontier = vec![flow.source];
    while !frontier.is_empty() && !visited[flow.destination] {
        // expanding in ascending id order makes the first discoverer the
        // smallest-id parent
        frontier.sort_unstable();
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in topology.neighbors(u) {
                if !visited[v] {
                    visited[v] = true;
                    parent[v] = Some(u);
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    if !visited[flow.destination] {
        return None;
    }
    let mut path = vec![flow.destination];
    let mut cur = flow.destination;
    while let Some(p) = parent[cur] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    Some(path)
}

/// Routes every flow in order and logs one event per transmitting node.
pub fn simulate_flows(topology: &Topology, flows: &[FlowSpec]) -> TransmissionLog {
    let mut events = Vec::new();
    for (flow_id, &flow) in flows.iter().enumerate() {
        let Some(path) = shortest_path_route(topology, flow) else {
            continue;
        };
        for (hop, pair) in path.windows(2).enumerate() {
            events.push(TransmissionEvent {
                flow_id,
                flow,
                transmitter: pair[0],
                hop_index: hop as u32,
                overhearers: topology.neighbors(pair[0]).to_vec(),
                next_hop: Some(pair[1]),
            });
        }
    }
    TransmissionLog {
        events,
        flows: flows.to_vec(),
    }
}

/// Bearing toward the previous hop of the highest-hop-count packet a node
/// forwarded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopDirection {
    pub angle: f64,
    pub hop_index: u32,
}

/// For each node, the direction attached to the largest hop index it
/// forwarded at (earliest event on ties). Nodes that never forwarded, or
/// only sourced packets, get `None`.
pub fn record_hop_directions(log: &TransmissionLog, layout: &NodeLayout) -> Vec<Option<HopDirection>> {
    let mut best: Vec<Option<HopDirection>> = vec![None; layout.len()];
    let mut last_tx: Vec<Option<NodeId>> = vec![None; log.flows.len()];
    for e in &log.events {
        if e.hop_index >= 1 {
            if let Some(prev) = last_tx[e.flow_id] {
                let slot = &mut best[e.transmitter];
                if slot.is_none_or(|b| e.hop_index > b.hop_index) {
                    *slot = Some(HopDirection {
                        angle: layout.position(e.transmitter).bearing_to(layout.position(prev)),
                        hop_index: e.hop_index,
                    });
                }
            }
        }
        last_tx[e.flow_id] = Some(e.transmitter);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Point;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn chain(n: usize) -> Topology {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Topology::from_undirected_edges(n, &edges).unwrap()
    }

    #[test]
    fn flow_counts() {
        assert!(generate_flows(300, 0.0, 1).unwrap().is_empty());
        let all = generate_flows(300, 1.0, 1).unwrap();
        assert_eq!(all.len(), 300);
        let mut src: Vec<_> = all.iter().map(|f| f.source).collect();
        src.sort_unstable();
        src.dedup();
        assert_eq!(src.len(), 300);
        assert!(generate_flows(300, 1.5, 1).is_err());
        assert!(generate_flows(300, -0.1, 1).is_err());
        assert!(generate_flows(1, 0.5, 1).is_err());
        assert_eq!(generate_flows(300, 0.3, 9).unwrap(), generate_flows(300, 0.3, 9).unwrap());
    }

    #[test]
    fn half_fraction_over_many_seeds() {
        for seed in 0..500 {
            let flows = generate_flows(10, 0.5, seed).unwrap();
            assert_eq!(flows.len(), 5);
            let mut src: Vec<_> = flows.iter().map(|f| f.source).collect();
            src.sort_unstable();
            src.dedup();
            assert_eq!(src.len(), 5);
            assert!(flows.iter().all(|f| f.source != f.destination && f.destination < 10));
        }
    }

    #[test]
    fn routing_examples() {
        let g = chain(3);
        assert_eq!(shortest_path_route(&g, FlowSpec::new(0, 1).unwrap()), Some(vec![0, 1]));
        let directed = Topology::from_directed_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(shortest_path_route(&directed, FlowSpec::new(0, 2).unwrap()), Some(vec![0, 1, 2]));
        assert_eq!(shortest_path_route(&directed, FlowSpec::new(2, 0).unwrap()), None);
        // diamond A=0 -> {B=1, C=2} -> D=3
        let diamond = Topology::from_directed_edges(4, &[(0, 2), (0, 1), (1, 3), (2, 3)]).unwrap();
        assert_eq!(shortest_path_route(&diamond, FlowSpec::new(0, 3).unwrap()), Some(vec![0, 1, 3]));
    }

    #[test]
    fn routing_prefers_smallest_parent_at_depth_two() {
        // depth-2 nodes are discovered as [2, 1]; FIFO BFS would route via 2
        let g = Topology::from_directed_edges(7, &[(0, 3), (0, 4), (4, 1), (3, 2), (1, 6), (2, 6)]).unwrap();
        assert_eq!(shortest_path_route(&g, FlowSpec::new(0, 6).unwrap()), Some(vec![0, 4, 1, 6]));
    }

    #[test]
    fn simulation_examples() {
        let g = chain(4);
        assert!(simulate_flows(&g, &[]).events.is_empty());
        let log = simulate_flows(&g, &[FlowSpec::new(0, 3).unwrap()]);
        assert_eq!(log.events.len(), 3);
        assert_eq!(log.events.iter().map(|e| e.hop_index).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(log.events[1].overhearers, vec![0, 2]);
        assert_eq!(log.events[2].next_hop, Some(3));
        assert!(log.to_text().contains("0 2 2 3\n"));

        let split = Topology::from_undirected_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let log = simulate_flows(&split, &[FlowSpec::new(0, 3).unwrap()]);
        assert!(log.events.is_empty());
        assert_eq!(log.flows.len(), 1);
    }

    #[test]
    fn hop_directions() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(3.0, 0.0),
        ];
        let layout = NodeLayout::new(pts, 4.0, 1.0, 1.0, 0).unwrap();
        let g = chain(4);
        let log = simulate_flows(&g, &[FlowSpec::new(0, 3).unwrap()]);
        let dirs = record_hop_directions(&log, &layout);
        assert!(dirs[0].is_none());
        assert!(dirs[3].is_none());
        let last = dirs[2].unwrap();
        assert_eq!(last.hop_index, 2);
        assert_abs_diff_eq!(last.angle, std::f64::consts::PI, epsilon = 1e-12);

        // flows with hop counts 2 and 5 through node 5 on a 7-chain
        let pts = (0..8).map(|i| Point::new(i as f64, 0.5)).collect();
        let layout = NodeLayout::new(pts, 8.0, 1.0, 1.0, 0).unwrap();
        let g = chain(8);
        let flows = [FlowSpec::new(7, 4).unwrap(), FlowSpec::new(0, 6).unwrap()];
        let log = simulate_flows(&g, &flows);
        let d5 = record_hop_directions(&log, &layout)[5].unwrap();
        assert_eq!(d5.hop_index, 5);
        assert_abs_diff_eq!(d5.angle, std::f64::consts::PI, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn events_match_paths_and_adjacency(n in 2usize..25, seed in any::<u64>(), f in 0.0f64..=1.0) {
            let layout = crate::topology::place_nodes(n, 3.0, 3.0, 1.0, seed).unwrap();
            let g = crate::topology::build_omni_graph(&layout);
            let flows = generate_flows(n, f, seed).unwrap();
            let log = simulate_flows(&g, &flows);
            prop_assert_eq!(&log, &simulate_flows(&g, &flows));
            for (id, &flow) in flows.iter().enumerate() {
                let hops: Vec<_> = log.events.iter().filter(|e| e.flow_id == id).collect();
                let expect = shortest_path_route(&g, flow).map_or(0, |p| p.len() - 1);
                prop_assert_eq!(hops.len(), expect);
                for (i, e) in hops.iter().enumerate() {
                    prop_assert_eq!(e.hop_index as usize, i);
                    prop_assert!(e.transmitter != flow.destination);
                    prop_assert_eq!(&e.overhearers[..], g.neighbors(e.transmitter));
                }
            }
        }
    }
}
