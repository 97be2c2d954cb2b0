//! Node placement and the omnidirectional connectivity graph.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::{self, Purpose};
use crate::NodeId;

/// Relative slack applied to every range comparison so that a receiver placed
/// exactly on a computed boundary is not lost to rounding.
const REACH_SLACK: f64 = 1e-9;

/// Range predicate shared by every coverage model: `dist_sq <= reach_sq`
/// within [`REACH_SLACK`].
#[inline]
pub(crate) fn in_reach(dist_sq: f64, reach_sq: f64) -> bool {
    dist_sq <= reach_sq * (1.0 + REACH_SLACK)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_sq(self, other: Point) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        dx * dx + dy * dy
    }

    pub fn distance(self, other: Point) -> f64 {
        self.distance_sq(other).sqrt()
    }

    /// Bearing from `self` toward `other`, in `[0, 2π)`.
    pub fn bearing_to(self, other: Point) -> f64 {
        let a = (other.y - self.y).atan2(other.x - self.x);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }
}

/// Immutable node positions in a rectangular region plus the omnidirectional
/// radio range.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLayout {
    positions: Vec<Point>,
    region_width: f64,
    region_height: f64,
    omni_range: f64,
    seed: u64,
}

impl NodeLayout {
    /// Builds a layout from explicit positions, validating the region bounds.
    pub fn new(
        positions: Vec<Point>,
        region_width: f64,
        region_height: f64,
        omni_range: f64,
        seed: u64,
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(invalid("layout needs at least one node"));
        }
        validate_region(region_width, region_height, omni_range)?;
        for (id, p) in positions.iter().enumerate() {
            let inside = (0.0..=region_width).contains(&p.x) && (0.0..=region_height).contains(&p.y);
            if !inside {
                return Err(invalid(format!(
                    "node {id} at ({}, {}) lies outside the {region_width}x{region_height} region",
                    p.x, p.y
                )));
            }
        }
        Ok(Self {
            positions,
            region_width,
            region_height,
            omni_range,
            seed,
        })
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, id: NodeId) -> Point {
        self.positions[id]
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn region_width(&self) -> f64 {
        self.region_width
    }

    pub fn region_height(&self) -> f64 {
        self.region_height
    }

    pub fn omni_range(&self) -> f64 {
        self.omni_range
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Nodes per unit area.
    pub fn density(&self) -> f64 {
        self.len() as f64 / (self.region_width * self.region_height)
    }

    /// Writes the layout as a plain-text table: a `N width height r seed`
    /// header line followed by one `id x y` line per node.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(32 * (self.len() + 1));
        let _ = writeln!(
            out,
            "{} {:.6} {:.6} {:.6} {}",
            self.len(),
            self.region_width,
            self.region_height,
            self.omni_range,
            self.seed
        );
        for (id, p) in self.positions.iter().enumerate() {
            let _ = writeln!(out, "{id} {:.6} {:.6}", p.x, p.y);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: hline,
                message: format!("header needs 5 fields `N width height r seed`, got {}", fields.len()),
            });
        }
        let n: usize = parse_field(fields[0], hline)?;
        let width: f64 = parse_field(fields[1], hline)?;
        let height: f64 = parse_field(fields[2], hline)?;
        let range: f64 = parse_field(fields[3], hline)?;
        let seed: u64 = parse_field(fields[4], hline)?;

        let mut positions = vec![None; n];
        for (line, row) in lines {
            let f: Vec<&str> = row.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: "expected `id x y`".into(),
                });
            }
            let id: usize = parse_field(f[0], line)?;
            let slot = positions.get_mut(id).ok_or_else(|| Error::Parse {
                line,
                message: format!("node id {id} out of range for N={n}"),
            })?;
            if slot.is_some() {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate node id {id}"),
                });
            }
            *slot = Some(Point::new(parse_field(f[1], line)?, parse_field(f[2], line)?));
        }
        let positions = positions
            .into_iter()
            .enumerate()
            .map(|(id, p)| p.ok_or_else(|| invalid(format!("node {id} missing from layout file"))))
            .collect::<Result<Vec<_>>>()?;
        NodeLayout::new(positions, width, height, range, seed)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse `{s}`"),
    })
}

fn validate_region(width: f64, height: f64, omni_range: f64) -> Result<()> {
    if !(width > 0.0 && width.is_finite() && height > 0.0 && height.is_finite()) {
        return Err(invalid(format!("region dimensions must be positive, got {width}x{height}")));
    }
    if !(omni_range > 0.0 && omni_range.is_finite()) {
        return Err(invalid(format!("omni_range must be positive, got {omni_range}")));
    }
    Ok(())
}

/// Draws `count` positions i.i.d. uniform over the region.
pub fn place_nodes(count: usize, region_width: f64, region_height: f64, omni_range: f64, seed: u64) -> Result<NodeLayout> {
    place_attempt(count, region_width, region_height, omni_range, seed, 0)
}

fn place_attempt(
    count: usize,
    width: f64,
    height: f64,
    omni_range: f64,
    seed: u64,
    attempt: u32,
) -> Result<NodeLayout> {
    if count == 0 {
        return Err(invalid("node count must be at least 1"));
    }
    validate_region(width, height, omni_range)?;
    let mut rng = rng::stream(seed, Purpose::Layout(attempt));
    let positions = (0..count)
        .map(|_| Point::new(rng.gen::<f64>() * width, rng.gen::<f64>() * height))
        .collect();
    Ok(NodeLayout {
        positions,
        region_width: width,
        region_height: height,
        omni_range,
        seed,
    })
}

/// Places nodes until the omnidirectional graph is connected. Attempt `a`
/// draws from an independent stream of the same seed, so neighbouring seeds
/// never produce the same layout. Returns the layout and the number of
/// rejected attempts.
pub fn place_connected_nodes(
    count: usize,
    region_width: f64,
    region_height: f64,
    omni_range: f64,
    seed: u64,
    max_attempts: u32,
) -> Result<(NodeLayout, u32)> {
    for attempt in 0..max_attempts {
        let layout = place_attempt(count, region_width, region_height, omni_range, seed, attempt)?;
        if omni_connected(&layout) {
            return Ok((layout, attempt));
        }
    }
    Err(Error::Disconnected { attempts: max_attempts })
}

/// Whether the omnidirectional graph is connected, without building it.
/// The graph is symmetric, so weak and strong connectivity coincide.
fn omni_connected(layout: &NodeLayout) -> bool {
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let pts = layout.positions();
    let reach_sq = layout.omni_range() * layout.omni_range();
    let mut parent: Vec<usize> = (0..pts.len()).collect();
    let mut components = pts.len();
    for (u, a) in pts.iter().enumerate() {
        for (v, b) in pts.iter().enumerate().skip(u + 1) {
            if in_reach(a.distance_sq(*b), reach_sq) {
                let (ru, rv) = (root(&mut parent, u), root(&mut parent, v));
                if ru != rv {
                    parent[ru] = rv;
                    components -= 1;
                    if components == 1 {
                        return true;
                    }
                }
            }
        }
    }
    components <= 1
}

/// Largest pairwise euclidean distance between nodes.
pub fn euclidean_diameter(layout: &NodeLayout) -> Result<f64> {
    if layout.len() < 2 {
        return Err(invalid("diameter needs at least two nodes"));
    }
    let pts = layout.positions();
    let mut best = 0.0f64;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            best = best.max(a.distance_sq(*b));
        }
    }
    Ok(best.sqrt())
}

/// Directed graph over node ids with ascending, duplicate-free adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    out_edges: Vec<Vec<NodeId>>,
}

impl Topology {
    /// Graph with `node_count` nodes and no edges.
    pub fn empty(node_count: usize) -> Self {
        Self {
            out_edges: vec![Vec::new(); node_count],
        }
    }

    /// Builds a topology from per-node out-neighbour lists. Lists are sorted
    /// and deduplicated; self loops and out-of-range ids are rejected.
    pub fn from_adjacency(mut out_edges: Vec<Vec<NodeId>>) -> Result<Self> {
        let n = out_edges.len();
        for (u, list) in out_edges.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if let Some(&v) = list.iter().find(|&&v| v == u || v >= n) {
                return Err(invalid(format!("edge {u}->{v} is a self loop or out of range")));
            }
        }
        Ok(Self { out_edges })
    }

    pub fn from_directed_edges(node_count: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); node_count];
        for &(u, v) in edges {
            if u >= node_count {
                return Err(invalid(format!("edge source {u} out of range")));
            }
            adj[u].push(v);
        }
        Self::from_adjacency(adj)
    }

    /// Each pair is inserted in both directions.
    pub fn from_undirected_edges(node_count: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let both: Vec<_> = edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
        Self::from_directed_edges(node_count, &both)
    }

    pub fn node_count(&self) -> usize {
        self.out_edges.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_edges.iter().map(Vec::len).sum()
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.out_edges[u]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_edges[u].binary_search(&v).is_ok()
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_edges[u].len()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.node_count()).all(|u| self.out_edges[u].iter().all(|&v| self.has_edge(v, u)))
    }

    pub fn reversed(&self) -> Topology {
        let mut adj = vec![Vec::new(); self.node_count()];
        for (u, list) in self.out_edges.iter().enumerate() {
            for &v in list {
                adj[v].push(u);
            }
        }
        // pushes arrive in ascending u, so every list is already sorted
        Topology { out_edges: adj }
    }

    /// Hop distances from `source`; `None` marks unreachable nodes.
    pub fn bfs_distances(&self, source: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0) + 1;
            for &v in &self.out_edges[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_strongly_connected(&self) -> bool {
        if self.node_count() <= 1 {
            return true;
        }
        let all = |d: Vec<Option<u32>>| d.iter().all(Option::is_some);
        all(self.bfs_distances(0)) && (self.is_symmetric() || all(self.reversed().bfs_distances(0)))
    }
}

/// Edge `u -> v` iff the nodes are distinct and within `omni_range`.
pub fn build_omni_graph(layout: &NodeLayout) -> Topology {
    let pts = layout.positions();
    let reach_sq = layout.omni_range() * layout.omni_range();
    let mut adj = vec![Vec::new(); pts.len()];
    for (u, a) in pts.iter().enumerate() {
        for (v, b) in pts.iter().enumerate().skip(u + 1) {
            if in_reach(a.distance_sq(*b), reach_sq) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    Topology { out_edges: adj }
}
