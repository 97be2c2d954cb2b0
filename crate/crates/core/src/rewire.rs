//! Beamforming-node selection and beam application.
//!
//! A beamforming node transmits only through its beam and keeps
//! omnidirectional reception, so its out-edges are replaced by whatever the
//! beam covers while its in-edges depend only on other nodes' beams.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::antenna::{self, SectorBeam, UlaBeam};
use crate::error::{invalid, Result};
use crate::rng::{self, Purpose};
use crate::topology::{in_reach, NodeLayout, Topology};
use crate::traffic::HopDirection;
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Uniformly chosen nodes with uniformly random boresights.
    Randomized,
    /// Globally highest WFB values.
    CentralizedTopK,
    /// Nodes whose WFB exceeds their neighbourhood mean by the similarity
    /// factor.
    DistributedBeta,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Randomized => "randomized",
            Strategy::CentralizedTopK => "centralized_topk",
            Strategy::DistributedBeta => "distributed_beta",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "randomized" | "random" => Ok(Strategy::Randomized),
            "centralized_topk" | "topk" | "centralized" => Ok(Strategy::CentralizedTopK),
            "distributed_beta" | "distributed" => Ok(Strategy::DistributedBeta),
            other => Err(invalid(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AntennaModel {
    Sector,
    Ula,
}

impl AntennaModel {
    pub fn as_str(self) -> &'static str {
        match self {
            AntennaModel::Sector => "sector",
            AntennaModel::Ula => "ula",
        }
    }
}

impl fmt::Display for AntennaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AntennaModel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sector" => Ok(AntennaModel::Sector),
            "ula" => Ok(AntennaModel::Ula),
            other => Err(invalid(format!("unknown antenna model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamAssignment {
    Omni,
    Sector(SectorBeam),
    Ula(UlaBeam),
}

impl BeamAssignment {
    pub fn is_directional(&self) -> bool {
        !matches!(self, BeamAssignment::Omni)
    }
}

/// Beam shape shared by every directional node of a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamShape {
    Sector { width: f64 },
    Ula { elements: u32 },
}

impl BeamShape {
    /// Shape for `model` derived from an optimized beamwidth.
    pub fn from_choice(model: AntennaModel, choice: &antenna::BeamwidthChoice, omni_range: f64) -> Self {
        match model {
            AntennaModel::Sector => BeamShape::Sector {
                width: choice.theta_star,
            },
            AntennaModel::Ula => BeamShape::Ula {
                elements: antenna::elements_for_beamwidth(choice, omni_range),
            },
        }
    }

    pub fn model(&self) -> AntennaModel {
        match self {
            BeamShape::Sector { .. } => AntennaModel::Sector,
            BeamShape::Ula { .. } => AntennaModel::Ula,
        }
    }
}

/// Antenna assignment for every node of a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamPlan {
    assignments: Vec<BeamAssignment>,
    strategy: Strategy,
}

impl BeamPlan {
    pub fn omnidirectional(node_count: usize, strategy: Strategy) -> Self {
        Self {
            assignments: vec![BeamAssignment::Omni; node_count],
            strategy,
        }
    }

    /// Every node in `boresights` gets a beam of `shape` pointed at its angle.
    pub fn with_beams(
        node_count: usize,
        strategy: Strategy,
        shape: BeamShape,
        boresights: &BTreeMap<NodeId, f64>,
        omni_range: f64,
    ) -> Result<Self> {
        let mut plan = Self::omnidirectional(node_count, strategy);
        for (&v, &angle) in boresights {
            let slot = plan
                .assignments
                .get_mut(v)
                .ok_or_else(|| invalid(format!("node {v} outside plan of {node_count} nodes")))?;
            *slot = match shape {
                BeamShape::Sector { width } => BeamAssignment::Sector(SectorBeam::new(angle, width, omni_range)?),
                BeamShape::Ula { elements } => BeamAssignment::Ula(UlaBeam::new(angle, elements, omni_range)?),
            };
        }
        Ok(plan)
    }

    pub fn assignments(&self) -> &[BeamAssignment] {
        &self.assignments
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn directional_count(&self) -> usize {
        self.assignments.iter().filter(|a| a.is_directional()).count()
    }

    /// Fraction of nodes that beamform.
    pub fn realized_p(&self) -> f64 {
        self.directional_count() as f64 / self.assignments.len() as f64
    }

    /// `node_id mode boresight param`; `param` is the width for sectors and
    /// the element count for ULAs.
    pub fn to_text(&self) -> String {
        let mut out = String::from("node_id mode boresight param\n");
        for (v, a) in self.assignments.iter().enumerate() {
            let _ = match a {
                BeamAssignment::Omni => writeln!(out, "{v} omni - -"),
                BeamAssignment::Sector(b) => writeln!(out, "{v} sector {:.6} {:.6}", b.boresight, b.width),
                BeamAssignment::Ula(b) => writeln!(out, "{v} ula {:.6} {}", b.boresight, b.elements),
            };
        }
        out
    }
}

fn check_fraction(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in [0, 1], got {x}")))
    }
}

/// `round(p·N)` distinct nodes drawn uniformly, returned in ascending order.
pub fn select_random(node_count: usize, p: f64, seed: u64) -> Result<Vec<NodeId>> {
    check_fraction("p", p)?;
    let count = (p * node_count as f64).round() as usize;
    let mut rng = rng::stream(seed, Purpose::Selection);
    let mut picked = index::sample(&mut rng, node_count, count).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// The `round(fraction·N)` largest values; smaller id wins ties at the cut.
pub fn select_top_wfb(wfb: &[f64], fraction: f64) -> Result<Vec<NodeId>> {
    if wfb.is_empty() {
        return Err(invalid("no centrality values to select from"));
    }
    check_fraction("fraction", fraction)?;
    let count = (fraction * wfb.len() as f64).round() as usize;
    let mut order: Vec<NodeId> = (0..wfb.len()).collect();
    order.sort_by(|&a, &b| wfb[b].total_cmp(&wfb[a]).then(a.cmp(&b)));
    order.truncate(count);
    order.sort_unstable();
    Ok(order)
}

/// Nodes whose value exceeds `beta` times the mean over their neighbours.
/// Nodes with no neighbours or an all-zero neighbourhood do not beamform.
/// All nodes decide on the same snapshot.
pub fn select_distributed(wfb: &[f64], topology: &Topology, beta: f64) -> Result<Vec<NodeId>> {
    if wfb.len() != topology.node_count() {
        return Err(invalid("wfb vector and topology differ in node count"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("similarity factor must be positive, got {beta}")));
    }
    Ok((0..wfb.len())
        .filter(|&v| {
            let nbrs = topology.neighbors(v);
            if nbrs.is_empty() {
                return false;
            }
            let mean = nbrs.iter().map(|&u| wfb[u]).sum::<f64>() / nbrs.len() as f64;
            mean > 0.0 && wfb[v] / mean > beta
        })
        .collect())
}

/// Boresight for each selected node: its recorded hop direction when one
/// exists, else a seeded uniform angle. `hop_records = None` draws every
/// boresight at random, as the randomized strategy does.
pub fn assign_directions(
    selected: &[NodeId],
    hop_records: Option<&[Option<HopDirection>]>,
    seed: u64,
) -> BTreeMap<NodeId, f64> {
    let mut rng = rng::stream(seed, Purpose::Boresight);
    let mut sorted = selected.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted
        .into_iter()
        .map(|v| {
            let recorded = hop_records.and_then(|r| r.get(v).copied().flatten());
            let angle = match recorded {
                Some(d) => d.angle,
                None => rng.gen::<f64>() * TAU,
            };
            (v, angle)
        })
        .collect()
}

/// Directed topology under a plan: `u -> v` iff `v` lies in `u`'s coverage.
pub fn apply_beams(layout: &NodeLayout, plan: &BeamPlan) -> Result<Topology> {
    if plan.assignments.len() != layout.len() {
        return Err(invalid(format!(
            "plan covers {} nodes but layout has {}",
            plan.assignments.len(),
            layout.len()
        )));
    }
    let pts = layout.positions();
    let r = layout.omni_range();
    let mut adj = vec![Vec::new(); pts.len()];
    for (u, assignment) in plan.assignments.iter().enumerate() {
        let origin = pts[u];
        for (v, &target) in pts.iter().enumerate() {
            if v == u {
                continue;
            }
            let d2 = origin.distance_sq(target);
            let covered = if d2 == 0.0 {
                true
            } else {
                match assignment {
                    BeamAssignment::Omni => in_reach(d2, r * r),
                    BeamAssignment::Sector(b) => antenna::sector_covers(origin, b, target)?,
                    BeamAssignment::Ula(b) => antenna::ula_covers(origin, b, target, r)?,
                }
            };
            if covered {
                adj[u].push(v);
            }
        }
    }
    Topology::from_adjacency(adj)
}
