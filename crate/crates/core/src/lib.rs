//! Self-organization of wireless ad hoc networks into small worlds through
//! directional beamforming.
//!
//! The crate is organized along the pipeline a simulation run follows:
//!
//! - [`topology`]: seeded node placement and the omnidirectional baseline graph.
//! - [`antenna`]: sector and uniform-linear-array beam models and the
//!   beamwidth optimizer.
//! - [`traffic`]: flow generation, shortest-path routing and the
//!   transmission/overhearing log.
//! - [`centrality`]: Wireless Flow Betweenness estimated from overheard
//!   traffic, the centralized flow-betweenness oracle and rank correlation.
//! - [`rewire`]: beamforming-node selection strategies and the directed
//!   topology that results from applying beams.
//! - [`metrics`]: path length, clustering, unidirectional pairs and
//!   logarithmic growth fits.
//! - [`harness`]: configuration-driven experiments emitting CSV.

// `!(x > 0.0)` deliberately rejects NaN; pairwise loops index both `[s][t]` and `[t][s]`.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod antenna;
pub mod centrality;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod rewire;
mod rng;
pub mod topology;
pub mod traffic;

pub use antenna::{BeamwidthChoice, SectorBeam, UlaBeam};
pub use centrality::{CentralityState, RankVector};
pub use error::{Error, Result};
pub use metrics::MetricsReport;
pub use rewire::{BeamAssignment, BeamPlan, Strategy};
pub use topology::{NodeLayout, Point, Topology};
pub use traffic::{FlowSpec, TransmissionEvent, TransmissionLog};

/// Node identifier: the index of the node in its layout.
pub type NodeId = usize;
