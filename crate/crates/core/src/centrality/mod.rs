//! Node centrality: the distributed Wireless Flow Betweenness estimate, the
//! centralized flow-betweenness oracle it approximates, and rank correlation
//! between the two.

mod fbc;
mod rank;
mod wfb;

pub use fbc::flow_betweenness_oracle;
pub use rank::{fractional_ranks, rank_correlation, spearman_rho, RankVector};
pub use wfb::{
    additional_flows, forward_counts, naive_betweenness, naive_betweenness_all, replay, run_wfb, CentralityState,
    Observation, Piggyback, WfbVariant,
};

use std::fmt::Write as _;

use crate::error::{invalid, Result};

/// `node_id wfb fbc rank_wfb rank_fbc` table with 6-decimal fixed values.
pub fn centrality_table(wfb: &[f64], fbc: &[f64]) -> Result<String> {
    if wfb.len() != fbc.len() {
        return Err(invalid("wfb and fbc vectors differ in length"));
    }
    let rw = fractional_ranks(wfb)?;
    let rf = fractional_ranks(fbc)?;
    let mut out = String::from("node_id wfb fbc rank_wfb rank_fbc\n");
    for v in 0..wfb.len() {
        let _ = writeln!(
            out,
            "{v} {:.6} {:.6} {:.6} {:.6}",
            wfb[v],
            fbc[v],
            rw.ranks()[v],
            rf.ranks()[v]
        );
    }
    Ok(out)
}
