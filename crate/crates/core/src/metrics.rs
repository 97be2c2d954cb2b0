//! Graph-level evaluation: path length, clustering, unidirectional pairs and
//! logarithmic growth fits.
//!
//! Average path length is taken over ordered pairs that can reach each other;
//! the share of such pairs is reported next to it so connectivity loss after
//! rewiring shows up instead of inflating the mean.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::topology::Topology;

/// Column order of one results row.
pub const CSV_HEADER: &str = "seed,strategy,model,N,width,height,p,beta,apl,apl_ratio,cc,cc_ratio,unidir_frac,reach_frac,D";

/// Hop-distance summary from one all-pairs BFS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStats {
    /// Mean hops over reachable ordered pairs; `None` if no pair is reachable.
    pub apl: Option<f64>,
    pub reachable_fraction: f64,
    pub unidirectional_fraction: f64,
}

/// Reachability matrix rows (`dist[s][t]`) for every source, in node order.
fn all_pairs(topology: &Topology) -> Vec<Vec<Option<u32>>> {
    (0..topology.node_count())
        .into_par_iter()
        .map(|s| topology.bfs_distances(s))
        .collect()
}

pub fn path_stats(topology: &Topology) -> Result<PathStats> {
    let n = topology.node_count();
    if n < 2 {
        return Err(invalid("path statistics need at least two nodes"));
    }
    let dist = all_pairs(topology);
    let mut hops = 0u64;
    let mut reachable = 0u64;
    let mut one_way = 0u64;
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            if let Some(d) = dist[s][t] {
                hops += u64::from(d);
                reachable += 1;
            }
            if s < t && dist[s][t].is_some() != dist[t][s].is_some() {
                one_way += 1;
            }
        }
    }
    let ordered = (n * (n - 1)) as f64;
    Ok(PathStats {
        apl: (reachable > 0).then(|| hops as f64 / reachable as f64),
        reachable_fraction: reachable as f64 / ordered,
        unidirectional_fraction: one_way as f64 / (ordered / 2.0),
    })
}

/// Mean hop distance over reachable ordered pairs and the reachable share.
pub fn average_path_length(topology: &Topology) -> Result<(f64, f64)> {
    let stats = path_stats(topology)?;
    let apl = stats.apl.ok_or(Error::UndefinedPathLength)?;
    Ok((apl, stats.reachable_fraction))
}

/// Share of unordered pairs reachable in exactly one direction.
pub fn unidirectional_fraction(topology: &Topology) -> Result<f64> {
    Ok(path_stats(topology)?.unidirectional_fraction)
}

/// Mean local clustering over nodes with out-degree at least 2, using
/// out-neighbourhoods. Equals the undirected definition on symmetric graphs.
pub fn clustering_coefficient(topology: &Topology) -> f64 {
    let mut sum = 0.0;
    let mut qualifying = 0usize;
    for v in 0..topology.node_count() {
        let nbrs = topology.neighbors(v);
        let k = nbrs.len();
        if k < 2 {
            continue;
        }
        let links = nbrs
            .iter()
            .map(|&i| nbrs.iter().filter(|&&j| j != i && topology.has_edge(i, j)).count())
            .sum::<usize>();
        sum += links as f64 / (k * (k - 1)) as f64;
        qualifying += 1;
    }
    if qualifying == 0 {
        0.0
    } else {
        sum / qualifying as f64
    }
}

/// Least-squares fit of `apl = slope·ln(D) + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn log_growth_fit(samples: &[(f64, f64)]) -> Result<GrowthFit> {
    if samples.len() < 3 {
        return Err(invalid(format!("growth fit needs at least 3 samples, got {}", samples.len())));
    }
    if samples.iter().any(|&(d, _)| !(d > 0.0)) {
        return Err(invalid("growth fit needs positive diameters"));
    }
    let mut ds: Vec<f64> = samples.iter().map(|s| s.0).collect();
    ds.sort_by(f64::total_cmp);
    if ds.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("growth fit needs distinct diameters"));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(samples).map(|(x, s)| (x - mx) * (s.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = samples.iter().map(|s| (s.1 - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(samples)
        .map(|(x, s)| (s.1 - slope * x - intercept).powi(2))
        .sum();
    // a constant series is fitted exactly by slope 0
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(GrowthFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Baseline values of the omnidirectional graph that ratios refer to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    pub apl: f64,
    pub cc: f64,
}

impl Baseline {
    pub fn of(omni: &Topology) -> Result<Self> {
        Ok(Self {
            apl: average_path_length(omni)?.0,
            cc: clustering_coefficient(omni),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub apl: f64,
    pub apl_ratio: f64,
    pub cc: f64,
    pub cc_ratio: f64,
    pub unidirectional_fraction: f64,
    pub reachable_pair_fraction: f64,
    pub diameter_euclidean: f64,
    pub realized_p: f64,
}

impl MetricsReport {
    /// Evaluates a (possibly rewired) topology against its baseline.
    pub fn evaluate(topology: &Topology, baseline: Baseline, diameter_euclidean: f64, realized_p: f64) -> Result<Self> {
        let stats = path_stats(topology)?;
        let apl = stats.apl.ok_or(Error::UndefinedPathLength)?;
        let cc = clustering_coefficient(topology);
        let ratio = |x: f64, base: f64| if base > 0.0 { x / base } else { 0.0 };
        Ok(Self {
            apl,
            apl_ratio: ratio(apl, baseline.apl),
            cc,
            cc_ratio: ratio(cc, baseline.cc),
            unidirectional_fraction: stats.unidirectional_fraction,
            reachable_pair_fraction: stats.reachable_fraction,
            diameter_euclidean,
            realized_p,
        })
    }

    /// One results row in [`CSV_HEADER`] order. `beta` is left empty when the
    /// run used no similarity factor.
    pub fn csv_row(&self, ctx: &RowContext<'_>) -> String {
        let mut row = String::new();
        let beta = ctx.beta.map(|b| format!("{b:.6}")).unwrap_or_default();
        let _ = write!(
            row,
            "{},{},{},{},{:.6},{:.6},{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            ctx.seed,
            ctx.strategy,
            ctx.model,
            ctx.node_count,
            ctx.width,
            ctx.height,
            self.realized_p,
            beta,
            self.apl,
            self.apl_ratio,
            self.cc,
            self.cc_ratio,
            self.unidirectional_fraction,
            self.reachable_pair_fraction,
            self.diameter_euclidean
        );
        row
    }
}

/// Run identification written alongside a [`MetricsReport`].
#[derive(Debug, Clone, Copy)]
pub struct RowContext<'a> {
    pub seed: u64,
    pub strategy: &'a str,
    pub model: &'a str,
    pub node_count: usize,
    pub width: f64,
    pub height: f64,
    pub beta: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_omni_graph, place_nodes};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn complete(n: usize) -> Topology {
        let edges: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Topology::from_undirected_edges(n, &edges).unwrap()
    }

    #[test]
    fn apl_examples() {
        assert_eq!(average_path_length(&complete(5)).unwrap(), (1.0, 1.0));
        let chain = Topology::from_directed_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let (apl, reach) = average_path_length(&chain).unwrap();
        assert_abs_diff_eq!(apl, 4.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(reach, 0.5, epsilon = 1e-12);
        let cycle = Topology::from_undirected_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let (apl, reach) = average_path_length(&cycle).unwrap();
        assert_abs_diff_eq!(apl, 16.0 / 12.0, epsilon = 1e-12);
        assert_eq!(reach, 1.0);
        assert!(matches!(average_path_length(&Topology::empty(3)), Err(Error::UndefinedPathLength)));
        assert!(average_path_length(&Topology::empty(1)).is_err());
    }

    #[test]
    fn clustering_examples() {
        assert_abs_diff_eq!(clustering_coefficient(&complete(5)), 1.0, epsilon = 1e-12);
        let star = Topology::from_undirected_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(clustering_coefficient(&star), 0.0);
        // triangle 0-1-2 with pendant 3 on 2: local cc 1, 1, 1/3; node 3 skipped
        let tp = Topology::from_undirected_edges(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        assert_abs_diff_eq!(clustering_coefficient(&tp), (1.0 + 1.0 + 1.0 / 3.0) / 3.0, epsilon = 1e-12);
        assert_eq!(clustering_coefficient(&Topology::empty(4)), 0.0);
    }

    #[test]
    fn unidirectional_examples() {
        assert_eq!(unidirectional_fraction(&complete(4)).unwrap(), 0.0);
        let single = Topology::from_directed_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(unidirectional_fraction(&single).unwrap(), 1.0);
        let chain = Topology::from_directed_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(unidirectional_fraction(&chain).unwrap(), 1.0);
    }

    #[test]
    fn growth_fit_examples() {
        let line: Vec<_> = [2.0, 5.0, 9.0, 14.0].iter().map(|&d: &f64| (d, 2.0 * d.ln() + 1.0)).collect();
        let fit = log_growth_fit(&line).unwrap();
        assert_abs_diff_eq!(fit.slope, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        let flat = log_growth_fit(&[(1.0, 3.0), (2.0, 3.0), (3.0, 3.0)]).unwrap();
        assert_abs_diff_eq!(flat.slope, 0.0, epsilon = 1e-12);
        assert!(log_growth_fit(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(log_growth_fit(&[(1.0, 1.0), (1.0, 2.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn csv_row_layout() {
        let r = MetricsReport {
            apl: 5.5,
            apl_ratio: 0.75,
            cc: 0.5,
            cc_ratio: 0.8,
            unidirectional_fraction: 0.1,
            reachable_pair_fraction: 0.9,
            diameter_euclidean: 14.1,
            realized_p: 0.2,
        };
        let ctx = RowContext {
            seed: 7,
            strategy: "randomized",
            model: "sector",
            node_count: 300,
            width: 10.0,
            height: 10.0,
            beta: None,
        };
        let row = r.csv_row(&ctx);
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.starts_with("7,randomized,sector,300,10.000000,10.000000,0.200000,,5.500000,"));
    }

    proptest! {
        #[test]
        fn symmetric_graphs_have_no_one_way_pairs(n in 2usize..60, seed in any::<u64>()) {
            let g = build_omni_graph(&place_nodes(n, 3.0, 3.0, 1.0, seed).unwrap());
            let stats = path_stats(&g).unwrap();
            prop_assert_eq!(stats.unidirectional_fraction, 0.0);
            for s in 0..n {
                let ds = g.bfs_distances(s);
                for t in 0..n {
                    prop_assert_eq!(ds[t], g.bfs_distances(t)[s]);
                }
            }
        }

        #[test]
        fn metrics_invariant_under_relabelling(n in 3usize..40, seed in any::<u64>(), rot in 1usize..40) {
            let g = build_omni_graph(&place_nodes(n, 3.0, 3.0, 1.0, seed).unwrap());
            let relabel = |v: usize| (v + rot) % n;
            let adj: Vec<Vec<usize>> = (0..n)
                .map(|v| {
                    let orig = (v + n - rot % n) % n;
                    g.neighbors(orig).iter().map(|&u| relabel(u)).collect()
                })
                .collect();
            let h = Topology::from_adjacency(adj).unwrap();
            let a = path_stats(&g).unwrap();
            let b = path_stats(&h).unwrap();
            prop_assert_eq!(a.reachable_fraction, b.reachable_fraction);
            match (a.apl, b.apl) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                (x, y) => prop_assert_eq!(x, y),
            }
            prop_assert!((clustering_coefficient(&g) - clustering_coefficient(&h)).abs() < 1e-12);
        }
    }
}
