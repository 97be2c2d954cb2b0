use std::fmt::Write as _;

use log::{debug, warn};
use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind, SweepVar};
use crate::antenna::{optimize_beamwidth, BeamwidthChoice};
use crate::centrality::{flow_betweenness_oracle, rank_correlation, run_wfb};
use crate::error::{invalid, Result};
use crate::metrics::{log_growth_fit, Baseline, GrowthFit, MetricsReport, RowContext, CSV_HEADER};
use crate::rewire::{
    apply_beams, assign_directions, select_distributed, select_random, select_top_wfb, AntennaModel, BeamPlan,
    BeamShape, Strategy,
};
use crate::topology::{build_omni_graph, euclidean_diameter, place_connected_nodes, NodeLayout};
use crate::traffic::{generate_flows, record_hop_directions, simulate_flows};

/// Parameters of a single simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub node_count: usize,
    pub width: f64,
    pub height: f64,
    pub omni_range: f64,
    pub model: AntennaModel,
    /// `None` leaves every node omnidirectional.
    pub strategy: Option<Strategy>,
    /// Beamforming fraction for the randomized and top-k strategies.
    pub p: f64,
    pub beta: f64,
    pub traffic_fraction: f64,
    pub seed: u64,
    pub max_multiple: u32,
    pub max_layout_attempts: u32,
    /// Also run the flow-betweenness oracle and correlate it with WFB.
    pub with_oracle: bool,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            node_count: 300,
            width: 10.0,
            height: 10.0,
            omni_range: 1.0,
            model: AntennaModel::Sector,
            strategy: Some(Strategy::Randomized),
            p: 0.1,
            beta: 2.0,
            traffic_fraction: 1.0,
            seed: 1,
            max_multiple: crate::antenna::DEFAULT_MAX_MULTIPLE,
            max_layout_attempts: 100_000,
            with_oracle: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub layout: NodeLayout,
    /// Layouts rejected for being disconnected before this one.
    pub layout_retries: u32,
    pub beamwidth: BeamwidthChoice,
    pub plan: BeamPlan,
    pub wfb: Option<Vec<f64>>,
    pub fbc: Option<Vec<f64>>,
    pub rho: Option<f64>,
    pub report: MetricsReport,
}

/// Expected omnidirectional neighbourhood size at the layout's density.
pub fn expected_neighborhood(node_count: usize, width: f64, height: f64, omni_range: f64) -> u32 {
    let density = node_count as f64 / (width * height);
    (density * std::f64::consts::PI * omni_range * omni_range).round() as u32
}

/// One full pipeline: layout, optional traffic and WFB, selection, beams,
/// metrics.
pub fn run_once(params: &RunParams) -> Result<RunOutcome> {
    let (layout, layout_retries) = place_connected_nodes(
        params.node_count,
        params.width,
        params.height,
        params.omni_range,
        params.seed,
        params.max_layout_attempts,
    )?;
    if layout_retries > 0 {
        debug!("seed {}: {} disconnected layouts rejected", params.seed, layout_retries);
    }
    run_on_layout(&layout, layout_retries, params)
}

/// [`run_once`] on a given layout.
pub fn run_on_layout(layout: &NodeLayout, layout_retries: u32, params: &RunParams) -> Result<RunOutcome> {
    let n = layout.len();
    let r = layout.omni_range();
    let omni = build_omni_graph(layout);
    let baseline = Baseline::of(&omni)?;
    let diameter = euclidean_diameter(layout)?;
    let beamwidth = optimize_beamwidth(
        expected_neighborhood(n, layout.region_width(), layout.region_height(), r),
        params.max_multiple,
        r,
    )?;
    let shape = BeamShape::from_choice(params.model, &beamwidth, r);

    let needs_traffic = params.with_oracle
        || matches!(params.strategy, Some(Strategy::CentralizedTopK | Strategy::DistributedBeta));
    let mut wfb = None;
    let mut hop_records = None;
    if needs_traffic {
        let flows = generate_flows(n, params.traffic_fraction, params.seed)?;
        let log = simulate_flows(&omni, &flows);
        wfb = Some(run_wfb(&omni, &log)?);
        hop_records = Some(record_hop_directions(&log, layout));
    }

    let (fbc, rho) = if params.with_oracle {
        let fbc = flow_betweenness_oracle(&omni);
        let rho = rank_correlation(wfb.as_deref().expect("traffic ran"), &fbc)?;
        (Some(fbc), Some(rho))
    } else {
        (None, None)
    };

    let strategy = params.strategy.unwrap_or(Strategy::Randomized);
    let selected = match params.strategy {
        None => Vec::new(),
        Some(Strategy::Randomized) => select_random(n, params.p, params.seed)?,
        Some(Strategy::CentralizedTopK) => select_top_wfb(wfb.as_deref().expect("traffic ran"), params.p)?,
        Some(Strategy::DistributedBeta) => select_distributed(wfb.as_deref().expect("traffic ran"), &omni, params.beta)?,
    };
    let records = match strategy {
        Strategy::Randomized => None,
        _ => hop_records.as_deref(),
    };
    let boresights = assign_directions(&selected, records, params.seed);
    let plan = BeamPlan::with_beams(n, strategy, shape, &boresights, r)?;
    let rewired = apply_beams(layout, &plan)?;
    let report = MetricsReport::evaluate(&rewired, baseline, diameter, plan.realized_p())?;

    Ok(RunOutcome {
        layout: layout.clone(),
        layout_retries,
        beamwidth,
        plan,
        wfb,
        fbc,
        rho,
        report,
    })
}

/// One results row: a finished run or the diagnostic of a failed one.
#[derive(Debug, Clone)]
pub struct RunRow {
    pub repetition: u32,
    pub sweep_value: f64,
    pub seed: u64,
    pub params: RunParams,
    pub outcome: std::result::Result<RunRecord, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub report: MetricsReport,
    pub rho: Option<f64>,
    pub layout_retries: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub metric: &'static str,
    pub mean: f64,
    pub stddev: f64,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub rows: Vec<RunRow>,
    pub summaries: Vec<SummaryRow>,
    /// Fit of mean path length against `ln D` for size sweeps.
    pub growth_fit: Option<GrowthFit>,
}

const SUMMARY_HEADER: &str = "sweep_value,metric,mean,stddev,count";

impl ExperimentOutput {
    fn has_correlation(&self) -> bool {
        self.config.experiment == ExperimentKind::D
    }

    pub fn header(&self) -> String {
        if self.has_correlation() {
            format!("{CSV_HEADER},f,rho")
        } else {
            CSV_HEADER.to_string()
        }
    }

    /// Results table; failed runs appear as `#` diagnostic lines.
    pub fn results_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for row in &self.rows {
            match &row.outcome {
                Ok(rec) => {
                    let p = &row.params;
                    let ctx = RowContext {
                        seed: row.seed,
                        strategy: p.strategy.map_or("none", Strategy::as_str),
                        model: if p.strategy.is_some() { p.model.as_str() } else { "omni" },
                        node_count: p.node_count,
                        width: p.width,
                        height: p.height,
                        beta: (p.strategy == Some(Strategy::DistributedBeta)).then_some(p.beta),
                    };
                    out.push_str(&rec.report.csv_row(&ctx));
                    if self.has_correlation() {
                        let _ = write!(out, ",{:.6},{:.6}", p.traffic_fraction, rec.rho.unwrap_or(f64::NAN));
                    }
                }
                Err(msg) => {
                    let _ = write!(
                        out,
                        "# error repetition={} seed={} {}={}: {}",
                        row.repetition, row.seed, self.config.sweep, row.sweep_value, msg
                    );
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(SUMMARY_HEADER);
        out.push('\n');
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{:.6},{},{:.6},{:.6},{}",
                s.sweep_value, s.metric, s.mean, s.stddev, s.count
            );
        }
        out
    }

    /// Summary row for one metric at one sweep value.
    pub fn summary(&self, sweep_value: f64, metric: &str) -> Option<&SummaryRow> {
        self.summaries
            .iter()
            .find(|s| s.sweep_value == sweep_value && s.metric == metric)
    }
}

/// Parameters of the run at one sweep value.
pub fn params_for(config: &ExperimentConfig, sweep_value: f64, seed: u64) -> RunParams {
    let mut p = RunParams {
        node_count: config.node_count,
        width: config.width,
        height: config.height,
        omni_range: config.omni_range,
        model: config.model,
        strategy: config.strategy,
        p: config.p,
        beta: config.beta,
        traffic_fraction: config.traffic_fraction,
        seed,
        max_multiple: config.max_multiple,
        max_layout_attempts: config.max_layout_attempts,
        with_oracle: config.experiment == ExperimentKind::D,
    };
    match config.sweep {
        SweepVar::P => p.p = sweep_value,
        SweepVar::F => p.traffic_fraction = sweep_value,
        SweepVar::Beta => p.beta = sweep_value,
        SweepVar::Size => {
            p.width = sweep_value;
            p.height = sweep_value;
            if let Some(d) = config.density {
                p.node_count = (d * sweep_value * sweep_value).round() as usize;
            }
        }
    }
    if config.sweep != SweepVar::Size {
        if let Some(d) = config.density {
            let side = (p.node_count as f64 / d).sqrt();
            p.width = side;
            p.height = side;
        }
    }
    p
}

fn execute(params: &RunParams, fbc_max_nodes: usize) -> std::result::Result<RunRecord, String> {
    if params.with_oracle && params.node_count > fbc_max_nodes {
        return Err(invalid(format!(
            "flow-betweenness oracle capped at {fbc_max_nodes} nodes, run has {}",
            params.node_count
        ))
        .to_string());
    }
    run_once(params)
        .map(|o| RunRecord {
            report: o.report,
            rho: o.rho,
            layout_retries: o.layout_retries,
        })
        .map_err(|e| e.to_string())
}

/// Runs every (repetition, sweep value) pair with seed `base + repetition`
/// and summarizes each sweep value. Rows keep that order whatever the thread
/// count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let jobs: Vec<(u32, f64)> = (0..config.repetitions)
        .flat_map(|rep| config.values.iter().map(move |&v| (rep, v)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.resolved_threads())
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    let rows: Vec<RunRow> = pool.install(|| {
        jobs.par_iter()
            .map(|&(rep, value)| {
                let seed = config.seed.wrapping_add(u64::from(rep));
                let params = params_for(config, value, seed);
                let outcome = execute(&params, config.fbc_max_nodes);
                if let Err(msg) = &outcome {
                    warn!("repetition {rep} ({}={value}) failed: {msg}", config.sweep);
                }
                RunRow {
                    repetition: rep,
                    sweep_value: value,
                    seed,
                    params,
                    outcome,
                }
            })
            .collect()
    });

    let mut summaries = Vec::new();
    let mut means = Vec::new();
    for &value in &config.values {
        let records: Vec<&RunRecord> = rows
            .iter()
            .filter(|r| r.sweep_value == value)
            .filter_map(|r| r.outcome.as_ref().ok())
            .collect();
        let mut metric = |name: &'static str, get: &dyn Fn(&RunRecord) -> Option<f64>| {
            let xs: Vec<f64> = records.iter().filter_map(|r| get(r)).collect();
            if let Some((mean, stddev)) = mean_stddev(&xs) {
                summaries.push(SummaryRow {
                    sweep_value: value,
                    metric: name,
                    mean,
                    stddev,
                    count: xs.len(),
                });
                Some(mean)
            } else {
                None
            }
        };
        let apl = metric("apl", &|r| Some(r.report.apl));
        metric("apl_ratio", &|r| Some(r.report.apl_ratio));
        metric("cc", &|r| Some(r.report.cc));
        metric("cc_ratio", &|r| Some(r.report.cc_ratio));
        metric("unidir_frac", &|r| Some(r.report.unidirectional_fraction));
        metric("reach_frac", &|r| Some(r.report.reachable_pair_fraction));
        let diameter = metric("D", &|r| Some(r.report.diameter_euclidean));
        metric("p", &|r| Some(r.report.realized_p));
        if config.experiment == ExperimentKind::D {
            metric("rho", &|r| r.rho);
        }
        if let (Some(d), Some(a)) = (diameter, apl) {
            means.push((d, a));
        }
    }
    let growth_fit = if config.sweep == SweepVar::Size && means.len() >= 3 {
        log_growth_fit(&means).ok()
    } else {
        None
    };

    Ok(ExperimentOutput {
        config: config.clone(),
        rows,
        summaries,
        growth_fit,
    })
}

/// Mean and sample standard deviation (0 for a single sample).
pub fn mean_stddev(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, sd))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parameter_mapping() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::C);
        cfg.density = Some(3.0);
        let p = params_for(&cfg, 10.0, 4);
        assert_eq!((p.node_count, p.width, p.height, p.seed), (300, 10.0, 10.0, 4));
        let cfg = ExperimentConfig::new(ExperimentKind::D);
        let p = params_for(&cfg, 0.3, 1);
        assert!((p.width * p.height - 100.0 / 3.0).abs() < 1e-9);
        assert_eq!(p.traffic_fraction, 0.3);
        assert!(p.with_oracle && p.strategy.is_none());
        let p = params_for(&ExperimentConfig::new(ExperimentKind::F), 4.0, 1);
        assert_eq!(p.beta, 4.0);
    }

    #[test]
    fn neighbourhood_from_density() {
        assert_eq!(expected_neighborhood(300, 10.0, 10.0, 1.0), 9);
        assert_eq!(expected_neighborhood(300, 8.0, 8.0, 1.0), 15);
    }

    #[test]
    fn stats_helpers() {
        assert_eq!(mean_stddev(&[]), None);
        assert_eq!(mean_stddev(&[2.0]), Some((2.0, 0.0)));
        let (m, s) = mean_stddev(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_p_changes_nothing() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::A);
        cfg.node_count = 80;
        cfg.width = 5.0;
        cfg.height = 5.0;
        cfg.values = vec![0.0];
        cfg.repetitions = 3;
        let out = run_experiment(&cfg).unwrap();
        for row in &out.rows {
            let rec = row.outcome.as_ref().unwrap();
            assert_eq!(rec.report.apl_ratio, 1.0);
            assert_eq!(rec.report.unidirectional_fraction, 0.0);
        }
    }

    #[test]
    fn failing_runs_become_diagnostics() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::A);
        cfg.node_count = 40;
        cfg.width = 50.0;
        cfg.height = 50.0;
        cfg.values = vec![0.1];
        cfg.repetitions = 2;
        cfg.max_layout_attempts = 2;
        let out = run_experiment(&cfg).unwrap();
        assert!(out.rows.iter().all(|r| r.outcome.is_err()));
        let csv = out.results_csv();
        assert_eq!(csv.lines().filter(|l| l.starts_with("# error")).count(), 2);
        assert!(out.summaries.is_empty());
    }

    #[test]
    fn oracle_capped_by_node_count() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::D);
        cfg.node_count = 30;
        cfg.fbc_max_nodes = 20;
        cfg.values = vec![0.5];
        cfg.repetitions = 1;
        let out = run_experiment(&cfg).unwrap();
        assert!(out.rows[0].outcome.as_ref().unwrap_err().contains("capped"));
    }
}
