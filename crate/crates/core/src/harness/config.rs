use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::antenna::DEFAULT_MAX_MULTIPLE;
use crate::error::{invalid, Error, Result};
use crate::rewire::{AntennaModel, Strategy};

/// Environment variable that sets the worker thread count.
pub const THREADS_ENV: &str = "SMALLWORLD_THREADS";

/// The experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    /// Randomized beamforming, path length and clustering against `p`.
    A,
    /// Randomized beamforming, unidirectional pairs against `p`.
    B,
    /// Path-length growth with region size, every node beamforming.
    C,
    /// WFB against flow betweenness for varying traffic load.
    D,
    /// Centralized choice of the top-WFB nodes.
    E,
    /// Realized beamforming fraction against the similarity factor.
    F,
    /// Distributed selection performance.
    G,
}

impl ExperimentKind {
    pub fn strategy(self) -> Option<Strategy> {
        match self {
            ExperimentKind::A | ExperimentKind::B | ExperimentKind::C => Some(Strategy::Randomized),
            ExperimentKind::D => None,
            ExperimentKind::E => Some(Strategy::CentralizedTopK),
            ExperimentKind::F | ExperimentKind::G => Some(Strategy::DistributedBeta),
        }
    }

    fn default_sweep(self) -> (SweepVar, Vec<f64>) {
        match self {
            ExperimentKind::A | ExperimentKind::B => (SweepVar::P, vec![0.0, 0.05, 0.1, 0.2, 0.3, 0.5]),
            ExperimentKind::C => (SweepVar::Size, vec![8.0, 10.0, 12.0, 14.0]),
            ExperimentKind::D => (SweepVar::F, vec![0.1, 0.3, 0.5, 0.7, 1.0]),
            ExperimentKind::E => (SweepVar::P, vec![0.1]),
            ExperimentKind::F => (SweepVar::Beta, vec![1.0, 2.0, 4.0]),
            ExperimentKind::G => (SweepVar::Beta, vec![2.0]),
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "A" => ExperimentKind::A,
            "B" => ExperimentKind::B,
            "C" => ExperimentKind::C,
            "D" => ExperimentKind::D,
            "E" => ExperimentKind::E,
            "F" => ExperimentKind::F,
            "G" => ExperimentKind::G,
            other => return Err(invalid(format!("unknown experiment `{other}` (expected A-G)"))),
        })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVar {
    /// Beamforming fraction.
    P,
    /// Traffic fraction.
    F,
    /// Similarity factor.
    Beta,
    /// Side of a square region.
    Size,
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(SweepVar::P),
            "f" | "traffic_fraction" => Ok(SweepVar::F),
            "beta" => Ok(SweepVar::Beta),
            "size" | "region" => Ok(SweepVar::Size),
            other => Err(invalid(format!("unknown sweep variable `{other}`"))),
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVar::P => "p",
            SweepVar::F => "f",
            SweepVar::Beta => "beta",
            SweepVar::Size => "size",
        })
    }
}

/// Everything one experiment run needs. Parsed from a flat `key = value`
/// file with `#` comments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub node_count: usize,
    pub width: f64,
    pub height: f64,
    /// When set, fixes nodes per unit area: the region is a square sized to
    /// match it, or under a size sweep the node count follows the side.
    pub density: Option<f64>,
    pub omni_range: f64,
    pub model: AntennaModel,
    pub strategy: Option<Strategy>,
    pub sweep: SweepVar,
    pub values: Vec<f64>,
    pub p: f64,
    pub beta: f64,
    pub traffic_fraction: f64,
    pub repetitions: u32,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub max_multiple: u32,
    pub max_layout_attempts: u32,
    /// Largest network the flow-betweenness oracle is run on.
    pub fbc_max_nodes: usize,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Defaults for an experiment family.
    pub fn new(experiment: ExperimentKind) -> Self {
        let (sweep, values) = experiment.default_sweep();
        let mut cfg = Self {
            experiment,
            node_count: 300,
            width: 10.0,
            height: 10.0,
            density: None,
            omni_range: 1.0,
            model: AntennaModel::Sector,
            strategy: experiment.strategy(),
            sweep,
            values,
            p: 0.1,
            beta: 2.0,
            traffic_fraction: 1.0,
            repetitions: 10,
            seed: 1,
            output: None,
            max_multiple: DEFAULT_MAX_MULTIPLE,
            max_layout_attempts: 100_000,
            fbc_max_nodes: 100,
            threads: None,
        };
        match experiment {
            ExperimentKind::C => {
                cfg.p = 1.0;
                // at 300 nodes on 14x14 about one layout in 2e5 is connected
                cfg.max_layout_attempts = 2_000_000;
            }
            ExperimentKind::D => {
                cfg.node_count = 100;
                cfg.density = Some(3.0);
            }
            _ => {}
        }
        cfg
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Parses a config. `experiment` must appear before any other key since
    /// it selects the defaults the remaining keys override.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: Option<Self> = None;
        let mut sweep_set = false;
        let mut values_set = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let perr = |e: Error| Error::Parse {
                line: line_no,
                message: e.to_string(),
            };
            if key == "experiment" {
                if cfg.is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "experiment given twice".into(),
                    });
                }
                cfg = Some(Self::new(value.parse().map_err(perr)?));
                continue;
            }
            let c = cfg.as_mut().ok_or_else(|| Error::Parse {
                line: line_no,
                message: "`experiment = <A-G>` must come first".into(),
            })?;
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>().map_err(|_| invalid(format!("`{v}` is not a number for `{key}`")))
            };
            let int = |v: &str| -> Result<u64> {
                v.parse::<u64>().map_err(|_| invalid(format!("`{v}` is not an integer for `{key}`")))
            };
            let result: Result<()> = (|| {
                match key {
                    "nodes" | "node_count" | "n" => c.node_count = int(value)? as usize,
                    "width" => c.width = num(value)?,
                    "height" => c.height = num(value)?,
                    "density" => c.density = Some(num(value)?),
                    "omni_range" | "range" => c.omni_range = num(value)?,
                    "model" => c.model = value.parse()?,
                    "strategy" => c.strategy = Some(value.parse()?),
                    "sweep" => {
                        c.sweep = value.parse()?;
                        sweep_set = true;
                    }
                    "values" => {
                        c.values = value
                            .split(|ch: char| ch == ',' || ch.is_whitespace())
                            .filter(|s| !s.is_empty())
                            .map(num)
                            .collect::<Result<_>>()?;
                        values_set = true;
                    }
                    "p" => c.p = num(value)?,
                    "beta" => c.beta = num(value)?,
                    "f" | "traffic_fraction" => c.traffic_fraction = num(value)?,
                    "repetitions" => c.repetitions = int(value)? as u32,
                    "seed" => c.seed = int(value)?,
                    "output" | "out" => c.output = Some(PathBuf::from(value)),
                    "max_multiple" => c.max_multiple = int(value)? as u32,
                    "max_layout_attempts" => c.max_layout_attempts = int(value)? as u32,
                    "fbc_max_nodes" => c.fbc_max_nodes = int(value)? as usize,
                    "threads" => c.threads = Some(int(value)? as usize),
                    other => return Err(invalid(format!("unknown key `{other}`"))),
                }
                Ok(())
            })();
            result.map_err(perr)?;
        }
        let cfg = cfg.ok_or_else(|| invalid("config does not name an experiment"))?;
        if sweep_set && !values_set {
            return Err(invalid("`sweep` changed without `values`"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(invalid("sweep values must not be empty"));
        }
        if self.repetitions == 0 {
            return Err(invalid("repetitions must be at least 1"));
        }
        if self.node_count < 2 && !(self.sweep == SweepVar::Size && self.density.is_some()) {
            return Err(invalid("experiments need at least two nodes"));
        }
        if !(self.omni_range > 0.0) {
            return Err(invalid("omni_range must be positive"));
        }
        if let Some(d) = self.density {
            if !(d > 0.0) {
                return Err(invalid("density must be positive"));
            }
        }
        if self.max_multiple == 0 {
            return Err(invalid("max_multiple must be at least 1"));
        }
        for &v in &self.values {
            let ok = match self.sweep {
                SweepVar::P | SweepVar::F => (0.0..=1.0).contains(&v),
                SweepVar::Beta | SweepVar::Size => v > 0.0 && v.is_finite(),
            };
            if !ok {
                return Err(invalid(format!("sweep value {v} invalid for `{}`", self.sweep)));
            }
        }
        if !(0.0..=1.0).contains(&self.p) || !(0.0..=1.0).contains(&self.traffic_fraction) {
            return Err(invalid("p and traffic fraction must lie in [0, 1]"));
        }
        if !(self.beta > 0.0) {
            return Err(invalid("beta must be positive"));
        }
        if self.experiment == ExperimentKind::D && self.sweep == SweepVar::Beta {
            return Err(invalid("experiment D does not select beamforming nodes"));
        }
        Ok(())
    }

    /// Worker threads: the environment variable wins, then the config key,
    /// then 1.
    pub fn resolved_threads(&self) -> usize {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .or(self.threads)
            .unwrap_or(1)
            .max(1)
    }
}
