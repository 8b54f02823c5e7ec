//! Single runs and seed sweeps.
//!
//! Every seed writes `<scenario>_seed<seed>.csv` (and `.svg` with plots on).
//! A sweep also writes `summary.csv` with one row per seed and
//! `manifest.json` listing every artifact and any simulation error.

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::controller::simulate;
use crate::error::{Error, Result};
use crate::math::squared_distance;
use crate::model::Scenario;

use super::builtin::{builtin, BUILTIN_NAMES};
use super::scenario_file::read_scenario_file;
use super::svg::render_svg;
use super::trajectory_csv::{format_float, write_trajectory, CsvLayout};

/// Radius within which an agent counts as having reached a target.
pub const ARRIVAL_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioSource {
    Builtin(String),
    File(PathBuf),
}

impl ScenarioSource {
    /// Built-in names win over files of the same name.
    pub fn from_arg(arg: &str) -> Self {
        if BUILTIN_NAMES.contains(&arg) {
            ScenarioSource::Builtin(arg.to_string())
        } else {
            ScenarioSource::File(PathBuf::from(arg))
        }
    }

    pub fn load(&self) -> Result<Scenario> {
        match self {
            ScenarioSource::Builtin(name) => builtin(name),
            ScenarioSource::File(path) => read_scenario_file(path),
        }
    }
}

impl fmt::Display for ScenarioSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioSource::Builtin(name) => f.write_str(name),
            ScenarioSource::File(path) => write!(f, "{}", path.display()),
        }
    }
}

/// Half-open seed range `start..end`; `A..=B` is accepted on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRange {
    start: u64,
    end: u64,
}

impl SeedRange {
    pub fn new(start: u64, end: u64) -> Result<Self> {
        if end <= start {
            return Err(Error::InvalidParam {
                field: "seeds",
                reason: format!("empty range {start}..{end}"),
            });
        }
        Ok(Self { start, end })
    }

    pub fn single(seed: u64) -> Self {
        Self {
            start: seed,
            end: seed + 1,
        }
    }

    pub fn seeds(&self) -> std::ops::Range<u64> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        (self.end - self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

impl FromStr for SeedRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |message: String| Error::Parse {
            context: "seeds".into(),
            message,
        };
        let (a, b, inclusive) = if let Some((a, b)) = s.split_once("..=") {
            (a, b, true)
        } else if let Some((a, b)) = s.split_once("..") {
            (a, b, false)
        } else {
            return Err(bad(format!("expected A..B or A..=B, got {s:?}")));
        };
        let parse = |v: &str| {
            v.trim()
                .parse::<u64>()
                .map_err(|e| bad(format!("{v:?}: {e}")))
        };
        let (start, mut end) = (parse(a)?, parse(b)?);
        if inclusive {
            end = end
                .checked_add(1)
                .ok_or_else(|| bad("range end overflows".into()))?;
        }
        SeedRange::new(start, end)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: ScenarioSource,
    pub seeds: SeedRange,
    pub out_dir: PathBuf,
    pub plots: bool,
    pub record_marginals: bool,
    /// Worker threads for sweeps; `None` uses the global pool.
    pub jobs: Option<usize>,
}

/// Positive and negative relation counts split by whether both endpoints of
/// an edge ended nearest the same target.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EdgeCounts {
    pub within_positive: usize,
    pub within_negative: usize,
    pub between_positive: usize,
    pub between_negative: usize,
}

impl EdgeCounts {
    pub fn within_positive_fraction(&self) -> f64 {
        fraction(self.within_positive, self.within_negative)
    }
    pub fn between_positive_fraction(&self) -> f64 {
        fraction(self.between_positive, self.between_negative)
    }
}

fn fraction(pos: usize, neg: usize) -> f64 {
    if pos + neg == 0 {
        f64::NAN
    } else {
        pos as f64 / (pos + neg) as f64
    }
}

/// Where the agents ended up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointSummary {
    pub final_positions: Vec<Vec<f64>>,
    /// Nearest target per agent, 0-based; ties go to the lower index.
    pub nearest: Vec<usize>,
    /// Agents per nearest target.
    pub counts: Vec<usize>,
    /// Agents within [`ARRIVAL_TOLERANCE`] of each target.
    pub arrived: Vec<usize>,
    pub all_arrived: bool,
    pub edges: Option<EdgeCounts>,
}

pub fn summarize_endpoints(scenario: &Scenario, final_positions: &[Vec<f64>]) -> EndpointSummary {
    let targets = scenario.targets();
    let m = targets.len();
    let mut nearest = Vec::with_capacity(final_positions.len());
    let mut counts = vec![0; m];
    let mut arrived = vec![0; m];
    let mut all_arrived = true;
    for x in final_positions {
        let (best, d2) = (0..m)
            .map(|s| (s, squared_distance(x, targets.get(s))))
            .fold((0, f64::INFINITY), |acc, (s, d)| if d < acc.1 { (s, d) } else { acc });
        nearest.push(best);
        counts[best] += 1;
        if d2.sqrt() <= ARRIVAL_TOLERANCE {
            arrived[best] += 1;
        } else {
            all_arrived = false;
        }
    }
    let edges = scenario.relations().map(|g| {
        let mut c = EdgeCounts::default();
        for e in g.edges() {
            match (nearest[e.a] == nearest[e.b], e.strength > 0.0) {
                (true, true) => c.within_positive += 1,
                (true, false) => c.within_negative += 1,
                (false, true) => c.between_positive += 1,
                (false, false) => c.between_negative += 1,
            }
        }
        c
    });
    EndpointSummary {
        final_positions: final_positions.to_vec(),
        nearest,
        counts,
        arrived,
        all_arrived,
        edges,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunEntry {
    pub seed: u64,
    #[serde(flatten)]
    pub status: RunStatus,
    pub steps: usize,
    pub end_time: Option<f64>,
    pub trajectory_csv: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot_svg: Option<PathBuf>,
    #[serde(skip)]
    pub summary: Option<EndpointSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "error", rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub source: String,
    pub runs: Vec<RunEntry>,
    pub summary_csv: PathBuf,
}

impl RunReport {
    pub fn failures(&self) -> usize {
        self.runs
            .iter()
            .filter(|r| r.status != RunStatus::Ok)
            .count()
    }
}

pub fn trajectory_file_name(scenario: &str, seed: u64, ext: &str) -> String {
    format!("{scenario}_seed{seed}.{ext}")
}

pub fn layout_for(scenario: &Scenario, marginals: bool) -> CsvLayout {
    CsvLayout {
        n_agents: scenario.n_agents(),
        dim: scenario.dim(),
        n_targets: scenario.n_targets(),
        marginals,
    }
}

fn run_seed(scenario: &Scenario, seed: u64, config: &RunConfig) -> Result<RunEntry> {
    let (trajectory, status) = match simulate(scenario, seed) {
        Ok(t) => (t, RunStatus::Ok),
        Err(failure) => (failure.partial, RunStatus::Failed(failure.error.to_string())),
    };
    let csv_path = config
        .out_dir
        .join(trajectory_file_name(scenario.name(), seed, "csv"));
    let file = BufWriter::new(File::create(&csv_path)?);
    write_trajectory(file, &trajectory, &layout_for(scenario, config.record_marginals))?;
    let plot_svg = if config.plots {
        let path = config
            .out_dir
            .join(trajectory_file_name(scenario.name(), seed, "svg"));
        let title = format!("{} (seed {seed})", scenario.name());
        std::fs::write(&path, render_svg(&trajectory, scenario.targets(), &title))?;
        Some(path)
    } else {
        None
    };
    let summary = match (&status, trajectory.final_positions()) {
        (RunStatus::Ok, Some(fin)) => Some(summarize_endpoints(scenario, fin)),
        _ => None,
    };
    Ok(RunEntry {
        seed,
        status,
        steps: trajectory.steps(),
        end_time: trajectory.end_time(),
        trajectory_csv: csv_path,
        plot_svg,
        summary,
    })
}

/// Simulates every seed, writing per-seed files, `summary.csv` and
/// `manifest.json`. Simulation failures are recorded, not returned.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let scenario = config.scenario.load()?;
    run_scenario(&scenario, config)
}

/// [`run`] with an already loaded scenario.
pub fn run_scenario(scenario: &Scenario, config: &RunConfig) -> Result<RunReport> {
    std::fs::create_dir_all(&config.out_dir)?;
    let seeds: Vec<u64> = config.seeds.seeds().collect();
    let sweep = || {
        seeds
            .par_iter()
            .map(|&seed| run_seed(scenario, seed, config))
            .collect::<Result<Vec<_>>>()
    };
    let runs = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidState(format!("thread pool: {e}")))?
            .install(sweep)?,
        None => sweep()?,
    };
    let summary_csv = config.out_dir.join("summary.csv");
    write_summary(&summary_csv, scenario, &runs)?;
    let report = RunReport {
        scenario: scenario.name().to_string(),
        source: config.scenario.to_string(),
        runs,
        summary_csv,
    };
    let manifest = File::create(config.out_dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(BufWriter::new(manifest), &report)
        .map_err(|e| Error::InvalidState(format!("manifest: {e}")))?;
    Ok(report)
}

fn write_summary(path: &Path, scenario: &Scenario, runs: &[RunEntry]) -> Result<()> {
    let (n, k, m) = (scenario.n_agents(), scenario.dim(), scenario.n_targets());
    let mut header = vec!["seed".to_string(), "status".into(), "steps".into()];
    for a in 1..=n {
        if k == 1 {
            header.push(format!("x_{a}"));
        } else {
            header.extend((1..=k).map(|d| format!("x_{a}_{d}")));
        }
    }
    header.extend((1..=n).map(|a| format!("target_{a}")));
    header.extend((1..=m).map(|s| format!("count_{s}")));
    header.extend((1..=m).map(|s| format!("arrived_{s}")));
    header.push("all_arrived".into());
    let relations = scenario.relations().is_some();
    if relations {
        header.extend(
            ["within_pos", "within_neg", "between_pos", "between_neg"].map(String::from),
        );
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&header)?;
    for run in runs {
        let mut row = vec![
            run.seed.to_string(),
            match &run.status {
                RunStatus::Ok => "ok".to_string(),
                RunStatus::Failed(_) => "failed".to_string(),
            },
            run.steps.to_string(),
        ];
        match &run.summary {
            Some(s) => {
                row.extend(s.final_positions.iter().flatten().map(|&v| format_float(v)));
                row.extend(s.nearest.iter().map(|t| (t + 1).to_string()));
                row.extend(s.counts.iter().map(usize::to_string));
                row.extend(s.arrived.iter().map(usize::to_string));
                row.push(s.all_arrived.to_string());
                if let Some(e) = s.edges {
                    row.extend(
                        [
                            e.within_positive,
                            e.within_negative,
                            e.between_positive,
                            e.between_negative,
                        ]
                        .map(|c| c.to_string()),
                    );
                }
            }
            None => row.resize(header.len(), String::new()),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!("0..3".parse::<SeedRange>().unwrap().len(), 3);
        assert_eq!("5..=5".parse::<SeedRange>().unwrap().seeds().collect::<Vec<_>>(), vec![5]);
        assert!("3..3".parse::<SeedRange>().is_err());
        assert!("a..b".parse::<SeedRange>().is_err());
        assert!("7".parse::<SeedRange>().is_err());
    }

    #[test]
    fn source_resolution() {
        assert_eq!(
            ScenarioSource::from_arg("holiday-42"),
            ScenarioSource::Builtin("holiday-42".into())
        );
        assert!(matches!(
            ScenarioSource::from_arg("x.toml"),
            ScenarioSource::File(_)
        ));
    }

    #[test]
    fn endpoint_summary_counts() {
        let s = crate::cli_io::builtin::firemen_6x3();
        let fin: Vec<Vec<f64>> = [-1.0, -0.9, 0.05, 0.2, 1.0, 0.6].iter().map(|&v| vec![v]).collect();
        let sum = summarize_endpoints(&s, &fin);
        assert_eq!(sum.nearest, vec![0, 0, 1, 1, 2, 2]);
        assert_eq!(sum.counts, vec![2, 2, 2]);
        assert_eq!(sum.arrived, vec![2, 1, 1]);
        assert!(!sum.all_arrived);
        assert!(sum.edges.is_none());
    }
}
