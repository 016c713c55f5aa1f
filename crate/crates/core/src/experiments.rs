//! Dataset generation for the figure sweeps.
//!
//! Every experiment expands into a list of independent points. Points are
//! evaluated on a worker pool (feature `parallel`) and gathered back in
//! construction order, so a dataset depends only on its config.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel_bounds::channel_bound;
use crate::channels::{
    amplitude_damping, depolarizing, haar_unitary_rng, hs_random_state, mad_channel, mad_rates, mixed_unitary,
    noisy_mes, pauli, rng_from_seed, KrausChannel, PauliParams,
};
use crate::error::{Error, Result};
use crate::qmat::DensityOperator;
use crate::report::BoundReport;
use crate::sdp::Tolerances;
use crate::state_bounds::{state_bound, twoway_family};

pub const CSV_HEADER: [&str; 8] =
    ["experiment", "param_name", "param_value", "bound", "value", "status", "seed", "runtime_ms"];

pub const DEFAULT_STEPS: usize = 16;
pub const DEFAULT_SEED: u64 = 0;
pub const MIXU_SAMPLES: usize = 1000;
pub const RANDOM_STATE_SAMPLES: usize = 500;
/// Status string for a point whose bound returned an error instead of a report.
pub const STATUS_ERROR: &str = "error";

const STATE_GRID_BOUNDS: [&str; 4] = ["hashing", "erev-u-hat", "scb", "mcb"];
const COVPAULI_BOUNDS: [&str; 5] = ["hashing", "qsqz", "nocloning", "conti-adg", "covpauli"];
const MIXU_BOUNDS: [&str; 2] = ["qsqz", "conti-adg"];
const RANDOM_STATE_BOUNDS: [&str; 2] = ["erev-u-hat", "hashing"];
const COVPAULI_P3: f64 = 0.05;
const LOCAL_DAMPING: f64 = 0.1;

pub const MIXU_PROB_SETS: [[f64; 4]; 4] =
    [[0.58, 0.22, 0.15, 0.05], [0.6, 0.2, 0.1, 0.1], [0.5, 0.3, 0.2, 0.0], [0.54, 0.32, 0.12, 0.02]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    FigQubit,
    FigQutrit,
    FigQudit,
    FigMixu,
    FigCovpauli,
    FigRandomStates,
    FigTwoway,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        ExperimentId::FigQubit,
        ExperimentId::FigQutrit,
        ExperimentId::FigQudit,
        ExperimentId::FigMixu,
        ExperimentId::FigCovpauli,
        ExperimentId::FigRandomStates,
        ExperimentId::FigTwoway,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::FigQubit => "fig-qubit",
            ExperimentId::FigQutrit => "fig-qutrit",
            ExperimentId::FigQudit => "fig-qudit",
            ExperimentId::FigMixu => "fig-mixu",
            ExperimentId::FigCovpauli => "fig-covpauli",
            ExperimentId::FigRandomStates => "fig-random-states",
            ExperimentId::FigTwoway => "fig-twoway",
        }
    }

    /// Default noise-parameter range for grid experiments.
    pub fn default_range(&self) -> Option<(f64, f64)> {
        match self {
            ExperimentId::FigQubit | ExperimentId::FigQutrit | ExperimentId::FigQudit => Some((0.15, 0.3)),
            ExperimentId::FigCovpauli => Some((0.75, 0.85)),
            ExperimentId::FigTwoway => Some((0.0, 1.0)),
            ExperimentId::FigMixu | ExperimentId::FigRandomStates => None,
        }
    }

    /// Name written to the `param_name` column for grid experiments.
    fn grid_param(&self) -> &'static str {
        match self {
            ExperimentId::FigCovpauli => "p0",
            _ => "p",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown experiment {s:?}")))
    }
}

/// `n` evenly spaced points on `[a, b]`; a single point sits at `a`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    /// Noise grid; unused by the sampling experiments.
    pub grid: Vec<f64>,
    /// Samples per probability vector (fig-mixu) or per dimension pair
    /// (fig-random-states).
    pub samples: usize,
    /// Mixing probabilities for fig-mixu.
    pub prob_sets: Vec<Vec<f64>>,
    pub seed: u64,
    pub tol: Tolerances,
    /// Record wall-clock time per bound. Off by default so that output is
    /// byte-reproducible.
    pub timing: bool,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        let grid = experiment
            .default_range()
            .map(|(a, b)| linspace(a, b, DEFAULT_STEPS))
            .unwrap_or_default();
        let samples = match experiment {
            ExperimentId::FigMixu => MIXU_SAMPLES,
            ExperimentId::FigRandomStates => RANDOM_STATE_SAMPLES,
            _ => 1,
        };
        Self {
            experiment,
            grid,
            samples,
            prob_sets: MIXU_PROB_SETS.iter().map(|p| p.to_vec()).collect(),
            seed: DEFAULT_SEED,
            tol: Tolerances::default(),
            timing: false,
            output: None,
        }
    }

    /// Replaces the grid by `steps` points over the default range.
    pub fn with_steps(mut self, steps: usize) -> Self {
        if let Some((a, b)) = self.experiment.default_range() {
            self.grid = linspace(a, b, steps);
        }
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.experiment.default_range().is_some() {
            if self.grid.is_empty() {
                return Err(Error::Domain("empty parameter grid".into()));
            }
            if let Some(x) = self.grid.iter().find(|&&x| !unit(x)) {
                return Err(Error::Domain(format!("grid value {x} outside [0,1]")));
            }
        } else if self.samples == 0 {
            return Err(Error::Domain("sample count must be at least 1".into()));
        }
        if self.experiment == ExperimentId::FigMixu {
            if self.prob_sets.is_empty() {
                return Err(Error::Domain("no probability vectors".into()));
            }
            for p in &self.prob_sets {
                if p.is_empty() || p.iter().any(|&x| !unit(x)) {
                    return Err(Error::Domain(format!("bad probability vector {p:?}")));
                }
            }
        }
        Ok(())
    }
}

/// One `(parameter point, bound)` evaluation. Non-finite values are written
/// as an empty CSV field and as JSON `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub param_name: String,
    #[serde(serialize_with = "ser_sig12", deserialize_with = "de_float")]
    pub param_value: f64,
    pub bound: String,
    #[serde(serialize_with = "ser_sig12", deserialize_with = "de_float")]
    pub value: f64,
    pub status: String,
    pub seed: u64,
    pub runtime_ms: u64,
}

impl Row {
    pub fn is_ok(&self) -> bool {
        matches!(self.status.as_str(), "optimal" | "analytic")
    }
}

/// Rounds to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn ser_sig12<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_some(&round_sig12(*x))
    } else {
        s.serialize_none()
    }
}

fn de_float<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Domain(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dataset {
    pub rows: Vec<Row>,
}

impl Dataset {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(Row::is_ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.is_ok())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Domain(format!("csv buffer: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Domain(format!("csv utf-8: {e}")))
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(s.as_bytes());
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != CSV_HEADER {
            return Err(Error::Domain(format!("unexpected CSV header {header:?}")));
        }
        let rows = r.deserialize().collect::<std::result::Result<Vec<Row>, _>>()?;
        Ok(Self { rows })
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Writes the dataset to `path`.
pub fn emit(ds: &Dataset, format: Format, path: &Path) -> Result<()> {
    let text = match format {
        Format::Csv => ds.to_csv_string()?,
        Format::Json => ds.to_json_string()?,
    };
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// `Q_conti_adg − Q_sqz` per fig-mixu sample, as rows with bound `distance`.
/// A distance inherits the first non-ok status of its two inputs.
pub fn mixu_distances(ds: &Dataset) -> Dataset {
    let mut rows = Vec::new();
    for sq in ds.rows.iter().filter(|r| r.bound == "qsqz") {
        let Some(adg) = ds.rows.iter().find(|r| {
            r.bound == "conti-adg"
                && r.experiment == sq.experiment
                && r.param_name == sq.param_name
                && r.param_value == sq.param_value
                && r.seed == sq.seed
        }) else {
            continue;
        };
        let status = [sq, adg].into_iter().find(|r| !r.is_ok()).unwrap_or(sq).status.clone();
        rows.push(Row {
            bound: "distance".into(),
            value: adg.value - sq.value,
            status,
            runtime_ms: 0,
            ..sq.clone()
        });
    }
    Dataset { rows }
}

/// A single point: its `param_name`/`param_value` label, the seed recorded
/// with it and the object the bounds are evaluated on.
struct Point<T> {
    name: String,
    value: f64,
    seed: u64,
    target: T,
}

fn evaluate<T: Sync>(
    cfg: &ExperimentConfig,
    points: &[Point<Result<T>>],
    bounds: &[&str],
    eval: impl Fn(&str, &T, &Tolerances) -> Result<BoundReport> + Sync,
) -> Vec<Row> {
    let per_point = |pt: &Point<Result<T>>| -> Vec<Row> {
        bounds
            .iter()
            .map(|&b| {
                let rep = pt.target.as_ref().map_err(|e| Error::Domain(e.to_string())).and_then(|t| eval(b, t, &cfg.tol));
                let (value, status, ms) = match rep {
                    Ok(r) => (r.value, r.status.as_str().to_string(), r.runtime_ms),
                    Err(_) => (f64::NAN, STATUS_ERROR.to_string(), 0),
                };
                Row {
                    experiment: cfg.experiment.as_str().into(),
                    param_name: pt.name.clone(),
                    param_value: pt.value,
                    bound: b.into(),
                    value,
                    status,
                    seed: pt.seed,
                    runtime_ms: if cfg.timing { ms } else { 0 },
                }
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        points.par_iter().map(per_point).collect::<Vec<_>>().into_iter().flatten().collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        points.iter().flat_map(per_point).collect()
    }
}

/// Maximally entangled state with `a` on Alice's side and `depolarizing(d, p)`
/// on Bob's.
fn bilocal(a: &KrausChannel, p: f64) -> Result<DensityOperator> {
    let b = depolarizing(a.d_in(), p)?;
    noisy_mes(&a.choi(), &b.choi())
}

fn local_channel(id: ExperimentId) -> Result<KrausChannel> {
    let g = LOCAL_DAMPING;
    match id {
        ExperimentId::FigQubit => amplitude_damping(g),
        ExperimentId::FigQutrit => mad_channel(3, &mad_rates(3, &[(1, 0, g), (2, 0, g)])),
        _ => mad_channel(4, &mad_rates(4, &[(1, 0, g), (2, 0, g), (3, 0, g), (2, 1, g)])),
    }
}

fn grid_points<T>(cfg: &ExperimentConfig, seed: u64, f: impl Fn(f64) -> Result<T>) -> Vec<Point<Result<T>>> {
    let name = cfg.experiment.grid_param();
    cfg.grid.iter().map(|&x| Point { name: name.into(), value: x, seed, target: f(x) }).collect()
}

fn prob_label(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
    format!("probs={}", parts.join("/"))
}

/// Mixed-unitary qubit channel with Haar unitaries drawn from `seed`; the
/// same channel as the `mixu:<seed>:<probs>` constructor.
pub fn seeded_mixed_unitary(seed: u64, probs: &[f64]) -> Result<KrausChannel> {
    let mut rng = rng_from_seed(seed);
    let us: Vec<_> = probs.iter().map(|_| haar_unitary_rng(2, &mut rng)).collect();
    mixed_unitary(&us, probs)
}

/// Evaluates every point and bound of the experiment. Failures at a point are
/// recorded in its rows; only an invalid config is an error.
pub fn run(cfg: &ExperimentConfig) -> Result<Dataset> {
    cfg.validate()?;
    let states = |pts: Vec<Point<Result<DensityOperator>>>, bounds: &[&str]| {
        evaluate(cfg, &pts, bounds, |b, rho, tol| state_bound(b, rho, tol))
    };
    let channels = |pts: Vec<Point<Result<KrausChannel>>>, bounds: &[&str]| {
        evaluate(cfg, &pts, bounds, |b, n, tol| channel_bound(b, n, tol))
    };
    let mut seeds = rng_from_seed(cfg.seed);
    let rows = match cfg.experiment {
        id @ (ExperimentId::FigQubit | ExperimentId::FigQutrit | ExperimentId::FigQudit) => {
            let a = local_channel(id)?;
            states(grid_points(cfg, cfg.seed, |p| bilocal(&a, p)), &STATE_GRID_BOUNDS)
        }
        ExperimentId::FigTwoway => states(grid_points(cfg, cfg.seed, twoway_family), &["erev-npt-hat"]),
        ExperimentId::FigCovpauli => channels(
            grid_points(cfg, cfg.seed, |p0| pauli(&PauliParams::covariant(p0, COVPAULI_P3)?, true)),
            &COVPAULI_BOUNDS,
        ),
        ExperimentId::FigMixu => {
            let mut pts = Vec::new();
            for probs in &cfg.prob_sets {
                for i in 0..cfg.samples {
                    let seed = seeds.next_u64();
                    pts.push(Point {
                        name: prob_label(probs),
                        value: i as f64,
                        seed,
                        target: seeded_mixed_unitary(seed, probs),
                    });
                }
            }
            channels(pts, &MIXU_BOUNDS)
        }
        ExperimentId::FigRandomStates => {
            let mut pts = Vec::new();
            for d in [2usize, 3] {
                for i in 0..cfg.samples {
                    let rank = 1 + i % (d * d);
                    let seed = seeds.next_u64();
                    pts.push(Point {
                        name: format!("rank@{d}x{d}"),
                        value: rank as f64,
                        seed,
                        target: hs_random_state(d, d, rank, seed),
                    });
                }
            }
            states(pts, &RANDOM_STATE_BOUNDS)
        }
    };
    Ok(Dataset { rows })
}
