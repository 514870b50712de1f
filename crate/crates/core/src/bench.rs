//! Benchmark harness: run solvers over seeded random games and record value,
//! approximation error and wall time.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::driver::{quacs_solve, ExhaustiveOracle, QaoaOracle, QaoaOracleConfig, QuacsRun, QuboClassicalOracle, SolveOptions};
use crate::error::{Error, Result};
use crate::exact::dp_optimal_cs;
use crate::game::{generate_game, CoalitionStructure, GameSpec, IsGame, WeightDistribution, VALUE_TOL};
use crate::qaoa::OptimizerConfig;
use crate::qubo::derive_seed;

/// Column order of the results CSV.
pub const CSV_HEADER: [&str; 8] = ["n", "distribution", "seed", "solver", "p", "value", "er", "time_s"];

/// Default agent-count guard for the exponential exact solver.
pub const DEFAULT_EXACT_MAX_N: usize = 18;

/// `|v_exact - v_approx| / v_exact`, or `None` when the exact optimum is zero.
pub fn approximation_error(exact: f64, approx: f64) -> Option<f64> {
    (exact.abs() > VALUE_TOL).then(|| (exact - approx).abs() / exact)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "quacs-classical")]
    QuacsClassical,
    #[serde(rename = "quacs-qaoa")]
    QuacsQaoa,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Exact, SolverKind::QuacsClassical, SolverKind::QuacsQaoa];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::QuacsClassical => "quacs-classical",
            SolverKind::QuacsQaoa => "quacs-qaoa",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown solver `{s}` (expected exact, quacs-classical or quacs-qaoa)")))
    }
}

/// Solver knobs shared by `solve` and `bench`.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub p: usize,
    pub shots: usize,
    pub seed: u64,
    pub options: SolveOptions,
    pub optimizer: OptimizerConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            p: 1,
            shots: 1024,
            seed: 0,
            options: SolveOptions::default(),
            optimizer: OptimizerConfig::default(),
        }
    }
}

/// One solver invocation.
#[derive(Clone, Debug, Serialize)]
pub struct SolverOutcome {
    pub solver: SolverKind,
    pub structure: CoalitionStructure,
    pub value: f64,
    /// Wall time of the solver call alone.
    pub time_s: f64,
    /// Anytime trace for the splitting solvers.
    pub run: Option<QuacsRun>,
}

pub fn run_solver(game: &IsGame, solver: SolverKind, config: &SolverConfig) -> Result<SolverOutcome> {
    let start = Instant::now();
    let (structure, run) = match solver {
        SolverKind::Exact => (dp_optimal_cs(game)?, None),
        SolverKind::QuacsClassical => {
            let run = quacs_solve(game, &QuboClassicalOracle::default(), config.options)?;
            (run.final_structure.clone(), Some(run))
        }
        SolverKind::QuacsQaoa => {
            let oracle = QaoaOracle {
                config: QaoaOracleConfig {
                    p: config.p,
                    shots: config.shots,
                    seed: config.seed,
                    optimizer: config.optimizer.clone(),
                },
            };
            let run = quacs_solve(game, &oracle, config.options)?;
            (run.final_structure.clone(), Some(run))
        }
    };
    let time_s = start.elapsed().as_secs_f64();
    Ok(SolverOutcome { solver, value: structure.value(), structure, time_s, run })
}

/// Runs the exhaustive-oracle splitting loop; used as a reference for the QUBO path.
pub fn run_exhaustive_split(game: &IsGame, options: SolveOptions) -> Result<QuacsRun> {
    quacs_solve(game, &ExhaustiveOracle, options)
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub distribution: String,
    pub seed: u64,
    pub solver: SolverKind,
    /// QAOA depth; 0 for solvers without a circuit.
    pub p: usize,
    pub value: f64,
    /// `NaN` when undefined (exact optimum zero or exact solver not run).
    pub er: f64,
    pub time_s: f64,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub games_per_n: usize,
    pub distributions: Vec<WeightDistribution>,
    pub solvers: Vec<SolverKind>,
    pub p_min: usize,
    pub p_max: usize,
    pub seed: u64,
    pub shots: usize,
    /// The exact solver is skipped above this agent count.
    pub exact_max_n: usize,
    pub optimizer: OptimizerConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n_min: 4,
            n_max: 14,
            games_per_n: 25,
            distributions: vec![WeightDistribution::STANDARD_NORMAL, WeightDistribution::SYMMETRIC_UNIFORM],
            solvers: SolverKind::ALL.to_vec(),
            p_min: 1,
            p_max: 1,
            seed: 0,
            shots: 1024,
            exact_max_n: DEFAULT_EXACT_MAX_N,
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 || self.n_min > self.n_max || self.n_max > crate::game::MAX_AGENTS {
            return Err(Error::Config(format!(
                "agent range {}..={} must lie within 1..={}",
                self.n_min,
                self.n_max,
                crate::game::MAX_AGENTS
            )));
        }
        if self.p_min < 1 || self.p_min > self.p_max {
            return Err(Error::Config(format!("depth range {}..={} is invalid", self.p_min, self.p_max)));
        }
        if self.distributions.is_empty() || self.solvers.is_empty() || self.games_per_n == 0 {
            return Err(Error::Config("bench needs at least one distribution, solver and game".into()));
        }
        if self.shots == 0 {
            return Err(Error::Config("at least one shot is required".into()));
        }
        self.distributions.iter().try_for_each(|d| d.validate())
    }
}

/// The seed of the `index`-th game for `(n, distribution)` in a bench run.
pub fn game_seed(base: u64, n: usize, distribution_index: usize, index: usize) -> u64 {
    derive_seed(base, ((n as u64) << 40) | ((distribution_index as u64) << 32) | index as u64)
}

/// Runs the sweep, writing and flushing one CSV row per (game, solver, p).
/// Each game's seed also seeds its QAOA runs, so a row can be reproduced with
/// `generate` + `solve` using the row's seed.
pub fn run_bench<W: Write>(config: &BenchConfig, out: W) -> Result<Vec<BenchRow>> {
    config.validate()?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(CSV_HEADER)?;
    writer.flush()?;
    let mut rows = Vec::new();

    for n in config.n_min..=config.n_max {
        for (di, &distribution) in config.distributions.iter().enumerate() {
            for index in 0..config.games_per_n {
                let seed = game_seed(config.seed, n, di, index);
                let game = generate_game(&GameSpec { n, distribution, seed })?;
                let exact_allowed = n <= config.exact_max_n && config.solvers.contains(&SolverKind::Exact);
                let mut exact_value = None;
                if exact_allowed {
                    let out = run_solver(&game, SolverKind::Exact, &SolverConfig::default())?;
                    exact_value = Some(out.value);
                    let er = approximation_error(out.value, out.value).unwrap_or(f64::NAN);
                    rows.push(emit(&mut writer, n, distribution, seed, SolverKind::Exact, 0, out.value, er, out.time_s)?);
                }
                let er_of = |v: f64| exact_value.and_then(|e| approximation_error(e, v)).unwrap_or(f64::NAN);
                for &solver in &config.solvers {
                    match solver {
                        SolverKind::Exact => {}
                        SolverKind::QuacsClassical => {
                            let out = run_solver(&game, solver, &SolverConfig { seed, ..SolverConfig::default() })?;
                            rows.push(emit(&mut writer, n, distribution, seed, solver, 0, out.value, er_of(out.value), out.time_s)?);
                        }
                        SolverKind::QuacsQaoa => {
                            for p in config.p_min..=config.p_max {
                                let cfg = SolverConfig {
                                    p,
                                    shots: config.shots,
                                    seed,
                                    optimizer: config.optimizer.clone(),
                                    ..SolverConfig::default()
                                };
                                let out = run_solver(&game, solver, &cfg)?;
                                rows.push(emit(&mut writer, n, distribution, seed, solver, p, out.value, er_of(out.value), out.time_s)?);
                            }
                        }
                    }
                }
                log::info!("bench: n={n} {} game {index} done", distribution.name());
            }
        }
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn emit<W: Write>(
    writer: &mut csv::Writer<W>,
    n: usize,
    distribution: WeightDistribution,
    seed: u64,
    solver: SolverKind,
    p: usize,
    value: f64,
    er: f64,
    time_s: f64,
) -> Result<BenchRow> {
    let row = BenchRow { n, distribution: distribution.name().to_string(), seed, solver, p, value, er, time_s };
    writer.serialize(&row)?;
    writer.flush()?;
    Ok(row)
}

/// Aggregates per `(n, distribution, solver, p)`. Undefined errors are excluded.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub distribution: String,
    pub solver: SolverKind,
    pub p: usize,
    pub games: usize,
    pub er_count: usize,
    pub mean_er: f64,
    pub max_er: f64,
    pub mean_time_s: f64,
}

pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, String, SolverKind, usize)> = Vec::new();
    for r in rows {
        let key = (r.n, r.distribution.clone(), r.solver, r.p);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(n, distribution, solver, p)| {
            let group: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.n == n && r.distribution == distribution && r.solver == solver && r.p == p)
                .collect();
            let ers: Vec<f64> = group.iter().map(|r| r.er).filter(|e| !e.is_nan()).collect();
            SummaryRow {
                n,
                distribution,
                solver,
                p,
                games: group.len(),
                er_count: ers.len(),
                mean_er: if ers.is_empty() { f64::NAN } else { ers.iter().sum::<f64>() / ers.len() as f64 },
                max_er: ers.iter().copied().fold(f64::NAN, f64::max),
                mean_time_s: group.iter().map(|r| r.time_s).sum::<f64>() / group.len() as f64,
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(summary: &[SummaryRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in summary {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
