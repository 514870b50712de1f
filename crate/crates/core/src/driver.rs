//! The anytime top-down splitting loop.
//!
//! The structure starts as the grand coalition. Coalitions are examined in
//! FIFO order; each is handed to a [`SplitOracle`], and the proposed
//! bipartition replaces its parent whenever `v(C) + v(C̄) >= v(S)`. Every
//! coalition is examined at most once, and singletons are never queued.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{best_split_bruteforce_counted, Acceptance, SplitResult};
use crate::game::{Coalition, CoalitionStructure, IsGame};
use crate::qaoa::{circuit_report, optimize_params, run_qaoa, sample_and_select, CircuitReport, OptimizerConfig};
use crate::qubo::{build_mincut_qubo, derive_seed, qubo_to_ising, solve_qubo, AnnealConfig, DEFAULT_EXHAUSTIVE_CAP};

/// Per-call oracle statistics.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct OracleStats {
    #[serde(with = "secs")]
    pub elapsed: Duration,
    /// Register width simulated for this call (0 when no circuit was run).
    pub qubits: usize,
    /// Candidate bipartitions scored, or expectation evaluations for QAOA.
    pub evaluations: u64,
    /// Trained expectation of the cut Hamiltonian, QAOA only.
    pub expectation: Option<f64>,
    pub circuit: Option<CircuitReport>,
}

#[derive(Clone, Debug)]
pub struct Proposal {
    pub split: SplitResult,
    pub stats: OracleStats,
}

/// Proposes a non-trivial bipartition of a coalition with at least two agents.
///
/// `call` is the 0-based index of this call within a run; stochastic oracles
/// derive their per-call seed from it.
pub trait SplitOracle: Sync {
    fn name(&self) -> &str;
    fn propose_split(&self, game: &IsGame, coalition: Coalition, call: u64) -> Result<Proposal>;
}

fn unique_pair_split(game: &IsGame, s: Coalition, start: Instant) -> Result<Option<Proposal>> {
    if s.len() != 2 {
        return Ok(None);
    }
    let low = Coalition::singleton(s.lowest().expect("non-empty"));
    let split = SplitResult::from_side(game, s, low, Acceptance::Weak)?;
    let stats = OracleStats { elapsed: start.elapsed(), evaluations: 1, ..OracleStats::default() };
    Ok(Some(Proposal { split, stats }))
}

/// Enumerates every bipartition.
#[derive(Clone, Debug, Default)]
pub struct ExhaustiveOracle;

impl SplitOracle for ExhaustiveOracle {
    fn name(&self) -> &str {
        "exhaustive"
    }

    fn propose_split(&self, game: &IsGame, s: Coalition, _call: u64) -> Result<Proposal> {
        let start = Instant::now();
        if let Some(p) = unique_pair_split(game, s, start)? {
            return Ok(p);
        }
        let (split, visited) = best_split_bruteforce_counted(game, s)?;
        let stats = OracleStats { elapsed: start.elapsed(), evaluations: visited, ..OracleStats::default() };
        Ok(Proposal { split, stats })
    }
}

/// Min-cut QUBO solved classically: exhaustively up to `exhaustive_cap`
/// variables, by simulated annealing beyond.
#[derive(Clone, Debug)]
pub struct QuboClassicalOracle {
    pub exhaustive_cap: usize,
    pub anneal: AnnealConfig,
}

impl Default for QuboClassicalOracle {
    fn default() -> Self {
        QuboClassicalOracle { exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP, anneal: AnnealConfig::default() }
    }
}

impl SplitOracle for QuboClassicalOracle {
    fn name(&self) -> &str {
        "quacs-classical"
    }

    fn propose_split(&self, game: &IsGame, s: Coalition, call: u64) -> Result<Proposal> {
        let start = Instant::now();
        if let Some(p) = unique_pair_split(game, s, start)? {
            return Ok(p);
        }
        let q = build_mincut_qubo(game, s)?;
        let anneal = AnnealConfig { seed: derive_seed(self.anneal.seed, call), ..self.anneal.clone() };
        let sol = solve_qubo(&q, self.exhaustive_cap, &anneal)?;
        let split = q.decode_split(game, sol.x, Acceptance::Weak)?;
        let stats = OracleStats { elapsed: start.elapsed(), ..OracleStats::default() };
        Ok(Proposal { split, stats })
    }
}

/// QAOA settings for [`QaoaOracle`].
#[derive(Clone, Debug)]
pub struct QaoaOracleConfig {
    pub p: usize,
    pub shots: usize,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
}

impl Default for QaoaOracleConfig {
    fn default() -> Self {
        QaoaOracleConfig { p: 1, shots: 1024, seed: 0, optimizer: OptimizerConfig::default() }
    }
}

/// Min-cut QUBO → Ising → trained p-layer QAOA → best sampled bitstring.
#[derive(Clone, Debug)]
pub struct QaoaOracle {
    pub config: QaoaOracleConfig,
}

impl SplitOracle for QaoaOracle {
    fn name(&self) -> &str {
        "quacs-qaoa"
    }

    fn propose_split(&self, game: &IsGame, s: Coalition, call: u64) -> Result<Proposal> {
        let start = Instant::now();
        if let Some(p) = unique_pair_split(game, s, start)? {
            return Ok(p);
        }
        let cfg = &self.config;
        let q = build_mincut_qubo(game, s)?;
        let ising = qubo_to_ising(&q);
        let seed = derive_seed(cfg.seed, call);
        let optimizer = OptimizerConfig { seed, ..cfg.optimizer.clone() };
        let trained = optimize_params(&ising, cfg.p, &optimizer)?;
        let sv = run_qaoa(&ising, &trained.params)?;
        let sample = sample_and_select(&sv, &ising, cfg.shots, seed)?;
        let split = q.decode_split(game, sample.x, Acceptance::Weak)?;
        let stats = OracleStats {
            elapsed: start.elapsed(),
            qubits: ising.m,
            evaluations: trained.evaluations as u64,
            expectation: Some(trained.expectation),
            circuit: Some(circuit_report(&ising, cfg.p)?),
        };
        Ok(Proposal { split, stats })
    }
}

/// Which split oracle to build.
#[derive(Clone, Debug)]
pub enum OracleKind {
    Exhaustive,
    QuboClassical { exhaustive_cap: usize, anneal: AnnealConfig },
    Qaoa(QaoaOracleConfig),
}

pub fn make_oracle(kind: OracleKind) -> Result<Box<dyn SplitOracle>> {
    Ok(match kind {
        OracleKind::Exhaustive => Box::new(ExhaustiveOracle),
        OracleKind::QuboClassical { exhaustive_cap, anneal } => {
            anneal.validate()?;
            Box::new(QuboClassicalOracle { exhaustive_cap, anneal })
        }
        OracleKind::Qaoa(config) => {
            if config.p == 0 || config.shots == 0 {
                return Err(Error::Config("QAOA oracle needs p >= 1 and shots >= 1".into()));
            }
            if config.optimizer.gamma_steps == 0 || config.optimizer.beta_steps == 0 {
                return Err(Error::Config("angle grid resolution must be positive".into()));
            }
            Box::new(QaoaOracle { config })
        }
    })
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    pub acceptance: Acceptance,
    /// Evaluate all currently queued coalitions concurrently. The result is
    /// identical to the sequential run.
    pub parallel: bool,
}

/// One examined coalition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Step {
    /// 1-based step number.
    pub step: usize,
    pub coalition: Coalition,
    pub parent_value: f64,
    pub left: Coalition,
    pub right: Coalition,
    pub combined_value: f64,
    pub accepted: bool,
    /// Structure after this step.
    pub structure: Vec<Coalition>,
    pub structure_value: f64,
    pub stats: OracleStats,
}

/// Result of a full run, with the anytime trace.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuacsRun {
    pub oracle: String,
    #[serde(rename = "final")]
    pub final_structure: CoalitionStructure,
    pub initial_value: f64,
    pub history: Vec<Step>,
    pub oracle_calls: usize,
    pub max_qubits: usize,
}

impl QuacsRun {
    pub fn value(&self) -> f64 {
        self.final_structure.value()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run trace serializes")
    }
}

/// Runs the splitting loop to completion.
pub fn quacs_solve(game: &IsGame, oracle: &dyn SplitOracle, options: SolveOptions) -> Result<QuacsRun> {
    let mut cs = CoalitionStructure::grand(game);
    let mut queue: VecDeque<Coalition> = VecDeque::new();
    if game.n() >= 2 {
        queue.push_back(game.grand());
    }
    let mut history = Vec::new();
    let mut calls = 0u64;
    let mut max_qubits = 0;

    while !queue.is_empty() {
        let batch: Vec<Coalition> = if options.parallel { queue.drain(..).collect() } else { vec![queue.pop_front().unwrap()] };
        let first_call = calls;
        calls += batch.len() as u64;
        let proposals = evaluate(game, oracle, &batch, first_call, options.parallel);

        for (s, proposal) in batch.into_iter().zip(proposals) {
            let proposal = proposal.map_err(|e| Error::Oracle {
                oracle: oracle.name().to_string(),
                source: Box::new(e),
                partial: Box::new(cs.clone()),
            })?;
            let split = proposal.split;
            check_proposal(s, &split).map_err(|e| Error::Oracle {
                oracle: oracle.name().to_string(),
                source: Box::new(e),
                partial: Box::new(cs.clone()),
            })?;
            let parent_value = game.value_unchecked(s);
            let accepted = options.acceptance.accepts(split.combined_value, parent_value);
            if accepted {
                cs.replace(game, s, split.left, split.right);
                for side in [split.left, split.right] {
                    if side.len() >= 2 {
                        queue.push_back(side);
                    }
                }
            }
            max_qubits = max_qubits.max(proposal.stats.qubits);
            log::debug!(
                "step {}: {s} -> {} | {} ({:.6} vs {:.6}) {}",
                history.len() + 1,
                split.left,
                split.right,
                split.combined_value,
                parent_value,
                if accepted { "accepted" } else { "rejected" }
            );
            history.push(Step {
                step: history.len() + 1,
                coalition: s,
                parent_value,
                left: split.left,
                right: split.right,
                combined_value: split.combined_value,
                accepted,
                structure: cs.coalitions().to_vec(),
                structure_value: cs.value(),
                stats: proposal.stats,
            });
        }
    }

    Ok(QuacsRun {
        oracle: oracle.name().to_string(),
        initial_value: game.value_unchecked(game.grand()),
        final_structure: cs,
        history,
        oracle_calls: calls as usize,
        max_qubits,
    })
}

fn evaluate(
    game: &IsGame,
    oracle: &dyn SplitOracle,
    batch: &[Coalition],
    first_call: u64,
    parallel: bool,
) -> Vec<Result<Proposal>> {
    if !parallel || batch.len() == 1 {
        return batch
            .iter()
            .enumerate()
            .map(|(i, &s)| oracle.propose_split(game, s, first_call + i as u64))
            .collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = batch
            .iter()
            .enumerate()
            .map(|(i, &s)| scope.spawn(move || oracle.propose_split(game, s, first_call + i as u64)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("oracle thread panicked")).collect()
    })
}

fn check_proposal(s: Coalition, split: &SplitResult) -> Result<()> {
    let ok = split.parent == s
        && !split.left.is_empty()
        && !split.right.is_empty()
        && !split.left.intersects(split.right)
        && split.left.union(split.right) == s;
    if !ok {
        return Err(Error::Invariant(format!(
            "oracle proposed {} | {}, not a bipartition of {s}",
            split.left, split.right
        )));
    }
    Ok(())
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}
