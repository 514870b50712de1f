use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use super::{QaoaParams, Statevector};
use crate::error::{Error, Result};
use crate::qubo::IsingProblem;

/// Angle-training settings.
#[derive(Clone, Debug)]
pub struct OptimizerConfig {
    /// Grid resolution over `gamma in [0, 2pi)` in normalized units (p = 1).
    pub gamma_steps: usize,
    /// Grid resolution over `beta in [0, pi)` (p = 1).
    pub beta_steps: usize,
    /// Linear-ramp Nelder–Mead starts for p > 1, in addition to the nested start.
    pub starts: usize,
    pub seed: u64,
    pub nelder_mead: NelderMeadOptions,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            gamma_steps: 48,
            beta_steps: 24,
            starts: 10,
            seed: 0,
            nelder_mead: NelderMeadOptions::default(),
        }
    }
}

/// Trained angles in the units of the original (unscaled) Ising problem.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizedParams {
    pub params: QaoaParams,
    /// Expectation of `H_C + offset` at `params`, unscaled.
    pub expectation: f64,
    /// Coefficients were divided by this before training.
    pub scale: f64,
    pub evaluations: usize,
}

/// Expectation evaluator over a normalized energy table with a reusable buffer.
struct Landscape {
    energies: Vec<f64>,
    offset: f64,
    m: usize,
    evaluations: usize,
}

impl Landscape {
    fn eval(&mut self, gammas: &[f64], betas: &[f64]) -> f64 {
        let mut sv = Statevector::uniform(self.m).expect("qubit count validated");
        for (&g, &b) in gammas.iter().zip(betas) {
            sv.apply_phases(&self.energies, g).expect("table matches register");
            sv.apply_mixer_layer(b);
        }
        self.finish(&sv, gammas, betas)
    }

    fn finish(&mut self, sv: &Statevector, gammas: &[f64], betas: &[f64]) -> f64 {
        self.evaluations += 1;
        let e = sv.expectation_diagonal(&self.energies).expect("table matches register") + self.offset;
        log::trace!("qaoa gammas={gammas:?} betas={betas:?} expectation={e}");
        e
    }

    /// Exhaustive p = 1 grid. The phased state is shared across each beta row.
    fn grid(&mut self, gamma_steps: usize, beta_steps: usize) -> (f64, f64, f64) {
        let mut best = (0.0, 0.0, f64::INFINITY);
        let base = Statevector::uniform(self.m).expect("qubit count validated");
        for i in 0..gamma_steps {
            let gamma = 2.0 * PI * i as f64 / gamma_steps as f64;
            let mut phased = base.clone();
            phased.apply_phases(&self.energies, gamma).expect("table matches register");
            for j in 0..beta_steps {
                let beta = PI * j as f64 / beta_steps as f64;
                let mut sv = phased.clone();
                sv.apply_mixer_layer(beta);
                let e = self.finish(&sv, &[gamma], &[beta]);
                if e < best.2 {
                    best = (gamma, beta, e);
                }
            }
        }
        best
    }
}

/// Trains QAOA angles minimizing the expected cut.
///
/// Coefficients are first normalized by their largest magnitude. For `p = 1`
/// a `gamma_steps x beta_steps` grid is searched. For `p > 1`, Nelder–Mead runs
/// from the grid optimum padded with identity layers and from `starts`
/// linear-ramp schedules; the best local minimum wins, so the result is never
/// worse than the `p = 1` grid optimum.
pub fn optimize_params(ising: &IsingProblem, p: usize, config: &OptimizerConfig) -> Result<OptimizedParams> {
    if p == 0 {
        return Err(Error::Config("QAOA needs at least one layer".into()));
    }
    if config.gamma_steps == 0 || config.beta_steps == 0 {
        return Err(Error::Config("angle grid resolution must be positive".into()));
    }
    if p > 1 && config.nelder_mead.max_evaluations == 0 {
        return Err(Error::Config("Nelder–Mead needs a positive evaluation budget".into()));
    }
    let max = ising.max_abs_coefficient();
    let scale = if max > 0.0 { max } else { 1.0 };
    let normalized = ising.scaled(scale);
    let mut landscape = Landscape {
        energies: normalized.energies(),
        offset: normalized.offset,
        m: ising.m,
        evaluations: 0,
    };

    let (g1, b1, e1) = landscape.grid(config.gamma_steps, config.beta_steps);
    let (mut gammas, mut betas, mut best) = (vec![g1], vec![b1], e1);

    if p > 1 {
        let mut starts: Vec<Vec<f64>> = Vec::with_capacity(config.starts + 1);
        let mut nested = vec![0.0; 2 * p];
        nested[0] = g1;
        nested[p] = b1;
        starts.push(nested);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for s in 0..config.starts {
            let (dg, db) = if s == 0 {
                (0.75, 0.75)
            } else {
                (rng.random_range(0.2..1.2), rng.random_range(0.2..1.2))
            };
            starts.push(linear_ramp(p, dg, db));
        }

        let (mut best_x, mut best_f) = (starts[0].clone(), e1);
        for start in &starts {
            let r = nelder_mead(|x| landscape.eval(&x[..p], &x[p..]), start, &config.nelder_mead);
            if r.f < best_f {
                best_f = r.f;
                best_x = r.x;
            }
        }
        gammas = best_x[..p].to_vec();
        betas = best_x[p..].to_vec();
        best = best_f;
    }

    Ok(OptimizedParams {
        params: QaoaParams::new(gammas.iter().map(|g| g / scale).collect(), betas)?,
        expectation: best * scale,
        scale,
        evaluations: landscape.evaluations,
    })
}

/// `gamma_i = (i + 1/2)/p * dg`, `beta_i = (1 - (i + 1/2)/p) * db`, flattened as `[gammas.., betas..]`.
fn linear_ramp(p: usize, dg: f64, db: f64) -> Vec<f64> {
    let t = |i: usize| (i as f64 + 0.5) / p as f64;
    (0..p).map(|i| t(i) * dg).chain((0..p).map(|i| (1.0 - t(i)) * db)).collect()
}
