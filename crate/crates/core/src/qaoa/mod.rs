//! Dense statevector simulation of p-layer QAOA for diagonal Ising cost
//! Hamiltonians, with gate accounting, angle optimization and shot sampling.

mod circuit;
mod nelder_mead;
mod optimize;
mod sample;
mod statevector;

use serde::{Deserialize, Serialize};

pub use circuit::{build_circuit, circuit_report, CircuitReport, Gate};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use optimize::{optimize_params, OptimizedParams, OptimizerConfig};
pub use sample::{sample_and_select, SampledSplit};
pub use statevector::Statevector;

use crate::error::{Error, Result};
use crate::qubo::IsingProblem;

/// Largest simulated register.
pub const MAX_QUBITS: usize = 24;

/// Per-layer cost angles `gammas` and mixer angles `betas`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(Error::Config(format!(
                "QAOA needs p >= 1 layers with matching angle counts, got {} gammas and {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(QaoaParams { gammas, betas })
    }

    pub fn zeros(p: usize) -> Result<Self> {
        Self::new(vec![0.0; p], vec![0.0; p])
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }
}

/// Uniform superposition followed by `p` alternating cost and mixer layers.
pub fn run_qaoa(ising: &IsingProblem, params: &QaoaParams) -> Result<Statevector> {
    let energies = ising.energies();
    let mut sv = Statevector::uniform(ising.m)?;
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        sv.apply_phases(&energies, gamma)?;
        sv.apply_mixer_layer(beta);
    }
    Ok(sv)
}

/// `sum_z |a_z|^2 (E(z) + offset)`.
pub fn expectation(sv: &Statevector, ising: &IsingProblem) -> Result<f64> {
    check_dims(sv, ising)?;
    Ok(sv.expectation_diagonal(&ising.energies())? + ising.offset)
}

pub(crate) fn check_dims(sv: &Statevector, ising: &IsingProblem) -> Result<()> {
    if sv.qubits() != ising.m {
        return Err(Error::Dimension { expected: ising.m, actual: sv.qubits() });
    }
    Ok(())
}
