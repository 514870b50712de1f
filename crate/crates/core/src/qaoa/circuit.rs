//! The explicit gate-level QAOA circuit: Hadamards, then per layer a
//! CNOT–RZ–CNOT ladder per coupling, an RZ per qubit for the local fields,
//! and an RX per qubit for the mixer.

use serde::{Deserialize, Serialize};

use super::{QaoaParams, Statevector};
use crate::error::{Error, Result};
use crate::qubo::IsingProblem;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    Cnot { control: usize, target: usize },
    Rz(usize, f64),
    Rx(usize, f64),
}

impl Gate {
    pub fn apply(self, sv: &mut Statevector) {
        match self {
            Gate::H(q) => sv.apply_hadamard(q),
            Gate::Cnot { control, target } => sv.apply_cnot(control, target),
            Gate::Rz(q, theta) => sv.apply_rz(q, theta),
            Gate::Rx(q, theta) => sv.apply_rx(q, theta),
        }
    }
}

/// Gates of one cost layer `exp(-i gamma H_C)`.
pub fn cost_layer_gates(ising: &IsingProblem, gamma: f64) -> Vec<Gate> {
    let mut gates = Vec::new();
    for (k, l, j) in ising.nonzero_couplings() {
        gates.push(Gate::Cnot { control: k, target: l });
        gates.push(Gate::Rz(l, 2.0 * gamma * j));
        gates.push(Gate::Cnot { control: k, target: l });
    }
    for (q, &h) in ising.fields.iter().enumerate() {
        gates.push(Gate::Rz(q, 2.0 * gamma * h));
    }
    gates
}

/// The full circuit, starting from `|0…0⟩`.
pub fn build_circuit(ising: &IsingProblem, params: &QaoaParams) -> Vec<Gate> {
    let m = ising.m;
    let mut gates: Vec<Gate> = (0..m).map(Gate::H).collect();
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        gates.extend(cost_layer_gates(ising, gamma));
        gates.extend((0..m).map(|q| Gate::Rx(q, 2.0 * beta)));
    }
    gates
}

/// Gate counts for a `p`-layer circuit on an Ising problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitReport {
    pub qubits: usize,
    pub layers: usize,
    pub hadamard_count: usize,
    pub cnot_count: usize,
    pub rz_count: usize,
    pub rx_count: usize,
    pub total: usize,
}

/// Counts the gates of [`build_circuit`]: `m` Hadamards and, per layer,
/// `2e` CNOTs, `e + m` RZs and `m` RXs for `e` non-zero couplings.
///
/// The per-qubit RZs are counted even when the local field is zero.
pub fn circuit_report(ising: &IsingProblem, p: usize) -> Result<CircuitReport> {
    if p == 0 {
        return Err(Error::Config("circuit needs at least one layer".into()));
    }
    let params = QaoaParams::zeros(p)?;
    let mut report = CircuitReport { qubits: ising.m, layers: p, ..CircuitReport::default() };
    for gate in build_circuit(ising, &params) {
        match gate {
            Gate::H(_) => report.hadamard_count += 1,
            Gate::Cnot { .. } => report.cnot_count += 1,
            Gate::Rz(..) => report.rz_count += 1,
            Gate::Rx(..) => report.rx_count += 1,
        }
        report.total += 1;
    }
    Ok(report)
}

impl Default for CircuitReport {
    fn default() -> Self {
        CircuitReport { qubits: 0, layers: 0, hadamard_count: 0, cnot_count: 0, rz_count: 0, rx_count: 0, total: 0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::four_agent;
    use crate::game::{Coalition, IsGame};
    use crate::qaoa::run_qaoa;
    use crate::qubo::{build_mincut_qubo, qubo_to_ising};

    fn complete_ising(m: usize) -> IsingProblem {
        let upper: Vec<f64> = (0..m * (m - 1) / 2).map(|i| 0.5 + i as f64).collect();
        let g = IsGame::from_upper(m, &upper).unwrap();
        qubo_to_ising(&build_mincut_qubo(&g, g.grand()).unwrap())
    }

    #[test]
    fn four_qubit_single_layer_count() {
        let r = circuit_report(&complete_ising(4), 1).unwrap();
        assert_eq!(r.total, 30);
        assert_eq!((r.hadamard_count, r.cnot_count, r.rz_count, r.rx_count), (4, 12, 10, 4));
    }

    #[test]
    fn twenty_qubit_three_layer_count() {
        let r = circuit_report(&complete_ising(20), 3).unwrap();
        assert_eq!((r.cnot_count, r.rz_count, r.rx_count, r.hadamard_count), (1140, 630, 60, 20));
    }

    #[test]
    fn zero_layers_rejected() {
        assert!(circuit_report(&complete_ising(3), 0).is_err());
    }

    #[test]
    fn zero_couplings_are_not_counted() {
        let g = IsGame::from_upper(3, &[1.0, 0.0, 2.0]).unwrap();
        let ising = qubo_to_ising(&build_mincut_qubo(&g, g.grand()).unwrap());
        let r = circuit_report(&ising, 2).unwrap();
        assert_eq!(r.cnot_count, 2 * 2 * 2);
    }

    #[test]
    fn gate_level_circuit_matches_simulator() {
        let ising = qubo_to_ising(&build_mincut_qubo(&four_agent(), Coalition::grand(4)).unwrap());
        let params = QaoaParams::new(vec![0.21, -0.4], vec![0.63, 1.1]).unwrap();
        let mut sv = Statevector::basis(4, 0).unwrap();
        for g in build_circuit(&ising, &params) {
            g.apply(&mut sv);
        }
        let fast = run_qaoa(&ising, &params).unwrap();
        for (a, b) in sv.amplitudes().iter().zip(fast.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
