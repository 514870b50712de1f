use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_dims, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::qubo::IsingProblem;

/// Qubits handled together inside one cache-sized block by the mixer.
const BLOCK_QUBITS: usize = 12;

/// The `2^m` complex amplitudes of an `m`-qubit register. Basis index bit `k`
/// is the computational state of qubit `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    m: usize,
    amps: Vec<Complex64>,
}

fn check_qubits(m: usize) -> Result<()> {
    if m == 0 || m > MAX_QUBITS {
        return Err(Error::Config(format!("register size must be in 1..={MAX_QUBITS}, got {m}")));
    }
    Ok(())
}

impl Statevector {
    /// `H^{⊗m} |0…0⟩`: every amplitude equals `2^{-m/2}`.
    pub fn uniform(m: usize) -> Result<Self> {
        check_qubits(m)?;
        let a = (-(m as f64) / 2.0).exp2();
        Ok(Statevector { m, amps: vec![Complex64::new(a, 0.0); 1 << m] })
    }

    pub fn basis(m: usize, x: u32) -> Result<Self> {
        check_qubits(m)?;
        if (x as u64) >> m != 0 {
            return Err(Error::Domain(format!("basis index {x} out of range for {m} qubits")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << m];
        amps[x as usize] = Complex64::new(1.0, 0.0);
        Ok(Statevector { m, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two; the vector is not renormalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::Domain(format!("amplitude count {len} is not a power of two >= 2")));
        }
        let m = len.trailing_zeros() as usize;
        check_qubits(m)?;
        Ok(Statevector { m, amps })
    }

    pub fn qubits(&self) -> usize {
        self.m
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multiplies amplitude `z` by `exp(-i gamma energies[z])`.
    pub fn apply_phases(&mut self, energies: &[f64], gamma: f64) -> Result<()> {
        if energies.len() != self.amps.len() {
            return Err(Error::Dimension { expected: self.amps.len(), actual: energies.len() });
        }
        if gamma == 0.0 {
            return Ok(());
        }
        for (a, &e) in self.amps.iter_mut().zip(energies) {
            let (s, c) = (-gamma * e).sin_cos();
            *a *= Complex64::new(c, s);
        }
        Ok(())
    }

    /// `exp(-i gamma H_C)` as a diagonal sweep over the Ising energies (offset dropped).
    pub fn apply_cost_layer(&mut self, ising: &IsingProblem, gamma: f64) -> Result<()> {
        check_dims(self, ising)?;
        self.apply_phases(&ising.energies(), gamma)
    }

    /// `RX(2 beta)` on every qubit.
    pub fn apply_mixer_layer(&mut self, beta: f64) {
        if beta == 0.0 {
            return;
        }
        let (s, c) = beta.sin_cos();
        let low = self.m.min(BLOCK_QUBITS);
        for block in self.amps.chunks_exact_mut(1 << low) {
            for q in 0..low {
                rx_pairs(block, 1 << q, c, s);
            }
        }
        for q in low..self.m {
            rx_pairs(&mut self.amps, 1 << q, c, s);
        }
    }

    /// `RX(theta) = exp(-i theta X / 2)` on one qubit.
    pub fn apply_rx(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        rx_pairs(&mut self.amps, 1 << qubit, c, s);
    }

    /// `RZ(theta) = diag(exp(-i theta/2), exp(i theta/2))` on one qubit.
    pub fn apply_rz(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let zero = Complex64::new(c, -s);
        let one = Complex64::new(c, s);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i >> qubit & 1 == 0 { zero } else { one };
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    pub fn apply_hadamard(&mut self, qubit: usize) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let stride = 1 << qubit;
        for chunk in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi) {
                let (x, y) = (*a, *b);
                *a = (x + y) * h;
                *b = (x - y) * h;
            }
        }
    }

    /// Draws `shots` computational-basis measurements from `|a_z|^2`.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<Vec<u32>> {
        let dist = WeightedIndex::new(self.amps.iter().map(|a| a.norm_sqr()))
            .map_err(|e| Error::Domain(format!("cannot sample register: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..shots).map(|_| dist.sample(&mut rng) as u32).collect())
    }

    /// `sum_z |a_z|^2 d_z` for a diagonal observable `d`.
    pub fn expectation_diagonal(&self, diagonal: &[f64]) -> Result<f64> {
        if diagonal.len() != self.amps.len() {
            return Err(Error::Dimension { expected: self.amps.len(), actual: diagonal.len() });
        }
        Ok(self.amps.iter().zip(diagonal).map(|(a, d)| a.norm_sqr() * d).sum())
    }
}

/// `(a, b) -> (c a - i s b, -i s a + c b)` for all pairs differing in the stride bit.
#[inline]
fn rx_pairs(amps: &mut [Complex64], stride: usize, c: f64, s: f64) {
    for chunk in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi) {
            let (x, y) = (*a, *b);
            *a = Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re);
            *b = Complex64::new(s * x.im + c * y.re, c * y.im - s * x.re);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::IsingProblem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn random_state(m: usize, rng: &mut impl Rng) -> Statevector {
        let mut amps: Vec<Complex64> = (0..1 << m)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Statevector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn uniform_register() {
        let sv = Statevector::uniform(1).unwrap();
        for a in sv.amplitudes() {
            assert!((a.re - FRAC_1_SQRT_2).abs() < 1e-15 && a.im == 0.0);
        }
        let sv = Statevector::uniform(3).unwrap();
        assert_eq!(sv.amplitudes().len(), 8);
        assert!(sv.amplitudes().iter().all(|a| (a.re - 2f64.powf(-1.5)).abs() < 1e-15));
        assert!((sv.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(Statevector::uniform(24).is_ok());
        assert!(matches!(Statevector::uniform(25), Err(Error::Config(_))));
        assert!(matches!(Statevector::uniform(0), Err(Error::Config(_))));
    }

    #[test]
    fn hadamards_prepare_uniform_state() {
        let mut sv = Statevector::basis(5, 0).unwrap();
        (0..5).for_each(|q| sv.apply_hadamard(q));
        let u = Statevector::uniform(5).unwrap();
        for (a, b) in sv.amplitudes().iter().zip(u.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn cost_layer_is_a_diagonal_unitary() {
        let ising = IsingProblem::new(3, vec![(0, 1, 0.7), (1, 2, -1.3)], vec![0.0, 0.2, 0.0], 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let before = random_state(3, &mut rng);
        let mut sv = before.clone();
        sv.apply_cost_layer(&ising, 0.0).unwrap();
        assert_eq!(sv, before);
        sv.apply_cost_layer(&ising, 1.234).unwrap();
        for (a, b) in sv.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
        assert!((sv.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_coupling_relative_phase() {
        let j = -0.8;
        let ising = IsingProblem::new(2, vec![(0, 1, j)], vec![0.0, 0.0], 0.0).unwrap();
        let mut sv = Statevector::uniform(2).unwrap();
        sv.apply_cost_layer(&ising, PI / (2.0 * j.abs())).unwrap();
        let a = sv.amplitudes();
        // |00> aligned, |01> anti-aligned.
        let rel = (a[1] / a[0]).arg().abs();
        assert!((rel - PI).abs() < 1e-9, "relative phase {rel}");
    }

    #[test]
    fn mixer_identity_and_full_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let before = random_state(4, &mut rng);
        let mut sv = before.clone();
        sv.apply_mixer_layer(0.0);
        assert_eq!(sv, before);

        let mut sv = Statevector::basis(4, 0).unwrap();
        sv.apply_mixer_layer(PI / 2.0);
        let p = sv.probabilities();
        assert!((p[15] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn blocked_mixer_matches_per_qubit_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = BLOCK_QUBITS + 2;
        let start = random_state(m, &mut rng);
        let mut fast = start.clone();
        fast.apply_mixer_layer(0.37);
        let mut slow = start;
        (0..m).for_each(|q| slow.apply_rx(q, 0.74));
        for (a, b) in fast.amplitudes().iter().zip(slow.amplitudes()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn mixer_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let m = rng.random_range(1..=8);
            let mut sv = random_state(m, &mut rng);
            sv.apply_mixer_layer(rng.random_range(-4.0..4.0));
            assert!((sv.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cnot_permutes_basis_states() {
        let mut sv = Statevector::basis(3, 0b001).unwrap();
        sv.apply_cnot(0, 2);
        assert_eq!(sv.probabilities()[0b101], 1.0);
        sv.apply_cnot(1, 0);
        assert_eq!(sv.probabilities()[0b101], 1.0);
    }
}
