use super::{check_dims, Statevector};
use crate::error::{Error, Result};
use crate::qubo::IsingProblem;

/// Best bipartition found by measuring a QAOA register.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampledSplit {
    /// Canonical bitstring (bit 0 clear).
    pub x: u32,
    /// Exact cut weight `E(x) + offset`.
    pub value: f64,
    /// Whether every sample was trivial and the single-flip fallback was used.
    pub fallback: bool,
}

/// Draws `shots` basis states from `|amplitude|^2` and returns the sampled
/// non-trivial string with the smallest exact cut value.
///
/// All-zeros and all-ones samples are discarded. If nothing else was drawn, the
/// best single-bit flip of the first sample is returned instead.
pub fn sample_and_select(sv: &Statevector, ising: &IsingProblem, shots: usize, seed: u64) -> Result<SampledSplit> {
    check_dims(sv, ising)?;
    if shots == 0 {
        return Err(Error::Config("at least one shot is required".into()));
    }
    let m = ising.m;
    let full = ((1u64 << m) - 1) as u32;
    let samples = sv.sample(shots, seed)?;

    let canonical = |x: u32| if x & 1 == 1 { !x & full } else { x };
    let cut = |x: u32| ising.energy(x) + ising.offset;

    let mut first = None;
    let mut best: Option<(u32, f64)> = None;
    let mut seen = std::collections::HashSet::new();
    for x in samples {
        first.get_or_insert(x);
        if x == 0 || x == full || !seen.insert(canonical(x)) {
            continue;
        }
        let c = canonical(x);
        let v = cut(x);
        if best.is_none_or(|(bx, bv)| v < bv || (v == bv && c < bx)) {
            best = Some((c, v));
        }
    }

    if let Some((x, value)) = best {
        return Ok(SampledSplit { x, value, fallback: false });
    }
    let start = first.expect("shots >= 1");
    let (x, value) = (0..m)
        .map(|k| {
            let x = canonical(start ^ (1 << k));
            (x, cut(x))
        })
        .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 || (c.1 == b.1 && c.0 < b.0) { c } else { b });
    Ok(SampledSplit { x, value, fallback: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::four_agent;
    use crate::qubo::{build_mincut_qubo, qubo_to_ising, solve_qubo_exhaustive};

    fn four_agent_ising() -> IsingProblem {
        let g = four_agent();
        qubo_to_ising(&build_mincut_qubo(&g, g.grand()).unwrap())
    }

    #[test]
    fn basis_state_is_returned_exactly() {
        let ising = four_agent_ising();
        let sv = Statevector::basis(4, 0b1010).unwrap();
        let s = sample_and_select(&sv, &ising, 10, 0).unwrap();
        assert_eq!(s, SampledSplit { x: 0b1010, value: -6.0, fallback: false });
        // Odd strings are reported in canonical orientation.
        let sv = Statevector::basis(4, 0b0101).unwrap();
        assert_eq!(sample_and_select(&sv, &ising, 3, 1).unwrap().x, 0b1010);
    }

    #[test]
    fn uniform_sampling_finds_optimal_cut() {
        let ising = four_agent_ising();
        let g = four_agent();
        let exact = solve_qubo_exhaustive(&build_mincut_qubo(&g, g.grand()).unwrap()).unwrap();
        let sv = Statevector::uniform(4).unwrap();
        for seed in 0..20 {
            let s = sample_and_select(&sv, &ising, 1024, seed).unwrap();
            assert_eq!((s.x, s.value), (exact.x, exact.value));
        }
    }

    #[test]
    fn trivial_samples_fall_back_to_single_flips() {
        let ising = four_agent_ising();
        let sv = Statevector::basis(4, 0).unwrap();
        let s = sample_and_select(&sv, &ising, 5, 0).unwrap();
        assert!(s.fallback);
        // Flips of 0000: isolate one agent. Cut of isolating agent k is its row sum.
        let best = [4.0, -4.0, 2.0, -4.0].into_iter().fold(f64::INFINITY, f64::min);
        assert_eq!(s.value, best);
        assert_eq!(s.x, 0b0010);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let ising = four_agent_ising();
        let sv = crate::qaoa::run_qaoa(&ising, &crate::qaoa::QaoaParams::new(vec![0.3], vec![0.2]).unwrap()).unwrap();
        assert_eq!(sample_and_select(&sv, &ising, 3, 77).unwrap(), sample_and_select(&sv, &ising, 3, 77).unwrap());
        assert!(sample_and_select(&sv, &ising, 0, 77).is_err());
    }
}
