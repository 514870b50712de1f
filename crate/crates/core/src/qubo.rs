//! The weighted min-cut of a coalition's induced subgraph as a QUBO, its
//! Ising form, and classical QUBO solvers.
//!
//! Local variable `k` of a problem refers to the `k`-th lowest member of the
//! coalition. A bitstring `x` (bit `k` = `x_k`) assigns members with `x_k = 0`
//! to the left side and `x_k = 1` to the right side; canonical strings keep
//! bit 0 clear so that the lowest agent is on the left.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{Acceptance, SplitResult};
use crate::game::{Coalition, IsGame};

/// Default size above which [`solve_qubo`] switches from exhaustive search to annealing.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 20;

/// Hard cap for exhaustive QUBO search.
pub const EXHAUSTIVE_MAX_VARS: usize = 24;

/// `minimize  sum_k q_kk x_k + sum_{k<l} q_kl x_k x_l` over `x in {0,1}^m`.
///
/// Stored as a dense upper-triangular matrix; entries below the diagonal are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct QuboProblem {
    m: usize,
    q: Vec<f64>,
    index_map: Vec<usize>,
}

impl QuboProblem {
    /// Builds a problem from an upper-triangular matrix given as full rows.
    /// Lower-triangular entries are ignored.
    pub fn from_upper(rows: &[Vec<f64>], index_map: Vec<usize>) -> Result<Self> {
        let m = rows.len();
        if m < 2 {
            return Err(Error::Domain(format!("QUBO needs at least two variables, got {m}")));
        }
        if index_map.len() != m || rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension { expected: m, actual: index_map.len() });
        }
        let mut q = vec![0.0; m * m];
        for k in 0..m {
            for l in k..m {
                q[k * m + l] = rows[k][l];
            }
        }
        Ok(QuboProblem { m, q, index_map })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// `q_kl` for `k <= l`; symmetric access for `k > l`.
    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        if k <= l {
            self.q[k * self.m + l]
        } else {
            self.q[l * self.m + k]
        }
    }

    /// Local variable index to global agent index.
    pub fn index_map(&self) -> &[usize] {
        &self.index_map
    }

    pub fn objective(&self, x: u32) -> f64 {
        let m = self.m;
        let mut total = 0.0;
        for k in 0..m {
            if x >> k & 1 == 1 {
                let row = &self.q[k * m..(k + 1) * m];
                total += row[k];
                for l in k + 1..m {
                    if x >> l & 1 == 1 {
                        total += row[l];
                    }
                }
            }
        }
        total
    }

    /// Change in objective when flipping bit `k` of `x`.
    fn flip_delta(&self, x: u32, k: usize) -> f64 {
        let mut linear = self.get(k, k);
        for l in 0..self.m {
            if l != k && x >> l & 1 == 1 {
                linear += self.get(k, l);
            }
        }
        if x >> k & 1 == 1 {
            -linear
        } else {
            linear
        }
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.q.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    fn full_mask(&self) -> u32 {
        ((1u64 << self.m) - 1) as u32
    }

    /// True for the all-zeros and all-ones strings, which leave one side empty.
    pub fn is_trivial(&self, x: u32) -> bool {
        x == 0 || x == self.full_mask()
    }

    /// The equivalent string with bit 0 clear.
    pub fn canonical(&self, x: u32) -> u32 {
        if x & 1 == 1 {
            !x & self.full_mask()
        } else {
            x
        }
    }

    /// Global coalitions `(x_k = 0 side, x_k = 1 side)`.
    pub fn decode(&self, x: u32) -> (Coalition, Coalition) {
        let mut zero = 0u32;
        let mut one = 0u32;
        for (k, &agent) in self.index_map.iter().enumerate() {
            if x >> k & 1 == 1 {
                one |= 1 << agent;
            } else {
                zero |= 1 << agent;
            }
        }
        (Coalition(zero), Coalition(one))
    }

    /// The split of the original coalition encoded by a non-trivial `x`.
    pub fn decode_split(&self, game: &IsGame, x: u32, rule: Acceptance) -> Result<SplitResult> {
        if self.is_trivial(x) {
            return Err(Error::Domain("trivial bitstring leaves one side empty".into()));
        }
        let (zero, one) = self.decode(x);
        SplitResult::from_side(game, zero.union(one), zero, rule)
    }
}

/// Min-cut QUBO over the members of `s`: `q_kk = sum_{l != k} w_kl`,
/// `q_kl = -2 w_kl`, so the objective of `x` is the weight crossing the cut.
pub fn build_mincut_qubo(game: &IsGame, s: Coalition) -> Result<QuboProblem> {
    game.check_coalition(s)?;
    if s.len() < 2 {
        return Err(Error::Domain(format!("coalition {s} has fewer than two agents and cannot split")));
    }
    let index_map: Vec<usize> = s.members().collect();
    let m = index_map.len();
    let mut q = vec![0.0; m * m];
    for (k, &a) in index_map.iter().enumerate() {
        for (l, &b) in index_map.iter().enumerate() {
            if k == l {
                continue;
            }
            let w = game.weight(a, b);
            q[k * m + k] += w;
            if k < l {
                q[k * m + l] = -2.0 * w;
            }
        }
    }
    Ok(QuboProblem { m, q, index_map })
}

/// `E(z) = sum_{k<l} J_kl z_k z_l + sum_k h_k z_k`; `E(z) + offset` reproduces the
/// QUBO objective under `x_k = (1 - z_k) / 2`.
///
/// Basis index bit `k` equal to 0 corresponds to spin `z_k = +1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingProblem {
    pub m: usize,
    /// Upper-triangular couplings, row-major `m x m`; only `k < l` entries are used.
    couplings: Vec<f64>,
    pub fields: Vec<f64>,
    pub offset: f64,
}

impl IsingProblem {
    pub fn new(m: usize, couplings: Vec<(usize, usize, f64)>, fields: Vec<f64>, offset: f64) -> Result<Self> {
        if fields.len() != m {
            return Err(Error::Dimension { expected: m, actual: fields.len() });
        }
        let mut j = vec![0.0; m * m];
        for (k, l, v) in couplings {
            if k == l || k >= m || l >= m {
                return Err(Error::Domain(format!("invalid coupling ({k}, {l}) for {m} spins")));
            }
            let (a, b) = if k < l { (k, l) } else { (l, k) };
            j[a * m + b] += v;
        }
        Ok(IsingProblem { m, couplings: j, fields, offset })
    }

    #[inline]
    pub fn coupling(&self, k: usize, l: usize) -> f64 {
        if k < l {
            self.couplings[k * self.m + l]
        } else {
            self.couplings[l * self.m + k]
        }
    }

    /// Non-zero couplings `(k, l, J_kl)` with `k < l`.
    pub fn nonzero_couplings(&self) -> Vec<(usize, usize, f64)> {
        let m = self.m;
        let mut out = Vec::new();
        for k in 0..m {
            for l in k + 1..m {
                let v = self.couplings[k * m + l];
                if v != 0.0 {
                    out.push((k, l, v));
                }
            }
        }
        out
    }

    /// Energy without the offset for the basis state with index `x`.
    pub fn energy(&self, x: u32) -> f64 {
        let spin = |k: usize| if x >> k & 1 == 0 { 1.0 } else { -1.0 };
        let m = self.m;
        let mut e = 0.0;
        for k in 0..m {
            let zk = spin(k);
            e += self.fields[k] * zk;
            for l in k + 1..m {
                e += self.couplings[k * m + l] * zk * spin(l);
            }
        }
        e
    }

    /// `E(x)` for every basis index, built incrementally from the lowest set bit.
    pub fn energies(&self) -> Vec<f64> {
        let m = self.m;
        let size = 1usize << m;
        let mut out = vec![0.0; size];
        out[0] = self.energy(0);
        for x in 1..size {
            let k = x.trailing_zeros() as usize;
            let prev = x & (x - 1);
            // Flip spin k from +1 (in prev) to -1.
            let mut local = self.fields[k];
            for l in 0..m {
                if l != k {
                    let zl = if prev >> l & 1 == 0 { 1.0 } else { -1.0 };
                    local += self.coupling(k, l) * zl;
                }
            }
            out[x] = out[prev] - 2.0 * local;
        }
        out
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.couplings
            .iter()
            .chain(&self.fields)
            .fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// All couplings and fields divided by `scale`; the offset is divided too.
    pub fn scaled(&self, scale: f64) -> IsingProblem {
        IsingProblem {
            m: self.m,
            couplings: self.couplings.iter().map(|v| v / scale).collect(),
            fields: self.fields.iter().map(|v| v / scale).collect(),
            offset: self.offset / scale,
        }
    }
}

/// Substitutes `x_k = (1 - z_k) / 2` into the QUBO.
pub fn qubo_to_ising(q: &QuboProblem) -> IsingProblem {
    let m = q.m();
    let mut couplings = vec![0.0; m * m];
    let mut fields = vec![0.0; m];
    let mut offset = 0.0;
    for k in 0..m {
        let d = q.get(k, k);
        // q_kk x_k = q_kk/2 - (q_kk/2) z_k
        offset += d / 2.0;
        fields[k] -= d / 2.0;
        for l in k + 1..m {
            // q_kl x_k x_l = (q_kl/4)(1 - z_k - z_l + z_k z_l)
            let v = q.get(k, l);
            offset += v / 4.0;
            fields[k] -= v / 4.0;
            fields[l] -= v / 4.0;
            couplings[k * m + l] = v / 4.0;
        }
    }
    IsingProblem { m, couplings, fields, offset }
}

/// A QUBO minimizer result: the canonical bitstring and its objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuboSolution {
    pub x: u32,
    pub value: f64,
}

/// Exhaustive minimization over non-trivial strings with bit 0 clear.
/// Ties go to the smallest bitstring.
pub fn solve_qubo_exhaustive(q: &QuboProblem) -> Result<QuboSolution> {
    let m = q.m();
    if m > EXHAUSTIVE_MAX_VARS {
        return Err(Error::Size(format!(
            "exhaustive QUBO search supports at most {EXHAUSTIVE_MAX_VARS} variables, got {m}"
        )));
    }
    // Gray-code walk over bits 1..m keeps bit 0 clear and costs O(m) per step.
    let free = m - 1;
    let mut x = 0u32;
    let mut value = 0.0;
    let mut best = QuboSolution { x: 0, value: f64::INFINITY };
    for step in 1u64..(1u64 << free) {
        let bit = step.trailing_zeros() as usize + 1;
        value += q.flip_delta(x, bit);
        x ^= 1 << bit;
        if value < best.value || (value == best.value && x < best.x) {
            best = QuboSolution { x, value };
        }
    }
    // Recompute to drop accumulated rounding from the incremental walk.
    best.value = q.objective(best.x);
    Ok(best)
}

/// Simulated annealing schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    /// Starting temperature; `None` uses `max|q|`.
    pub t_start: Option<f64>,
    /// Final temperature as a fraction of the starting one.
    pub t_end_ratio: f64,
    pub temperature_steps: usize,
    pub sweeps_per_temperature: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            t_start: None,
            t_end_ratio: 1e-3,
            temperature_steps: 30,
            sweeps_per_temperature: 100,
            restarts: 20,
            seed: 0,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if self.temperature_steps == 0 || self.sweeps_per_temperature == 0 || self.restarts == 0 {
            return Err(Error::Config("annealing needs at least one temperature, sweep and restart".into()));
        }
        if !(self.t_end_ratio > 0.0 && self.t_end_ratio <= 1.0) {
            return Err(Error::Config(format!(
                "temperature ladder must descend: end ratio {} not in (0, 1]",
                self.t_end_ratio
            )));
        }
        if let Some(t) = self.t_start {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("starting temperature must be positive, got {t}")));
            }
        }
        Ok(())
    }

    fn ladder(&self, q: &QuboProblem) -> Vec<f64> {
        let t0 = self.t_start.unwrap_or_else(|| q.max_abs_coefficient().max(1e-12));
        let steps = self.temperature_steps;
        if steps == 1 {
            return vec![t0];
        }
        let ratio = self.t_end_ratio.powf(1.0 / (steps - 1) as f64);
        (0..steps).map(|i| t0 * ratio.powi(i as i32)).collect()
    }
}

/// Single-spin-flip Metropolis annealing over a geometric temperature ladder.
/// Returns the best non-trivial string seen across all restarts.
pub fn solve_qubo_annealing(q: &QuboProblem, config: &AnnealConfig) -> Result<QuboSolution> {
    config.validate()?;
    let m = q.m();
    let full = q.full_mask();
    let ladder = config.ladder(q);
    let mut best = QuboSolution { x: 0, value: f64::INFINITY };

    for restart in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, restart as u64));
        let mut x = rng.random::<u32>() & full;
        if q.is_trivial(x) {
            x ^= 1 << rng.random_range(0..m);
        }
        let mut value = q.objective(x);
        consider(q, x, value, &mut best);
        for &t in &ladder {
            for _ in 0..config.sweeps_per_temperature {
                for k in 0..m {
                    let delta = q.flip_delta(x, k);
                    if delta <= 0.0 || rng.random::<f64>() < (-delta / t).exp() {
                        x ^= 1 << k;
                        value += delta;
                        if !q.is_trivial(x) && value < best.value {
                            consider(q, x, value, &mut best);
                        }
                    }
                }
            }
        }
    }
    best.value = q.objective(best.x);
    Ok(best)
}

fn consider(q: &QuboProblem, x: u32, value: f64, best: &mut QuboSolution) {
    if q.is_trivial(x) {
        return;
    }
    let c = q.canonical(x);
    if value < best.value || (value == best.value && c < best.x) {
        *best = QuboSolution { x: c, value };
    }
}

/// Exhaustive search up to `exhaustive_cap` variables, annealing beyond.
pub fn solve_qubo(q: &QuboProblem, exhaustive_cap: usize, anneal: &AnnealConfig) -> Result<QuboSolution> {
    if q.m() <= exhaustive_cap.min(EXHAUSTIVE_MAX_VARS) {
        solve_qubo_exhaustive(q)
    } else {
        solve_qubo_annealing(q, anneal)
    }
}

/// SplitMix64 step: independent per-stream seeds from a base seed and an index.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
