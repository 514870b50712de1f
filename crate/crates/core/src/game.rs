//! Induced subgraph games: the weighted agent graph, coalitions as bitmasks,
//! coalition structures, random instance generation and the JSON game format.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal, Uniform};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Largest supported agent count. A QAOA register over the grand coalition
/// holds `2^MAX_AGENTS` amplitudes.
pub const MAX_AGENTS: usize = 24;

/// Absolute tolerance for comparing coalition values.
pub const VALUE_TOL: f64 = 1e-9;

/// A subset of agents. Bit `i` set means agent `i` (0-based) is a member.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coalition(pub u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    /// The grand coalition over `n` agents.
    pub fn grand(n: usize) -> Self {
        debug_assert!(n <= MAX_AGENTS);
        Coalition(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(agent: usize) -> Self {
        Coalition(1 << agent)
    }

    pub fn from_agents(agents: &[usize]) -> Self {
        Coalition(agents.iter().fold(0, |m, &a| m | (1 << a)))
    }

    #[inline]
    pub fn mask(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, agent: usize) -> bool {
        self.0 >> agent & 1 == 1
    }

    /// Index of the lowest member, if any.
    pub fn lowest(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Member agent indices in ascending order.
    pub fn members(self) -> Members {
        Members(self.0)
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    pub fn intersects(self, other: Coalition) -> bool {
        self.0 & other.0 != 0
    }

    pub fn without(self, other: Coalition) -> Coalition {
        Coalition(self.0 & !other.0)
    }
}

/// Iterator over the members of a [`Coalition`].
#[derive(Clone, Debug)]
pub struct Members(u32);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(i as usize)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

/// Prints with 1-based agent labels, e.g. `{a1,a3}`.
impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, a) in self.members().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "a{}", a + 1)?;
        }
        f.write_str("}")
    }
}

/// An induced subgraph game over a complete weighted graph.
///
/// Weights are stored row-major in an `n x n` matrix that is exactly
/// symmetric with a zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct IsGame {
    n: usize,
    weights: Vec<f64>,
}

impl IsGame {
    /// Builds a game from a full weight matrix, enforcing symmetry and a zero diagonal.
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        let n = weights.len();
        check_agent_count(n)?;
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(Error::parse(
                    format!("weights[{i}]"),
                    format!("expected {n} entries, found {}", row.len()),
                ));
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(n, flat)
    }

    fn from_flat(n: usize, weights: Vec<f64>) -> Result<Self> {
        for i in 0..n {
            for j in 0..n {
                let w = weights[i * n + j];
                if !w.is_finite() {
                    return Err(Error::parse(format!("weights[{i}][{j}]"), "not a finite number"));
                }
                if i == j && w != 0.0 {
                    return Err(Error::parse(
                        format!("weights[{i}][{i}]"),
                        format!("diagonal must be zero (self-loops are not allowed), found {w}"),
                    ));
                }
                if j > i && w != weights[j * n + i] {
                    return Err(Error::parse(
                        format!("weights[{i}][{j}]"),
                        format!("matrix is not symmetric: {w} != weights[{j}][{i}] = {}", weights[j * n + i]),
                    ));
                }
            }
        }
        Ok(IsGame { n, weights })
    }

    /// Builds a game from the upper triangle `w_ij, i < j`, listed row by row.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        check_agent_count(n)?;
        if upper.len() != n * (n - 1) / 2 {
            return Err(Error::Config(format!(
                "expected {} upper-triangular weights for n={n}, found {}",
                n * (n - 1) / 2,
                upper.len()
            )));
        }
        let mut weights = vec![0.0; n * n];
        let mut it = upper.iter();
        for i in 0..n {
            for j in i + 1..n {
                let w = *it.next().unwrap();
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        Self::from_flat(n, weights)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks_exact(self.n)
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.n)
    }

    /// Returns a copy with agents relabelled: agent `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> IsGame {
        assert_eq!(perm.len(), self.n);
        let n = self.n;
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                weights[perm[i] * n + perm[j]] = self.weight(i, j);
            }
        }
        IsGame { n, weights }
    }

    pub fn check_coalition(&self, c: Coalition) -> Result<()> {
        if (c.0 as u64) >> self.n != 0 {
            return Err(Error::Domain(format!(
                "coalition mask {:#x} out of range for {} agents",
                c.0, self.n
            )));
        }
        Ok(())
    }

    /// `v(C)`: the sum of weights over unordered member pairs.
    pub fn coalition_value(&self, c: Coalition) -> Result<f64> {
        self.check_coalition(c)?;
        Ok(self.value_unchecked(c))
    }

    pub(crate) fn value_unchecked(&self, c: Coalition) -> f64 {
        let mut total = 0.0;
        let mut rest = c.0;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let row = &self.weights[i * self.n..(i + 1) * self.n];
            for j in Coalition(rest).members() {
                total += row[j];
            }
        }
        total
    }

    /// Total weight of the edges between two disjoint coalitions.
    pub fn crossing_weight(&self, a: Coalition, b: Coalition) -> f64 {
        a.members()
            .map(|i| b.members().map(|j| self.weight(i, j)).sum::<f64>())
            .sum()
    }

    /// `v(S)` for every mask `S < 2^n`, built incrementally from the lowest member.
    pub fn all_coalition_values(&self) -> Vec<f64> {
        let size = 1usize << self.n;
        let mut values = vec![0.0; size];
        for s in 1..size {
            let low = s.trailing_zeros() as usize;
            let rest = s & (s - 1);
            let row = &self.weights[low * self.n..(low + 1) * self.n];
            let link: f64 = Coalition(rest as u32).members().map(|j| row[j]).sum();
            values[s] = values[rest] + link;
        }
        values
    }
}

fn check_agent_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_AGENTS {
        return Err(Error::Config(format!(
            "agent count must be in 1..={MAX_AGENTS}, got {n}"
        )));
    }
    Ok(())
}

/// A complete partition of the agents into disjoint non-empty coalitions,
/// together with its social welfare.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoalitionStructure {
    coalitions: Vec<Coalition>,
    value: f64,
}

impl CoalitionStructure {
    pub fn new(game: &IsGame, coalitions: Vec<Coalition>) -> Result<Self> {
        validate_partition(game, &coalitions)?;
        let value = coalitions.iter().map(|&c| game.value_unchecked(c)).sum();
        Ok(CoalitionStructure { coalitions, value })
    }

    pub fn grand(game: &IsGame) -> Self {
        let g = game.grand();
        CoalitionStructure {
            coalitions: vec![g],
            value: game.value_unchecked(g),
        }
    }

    pub fn singletons(game: &IsGame) -> Self {
        CoalitionStructure {
            coalitions: (0..game.n()).map(Coalition::singleton).collect(),
            value: 0.0,
        }
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Replaces `parent` with `left` immediately followed by `right`.
    pub(crate) fn replace(&mut self, game: &IsGame, parent: Coalition, left: Coalition, right: Coalition) {
        let pos = self
            .coalitions
            .iter()
            .position(|&c| c == parent)
            .expect("split parent must be in the structure");
        self.coalitions[pos] = left;
        self.coalitions.insert(pos + 1, right);
        self.value = self.coalitions.iter().map(|&c| game.value_unchecked(c)).sum();
    }

    /// Coalitions as 1-based agent label lists.
    pub fn labels(&self) -> Vec<Vec<usize>> {
        self.coalitions
            .iter()
            .map(|c| c.members().map(|a| a + 1).collect())
            .collect()
    }

    /// Coalitions sorted by mask, for order-insensitive comparisons.
    pub fn canonical(&self) -> Vec<Coalition> {
        let mut cs = self.coalitions.clone();
        cs.sort_unstable();
        cs
    }
}

impl fmt::Display for CoalitionStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, c) in self.coalitions.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

fn validate_partition(game: &IsGame, coalitions: &[Coalition]) -> Result<()> {
    let mut seen = Coalition::EMPTY;
    for &c in coalitions {
        game.check_coalition(c)?;
        if c.is_empty() {
            return Err(Error::Invariant("empty coalition in structure".into()));
        }
        if c.intersects(seen) {
            return Err(Error::Invariant(format!("coalition {c} overlaps another coalition")));
        }
        seen = seen.union(c);
    }
    if seen != game.grand() {
        return Err(Error::Invariant(format!(
            "structure does not cover all agents: missing {}",
            game.grand().without(seen)
        )));
    }
    Ok(())
}

/// Social welfare of a structure: the sum of its coalition values.
pub fn cs_value(game: &IsGame, cs: &CoalitionStructure) -> Result<f64> {
    validate_partition(game, cs.coalitions())?;
    Ok(cs.coalitions().iter().map(|&c| game.value_unchecked(c)).sum())
}

/// Edge-weight distribution for random games.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightDistribution {
    Normal { mean: f64, stddev: f64 },
    Uniform { low: f64, high: f64 },
}

impl WeightDistribution {
    pub const STANDARD_NORMAL: Self = WeightDistribution::Normal { mean: 0.0, stddev: 1.0 };
    pub const SYMMETRIC_UNIFORM: Self = WeightDistribution::Uniform { low: -1.0, high: 1.0 };

    pub fn name(&self) -> &'static str {
        match self {
            WeightDistribution::Normal { .. } => "normal",
            WeightDistribution::Uniform { .. } => "uniform",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightDistribution::Normal { mean, stddev } => {
                if !(stddev > 0.0 && stddev.is_finite() && mean.is_finite()) {
                    return Err(Error::Config(format!("normal stddev must be positive, got {stddev}")));
                }
            }
            WeightDistribution::Uniform { low, high } => {
                if !(low < high && low.is_finite() && high.is_finite()) {
                    return Err(Error::Config(format!(
                        "uniform range requires low < high, got [{low}, {high})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Configuration for a random game.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub n: usize,
    pub distribution: WeightDistribution,
    pub seed: u64,
}

/// Draws a fully connected game. The upper triangle is sampled row by row
/// from a ChaCha8 stream seeded with `spec.seed`, so output is reproducible.
pub fn generate_game(spec: &GameSpec) -> Result<IsGame> {
    check_agent_count(spec.n)?;
    spec.distribution.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let count = spec.n * (spec.n - 1) / 2;
    let upper: Vec<f64> = match spec.distribution {
        WeightDistribution::Normal { mean, stddev } => {
            let d = Normal::new(mean, stddev).map_err(|e| Error::Config(e.to_string()))?;
            (0..count).map(|_| d.sample(&mut rng)).collect()
        }
        WeightDistribution::Uniform { low, high } => {
            let d = Uniform::new(low, high).map_err(|e| Error::Config(e.to_string()))?;
            (0..count).map(|_| d.sample(&mut rng)).collect()
        }
    };
    IsGame::from_upper(spec.n, &upper)
}

/// Serializes a game as `{"n": .., "weights": [[..], ..]}`.
pub fn game_to_json(game: &IsGame) -> String {
    game_to_json_with_meta(game, None)
}

/// Like [`game_to_json`], also recording the generator seed and distribution.
pub fn game_to_json_with_meta(game: &IsGame, spec: Option<&GameSpec>) -> String {
    let weights: Vec<&[f64]> = game.rows().collect();
    let mut doc = json!({ "n": game.n(), "weights": weights });
    if let Some(spec) = spec {
        doc["seed"] = json!(spec.seed);
        doc["distribution"] = serde_json::to_value(spec.distribution).expect("distribution serializes");
    }
    serde_json::to_string_pretty(&doc).expect("game serializes")
}

/// A parsed game file with its optional generator metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct GameDocument {
    pub game: IsGame,
    pub seed: Option<u64>,
    pub distribution: Option<WeightDistribution>,
}

/// Parses and validates a game document. Errors name the offending field.
pub fn game_from_json(text: &str) -> Result<IsGame> {
    parse_game_document(text).map(|doc| doc.game)
}

/// Like [`game_from_json`], keeping the optional `seed` and `distribution` fields.
pub fn parse_game_document(text: &str) -> Result<GameDocument> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::parse("<document>", e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::parse("<document>", "expected a JSON object"))?;

    let n = obj
        .get("n")
        .ok_or_else(|| Error::parse("n", "missing"))?
        .as_u64()
        .ok_or_else(|| Error::parse("n", "expected a non-negative integer"))? as usize;
    check_agent_count(n)?;

    let rows = obj
        .get("weights")
        .ok_or_else(|| Error::parse("weights", "missing"))?
        .as_array()
        .ok_or_else(|| Error::parse("weights", "expected an array of rows"))?;
    if rows.len() != n {
        return Err(Error::parse("weights", format!("expected {n} rows, found {}", rows.len())));
    }
    let mut flat = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::parse(format!("weights[{i}]"), "expected an array"))?;
        if row.len() != n {
            return Err(Error::parse(
                format!("weights[{i}]"),
                format!("expected {n} entries, found {}", row.len()),
            ));
        }
        for (j, w) in row.iter().enumerate() {
            flat.push(
                w.as_f64()
                    .ok_or_else(|| Error::parse(format!("weights[{i}][{j}]"), "expected a number"))?,
            );
        }
    }

    let seed = match obj.get("seed") {
        None => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| Error::parse("seed", "expected a non-negative integer"))?),
    };
    let distribution = match obj.get("distribution") {
        None => None,
        Some(v) => {
            let d: WeightDistribution =
                serde_json::from_value(v.clone()).map_err(|e| Error::parse("distribution", e.to_string()))?;
            d.validate().map_err(|e| Error::parse("distribution", e.to_string()))?;
            Some(d)
        }
    };

    Ok(GameDocument { game: IsGame::from_flat(n, flat)?, seed, distribution })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// The four-agent worked example.
    pub(crate) fn four_agent() -> IsGame {
        IsGame::from_upper(4, &[2.0, 6.0, -4.0, -5.0, -1.0, 1.0]).unwrap()
    }

    fn c(agents_1based: &[usize]) -> Coalition {
        Coalition::from_agents(&agents_1based.iter().map(|a| a - 1).collect::<Vec<_>>())
    }

    #[test]
    fn four_agent_coalition_values() {
        let g = four_agent();
        assert_eq!(g.coalition_value(c(&[1, 3])).unwrap(), 6.0);
        assert_eq!(g.coalition_value(c(&[1, 2, 3, 4])).unwrap(), -1.0);
        for a in 1..=4 {
            assert_eq!(g.coalition_value(c(&[a])).unwrap(), 0.0);
        }
        assert_eq!(g.coalition_value(Coalition::EMPTY).unwrap(), 0.0);
    }

    #[test]
    fn coalition_value_rejects_out_of_range_mask() {
        let g = four_agent();
        assert!(matches!(g.coalition_value(Coalition(0b10000)), Err(Error::Domain(_))));
    }

    #[test]
    fn four_agent_structure_values() {
        let g = four_agent();
        let best = CoalitionStructure::new(&g, vec![c(&[1, 3]), c(&[2]), c(&[4])]).unwrap();
        assert_eq!(cs_value(&g, &best).unwrap(), 6.0);
        assert_eq!(best.value(), 6.0);
        let step1 = CoalitionStructure::new(&g, vec![c(&[1, 3]), c(&[2, 4])]).unwrap();
        assert_eq!(step1.value(), 5.0);
        assert_eq!(CoalitionStructure::singletons(&g).value(), 0.0);
        assert_eq!(best.to_string(), "{{a1,a3},{a2},{a4}}");
    }

    #[test]
    fn structure_validation() {
        let g = four_agent();
        assert!(matches!(
            CoalitionStructure::new(&g, vec![c(&[1, 3]), c(&[3, 2, 4])]),
            Err(Error::Invariant(_))
        ));
        assert!(matches!(
            CoalitionStructure::new(&g, vec![c(&[1, 3]), c(&[2])]),
            Err(Error::Invariant(_))
        ));
        assert!(matches!(
            CoalitionStructure::new(&g, vec![c(&[1, 2, 3, 4]), Coalition::EMPTY]),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn all_values_match_direct_sum() {
        let g = generate_game(&GameSpec { n: 7, distribution: WeightDistribution::STANDARD_NORMAL, seed: 11 }).unwrap();
        let table = g.all_coalition_values();
        for s in 0..(1u32 << 7) {
            assert!((table[s as usize] - g.coalition_value(Coalition(s)).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GameSpec { n: 4, distribution: WeightDistribution::SYMMETRIC_UNIFORM, seed: 7 };
        assert_eq!(generate_game(&spec).unwrap(), generate_game(&spec).unwrap());
        let other = GameSpec { seed: 8, ..spec };
        assert_ne!(generate_game(&spec).unwrap(), generate_game(&other).unwrap());
    }

    #[test]
    fn generated_matrix_is_symmetric_with_zero_diagonal() {
        let g = generate_game(&GameSpec { n: 6, distribution: WeightDistribution::STANDARD_NORMAL, seed: 3 }).unwrap();
        for i in 0..6 {
            assert_eq!(g.weight(i, i), 0.0);
            for j in 0..6 {
                assert_eq!(g.weight(i, j).to_bits(), g.weight(j, i).to_bits());
            }
        }
    }

    #[test]
    fn uniform_sample_mean_is_near_zero() {
        // 45 draws from U(-1,1): variance 1/3, so the mean has sd ~0.086 and
        // +-0.5 is a ~5.8 sigma envelope.
        for seed in 0..50 {
            let g = generate_game(&GameSpec { n: 10, distribution: WeightDistribution::SYMMETRIC_UNIFORM, seed }).unwrap();
            let mean = g.coalition_value(g.grand()).unwrap() / 45.0;
            assert!(mean.abs() <= 0.5, "seed {seed}: mean {mean}");
        }
    }

    #[test]
    fn generation_rejects_bad_config() {
        let dist = WeightDistribution::STANDARD_NORMAL;
        assert!(matches!(generate_game(&GameSpec { n: 0, distribution: dist, seed: 0 }), Err(Error::Config(_))));
        assert!(matches!(generate_game(&GameSpec { n: 25, distribution: dist, seed: 0 }), Err(Error::Config(_))));
        let bad = WeightDistribution::Normal { mean: 0.0, stddev: 0.0 };
        assert!(matches!(generate_game(&GameSpec { n: 3, distribution: bad, seed: 0 }), Err(Error::Config(_))));
        let bad = WeightDistribution::Uniform { low: 1.0, high: 1.0 };
        assert!(matches!(generate_game(&GameSpec { n: 3, distribution: bad, seed: 0 }), Err(Error::Config(_))));
    }

    #[test]
    fn json_round_trip() {
        let g = four_agent();
        assert_eq!(game_from_json(&game_to_json(&g)).unwrap(), g);
        let spec = GameSpec { n: 9, distribution: WeightDistribution::STANDARD_NORMAL, seed: 5 };
        let g = generate_game(&spec).unwrap();
        let doc = parse_game_document(&game_to_json_with_meta(&g, Some(&spec))).unwrap();
        assert_eq!(doc, GameDocument { game: g, seed: Some(5), distribution: Some(spec.distribution) });
    }

    #[test]
    fn json_rejects_asymmetry() {
        let text = r#"{"n": 2, "weights": [[0, 1.5], [1.0, 0]]}"#;
        match game_from_json(text) {
            Err(Error::Parse { field, message }) => {
                assert_eq!(field, "weights[0][1]");
                assert!(message.contains("symmetric"));
            }
            other => panic!("expected symmetry error, got {other:?}"),
        }
    }

    #[test]
    fn json_rejects_bad_documents() {
        assert!(matches!(game_from_json(r#"{"n": 0, "weights": []}"#), Err(Error::Config(_))));
        assert!(matches!(
            game_from_json(r#"{"n": 2, "weights": [[1, 0], [0, 0]]}"#),
            Err(Error::Parse { field, .. }) if field == "weights[0][0]"
        ));
        assert!(matches!(
            game_from_json(r#"{"n": 2, "weights": [[0, 1]]}"#),
            Err(Error::Parse { field, .. }) if field == "weights"
        ));
        assert!(matches!(
            game_from_json(r#"{"n": 2, "weights": [[0, "x"], [1, 0]]}"#),
            Err(Error::Parse { field, .. }) if field == "weights[0][1]"
        ));
        assert!(matches!(game_from_json("{nope"), Err(Error::Parse { .. })));
        assert!(matches!(
            game_from_json(r#"{"weights": []}"#),
            Err(Error::Parse { field, .. }) if field == "n"
        ));
    }
}
