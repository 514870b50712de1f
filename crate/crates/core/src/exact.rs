//! Exact baselines: the optimal-split search over all bipartitions of a
//! coalition, the `O(3^n)` subset dynamic program for the optimal coalition
//! structure, and a partition enumerator used as a test oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Coalition, CoalitionStructure, IsGame, VALUE_TOL};

/// Largest agent count accepted by [`dp_optimal_cs`].
pub const DP_MAX_AGENTS: usize = 24;

/// Largest agent count accepted by [`enumerate_all_partitions`].
pub const ENUMERATION_MAX_AGENTS: usize = 10;

/// A bipartition `{left, right}` of a parent coalition.
///
/// `left` always holds the lowest-index agent of the parent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub parent: Coalition,
    pub left: Coalition,
    pub right: Coalition,
    /// `v(left) + v(right)`.
    pub combined_value: f64,
    /// Whether the split is at least as good as keeping the parent whole.
    pub improved: bool,
}

/// Split-acceptance rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Acceptance {
    /// `v(C) + v(C̄) >= v(S)` within [`VALUE_TOL`].
    #[default]
    Weak,
    /// `v(C) + v(C̄) > v(S) + VALUE_TOL`.
    Strict,
}

impl Acceptance {
    pub fn accepts(self, combined: f64, parent_value: f64) -> bool {
        match self {
            Acceptance::Weak => combined >= parent_value - VALUE_TOL,
            Acceptance::Strict => combined > parent_value + VALUE_TOL,
        }
    }
}

impl SplitResult {
    /// Builds a split from one side, orienting it canonically.
    pub fn from_side(game: &IsGame, parent: Coalition, side: Coalition, rule: Acceptance) -> Result<Self> {
        game.check_coalition(parent)?;
        if side.is_empty() || side == parent || side.without(parent) != Coalition::EMPTY {
            return Err(Error::Domain(format!("{side} is not a proper non-empty subset of {parent}")));
        }
        let other = parent.without(side);
        let (left, right) = if side.lowest() < other.lowest() { (side, other) } else { (other, side) };
        let combined_value = game.value_unchecked(left) + game.value_unchecked(right);
        Ok(SplitResult {
            parent,
            left,
            right,
            combined_value,
            improved: rule.accepts(combined_value, game.value_unchecked(parent)),
        })
    }
}

fn check_splittable(game: &IsGame, s: Coalition) -> Result<()> {
    game.check_coalition(s)?;
    if s.len() < 2 {
        return Err(Error::Domain(format!("coalition {s} has fewer than two agents and cannot split")));
    }
    Ok(())
}

/// Exhaustive search for the bipartition of `s` maximizing `v(C) + v(C̄)`.
///
/// Ties go to the numerically smallest left mask.
pub fn best_split_bruteforce(game: &IsGame, s: Coalition) -> Result<SplitResult> {
    best_split_bruteforce_counted(game, s).map(|(split, _)| split)
}

/// [`best_split_bruteforce`], also returning how many bipartitions were scored.
pub fn best_split_bruteforce_counted(game: &IsGame, s: Coalition) -> Result<(SplitResult, u64)> {
    check_splittable(game, s)?;
    let low = s.0 & s.0.wrapping_neg();
    let rest = s.0 ^ low;

    let mut visited = 0u64;
    let mut best: Option<(u32, f64)> = None;
    // Ascending submask order of `rest`, excluding `rest` itself (empty right side).
    let mut sub = 0u32;
    loop {
        if sub == rest {
            break;
        }
        let left = low | sub;
        let combined = game.value_unchecked(Coalition(left)) + game.value_unchecked(Coalition(s.0 ^ left));
        visited += 1;
        if best.is_none_or(|(_, v)| combined > v) {
            best = Some((left, combined));
        }
        sub = (sub.wrapping_sub(rest)) & rest;
    }

    let (left, combined_value) = best.expect("|s| >= 2 yields at least one bipartition");
    let split = SplitResult {
        parent: s,
        left: Coalition(left),
        right: Coalition(s.0 ^ left),
        combined_value,
        improved: Acceptance::Weak.accepts(combined_value, game.value_unchecked(s)),
    };
    Ok((split, visited))
}

/// Optimal coalition structure by dynamic programming over subsets:
/// `f(S) = max(v(S), max_T f(T) + f(S \ T))` where `T` ranges over proper
/// submasks of `S` containing its lowest agent.
///
/// Ties prefer keeping `S` whole, then the smallest `T`.
pub fn dp_optimal_cs(game: &IsGame) -> Result<CoalitionStructure> {
    let n = game.n();
    if n > DP_MAX_AGENTS {
        return Err(Error::Config(format!("dynamic program supports at most {DP_MAX_AGENTS} agents, got {n}")));
    }
    let size = 1usize << n;
    let mut best = game.all_coalition_values();
    // `choice[S] == S` means "keep whole"; otherwise the left part T.
    let mut choice: Vec<u32> = (0..size as u32).collect();

    for s in 1..size as u32 {
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        if rest == 0 {
            continue;
        }
        let mut split_best = f64::NEG_INFINITY;
        let mut split_t = s;
        // Descending over submasks of `rest`; `>=` keeps the smallest T on ties.
        let mut sub = (rest - 1) & rest;
        loop {
            let t = low | sub;
            let cand = best[t as usize] + best[(s ^ t) as usize];
            if cand >= split_best {
                split_best = cand;
                split_t = t;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        if split_best > best[s as usize] {
            best[s as usize] = split_best;
            choice[s as usize] = split_t;
        }
    }

    let mut coalitions = Vec::new();
    let mut stack = vec![game.grand().0];
    while let Some(s) = stack.pop() {
        let t = choice[s as usize];
        if t == s {
            coalitions.push(Coalition(s));
        } else {
            stack.push(s ^ t);
            stack.push(t);
        }
    }
    coalitions.sort_unstable_by_key(|c| c.lowest());
    CoalitionStructure::new(game, coalitions)
}

/// Result of exhaustive partition enumeration.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub best_value: f64,
    pub best: CoalitionStructure,
    /// Number of partitions visited; equals the Bell number of `n`.
    pub visited: u64,
}

/// Scores every set partition of the agents, generated as restricted-growth
/// strings. Only for small `n`: Bell(10) = 115975.
pub fn enumerate_all_partitions(game: &IsGame) -> Result<Enumeration> {
    let n = game.n();
    if n > ENUMERATION_MAX_AGENTS {
        return Err(Error::Size(format!(
            "partition enumeration supports at most {ENUMERATION_MAX_AGENTS} agents, got {n}"
        )));
    }
    let values = game.all_coalition_values();

    // rgs[i] = block of agent i; maxes[i] = max(rgs[0..=i]).
    let mut rgs = vec![0usize; n];
    let mut maxes = vec![0usize; n];
    let mut blocks = vec![0u32; n];
    let mut visited = 0u64;
    let mut best_value = f64::NEG_INFINITY;
    let mut best_rgs = rgs.clone();

    loop {
        visited += 1;
        blocks.iter_mut().for_each(|b| *b = 0);
        for (agent, &b) in rgs.iter().enumerate() {
            blocks[b] |= 1 << agent;
        }
        let value: f64 = blocks.iter().filter(|&&b| b != 0).map(|&b| values[b as usize]).sum();
        if value > best_value {
            best_value = value;
            best_rgs.copy_from_slice(&rgs);
        }

        // Next restricted-growth string: bump the rightmost position that may grow.
        let mut i = n - 1;
        loop {
            if i == 0 {
                let cs = structure_from_rgs(game, &best_rgs)?;
                return Ok(Enumeration { best_value, best: cs, visited });
            }
            if rgs[i] <= maxes[i - 1] {
                rgs[i] += 1;
                maxes[i] = maxes[i - 1].max(rgs[i]);
                for j in i + 1..n {
                    rgs[j] = 0;
                    maxes[j] = maxes[i];
                }
                break;
            }
            i -= 1;
        }
    }
}

fn structure_from_rgs(game: &IsGame, rgs: &[usize]) -> Result<CoalitionStructure> {
    let k = rgs.iter().max().map_or(0, |m| m + 1);
    let mut blocks = vec![0u32; k];
    for (agent, &b) in rgs.iter().enumerate() {
        blocks[b] |= 1 << agent;
    }
    CoalitionStructure::new(game, blocks.into_iter().map(Coalition).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::four_agent;
    use crate::game::{generate_game, GameSpec, WeightDistribution};

    fn c(agents_1based: &[usize]) -> Coalition {
        Coalition::from_agents(&agents_1based.iter().map(|a| a - 1).collect::<Vec<_>>())
    }

    #[test]
    fn four_agent_grand_split() {
        let g = four_agent();
        let (split, visited) = best_split_bruteforce_counted(&g, g.grand()).unwrap();
        assert_eq!(split.left, c(&[1, 3]));
        assert_eq!(split.right, c(&[2, 4]));
        assert_eq!(split.combined_value, 5.0);
        assert!(split.improved);
        assert_eq!(visited, 7);
    }

    #[test]
    fn four_agent_pair_split_is_rejected() {
        let g = four_agent();
        let split = best_split_bruteforce(&g, c(&[1, 3])).unwrap();
        assert_eq!(split.combined_value, 0.0);
        assert!(!split.improved);
    }

    #[test]
    fn zero_game_ties_to_lowest_singleton() {
        let g = IsGame::from_upper(5, &[0.0; 10]).unwrap();
        let s = c(&[2, 3, 5]);
        let split = best_split_bruteforce(&g, s).unwrap();
        assert_eq!(split.combined_value, 0.0);
        assert_eq!(split.left, c(&[2]));
        assert_eq!(split.right, c(&[3, 5]));
    }

    #[test]
    fn singleton_split_is_a_domain_error() {
        let g = four_agent();
        assert!(matches!(best_split_bruteforce(&g, c(&[2])), Err(Error::Domain(_))));
        assert!(matches!(best_split_bruteforce(&g, Coalition(1 << 9)), Err(Error::Domain(_))));
    }

    #[test]
    fn visit_count_is_half_the_power_set_minus_one() {
        let g = generate_game(&GameSpec { n: 9, distribution: WeightDistribution::STANDARD_NORMAL, seed: 1 }).unwrap();
        for s in [0b11u32, 0b1011, 0b1_0110_1101, 0b1_1111_1111] {
            let (split, visited) = best_split_bruteforce_counted(&g, Coalition(s)).unwrap();
            let k = s.count_ones();
            assert_eq!(visited, (1u64 << (k - 1)) - 1);
            assert!(split.left.contains(Coalition(s).lowest().unwrap()));
            assert_eq!(split.left.union(split.right), Coalition(s));
            assert!(!split.left.intersects(split.right));
        }
    }

    #[test]
    fn dp_solves_four_agent() {
        let g = four_agent();
        let cs = dp_optimal_cs(&g).unwrap();
        assert_eq!(cs.value(), 6.0);
        assert_eq!(cs.canonical(), vec![c(&[2]), c(&[1, 3]), c(&[4])]);
    }

    #[test]
    fn dp_keeps_superadditive_games_whole() {
        let g = IsGame::from_upper(6, &[0.5; 15]).unwrap();
        let cs = dp_optimal_cs(&g).unwrap();
        assert_eq!(cs.coalitions(), &[g.grand()]);
        assert_eq!(cs.value(), 7.5);
    }

    #[test]
    fn dp_handles_one_and_two_agents() {
        let g = IsGame::new(vec![vec![0.0]]).unwrap();
        assert_eq!(dp_optimal_cs(&g).unwrap().coalitions(), &[Coalition(1)]);
        let g = IsGame::from_upper(2, &[-1.0]).unwrap();
        assert_eq!(dp_optimal_cs(&g).unwrap().value(), 0.0);
    }

    #[test]
    fn dp_matches_partition_enumeration_at_seven_agents() {
        for seed in 0..20 {
            for dist in [WeightDistribution::STANDARD_NORMAL, WeightDistribution::SYMMETRIC_UNIFORM] {
                let g = generate_game(&GameSpec { n: 7, distribution: dist, seed }).unwrap();
                let e = enumerate_all_partitions(&g).unwrap();
                assert_eq!(e.visited, 877);
                let dp = dp_optimal_cs(&g).unwrap();
                assert!((dp.value() - e.best_value).abs() < 1e-9, "seed {seed}");
                assert!(dp.value() >= 0.0);
            }
        }
    }

    #[test]
    fn enumeration_counts_bell_numbers() {
        let bell = [1u64, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
        for n in 1..=8 {
            let g = IsGame::from_upper(n, &vec![1.0; n * (n - 1) / 2]).unwrap();
            assert_eq!(enumerate_all_partitions(&g).unwrap().visited, bell[n], "n={n}");
        }
        let g = four_agent();
        let e = enumerate_all_partitions(&g).unwrap();
        assert_eq!(e.best_value, 6.0);
        assert_eq!(e.best.canonical(), vec![c(&[2]), c(&[1, 3]), c(&[4])]);
    }

    #[test]
    fn enumeration_single_agent_and_cap() {
        let g = IsGame::new(vec![vec![0.0]]).unwrap();
        let e = enumerate_all_partitions(&g).unwrap();
        assert_eq!((e.best_value, e.visited), (0.0, 1));
        assert_eq!(e.best.coalitions(), &[Coalition(1)]);
        let g = IsGame::from_upper(11, &[0.0; 55]).unwrap();
        assert!(matches!(enumerate_all_partitions(&g), Err(Error::Size(_))));
    }
}
