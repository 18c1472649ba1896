//! Exhaustive lower-bound certificates.
//!
//! A certificate for size `d` enumerates every DFA with fewer than `d` states
//! and shows that each one misclassifies at least one witness word. Failing
//! on a finite witness set is enough to rule a machine out.
//!
//! Unary machines are enumerated in tail+cycle form: states `0..k` form the
//! tail, `k..m` the cycle, and accepting sets range over all subsets. Every
//! unary DFA's reachable part has this shape for some `k + t ≤ m`. Binary
//! machines are enumerated as raw transition tables with every start state.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{min_dfa_for, minimal_state_count, Dfa};
use crate::error::{param, Error, Result};
use crate::parallel;
use crate::promise::{Classification, PromiseSpec};
use crate::word::Word;

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Witnesses `a^{iN}`/`a^{iN+l}` for `i ≤ 2d + 2`: past any tail shorter
/// than `d` and through a full period of any cycle shorter than `d`.
pub fn default_unary_witness_bound(d: u64) -> u64 {
    2 * d + 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessBounds {
    pub i_max: u64,
    pub j_max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeCount {
    pub states: u64,
    pub machines: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CertificateResult {
    Certified,
    /// A machine below the claimed size that classifies every witness
    /// correctly.
    CounterexampleFound { dfa: Dfa },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalityCertificate {
    pub spec: PromiseSpec,
    pub claimed_d: u64,
    pub witness_bounds: WitnessBounds,
    pub budget: u64,
    pub machines_checked: u64,
    pub per_size: Vec<SizeCount>,
    /// The `claimed_d`-state construction classifies every witness correctly.
    pub construction_solves: bool,
    pub result: CertificateResult,
}

impl MinimalityCertificate {
    pub fn is_certified(&self) -> bool {
        self.result == CertificateResult::Certified
    }
}

/// Result of searching all machines with fewer than `below` states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub machines_checked: u64,
    pub per_size: Vec<SizeCount>,
    /// First solver in enumeration order, if any.
    pub solver: Option<Dfa>,
}

fn unary_count(m: u64) -> u128 {
    // m tail lengths, 2^m accepting subsets
    if m >= 120 {
        u128::MAX
    } else {
        (m as u128) << m
    }
}

fn binary_count(m: u64) -> u128 {
    let mut tables: u128 = 1;
    for _ in 0..2 * m {
        tables = tables.saturating_mul(m as u128);
    }
    let subsets = if m < 127 { 1u128 << m } else { u128::MAX };
    (m as u128).saturating_mul(tables).saturating_mul(subsets)
}

fn check_budget(below: u64, budget: u64, count: fn(u64) -> u128) -> Result<()> {
    let required = (1..below).map(count).fold(0u128, u128::saturating_add);
    if required > budget as u128 {
        return Err(Error::Budget { required, budget });
    }
    Ok(())
}

/// Splits the witnesses into (word, expected accept).
fn witnesses(spec: &PromiseSpec, bounds: WitnessBounds) -> Result<Vec<(Word, bool)>> {
    let w: Vec<_> = spec
        .enumerate_instances(bounds.i_max, bounds.j_max)
        .into_iter()
        .map(|(w, c)| (w, c == Classification::Yes))
        .collect();
    if w.is_empty() {
        return Err(param("empty witness set"));
    }
    Ok(w)
}

/// Whether some accepting set separates the witnesses, given the state
/// each witness ends in. Returns the first such subset in numeric order.
fn first_separating_subset(m: u64, yes_mask: u64, no_mask: u64) -> Option<u64> {
    (0..1u64 << m).find(|&f| yes_mask & !f == 0 && no_mask & f == 0)
}

/// Searches every unary DFA (tail+cycle form) with fewer than `below` states.
pub fn search_unary_solvers(spec: &PromiseSpec, below: u64, bounds: WitnessBounds, budget: u64) -> Result<SearchOutcome> {
    if !matches!(spec, PromiseSpec::Unary(_)) {
        return Err(param("unary search needs a unary promise"));
    }
    check_budget(below, budget, unary_count)?;
    let witnesses: Vec<(u64, bool)> = witnesses(spec, bounds)?.into_iter().map(|(w, y)| (w.len(), y)).collect();
    let mut checked = 0u64;
    let mut per_size = Vec::new();
    for m in 1..below {
        let mut size_checked = 0u64;
        for tail in 0..m {
            let cycle = m - tail;
            let state_of = |n: u64| if n < tail { n } else { tail + (n - tail) % cycle };
            let (mut yes, mut no) = (0u64, 0u64);
            for &(n, is_yes) in &witnesses {
                let bit = 1u64 << state_of(n);
                if is_yes {
                    yes |= bit;
                } else {
                    no |= bit;
                }
            }
            if let Some(f) = first_separating_subset(m, yes, no) {
                size_checked += f + 1;
                checked += size_checked;
                per_size.push(SizeCount { states: m, machines: size_checked });
                let delta = (0..m).map(|s| vec![if s + 1 < m { s as usize + 1 } else { tail as usize }]).collect();
                let accepting = (0..m).filter(|s| f >> s & 1 == 1).map(|s| s as usize);
                let dfa = Dfa::new(vec!['a'], delta, 0, accepting)?;
                return Ok(SearchOutcome { machines_checked: checked, per_size, solver: Some(dfa) });
            }
            size_checked += 1 << m;
        }
        checked += size_checked;
        per_size.push(SizeCount { states: m, machines: size_checked });
    }
    Ok(SearchOutcome { machines_checked: checked, per_size, solver: None })
}

// `f^k(s)` for every state and any `k` in O(1) after O(n²) setup.
struct PowerTable {
    // orbit[s] = s, f(s), f²(s), … up to the first repeat
    orbit: Vec<Vec<usize>>,
    // index in orbit[s] where the cycle starts
    cycle_start: Vec<usize>,
}

impl PowerTable {
    fn new(map: &[usize]) -> Self {
        let n = map.len();
        let mut orbit = Vec::with_capacity(n);
        let mut cycle_start = Vec::with_capacity(n);
        for s in 0..n {
            let mut pos = vec![usize::MAX; n];
            let mut path = Vec::with_capacity(n);
            let mut x = s;
            while pos[x] == usize::MAX {
                pos[x] = path.len();
                path.push(x);
                x = map[x];
            }
            cycle_start.push(pos[x]);
            orbit.push(path);
        }
        Self { orbit, cycle_start }
    }

    fn apply(&self, s: usize, k: u64) -> usize {
        let path = &self.orbit[s];
        let mu = self.cycle_start[s] as u64;
        let k = if k < path.len() as u64 { k } else { mu + (k - mu) % (path.len() as u64 - mu) };
        path[k as usize]
    }
}

/// Decodes table index `t` into `delta[state] = [on a, on b]`.
fn decode_table(m: u64, mut t: u64) -> Vec<[usize; 2]> {
    let mut delta = vec![[0usize; 2]; m as usize];
    for row in delta.iter_mut() {
        for cell in row.iter_mut() {
            *cell = (t % m) as usize;
            t /= m;
        }
    }
    delta
}

/// Searches every binary DFA with fewer than `below` states, all start
/// states, all transition tables and all accepting sets.
pub fn search_binary_solvers(spec: &PromiseSpec, below: u64, bounds: WitnessBounds, budget: u64) -> Result<SearchOutcome> {
    if !matches!(spec, PromiseSpec::Binary(_)) {
        return Err(param("binary search needs a binary promise"));
    }
    check_budget(below, budget, binary_count)?;
    let mut witnesses: Vec<(u64, u64, bool)> = Vec::new();
    for (w, is_yes) in self::witnesses(spec, bounds)? {
        witnesses.push((w.count('a'), w.count('b'), is_yes));
    }
    let mut checked = 0u64;
    let mut per_size = Vec::new();
    for m in 1..below {
        let tables = m.pow(2 * m as u32);
        let subsets = 1u64 << m;
        // Enumeration order: start state, then table index, then subset.
        let found = parallel::install(|| {
            (0..m * tables)
                .into_par_iter()
                .map(|idx| {
                    let (start, table) = ((idx / tables) as usize, idx % tables);
                    let delta = decode_table(m, table);
                    let on_a: Vec<usize> = delta.iter().map(|r| r[0]).collect();
                    let on_b: Vec<usize> = delta.iter().map(|r| r[1]).collect();
                    let (pa, pb) = (PowerTable::new(&on_a), PowerTable::new(&on_b));
                    let (mut yes, mut no) = (0u64, 0u64);
                    for &(i, j, is_yes) in &witnesses {
                        let bit = 1u64 << pb.apply(pa.apply(start, i), j);
                        if is_yes {
                            yes |= bit;
                        } else {
                            no |= bit;
                        }
                    }
                    first_separating_subset(m, yes, no).map(|f| (idx, start, delta, f))
                })
                .find_first(Option::is_some)
                .flatten()
        });
        match found {
            Some((idx, start, delta, f)) => {
                let size_checked = idx * subsets + f + 1;
                checked += size_checked;
                per_size.push(SizeCount { states: m, machines: size_checked });
                let delta = delta.into_iter().map(|r| r.to_vec()).collect();
                let accepting = (0..m).filter(|s| f >> s & 1 == 1).map(|s| s as usize);
                let dfa = Dfa::new(vec!['a', 'b'], delta, start, accepting)?;
                return Ok(SearchOutcome { machines_checked: checked, per_size, solver: Some(dfa) });
            }
            None => {
                let size_checked = m * tables * subsets;
                checked += size_checked;
                per_size.push(SizeCount { states: m, machines: size_checked });
            }
        }
    }
    Ok(SearchOutcome { machines_checked: checked, per_size, solver: None })
}

fn certificate(spec: &PromiseSpec, bounds: WitnessBounds, budget: u64, outcome: SearchOutcome, d: u64) -> Result<MinimalityCertificate> {
    let construction_solves = min_dfa_for(spec)?.solves(spec, bounds.i_max, bounds.j_max)?;
    let result = match outcome.solver {
        None => CertificateResult::Certified,
        Some(dfa) => CertificateResult::CounterexampleFound { dfa },
    };
    Ok(MinimalityCertificate {
        spec: *spec,
        claimed_d: d,
        witness_bounds: bounds,
        budget,
        machines_checked: outcome.machines_checked,
        per_size: outcome.per_size,
        construction_solves,
        result,
    })
}

/// Certifies that no unary DFA with fewer than `d = smallest_modulus` states
/// solves `spec` on the witnesses `i ≤ i_max`.
pub fn certify_minimality_unary(spec: &PromiseSpec, i_max: u64, budget: u64) -> Result<MinimalityCertificate> {
    let (d, _) = minimal_state_count(spec)?;
    let bounds = WitnessBounds { i_max, j_max: 0 };
    let outcome = search_unary_solvers(spec, d, bounds, budget)?;
    certificate(spec, bounds, budget, outcome, d)
}

/// Certifies that no binary DFA below the formula size solves `spec` on the
/// witnesses with `i ≤ i_max`, `j ≤ j_max`.
pub fn certify_minimality_binary(spec: &PromiseSpec, i_max: u64, j_max: u64, budget: u64) -> Result<MinimalityCertificate> {
    let (d, _) = minimal_state_count(spec)?;
    let bounds = WitnessBounds { i_max, j_max };
    let outcome = search_binary_solvers(spec, d, bounds, budget)?;
    certificate(spec, bounds, budget, outcome, d)
}

/// Dispatches on the family. `i_max = None` picks the unary default
/// `2d + 2`, or the promise default for binary families.
pub fn certify_minimality(spec: &PromiseSpec, i_max: Option<u64>, j_max: u64, budget: u64) -> Result<MinimalityCertificate> {
    match spec {
        PromiseSpec::Unary(_) => {
            let (d, _) = minimal_state_count(spec)?;
            certify_minimality_unary(spec, i_max.unwrap_or_else(|| default_unary_witness_bound(d)), budget)
        }
        PromiseSpec::Binary(_) => {
            certify_minimality_binary(spec, i_max.unwrap_or(crate::promise::DEFAULT_I_MAX), j_max, budget)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(binary_count(1), 2);
        assert_eq!(binary_count(2), 128);
        assert_eq!(binary_count(4), 4u128.pow(8) * 16 * 4);
        assert_eq!(unary_count(3), 24);
        assert_eq!(binary_count(40), u128::MAX);
    }

    #[test]
    fn power_table_matches_iteration() {
        let map = [2usize, 0, 3, 3];
        let table = PowerTable::new(&map);
        for s in 0..4 {
            for k in 0..20 {
                assert_eq!(table.apply(s, k), super::super::iterate(|x| map[x], s, k, 4));
            }
        }
    }

    #[test]
    fn decode_covers_all_tables() {
        let all: std::collections::HashSet<_> = (0..16).map(|t| decode_table(2, t)).collect();
        assert_eq!(all.len(), 16);
    }

    #[test]
    fn unary_certificates() {
        let spec = PromiseSpec::a_nl(7, 3).unwrap();
        let c = certify_minimality_unary(&spec, 16, DEFAULT_BUDGET).unwrap();
        assert!(c.is_certified() && c.construction_solves);
        assert_eq!(c.claimed_d, 7);
        // Σ_{m<7} m·2^m
        assert_eq!(c.machines_checked, (1..7u64).map(|m| m << m).sum::<u64>());

        let c = certify_minimality_unary(&PromiseSpec::a_nl(15, 5).unwrap(), 16, DEFAULT_BUDGET).unwrap();
        assert!(c.is_certified());
        assert_eq!(c.claimed_d, 3);

        let c = certify_minimality_unary(&PromiseSpec::a_nl(6, 3).unwrap(), 16, DEFAULT_BUDGET).unwrap();
        assert!(c.is_certified());
        assert_eq!((c.claimed_d, c.machines_checked), (2, 2));
    }

    #[test]
    fn searching_one_size_up_finds_a_solver() {
        let spec = PromiseSpec::a_nl(15, 5).unwrap();
        let bounds = WitnessBounds { i_max: 16, j_max: 0 };
        let found = search_unary_solvers(&spec, 4, bounds, DEFAULT_BUDGET).unwrap();
        let dfa = found.solver.unwrap();
        assert_eq!(dfa.num_states(), 3);
        assert!(dfa.solves(&spec, 16, 0).unwrap());

        let spec = PromiseSpec::bl(4).unwrap();
        let bounds = WitnessBounds { i_max: 16, j_max: 0 };
        let found = search_binary_solvers(&spec, 4, bounds, DEFAULT_BUDGET).unwrap();
        let dfa = found.solver.unwrap();
        assert_eq!(dfa.num_states(), 3);
        assert!(dfa.solves(&spec, 16, 0).unwrap());
    }

    #[test]
    fn binary_certificates() {
        let c = certify_minimality_binary(&PromiseSpec::bl(4).unwrap(), 64, 8, DEFAULT_BUDGET).unwrap();
        assert!(c.is_certified() && c.construction_solves);
        assert_eq!(c.claimed_d, 3);
        assert_eq!(c.per_size, vec![SizeCount { states: 1, machines: 2 }, SizeCount { states: 2, machines: 128 }]);
        assert_eq!(c.machines_checked, 130);

        let c = certify_minimality_binary(&PromiseSpec::bl(1).unwrap(), 64, 8, DEFAULT_BUDGET).unwrap();
        assert!(c.is_certified());
        assert_eq!((c.claimed_d, c.machines_checked), (2, 2));
    }

    #[test]
    fn budget_is_explicit() {
        let err = certify_minimality_binary(&PromiseSpec::bnl(5, 2).unwrap(), 64, 8, DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
        let err = certify_minimality_unary(&PromiseSpec::a_nl(31, 7).unwrap(), 64, DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn family_mismatch_is_rejected() {
        let bounds = WitnessBounds { i_max: 4, j_max: 0 };
        assert!(search_unary_solvers(&PromiseSpec::bl(2).unwrap(), 3, bounds, DEFAULT_BUDGET).is_err());
        assert!(search_binary_solvers(&PromiseSpec::a_nl(5, 2).unwrap(), 3, bounds, DEFAULT_BUDGET).is_err());
    }
}
