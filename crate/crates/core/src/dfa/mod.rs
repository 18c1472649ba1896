//! Deterministic automata: size formulas, the concrete minimal machines and
//! exhaustive minimality certificates.

mod certify;

pub use certify::{
    certify_minimality, certify_minimality_binary, certify_minimality_unary, default_unary_witness_bound,
    search_binary_solvers, search_unary_solvers, CertificateResult, MinimalityCertificate, SearchOutcome,
    SizeCount, WitnessBounds, DEFAULT_BUDGET,
};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{input, param, Error, Result};
use crate::promise::{BinaryPromise, Classification, PromiseSpec, UnaryPromise};
use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DfaJson", into = "DfaJson")]
pub struct Dfa {
    num_states: usize,
    alphabet: Vec<char>,
    // delta[state][symbol index]
    delta: Vec<Vec<usize>>,
    start: usize,
    accepting: BTreeSet<usize>,
}

impl Dfa {
    pub fn new(
        alphabet: Vec<char>,
        delta: Vec<Vec<usize>>,
        start: usize,
        accepting: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let num_states = delta.len();
        if num_states == 0 {
            return Err(param("a DFA needs at least one state"));
        }
        if start >= num_states {
            return Err(param(format!("start state {start} out of range")));
        }
        let distinct: BTreeSet<char> = alphabet.iter().copied().collect();
        if distinct.len() != alphabet.len() {
            return Err(param("alphabet symbols must be distinct"));
        }
        for (s, row) in delta.iter().enumerate() {
            if row.len() != alphabet.len() {
                return Err(param(format!("state {s} has {} transitions, expected {}", row.len(), alphabet.len())));
            }
            if let Some(&t) = row.iter().find(|&&t| t >= num_states) {
                return Err(param(format!("transition from {s} to missing state {t}")));
            }
        }
        let accepting: BTreeSet<usize> = accepting.into_iter().collect();
        if let Some(&f) = accepting.iter().find(|&&f| f >= num_states) {
            return Err(param(format!("accepting state {f} out of range")));
        }
        Ok(Self { num_states, alphabet, delta, start, accepting })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    pub fn transition(&self, state: usize, sym: char) -> Result<usize> {
        let idx = self.symbol_index(sym)?;
        Ok(self.delta[state][idx])
    }

    fn symbol_index(&self, sym: char) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|&c| c == sym)
            .ok_or_else(|| input(format!("symbol '{sym}' is not in the DFA alphabet {:?}", self.alphabet)))
    }

    /// `δ̂(start, word)`. Each run of equal symbols costs `O(num_states)`
    /// regardless of its length.
    pub fn final_state(&self, word: &Word) -> Result<usize> {
        let mut state = self.start;
        for &(sym, count) in word.runs() {
            let idx = self.symbol_index(sym)?;
            state = iterate(|s| self.delta[s][idx], state, count, self.num_states);
        }
        Ok(state)
    }

    pub fn run(&self, word: &Word) -> Result<bool> {
        Ok(self.accepting.contains(&self.final_state(word)?))
    }

    /// Whether the DFA accepts every yes-instance and rejects every
    /// no-instance of `spec` within the given bounds.
    pub fn solves(&self, spec: &PromiseSpec, i_max: u64, j_max: u64) -> Result<bool> {
        for (word, label) in spec.enumerate_instances(i_max, j_max) {
            if self.run(&word)? != (label == Classification::Yes) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `step^k(start)` on a functional graph with `n` nodes, skipping whole
/// cycles once one is detected.
pub(crate) fn iterate(step: impl Fn(usize) -> usize, start: usize, k: u64, n: usize) -> usize {
    let mut first_seen = vec![u64::MAX; n];
    let mut s = start;
    let mut t = 0u64;
    while t < k {
        if first_seen[s] != u64::MAX {
            let period = t - first_seen[s];
            for _ in 0..(k - t) % period {
                s = step(s);
            }
            return s;
        }
        first_seen[s] = t;
        s = step(s);
        t += 1;
    }
    s
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DfaJson {
    states: usize,
    alphabet: Vec<String>,
    delta: Vec<Vec<usize>>,
    start: usize,
    accepting: Vec<usize>,
}

impl From<Dfa> for DfaJson {
    fn from(d: Dfa) -> Self {
        DfaJson {
            states: d.num_states,
            alphabet: d.alphabet.iter().map(|c| c.to_string()).collect(),
            delta: d.delta,
            start: d.start,
            accepting: d.accepting.into_iter().collect(),
        }
    }
}

impl TryFrom<DfaJson> for Dfa {
    type Error = Error;
    fn try_from(raw: DfaJson) -> Result<Self> {
        if raw.delta.len() != raw.states {
            return Err(input(format!("delta has {} rows but states = {}", raw.delta.len(), raw.states)));
        }
        let mut alphabet = Vec::new();
        for s in &raw.alphabet {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => alphabet.push(c),
                _ => return Err(input(format!("alphabet entries must be single symbols, got {s:?}"))),
            }
        }
        Dfa::new(alphabet, raw.delta, raw.start, raw.accepting)
    }
}

/// Smallest `d ≥ 2` with `d | N` and `d ∤ l`.
pub fn smallest_modulus(modulus: u64, l: u64) -> Result<u64> {
    check_unary_params(modulus, l)?;
    (2..=modulus)
        .find(|d| modulus.is_multiple_of(*d) && !l.is_multiple_of(*d))
        .ok_or_else(|| Error::Internal(format!("no divisor of {modulus} fails to divide {l}")))
}

/// Smallest `d ≥ 2` such that `d ∤ (pN + l)` for every integer `p`.
///
/// `(pN + l) mod d` is periodic in `p` with period dividing `d`, so checking
/// `p ∈ [0, d)` covers every integer `p`. This search never looks at the
/// divisors of `N` and serves as the independent route to the same number.
pub fn smallest_modulus_alt(modulus: u64, l: u64) -> Result<u64> {
    check_unary_params(modulus, l)?;
    (2..=modulus)
        .find(|&d| (0..d).all(|p| !(p * modulus + l).is_multiple_of(d)))
        .ok_or_else(|| Error::Internal(format!("no modulus avoids every pN + l for N={modulus}, l={l}")))
}

/// Smallest `d ≥ 2` with `d ∤ l`.
pub fn smallest_nondivisor(l: u64) -> Result<u64> {
    if l == 0 {
        return Err(param("l must be at least 1"));
    }
    Ok((2..=l + 1).find(|d| !l.is_multiple_of(*d)).expect("l + 1 never divides l"))
}

fn check_unary_params(modulus: u64, l: u64) -> Result<()> {
    if l == 0 || l >= modulus {
        return Err(param(format!("need 0 < l < N, got N={modulus}, l={l}")));
    }
    Ok(())
}

/// Which formula fixes the minimal size for a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeFormula {
    SmallestModulus,
    SmallestNondivisor,
}

impl SizeFormula {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SmallestModulus => "smallest_modulus",
            Self::SmallestNondivisor => "smallest_nondivisor",
        }
    }
}

/// Size of the minimal DFA for `spec` and the formula that gives it.
pub fn minimal_state_count(spec: &PromiseSpec) -> Result<(u64, SizeFormula)> {
    match *spec {
        PromiseSpec::Unary(u) => Ok((smallest_modulus(u.modulus(), u.offset())?, SizeFormula::SmallestModulus)),
        PromiseSpec::Binary(BinaryPromise::Bl { l }) => Ok((smallest_nondivisor(l)?, SizeFormula::SmallestNondivisor)),
        PromiseSpec::Binary(BinaryPromise::BNl { modulus, l }) => {
            Ok((smallest_modulus(modulus, l)?, SizeFormula::SmallestModulus))
        }
    }
}

/// `d`-state cycle over `{a}` with `F = {s_{(iN + r_yes) mod d} : i ≥ 0}`.
pub fn unary_min_dfa(spec: &UnaryPromise) -> Result<Dfa> {
    let d = smallest_modulus(spec.modulus(), spec.offset())?;
    let delta = (0..d).map(|i| vec![((i + 1) % d) as usize]).collect();
    // i ranges over one period of iN mod d.
    let accepting = (0..d).map(|i| ((i * spec.modulus() + spec.r_yes()) % d) as usize);
    Dfa::new(vec!['a'], delta, 0, accepting)
}

/// The minimal DFA for `A^{N,l}`.
pub fn build_unary_min_dfa(modulus: u64, l: u64) -> Result<Dfa> {
    unary_min_dfa(&UnaryPromise::a_nl(modulus, l)?)
}

/// `d`-state counter accepting `{x : #_a(x) ≡ #_b(x) mod d}`.
pub fn build_binary_min_dfa(d: u64) -> Result<Dfa> {
    if d < 2 {
        return Err(param(format!("counter DFA needs d >= 2, got {d}")));
    }
    let d = d as usize;
    let delta = (0..d).map(|i| vec![(i + 1) % d, (i + d - 1) % d]).collect();
    Dfa::new(vec!['a', 'b'], delta, 0, [0])
}

/// The minimal DFA construction for any family member.
pub fn min_dfa_for(spec: &PromiseSpec) -> Result<Dfa> {
    match spec {
        PromiseSpec::Unary(u) => unary_min_dfa(u),
        PromiseSpec::Binary(_) => build_binary_min_dfa(minimal_state_count(spec)?.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_word_checks_start() {
        let d = build_binary_min_dfa(3).unwrap();
        assert!(d.run(&Word::empty()).unwrap());
        let d = Dfa::new(vec!['a'], vec![vec![0]], 0, []).unwrap();
        assert!(!d.run(&Word::empty()).unwrap());
    }

    #[test]
    fn counter_dfa_traces() {
        let d4 = build_binary_min_dfa(4).unwrap();
        assert!(d4.run(&Word::parse("aabb").unwrap()).unwrap());
        let d3 = build_binary_min_dfa(3).unwrap();
        assert!(!d3.run(&Word::ab(2, 6)).unwrap());
        assert_eq!(d3.final_state(&Word::ab(2, 6)).unwrap(), 2);
        let d2 = build_binary_min_dfa(2).unwrap();
        assert!(d2.run(&Word::parse("ab").unwrap()).unwrap());
        assert!(!d2.run(&Word::parse("abb").unwrap()).unwrap());
        assert!(build_binary_min_dfa(1).is_err());
    }

    #[test]
    fn figure_two_shape() {
        let d = build_binary_min_dfa(4).unwrap();
        for s in 0..4 {
            assert_eq!(d.transition(s, 'a').unwrap(), (s + 1) % 4);
            assert_eq!(d.transition(s, 'b').unwrap(), (s + 3) % 4);
        }
        assert_eq!(d.accepting().iter().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn unary_cycle_runs() {
        let d = build_unary_min_dfa(15, 5).unwrap();
        assert_eq!(d.num_states(), 3);
        assert!(d.run(&Word::unary(15)).unwrap());
        assert_eq!(d.final_state(&Word::unary(5)).unwrap(), 2);
        assert!(d.run(&Word::unary(3_000_000_000_000)).unwrap());
        assert!(d.run(&Word::ab(1, 1)).is_err());
    }

    #[test]
    fn unary_min_dfa_sizes() {
        let d = build_unary_min_dfa(7, 3).unwrap();
        assert_eq!(d.num_states(), 7);
        assert_eq!(d.accepting().iter().copied().collect::<Vec<_>>(), vec![0]);
        assert_eq!(build_unary_min_dfa(16, 8).unwrap().num_states(), 16);
    }

    #[test]
    fn modulus_examples() {
        assert_eq!(smallest_modulus(16, 8).unwrap(), 16);
        assert_eq!(smallest_modulus(10, 5).unwrap(), 2);
        assert_eq!(smallest_modulus(15, 5).unwrap(), 3);
        assert_eq!(smallest_modulus_alt(16, 8).unwrap(), 16);
        assert_eq!(smallest_modulus_alt(7, 3).unwrap(), 7);
        assert_eq!(smallest_modulus_alt(12, 9).unwrap(), 2);
        assert!(smallest_modulus(5, 5).is_err());
        assert!(smallest_modulus_alt(5, 0).is_err());
    }

    #[test]
    fn nondivisor_examples() {
        assert_eq!(smallest_nondivisor(1).unwrap(), 2);
        assert_eq!(smallest_nondivisor(4).unwrap(), 3);
        assert_eq!(smallest_nondivisor(12).unwrap(), 5);
        assert!(smallest_nondivisor(0).is_err());
    }

    #[test]
    fn iterate_matches_naive() {
        let map = [1usize, 2, 3, 4, 2];
        for start in 0..5 {
            for k in 0..40u64 {
                let mut s = start;
                for _ in 0..k {
                    s = map[s];
                }
                assert_eq!(iterate(|x| map[x], start, k, 5), s);
            }
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let d = build_binary_min_dfa(3).unwrap();
        let text = d.to_json().unwrap();
        assert!(text.contains("\"states\": 3"));
        assert_eq!(Dfa::from_json(&text).unwrap(), d);
        assert!(Dfa::from_json(r#"{"states":2,"alphabet":["a"],"delta":[[1]],"start":0,"accepting":[]}"#).is_err());
        assert!(Dfa::from_json(r#"{"states":1,"alphabet":["a"],"delta":[[1]],"start":0,"accepting":[]}"#).is_err());
        assert!(Dfa::from_json(r#"{"states":1,"alphabet":["a"],"delta":[[0]],"start":1,"accepting":[]}"#).is_err());
        assert!(Dfa::from_json(r#"{"states":1,"alphabet":["a"],"delta":[[0]],"start":0,"accepting":[3]}"#).is_err());
    }

    #[test]
    fn constructions_solve_general_residues() {
        let spec = UnaryPromise::new(12, 5, 8).unwrap();
        let d = unary_min_dfa(&spec).unwrap();
        assert_eq!(d.num_states() as u64, smallest_modulus(12, 3).unwrap());
        assert!(d.solves(&PromiseSpec::Unary(spec), 40, 0).unwrap());
    }
}
