//! Run-length encoded input words.
//!
//! Every word in this crate is stored as a sequence of `(symbol, count)` runs,
//! so `a^1000000000` costs one entry. Adjacent runs always carry distinct
//! symbols and no run has a zero count, which makes the representation
//! canonical: two words are equal iff their runs are equal.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{input, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    runs: Vec<(char, u64)>,
}

impl Word {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The unary word `a^n`.
    pub fn unary(n: u64) -> Self {
        Self::from_runs([('a', n)])
    }

    /// The binary word `a^i b^m`.
    pub fn ab(i: u64, m: u64) -> Self {
        Self::from_runs([('a', i), ('b', m)])
    }

    pub fn from_runs<I: IntoIterator<Item = (char, u64)>>(runs: I) -> Self {
        let mut word = Self::empty();
        for (sym, count) in runs {
            word.push(sym, count);
        }
        word
    }

    /// Appends `count` copies of `sym`, merging with the last run when possible.
    pub fn push(&mut self, sym: char, count: u64) {
        if count == 0 {
            return;
        }
        match self.runs.last_mut() {
            Some((last, n)) if *last == sym => *n += count,
            _ => self.runs.push((sym, count)),
        }
    }

    /// Parses either a plain string (`"aabbb"`) or exponent notation
    /// (`"a^2b^3"`, `"ab^8"`). Whitespace is ignored; `"ε"` and `""` are empty.
    pub fn parse(text: &str) -> Result<Self> {
        let mut word = Self::empty();
        let mut chars = text.chars().filter(|c| !c.is_whitespace()).peekable();
        while let Some(c) = chars.next() {
            if c == 'ε' {
                continue;
            }
            if c == '^' || c.is_ascii_digit() {
                return Err(input(format!("unexpected '{c}' in word {text:?}")));
            }
            let mut count = 1u64;
            if chars.peek() == Some(&'^') {
                chars.next();
                let mut digits = String::new();
                while let Some(d) = chars.peek().copied().filter(char::is_ascii_digit) {
                    digits.push(d);
                    chars.next();
                }
                count = digits
                    .parse()
                    .map_err(|_| input(format!("missing exponent after '{c}^' in {text:?}")))?;
            }
            word.push(c, count);
        }
        Ok(word)
    }

    pub fn runs(&self) -> &[(char, u64)] {
        &self.runs
    }

    pub fn len(&self) -> u64 {
        self.runs.iter().map(|&(_, n)| n).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Number of occurrences of `sym`.
    pub fn count(&self, sym: char) -> u64 {
        self.runs.iter().filter(|&&(s, _)| s == sym).map(|&(_, n)| n).sum()
    }

    /// Lazily expanded symbols. Only meant for short words.
    pub fn symbols(&self) -> impl Iterator<Item = char> + '_ {
        self.runs
            .iter()
            .flat_map(|&(s, n)| std::iter::repeat_n(s, n as usize))
    }

    /// The word as a plain string. Only meant for short words.
    pub fn expand(&self) -> String {
        self.symbols().collect()
    }
}

/// Shortlex order: by length, then lexicographically.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| lex_cmp(&self.runs, &other.runs))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Lexicographic comparison on the expanded strings without expanding them.
fn lex_cmp(a: &[(char, u64)], b: &[(char, u64)]) -> Ordering {
    let (mut i, mut j) = (0, 0);
    let (mut left_a, mut left_b) = (a.first().map_or(0, |r| r.1), b.first().map_or(0, |r| r.1));
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(&(sa, _)), Some(&(sb, _))) => {
                if sa != sb {
                    return sa.cmp(&sb);
                }
                let step = left_a.min(left_b);
                left_a -= step;
                left_b -= step;
                if left_a == 0 {
                    i += 1;
                    left_a = a.get(i).map_or(0, |r| r.1);
                }
                if left_b == 0 {
                    j += 1;
                    left_b = b.get(j).map_or(0, |r| r.1);
                }
            }
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.runs.is_empty() {
            return f.write_str("ε");
        }
        for &(sym, n) in &self.runs {
            if n == 1 {
                write!(f, "{sym}")?;
            } else {
                write!(f, "{sym}^{n}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_plain_and_exponent_forms() {
        assert_eq!(Word::parse("aabbbbbb").unwrap(), Word::ab(2, 6));
        assert_eq!(Word::parse("ab^8").unwrap(), Word::ab(1, 8));
        assert_eq!(Word::parse("a^3 b^7").unwrap(), Word::ab(3, 7));
        assert_eq!(Word::parse("").unwrap(), Word::empty());
        assert_eq!(Word::parse("ε").unwrap(), Word::empty());
        assert_eq!(Word::parse("a^0b").unwrap(), Word::from_runs([('b', 1)]));
        assert!(Word::parse("a^").is_err());
        assert!(Word::parse("3a").is_err());
    }

    #[test]
    fn runs_merge_and_skip_empty() {
        let w = Word::from_runs([('a', 2), ('a', 3), ('b', 0), ('a', 1)]);
        assert_eq!(w.runs(), &[('a', 6)]);
        assert_eq!(w.to_string(), "a^6");
        assert_eq!(Word::empty().to_string(), "ε");
    }

    #[test]
    fn shortlex() {
        assert!(Word::unary(1) < Word::ab(0, 2));
        assert!(Word::ab(2, 0) < Word::ab(1, 1));
        assert!(Word::ab(1, 1) < Word::ab(0, 2));
    }

    proptest! {
        #[test]
        fn order_matches_expanded_strings(a in "[ab]{0,12}", b in "[ab]{0,12}") {
            let wa = Word::parse(&a).unwrap();
            let wb = Word::parse(&b).unwrap();
            let expected = a.len().cmp(&b.len()).then_with(|| a.cmp(&b));
            prop_assert_eq!(wa.cmp(&wb), expected);
            prop_assert_eq!(wa.expand(), a);
        }
    }
}
