//! The promise-problem families: classification of words and generation of
//! yes/no instances.
//!
//! * `A^{N,r1,r2}`: unary, yes = `{a^n : n ≡ r1 (mod N)}`, no = `{a^n : n ≡ r2 (mod N)}`.
//!   `A^{N,l}` is the case `r1 = 0`, `r2 = l`.
//! * `B^l`: yes = `{a^i b^i}`, no = `{a^i b^(i+l)}`.
//! * `B^{N,l}`: yes = `{a^i b^i}`, no = `{a^i b^(i+jN+l) : j ≥ 0}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, param, Error, Result};
use crate::word::Word;

pub const DEFAULT_I_MAX: u64 = 64;
pub const DEFAULT_J_MAX: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Yes,
    No,
    Outside,
}

/// Unary promise problem `A^{N,r_yes,r_no}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnaryPromise {
    modulus: u64,
    r_yes: u64,
    r_no: u64,
}

impl UnaryPromise {
    pub fn new(modulus: u64, r_yes: u64, r_no: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(param(format!("N must be at least 2, got {modulus}")));
        }
        if r_yes >= modulus || r_no >= modulus {
            return Err(param(format!(
                "residues must lie in [0, {modulus}), got r_yes={r_yes}, r_no={r_no}"
            )));
        }
        if r_yes == r_no {
            return Err(param(format!("r_yes and r_no must differ mod {modulus}")));
        }
        Ok(Self { modulus, r_yes, r_no })
    }

    /// `A^{N,l}`: yes = `a^{iN}`, no = `a^{iN+l}`.
    pub fn a_nl(modulus: u64, l: u64) -> Result<Self> {
        if l == 0 || l >= modulus {
            return Err(param(format!("need 0 < l < N, got N={modulus}, l={l}")));
        }
        Self::new(modulus, 0, l)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn r_yes(&self) -> u64 {
        self.r_yes
    }

    pub fn r_no(&self) -> u64 {
        self.r_no
    }

    /// `l = (r_no - r_yes) mod N`, the offset that drives both the quantum and
    /// the classical constructions.
    pub fn offset(&self) -> u64 {
        (self.r_no + self.modulus - self.r_yes) % self.modulus
    }

    pub fn classify(&self, n: u64) -> Classification {
        let r = n % self.modulus;
        if r == self.r_yes {
            Classification::Yes
        } else if r == self.r_no {
            Classification::No
        } else {
            Classification::Outside
        }
    }
}

/// The binary families `B^l` and `B^{N,l}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryPromise {
    Bl { l: u64 },
    BNl { modulus: u64, l: u64 },
}

impl BinaryPromise {
    pub fn bl(l: u64) -> Result<Self> {
        if l == 0 {
            return Err(param("B^l needs l >= 1"));
        }
        Ok(Self::Bl { l })
    }

    pub fn bnl(modulus: u64, l: u64) -> Result<Self> {
        if l == 0 || l >= modulus {
            return Err(param(format!("B^(N,l) needs 0 < l < N, got N={modulus}, l={l}")));
        }
        Ok(Self::BNl { modulus, l })
    }

    pub fn l(&self) -> u64 {
        match *self {
            Self::Bl { l } | Self::BNl { l, .. } => l,
        }
    }

    /// Classifies `word`. Words not of the shape `a^i b^m` are outside the
    /// promise; any symbol other than `a`/`b` is an input error.
    pub fn classify(&self, word: &Word) -> Result<Classification> {
        if let Some(&(sym, _)) = word.runs().iter().find(|(s, _)| *s != 'a' && *s != 'b') {
            return Err(input(format!("symbol '{sym}' is not in {{a, b}}")));
        }
        let (i, m) = match word.runs() {
            [] => (0, 0),
            [('a', i)] => (*i, 0),
            [('b', m)] => (0, *m),
            [('a', i), ('b', m)] => (*i, *m),
            _ => return Ok(Classification::Outside),
        };
        if m == i {
            return Ok(Classification::Yes);
        }
        let is_no = match *self {
            Self::Bl { l } => m.checked_sub(i) == Some(l),
            Self::BNl { modulus, l } => m
                .checked_sub(i)
                .and_then(|excess| excess.checked_sub(l))
                .is_some_and(|rest| rest % modulus == 0),
        };
        Ok(if is_no { Classification::No } else { Classification::Outside })
    }
}

/// A member of one of the three families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub enum PromiseSpec {
    Unary(UnaryPromise),
    Binary(BinaryPromise),
}

impl PromiseSpec {
    pub fn a_nl(modulus: u64, l: u64) -> Result<Self> {
        UnaryPromise::a_nl(modulus, l).map(Self::Unary)
    }

    pub fn a_general(modulus: u64, r_yes: u64, r_no: u64) -> Result<Self> {
        UnaryPromise::new(modulus, r_yes, r_no).map(Self::Unary)
    }

    pub fn bl(l: u64) -> Result<Self> {
        BinaryPromise::bl(l).map(Self::Binary)
    }

    pub fn bnl(modulus: u64, l: u64) -> Result<Self> {
        BinaryPromise::bnl(modulus, l).map(Self::Binary)
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Unary(_) => "A",
            Self::Binary(BinaryPromise::Bl { .. }) => "B",
            Self::Binary(BinaryPromise::BNl { .. }) => "BN",
        }
    }

    pub fn alphabet(&self) -> &'static [char] {
        match self {
            Self::Unary(_) => &['a'],
            Self::Binary(_) => &['a', 'b'],
        }
    }

    pub fn classify(&self, word: &Word) -> Result<Classification> {
        match self {
            Self::Unary(spec) => match word.runs() {
                [] => Ok(spec.classify(0)),
                [('a', n)] => Ok(spec.classify(*n)),
                _ => {
                    let sym = word.runs().iter().find(|(s, _)| *s != 'a').map_or('?', |r| r.0);
                    Err(input(format!("symbol '{sym}' is not in {{a}}")))
                }
            },
            Self::Binary(spec) => spec.classify(word),
        }
    }

    /// All yes- and no-instances with generator indices `i <= i_max` (and
    /// `j <= j_max` for `B^{N,l}`), in shortlex order.
    pub fn enumerate_instances(&self, i_max: u64, j_max: u64) -> Vec<(Word, Classification)> {
        let mut out = Vec::new();
        match *self {
            Self::Unary(spec) => {
                for i in 0..=i_max {
                    let base = i * spec.modulus;
                    out.push((Word::unary(base + spec.r_yes), Classification::Yes));
                    out.push((Word::unary(base + spec.r_no), Classification::No));
                }
            }
            Self::Binary(spec) => {
                for i in 0..=i_max {
                    out.push((Word::ab(i, i), Classification::Yes));
                    match spec {
                        BinaryPromise::Bl { l } => {
                            out.push((Word::ab(i, i + l), Classification::No));
                        }
                        BinaryPromise::BNl { modulus, l } => {
                            for j in 0..=j_max {
                                out.push((Word::ab(i, i + j * modulus + l), Classification::No));
                            }
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

impl fmt::Display for PromiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unary(s) if s.r_yes == 0 => write!(f, "A^({},{})", s.modulus, s.r_no),
            Self::Unary(s) => write!(f, "A^({},{},{})", s.modulus, s.r_yes, s.r_no),
            Self::Binary(BinaryPromise::Bl { l }) => write!(f, "B^{l}"),
            Self::Binary(BinaryPromise::BNl { modulus, l }) => write!(f, "B^({modulus},{l})"),
        }
    }
}

/// Wire form: `{"family": "A"|"B"|"BN", "N"?, "l"?, "r_yes"?, "r_no"?}`.
///
/// * `A` carries `N` plus either `l` or both `r_yes` and `r_no`.
/// * `B` carries `l` only.
/// * `BN` carries `N` and `l`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    family: String,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    modulus: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    l: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r_yes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r_no: Option<u64>,
}

impl From<PromiseSpec> for RawSpec {
    fn from(spec: PromiseSpec) -> Self {
        let family = spec.family().to_string();
        match spec {
            PromiseSpec::Unary(s) if s.r_yes == 0 => RawSpec {
                family,
                modulus: Some(s.modulus),
                l: Some(s.r_no),
                r_yes: None,
                r_no: None,
            },
            PromiseSpec::Unary(s) => RawSpec {
                family,
                modulus: Some(s.modulus),
                l: None,
                r_yes: Some(s.r_yes),
                r_no: Some(s.r_no),
            },
            PromiseSpec::Binary(BinaryPromise::Bl { l }) => RawSpec {
                family,
                modulus: None,
                l: Some(l),
                r_yes: None,
                r_no: None,
            },
            PromiseSpec::Binary(BinaryPromise::BNl { modulus, l }) => RawSpec {
                family,
                modulus: Some(modulus),
                l: Some(l),
                r_yes: None,
                r_no: None,
            },
        }
    }
}

impl TryFrom<RawSpec> for PromiseSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let RawSpec { family, modulus, l, r_yes, r_no } = raw;
        match (family.as_str(), modulus, l, r_yes, r_no) {
            ("A", Some(n), Some(l), None, None) => PromiseSpec::a_nl(n, l),
            ("A", Some(n), None, Some(ry), Some(rn)) => PromiseSpec::a_general(n, ry, rn),
            ("A", ..) => Err(param("family A takes N with either l or both r_yes and r_no")),
            ("B", None, Some(l), None, None) => PromiseSpec::bl(l),
            ("B", ..) => Err(param("family B takes exactly the field l")),
            ("BN", Some(n), Some(l), None, None) => PromiseSpec::bnl(n, l),
            ("BN", ..) => Err(param("family BN takes exactly the fields N and l")),
            (other, ..) => Err(param(format!("unknown family {other:?} (expected A, B or BN)"))),
        }
    }
}
