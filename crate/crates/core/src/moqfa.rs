//! Measure-once quantum finite automata over real orthogonal matrices.
//!
//! A run on `x = σ1…σn` starts in `|0⟩`, applies `U_¢`, then `U_σ1 … U_σn`,
//! then `U_$`, and measures once against the accepting basis states.
//!
//! Machines produced by the builders in [`crate::synth`] know that every
//! input symbol acts as a plane rotation by a multiple of one rational angle
//! `2πq/D`. For those, a run of `k` equal symbols is evaluated as a single
//! rotation by `(k·q mod D)·2π/D`, computed from integers, so the cost and
//! the rounding error do not depend on `k`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{input, param, Error, Result};
use crate::word::Word;

/// Entry-wise tolerance used to recognise a deserialized matrix as one of the
/// rotation generators of its stored angle.
const GENERATOR_MATCH_TOL: f64 = 1e-12;

/// Orthogonality threshold for machines loaded from outside.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// The angle `θ = 2πq/D`, stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawAngle", into = "RawAngle")]
pub struct AngleSpec {
    q: u64,
    d: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAngle {
    q: u64,
    #[serde(rename = "D")]
    d: u64,
}

impl TryFrom<RawAngle> for AngleSpec {
    type Error = Error;
    fn try_from(raw: RawAngle) -> Result<Self> {
        AngleSpec::new(raw.q, raw.d)
    }
}

impl From<AngleSpec> for RawAngle {
    fn from(a: AngleSpec) -> Self {
        RawAngle { q: a.q, d: a.d }
    }
}

impl AngleSpec {
    /// `q` is reduced modulo `d`.
    pub fn new(q: u64, d: u64) -> Result<Self> {
        if d == 0 {
            return Err(param("angle denominator D must be positive"));
        }
        Ok(Self { q: q % d, d })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn radians(&self) -> f64 {
        std::f64::consts::TAU * self.q as f64 / self.d as f64
    }

    /// Residue `r` in `[0, D)` such that `steps · θ ≡ 2πr/D`. Negative
    /// `direction` means rotating by `-steps · θ`.
    pub fn residue(&self, steps: u64, direction: Direction) -> u64 {
        let d = self.d as u128;
        let r = ((steps as u128 % d) * self.q as u128 % d) as u64;
        match direction {
            Direction::Positive => r,
            Direction::Negative => (self.d - r) % self.d,
        }
    }

    /// `(cos, sin)` of `steps · θ` in the given direction.
    pub fn cos_sin(&self, steps: u64, direction: Direction) -> (f64, f64) {
        turn_cos_sin(self.residue(steps, direction), self.d)
    }
}

/// `(cos, sin)` of `2πk/d`.
///
/// The angle is first split into a quadrant and a remainder in `[0, π/2)`
/// using integer arithmetic, so quarter and half turns come out exact
/// (`cos(π/2) = 0`, `cos(π) = -1`) and the sign of the cosine is always the
/// sign of the exact value.
pub fn turn_cos_sin(k: u64, d: u64) -> (f64, f64) {
    assert!(d > 0, "turn denominator must be positive");
    let d = d as u128;
    let k4 = 4 * (k as u128 % d);
    let quadrant = k4 / d;
    let rem = k4 % d;
    let (c, s) = if rem == 0 {
        (1.0, 0.0)
    } else {
        let phi = rem as f64 / d as f64 * FRAC_PI_2;
        (phi.cos(), phi.sin())
    };
    match quadrant {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
}

/// A symbol whose matrix is the identity outside the coordinate plane
/// `(row, col)`, and `[[cos φ, −sin φ], [sin φ, cos φ]]` inside it, with
/// `φ = ±θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rotation {
    pub plane: (usize, usize),
    pub direction: Direction,
}

impl Rotation {
    /// Rotation in the plane of the last two basis states.
    pub fn trailing(dim: usize, direction: Direction) -> Self {
        Self { plane: (dim - 2, dim - 1), direction }
    }

    /// The matrix of `steps` consecutive applications.
    pub fn power(&self, dim: usize, angle: AngleSpec, steps: u64) -> DMatrix<f64> {
        let (c, s) = angle.cos_sin(steps, self.direction);
        let (i, j) = self.plane;
        let mut m = DMatrix::identity(dim, dim);
        m[(i, i)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        m[(j, j)] = c;
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<f64>);

impl StateVector {
    pub fn amplitudes(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
struct SymbolAction {
    sym: char,
    matrix: DMatrix<f64>,
    rotation: Option<Rotation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Moqfa {
    dim: usize,
    left: DMatrix<f64>,
    right: DMatrix<f64>,
    symbols: Vec<SymbolAction>,
    accepting: Vec<usize>,
    angle: Option<AngleSpec>,
}

impl Moqfa {
    /// A machine from raw matrices. Runs fall back to step-by-step
    /// simulation. Shapes are validated; orthogonality is not (see
    /// [`Moqfa::check_orthogonality`]).
    pub fn new(
        left: DMatrix<f64>,
        symbols: Vec<(char, DMatrix<f64>)>,
        right: DMatrix<f64>,
        accepting: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let dim = left.nrows();
        let symbols = symbols
            .into_iter()
            .map(|(sym, matrix)| SymbolAction { sym, matrix, rotation: None })
            .collect();
        let machine = Self {
            dim,
            left,
            right,
            symbols,
            accepting: accepting.into_iter().collect::<BTreeSet<_>>().into_iter().collect(),
            angle: None,
        };
        machine.validate_shapes()?;
        Ok(machine)
    }

    /// A machine whose symbols are rotations by `±angle`. Their matrices
    /// are generated from the angle.
    pub fn rotational(
        left: DMatrix<f64>,
        angle: AngleSpec,
        rotations: Vec<(char, Rotation)>,
        right: DMatrix<f64>,
        accepting: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let dim = left.nrows();
        if rotations.iter().any(|(_, r)| r.plane.0 >= dim || r.plane.1 >= dim || r.plane.0 == r.plane.1) {
            return Err(param("rotation plane out of range"));
        }
        let symbols = rotations
            .into_iter()
            .map(|(sym, rot)| SymbolAction { sym, matrix: rot.power(dim, angle, 1), rotation: Some(rot) })
            .collect();
        let machine = Self {
            dim,
            left,
            right,
            symbols,
            accepting: accepting.into_iter().collect::<BTreeSet<_>>().into_iter().collect(),
            angle: Some(angle),
        };
        machine.validate_shapes()?;
        Ok(machine)
    }

    fn validate_shapes(&self) -> Result<()> {
        let dim = self.dim;
        if dim == 0 {
            return Err(input("machine dimension must be positive"));
        }
        let square = |m: &DMatrix<f64>| m.nrows() == dim && m.ncols() == dim;
        if !square(&self.left) || !square(&self.right) || !self.symbols.iter().all(|s| square(&s.matrix)) {
            return Err(input(format!("every matrix must be {dim}x{dim}")));
        }
        if let Some(&bad) = self.accepting.iter().find(|&&i| i >= dim) {
            return Err(input(format!("accepting index {bad} out of range for dim {dim}")));
        }
        let mut seen = BTreeSet::new();
        for s in &self.symbols {
            if !seen.insert(s.sym) {
                return Err(input(format!("symbol '{}' defined twice", s.sym)));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet(&self) -> Vec<char> {
        self.symbols.iter().map(|s| s.sym).collect()
    }

    pub fn accepting(&self) -> &[usize] {
        &self.accepting
    }

    pub fn angle(&self) -> Option<AngleSpec> {
        self.angle
    }

    pub fn left_marker(&self) -> &DMatrix<f64> {
        &self.left
    }

    pub fn right_marker(&self) -> &DMatrix<f64> {
        &self.right
    }

    fn action(&self, sym: char) -> Result<&SymbolAction> {
        self.symbols
            .iter()
            .find(|s| s.sym == sym)
            .ok_or_else(|| input(format!("symbol '{sym}' is not in the machine alphabet {:?}", self.alphabet())))
    }

    pub fn symbol_matrix(&self, sym: char) -> Result<&DMatrix<f64>> {
        self.action(sym).map(|a| &a.matrix)
    }

    /// The rotation generator of `sym`, if the machine knows one.
    pub fn rotation(&self, sym: char) -> Result<Option<Rotation>> {
        self.action(sym).map(|a| a.rotation)
    }

    /// `U_sym^k`, by angle reduction when available and repeated
    /// multiplication otherwise.
    pub fn symbol_power(&self, sym: char, k: u64) -> Result<DMatrix<f64>> {
        let action = self.action(sym)?;
        match (action.rotation, self.angle) {
            (Some(rot), Some(angle)) => Ok(rot.power(self.dim, angle, k)),
            _ => {
                let mut m = DMatrix::identity(self.dim, self.dim);
                for _ in 0..k {
                    m = &action.matrix * m;
                }
                Ok(m)
            }
        }
    }

    fn initial(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim);
        v[0] = 1.0;
        v
    }

    /// `U_$ · U_σn ⋯ U_σ1 · U_¢ · |0⟩`, one matrix application per run of
    /// equal symbols when the machine is rotational.
    pub fn final_state(&self, word: &Word) -> Result<StateVector> {
        let mut v = &self.left * self.initial();
        for &(sym, count) in word.runs() {
            let action = self.action(sym)?;
            match (action.rotation, self.angle) {
                (Some(rot), Some(angle)) => v = rot.power(self.dim, angle, count) * v,
                _ => {
                    for _ in 0..count {
                        v = &action.matrix * v;
                    }
                }
            }
        }
        Ok(StateVector(&self.right * v))
    }

    /// Applies every symbol matrix one at a time, ignoring any rotation
    /// structure. Cost is linear in the word length.
    pub fn final_state_stepwise(&self, word: &Word) -> Result<StateVector> {
        let mut v = &self.left * self.initial();
        for &(sym, count) in word.runs() {
            let m = &self.action(sym)?.matrix;
            for _ in 0..count {
                v = m * v;
            }
        }
        Ok(StateVector(&self.right * v))
    }

    /// `‖P_acc · final_state‖²`.
    pub fn accept_probability(&self, word: &Word) -> Result<f64> {
        let state = self.final_state(word)?;
        Ok(self.projected_weight(&state))
    }

    pub fn projected_weight(&self, state: &StateVector) -> f64 {
        self.accepting.iter().map(|&i| state.0[i] * state.0[i]).sum()
    }

    /// Max over all matrices of `‖MᵀM − I‖_max`.
    pub fn check_orthogonality(&self) -> f64 {
        let identity = DMatrix::<f64>::identity(self.dim, self.dim);
        std::iter::once(&self.left)
            .chain(std::iter::once(&self.right))
            .chain(self.symbols.iter().map(|s| &s.matrix))
            .map(|m| (m.transpose() * m - &identity).amax())
            .fold(0.0, f64::max)
    }

    pub fn to_json_value(&self) -> MachineJson {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
        };
        let mut matrices = BTreeMap::new();
        matrices.insert("lmark".to_string(), rows(&self.left));
        matrices.insert("rmark".to_string(), rows(&self.right));
        for s in &self.symbols {
            matrices.insert(s.sym.to_string(), rows(&s.matrix));
        }
        MachineJson {
            dim: self.dim,
            alphabet: self.symbols.iter().map(|s| s.sym.to_string()).collect(),
            angle: self.angle,
            matrices,
            accepting: self.accepting.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_json_value())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MachineJson = serde_json::from_str(text)?;
        Self::try_from(raw)
    }
}

/// Wire form of a machine. Matrices are row-major; `lmark` and `rmark` are
/// the end-markers, every other key is an input symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineJson {
    pub dim: usize,
    pub alphabet: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<AngleSpec>,
    pub matrices: BTreeMap<String, Vec<Vec<f64>>>,
    pub accepting: Vec<usize>,
}

impl TryFrom<MachineJson> for Moqfa {
    type Error = Error;

    fn try_from(raw: MachineJson) -> Result<Self> {
        let dim = raw.dim;
        let matrix = |key: &str| -> Result<DMatrix<f64>> {
            let rows = raw
                .matrices
                .get(key)
                .ok_or_else(|| input(format!("missing matrix {key:?}")))?;
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(input(format!("matrix {key:?} must be {dim}x{dim}")));
            }
            Ok(DMatrix::from_fn(dim, dim, |r, c| rows[r][c]))
        };
        let mut alphabet = Vec::with_capacity(raw.alphabet.len());
        for s in &raw.alphabet {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => alphabet.push(c),
                _ => return Err(input(format!("alphabet entries must be single symbols, got {s:?}"))),
            }
        }
        let expected_keys = alphabet.len() + 2;
        if raw.matrices.len() != expected_keys {
            return Err(input("matrices must hold exactly lmark, rmark and one entry per symbol"));
        }
        let left = matrix("lmark")?;
        let right = matrix("rmark")?;
        let mut symbols = Vec::with_capacity(alphabet.len());
        for &sym in &alphabet {
            symbols.push((sym, matrix(&sym.to_string())?));
        }
        let mut machine = Moqfa::new(left, symbols, right, raw.accepting.iter().copied())?;
        if raw.accepting.len() != machine.accepting.len() {
            return Err(input("accepting indices must be distinct"));
        }
        if let Some(angle) = raw.angle {
            if dim < 2 {
                return Err(input("an angle needs a machine of dimension at least 2"));
            }
            machine.angle = Some(angle);
            for action in &mut machine.symbols {
                action.rotation = [Direction::Positive, Direction::Negative]
                    .into_iter()
                    .map(|d| Rotation::trailing(dim, d))
                    .find(|rot| (rot.power(dim, angle, 1) - &action.matrix).amax() <= GENERATOR_MATCH_TOL);
            }
        }
        Ok(machine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rotational_2d(q: u64, d: u64) -> Moqfa {
        let angle = AngleSpec::new(q, d).unwrap();
        Moqfa::rotational(
            DMatrix::identity(2, 2),
            angle,
            vec![('a', Rotation::trailing(2, Direction::Negative)), ('b', Rotation::trailing(2, Direction::Positive))],
            DMatrix::identity(2, 2),
            [0],
        )
        .unwrap()
    }

    #[test]
    fn turn_values_are_exact_at_quarters() {
        assert_eq!(turn_cos_sin(0, 8), (1.0, 0.0));
        assert_eq!(turn_cos_sin(2, 8), (0.0, 1.0));
        assert_eq!(turn_cos_sin(4, 8), (-1.0, 0.0));
        assert_eq!(turn_cos_sin(6, 8), (0.0, -1.0));
        assert_eq!(turn_cos_sin(13, 4), (0.0, 1.0));
        for (k, d) in [(1u64, 7u64), (3, 7), (5, 12), (11, 12), (40, 13)] {
            let (c, s) = turn_cos_sin(k, d);
            let phi = std::f64::consts::TAU * k as f64 / d as f64;
            assert!((c - phi.cos()).abs() < 1e-14);
            assert!((s - phi.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn angle_normalises_and_reduces() {
        let a = AngleSpec::new(9, 7).unwrap();
        assert_eq!((a.q(), a.d()), (2, 7));
        assert!(AngleSpec::new(1, 0).is_err());
        assert_eq!(a.residue(10, Direction::Positive), 20 % 7);
        assert_eq!(a.residue(10, Direction::Negative), 7 - 20 % 7);
        assert_eq!(a.residue(u64::MAX, Direction::Positive), 2);
    }

    #[test]
    fn empty_word_applies_only_end_markers() {
        let left = Rotation::trailing(2, Direction::Positive).power(2, AngleSpec::new(1, 5).unwrap(), 1);
        let right = DMatrix::identity(2, 2);
        let m = Moqfa::new(left.clone(), vec![('a', DMatrix::identity(2, 2))], right, [0]).unwrap();
        let v = m.final_state(&Word::empty()).unwrap();
        assert_eq!(v.amplitudes(), left.column(0).as_slice());
    }

    #[test]
    fn ab_cancels_for_quarter_turn() {
        let m = rotational_2d(1, 4);
        let v = m.final_state(&Word::parse("ab").unwrap()).unwrap();
        assert!((v.amplitudes()[0] - 1.0).abs() < 1e-15);
        assert!(v.amplitudes()[1].abs() < 1e-15);
        assert_eq!(m.accept_probability(&Word::parse("b").unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn unknown_symbol_is_an_input_error() {
        let m = rotational_2d(1, 4);
        assert!(matches!(m.final_state(&Word::parse("ac").unwrap()), Err(Error::Input(_))));
        assert!(m.final_state_stepwise(&Word::parse("c").unwrap()).is_err());
    }

    #[test]
    fn accept_probability_projects_on_accepting_set() {
        let m = Moqfa::new(DMatrix::identity(3, 3), vec![('a', DMatrix::identity(3, 3))], DMatrix::identity(3, 3), [0])
            .unwrap();
        assert_eq!(m.accept_probability(&Word::unary(5)).unwrap(), 1.0);
        let s = StateVector(DVector::from_vec(vec![0.0, 0.6, 0.8]));
        assert_eq!(m.projected_weight(&s), 0.0);
    }

    #[test]
    fn corrupted_entry_is_detected() {
        let good = rotational_2d(1, 8);
        assert!(good.check_orthogonality() <= 1e-12);
        let mut bad = good.symbol_matrix('a').unwrap().clone();
        bad[(0, 1)] += 0.1;
        let m = Moqfa::new(DMatrix::identity(2, 2), vec![('a', bad)], DMatrix::identity(2, 2), [0]).unwrap();
        assert!(m.check_orthogonality() >= 0.01);
    }

    #[test]
    fn shape_errors() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        let i3 = DMatrix::<f64>::identity(3, 3);
        assert!(Moqfa::new(i2.clone(), vec![('a', i3)], i2.clone(), [0]).is_err());
        assert!(Moqfa::new(i2.clone(), vec![('a', i2.clone())], i2.clone(), [2]).is_err());
        assert!(Moqfa::new(i2.clone(), vec![('a', i2.clone()), ('a', i2.clone())], i2, [0]).is_err());
    }

    #[test]
    fn json_round_trip_keeps_rotations() {
        let m = rotational_2d(3, 20);
        let text = m.to_json().unwrap();
        let back = Moqfa::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert!(back.rotation('a').unwrap().is_some());

        let raw = Moqfa::new(DMatrix::identity(2, 2), vec![('a', DMatrix::identity(2, 2))], DMatrix::identity(2, 2), [1])
            .unwrap();
        let text = raw.to_json().unwrap();
        assert!(!text.contains("angle"));
        assert_eq!(Moqfa::from_json(&text).unwrap(), raw);
    }

    #[test]
    fn json_rejects_malformed() {
        let m = rotational_2d(1, 4);
        let mut v = m.to_json_value();
        v.matrices.remove("rmark");
        assert!(Moqfa::try_from(v).is_err());
        let mut v = m.to_json_value();
        v.alphabet.push("zz".into());
        assert!(Moqfa::try_from(v).is_err());
        let mut v = m.to_json_value();
        v.matrices.get_mut("a").unwrap().pop();
        assert!(Moqfa::try_from(v).is_err());
        assert!(Moqfa::from_json("{\"dim\": 2}").is_err());
    }

    proptest! {
        #[test]
        fn reduced_power_matches_naive(q in 0u64..50, d in 1u64..60, k in 0u64..300) {
            let m = rotational_2d(q, d);
            let fast = m.symbol_power('b', k).unwrap();
            let mut slow = DMatrix::identity(2, 2);
            let gen = m.symbol_matrix('b').unwrap();
            for _ in 0..k {
                slow = gen * slow;
            }
            prop_assert!((fast - slow).amax() <= 1e-9);
        }
    }
}
