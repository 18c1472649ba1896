//! Synthesis of the exact machines.
//!
//! The unary construction starts from a two-state rotation machine that
//! returns `|0⟩` on yes-instances and leaves overlap `p = cos(lθ)` with `|0⟩`
//! on no-instances. If `p ≤ 0`, one extra basis state and the end-marker
//! `U_¢ = [[α, −β, 0], [β, α, 0], [0, 0, 1]]` with `α² + β² = 1` and
//! `α² + pβ² = 0` turn that overlap into an exactly orthogonal final state.
//! [`select_angle`] picks `θ = 2πq/N` so that `cos(lθ) ≤ 0` for every
//! `0 < l < N`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::moqfa::{turn_cos_sin, AngleSpec, Direction, Moqfa, Rotation};
use crate::promise::{BinaryPromise, PromiseSpec, UnaryPromise};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "case")]
pub enum AngleCase {
    /// `N/4 ≤ l ≤ 3N/4`, `q = 1`.
    Mid,
    /// `l < N/4`, `q = ⌈N/(4l)⌉`.
    SmallL,
    /// `l > 3N/4`; `j` is the smallest index with
    /// `1/4 < frac(j(N−l)/l) < 2/3`, and `q = ⌊(N/l)(j + 1/4)⌋ + 1`.
    LargeL { j: u64 },
}

impl AngleCase {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Mid => "mid",
            Self::SmallL => "small_l",
            Self::LargeL { .. } => "large_l",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSelection {
    pub q: u64,
    #[serde(rename = "D")]
    pub d: u64,
    /// `cos(lθ)`.
    pub p: f64,
    #[serde(flatten)]
    pub case: AngleCase,
}

impl AngleSelection {
    pub fn angle(&self) -> AngleSpec {
        AngleSpec::new(self.q, self.d).expect("selection denominators are positive")
    }
}

/// Chooses `θ = 2πq/N` with `cos(lθ) ≤ 0`.
pub fn select_angle(modulus: u64, l: u64) -> Result<AngleSelection> {
    if l == 0 || l >= modulus {
        return Err(param(format!("need 0 < l < N, got N={modulus}, l={l}")));
    }
    let (n, l128) = (modulus as u128, l as u128);
    let (q, case) = if 4 * l128 < n {
        (modulus.div_ceil(4 * l), AngleCase::SmallL)
    } else if 4 * l128 <= 3 * n {
        (1, AngleCase::Mid)
    } else {
        // frac(j(N−l)/l) = ((j(N−l)) mod l) / l, compared as integers:
        // 1/4 < f/l  <=>  4f > l,   f/l < 2/3  <=>  3f < 2l.
        let gap = n - l128;
        let j = (1..=2 * l128)
            .find(|&j| {
                let f = j * gap % l128;
                4 * f > l128 && 3 * f < 2 * l128
            })
            .ok_or_else(|| {
                Error::Internal(format!("no j in [1, {}] satisfies the fractional window for N={modulus}, l={l}", 2 * l))
            })?;
        // ⌊(N/l)(j + 1/4)⌋ = ⌊N(4j + 1) / (4l)⌋
        let q = n * (4 * j + 1) / (4 * l128) + 1;
        (q as u64, AngleCase::LargeL { j: j as u64 })
    };
    let (p, _) = turn_cos_sin(((q as u128 * l128) % n) as u64, modulus);
    Ok(AngleSelection { q, d: modulus, p, case })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftParameters {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Solves `α² + β² = 1`, `α² + pβ² = 0` for `p ∈ [−1, 0]`.
pub fn lift_parameters(p: f64) -> Result<LiftParameters> {
    if !(-1.0..=0.0).contains(&p) {
        return Err(param(format!("overlap p must lie in [-1, 0], got {p}")));
    }
    let alpha = (-p / (1.0 - p)).sqrt();
    let beta = (1.0 / (1.0 - p)).sqrt();
    Ok(LiftParameters { p, alpha, beta })
}

fn left_marker(lift: &LiftParameters) -> DMatrix<f64> {
    let LiftParameters { alpha, beta, .. } = *lift;
    DMatrix::from_row_slice(3, 3, &[alpha, -beta, 0.0, beta, alpha, 0.0, 0.0, 0.0, 1.0])
}

/// A machine together with the parameters it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub machine: Moqfa,
    pub selection: Option<AngleSelection>,
    pub lift: Option<LiftParameters>,
}

fn unary_synthesis(modulus: u64, r_yes: u64, r_no: u64) -> Result<Synthesis> {
    let spec = UnaryPromise::new(modulus, r_yes, r_no)?;
    let selection = select_angle(modulus, spec.offset())?;
    let lift = lift_parameters(selection.p)?;
    let angle = selection.angle();
    let step = Rotation::trailing(3, Direction::Positive);
    let base = left_marker(&lift);
    let right = base.transpose();
    let shift = (modulus - r_yes) % modulus;
    let left = if shift == 0 { base } else { step.power(3, angle, shift) * base };
    let machine = Moqfa::rotational(left, angle, vec![('a', step)], right, [0])?;
    Ok(Synthesis { machine, selection: Some(selection), lift: Some(lift) })
}

/// Three-state exact machine for `A^{N,l}`.
pub fn build_unary(modulus: u64, l: u64) -> Result<Moqfa> {
    UnaryPromise::a_nl(modulus, l)?;
    Ok(unary_synthesis(modulus, 0, l)?.machine)
}

/// Three-state exact machine for `A^{N,r1,r2}`: the `A^{N,l}` machine with
/// `l = (r2 − r1) mod N` and `U_¢` pre-multiplied by `U_a^{(N − r1) mod N}`.
pub fn build_unary_general(modulus: u64, r_yes: u64, r_no: u64) -> Result<Moqfa> {
    Ok(unary_synthesis(modulus, r_yes, r_no)?.machine)
}

fn binary_l_synthesis(l: u64) -> Result<Synthesis> {
    BinaryPromise::bl(l)?;
    let angle = AngleSpec::new(1, 4 * l)?;
    let machine = Moqfa::rotational(
        DMatrix::identity(2, 2),
        angle,
        vec![
            ('a', Rotation::trailing(2, Direction::Negative)),
            ('b', Rotation::trailing(2, Direction::Positive)),
        ],
        DMatrix::identity(2, 2),
        [0],
    )?;
    Ok(Synthesis { machine, selection: None, lift: None })
}

/// Two-state exact machine for `B^l`, `θ = π/(2l)`.
pub fn build_binary_l(l: u64) -> Result<Moqfa> {
    Ok(binary_l_synthesis(l)?.machine)
}

fn binary_nl_synthesis(modulus: u64, l: u64) -> Result<Synthesis> {
    BinaryPromise::bnl(modulus, l)?;
    let selection = select_angle(modulus, l)?;
    let lift = lift_parameters(selection.p)?;
    let left = left_marker(&lift);
    let right = left.transpose();
    let machine = Moqfa::rotational(
        left,
        selection.angle(),
        vec![
            ('a', Rotation::trailing(3, Direction::Negative)),
            ('b', Rotation::trailing(3, Direction::Positive)),
        ],
        right,
        [0],
    )?;
    Ok(Synthesis { machine, selection: Some(selection), lift: Some(lift) })
}

/// Three-state exact machine for `B^{N,l}`.
pub fn build_binary_nl(modulus: u64, l: u64) -> Result<Moqfa> {
    Ok(binary_nl_synthesis(modulus, l)?.machine)
}

pub fn synthesize(spec: &PromiseSpec) -> Result<Synthesis> {
    match *spec {
        PromiseSpec::Unary(u) => unary_synthesis(u.modulus(), u.r_yes(), u.r_no()),
        PromiseSpec::Binary(BinaryPromise::Bl { l }) => binary_l_synthesis(l),
        PromiseSpec::Binary(BinaryPromise::BNl { modulus, l }) => binary_nl_synthesis(modulus, l),
    }
}

pub fn build_for(spec: &PromiseSpec) -> Result<Moqfa> {
    synthesize(spec).map(|s| s.machine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Word;

    #[test]
    fn select_mid_case() {
        let s = select_angle(8, 4).unwrap();
        assert_eq!((s.q, s.d, s.case), (1, 8, AngleCase::Mid));
        assert_eq!(s.p, -1.0);
    }

    #[test]
    fn select_small_case() {
        let s = select_angle(12, 2).unwrap();
        assert_eq!((s.q, s.d, s.case), (2, 12, AngleCase::SmallL));
        assert!((s.p + 0.5).abs() < 1e-15);
    }

    #[test]
    fn select_large_case() {
        let s = select_angle(13, 10).unwrap();
        assert_eq!((s.q, s.d, s.case), (2, 13, AngleCase::LargeL { j: 1 }));
        let expected = (std::f64::consts::TAU * 2.0 * 10.0 / 13.0).cos();
        assert!((s.p - expected).abs() < 1e-14);
        assert!((s.p + (std::f64::consts::PI / 13.0).cos()).abs() < 1e-14);
        assert!((s.p + 0.97094).abs() < 1e-5);
    }

    #[test]
    fn boundaries_go_to_mid() {
        assert_eq!(select_angle(8, 2).unwrap().case, AngleCase::Mid);
        assert_eq!(select_angle(8, 6).unwrap().case, AngleCase::Mid);
        assert_eq!(select_angle(4, 1).unwrap().p, 0.0);
        assert_eq!(select_angle(4, 3).unwrap().p, 0.0);
        assert_eq!(select_angle(9, 2).unwrap().case, AngleCase::SmallL);
        assert_eq!(select_angle(9, 7).unwrap().case, AngleCase::LargeL { j: 1 });
    }

    #[test]
    fn select_rejects_out_of_range() {
        assert!(matches!(select_angle(7, 0), Err(Error::Parameter(_))));
        assert!(matches!(select_angle(7, 7), Err(Error::Parameter(_))));
    }

    #[test]
    fn lift_examples() {
        let z = lift_parameters(0.0).unwrap();
        assert_eq!((z.alpha, z.beta), (0.0, 1.0));
        let h = lift_parameters(-1.0).unwrap();
        assert!((h.alpha - 0.5f64.sqrt()).abs() < 1e-15 && (h.beta - 0.5f64.sqrt()).abs() < 1e-15);
        let t = lift_parameters(-0.5).unwrap();
        assert!((t.alpha - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((t.beta - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((t.alpha - 0.57735).abs() < 1e-5 && (t.beta - 0.81650).abs() < 1e-5);
        assert!(lift_parameters(1e-9).is_err());
        assert!(lift_parameters(-1.0 - 1e-9).is_err());
        assert!(lift_parameters(f64::NAN).is_err());
    }

    #[test]
    fn general_with_zero_shift_matches_plain() {
        assert_eq!(build_unary_general(7, 0, 3).unwrap(), build_unary(7, 3).unwrap());
    }

    #[test]
    fn general_shifted_residues() {
        let m = build_unary_general(7, 2, 5).unwrap();
        assert!((m.accept_probability(&Word::unary(2)).unwrap() - 1.0).abs() < 1e-12);
        assert!(m.accept_probability(&Word::unary(5)).unwrap() <= 1e-18);
        assert!(build_unary_general(7, 3, 3).is_err());
        assert!(build_unary_general(7, 0, 7).is_err());
    }

    #[test]
    fn unary_examples() {
        let m = build_unary(7, 3).unwrap();
        assert_eq!(m.dim(), 3);
        assert!((m.accept_probability(&Word::empty()).unwrap() - 1.0).abs() < 1e-15);
        assert!(m.accept_probability(&Word::unary(10)).unwrap() <= 1e-18);
        assert!(build_unary(7, 7).is_err());
        assert!(build_unary(7, 0).is_err());
    }

    #[test]
    fn binary_l_examples() {
        let m = build_binary_l(1).unwrap();
        assert_eq!(m.dim(), 2);
        assert!((m.accept_probability(&Word::parse("ab").unwrap()).unwrap() - 1.0).abs() < 1e-15);
        let v = m.final_state(&Word::parse("b").unwrap()).unwrap();
        assert_eq!(v.amplitudes()[0], 0.0);
        assert_eq!(v.amplitudes()[1].abs(), 1.0);
        let m4 = build_binary_l(4).unwrap();
        assert!(m4.accept_probability(&Word::ab(3, 7)).unwrap() <= 1e-30);
        assert!(build_binary_l(0).is_err());
        let a = m4.angle().unwrap();
        assert_eq!((a.q(), a.d()), (1, 16));
    }

    #[test]
    fn binary_nl_examples() {
        let m = build_binary_nl(5, 2).unwrap();
        assert!((m.accept_probability(&Word::parse("aabb").unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert!(m.accept_probability(&Word::ab(1, 8)).unwrap() <= 1e-18);
        let m = build_binary_nl(13, 10).unwrap();
        assert!(m.accept_probability(&Word::ab(2, 12)).unwrap() <= 1e-18);
        assert!(build_binary_nl(5, 5).is_err());
    }

    #[test]
    fn markers_are_mutually_inverse() {
        for m in [build_unary(9, 4).unwrap(), build_binary_nl(11, 10).unwrap()] {
            let prod = m.right_marker() * m.left_marker();
            assert!((prod - DMatrix::identity(3, 3)).amax() <= 1e-12);
        }
    }

    #[test]
    fn synthesize_reports_parameters() {
        let s = synthesize(&PromiseSpec::a_nl(13, 10).unwrap()).unwrap();
        assert_eq!(s.selection.unwrap().case.tag(), "large_l");
        assert!(s.lift.unwrap().alpha > 0.0);
        let s = synthesize(&PromiseSpec::bl(3).unwrap()).unwrap();
        assert!(s.selection.is_none());
        assert_eq!(s.machine.dim(), 2);
    }
}
