//! Exactness checks, quantum/classical cross-checks and succinctness tables.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dfa::{self, Dfa};
use crate::error::{param, Error, Result};
use crate::moqfa::Moqfa;
use crate::parallel;
use crate::promise::{BinaryPromise, Classification, PromiseSpec, UnaryPromise};
use crate::synth;

/// Acceptance thresholds. A yes-instance passes when `P ≥ 1 − yes`, a
/// no-instance when `P ≤ no`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub yes: f64,
    pub no: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { yes: 1e-9, no: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactnessReport {
    pub spec: PromiseSpec,
    pub machine_states: usize,
    pub i_max: u64,
    pub j_max: u64,
    pub tolerances: Tolerances,
    pub yes_checked: u64,
    pub no_checked: u64,
    /// max over yes-instances of `|1 − P_accept|`
    pub max_yes_deficit: f64,
    /// max over no-instances of `P_accept`
    pub max_no_leak: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn check_alphabet(machine: &Moqfa, spec: &PromiseSpec) -> Result<()> {
    let mut have = machine.alphabet();
    have.sort_unstable();
    if have != spec.alphabet() {
        return Err(param(format!(
            "machine alphabet {have:?} does not match {spec} alphabet {:?}",
            spec.alphabet()
        )));
    }
    Ok(())
}

/// Runs `machine` on every instance of `spec` up to the bounds.
pub fn verify_exactness(
    machine: &Moqfa,
    spec: &PromiseSpec,
    i_max: u64,
    j_max: u64,
    tolerances: Tolerances,
) -> Result<ExactnessReport> {
    check_alphabet(machine, spec)?;
    let instances = spec.enumerate_instances(i_max, j_max);
    if instances.is_empty() {
        return Err(param("empty witness set"));
    }
    let (mut yes_checked, mut no_checked) = (0u64, 0u64);
    let (mut max_yes_deficit, mut max_no_leak) = (0.0f64, 0.0f64);
    for (word, label) in &instances {
        let p = machine.accept_probability(word)?;
        match label {
            Classification::Yes => {
                yes_checked += 1;
                max_yes_deficit = max_yes_deficit.max((1.0 - p).abs());
            }
            Classification::No => {
                no_checked += 1;
                max_no_leak = max_no_leak.max(p);
            }
            Classification::Outside => unreachable!("instances are always yes or no"),
        }
    }
    let pass = yes_checked > 0
        && no_checked > 0
        && max_yes_deficit <= tolerances.yes
        && max_no_leak <= tolerances.no;
    Ok(ExactnessReport {
        spec: *spec,
        machine_states: machine.dim(),
        i_max,
        j_max,
        tolerances,
        yes_checked,
        no_checked,
        max_yes_deficit,
        max_no_leak,
        pass,
        seed: None,
    })
}

/// True iff on every witness the machine's verdict is decisive and agrees
/// with the DFA: `P ≥ 1 − tol` exactly when the DFA accepts and `P ≤ tol`
/// exactly when it rejects.
pub fn cross_check(
    machine: &Moqfa,
    automaton: &Dfa,
    spec: &PromiseSpec,
    i_max: u64,
    j_max: u64,
    tolerances: Tolerances,
) -> Result<bool> {
    check_alphabet(machine, spec)?;
    for (word, _) in spec.enumerate_instances(i_max, j_max) {
        let p = machine.accept_probability(&word)?;
        let accepted = automaton.run(&word)?;
        let quantum_accepts = p >= 1.0 - tolerances.yes;
        let quantum_rejects = p <= tolerances.no;
        if quantum_accepts != accepted || quantum_rejects == accepted {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub spec: PromiseSpec,
    pub qfa_states: usize,
    pub dfa_states: u64,
    pub dfa_certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableOptions {
    /// `None` uses the per-family certification default.
    pub i_max: Option<u64>,
    pub j_max: u64,
    pub budget: u64,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self { i_max: None, j_max: crate::promise::DEFAULT_J_MAX, budget: dfa::DEFAULT_BUDGET }
    }
}

fn separation_row(spec: &PromiseSpec, options: TableOptions) -> Result<SeparationRow> {
    let machine = synth::build_for(spec)?;
    let (dfa_states, _) = dfa::minimal_state_count(spec)?;
    let dfa_certified = match dfa::certify_minimality(spec, options.i_max, options.j_max, options.budget) {
        Ok(cert) => cert.is_certified(),
        Err(Error::Budget { .. }) => false,
        Err(e) => return Err(e),
    };
    Ok(SeparationRow { spec: *spec, qfa_states: machine.dim(), dfa_states, dfa_certified })
}

/// One row per spec, in input order. Certification runs where the budget
/// allows; budget misses show up as `dfa_certified = false`.
pub fn separation_table(specs: &[PromiseSpec], options: TableOptions) -> Result<Vec<SeparationRow>> {
    parallel::install(|| specs.par_iter().map(|s| separation_row(s, options)).collect())
}

pub const CSV_HEADER: [&str; 8] = ["family", "N", "l", "r1", "r2", "qfa_states", "dfa_states", "dfa_certified"];

fn csv_fields(row: &SeparationRow) -> [String; 8] {
    let blank = String::new;
    let (n, l, r1, r2) = match row.spec {
        PromiseSpec::Unary(u) => (
            u.modulus().to_string(),
            u.offset().to_string(),
            u.r_yes().to_string(),
            u.r_no().to_string(),
        ),
        PromiseSpec::Binary(BinaryPromise::Bl { l }) => (blank(), l.to_string(), blank(), blank()),
        PromiseSpec::Binary(BinaryPromise::BNl { modulus, l }) => (modulus.to_string(), l.to_string(), blank(), blank()),
    };
    [
        row.spec.family().to_string(),
        n,
        l,
        r1,
        r2,
        row.qfa_states.to_string(),
        row.dfa_states.to_string(),
        row.dfa_certified.to_string(),
    ]
}

/// Writes the table as CSV with [`CSV_HEADER`].
pub fn write_csv<W: Write>(rows: &[SeparationRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record(csv_fields(row))?;
    }
    writer.flush()?;
    Ok(())
}

/// `count` distinct-residue specs `A^{N,r1,r2}` drawn from a seeded stream.
pub fn sample_unary_specs(modulus: u64, count: usize, seed: u64) -> Result<Vec<UnaryPromise>> {
    if modulus < 2 {
        return Err(param("N must be at least 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let r1 = rng.gen_range(0..modulus);
        let r2 = rng.gen_range(0..modulus);
        if r1 != r2 {
            out.push(UnaryPromise::new(modulus, r1, r2)?);
        }
    }
    Ok(out)
}
