//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or parameter error, 3 internal synthesis
//! failure, 4 a result that contradicts the constructions (a counterexample
//! DFA or a failed exactness check), 5 enumeration budget exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dfa::{self, CertificateResult};
use crate::error::Error;
use crate::moqfa::{Moqfa, ORTHOGONALITY_TOL};
use crate::promise::{PromiseSpec, DEFAULT_I_MAX, DEFAULT_J_MAX};
use crate::synth;
use crate::verify::{self, TableOptions, Tolerances};
use crate::word::Word;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;
pub const EXIT_CONTRADICTION: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "qfa-exact", version, about = "Exact quantum finite automata vs. minimal DFAs for promise problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the exact quantum machine for a promise problem and write it as JSON.
    Synth {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the acceptance probability of a machine on one word.
    Run {
        /// Machine JSON produced by `synth`.
        #[arg(long)]
        machine: PathBuf,
        /// Word over the machine alphabet, plain ("aabbb") or with exponents ("a^2b^3").
        #[arg(long, conflicts_with = "length", required_unless_present = "length")]
        word: Option<String>,
        /// Length n of the unary word a^n.
        #[arg(long)]
        length: Option<u64>,
    },
    /// Build the minimal DFA and write it as JSON.
    Dfa {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exhaustively certify that no smaller DFA solves the problem.
    Certify {
        #[command(flatten)]
        spec: SpecArgs,
        /// Witness bound on i [default: 2d+2 for family A, 64 for B and BN]
        #[arg(long)]
        i_max: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_J_MAX)]
        j_max: u64,
        /// Maximum number of candidate machines to enumerate.
        #[arg(long, default_value_t = dfa::DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check acceptance probabilities 1 / 0 on every instance up to the bounds.
    Verify {
        #[command(flatten)]
        spec: SpecArgs,
        /// Verify this machine instead of the synthesized one.
        #[arg(long)]
        machine: Option<PathBuf>,
        /// Verify this many random A^{N,r1,r2} instances (family A with N only).
        #[arg(long)]
        samples: Option<usize>,
        /// Seed for --samples.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_I_MAX)]
        i_max: u64,
        #[arg(long, default_value_t = DEFAULT_J_MAX)]
        j_max: u64,
        #[command(flatten)]
        tolerances: ToleranceArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emit the quantum vs. classical state-count table for a list of specs.
    Table {
        /// JSON array of specs, e.g. [{"family":"A","N":7,"l":3},{"family":"B","l":4}].
        #[arg(long)]
        specs: PathBuf,
        /// Witness bound for certification [default: 2d+2 for family A, 64 for B and BN]
        #[arg(long)]
        i_max: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_J_MAX)]
        j_max: u64,
        #[arg(long, default_value_t = dfa::DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
    #[value(name = "BN", alias = "bn")]
    Bn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    /// Promise family: A (unary), B (B^l) or BN (B^{N,l}).
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long = "N")]
    pub modulus: Option<u64>,
    #[arg(long)]
    pub l: Option<u64>,
    /// Yes residue for family A (with --r2, instead of --l).
    #[arg(long)]
    pub r1: Option<u64>,
    /// No residue for family A.
    #[arg(long)]
    pub r2: Option<u64>,
}

impl SpecArgs {
    pub fn to_spec(&self) -> Result<PromiseSpec, Error> {
        let bad = |msg: &str| Err(Error::Parameter(msg.to_string()));
        match (self.family, self.modulus, self.l, self.r1, self.r2) {
            (Family::A, Some(n), Some(l), None, None) => PromiseSpec::a_nl(n, l),
            (Family::A, Some(n), None, Some(r1), Some(r2)) => PromiseSpec::a_general(n, r1, r2),
            (Family::A, ..) => bad("family A takes --N with either --l or both --r1 and --r2"),
            (Family::B, None, Some(l), None, None) => PromiseSpec::bl(l),
            (Family::B, ..) => bad("family B takes --l only"),
            (Family::Bn, Some(n), Some(l), None, None) => PromiseSpec::bnl(n, l),
            (Family::Bn, ..) => bad("family BN takes --N and --l only"),
        }
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ToleranceArgs {
    /// Yes-instances pass when P >= 1 - tol_yes.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_yes: f64,
    /// No-instances pass when P <= tol_no.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_no: f64,
}

impl From<ToleranceArgs> for Tolerances {
    fn from(t: ToleranceArgs) -> Self {
        Tolerances { yes: t.tol_yes, no: t.tol_no }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Internal(_) => EXIT_INTERNAL,
            Error::Budget { .. } => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type CliResult = Result<i32, Failure>;

/// Probability with 15 significant digits.
pub fn format_probability(p: f64) -> String {
    if p == 0.0 || p.abs() >= 1e-3 {
        format!("{p:.15}")
    } else {
        format!("{p:.14e}")
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Error::from(e).into())
}

/// Writes `payload` to `output` (or stdout); the one-line `summary` goes to
/// stdout when the payload went to a file and to stderr otherwise.
fn deliver(
    payload: &str,
    summary: &str,
    output: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), Failure> {
    match output {
        Some(path) => {
            fs::write(path, payload)?;
            writeln!(stdout, "{summary}")?;
        }
        None => {
            stdout.write_all(payload.as_bytes())?;
            if !payload.ends_with('\n') {
                writeln!(stdout)?;
            }
            writeln!(stderr, "{summary}")?;
        }
    }
    Ok(())
}

fn read_machine(path: &Path) -> Result<Moqfa, Failure> {
    let text = fs::read_to_string(path)?;
    let machine = Moqfa::from_json(&text)?;
    let dev = machine.check_orthogonality();
    if dev > ORTHOGONALITY_TOL {
        return Err(Failure { code: EXIT_USAGE, message: format!("machine is not orthogonal (deviation {dev:e})") });
    }
    Ok(machine)
}

fn reject_csv(format: Format) -> Result<(), Failure> {
    if format == Format::Csv {
        return Err(Failure { code: EXIT_USAGE, message: "csv output is only available for `table`".into() });
    }
    Ok(())
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    match command {
        Command::Synth { spec, output } => {
            let spec = spec.to_spec()?;
            let synthesis = synth::synthesize(&spec)?;
            let m = &synthesis.machine;
            let dev = m.check_orthogonality();
            if dev > ORTHOGONALITY_TOL {
                return Err(Error::Internal(format!("synthesized matrices deviate from orthogonal by {dev:e}")).into());
            }
            let angle = m.angle().expect("synthesized machines carry their angle");
            let (p, case) = match synthesis.selection {
                Some(sel) => (sel.p, sel.case.tag()),
                None => (0.0, "quarter_turn"),
            };
            let summary = format!(
                "{spec}: dim={} theta=2pi*{}/{} p={p} case={case}",
                m.dim(),
                angle.q(),
                angle.d()
            );
            deliver(&m.to_json()?, &summary, output.as_deref(), stdout, stderr)?;
            Ok(EXIT_OK)
        }
        Command::Run { machine, word, length } => {
            let machine = read_machine(&machine)?;
            let word = match (word, length) {
                (_, Some(n)) => Word::unary(n),
                (Some(w), None) => Word::parse(&w)?,
                (None, None) => unreachable!("clap requires --word or --length"),
            };
            let p = machine.accept_probability(&word)?;
            writeln!(stdout, "{}", format_probability(p))?;
            Ok(EXIT_OK)
        }
        Command::Dfa { spec, output } => {
            let spec = spec.to_spec()?;
            let (d, formula) = dfa::minimal_state_count(&spec)?;
            let automaton = dfa::min_dfa_for(&spec)?;
            let summary = format!("{spec}: d={d} ({})", formula.name());
            deliver(&automaton.to_json()?, &summary, output.as_deref(), stdout, stderr)?;
            Ok(EXIT_OK)
        }
        Command::Certify { spec, i_max, j_max, budget, format, output } => {
            reject_csv(format)?;
            let spec = spec.to_spec()?;
            let cert = dfa::certify_minimality(&spec, i_max, j_max, budget)?;
            let verdict = match &cert.result {
                CertificateResult::Certified => "Certified",
                CertificateResult::CounterexampleFound { .. } => "CounterexampleFound",
            };
            let summary = format!(
                "{spec}: {verdict} d={} machines_checked={} i_max={} j_max={} budget={}",
                cert.claimed_d, cert.machines_checked, cert.witness_bounds.i_max, cert.witness_bounds.j_max, budget
            );
            let payload = match format {
                Format::Text => format!("{summary}\n"),
                _ => to_json(&cert)?,
            };
            deliver(&payload, &summary, output.as_deref(), stdout, stderr)?;
            if !cert.is_certified() {
                writeln!(stderr, "warning: a DFA below the claimed size solves every witness")?;
                return Ok(EXIT_CONTRADICTION);
            }
            Ok(EXIT_OK)
        }
        Command::Verify { spec, machine, samples, seed, i_max, j_max, tolerances, format, output } => {
            reject_csv(format)?;
            let tolerances = Tolerances::from(tolerances);
            let reports = match samples {
                Some(count) => {
                    let modulus = match (&spec.family, spec.modulus, spec.l, spec.r1, spec.r2, &machine) {
                        (Family::A, Some(n), None, None, None, None) => n,
                        _ => {
                            return Err(Failure {
                                code: EXIT_USAGE,
                                message: "--samples needs --family A with --N only".into(),
                            })
                        }
                    };
                    let mut reports = Vec::with_capacity(count);
                    for u in verify::sample_unary_specs(modulus, count, seed)? {
                        let spec = PromiseSpec::Unary(u);
                        let m = synth::build_for(&spec)?;
                        let mut report = verify::verify_exactness(&m, &spec, i_max, j_max, tolerances)?;
                        report.seed = Some(seed);
                        reports.push(report);
                    }
                    reports
                }
                None => {
                    let spec = spec.to_spec()?;
                    let m = match &machine {
                        Some(path) => read_machine(path)?,
                        None => synth::build_for(&spec)?,
                    };
                    vec![verify::verify_exactness(&m, &spec, i_max, j_max, tolerances)?]
                }
            };
            let lines: Vec<String> = reports
                .iter()
                .map(|r| {
                    format!(
                        "{}: {} yes={} no={} max_yes_deficit={:e} max_no_leak={:e}",
                        r.spec,
                        if r.pass { "pass" } else { "FAIL" },
                        r.yes_checked,
                        r.no_checked,
                        r.max_yes_deficit,
                        r.max_no_leak
                    )
                })
                .collect();
            let summary = lines.join("\n");
            let payload = match format {
                Format::Text => format!("{summary}\n"),
                _ if reports.len() == 1 => to_json(&reports[0])?,
                _ => to_json(&reports)?,
            };
            deliver(&payload, &summary, output.as_deref(), stdout, stderr)?;
            Ok(if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_CONTRADICTION })
        }
        Command::Table { specs, i_max, j_max, budget, format, output } => {
            let text = fs::read_to_string(&specs)?;
            let specs: Vec<PromiseSpec> = serde_json::from_str(&text).map_err(Error::from)?;
            let rows = verify::separation_table(&specs, TableOptions { i_max, j_max, budget })?;
            let payload = match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    verify::write_csv(&rows, &mut buf)?;
                    String::from_utf8(buf).expect("csv output is UTF-8")
                }
                Format::Json => to_json(&rows)?,
                Format::Text => rows
                    .iter()
                    .map(|r| format!("{}: qfa={} dfa={} certified={}\n", r.spec, r.qfa_states, r.dfa_states, r.dfa_certified))
                    .collect(),
            };
            let summary = format!("{} rows", rows.len());
            deliver(&payload, &summary, output.as_deref(), stdout, stderr)?;
            Ok(EXIT_OK)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_args(family: Family, n: Option<u64>, l: Option<u64>, r1: Option<u64>, r2: Option<u64>) -> SpecArgs {
        SpecArgs { family, modulus: n, l, r1, r2 }
    }

    #[test]
    fn spec_args_must_match_family() {
        assert!(spec_args(Family::A, Some(7), Some(3), None, None).to_spec().is_ok());
        assert!(spec_args(Family::A, Some(7), None, Some(2), Some(5)).to_spec().is_ok());
        assert!(spec_args(Family::A, Some(7), Some(3), Some(2), None).to_spec().is_err());
        assert!(spec_args(Family::B, Some(7), Some(3), None, None).to_spec().is_err());
        assert!(spec_args(Family::Bn, None, Some(3), None, None).to_spec().is_err());
    }

    #[test]
    fn probability_formatting() {
        assert_eq!(format_probability(1.0), "1.000000000000000");
        assert_eq!(format_probability(0.0), "0.000000000000000");
        assert_eq!(format_probability(0.25), "0.250000000000000");
        assert_eq!(format_probability(1.5e-31), "1.50000000000000e-31");
    }
}
