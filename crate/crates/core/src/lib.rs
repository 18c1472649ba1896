//! Exact measure-once quantum finite automata for unary and binary promise
//! problems, minimal deterministic automata for the same problems, and tools
//! that compare the two.

pub mod cli;
pub mod dfa;
pub mod error;
pub mod moqfa;
pub mod parallel;
pub mod promise;
pub mod synth;
pub mod verify;
pub mod word;

pub use dfa::{CertificateResult, Dfa, MinimalityCertificate};
pub use error::{Error, Result};
pub use moqfa::{AngleSpec, Moqfa};
pub use promise::{BinaryPromise, Classification, PromiseSpec, UnaryPromise};
pub use synth::{select_angle, synthesize, AngleSelection};
pub use verify::{verify_exactness, ExactnessReport, Tolerances};
pub use word::Word;
