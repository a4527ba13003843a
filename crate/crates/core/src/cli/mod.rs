//! Batch front end: specification files in, JSONL reports out.

pub mod run;
pub mod spec;

pub use run::{derive_seed, run, CheckRecord, Header, Report, RunOptions, Status};
pub use spec::{load_spec, parse_spec, Check, CheckDecl, SpecError, SystemSpec};
