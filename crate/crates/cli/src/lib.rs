//! Report layer and command implementations behind the `ssg` binary.
//!
//! Every command turns a [`RunConfig`] into a [`Report`]; the report embeds
//! the configuration, so `ssg replay` can rerun it and compare bytes.

pub mod config;
pub mod laws;
pub mod report;
mod run;

pub use config::{parse_levels, Budgets, Command, Format, GroupSelector, Lemma, RunConfig};
pub use report::{Report, Stored, Table, Verdict};
pub use run::{
    load_group, replay, run, Outcome, PsiResult, ReplaySummary, RunError, StabResult,
    DEFAULT_ADDING_MACHINE_LEVEL, DEFAULT_DIHEDRAL_LEVEL, DEFAULT_LAW_CHECKS, DEFAULT_PSI_LEVEL,
    DEFAULT_RESIDUES,
};

/// Exit status for usage errors and unreadable input.
pub const EXIT_USAGE: i32 = 3;
