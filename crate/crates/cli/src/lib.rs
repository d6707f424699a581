//! Command-line front end: problem files, commands and reports.

pub mod commands;
pub mod corpus;
pub mod problem;
pub mod report;

pub use commands::{
    cmd_check, cmd_convert, cmd_demo, cmd_derive_operator, cmd_reduce, cmd_verify_solution,
    CliError, Options,
};
pub use problem::{OperatorInput, ProblemError, ProblemFile};
pub use report::{Report, Status};
