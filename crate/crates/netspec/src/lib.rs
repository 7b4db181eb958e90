//! Text format for SLH networks and the `slh` command-line front end.
//!
//! A document declares operator spaces, systems, exosystem classes,
//! observables and compositions, and designates one top-level system:
//!
//! ```text
//! space cav fock 20
//! system P { L = [a@cav] }
//! system C { L = [-0.5] }
//! compose N = P series C
//! observable V = (adag@cav - 1) * (a@cav - 1)
//! top N
//! ```

pub mod ast;
pub mod cli;
pub mod diag;
pub mod elaborate;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use cli::{run_command, run_command_with};
pub use diag::{Code, Diagnostic, Pos};
pub use elaborate::{elaborate, load, Model, Scope};
pub use parser::{parse_document, parse_expr};
pub use printer::{print_document, print_expr};
