//! Library surface of the command-line tool: file formats and subcommand
//! implementations, separated from the binary for testability.

pub mod commands;
pub mod format;

pub use commands::{run, Cli};

/// Exit code for the distinguished access-denial outcome (⊥).
pub const EXIT_ACCESS_DENIED: i32 = 2;

/// Maps an error chain to the process exit code: ⊥ is 2, anything else 1.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(qhibe::Error::AccessDenied) = cause.downcast_ref::<qhibe::Error>() {
            return EXIT_ACCESS_DENIED;
        }
    }
    1
}
