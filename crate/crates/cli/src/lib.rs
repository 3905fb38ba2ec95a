pub mod commands;
pub mod output;
pub mod spec;

pub use commands::{exit_code, run, Cli};
pub use output::{Envelope, Format, SCHEMA_VERSION};
pub use spec::{load_lattice, parse_lattice_spec, parse_lattice_spec_signed};
