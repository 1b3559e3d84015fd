//! Site bundles, report emission and the `relsite` command line.

pub mod bundle;
pub mod commands;
pub mod emit;
pub mod export;
pub mod resolve;

pub use bundle::{parse_site_bundle, print_site_bundle, ParseError, SiteBundle};
pub use commands::{run, Cli, Command, Format};
pub use emit::{render_human, render_json, Meta, Outcome};
pub use resolve::{resolve, ResolveError, Resolved};
