use std::io::Read;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use relsite::commands::{bundle_path, guards_from};
use relsite::emit::{CommandError, ErrorKind};
use relsite::{render_human, render_json, run, Cli, Format, Meta, Outcome};

fn read_bundle(path: &str) -> Result<String, CommandError> {
    let mut text = String::new();
    let res = if path == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| text)
    } else {
        std::fs::read_to_string(path)
    };
    res.map_err(|e| CommandError::new(ErrorKind::Input, format!("cannot read `{path}`: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let env = std::env::var("RELSITE_GUARDS").ok();
    let guards = guards_from(env.as_deref(), &cli.guards);
    let input = bundle_path(&cli.command).map(read_bundle).transpose();
    let outcome = match (&guards, input) {
        (Err(e), _) => Outcome::failed(e.clone()),
        (Ok(_), Err(e)) => Outcome::failed(e),
        (Ok(g), Ok(text)) => run(&cli.command, text.as_deref().unwrap_or(""), g),
    };
    let meta = Meta {
        command: std::env::args().skip(1).collect(),
        guards: guards.unwrap_or_default(),
        timing_ms: cli.timing.then(|| start.elapsed().as_millis()),
    };
    let text = match cli.format {
        Format::Human => render_human(&outcome, &meta),
        Format::Json => render_json(&outcome, &meta),
    };
    print!("{text}");
    ExitCode::from(outcome.exit_code() as u8)
}
