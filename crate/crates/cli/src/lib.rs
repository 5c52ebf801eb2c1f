//! Batch front end: each subcommand resolves a flat configuration, runs one
//! experiment and writes JSON/CSV/SVG artifacts stamped with the config
//! hash.
//!
//! Exit codes: `0` success, `2` configuration error, `3` numeric failure,
//! `4` violated precondition. Errors are printed to stderr as JSON.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod schema;
pub mod svg;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Arg, ArgAction, Command};
use serde_json::json;

pub use commands::{execute, Outcome};
pub use config::ExperimentConfig;

/// Environment variable overriding the output directory of the config file.
pub const OUT_ENV: &str = "RVLAB_OUT";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Core(rvlab_core::Error),
}

impl From<rvlab_core::Error> for CliError {
    fn from(e: rvlab_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        use rvlab_core::ErrorKind;
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => "config",
                ErrorKind::Numeric => "numeric",
                ErrorKind::Precondition => "precondition",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "numeric" => 3,
            "precondition" => 4,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "exit_code": self.exit_code(), "message": self.to_string() } })
    }
}

fn leak(s: String) -> &'static str {
    Box::leak(s.into_boxed_str())
}

pub fn command() -> Command {
    let mut cmd = Command::new("rvlab")
        .version(artifacts::VERSION)
        .about("Numerical experiments for superlinear elliptic and parabolic problems")
        .subcommand_required(true);
    for s in schema::ALL {
        let mut sub = Command::new(s.name)
            .about(s.about)
            .allow_negative_numbers(true)
            .arg(Arg::new("config").long("config").value_name("FILE").help("flat TOML config"))
            .arg(Arg::new("out").long("out").value_name("DIR").help(format!("output directory (overrides ${OUT_ENV})")));
        for k in s.keys {
            let mut help = k.help.to_string();
            if let Some(d) = k.default {
                help.push_str(&format!(" [default: {d}]"));
            }
            sub = sub.arg(
                Arg::new(k.name)
                    .long(leak(k.name.replace('_', "-")))
                    .value_name(leak(format!("{:?}", k.kind).to_uppercase()))
                    .action(ArgAction::Set)
                    .allow_hyphen_values(true)
                    .help(help),
            );
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn resolve(matches: &clap::ArgMatches) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let schema = schema::find(name).expect("registered subcommand");
    let file = match sub.get_one::<String>("config") {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read config {p}: {e}")))?),
        None => None,
    };
    let overrides: Vec<(String, String)> =
        schema.keys.iter().filter_map(|k| sub.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone()))).collect();
    let cfg = ExperimentConfig::resolve(schema, file.as_deref(), &overrides)?;
    let out = sub
        .get_one::<String>("out")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("rvlab-out").join(name));
    Ok((cfg, out))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = CliError::Config(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    let result = resolve(&matches).and_then(|(cfg, out)| execute(&cfg, &out));
    match result {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", outcome.summary);
            for f in &outcome.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
