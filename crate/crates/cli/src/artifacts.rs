//! Artifact writing. Every file carries the tool version and config hash.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::CliError;

pub const TOOL: &str = "rvlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    config: serde_json::Value,
    subcommand: String,
    written: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path, cfg: &ExperimentConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash: cfg.hash(),
            config: cfg.to_json(),
            subcommand: cfg.subcommand.clone(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn put(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// `{"meta": .., "config": .., "result": value}`.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let doc = json!({
            "meta": { "tool": TOOL, "version": VERSION, "subcommand": self.subcommand, "config_hash": self.hash },
            "config": self.config,
            "result": value,
        });
        let mut body = serde_json::to_string_pretty(&doc).expect("serializable");
        body.push('\n');
        self.put(name, &body)
    }

    /// CSV with a `#` metadata line, then `header`, then `rows`.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
        let mut body = format!("# {TOOL} {VERSION} config_hash={}\n{}\n", self.hash, header.join(","));
        for row in rows {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(body, "{}", cells.join(","));
        }
        self.put(name, &body)
    }

    pub fn svg(&mut self, name: &str, svg: &str) -> Result<(), CliError> {
        let tag = format!("<!-- {TOOL} {VERSION} config_hash={} -->\n", self.hash);
        let body = match svg.find('>') {
            Some(i) => format!("{}\n{tag}{}", &svg[..=i], svg[i + 1..].trim_start()),
            None => svg.to_string(),
        };
        self.put(name, &body)
    }

    /// Writes `manifest.json` listing the artifacts and returns their paths.
    pub fn finish(mut self) -> Result<Vec<PathBuf>, CliError> {
        let files = self.written.clone();
        self.json("manifest.json", &json!({ "files": files }))?;
        Ok(self.written.iter().map(|n| self.dir.join(n)).collect())
    }
}
