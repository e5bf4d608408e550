//! Flat JSON configuration merged with command-line flags.

use super::{Cli, Command};
use crate::error::{Error, Result};
use clap::CommandFactory;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use std::path::PathBuf;

/// A fully resolved run: command, merged parameters, seed and output directory.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let name = cli.command.name();
        let mut file = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                match serde_json::from_str::<Value>(&text)
                    .map_err(|e| Error::Config(format!("{} is not valid JSON: {e}", path.display())))?
                {
                    Value::Object(m) => m,
                    _ => return Err(Error::Config(format!("{} must hold a flat JSON object", path.display()))),
                }
            }
            None => Map::new(),
        };
        let file_seed = file.remove("seed");
        let file_out = file.remove("output_dir");
        let allowed = allowed_keys(name);
        if let Some(bad) = file.keys().find(|k| !allowed.contains(k)) {
            return Err(Error::Config(format!("unknown key `{bad}` for command `{name}`; accepted: {}", allowed.join(", "))));
        }
        let flags = match &cli.command {
            Command::Neck(a) => serde_json::to_value(a)?,
            Command::Glue(a) => serde_json::to_value(a)?,
            Command::Graph(a) => serde_json::to_value(a)?,
            Command::Ode(a) => serde_json::to_value(a)?,
            Command::Project(a) => serde_json::to_value(a)?,
            Command::Norms(a) => serde_json::to_value(a)?,
            Command::Report(a) => serde_json::to_value(a)?,
        };
        if let Value::Object(f) = flags {
            for (k, v) in f {
                file.insert(k, v);
            }
        }
        let seed = match (cli.seed, file_seed) {
            (Some(s), _) => s,
            (None, Some(v)) => v.as_u64().ok_or_else(|| Error::Config(format!("seed must be a non-negative integer, got {v}")))?,
            (None, None) => 0,
        };
        let output_dir = match (&cli.out, file_out) {
            (Some(p), _) => p.clone(),
            (None, Some(Value::String(s))) => PathBuf::from(s),
            (None, Some(v)) => return Err(Error::Config(format!("output_dir must be a string, got {v}"))),
            (None, None) => match file.get("root") {
                Some(Value::String(root)) if name == "report" => PathBuf::from(root),
                _ => PathBuf::from("neckflow-out"),
            },
        };
        Ok(RunConfig { command: name.to_string(), parameters: file, seed, output_dir })
    }

    /// The merged parameters as the typed argument struct of the command.
    pub fn typed<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(Value::Object(self.parameters.clone()))
            .map_err(|e| Error::Config(format!("bad parameter for `{}`: {e}", self.command)))
    }
}

/// Argument ids of a subcommand, which are also its configuration keys.
fn allowed_keys(name: &str) -> Vec<String> {
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(name).expect("subcommand exists");
    sub.get_arguments()
        .map(|a| a.get_id().as_str().to_string())
        .filter(|id| !matches!(id.as_str(), "config" | "out" | "seed" | "help" | "version"))
        .collect()
}
