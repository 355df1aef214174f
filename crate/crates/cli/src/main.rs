//! `icot` — scenario-driven simulator for induced-coherence optical
//! tomography.
//!
//! Exit codes: 0 success, 2 parse error (bad file or override), 3 validation
//! error (field path in the message), 4 runtime error.

// Validation uses negated comparisons so NaN fails the checks too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod run;
mod spec;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use run::run_scenario;
use spec::Scenario;

const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

/// Bundled scenarios, embedded so the binary is self-contained.
const BUNDLED: &[(&str, &str)] = &[
    ("mirror-fd", include_str!("../scenarios/mirror-fd.json")),
    ("mirror-td", include_str!("../scenarios/mirror-td.json")),
    ("phase-scan", include_str!("../scenarios/phase-scan.json")),
    ("sample1", include_str!("../scenarios/sample1.json")),
    ("sample2", include_str!("../scenarios/sample2.json")),
    ("fig5a", include_str!("../scenarios/fig5a.json")),
    ("fig5b", include_str!("../scenarios/fig5b.json")),
    (
        "resolution-curve",
        include_str!("../scenarios/resolution-curve.json"),
    ),
    ("snr-curve", include_str!("../scenarios/snr-curve.json")),
    ("edge-image", include_str!("../scenarios/edge-image.json")),
];

#[derive(Parser)]
#[command(
    name = "icot",
    about = "Induced-coherence optical tomography simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (bundled name or path to a JSON file).
    Run {
        scenario: String,
        /// Override the detector RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores). Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (default: `out/<scenario-name>`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Dotted-path override, e.g. interferometer.idler_transmittance=0.5.
        /// May be given multiple times.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Parse and validate a scenario without running it.
    Validate {
        scenario: String,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the bundled scenarios.
    ListScenarios,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            scenario,
            seed,
            threads,
            out_dir,
            overrides,
        } => {
            if let Some(n) = threads {
                // Ignore the error if a pool already exists; determinism does
                // not depend on the thread count.
                let _ = rayon_pool(n);
            }
            let parsed = match load_scenario(&scenario, &overrides) {
                Ok(s) => s,
                Err(e) => return fail(EXIT_PARSE, &format!("parse error: {e}")),
            };
            if let Err(e) = parsed.validate() {
                return fail(EXIT_VALIDATION, &format!("validation error: {e}"));
            }
            let out_dir = out_dir.unwrap_or_else(|| PathBuf::from("out").join(&parsed.name));
            match run_scenario(&parsed, &out_dir, seed) {
                Ok(output) => {
                    for file in &output.files {
                        println!("{}", output.out_dir.join(file).display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_RUNTIME, &format!("runtime error: {e}")),
            }
        }
        Command::Validate {
            scenario,
            overrides,
        } => {
            let parsed = match load_scenario(&scenario, &overrides) {
                Ok(s) => s,
                Err(e) => return fail(EXIT_PARSE, &format!("parse error: {e}")),
            };
            match parsed.validate() {
                Ok(()) => {
                    println!("ok: {}", parsed.name);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_VALIDATION, &format!("validation error: {e}")),
            }
        }
        Command::ListScenarios => {
            for (name, text) in BUNDLED {
                let description = serde_json::from_str::<Scenario>(text)
                    .map(|s| s.description)
                    .unwrap_or_default();
                println!("{name:18} {description}");
            }
            ExitCode::SUCCESS
        }
    }
}

fn fail(code: u8, message: &str) -> ExitCode {
    eprintln!("{message}");
    ExitCode::from(code)
}

fn rayon_pool(threads: usize) -> Result<(), rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
}

/// Resolve a scenario by bundled name or file path, apply overrides, and
/// deserialize. All failures here are parse errors.
fn load_scenario(name_or_path: &str, overrides: &[String]) -> Result<Scenario, String> {
    let text = match BUNDLED.iter().find(|(name, _)| *name == name_or_path) {
        Some((_, text)) => (*text).to_string(),
        None => {
            let path = Path::new(name_or_path);
            std::fs::read_to_string(path).map_err(|e| format!("{name_or_path}: {e}"))?
        }
    };
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("invalid JSON: {e}"))?;
    for entry in overrides {
        apply_override(&mut value, entry)?;
    }
    serde_json::from_value(value).map_err(|e| format!("invalid scenario: {e}"))
}

/// Set a dotted path inside the scenario document. Values parse as JSON
/// first and fall back to a bare string.
fn apply_override(root: &mut serde_json::Value, entry: &str) -> Result<(), String> {
    let (path, raw) = entry
        .split_once('=')
        .ok_or_else(|| format!("override '{entry}' must look like key.path=value"))?;
    let value: serde_json::Value =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut node = root;
    let tokens: Vec<&str> = path.split('.').collect();
    for (i, token) in tokens.iter().enumerate() {
        let last = i == tokens.len() - 1;
        if let Ok(index) = token.parse::<usize>() {
            let arr = node
                .as_array_mut()
                .ok_or_else(|| format!("override '{path}': '{token}' indexes a non-array"))?;
            if index >= arr.len() {
                return Err(format!("override '{path}': index {index} out of bounds"));
            }
            if last {
                arr[index] = value;
                return Ok(());
            }
            node = &mut arr[index];
        } else {
            let obj = node
                .as_object_mut()
                .ok_or_else(|| format!("override '{path}': '{token}' indexes a non-object"))?;
            if last {
                obj.insert(token.to_string(), value);
                return Ok(());
            }
            node = obj
                .entry(token.to_string())
                .or_insert_with(|| serde_json::Value::Object(Default::default()));
        }
    }
    Ok(())
}
