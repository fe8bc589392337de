//! Command-line front end: argument parsing, run manifests, report files.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod plot;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use zeroset::calibration::Calibration;

use crate::args::{Cli, Command};
use crate::commands::{Ctx, Report};
use crate::error::{CliError, CliResult};
use crate::io::{sha256_hex, Inputs};
use crate::manifest::{strip_out, RunManifest};

pub struct Outcome {
    pub report: Report,
    pub manifest: Option<RunManifest>,
    pub exit_code: i32,
}

/// Load and validate the calibration the run should use.
pub fn load_calibration(cli: &Cli, inputs: &mut Inputs) -> CliResult<(Calibration, String)> {
    if cli.global.uncalibrated {
        return Ok((Calibration::uncalibrated(), "uncalibrated".into()));
    }
    let (c, source) = match &cli.global.calibration {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Calibration(format!("{}: {e}", path.display())))?;
            inputs
                .hashes
                .insert(format!("calibration:{}", path.display()), sha256_hex(text.as_bytes()));
            let c =
                Calibration::from_json(&text).map_err(|e| CliError::Calibration(format!("{}: {e}", path.display())))?;
            (c, path.display().to_string())
        }
        None => (Calibration::embedded(), "embedded".into()),
    };
    c.validate()
        .map_err(|e| CliError::Calibration(format!("{source}: {e}")))?;
    Ok((c, source))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], hashes: &mut BTreeMap<String, String>) -> CliResult<()> {
    std::fs::write(dir.join(name), bytes)
        .map_err(|e| CliError::Output(format!("{}: {e}", dir.join(name).display())))?;
    hashes.insert(name.to_string(), sha256_hex(bytes));
    Ok(())
}

/// Write report files into `dir` and return their hashes.
fn write_outputs(dir: &Path, report: &Report, command: &Command) -> CliResult<BTreeMap<String, String>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let mut hashes = BTreeMap::new();
    let body = serde_json::to_string_pretty(&report.body).expect("report serializes");
    write_file(dir, "report.json", body.as_bytes(), &mut hashes)?;
    if let Some(t) = &report.table {
        write_file(dir, "report.csv", &t.to_csv()?, &mut hashes)?;
    }
    for p in &report.plots {
        write_file(dir, &p.name, &p.bytes, &mut hashes)?;
    }
    for (name, bytes) in &report.files {
        if let Command::Calibrate { write: Some(path), .. } = command {
            if name == "calibration.json" {
                std::fs::write(path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
            }
        }
        write_file(dir, name, bytes, &mut hashes)?;
    }
    Ok(hashes)
}

/// Run a parsed command line. `args` are the raw arguments after the program
/// name, stored in the manifest.
pub fn execute(cli: &Cli, args: &[String]) -> CliResult<Outcome> {
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest, cli.global.out.as_deref());
    }
    let t0 = Instant::now();
    let mut inputs = Inputs::default();
    let (calibration, source) = match &cli.command {
        Command::Calibrate { .. } => (Calibration::empty(), "none".to_string()),
        _ => load_calibration(cli, &mut inputs)?,
    };
    let version = calibration.version.clone();
    let mut ctx = Ctx {
        global: &cli.global,
        inputs,
        resolutions: BTreeMap::new(),
        calibration,
    };
    let report = commands::dispatch(&cli.command, &mut ctx)?;
    let exit_code = if report.unresolved.is_some() { 3 } else { 0 };
    if cli.global.out.is_none() {
        if let Command::Calibrate { write, .. } = &cli.command {
            let path = write.clone().unwrap_or_else(|| PathBuf::from("calibration.json"));
            for (name, bytes) in &report.files {
                if name == "calibration.json" {
                    std::fs::write(&path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
                }
            }
        }
    }
    let manifest = match &cli.global.out {
        Some(dir) => {
            let outputs = write_outputs(dir, &report, &cli.command)?;
            let m = RunManifest {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                command: cli.command.name().to_string(),
                args: strip_out(args),
                input_hashes: ctx.inputs.hashes,
                seed: cli.global.seed,
                threads: cli.global.threads,
                resolutions: ctx.resolutions,
                calibration_source: source,
                calibration_version: version,
                outputs,
                wall_time_s: t0.elapsed().as_secs_f64(),
                exit_code,
            };
            std::fs::write(dir.join("manifest.json"), m.to_json())
                .map_err(|e| CliError::Output(format!("{}: {e}", dir.join("manifest.json").display())))?;
            Some(m)
        }
        None => None,
    };
    Ok(Outcome {
        report,
        manifest,
        exit_code,
    })
}

/// Re-run the command recorded in a manifest and compare output hashes.
pub fn replay(path: &Path, out: Option<&Path>) -> CliResult<Outcome> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let old = RunManifest::from_json(&text)?;
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => std::env::temp_dir().join(format!("zeroset-replay-{}", std::process::id())),
    };
    let mut args = old.args.clone();
    args.push("--out".into());
    args.push(dir.display().to_string());
    let cli = Cli::try_parse_from(std::iter::once("zeroset".to_string()).chain(args.iter().cloned()))
        .map_err(|e| CliError::Input(format!("manifest arguments: {e}")))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(CliError::Input("a replay manifest cannot replay itself".into()));
    }
    let outcome = match execute(&cli, &args) {
        Ok(o) => o,
        Err(e) => return Err(e),
    };
    let new = outcome.manifest.as_ref().expect("replay writes a manifest");
    let mut problems = Vec::new();
    if new.input_hashes != old.input_hashes {
        problems.push("input hashes differ".to_string());
    }
    if new.calibration_version != old.calibration_version {
        problems.push(format!(
            "calibration version {} differs from recorded {}",
            new.calibration_version, old.calibration_version
        ));
    }
    for (name, h) in &old.outputs {
        match new.outputs.get(name) {
            Some(g) if g == h => {}
            Some(_) => problems.push(format!("{name} differs")),
            None => problems.push(format!("{name} missing")),
        }
    }
    for name in new.outputs.keys() {
        if !old.outputs.contains_key(name) {
            problems.push(format!("unexpected output {name}"));
        }
    }
    if !problems.is_empty() {
        return Err(CliError::Mismatch(problems.join("; ")));
    }
    let mut report = Report::default();
    report.summary.push(format!(
        "identical: {} outputs of `{}` reproduced",
        old.outputs.len(),
        old.command
    ));
    report.body = serde_json::json!({ "identical": true, "outputs": old.outputs });
    Ok(Outcome {
        report,
        manifest: None,
        exit_code: outcome.exit_code,
    })
}
