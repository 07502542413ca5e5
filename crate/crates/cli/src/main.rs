mod args;
mod commands;
mod error;
mod manifest;

use std::ffi::OsString;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use error::{CliError, Result};

/// Reads `key = value` lines into `--key value` argument pairs.
fn config_args(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{} line {}: expected key = value", path.display(), i + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key == "config" {
            return Err(CliError::Usage(format!(
                "{} line {}: nested config",
                path.display(),
                i + 1
            )));
        }
        out.push(format!("--{key}").into());
        out.push(value.trim().into());
    }
    Ok(out)
}

/// Argument list with config entries placed before the user's own flags, so
/// that later flags override them.
fn merged_argv(argv: &[OsString], subcommand: &str, config: &[OsString]) -> Vec<OsString> {
    let mut rest: Vec<OsString> = argv.iter().skip(1).cloned().collect();
    if let Some(pos) = rest.iter().position(|a| a == subcommand) {
        rest.remove(pos);
    }
    let mut merged = vec![argv[0].clone(), subcommand.into()];
    merged.extend_from_slice(config);
    merged.extend(rest);
    merged
}

fn parse(argv: Vec<OsString>) -> std::result::Result<Cli, clap::Error> {
    Cli::try_parse_from(argv)
}

fn run(argv: Vec<OsString>) -> Result<()> {
    let cli = match parse(argv.clone()) {
        Ok(cli) => cli,
        Err(e) => return Err(clap_error(e)),
    };
    let cli = match &cli.config {
        Some(path) => {
            let config = config_args(path)?;
            parse(merged_argv(&argv, cli.command.name(), &config)).map_err(clap_error)?
        }
        None => cli,
    };
    commands::run(&cli.command, cli.seed, &cli.out)?;
    Ok(())
}

fn clap_error(e: clap::Error) -> CliError {
    if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
        let _ = e.print();
        std::process::exit(0);
    }
    CliError::Usage(
        e.render()
            .to_string()
            .trim_start_matches("error: ")
            .trim_end()
            .to_string(),
    )
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use args::Command;

    fn argv(args: &[&str]) -> Vec<OsString> {
        args.iter().map(OsString::from).collect()
    }

    #[test]
    fn flags_override_config_which_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.conf");
        std::fs::write(&cfg, "# comment\nfolds = 4\nknn_k = 5\nseed = 3\n").unwrap();
        let original = argv(&["medge", "--seed", "9", "sweep-gamma", "--features", "f.csv", "--config"]);
        let mut original = original;
        original.push(cfg.clone().into());
        original.extend(argv(&["--folds", "10"]));
        let config = config_args(&cfg).unwrap();
        let cli = parse(merged_argv(&original, "sweep-gamma", &config)).unwrap();
        assert_eq!(cli.seed, 9);
        match cli.command {
            Command::SweepGamma(a) => {
                assert_eq!(a.folds, 10);
                assert_eq!(a.knn_k, 5);
                assert_eq!(a.step, 0.05);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_config_line_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.conf");
        std::fs::write(&cfg, "folds 4\n").unwrap();
        let err = config_args(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn command_round_trips_through_manifest_json() {
        let cli = parse(argv(&[
            "medge",
            "bench-compression",
            "--crs",
            "2,8",
            "--hidden-layer",
            "true",
        ]))
        .unwrap();
        let json = serde_json::to_string(&cli.command).unwrap();
        let back: Command = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cli.command);
    }
}
