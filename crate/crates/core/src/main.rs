// Copyright 2026 The ftgate Authors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ftgate::cli::{self, TableId, EXIT_INVALID};

/// Pulse synthesis for logical gates on encoded spin chains.
#[derive(Parser)]
#[command(name = "ftgate", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a run manifest.
    Run {
        path: PathBuf,
        /// Output directory (must not exist).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate a table or figure: table1, table2, table3 or fig9.
    Reproduce {
        table: TableId,
        /// Output directory (must not exist).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where synthesis runs live; defaults to the output root.
        #[arg(long)]
        runs: Option<PathBuf>,
        /// Synthesize missing table3 runs instead of failing.
        #[arg(long)]
        run_missing: bool,
    },
    /// Run the built-in identity checks.
    Verify,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID as u8 } else { 0 });
        }
    };
    let outcome = match args.command {
        Command::Run { path, out } => cli::run_path(&path, out.as_deref()),
        Command::Reproduce {
            table,
            out,
            runs,
            run_missing,
        } => {
            let root = cli::output_root();
            let out = out.unwrap_or_else(|| root.join(format!("reproduce-{}", table_name(table))));
            cli::reproduce(table, &out, &runs.unwrap_or(root), run_missing)
        }
        Command::Verify => {
            let report = cli::verify_suite();
            emit(&report.render());
            return ExitCode::from(if report.all_passed() { 0 } else { 1 });
        }
    };
    match outcome {
        Ok(o) => {
            emit(&o.summary);
            if !o.summary.ends_with('\n') {
                emit("\n");
            }
            if let Some(dir) = o.run_dir {
                emit(&format!("output: {}\n", dir.display()));
            }
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code_for(&e) as u8)
        }
    }
}

fn table_name(t: TableId) -> &'static str {
    match t {
        TableId::Table1 => "table1",
        TableId::Table2 => "table2",
        TableId::Table3 => "table3",
        TableId::Fig9 => "fig9",
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().write_all(text.as_bytes());
}
