use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lqg_growth::cli::{self, config, ExperimentConfig};
use lqg_growth::Error;

#[derive(Parser)]
#[command(name = "lqg-growth", version, about = "Check suites for boundary chaos, Loewner growth and the growth generator")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a suite and write report.json plus CSV series.
    Run {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// File of `key = value` lines, applied before `--param`.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override, e.g. `--param n=32`; repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
    /// List the suites.
    List,
    /// List the check ids of a suite.
    Describe { suite: String },
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cmd: Cmd) -> lqg_growth::Result<bool> {
    match cmd {
        Cmd::List => {
            for s in cli::SUITES {
                println!("{s}");
            }
            Ok(true)
        }
        Cmd::Describe { suite } => {
            print!("{}", cli::describe(&suite)?);
            Ok(true)
        }
        Cmd::Run { suite, seed, out, config: file, params } => {
            let mut cfg = ExperimentConfig::defaults(&suite, seed, out.clone())?;
            let text = match &file {
                Some(p) => fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
                None => String::new(),
            };
            let mut pairs = config::parse_file(&text)?;
            for p in &params {
                pairs.push(config::split_pair(p)?);
            }
            cfg.apply(pairs)?;
            let (report, output) = cli::run(&cfg)?;
            let path = report.write(&out, &output)?;
            for c in &report.checks {
                let verdict = if c.pass { "PASS" } else { "FAIL" };
                println!("{verdict} {:<40} lhs={:.6e} rhs={:.6e}", c.id, c.lhs, c.rhs);
            }
            println!("wrote {}", path.display());
            Ok(report.passed)
        }
    }
}
