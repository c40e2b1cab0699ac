mod config;
mod parse;
mod run;

use std::fs::File;
use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use config::Cli;

fn main() -> ExitCode {
    match real_main() {
        Ok(flagged) => ExitCode::from(if flagged { 2 } else { 0 }),
        Err(e) => {
            eprintln!("dixtrace: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let cfg = cli.resolve()?;
    let outcome = run::run(&cfg)?;

    let json_to_stdout = cfg.json.as_deref().is_some_and(|p| p.as_os_str() == "-");
    if json_to_stdout {
        eprintln!("{}", outcome.summary);
    } else {
        println!("{}", outcome.summary);
    }
    if let (Some(path), Some(series)) = (&cfg.csv, &outcome.series) {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        series.write_csv(file).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &cfg.json {
        let text = serde_json::to_string_pretty(&outcome.document(&cfg))?;
        if json_to_stdout {
            println!("{text}");
        } else {
            let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            writeln!(f, "{text}")?;
        }
    }
    Ok(outcome.flagged)
}
