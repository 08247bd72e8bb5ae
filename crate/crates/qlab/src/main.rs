use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qlab::{Config, Format, EXPERIMENTS};

/// Default report directory when neither `--out` nor `out=` is given.
const OUT_DIR_VAR: &str = "QLAB_OUT_DIR";

#[derive(Parser)]
#[command(name = "qlab", version, about = "Run conformal Q-curvature experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, or `all`
    Run {
        name: String,
        /// key=value config file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a config key, e.g. `--set seed=3`
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Report path; stdout when absent and QLAB_OUT_DIR is unset
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = ["json", "csv", "text"])]
        format: Option<String>,
    },
    /// List experiments
    List,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qlab: {e}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> qlab::Result<ExitCode> {
    match Cli::parse().command {
        Command::List => {
            for e in EXPERIMENTS {
                println!("{:<18} {}", e.name, e.summary);
            }
            println!("{:<18} every experiment above", "all");
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            name,
            config,
            set,
            out,
            format,
        } => {
            let mut cfg = match &config {
                Some(path) => Config::from_file(path)?,
                None => Config::default(),
            };
            for kv in &set {
                cfg.apply_override(kv)?;
            }
            if let Some(f) = format {
                cfg.set("format", &f)?;
            }
            if let Some(o) = out {
                cfg.out = Some(o);
            }
            if name != "all" && !qlab::experiments::names().contains(&name.as_str()) {
                return Err(qlab::Error::UnknownExperiment(name));
            }
            let report = qlab::run(&name, &cfg)?;
            let text = report.render(cfg.format)?;
            let target = cfg.out.clone().or_else(|| {
                std::env::var_os(OUT_DIR_VAR)
                    .map(|dir| PathBuf::from(dir).join(format!("{name}.{}", cfg.format.extension())))
            });
            match target {
                Some(path) => {
                    std::fs::write(&path, text)?;
                    eprintln!("report written to {}", path.display());
                }
                None => print!("{text}"),
            }
            if cfg.format != Format::Text {
                for c in report.failures() {
                    eprintln!("FAIL {}", c.id);
                }
            }
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
