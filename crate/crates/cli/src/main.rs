use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "qc-lab", version, about = "Run qclab experiment scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenarios of a JSON config file.
    Run {
        config: PathBuf,
        /// Output root; each scenario writes to OUT/<scenario>/.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run independent scenarios concurrently.
        #[arg(long)]
        parallel: bool,
    },
    /// Print every scenario with the result it exercises.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", qc_lab::format_list());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            out,
            parallel,
        } => {
            let outcome = qc_lab::load_config(&config)
                .and_then(|run| qc_lab::run_config(&run, out.as_deref(), parallel));
            let outcome = match outcome {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            };
            for (name, dir, r) in &outcome.results {
                if let Ok(run) = r {
                    let passed = run.report.flags.iter().filter(|f| f.passed).count();
                    println!(
                        "{name}: {}/{} flags passed in {:.2} s -> {}",
                        passed,
                        run.report.flags.len(),
                        run.timing.wall_clock_seconds,
                        dir.display()
                    );
                }
            }
            for line in outcome.failures() {
                eprintln!("FAIL {line}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
    }
}
