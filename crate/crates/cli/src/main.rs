mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "contextium",
    version,
    about = "Contextuality measures for finite-dimensional observables"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,
    /// Seed for every randomised step.
    #[arg(long, env = "CONTEXTIUM_SEED", default_value_t = 42, global = true)]
    pub seed: u64,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, default_value_t = 0, global = true)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mutual information energy of one or all contexts of a scenario.
    Mie(commands::MieArgs),
    /// Per-context and global bounds on D for a named state.
    Bounds(commands::BoundsArgs),
    /// Every KCBS quantity in one report.
    KcbsReport,
    /// Maximise the summed uncertainty products over the first n KCBS contexts.
    Optimize(commands::OptimizeArgs),
    /// Grid sample of star pairs on the maximum-uncertainty surfaces.
    Surface(commands::SurfaceArgs),
    /// Convert between star pairs and spin-1 amplitudes.
    Majorana(commands::MajoranaArgs),
    /// Load and validate a scenario, emitting its canonical JSON.
    Validate(commands::ValidateArgs),
}

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    use contextium::Error;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::UnknownName(_) => EXIT_USAGE,
                Error::Numerical(_) => EXIT_NUMERICAL,
                _ => EXIT_DATA,
            };
        }
        if cause.downcast_ref::<commands::UsageError>().is_some() {
            return EXIT_USAGE;
        }
    }
    EXIT_DATA
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global()
        {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (`| head`) is not a failure.
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
