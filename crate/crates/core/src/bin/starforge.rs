use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use starforge::cli::{cmd_analyze, cmd_check, cmd_eval, CliError, Format, RunConfig, DEFAULT_BOX, DEFAULT_SAMPLES};

#[derive(Parser)]
#[command(name = "starforge", version, about = "Star operations on semilocal Bézout domains")]
struct Args {
    /// Domain file, or a shipped fixture name such as fx-a.
    #[arg(long, global = true)]
    input: Option<String>,
    /// Falls back to STARFORGE_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long = "box", global = true, default_value_t = DEFAULT_BOX)]
    bound: i64,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    #[value(alias = "json")]
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Branches, h-locality, counts and class groups.
    Analyze,
    /// Closure of an ideal under a star operation.
    Eval { star: String, ideal: String },
    /// Run a law suite (`all` for every suite).
    Check {
        #[arg(default_value = "all")]
        suite: String,
    },
}

fn seed_from_env() -> Result<u64, CliError> {
    match std::env::var("STARFORGE_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Input {
            message: format!("STARFORGE_SEED=`{s}` is not a 64-bit unsigned integer"),
            diagnostics: Vec::new(),
        }),
        Err(_) => Ok(0),
    }
}

fn run(args: &Args, format: Format) -> Result<(String, i32), CliError> {
    let input = args.input.clone().ok_or_else(|| CliError::Input {
        message: "missing --input (a domain file or a fixture name)".into(),
        diagnostics: Vec::new(),
    })?;
    let seed = match args.seed {
        Some(s) => s,
        None => seed_from_env()?,
    };
    let mut cfg = RunConfig::new(input).seed(seed).samples(args.samples).bound(args.bound);
    cfg.format = format;
    let report = match &args.command {
        Command::Analyze => cmd_analyze(&cfg)?,
        Command::Eval { star, ideal } => cmd_eval(&cfg, star, ideal)?,
        Command::Check { suite } => cmd_check(&cfg, suite)?,
    };
    Ok((report.render(format), report.exit_code()))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let format = match args.format {
        FormatArg::Text => Format::Text,
        FormatArg::Structured => Format::Structured,
    };
    let outcome = std::panic::catch_unwind(|| run(&args, format));
    let (text, code, to_stderr) = match outcome {
        Ok(Ok((text, code))) => (text, code, false),
        Ok(Err(e)) => (e.render(format), e.exit_code(), format == Format::Text),
        Err(_) => {
            let e = CliError::Internal("panic during evaluation".into());
            (e.render(format), e.exit_code(), format == Format::Text)
        }
    };
    if to_stderr {
        let _ = std::io::stderr().write_all(text.as_bytes());
    } else {
        let _ = std::io::stdout().write_all(text.as_bytes());
    }
    ExitCode::from(code as u8)
}
