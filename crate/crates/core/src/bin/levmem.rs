use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use levmem::cli::{execute, ConventionSet, Options};
use levmem::config::Format;

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Svg,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Paper,
    Standard,
}

/// Storage and retrieval of light in a levitated nanoparticle: figure recipes and sweeps.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// derive, fig2, fig3, fig4, fig5, fig6, fig7, fig8a, fig8b or sweep
    recipe: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
    /// Worker threads for sweeps (default: logical cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let opts = Options {
        recipe: args.recipe.clone(),
        config: args.config,
        out: args.out,
        format: args.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Svg => Format::Svg,
            FormatArg::Both => Format::Both,
        }),
        convention: args.convention.map(|c| match c {
            ConventionArg::Paper => ConventionSet::Paper,
            ConventionArg::Standard => ConventionSet::Standard,
        }),
        jobs: args.jobs,
    };
    match execute(&opts) {
        Ok(summary) => {
            print!("{}", summary.report);
            for p in &summary.written {
                println!("wrote {}", p.display());
            }
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("levmem {}: {e}", args.recipe);
            ExitCode::from(1)
        }
    }
}
