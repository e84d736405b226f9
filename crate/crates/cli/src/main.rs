use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use refram_cli::commands::{cmd_break, cmd_enumerate, cmd_modules, cmd_region, cmd_verify, Output};
use refram_cli::config::Format;
use refram_cli::{parse_config, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "refram", version, about = "Refined ramification breaks and Galois module structure of C_p x C_p extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute b_* on a constructed tower and compare with the closed form
    Break(Flags),
    /// List every realizable b_* for (p, e_K, b)
    Enumerate(Flags),
    /// Emit the (b, t) -> b_* region grid
    Region(Flags),
    /// Jordan type of Theta on P_N^r / p P_N^r against the closed forms
    Modules(Flags),
    /// Run every check over a grid of towers
    Verify(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long)]
    p: Option<u64>,
    /// Residue degree
    #[arg(long)]
    f: Option<usize>,
    /// Tame index, e_K = m (p - 1)
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<i64>,
    /// e_K for the closed-form commands (enumerate, region)
    #[arg(long = "eK")]
    e_k: Option<usize>,
    /// `generator`, a coefficient list like `1,1`, or a polynomial in u
    #[arg(long)]
    omega: Option<String>,
    /// Defining polynomial of F_q in x, e.g. `x^2+2x+2`
    #[arg(long)]
    poly: Option<String>,
    /// Valuation horizon in v_N units
    #[arg(long)]
    precision: Option<usize>,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file; its entries override the flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Largest b in region and verify grids
    #[arg(long)]
    b_max: Option<usize>,
    /// Primes of the verify grid, comma separated
    #[arg(long)]
    primes: Option<String>,
    /// Tame indices of the verify grid, comma separated
    #[arg(long)]
    ms: Option<String>,
    #[arg(long)]
    resamples: Option<usize>,
    #[arg(long)]
    changes: Option<usize>,
    /// Offset the closed form by one inside verify
    #[arg(long, hide = true)]
    inject_fault: bool,
}

fn resolve(flags: &Flags) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    let pairs: [(&str, Option<String>); 16] = [
        ("p", flags.p.map(|x| x.to_string())),
        ("f", flags.f.map(|x| x.to_string())),
        ("m", flags.m.map(|x| x.to_string())),
        ("b", flags.b.map(|x| x.to_string())),
        ("t", flags.t.map(|x| x.to_string())),
        ("r", flags.r.map(|x| x.to_string())),
        ("eK", flags.e_k.map(|x| x.to_string())),
        ("omega", flags.omega.clone()),
        ("poly", flags.poly.clone()),
        ("precision", flags.precision.map(|x| x.to_string())),
        ("seed", flags.seed.map(|x| x.to_string())),
        ("b-max", flags.b_max.map(|x| x.to_string())),
        ("primes", flags.primes.clone()),
        ("ms", flags.ms.clone()),
        ("resamples", flags.resamples.map(|x| x.to_string())),
        ("changes", flags.changes.map(|x| x.to_string())),
    ];
    for (key, value) in pairs {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    cfg.format = flags.format;
    cfg.out = flags.out.clone();
    cfg.inject_fault = flags.inject_fault;
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        cfg.apply(&parse_config(&text)?)?;
    }
    Ok(cfg)
}

type Handler = fn(&RunConfig) -> Result<Output, CliError>;

fn run(cli: Cli) -> Result<Output, CliError> {
    let (flags, cmd): (&Flags, Handler) = match &cli.command {
        Command::Break(f) => (f, cmd_break),
        Command::Enumerate(f) => (f, cmd_enumerate),
        Command::Region(f) => (f, cmd_region),
        Command::Modules(f) => (f, cmd_modules),
        Command::Verify(f) => (f, cmd_verify),
    };
    let cfg = resolve(flags)?;
    let out = cmd(&cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &out.body)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?,
        None => print!("{}", out.body),
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            for note in &out.notes {
                eprintln!("note: {note}");
            }
            ExitCode::from(if out.failed { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
