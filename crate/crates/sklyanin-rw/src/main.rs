use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sklyanin_rw::pipeline::{
    classical_report, discover_report, parse_config, parse_params_list, realize_report,
    sweep_report, verify_report, Report, RunConfig, RunError,
};
use sklyanin_rw::realization::SklyaninParams;
use sklyanin_rw::schema::to_document;

/// Exact realization, discovery and verification for the Sklyanin-algebra
/// Racah-Wigner extension.
///
/// Exit codes: 0 all checks pass, 1 usage or input error, 2 a verification
/// failed, 3 a claim did not hold (finding).
#[derive(Parser)]
#[command(name = "sklyanin-rw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (the structure document for `discover`, the report otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Word-length cap for rewriting.
    #[arg(long, global = true)]
    degree_cap: Option<usize>,
    /// Print the report as JSON (default).
    #[arg(long, global = true, conflicts_with = "human")]
    json: bool,
    /// Print the report as a table.
    #[arg(long, global = true)]
    human: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build S and Q from parameters and check the realization.
    Realize {
        /// alpha,beta,gamma,delta,epsilon,zeta as rationals, e.g. 1,0,1,0,0,1
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
    },
    /// Check the classical Poisson table (Jacobi, trace elimination, degree-3 overlaps).
    ClassicalCheck,
    /// Run the full discovery chain and write the structure document.
    Discover {
        /// alpha,beta,gamma,delta,epsilon,zeta as rationals
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
    },
    /// Re-check a stored structure document.
    Verify { file: Option<PathBuf> },
    /// Run discovery on seeded random tuples.
    Sweep {
        /// ChaCha8 seed (default 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Number of sampled tuples (default 100).
        #[arg(long)]
        count: Option<usize>,
        /// Sample on beta = delta = epsilon = 0.
        #[arg(long)]
        locus: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Realize { .. } => "realize",
            Command::ClassicalCheck => "classical-check",
            Command::Discover { .. } => "discover",
            Command::Verify { .. } => "verify",
            Command::Sweep { .. } => "sweep",
        }
    }
}

fn read(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|e| RunError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|e| RunError::Input(format!("{}: {e}", path.display())))
}

fn params(flag: &Option<String>, cfg: &RunConfig) -> Result<SklyaninParams, RunError> {
    match flag {
        Some(s) => parse_params_list(s),
        None => cfg
            .params
            .clone()
            .ok_or_else(|| RunError::Input("no parameters: pass --params or --config".into())),
    }
}

fn run(cli: Cli) -> Result<i32, RunError> {
    let mut cfg = match &cli.config {
        Some(p) => parse_config(&read(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(mode) = &cfg.mode {
        if mode != cli.command.name() {
            return Err(RunError::Config(format!(
                "config is for mode `{mode}`, not `{}`",
                cli.command.name()
            )));
        }
    }
    if let Some(cap) = cli.degree_cap {
        cfg.degree_cap = cap;
    }
    if cfg.degree_cap < 2 {
        return Err(RunError::Input("--degree-cap must be at least 2".into()));
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    let json = !cli.human;
    let mut structure = None;
    let report: Report = match &cli.command {
        Command::Realize { params: p } => realize_report(&params(p, &cfg)?)?,
        Command::ClassicalCheck => classical_report(),
        Command::Discover { params: p } => {
            let (report, doc) = discover_report(&params(p, &cfg)?, cfg.degree_cap)?;
            structure = Some(doc);
            report
        }
        Command::Verify { file } => {
            let path = file
                .clone()
                .or_else(|| cfg.input.clone())
                .ok_or_else(|| RunError::Input("no structure file given".into()))?;
            verify_report(&read(&path)?, cli.degree_cap)?
        }
        Command::Sweep { seed, count, locus } => sweep_report(
            seed.unwrap_or(cfg.seed),
            count.unwrap_or(cfg.count),
            *locus || cfg.locus,
            cfg.degree_cap,
        ),
    };
    let text = report.render(json);
    match (&structure, &cfg.out) {
        (Some(doc), Some(out)) => {
            match doc {
                Some(doc) => write(out, &to_document(doc))?,
                None => eprintln!(
                    "discovery stopped early, no structure written to {}",
                    out.display()
                ),
            }
            print!("{text}");
        }
        (None, Some(out)) => write(out, &text)?,
        (_, None) => print!("{text}"),
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
