use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use modalkit::syntax::{parse, random_formula, render};
use modalkit_cli::{
    cmd_canonical, cmd_decide, cmd_model, cmd_oracle, cmd_parse, cmd_prove_check, cmd_translate, decide_outcome,
    system, CliError, Emit, Mode, Outcome,
};

#[derive(Parser)]
#[command(name = "modalkit", version, about = "Decide, prove and build models in normal modal logics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct System {
    /// Comma list drawn from T,B,4,5,D,.2 (empty for K)
    #[arg(long)]
    sigma: Option<String>,
    /// Use GL instead of a KΣ system
    #[arg(long)]
    gl: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and print a formula, or print a seeded random one
    Parse {
        #[arg(long, required_unless_present = "random")]
        phi: Option<String>,
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        h: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// Decide validity or consistency
    Decide {
        #[arg(long)]
        phi: String,
        #[command(flatten)]
        system: System,
        #[arg(long, value_enum, default_value_t = Mode::Valid)]
        mode: Mode,
        #[arg(long, default_value_t = 4)]
        max_worlds: usize,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Build the weak model of a formula
    Model {
        #[arg(long)]
        phi: String,
        #[command(flatten)]
        system: System,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// List the members of C_{h,n}
    Canonical {
        #[arg(long)]
        h: u32,
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        system: System,
    },
    /// Standard translation and frame conditions
    Translate {
        #[arg(long)]
        phi: Option<String>,
        #[arg(long, default_value = "x")]
        var: String,
        #[command(flatten)]
        system: System,
        #[arg(long)]
        conditions: bool,
    },
    /// Check a proof document
    ProveCheck {
        #[arg(long)]
        proof: PathBuf,
        /// JSON array of premise formulas, replacing the document's own
        #[arg(long)]
        gamma: Option<PathBuf>,
        /// Check a provability certificate for this formula instead
        #[arg(long)]
        phi: Option<String>,
        #[command(flatten)]
        system: System,
    },
    /// Brute-force search over small frames
    Oracle {
        #[arg(long)]
        phi: String,
        #[command(flatten)]
        system: System,
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
        #[arg(long, value_enum, default_value_t = Mode::Valid)]
        mode: Mode,
    },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Parse { phi: Some(text), .. } => cmd_parse(&text),
        Command::Parse { seed, h, n, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_formula(&mut rng, h, n, 8);
            cmd_parse(&render(&f))
        }
        Command::Decide { phi, system: s, mode, max_worlds, emit } => {
            let report = cmd_decide(&parse(&phi)?, &system(s.sigma.as_deref(), s.gl)?, mode, max_worlds)?;
            Ok(decide_outcome(&report, emit))
        }
        Command::Model { phi, system: s, emit } => cmd_model(&parse(&phi)?, &system(s.sigma.as_deref(), s.gl)?, emit),
        Command::Canonical { h, n, system: s } => cmd_canonical(h, n, &system(s.sigma.as_deref(), s.gl)?),
        Command::Translate { phi, var, system: s, conditions } => {
            let f = phi.as_deref().map(parse).transpose()?;
            cmd_translate(f.as_ref(), &var, &system(s.sigma.as_deref(), s.gl)?, conditions)
        }
        Command::ProveCheck { proof, gamma, phi, system: s } => {
            let sigma = if s.sigma.is_some() || s.gl {
                Some(system(s.sigma.as_deref(), s.gl)?)
            } else {
                None
            };
            let gamma = gamma.as_ref().map(read).transpose()?;
            let phi = phi.as_deref().map(parse).transpose()?;
            cmd_prove_check(&read(&proof)?, sigma.as_ref(), gamma.as_deref(), phi.as_ref())
        }
        Command::Oracle { phi, system: s, max_worlds, mode } => {
            cmd_oracle(&parse(&phi)?, &system(s.sigma.as_deref(), s.gl)?, max_worlds, mode)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
