use std::path::PathBuf;
use std::process::ExitCode;

use blockade_cli::config::ExperimentConfig;
use blockade_cli::output::num;
use blockade_cli::quantity::Frequency;
use blockade_cli::{run, CliError, ExperimentKind};
use clap::{Args, Parser, Subcommand};

/// Collective Rydberg-blockade experiments.
///
/// Rates accept unit suffixes (`10MHz`, `5Mrad/s`, `10kHz`); bare numbers are
/// rad/μs. Times accept `ns`, `us`, `ms`, `s`; bare numbers are μs.
#[derive(Parser, Debug)]
#[command(name = "blockade", version)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo statistics of pair splittings in a random gas.
    SplittingStats(SplittingArgs),
    /// Collective Rabi oscillation between g and the singly excited state.
    Rabi {
        #[command(flatten)]
        regime: RegimeArgs,
        #[arg(long)]
        periods: Option<f64>,
    },
    /// Stepwise preparation of a collective Fock state.
    Fock {
        #[command(flatten)]
        regime: RegimeArgs,
        #[arg(long)]
        n_target: Option<usize>,
    },
    /// Preparation of a superposition of collective Fock states.
    Superpose {
        #[command(flatten)]
        regime: RegimeArgs,
        /// Real amplitudes, comma separated; complex ones go in the config.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        amplitudes: Option<Vec<f64>>,
    },
    /// Truth table of the blockade phase gate.
    Gate {
        #[command(flatten)]
        regime: RegimeArgs,
    },
    /// Leakage scaling, dephasing and operating-point error estimates.
    ErrorBudget {
        #[command(flatten)]
        regime: RegimeArgs,
        /// Values of κ̄T, comma separated.
        #[arg(long, value_delimiter = ',')]
        kappa_t: Option<Vec<f64>>,
    },
    /// Symmetric basis against projected per-atom evolution.
    OracleCheck {
        #[command(flatten)]
        regime: RegimeArgs,
        #[arg(long = "oracle-atoms", value_delimiter = ',')]
        oracle_atoms: Option<Vec<usize>>,
        #[arg(long, value_parser = Frequency::parse)]
        kappa: Option<Frequency>,
    },
}

#[derive(Args, Debug)]
struct SplittingArgs {
    #[arg(long)]
    configs: Option<usize>,
    #[arg(long)]
    atoms: Option<usize>,
    /// Box edges in μm as `LX,LY,LZ`.
    #[arg(long = "box", value_delimiter = ',', num_args = 1)]
    box_dims: Option<Vec<f64>>,
    /// C₃ in rad/μs·μm³.
    #[arg(long)]
    c3: Option<f64>,
    /// `min-pair` or `all-pairs`.
    #[arg(long)]
    statistic: Option<String>,
    #[arg(long)]
    bins: Option<usize>,
    /// Histogram CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RegimeArgs {
    #[arg(long)]
    atoms: Option<usize>,
    #[arg(long, value_parser = Frequency::parse)]
    omega: Option<Frequency>,
    #[arg(long, value_parser = Frequency::parse)]
    omega_q: Option<Frequency>,
    #[arg(long, value_parser = Frequency::parse)]
    omega_plus: Option<Frequency>,
    #[arg(long, value_parser = Frequency::parse)]
    omega_minus: Option<Frequency>,
    /// Finite blockade strength; omit for the perfect-blockade limit.
    #[arg(long, value_parser = Frequency::parse)]
    kappa_bar: Option<Frequency>,
    #[arg(long, value_parser = Frequency::parse)]
    gamma_r: Option<Frequency>,
    /// `half-splitting` or `literal-pair`.
    #[arg(long)]
    convention: Option<String>,
    /// `symmetric` or `pair-resolved`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Run this schedule file instead of the compiled protocol.
    #[arg(long)]
    schedule: Option<PathBuf>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl RegimeArgs {
    fn apply(self, c: &mut ExperimentConfig) {
        let r = &mut c.regime;
        set(&mut r.n_atoms, self.atoms);
        set(&mut r.omega, self.omega);
        set(&mut r.omega_q, self.omega_q);
        set(&mut r.omega_plus, self.omega_plus);
        set(&mut r.omega_minus, self.omega_minus);
        set(&mut r.gamma_r, self.gamma_r);
        set(&mut r.convention, self.convention);
        if self.kappa_bar.is_some() {
            r.kappa_bar = self.kappa_bar;
        }
        set(&mut c.basis.mode, self.mode);
        if self.n_max.is_some() {
            c.basis.n_max = self.n_max;
        }
        if self.schedule.is_some() {
            c.schedule = self.schedule;
        }
    }
}

fn resolve(cli: Cli) -> Result<(ExperimentConfig, bool), CliError> {
    let mut c = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            ExperimentConfig::from_toml(&text).map_err(|message| CliError::Parse { path: path.clone(), message })?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(cmd) = cli.command {
        let kind = match cmd {
            Command::SplittingStats(a) => {
                let s = &mut c.splitting;
                set(&mut s.configs, a.configs);
                set(&mut s.atoms, a.atoms);
                set(&mut s.c3, a.c3);
                set(&mut s.statistic, a.statistic);
                set(&mut s.bins, a.bins);
                if let Some(b) = a.box_dims {
                    let [x, y, z] = b[..] else {
                        return Err(CliError::Parse { path: "--box".into(), message: "expected LX,LY,LZ".into() });
                    };
                    s.box_dims = [x, y, z];
                }
                if a.out.is_some() {
                    s.out = a.out;
                }
                ExperimentKind::SplittingStats
            }
            Command::Rabi { regime, periods } => {
                regime.apply(&mut c);
                set(&mut c.rabi.periods, periods);
                ExperimentKind::Rabi
            }
            Command::Fock { regime, n_target } => {
                regime.apply(&mut c);
                set(&mut c.fock.n_target, n_target);
                ExperimentKind::Fock
            }
            Command::Superpose { regime, amplitudes } => {
                regime.apply(&mut c);
                if let Some(a) = amplitudes {
                    c.superpose.amplitudes = a.into_iter().map(|x| [x, 0.0]).collect();
                }
                ExperimentKind::Superpose
            }
            Command::Gate { regime } => {
                regime.apply(&mut c);
                ExperimentKind::Gate
            }
            Command::ErrorBudget { regime, kappa_t } => {
                regime.apply(&mut c);
                set(&mut c.error_budget.kappa_t, kappa_t);
                ExperimentKind::ErrorBudget
            }
            Command::OracleCheck { regime, oracle_atoms, kappa } => {
                regime.apply(&mut c);
                set(&mut c.oracle.atoms, oracle_atoms);
                set(&mut c.oracle.kappa, kappa);
                ExperimentKind::OracleCheck
            }
        };
        c.experiment = kind.name().into();
    }
    set(&mut c.seed, cli.seed);
    set(&mut c.out_dir, cli.out_dir);
    Ok((c, cli.print_config))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(cli).and_then(|(cfg, print)| {
        if print {
            print!("{}", cfg.to_toml());
            return Ok(());
        }
        let report = run(&cfg)?;
        for c in &report.checks {
            println!("{} {} = {} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, num(c.value), c.requirement);
        }
        for p in &report.artifacts {
            println!("wrote {}", p.display());
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
