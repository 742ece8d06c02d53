use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sgdg::project::{DEFAULT_COUNT, DEFAULT_SEED};
use sgdg::{Integrator, LaplacianMode, SchemeKind};
use sgdg_cli::{
    cmd_bench, cmd_evolve, cmd_interp, cmd_nnz, default_wave, parse_range, BenchConfig, EvolveConfig, InterpConfig,
    NnzConfig, Report, Sweep, Wave,
};

#[derive(Parser)]
#[command(name = "sgdg", version, about = "Sparse-grid DG experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interpolation error of a plane wave against the number of coefficients.
    Interp {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        wave: WaveArgs,
    },
    /// Nonzeros of the derivative operator against the number of coefficients.
    Nnz {
        #[command(flatten)]
        common: Common,
        /// Derivative direction, 1-based.
        #[arg(long, default_value_t = 1)]
        axis: usize,
    },
    /// Travelling-wave evolution error per level.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        wave: WaveArgs,
        #[arg(long, default_value_t = 0.54)]
        t1: f64,
        #[arg(long, value_enum, default_value_t = LaplacianArg::Explicit)]
        laplacian: LaplacianArg,
    },
    /// Laplacian mat-vec time and memory.
    Bench {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        wave: WaveArgs,
        #[arg(long, default_value_t = 10)]
        reps: usize,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Polynomial order k: a value, a range a..b, or a comma list.
    #[arg(long, default_value = "3", value_parser = parse_list)]
    order: IntList,
    /// Level n: a value, a range a..b, or a comma list.
    #[arg(long, default_value = "1..4", value_parser = parse_list)]
    levels: IntList,
    #[arg(long, value_enum, default_value_t = SchemeArg::Sparse)]
    scheme: SchemeArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Sample points of the error estimate.
    #[arg(long, default_value_t = DEFAULT_COUNT)]
    count: usize,
    /// CSV output; the summary goes beside it as .json. Without it the CSV
    /// is printed.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 4 << 30)]
    budget_bytes: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = IntegratorArg::Rk45)]
    integrator: IntegratorArg,
}

#[derive(Clone, Debug)]
struct IntList(Vec<usize>);

fn parse_list(s: &str) -> Result<IntList, String> {
    parse_range(s).map(IntList)
}

#[derive(Args)]
struct WaveArgs {
    /// Integer wave numbers, comma separated; defaults depend on --dim.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    wave: Option<Vec<i64>>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long, default_value_t = 0.4, allow_hyphen_values = true)]
    phase: f64,
}

impl WaveArgs {
    fn resolve(self, dim: usize, amplitude: f64) -> Wave {
        Wave {
            numbers: self.wave.unwrap_or_else(|| default_wave(dim)),
            amplitude: self.amplitude.unwrap_or(amplitude),
            phase: self.phase,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Full,
    Sparse,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    Rk45,
    Rk78,
    Rk4,
}

#[derive(Clone, Copy, ValueEnum)]
enum LaplacianArg {
    Explicit,
    Grad,
}

impl Common {
    fn sweep(&self) -> Sweep {
        let schemes = match self.scheme {
            SchemeArg::Full => vec![SchemeKind::Full],
            SchemeArg::Sparse => vec![SchemeKind::Sparse],
            SchemeArg::Both => vec![SchemeKind::Sparse, SchemeKind::Full],
        };
        let mut s = Sweep::new(self.dim, self.order.0.clone(), self.levels.0.clone(), schemes);
        s.budget_bytes = self.budget_bytes;
        s
    }

    fn integrator(&self) -> Integrator {
        match self.integrator {
            IntegratorArg::Rk45 => Integrator::Rk45,
            IntegratorArg::Rk78 => Integrator::Rk78,
            IntegratorArg::Rk4 => Integrator::Rk4,
        }
    }
}

fn emit(report: &Report, out: Option<PathBuf>) -> Result<(), Box<dyn std::error::Error>> {
    for r in &report.rows {
        eprintln!(
            "{} D={} k={} n={} {} {:?}{}",
            r.experiment,
            r.dim,
            r.k,
            r.n,
            r.scheme,
            r.status,
            r.mcerr.map(|e| format!(" mcerr={e:.3e}")).unwrap_or_default()
        );
    }
    match out {
        Some(path) => {
            let json = report.write(&path)?;
            eprintln!("wrote {} and {}", path.display(), json.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            report.write_csv(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    let (report, out) = match cli.command {
        Command::Interp { common, wave } => {
            let cfg = InterpConfig {
                sweep: common.sweep(),
                wave: wave.resolve(common.dim, 1.3),
                seed: common.seed,
                count: common.count,
            };
            (cmd_interp(&cfg)?, common.out)
        }
        Command::Nnz { common, axis } => (
            cmd_nnz(&NnzConfig {
                sweep: common.sweep(),
                axis,
            })?,
            common.out,
        ),
        Command::Evolve {
            common,
            wave,
            t1,
            laplacian,
        } => {
            let cfg = EvolveConfig {
                sweep: common.sweep(),
                wave: wave.resolve(common.dim, 1.0),
                t1,
                integrator: common.integrator(),
                tol: common.tol,
                laplacian: match laplacian {
                    LaplacianArg::Explicit => LaplacianMode::Explicit,
                    LaplacianArg::Grad => LaplacianMode::Grad,
                },
                seed: common.seed,
                count: common.count,
            };
            (cmd_evolve(&cfg)?, common.out)
        }
        Command::Bench { common, wave, reps } => {
            let cfg = BenchConfig {
                sweep: common.sweep(),
                wave: wave.resolve(common.dim, 1.3),
                reps,
                seed: common.seed,
                count: common.count,
            };
            (cmd_bench(&cfg)?, common.out)
        }
    };
    emit(&report, out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::*;

    #[test]
    fn arguments_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn negative_wave_numbers_parse() {
        let cli =
            Cli::try_parse_from(["sgdg", "interp", "--wave", "1,-2,0", "--dim", "3", "--levels", "2..3"]).unwrap();
        match cli.command {
            Command::Interp { common, wave } => {
                assert_eq!(common.levels.0, vec![2, 3]);
                assert_eq!(wave.wave, Some(vec![1, -2, 0]));
            }
            _ => unreachable!(),
        }
    }
}
