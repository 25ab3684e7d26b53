//! `gdlkit` command-line front end: runs each experiment and writes a JSON
//! or CSV report. Exit status 0 means every verdict passed, 1 that one
//! failed, 2 a usage or IO error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use report::{emit, Format, Report};

#[derive(Parser, Debug)]
#[command(name = "gdlkit", version, about = "Symmetry and equivariance experiments on grids, groups, graphs and meshes")]
struct Cli {
    /// Report destination; `-` is standard output.
    #[arg(long, global = true, default_value = "-")]
    output: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Root seed; defaults to $GDLKIT_SEED, else 42.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Record wall-clock time in runtime_ms (otherwise 0, keeping reports reproducible).
    #[arg(long, global = true)]
    timing: bool,
    /// Run independent trials on a thread pool; results are merged in trial order.
    #[arg(long, global = true)]
    parallel: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Instability of the Fourier modulus under a small dilation.
    FourierInstability {
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        k0: usize,
        #[arg(long, default_value_t = 32.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.05)]
        s: f64,
    },
    /// Finite groups.
    Group {
        #[command(subcommand)]
        action: GroupCommand,
    },
    /// Graph neural networks.
    Gnn {
        #[command(subcommand)]
        action: GnnCommand,
    },
    /// Triangle meshes.
    Mesh {
        #[command(subcommand)]
        action: MeshCommand,
    },
    /// E(3)-equivariant message passing.
    Egnn {
        #[command(subcommand)]
        action: EgnnCommand,
    },
    /// Gauge-equivariant mesh convolution.
    Gauge {
        #[command(subcommand)]
        action: GaugeCommand,
    },
    /// Recurrent networks.
    Rnn {
        #[command(subcommand)]
        action: RnnCommand,
    },
    /// LSTM gates.
    Lstm {
        #[command(subcommand)]
        action: LstmCommand,
    },
}

#[derive(Subcommand, Debug)]
enum GroupCommand {
    /// Multiplication table generated from permutation generators.
    Table {
        #[arg(long, value_parser = ["Zn", "D3", "Oh", "revcomp"])]
        name: String,
        /// Cyclic order for Zn, sequence length for revcomp.
        #[arg(long, default_value_t = 7)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
enum GnnCommand {
    /// Permutation equivariance over random graphs.
    Equivariance {
        #[arg(long, default_value = "all", value_parser = ["all", "conv", "attn", "mpnn"])]
        flavour: String,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
enum MeshCommand {
    /// Smallest generalized eigenvalues of the cotangent Laplacian.
    Spectrum {
        /// OFF/OBJ file or `icosphere:K`.
        #[arg(long, default_value = "icosphere:2")]
        mesh: String,
        #[arg(long, default_value_t = 16)]
        k: usize,
    },
    /// Filter output discrepancy after jittering the mesh.
    Stability {
        #[arg(long, default_value = "icosphere:2")]
        mesh: String,
        #[arg(long, default_value_t = 0.005)]
        epsilon: f64,
        #[arg(long, default_value = "poly", value_parser = ["direct-highpass", "poly", "cayley"])]
        kind: String,
        #[arg(long, default_value_t = 6)]
        degree: usize,
    },
}

#[derive(Subcommand, Debug)]
enum EgnnCommand {
    /// E(3) and permutation equivariance over random geometric graphs.
    Equivariance {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        d: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
enum GaugeCommand {
    /// Equivariance under random per-vertex frame rotations.
    Equivariance {
        #[arg(long, default_value = "icosphere:2")]
        mesh: String,
        /// Rotation orders of the feature type, e.g. "[0,0,1]".
        #[arg(long, default_value = "[0,1]")]
        orders: String,
        #[arg(long, default_value_t = 8)]
        bins: usize,
    },
}

#[derive(Subcommand, Debug)]
enum RnnCommand {
    /// Padded shift equivariance with a fixed-point initial state.
    ShiftEquivariance {
        #[arg(long = "T", default_value_t = 12)]
        steps: usize,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
}

#[derive(Subcommand, Debug)]
enum LstmCommand {
    /// Gate values from chrono initialisation.
    Chrono {
        #[arg(long, default_value_t = 5.0)]
        tlow: f64,
        #[arg(long, default_value_t = 50.0)]
        thigh: f64,
        #[arg(long, default_value_t = 1000)]
        m: usize,
    },
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("GDLKIT_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| format!("GDLKIT_SEED must be an unsigned integer, got {v:?}")),
        Err(_) => Ok(42),
    }
}

fn run(command: Command, seed: u64, parallel: bool) -> gdlkit::Result<(Report, Option<u64>)> {
    use commands as c;
    Ok(match command {
        Command::FourierInstability { n, k0, sigma, s } => (c::fourier_instability(n, k0, sigma, s, seed)?, None),
        Command::Group { action: GroupCommand::Table { name, n } } => (c::group_table(&name, n, seed)?, None),
        Command::Gnn { action: GnnCommand::Equivariance { flavour, n, d, trials } } => {
            (c::gnn_equivariance(&flavour, n, d, trials, parallel, seed)?, None)
        }
        Command::Mesh { action: MeshCommand::Spectrum { mesh, k } } => (c::mesh_spectrum(&mesh, k, seed)?, None),
        Command::Mesh { action: MeshCommand::Stability { mesh, epsilon, kind, degree } } => {
            let (r, ms) = c::mesh_stability(&mesh, epsilon, &kind, degree, seed)?;
            (r, Some(ms))
        }
        Command::Egnn { action: EgnnCommand::Equivariance { n, d, trials } } => {
            (c::egnn_equivariance(n, d, trials, parallel, seed)?, None)
        }
        Command::Gauge { action: GaugeCommand::Equivariance { mesh, orders, bins } } => {
            (c::gauge_equivariance(&mesh, &orders, bins, seed)?, None)
        }
        Command::Rnn { action: RnnCommand::ShiftEquivariance { steps, m, k } } => (c::rnn_shift_equivariance(steps, m, k, seed)?, None),
        Command::Lstm { action: LstmCommand::Chrono { tlow, thigh, m } } => (c::lstm_chrono(tlow, thigh, m, seed)?, None),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to standard output with status 0; usage errors to standard error.
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let seed = match resolve_seed(cli.seed) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let (mut report, own_time) = match run(cli.command, seed, cli.parallel) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.timing {
        report.runtime_ms = own_time.unwrap_or_else(|| start.elapsed().as_millis() as u64);
    }
    report.seal();
    if let Err(e) = emit(&report, &cli.output, cli.format) {
        eprintln!("error: cannot write {}: {e}", cli.output.display());
        return ExitCode::from(2);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
