use clap::{Args, Parser, Subcommand};
use qgvac::rmt::EnsembleKind;
use std::path::PathBuf;
use std::process::ExitCode;

mod commands;

/// Vacuum energy, spectra and trace formulas for quantum graphs.
#[derive(Debug, Parser)]
#[command(name = "qgvac", version, about)]
pub struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Laplacian eigenvalues up to a cut-off, as CSV.
    Spectrum(SpectrumArgs),
    /// Casimir energy by every applicable method, as JSON.
    Energy(EnergyArgs),
    /// Cylinder trace from the spectrum against its image-sum reconstruction.
    Images(ImagesArgs),
    /// Random-matrix energy statistics, as JSON lines.
    Rmt(RmtArgs),
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long = "kmax")]
    pub k_max: f64,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Longest period in the orbit sum.
    #[arg(long = "nmax", default_value_t = 30)]
    pub n_max: usize,
    /// Also run the spectral method with eigenvalues up to this cut-off.
    #[arg(long = "kmax")]
    pub k_max: Option<f64>,
    /// Extrapolation grid for the spectral method, `a:b:n`.
    #[arg(long = "t-grid", value_parser = parse_t_grid)]
    pub t_grid: Option<TGrid>,
    /// Write the per-period orbit-sum breakdown here as JSON lines.
    #[arg(long)]
    pub breakdown: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImagesArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Values of t, `a:b:n` with geometric spacing.
    #[arg(long = "t-grid", value_parser = parse_t_grid)]
    pub t_grid: TGrid,
    /// Longest period in the reconstruction.
    #[arg(long = "nmax", default_value_t = 2000)]
    pub n_max: usize,
    /// Spectral cut-off; by default just large enough for the smallest t.
    #[arg(long = "kmax")]
    pub k_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RmtArgs {
    /// poisson, coe, cue, cse, cse-lifted or all. Accepts a list.
    #[arg(long, value_delimiter = ',', default_value = "all", value_parser = parse_kind)]
    pub kind: Vec<KindSelection>,
    /// Number of bonds; the matrices have size 2B. Accepts a list.
    #[arg(long = "B", value_delimiter = ',', required = true)]
    pub num_bonds: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Common bond length.
    #[arg(long, default_value_t = 1.0)]
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KindSelection {
    All,
    One(EnsembleKind),
}

fn parse_kind(s: &str) -> Result<KindSelection, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(KindSelection::All);
    }
    s.parse()
        .map(KindSelection::One)
        .map_err(|e: qgvac::Error| e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TGrid(pub Vec<f64>);

/// `a:b:n`, n points from a to b in geometric progression.
fn parse_t_grid(s: &str) -> Result<TGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err("expected a:b:n".into());
    };
    let a: f64 = a.parse().map_err(|_| format!("bad start `{a}`"))?;
    let b: f64 = b.parse().map_err(|_| format!("bad end `{b}`"))?;
    let n: usize = n.parse().map_err(|_| format!("bad count `{n}`"))?;
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err("t values must be positive".into());
    }
    if n == 0 {
        return Err("need at least one point".into());
    }
    if n == 1 {
        return Ok(TGrid(vec![a]));
    }
    let ratio = (b / a).powf(1.0 / (n - 1) as f64);
    Ok(TGrid(
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a * ratio.powi(i as i32)
                }
            })
            .collect(),
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
