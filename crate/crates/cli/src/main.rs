use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use frsense::geometry::geodesic_path;
use frsense::io::{
    format_number, read_density_matrix, write_archive, write_density_matrix, write_density_rows,
    ExperimentConfig, IoError, RawConfig,
};
use frsense::{karcher_mean, run_sweep, tangent_pca, GeometryError, KarcherOptions, Srd};

/// Fisher-Rao prior sensitivity sweeps for Bayesian density estimates.
#[derive(Parser, Debug)]
#[command(name = "frsense", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a perturbation sweep and write its result archive.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed; overrides `[mcmc] seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Preset grid such as `dpgmm.alpha`; replaces the config's grid.
        #[arg(long)]
        preset: Option<String>,
    },
    /// Load and check a config without running it.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        preset: Option<String>,
    },
    /// Densities along the geodesic between two densities.
    Geodesic {
        /// Density matrix file; its first row is used.
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long, default_value_t = 7)]
        steps: usize,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Karcher mean of the rows of a density matrix.
    Mean {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tangent PCA eigenvalues of the rows of a density matrix.
    Pca {
        #[arg(long)]
        input: PathBuf,
        /// Number of eigenvalues to report; all when absent.
        #[arg(long)]
        components: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct CliError {
    code: &'static str,
    message: String,
    internal: bool,
}

impl CliError {
    fn user(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            internal: false,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        Self {
            code: e.code(),
            message: e.to_string(),
            internal: !e.is_user_error(),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        Self::user("GEOMETRY", e.to_string())
    }
}

fn load(
    config: &Path,
    seed: Option<u64>,
    preset: Option<&str>,
) -> Result<(ExperimentConfig, frsense::Dataset), CliError> {
    let mut raw = RawConfig::read(config)?;
    if let Some(p) = preset {
        raw.set_preset(p);
    }
    if let Some(s) = seed {
        raw.mcmc.seed = Some(s);
    }
    let base = config.parent().unwrap_or(Path::new("."));
    Ok(ExperimentConfig::resolve(&raw, base)?)
}

fn emit(out: Option<&Path>, rows: &[frsense::GridPdf]) -> Result<(), CliError> {
    match out {
        Some(p) => Ok(write_density_matrix(p, rows)?),
        None => write_density_rows(std::io::stdout().lock(), rows)
            .map_err(|e| CliError::user("IO_WRITE", e.to_string())),
    }
}

fn first_row(path: &Path) -> Result<Srd, CliError> {
    let m = read_density_matrix(path)?;
    m.rows.first().map(|p| p.to_srd()).ok_or_else(|| {
        CliError::user(
            "DENSITY_INVALID",
            format!("{}: no density rows", path.display()),
        )
    })
}

fn all_rows(path: &Path) -> Result<Vec<Srd>, CliError> {
    let m = read_density_matrix(path)?;
    if m.rows.is_empty() {
        return Err(CliError::user(
            "DENSITY_INVALID",
            format!("{}: no density rows", path.display()),
        ));
    }
    Ok(m.rows.iter().map(|p| p.to_srd()).collect())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep {
            config,
            out,
            seed,
            threads,
            preset,
        } => {
            let (cfg, data) = load(&config, seed, preset.as_deref())?;
            let dir = out.or_else(|| cfg.output.dir.clone()).ok_or_else(|| {
                CliError::user(
                    "CLI_NO_OUTPUT",
                    "no output directory: pass --out or set [output] dir",
                )
            })?;
            let result = match threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| CliError::user("CLI_THREADS", e.to_string()))?
                    .install(|| run_sweep(&data, &cfg.sweep)),
                None => run_sweep(&data, &cfg.sweep),
            }
            .map_err(IoError::from)?;
            for path in write_archive(&dir, &cfg, &data, &result)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::ValidateConfig { config, preset } => {
            let (cfg, data) = load(&config, None, preset.as_deref())?;
            let s = &cfg.sweep;
            println!(
                "ok: {} sweep over {} ({} values, {} replicates) on {} observations",
                s.model(),
                s.parameter,
                s.values.len(),
                s.replicates,
                data.len()
            );
            Ok(())
        }
        Command::Geodesic {
            from,
            to,
            steps,
            out,
        } => {
            if steps < 2 {
                return Err(CliError::user("CLI_USAGE", "--steps must be at least 2"));
            }
            let a = first_row(&from)?;
            let b = first_row(&to)?;
            let path = geodesic_path(&a, &b, steps)?;
            emit(out.as_deref(), &path)
        }
        Command::Mean { input, out } => {
            let rows = all_rows(&input)?;
            let m = karcher_mean(&rows, &KarcherOptions::default())?;
            eprintln!(
                "iterations {}, gradient norm {:e}, converged {}",
                m.iterations, m.gradient_norm, m.converged
            );
            emit(out.as_deref(), &[m.mean.to_pdf()])
        }
        Command::Pca {
            input,
            components,
            out,
        } => {
            let rows = all_rows(&input)?;
            let t = tangent_pca(&rows, &KarcherOptions::default())?;
            let k = components
                .unwrap_or(t.eigenvalues.len())
                .min(t.eigenvalues.len());
            let total: f64 = t.eigenvalues.iter().sum();
            let mut text = String::from("component,eigenvalue,cumulative_fraction\n");
            let mut acc = 0.0;
            for (i, l) in t.eigenvalues[..k].iter().enumerate() {
                acc += l;
                let frac = if total > 0.0 { acc / total } else { 0.0 };
                text.push_str(&format!(
                    "{},{},{}\n",
                    i + 1,
                    format_number(*l),
                    format_number(frac)
                ));
            }
            match out {
                Some(p) => {
                    std::fs::write(&p, text).map_err(|e| CliError::user("IO_WRITE", e.to_string()))
                }
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
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
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "{}: {}", e.code, e.message);
            ExitCode::from(if e.internal { 2 } else { 1 })
        }
    }
}
