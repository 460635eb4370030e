use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::density::write_density_matrix;
use super::IoError;
use crate::samplers::Dataset;
use crate::sweep::SweepResult;

/// Scientific notation with 12 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Serialize)]
struct RunRecord {
    version: &'static str,
    model: String,
    parameter: String,
    dataset_name: String,
    dataset_n: usize,
    /// Observations in model units are `shift + scale * u` for `u` on the
    /// density grid.
    rescale_shift: f64,
    rescale_scale: f64,
    baseline_seeds: Vec<String>,
    perturbed_seeds: Vec<String>,
    wall_clock_seconds: f64,
}

fn hex(seeds: &[u64]) -> Vec<String> {
    seeds.iter().map(|s| format!("{s:#018x}")).collect()
}

/// Resolved config followed by a `[run]` record. Loading this text as a
/// config reproduces the run.
pub fn manifest_text(cfg: &ExperimentConfig, data: &Dataset, result: &SweepResult) -> String {
    let run = RunRecord {
        version: env!("CARGO_PKG_VERSION"),
        model: result.spec.model().tag().to_string(),
        parameter: result.spec.parameter.clone(),
        dataset_name: data.name().to_string(),
        dataset_n: data.len(),
        rescale_shift: data.rescale().shift,
        rescale_scale: data.rescale().scale,
        baseline_seeds: hex(&result.baseline_seeds),
        perturbed_seeds: hex(&result.perturbed_seeds),
        wall_clock_seconds: result.wall_clock.as_secs_f64(),
    };
    format!(
        "{}\n[run]\n{}",
        cfg.echo().to_toml(),
        toml::to_string(&run).expect("run record is serializable")
    )
}

fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), IoError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let werr = |e: csv::Error| IoError::Write {
        path: path.to_path_buf(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(path).map_err(werr)?;
    w.write_record(header).map_err(werr)?;
    for r in rows {
        w.write_record(r).map_err(werr)?;
    }
    w.flush().map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

/// Writes `sweep.csv`, `bands.csv` and `manifest.toml` into `dir`, plus
/// `densities.csv` and `trace.csv` for the first baseline fit when enabled.
/// Returns the files written.
pub fn write_archive(
    dir: &Path,
    cfg: &ExperimentConfig,
    data: &Dataset,
    result: &SweepResult,
) -> Result<Vec<PathBuf>, IoError> {
    std::fs::create_dir_all(dir).map_err(|source| IoError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    let sweep = dir.join("sweep.csv");
    write_csv(
        &sweep,
        &["param_value", "D", "V", "E"],
        result.points.iter().map(|p| {
            [
                p.value,
                p.triple.d_shift,
                p.triple.v_spread,
                p.triple.e_covshape,
            ]
            .map(format_number)
        }),
    )?;
    written.push(sweep);

    let bands = dir.join("bands.csv");
    write_csv(
        &bands,
        &["param_value", "measure", "lo", "hi"],
        result.bands.iter().flat_map(|b| {
            [("D", b.d), ("V", b.v), ("E", b.e)].map(|(m, (lo, hi))| {
                [
                    format_number(b.value),
                    m.to_string(),
                    format_number(lo),
                    format_number(hi),
                ]
            })
        }),
    )?;
    written.push(bands);

    let manifest = dir.join("manifest.toml");
    std::fs::write(&manifest, manifest_text(cfg, data, result)).map_err(|source| {
        IoError::Write {
            path: manifest.clone(),
            source,
        }
    })?;
    written.push(manifest);

    if cfg.output.densities {
        let p = dir.join("densities.csv");
        write_density_matrix(&p, &result.first_baseline.pdfs)?;
        written.push(p);
    }
    if cfg.output.trace {
        let p = dir.join("trace.csv");
        write_csv(
            &p,
            &[
                "draw",
                "clusters",
                "alpha",
                "a",
                "sigma2",
                "mu0",
                "max_mean_deviation",
                "variance_dispersion",
            ],
            result
                .first_baseline
                .trace
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    [
                        i.to_string(),
                        t.clusters.to_string(),
                        format_number(t.alpha),
                        opt(t.a),
                        opt(t.sigma2),
                        opt(t.mu0),
                        opt(t.max_mean_deviation),
                        opt(t.variance_dispersion),
                    ]
                }),
        )?;
        written.push(p);
    }
    Ok(written)
}
