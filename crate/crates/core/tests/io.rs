use frsense::io::{
    load_dataset, parse_observations, read_density_matrix, write_archive, ExperimentConfig,
    RawConfig,
};
use frsense::samplers::Transform;
use frsense::{run_sweep, Grid, GridPdf};
use std::path::Path;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn observations_skip_comments_and_report_lines() {
    let p = Path::new("x.txt");
    let xs = parse_observations("# header\n1.5\n\n  2 # trailing\n-3e-1\n", p).unwrap();
    assert_eq!(xs, vec![1.5, 2.0, -0.3]);
    let err = parse_observations("1\n2\nthree\n", p).unwrap_err();
    assert_eq!(err.code(), "DATA_PARSE");
    assert!(err.to_string().starts_with("x.txt:3:"), "{err}");
}

#[test]
fn loaded_data_spans_the_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let lines: String = (0..155)
        .map(|i| format!("{}\n", 3.0 + (i * 37 % 101) as f64 * 0.1))
        .collect();
    let p = write(dir.path(), "acid.txt", &format!("# 155 readings\n{lines}"));
    let d = load_dataset(&p, Transform::Log).unwrap();
    assert_eq!(d.len(), 155);
    let u = d.unit_observations();
    let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!((lo - 0.05).abs() < 1e-12 && (hi - 0.95).abs() < 1e-12);
}

#[test]
fn envelope_data_rescales_to_itself() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "e.txt", "0.05\n0.3\n0.95\n0.6\n");
    let d = load_dataset(&p, Transform::None).unwrap();
    let r = d.rescale();
    assert!(r.shift.abs() < 1e-12 && (r.scale - 1.0).abs() < 1e-12);
}

#[test]
fn log_of_nonpositive_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "n.txt", "1\n0\n");
    let e = load_dataset(&p, Transform::Log).unwrap_err();
    assert_eq!(e.code(), "DATA_LOG_NONPOSITIVE");
    let p = write(dir.path(), "empty.txt", "# nothing\n");
    assert_eq!(
        load_dataset(&p, Transform::None).unwrap_err().code(),
        "DATA_EMPTY"
    );
}

const CONFIG: &str = r#"
[dataset]
path = "obs.txt"

[dpgmm]
alpha = 1.0

[sweep]
parameter = "alpha"
values = [0.5, 1.0, 2.0]
replicates = 2

[mcmc]
n_samples = 25
burn_in = 10
thin = 1
seed = 3

[geometry]
n_points = 64

[output]
densities = true
"#;

fn setup(dir: &Path) -> std::path::PathBuf {
    let obs: String = (0..30)
        .map(|i| format!("{}\n", (i % 7) as f64 - 0.3 * (i % 3) as f64))
        .collect();
    write(dir, "obs.txt", &obs);
    write(dir, "c.toml", CONFIG)
}

#[test]
fn config_errors_carry_codes() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let cases = [
        (
            CONFIG.replace("alpha = 1.0", "alpah = 1.0"),
            "CONFIG_BAD_PARAM",
        ),
        (
            CONFIG.replace("[dpgmm]", "[dp]\n[dpgmm]"),
            "CONFIG_BAD_MODEL",
        ),
        (
            CONFIG.replace("replicates = 2", "replicates = 2\npreset = \"dp.alpha\""),
            "CONFIG_BAD_VALUE",
        ),
        (
            CONFIG.replace(
                "parameter = \"alpha\"\nvalues = [0.5, 1.0, 2.0]",
                "preset = \"dcv.phi\"",
            ),
            "CONFIG_BAD_PRESET",
        ),
        (
            CONFIG.replace("n_points = 64", "n_points = 2"),
            "CONFIG_BAD_VALUE",
        ),
        (CONFIG.replace("[sweep]", "[sweep"), "CONFIG_SYNTAX"),
        (CONFIG.replace("obs.txt", "missing.txt"), "IO_READ"),
    ];
    for (text, code) in cases {
        let p = write(dir.path(), "bad.toml", &text);
        let e = ExperimentConfig::load(&p).unwrap_err();
        assert_eq!(e.code(), code, "{e}");
        assert!(e.is_user_error());
    }
}

#[test]
fn archive_round_trips_through_its_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = setup(dir.path());
    let (cfg, data) = ExperimentConfig::load(&cfg_path).unwrap();
    let res = run_sweep(&data, &cfg.sweep).unwrap();
    let out = dir.path().join("a");
    write_archive(&out, &cfg, &data, &res).unwrap();

    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 1 + cfg.sweep.values.len());
    let bands = std::fs::read_to_string(out.join("bands.csv")).unwrap();
    assert_eq!(bands.lines().count(), 1 + 3 * cfg.sweep.band_values.len());
    for field in sweep.lines().skip(1).flat_map(|l| l.split(',')) {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.len(), 13, "{field}");
    }
    let m = read_density_matrix(&out.join("densities.csv")).unwrap();
    assert_eq!(m.grid, Grid::new(64).unwrap());
    assert_eq!(m.rows.len(), 25);

    let manifest = out.join("manifest.toml");
    let (again, data2) = ExperimentConfig::load(&manifest).unwrap();
    assert_eq!(again.sweep, cfg.sweep);
    let res2 = run_sweep(&data2, &again.sweep).unwrap();
    let out2 = dir.path().join("b");
    write_archive(&out2, &again, &data2, &res2).unwrap();
    for f in ["sweep.csv", "bands.csv", "densities.csv", "trace.csv"] {
        assert_eq!(
            std::fs::read(out.join(f)).unwrap(),
            std::fs::read(out2.join(f)).unwrap(),
            "{f}"
        );
    }
    let strip = |p: &Path| {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("wall_clock_seconds"))
            .map(String::from)
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&manifest), strip(&out2.join("manifest.toml")));
    // the manifest echo parses on its own, run table included
    assert!(RawConfig::read(&manifest).unwrap().run.is_some());
}

#[test]
fn density_rows_are_renormalized_on_read() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(16).unwrap();
    let header: Vec<String> = g.abscissae().iter().map(|x| x.to_string()).collect();
    let p = write(
        dir.path(),
        "d.csv",
        &format!("{}\n{}\n", header.join(","), vec!["2"; 16].join(",")),
    );
    let m = read_density_matrix(&p).unwrap();
    assert_eq!(m.rows[0], GridPdf::uniform(g));
}
