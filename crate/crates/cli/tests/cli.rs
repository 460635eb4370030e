use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn frsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frsense"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A small DPGMM sweep config writing nothing by itself.
fn small_config(dir: &Path, extra_sweep: &str) -> PathBuf {
    let data = dir.join("obs.txt");
    let mut text = String::from("# three clumps\n");
    for i in 0..60 {
        let centre = [-2.0, 0.5, 3.0][i % 3];
        text.push_str(&format!(
            "{}\n",
            centre + 0.1 * ((i * 7919) % 13) as f64 / 13.0
        ));
    }
    std::fs::write(&data, text).unwrap();
    let cfg = dir.join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            r#"[dataset]
path = "obs.txt"

[dpgmm]
alpha = 1.0

[sweep]
parameter = "alpha"
values = [0.5, 1.0, 4.0]
replicates = 3
{extra_sweep}

[mcmc]
n_samples = 30
burn_in = 20
thin = 1
seed = 11

[geometry]
n_points = 128
"#
        ),
    )
    .unwrap();
    cfg
}

fn density_file(path: &Path, f: impl Fn(f64) -> f64) {
    let n = 256;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let row = |v: Vec<f64>| {
        v.iter()
            .map(|x| format!("{x:.15e}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    let ys = xs.iter().map(|&x| f(x)).collect();
    std::fs::write(path, format!("{}\n{}\n", row(xs), row(ys))).unwrap();
}

fn read_matrix(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

#[test]
fn sweep_writes_the_archive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = dir.path().join("out");
    let o = frsense(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["sweep.csv", "bands.csv", "manifest.toml"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().next(), Some("param_value,D,V,E"));
    assert_eq!(sweep.lines().count(), 1 + 3);
    let bands = std::fs::read_to_string(out.join("bands.csv")).unwrap();
    // default band values {0.5, 1.0, 4.0}, three measures each
    assert_eq!(bands.lines().count(), 1 + 9);
}

#[test]
fn unknown_parameter_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("parameter = \"alpha\"", "parameter = \"beta\"");
    std::fs::write(&cfg, text).unwrap();
    let o = frsense(&["validate-config", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).starts_with("CONFIG_BAD_PARAM:"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn unknown_key_is_a_bad_param() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "colour = \"red\"");
    let o = frsense(&["validate-config", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).starts_with("CONFIG_BAD_PARAM:"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn mismatched_preset_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let o = frsense(&[
        "validate-config",
        "--config",
        cfg.to_str().unwrap(),
        "--preset",
        "dp.alpha",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).starts_with("CONFIG_BAD_PRESET:"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn missing_output_directory_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let o = frsense(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("CLI_NO_OUTPUT:"));
}

#[test]
fn geodesic_has_seven_rows_with_matching_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    density_file(&a, |_| 1.0);
    density_file(&b, |x| 2.0 * x);
    let o = frsense(&[
        "geodesic",
        "--from",
        a.to_str().unwrap(),
        "--to",
        b.to_str().unwrap(),
        "--steps",
        "7",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = read_matrix(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(m.len(), 1 + 7);
    let xs = &m[0];
    for (x, y) in m[1].iter().zip(xs) {
        assert!((x - 1.0).abs() < 1e-8, "{x} at {y}");
    }
    for (x, y) in m[7].iter().zip(xs) {
        assert!((x - 2.0 * y).abs() < 1e-8, "{x} at {y}");
    }
}

#[test]
fn mean_and_pca_of_a_geodesic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, g) = (
        dir.path().join("a.csv"),
        dir.path().join("b.csv"),
        dir.path().join("g.csv"),
    );
    density_file(&a, |_| 1.0);
    density_file(&b, |x| 2.0 * x);
    let o = frsense(&[
        "geodesic",
        "--from",
        a.to_str().unwrap(),
        "--to",
        b.to_str().unwrap(),
        "--steps",
        "5",
        "--out",
        g.to_str().unwrap(),
    ]);
    assert!(o.status.success());

    let o = frsense(&["mean", "--input", g.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mean = read_matrix(&String::from_utf8(o.stdout).unwrap());
    let mid = read_matrix(&std::fs::read_to_string(&g).unwrap())[3].clone();
    for (x, y) in mean[1].iter().zip(&mid) {
        assert!((x - y).abs() < 1e-6);
    }

    let o = frsense(&["pca", "--input", g.to_str().unwrap(), "--components", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "component,eigenvalue,cumulative_fraction");
    assert_eq!(lines.len(), 3);
    let second: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!(second < 1e-10);
}

#[test]
fn malformed_density_file_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    std::fs::write(&a, "0,0.5,1\n1,x,1\n").unwrap();
    let o = frsense(&["mean", "--input", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("DENSITY_INVALID:"));
}

#[test]
fn manifest_reload_reproduces_the_archive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let o = frsense(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = first.join("manifest.toml");
    let o = frsense(&[
        "sweep",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["sweep.csv", "bands.csv", "trace.csv"] {
        assert_eq!(
            std::fs::read(first.join(f)).unwrap(),
            std::fs::read(second.join(f)).unwrap(),
            "{f}"
        );
    }
    let strip = |p: PathBuf| -> String {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("wall_clock_seconds"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(manifest), strip(second.join("manifest.toml")));
}

#[test]
fn seed_and_thread_count_behave() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec![
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let o = frsense(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out.join("sweep.csv")).unwrap()
    };
    let one = run("t1", &["--threads", "1"]);
    let four = run("t4", &["--threads", "4"]);
    assert_eq!(one, four);
    let other = run("s", &["--seed", "12"]);
    assert_ne!(one, other);
}
