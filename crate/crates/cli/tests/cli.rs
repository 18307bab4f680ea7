use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_effham"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_config(sub: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.arg(sub).arg(cfg).arg("--out").arg(out).args(extra);
    cmd.output().expect("binary runs")
}

fn report(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap()
}

fn csv_column(path: &Path, column: &str) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == column).expect("column present");
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_1() {
    let out = run(&["frobnicate", "x.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn missing_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("coupling", &dir.path().join("absent.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read config file"));
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "[params]\nd = 3\n[grid]\nkind = \"radial\"\nr_max = 5.0\nn = 11\nspacing = 1\n",
    )
    .unwrap();
    let out = run_config("smooth", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spacing"));
}

#[test]
fn coupling_reports_unit_shell_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("coupling", &config("coupling_unit_shell.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "coupling");
    let a = r["scalars"]["a"].as_f64().unwrap();
    let exact = 1.0 / (12.0 * std::f64::consts::PI.powi(2));
    assert!((a - exact).abs() <= 1e-12 * exact, "{a}");
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(r["config"]["field"]["kappa"], 1.0);
}

#[test]
fn harmonic_shift_column_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("shift", &config("harmonic_shift.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "shift");
    let a = r["scalars"]["a"].as_f64().unwrap();
    let expected = 1.0 * 3.0 * a;
    let full = csv_column(&dir.path().join("shift.csv"), "full");
    assert_eq!(full.len(), 4);
    for s in full {
        assert!((s - expected).abs() <= 1e-9, "{s} vs {expected}");
    }
}

#[test]
fn monte_carlo_tables_are_byte_identical_across_runs() {
    let (d1, d2, d3) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    let cfg = config("well_conditions.toml");
    for d in [&d1, &d2] {
        let out = run_config("conditions", &cfg, d.path(), &["--seed", "11", "--threads", "2"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(d1.path().join("conditions.csv")).unwrap();
    let b = std::fs::read(d2.path().join("conditions.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(report(d1.path(), "conditions")["seed"], 11);
    // A different seed moves the Monte Carlo estimate.
    run_config("conditions", &cfg, d3.path(), &["--seed", "12"]);
    assert_ne!(a, std::fs::read(d3.path().join("conditions.csv")).unwrap());
}

#[test]
fn positivity_violation_exits_2_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strong.toml");
    std::fs::write(
        &cfg,
        "[params]\nd = 3\nm0 = 1.0\nq = 50.0\n[field]\nkappa = 1.0\nlambda = 2.0\n",
    )
    .unwrap();
    let out = run_config("coupling", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(dir.path(), "coupling");
    assert_eq!(r["passed"], false);
}

#[test]
fn singular_potential_in_dressed_check_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "[params]\nd = 3\n[potential]\nkind = \"coulomb\"\ngamma = 1.0\n[options]\na = 0.01\n",
    )
    .unwrap();
    let out = run_config("dressed-check", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular"));
}

#[test]
fn remaining_subcommands_pass_their_checks() {
    for (sub, cfg) in [
        ("spectrum", "harmonic_shift.toml"),
        ("smooth", "harmonic_shift.toml"),
        ("fiber", "fiber_tiny.toml"),
        ("overlap", "overlap_medium.toml"),
        ("dressed-check", "dressed_harmonic.toml"),
        ("inequality", "coulomb_inequality.toml"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let out = run_config(sub, &config(cfg), dir.path(), &[]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{sub}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let r = report(dir.path(), sub);
        assert_eq!(r["passed"], true, "{sub}");
        assert!(!r["checks"].as_array().unwrap().is_empty(), "{sub}");
    }
}

#[test]
fn tabulated_potential_file_is_read_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("well.txt"),
        "0.0, -1.0\n0.999, -1.0\n1.0, 0.0\n3.0, 0.0\n",
    )
    .unwrap();
    let cfg = dir.path().join("tab.toml");
    std::fs::write(
        &cfg,
        "[params]\nd = 3\n[potential]\nkind = \"tabulated\"\nfile = \"well.txt\"\n[grid]\nkind = \"radial\"\nr_max = 4.0\nn = 401\n[options]\na = 0.01\n",
    )
    .unwrap();
    let out = run_config("smooth", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = csv_column(&dir.path().join("out/smooth.csv"), "v_eff");
    assert_eq!(v.len(), 401);
    assert!(v[0] < -0.9 && v[0] >= -1.0 - 1e-12);
}

#[test]
fn grid_potential_file_feeds_smoothing_and_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let n = 33;
    let h = 8.0 / (n - 1) as f64;
    let mut text = String::from("# kind = box\n# dim = 2\n# half_width = 4.0\n# n = 33\n");
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| {
                let (x, y) = (-4.0 + i as f64 * h, -4.0 + j as f64 * h);
                format!("{}", -(-(x * x + y * y)).exp())
            })
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    std::fs::write(dir.path().join("bump.grid"), text).unwrap();
    let cfg = dir.path().join("g.toml");
    std::fs::write(
        &cfg,
        "[params]\nd = 2\n[potential]\nkind = \"grid\"\nfile = \"bump.grid\"\n[options]\na = 0.05\nbudget = 20000\n",
    )
    .unwrap();
    for sub in ["smooth", "conditions"] {
        let out = run_config(sub, &cfg, &dir.path().join(sub), &[]);
        assert_eq!(out.status.code(), Some(0), "{sub}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let r = report(&dir.path().join("conditions"), "conditions");
    // ∫ e^{−|x|²} e^{−|x|²} dx over ℝ² = π/2; the grid truncation at |x| = 4 is negligible.
    let v = r["scalars"]["gaussian_l1"]["Finite"]["value"].as_f64().unwrap();
    let err = r["scalars"]["gaussian_l1"]["Finite"]["error"].as_f64().unwrap();
    assert!((v - std::f64::consts::FRAC_PI_2).abs() < 4.0 * err + 1e-3, "{v} ± {err}");
    let smooth = csv_column(&dir.path().join("smooth/smooth.csv"), "v_eff");
    assert_eq!(smooth.len(), n * n);
}
