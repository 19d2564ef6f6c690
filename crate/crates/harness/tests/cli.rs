use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_leray-strip");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("LERAY_STRIP_LOG").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    r.records().map(|r| r.unwrap()).collect()
}

fn assert_trailer(path: &Path) {
    let text = std::fs::read_to_string(path).unwrap();
    let last = text.lines().last().unwrap();
    let prefix = format!("# leray-strip {} config=", env!("CARGO_PKG_VERSION"));
    assert!(last.starts_with(&prefix), "{}: {last}", path.display());
    let hash = &last[prefix.len()..];
    assert_eq!(hash.len(), 16);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
}

#[test]
fn poiseuille_prints_profile_and_constant() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["poiseuille", "--phi", "1", "--alpha", "6", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.trim() == "C_R = 6"), "{out}");
    let rows = csv_rows(&dir.path().join("poiseuille.csv"));
    assert_eq!(rows.len(), 11);
    // P(0) = 6 Phi / (6 + alpha) = 1/2 and P(1/2) = 5/4 for alpha = 6
    assert!((rows[0][1].parse::<f64>().unwrap() - 0.5).abs() <= 1e-14);
    assert!((rows[5][1].parse::<f64>().unwrap() - 1.25).abs() <= 1e-14);
    assert_trailer(&dir.path().join("poiseuille.csv"));
    let o = run(&["poiseuille", "--phi", "1", "--alpha", "inf", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("C_R = 12"));
}

#[test]
fn korn3d_ratio_grows_linearly() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["korn3d", "--r", "5,10,20", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rows = csv_rows(&dir.path().join("korn3d.csv"));
    let ratio: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(ratio.len(), 3);
    for w in ratio.windows(2) {
        assert!((w[1] / w[0] - 2.0).abs() <= 0.2, "{ratio:?}");
    }
    assert_trailer(&dir.path().join("korn3d.csv"));
}

#[test]
fn alpha_sweep_on_straight_strip_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.toml",
        "[geometry]\nkind = \"straight\"\n[flow]\nphi = 1.0\n[mesh]\nh = 0.1\nzeta = 2.0\n[output]\nformats = [\"csv\"]\n[sweep]\nalpha = [0, 1, 10]\n",
    );
    let out = dir.path().join("out");
    let o = run(&["--config", &cfg, "--out", out.to_str().unwrap(), "--workers", "3", "sweep"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("sweep.csv"));
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r.iter().any(|c| c == "PASS"), "{r:?}");
    }
    for k in 0..3 {
        let sections = out.join(format!("run_{k:03}/sections.csv"));
        assert_trailer(&sections);
        for r in csv_rows(&sections) {
            assert!((r[2].parse::<f64>().unwrap() - 1.0).abs() <= 1e-8, "{r:?}");
        }
    }
    assert_trailer(&out.join("sweep.csv"));
}

#[test]
fn fixed_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[geometry]\nkind = \"s_bend\"\n[mesh]\nh = 0.2\nzeta = 2.0\n[output]\nformats = [\"csv\"]\n");
    let mut files = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        for cmd in ["solve", "carrier-check"] {
            let o = run(&["--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "0xC0FFEE", cmd]);
            assert!(matches!(o.status.code(), Some(0 | 2)), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let mut names: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        names.sort();
        files.push(names);
    }
    assert!(files[0].len() >= 4);
    for (a, b) in files[0].iter().zip(&files[1]) {
        assert_eq!(a.file_name(), b.file_name());
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), "{}", a.display());
    }
}

#[test]
fn missing_config_is_a_usage_error() {
    let o = run(&["solve"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("usage"));
    let o = run(&["--config", "/nonexistent/run.toml", "decay"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn misspelled_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[geometry]\nkind = \"straight\"\n[mesh]\nzetta = 4.0\n");
    let o = run(&["--config", &cfg, "solve"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("zetta") && err.contains("line 4"), "{err}");
}

#[test]
fn bad_arguments_and_log_levels() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["poiseuille", "--phi", "1", "--alpha", "-2"]).status.code(), Some(1));
    let o = Command::new(BIN).args(["korn3d", "--r", "5"]).env("LERAY_STRIP_LOG", "verbose").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn smallness_warning_goes_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[flow]\nphi = 10.0\nalpha = 1.0\n[mesh]\nh = 0.2\nzeta = 2.0\n[output]\nformats = [\"csv\"]\n");
    let o = run(&["--config", &cfg, "--out", dir.path().join("o").to_str().unwrap(), "solve"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}
