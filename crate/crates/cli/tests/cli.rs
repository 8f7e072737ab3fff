use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn projls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projls"))
        .args(args)
        .env_remove("PROJLS_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn values(text: &str) -> Vec<f64> {
    text.split_whitespace()
        .skip(1)
        .map(|t| t.parse().unwrap())
        .collect()
}

#[test]
fn solve_prints_solution() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", "3 2\n1 0\n0 1\n1 1\n");
    let b = write(dir.path(), "b.txt", "3\n1 2 3\n");
    let o = projls(&["solve", "--matrix", &a, "--rhs", &b]);
    assert_eq!(o.status.code(), Some(0));
    let x = values(&stdout(&o));
    assert!(
        (x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12,
        "{x:?}"
    );
}

#[test]
fn solve_single_unknown_is_one_based() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", "2 2\n2 1\n1 3\n");
    let b = write(dir.path(), "b.txt", "2\n3 5\n");
    // 2x + y = 3, x + 3y = 5 → x = 4/5, y = 7/5
    for (k, want) in [("1", 0.8), ("2", 1.4)] {
        for method in ["proposed", "householder_qr"] {
            let o = projls(&[
                "solve",
                "--matrix",
                &a,
                "--rhs",
                &b,
                "--unknown",
                k,
                "--method",
                method,
            ]);
            assert_eq!(o.status.code(), Some(0));
            let x = values(&stdout(&o));
            assert_eq!(x.len(), 1);
            assert!((x[0] - want).abs() < 1e-12, "{method} {k}: {x:?}");
        }
    }
    let o = projls(&["solve", "--matrix", &a, "--rhs", &b, "--unknown", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = projls(&["solve", "--matrix", &a, "--rhs", &b, "--unknown", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(
        dir.path(),
        "a.txt",
        "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n",
    );
    let b = write(dir.path(), "b.txt", "2\n4\n-2\n");
    let out = dir.path().join("x.txt");
    let o = projls(&[
        "solve",
        "--matrix",
        &a,
        "--rhs",
        &b,
        "--ratio",
        "sum",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(values(&fs::read_to_string(out).unwrap()), vec![4.0, -2.0]);
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", "2 2\n1 0\n0\n");
    let b = write(dir.path(), "b.txt", "2\n1 1\n");
    let o = projls(&["solve", "--matrix", &a, "--rhs", &b]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let missing = dir.path().join("missing.txt");
    let o = projls(&["solve", "--matrix", missing.to_str().unwrap(), "--rhs", &b]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(projls(&["solve", "--matrix", &a]).status.code(), Some(2));
    assert_eq!(
        projls(&["bench", "--methods", "gauss"]).status.code(),
        Some(2)
    );
    assert_eq!(
        projls(&["bench", "--sizes", "40,20"]).status.code(),
        Some(2)
    );
}

#[test]
fn singular_system_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", "2 2\n1 2\n2 4\n");
    let b = write(dir.path(), "b.txt", "2\n1 2\n");
    let o = projls(&["solve", "--matrix", &a, "--rhs", &b]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn qr_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", "3 3\n2 1 1\n1 3 2\n1 0 0\n");
    let prefix = dir.path().join("f");
    let prefix = prefix.to_str().unwrap();
    let o = projls(&["qr", "--matrix", &a, "--out-prefix", prefix]);
    assert_eq!(o.status.code(), Some(0));
    let t = values(&fs::read_to_string(format!("{prefix}_t.txt")).unwrap());
    // skip the column count left over from the "3 3" header
    let t = &t[1..];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        assert!(t[3 * i + j].abs() < 1e-12, "T[{i}][{j}] = {}", t[3 * i + j]);
    }
    assert!(Path::new(&format!("{prefix}_q.txt")).exists());
    assert_eq!(
        values(&fs::read_to_string(format!("{prefix}_d.txt")).unwrap()).len(),
        3
    );
}

#[test]
fn bench_csv_is_reproducible_apart_from_time() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = projls(&[
            "bench",
            "--sizes",
            "4:8:4",
            "--trials",
            "2",
            "--seed",
            "7",
            "--csv",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("N=8"));
        fs::read_to_string(p).unwrap()
    };
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(4);
                f.join(",")
            })
            .collect()
    };
    let (first, second) = (run("a.csv"), run("b.csv"));
    assert_eq!(first.lines().count(), 1 + 2 * 2 * 5);
    assert_eq!(strip(&first), strip(&second));
}

#[test]
fn bench_seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let seed_of = |env: Option<&str>, name: &str| {
        let p = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_projls"));
        cmd.args([
            "bench",
            "--sizes",
            "3",
            "--methods",
            "proposed",
            "--csv",
            p.to_str().unwrap(),
        ]);
        cmd.env_remove("PROJLS_SEED");
        if let Some(v) = env {
            cmd.env("PROJLS_SEED", v);
        }
        assert!(cmd.output().unwrap().status.success());
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(3)
            .unwrap()
            .to_string()
    };
    assert_eq!(seed_of(Some("11"), "a.csv"), seed_of(Some("11"), "b.csv"));
    assert_ne!(seed_of(Some("11"), "c.csv"), seed_of(None, "d.csv"));
}

#[test]
fn audit_reports_pivot_count() {
    let o = projls(&["audit", "--size", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("expected=450 observed=450"));
    let o = projls(&["audit", "--size", "5", "--rows", "15"]);
    assert!(stdout(&o).contains("expected=150 observed=150"));
    assert_eq!(
        projls(&["audit", "--size", "5", "--rows", "3"])
            .status
            .code(),
        Some(2)
    );
}
