use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ku::mm;
use ku_core::{DenseMatrix, C64};

fn ku(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ku"))
        .args(args)
        .current_dir(dir)
        .env_remove("KU_NUM_SAMPLES_ETA")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, m: &DenseMatrix) -> String {
    let p = dir.join(name);
    mm::write(&p, m).unwrap();
    p.display().to_string()
}

/// Checks the header and that every number carries 16 significant digits.
fn assert_well_formed(csv: &str, header: &str) -> usize {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(header));
    let mut rows = 0;
    let mut last = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 4, "{line}");
        let m = fields[0].parse::<usize>().unwrap();
        assert!(m > last, "{line}");
        last = m;
        for f in &fields[1..] {
            if f.is_empty() {
                continue;
            }
            let (mantissa, _) = f.split_once('e').expect("scientific notation");
            let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
            assert_eq!(digits, 16, "{f}");
            f.parse::<f64>().unwrap();
        }
        rows += 1;
    }
    rows
}

fn diag_problem(dir: &Path, b_scale: f64) -> (String, String) {
    let n = 30usize;
    let vals: Vec<f64> = (0..n).map(|i| 0.05 * 1.3f64.powi(i as i32)).collect();
    let a = DenseMatrix::real_diag(&vals);
    let b = DenseMatrix::from_fn(n, 1, |i, _| C64::new(b_scale / (1.0 + i as f64), 0.0));
    (write(dir, "a.mtx", &a), write(dir, "b.mtx", &b))
}

#[test]
fn custom_zero_update() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = diag_problem(dir.path(), 0.0);
    let o = ku(
        &[
            "--experiment",
            "custom",
            "--matrix-a",
            &a,
            "--matrix-b",
            &b,
            "--out",
            "z.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        stdout(&o).trim(),
        "converged=true iterations=1 final_error=0.000000000000000e0"
    );
    let csv = fs::read_to_string(dir.path().join("z.csv")).unwrap();
    assert_eq!(
        assert_well_formed(&csv, "m,error_true,error_estimate,bound"),
        1
    );
    assert!(csv
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("1,0.000000000000000e0,0.000000000000000e0,"));
}

#[test]
fn custom_hermitian_with_bounds_and_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = diag_problem(dir.path(), 1.0);
    let o = ku(
        &[
            "--experiment",
            "custom",
            "--matrix-a",
            &a,
            "--matrix-b",
            &b,
            "--poles",
            "quasi:6",
            "--function",
            "invsqrt",
            "--tol",
            "1e-9",
            "--m-max",
            "40",
            "--out",
            "h.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("converged=true"), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("h.csv")).unwrap();
    let rows = assert_well_formed(&csv, "m,error_true,error_estimate,bound");
    assert!(rows < 40);
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (e, bound) = (f[1].parse::<f64>().unwrap(), f[3].parse::<f64>().unwrap());
        assert!(e <= bound, "{line}");
    }
}

#[test]
fn custom_pole_file_and_general_update() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = diag_problem(dir.path(), 1.0);
    let c = write(
        dir.path(),
        "c.mtx",
        &DenseMatrix::from_fn(30, 1, |i, _| C64::new(((i * 7) % 5) as f64 - 2.0, 0.5)),
    );
    fs::write(dir.path().join("poles.txt"), "# two poles\n-1\ninf\n").unwrap();
    let o = ku(
        &[
            "--experiment",
            "custom",
            "--matrix-a",
            &a,
            "--matrix-b",
            &b,
            "--matrix-c",
            &c,
            "--poles",
            "poles.txt",
            "--function",
            "exp",
            "--m-max",
            "15",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("custom.csv")).unwrap();
    assert_eq!(
        assert_well_formed(&csv, "m,error_true,error_estimate,bound"),
        15
    );
    assert!(
        csv.lines().skip(1).all(|l| l.ends_with(',')),
        "no bound for a general update"
    );
}

#[test]
fn nonconvergence_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = diag_problem(dir.path(), 1.0);
    let o = ku(
        &[
            "--experiment",
            "custom",
            "--matrix-a",
            &a,
            "--matrix-b",
            &b,
            "--m-max",
            "3",
            "--tol",
            "1e-14",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("converged=false iterations=3 final_error="));
}

#[test]
fn synthetic_runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--experiment",
        "fig2-invsqrt-quasiopt",
        "--n",
        "60",
        "--m-max",
        "20",
        "--seed",
        "7",
    ];
    let first = ku(&[&args[..], &["--out", "one.csv"]].concat(), dir.path());
    let second = ku(&[&args[..], &["--out", "two.csv"]].concat(), dir.path());
    assert!(first.status.success() && second.status.success());
    assert_eq!(stdout(&first), stdout(&second));
    let one = fs::read(dir.path().join("one.csv")).unwrap();
    assert_eq!(one, fs::read(dir.path().join("two.csv")).unwrap());
    assert_eq!(
        assert_well_formed(
            &String::from_utf8(one).unwrap(),
            "m,error_true,error_estimate,bound"
        ),
        20
    );
    let other = ku(
        &[
            "--experiment",
            "fig2-invsqrt-quasiopt",
            "--n",
            "60",
            "--m-max",
            "20",
            "--seed",
            "8",
            "--out",
            "three.csv",
        ],
        dir.path(),
    );
    assert!(other.status.success());
    assert_ne!(
        fs::read(dir.path().join("one.csv")).unwrap(),
        fs::read(dir.path().join("three.csv")).unwrap()
    );
}

#[test]
fn fig3_writes_one_file_per_variant() {
    let dir = tempfile::tempdir().unwrap();
    let o = ku(
        &[
            "--experiment",
            "fig3-sign",
            "--n",
            "40",
            "--m-max",
            "6",
            "--out",
            "s.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 4);
    for label in ["alg3_deg2", "alg3_deg10", "alg4_deg2", "alg4_deg10"] {
        let csv = fs::read_to_string(dir.path().join(format!("s_{label}.csv"))).unwrap();
        assert_eq!(
            assert_well_formed(&csv, "m,error_true,error_estimate,bound"),
            6,
            "{label}"
        );
    }
}

#[test]
fn sylvester_scalar_instance() {
    let dir = tempfile::tempdir().unwrap();
    let m = |x: f64| DenseMatrix::real_diag(&[x]);
    let a1 = write(dir.path(), "a1.mtx", &m(2.0));
    let a2 = write(dir.path(), "a2.mtx", &m(-1.0));
    let b1 = write(dir.path(), "b1.mtx", &m(1.0));
    let c2 = write(dir.path(), "c2.mtx", &m(1.0));
    let o = ku(
        &[
            "--experiment",
            "sylvester",
            "--matrix-a",
            &a1,
            "--matrix-a2",
            &a2,
            "--matrix-b",
            &b1,
            "--matrix-c",
            &c2,
            "--out",
            "z.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("converged=true"));
    let left = mm::read(&dir.path().join("z_left.mtx")).unwrap();
    let right = mm::read(&dir.path().join("z_right.mtx")).unwrap();
    let z = left.mul_adjoint(&right);
    assert!((z[(0, 0)] - C64::new(-1.0 / 3.0, 0.0)).norm() < 1e-15);
    let csv = fs::read_to_string(dir.path().join("z.csv")).unwrap();
    assert!(csv.starts_with("m,residual,estimate,galerkin\n1,"));
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = diag_problem(dir.path(), 1.0);
    let missing = ku(&["--experiment", "custom", "--matrix-b", &b], dir.path());
    assert_eq!(missing.status.code(), Some(2));
    let unreadable = ku(
        &[
            "--experiment",
            "custom",
            "--matrix-a",
            "nope.mtx",
            "--matrix-b",
            &b,
        ],
        dir.path(),
    );
    assert_eq!(unreadable.status.code(), Some(3));
    fs::write(
        dir.path().join("bad.mtx"),
        "%%MatrixMarket matrix array real general\n2 2\n1\n",
    )
    .unwrap();
    let malformed = ku(
        &[
            "--experiment",
            "custom",
            "--matrix-a",
            "bad.mtx",
            "--matrix-b",
            &b,
        ],
        dir.path(),
    );
    assert_eq!(malformed.status.code(), Some(3));
    let strategy = ku(
        &[
            "--experiment",
            "custom",
            "--matrix-a",
            &a,
            "--matrix-b",
            &b,
            "--poles",
            "quasi:0",
        ],
        dir.path(),
    );
    assert_eq!(strategy.status.code(), Some(2));
    let pole_file = ku(
        &[
            "--experiment",
            "custom",
            "--matrix-a",
            &a,
            "--matrix-b",
            &b,
            "--poles",
            "absent.txt",
        ],
        dir.path(),
    );
    assert_eq!(pole_file.status.code(), Some(3));
    let c = write(dir.path(), "c.mtx", &DenseMatrix::unit(30, 3));
    let breakdown = ku(
        &[
            "--experiment",
            "custom",
            "--matrix-a",
            &a,
            "--matrix-b",
            &b,
            "--matrix-c",
            &c,
            "--function",
            "exp",
        ],
        dir.path(),
    );
    assert_eq!(breakdown.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&breakdown.stderr).contains("rank deficient"));
    let function = ku(
        &[
            "--experiment",
            "custom",
            "--matrix-a",
            &a,
            "--matrix-b",
            &b,
            "--function",
            "cosh",
        ],
        dir.path(),
    );
    assert_eq!(function.status.code(), Some(2));
    let experiment = ku(&["--experiment", "fig9"], dir.path());
    assert_eq!(experiment.status.code(), Some(2));
    let samples = Command::new(env!("CARGO_BIN_EXE_ku"))
        .args([
            "--experiment",
            "fig2-invsqrt-quasiopt",
            "--n",
            "20",
            "--m-max",
            "4",
        ])
        .current_dir(dir.path())
        .env("KU_NUM_SAMPLES_ETA", "0")
        .output()
        .unwrap();
    assert_eq!(samples.status.code(), Some(2));
}

#[test]
fn eta_sample_override_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let run = |samples: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_ku"))
            .args([
                "--experiment",
                "fig2-invsqrt-quasiopt",
                "--n",
                "40",
                "--m-max",
                "12",
                "--out",
                out,
            ])
            .current_dir(dir.path())
            .env("KU_NUM_SAMPLES_ETA", samples)
            .output()
            .unwrap()
    };
    assert!(run("64", "coarse.csv").status.success());
    assert!(run("4096", "fine.csv").status.success());
    let bounds = |name: &str| -> Vec<String> {
        fs::read_to_string(dir.path().join(name))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().to_string())
            .collect()
    };
    assert_ne!(bounds("coarse.csv"), bounds("fine.csv"));
}
