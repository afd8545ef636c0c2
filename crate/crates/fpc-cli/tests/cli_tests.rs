//! End-to-end runs of the `fpc` binary: golden outputs, the documented
//! exit-code table, file round trips, and seed determinism.

use fpc::codes::{
    all_subsets, decode, encode, read_manifest, worker_compute, CodeInstance, CodeParams, Scheme,
    Verified, WorkerResult,
};
use fpc::error::Error;
use fpc::field::FieldSpec;
use fpc::linalg::{matmul, matrix_to_bytes, read_matrix, write_matrix, DenseMatrix};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", text(&out.stderr));
    text(&out.stdout)
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Asserts the failure contract: the given exit code plus a machine-readable
/// `error-class:` line on stderr.
fn assert_failure(out: &Output, code: i32, class: &str) {
    let err = text(&out.stderr);
    assert_eq!(exit_code(out), code, "stderr: {err}");
    assert!(
        err.lines().any(|l| l == format!("error-class: {class}")),
        "missing class {class} in: {err}"
    );
}

fn path_str(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gen_matrix(dir: &TempDir, name: &str, field: &str, rows: u32, cols: u32, seed: u32) -> PathBuf {
    let out = dir.path().join(name);
    let rows = rows.to_string();
    let cols = cols.to_string();
    let seed = seed.to_string();
    let status = run(&[
        "gen-matrix",
        "--rows",
        &rows,
        "--cols",
        &cols,
        "--dist",
        "integers",
        "--field",
        field,
        "--seed",
        &seed,
        "--out",
        path_str(&out),
    ]);
    assert_eq!(exit_code(&status), 0, "{}", text(&status.stderr));
    out
}

#[test]
fn threshold_prints_frozen_values() {
    let cases = [
        (["threshold", "--scheme", "fpc", "--m", "1", "--p", "8"], "8\n"),
        (["threshold", "--scheme", "matdot", "--m", "1", "--p", "8"], "15\n"),
        (["threshold", "--scheme", "ep", "--m", "2", "--p", "2"], "9\n"),
    ];
    for (args, want) in cases {
        assert_eq!(stdout_of(&run(&args)), want);
    }
}

#[test]
fn dims_prints_both_spans() {
    let out = run(&["dims", "--m", "2", "--p", "2"]);
    assert_eq!(stdout_of(&out), "plus 4\nminus 3\n");
    let out = run(&["dims", "--m", "2", "--p", "2", "--characteristic", "2"]);
    assert_eq!(stdout_of(&out), "plus 3\nminus 3\n");
}

#[test]
fn chains_prints_the_decomposition() {
    let out = run(&["chains", "--m", "2", "--p", "2"]);
    let want = "loops 1\n\
                loop (0,1): (1,0,1)\n\
                special (0,1)\n\
                chains 1\n\
                chain t=1: (0,0,1) (0,1,1) (1,1,1)\n\
                covered 4 of 4\n";
    assert_eq!(stdout_of(&out), want);
}

#[test]
fn gen_matrix_is_seed_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = gen_matrix(&dir, "a.mat", "prime:101", 6, 8, 5);
    let b = gen_matrix(&dir, "b.mat", "prime:101", 6, 8, 5);
    let c = gen_matrix(&dir, "c.mat", "prime:101", 6, 8, 6);
    let bytes_a = std::fs::read(&a).unwrap();
    assert_eq!(bytes_a, std::fs::read(&b).unwrap());
    assert_ne!(bytes_a, std::fs::read(&c).unwrap());
}

#[test]
fn gaussian_entries_require_real64() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("g.mat");
    let out = run(&[
        "gen-matrix",
        "--rows",
        "4",
        "--cols",
        "4",
        "--dist",
        "gaussian",
        "--field",
        "prime:101",
        "--out",
        path_str(&out_path),
    ]);
    assert_failure(&out, 1, "InvalidParams");
}

#[test]
fn generate_multiply_round_trip_is_exact_and_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = gen_matrix(&dir, "in.mat", "prime:101", 8, 8, 3);
    let out1 = dir.path().join("out1.mat");
    let out2 = dir.path().join("out2.mat");
    let report1 = dir.path().join("r1.csv");
    let report2 = dir.path().join("r2.csv");
    for (out, report) in [(&out1, &report1), (&out2, &report2)] {
        let status = run(&[
            "multiply",
            "--input",
            path_str(&input),
            "--m",
            "2",
            "--p",
            "2",
            "--workers",
            "9",
            "--stragglers",
            "1",
            "--out",
            path_str(out),
            "--report",
            path_str(report),
        ]);
        assert_eq!(exit_code(&status), 0, "{}", text(&status.stderr));
    }
    assert_eq!(
        std::fs::read(&out1).unwrap(),
        std::fs::read(&out2).unwrap(),
        "same seed, same bytes"
    );
    assert_eq!(
        std::fs::read(&report1).unwrap(),
        std::fs::read(&report2).unwrap()
    );

    let a = read_matrix(&input).unwrap();
    let oracle = matmul(&a, &a.transpose()).unwrap();
    let decoded = read_matrix(&out1).unwrap();
    assert_eq!(
        matrix_to_bytes(&decoded),
        matrix_to_bytes(&oracle),
        "byte-identical product"
    );

    let report = std::fs::read_to_string(&report1).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next(), Some(fpc::sim::CSV_HEADER));
    assert_eq!(lines.count(), 1, "one data row");
}

#[test]
fn worked_example_through_the_cli() {
    let dir = TempDir::new().unwrap();
    let spec = FieldSpec::rational();
    let input = dir.path().join("ex.mat");
    let a = DenseMatrix::from_i64_rows(spec, &[&[1, 2], &[3, 4]]);
    write_matrix(&input, &a).unwrap();
    let out = dir.path().join("ex_out.mat");
    let status = run(&[
        "multiply",
        "--input",
        path_str(&input),
        "--scheme",
        "fpc",
        "--m",
        "1",
        "--p",
        "2",
        "--workers",
        "4",
        "--stragglers",
        "2",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(exit_code(&status), 0, "{}", text(&status.stderr));
    let want = DenseMatrix::from_i64_rows(spec, &[&[5, 11], &[11, 25]]);
    assert_eq!(read_matrix(&out).unwrap(), want);
}

#[test]
fn missing_input_exits_2() {
    let out = run(&[
        "multiply", "--input", "/nonexistent/in.mat", "--m", "1", "--p", "2", "--workers", "3",
        "--out", "/nonexistent/out.mat",
    ]);
    assert_failure(&out, 2, "Io");
}

#[test]
fn garbage_matrix_file_exits_2() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("junk.mat");
    std::fs::write(&input, b"this is not a matrix").unwrap();
    let out_path = dir.path().join("out.mat");
    let out = run(&[
        "multiply",
        "--input",
        path_str(&input),
        "--m",
        "1",
        "--p",
        "2",
        "--workers",
        "3",
        "--out",
        path_str(&out_path),
    ]);
    assert_failure(&out, 2, "MalformedMatrixFile");
}

#[test]
fn indivisible_shape_exits_3_unless_padded() {
    let dir = TempDir::new().unwrap();
    let input = gen_matrix(&dir, "odd.mat", "prime:101", 6, 7, 2);
    let out_path = dir.path().join("out.mat");
    let base = [
        "multiply",
        "--input",
        path_str(&input),
        "--m",
        "2",
        "--p",
        "2",
        "--workers",
        "8",
        "--out",
        path_str(&out_path),
    ];
    assert_failure(&run(&base), 3, "IndivisibleShape");

    // Zero columns change nothing in A * A^T, so padding must recover the
    // unpadded 6x6 product.
    let mut padded = base.to_vec();
    padded.push("--pad-cols");
    assert_eq!(exit_code(&run(&padded)), 0);
    let a = read_matrix(&input).unwrap();
    assert_eq!(
        read_matrix(&out_path).unwrap(),
        matmul(&a, &a.transpose()).unwrap()
    );
}

#[test]
fn fail_stop_overload_exits_4() {
    let dir = TempDir::new().unwrap();
    let input = gen_matrix(&dir, "in.mat", "prime:101", 4, 4, 1);
    let out_path = dir.path().join("out.mat");
    let out = run(&[
        "multiply",
        "--input",
        path_str(&input),
        "--m",
        "1",
        "--p",
        "2",
        "--workers",
        "4",
        "--stragglers",
        "3",
        "--slowdown",
        "inf",
        "--out",
        path_str(&out_path),
    ]);
    assert_failure(&out, 4, "StragglerOverload");
}

#[test]
fn field_mismatch_exits_1() {
    let dir = TempDir::new().unwrap();
    let input = gen_matrix(&dir, "bits.mat", "gf2:8", 4, 4, 1);
    let out_path = dir.path().join("out.mat");
    let out = run(&[
        "multiply",
        "--input",
        path_str(&input),
        "--field",
        "prime:101",
        "--m",
        "1",
        "--p",
        "2",
        "--workers",
        "3",
        "--out",
        path_str(&out_path),
    ]);
    assert_failure(&out, 1, "InvalidParams");
}

#[test]
fn verify_points_emits_a_readable_manifest() {
    let dir = TempDir::new().unwrap();
    let manifest = dir.path().join("inst.txt");
    let args = [
        "verify-points",
        "--scheme",
        "fpc",
        "--m",
        "2",
        "--p",
        "2",
        "--workers",
        "8",
        "--field",
        "prime:101",
        "--out",
        path_str(&manifest),
    ];
    assert_eq!(exit_code(&run(&args)), 0);
    let text = std::fs::read_to_string(&manifest).unwrap();
    let instance = read_manifest(&text).unwrap();
    assert_eq!(instance.params.m, 2);
    assert_eq!(instance.params.n, 8);
    assert_eq!(instance.points.len(), 8);

    // Without --out the manifest goes to stdout instead.
    let piped = stdout_of(&run(&args[..args.len() - 2]));
    assert!(read_manifest(&piped).is_ok());
}

#[test]
fn manifest_parameter_mismatch_exits_1() {
    let dir = TempDir::new().unwrap();
    let manifest = dir.path().join("inst.txt");
    let status = run(&[
        "verify-points",
        "--m",
        "2",
        "--p",
        "2",
        "--workers",
        "8",
        "--field",
        "prime:101",
        "--out",
        path_str(&manifest),
    ]);
    assert_eq!(exit_code(&status), 0);
    let input = gen_matrix(&dir, "in.mat", "prime:101", 4, 4, 1);
    let out_path = dir.path().join("out.mat");
    let out = run(&[
        "multiply",
        "--input",
        path_str(&input),
        "--m",
        "1",
        "--p",
        "2",
        "--workers",
        "8",
        "--manifest",
        path_str(&manifest),
        "--out",
        path_str(&out_path),
    ]);
    assert_failure(&out, 1, "InvalidParams");
}

/// Smallest prime field whose nonzero points contain a 7-subset on which
/// the (2, 2) decode systems are singular, found by exhaustive search and
/// then frozen into a handwritten manifest.
fn singular_instance() -> Option<(u64, Vec<usize>)> {
    for q in [11u64, 13, 17, 19, 23] {
        let spec = FieldSpec::prime(q).unwrap();
        let params = CodeParams::new(Scheme::Fpc, 2, 2, 7, spec).unwrap();
        let a = DenseMatrix::from_i64_rows(
            spec,
            &[&[1, 2, 0, 3], &[4, 1, 5, 2], &[0, 1, 1, 6], &[2, 0, 3, 1]],
        );
        for subset in all_subsets((q - 1) as usize, 7) {
            let points: Vec<_> = subset.iter().map(|&i| spec.from_u64(i as u64 + 1)).collect();
            let instance = CodeInstance {
                params,
                points,
                verified: Verified::Lazy,
            };
            let results: Vec<WorkerResult> = encode(&a, &instance)
                .unwrap()
                .iter()
                .map(|t| worker_compute(t).unwrap())
                .collect();
            if matches!(
                decode(&results, &instance),
                Err(Error::SingularRecoverySubset)
            ) {
                return Some((q, subset.iter().map(|&i| i + 1).collect()));
            }
        }
    }
    None
}

#[test]
fn singular_recovery_subset_exits_5() {
    let (q, points) = singular_instance().expect("small field with a singular 7-subset");
    let dir = TempDir::new().unwrap();
    let manifest_path = dir.path().join("singular.txt");
    let point_line = points
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    let manifest = format!(
        "fpc-instance v1\nscheme fpc\nm 2\np 2\nworkers 7\nfield prime:{q}\n\
         verified lazy\nthreshold 7\npoints {point_line}\n"
    );
    std::fs::write(&manifest_path, manifest).unwrap();
    let input = gen_matrix(&dir, "in.mat", &format!("prime:{q}"), 4, 4, 4);
    let out_path = dir.path().join("out.mat");
    let out = run(&[
        "multiply",
        "--input",
        path_str(&input),
        "--m",
        "2",
        "--p",
        "2",
        "--workers",
        "7",
        "--manifest",
        path_str(&manifest_path),
        "--out",
        path_str(&out_path),
    ]);
    assert_failure(&out, 5, "SingularRecoverySubset");
}

#[test]
fn sweep_emits_header_and_rows() {
    let dir = TempDir::new().unwrap();
    let input = gen_matrix(&dir, "in.mat", "prime:101", 4, 4, 9);
    let out = run(&[
        "sweep",
        "--input",
        path_str(&input),
        "--m",
        "1",
        "--p",
        "2",
        "--workers",
        "5",
        "--s-max",
        "2",
    ]);
    let stdout = stdout_of(&out);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some(fpc::sim::CSV_HEADER));
    // Three straggler counts, three schemes each.
    assert_eq!(lines.clone().count(), 9);
    for line in lines {
        assert_eq!(line.split(',').count(), 13);
    }
}

#[test]
fn cond_emits_header_and_rows() {
    let out = run(&[
        "cond", "--p-min", "2", "--p-max", "4", "--trials", "3", "--s", "1",
    ]);
    let stdout = stdout_of(&out);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some(fpc::sim::CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for (row, p) in rows.iter().zip(2..) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], "fpc");
        assert_eq!(fields[2], p.to_string());
        assert!(fields[11].parse::<f64>().unwrap().is_finite());
    }
}

#[test]
fn help_and_version_exit_0() {
    let help = run(&["--help"]);
    assert_eq!(exit_code(&help), 0);
    assert!(text(&help.stdout).contains("multiply"));
    let version = run(&["--version"]);
    assert_eq!(exit_code(&version), 0);
    assert!(text(&version.stdout).starts_with("fpc"));
    let unknown = run(&["no-such-command"]);
    assert_eq!(exit_code(&unknown), 1);
}
