//! End-to-end tests of the `rcap` binary: every command runs against real
//! files in a temporary directory.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rcap::lp::parse_lp;
use rcap::wire;

fn rcap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcap"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn generate_small(dir: &Path, seed: u64, out: &str) -> PathBuf {
    let run = rcap(
        dir,
        &[
            "generate",
            "--seed",
            &seed.to_string(),
            "--out",
            out,
            "--vessels",
            "2",
            "--stations",
            "3",
            "--zones",
            "5",
            "--tide-days",
            "1",
        ],
    );
    assert_ok(&run);
    dir.join(out)
}

#[test]
fn generate_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate_small(dir.path(), 1, "a.json");
    let b = generate_small(dir.path(), 1, "b.json");
    let c = generate_small(dir.path(), 2, "c.json");
    let a = std::fs::read(a).unwrap();
    let b = std::fs::read(b).unwrap();
    let c = std::fs::read(c).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn generated_file_parses_under_the_declared_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate_small(dir.path(), 3, "inst.json");
    let text = std::fs::read_to_string(path).unwrap();
    let inst = wire::instance_from_json(&text).unwrap();
    assert_eq!(inst.stations.len(), 3);
    assert_eq!(inst.zones.len(), 5);
}

#[test]
fn cluster_build_solve_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    generate_small(dir.path(), 4, "inst.json");

    let out = rcap(
        dir.path(),
        &["cluster", "--instance", "inst.json", "--k", "3", "--seed", "4", "--out", "small.json"],
    );
    assert_ok(&out);
    let reduced =
        wire::instance_from_json(&std::fs::read_to_string(dir.path().join("small.json")).unwrap())
            .unwrap();
    assert_eq!(reduced.zones.len(), 3);

    let out = rcap(
        dir.path(),
        &[
            "build",
            "--instance",
            "small.json",
            "--variant",
            "better-tidal",
            "--export-lp",
            "model.lp",
        ],
    );
    assert_ok(&out);
    let lp = parse_lp(&std::fs::read_to_string(dir.path().join("model.lp")).unwrap()).unwrap();
    assert!(!lp.binaries.is_empty());

    let out = rcap(
        dir.path(),
        &[
            "solve",
            "--instance",
            "small.json",
            "--variant",
            "best-tidal",
            "--out",
            "report.json",
        ],
    );
    assert_ok(&out);
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let alloc = wire::allocation_from_report_json(&report).unwrap();
    assert!(alloc.is_some(), "optimal solve carries an allocation");

    let out = rcap(
        dir.path(),
        &["eval", "--instance", "inst.json", "--reports", "report.json"],
    );
    assert_ok(&out);
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("label,objective,covered_objective,uncovered"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("report,"), "row: {row}");
}

#[test]
fn solve_without_out_prints_the_report() {
    let dir = tempfile::tempdir().unwrap();
    generate_small(dir.path(), 7, "inst.json");
    let out = rcap(dir.path(), &["solve", "--instance", "inst.json", "--variant", "many-zones"]);
    assert_ok(&out);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"status\": \"optimal\""), "stdout: {text}");
    assert!(text.contains("\"variant\": \"many-zones\""));
}

#[test]
fn suite_emits_reports_and_a_csv_grid() {
    let dir = tempfile::tempdir().unwrap();
    generate_small(dir.path(), 6, "inst.json");
    let out = rcap(
        dir.path(),
        &[
            "suite",
            "--instance",
            "inst.json",
            "--variants",
            "many-zones",
            "--zones",
            "3",
            "--seeds",
            "1",
            "--out-dir",
            "results",
        ],
    );
    assert_ok(&out);
    let report_path = dir.path().join("results/seed-1/many-zones-z3.report.json");
    assert!(report_path.exists(), "expected exactly one run report");
    let reports: Vec<_> = walk(&dir.path().join("results"))
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    assert_eq!(reports.len(), 1);
    let csv = std::fs::read_to_string(dir.path().join("results/suite.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2, "header plus one run: {csv}");
    assert!(lines[1].starts_with("1,many-zones,3,"));
}

#[test]
fn suite_default_grid_covers_all_variants() {
    let dir = tempfile::tempdir().unwrap();
    generate_small(dir.path(), 7, "inst.json");
    // Zone counts valid for the 5-zone fixture; the default seed list (10
    // seeds) crossed with three variants gives the full grid.
    let out = rcap(
        dir.path(),
        &[
            "suite",
            "--instance",
            "inst.json",
            "--zones",
            "2",
            "--seeds",
            "1",
            "2",
            "--out-dir",
            "grid",
        ],
    );
    assert_ok(&out);
    let csv = std::fs::read_to_string(dir.path().join("grid/suite.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 3, "2 seeds x 3 variants: {csv}");
    for variant in ["many-zones", "better-tidal", "best-tidal"] {
        assert!(lines.iter().any(|l| l.contains(variant)), "missing {variant}");
    }
}

#[test]
fn tides_derive_rebuilds_states_from_gauges() {
    let dir = tempfile::tempdir().unwrap();
    generate_small(dir.path(), 8, "inst.json");
    for (idx, lon) in [7.8, 8.4, 9.1].iter().enumerate() {
        let mut csv = format!("# unit=m lat=54.1 lon={lon}\ntimestamp,level\n");
        for minute in 0..180 {
            csv.push_str(&format!(
                "2023-11-01T{:02}:{:02}:00Z,{:.3}\n",
                minute / 60,
                minute % 60,
                1.5 * f64::sin(minute as f64 / 90.0 + lon)
            ));
        }
        std::fs::write(dir.path().join(format!("gauge{idx}.csv")), csv).unwrap();
    }
    let out = rcap(
        dir.path(),
        &[
            "tides",
            "derive",
            "--instance",
            "inst.json",
            "--gauges",
            "gauge0.csv",
            "gauge1.csv",
            "gauge2.csv",
            "--out",
            "derived.json",
        ],
    );
    assert_ok(&out);
    let derived =
        wire::instance_from_json(&std::fs::read_to_string(dir.path().join("derived.json")).unwrap())
            .unwrap();
    let total: f64 = derived.tidal.states().iter().map(|s| s.p).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn tides_fetch_downloads_gauge_csv_files() {
    use std::io::{Read, Write};
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        let body = "# unit=cm lat=54.18 lon=7.89\ntimestamp,level\n2023-11-01T00:00:00Z,125\n2023-11-01T00:01:00Z,130\n";
        let (mut stream, _) = listener.accept().unwrap();
        let mut buf = [0u8; 4096];
        let _ = stream.read(&mut buf).unwrap();
        let response = format!(
            "HTTP/1.1 200 OK\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
            body.len(),
            body
        );
        stream.write_all(response.as_bytes()).unwrap();
    });
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rcap"))
        .args([
            "tides",
            "fetch",
            "--gauge",
            "helgoland",
            "--start",
            "2023-11-01T00:00:00Z",
            "--end",
            "2023-11-01T00:05:00Z",
            "--out-dir",
            "gauges",
        ])
        .env("RCAP_GAUGE_ENDPOINT", format!("http://{addr}/tides"))
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_ok(&out);
    let csv = std::fs::read_to_string(dir.path().join("gauges/helgoland.csv")).unwrap();
    // Levels are normalized to meters on the way through.
    assert!(csv.contains("1.25"), "csv: {csv}");
    assert!(csv.contains("lat=54.18"));
}

#[test]
fn input_errors_exit_with_code_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcap(dir.path(), &["solve", "--instance", "missing.json"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    std::fs::write(dir.path().join("broken.json"), "{\"schema\": \"rcap-0\"}").unwrap();
    let out = rcap(dir.path(), &["cluster", "--instance", "broken.json", "--k", "1", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(4));
}

fn walk(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out
}
