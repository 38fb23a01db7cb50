//! End-to-end runs of the `igagauge` binary on small configurations.

use std::path::PathBuf;
use std::process::Command;

fn out_path(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("igagauge-{}-{tag}", std::process::id()))
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_igagauge"))
        .args(args)
        .output()
        .unwrap()
}

fn csv(path: &PathBuf) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

/// Mantissa digits of a formatted float.
fn significant_digits(s: &str) -> usize {
    let mantissa = s.split('e').next().unwrap();
    mantissa.chars().filter(char::is_ascii_digit).count()
}

#[test]
fn kernel_table_rows_and_determinism() {
    let (a, b) = (out_path("kt-a.csv"), out_path("kt-b.csv"));
    for p in [&a, &b] {
        let o = run(&[
            "kernel-table",
            "--geometry",
            "cube-2,cube-4",
            "--degree",
            "2",
            "--elements",
            "2",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let rows = csv(&a);
    assert_eq!(rows.len(), 3);
    let col = |name: &str| rows[0].iter().position(|h| h == name).unwrap();
    let dims: Vec<[&str; 3]> = rows[1..]
        .iter()
        .map(|r| {
            [
                r[col("dim_x0")].as_str(),
                r[col("kernel_standard")].as_str(),
                r[col("kernel_enriched")].as_str(),
            ]
        })
        .collect();
    assert_eq!(dims, [["20", "20", "20"], ["50", "51", "50"]]);
    let _ = std::fs::remove_file(a);
    let _ = std::fs::remove_file(b);
}

#[test]
fn convergence_writes_floats_and_fields() {
    let (out, vtk) = (out_path("conv.csv"), out_path("conv.vtk"));
    let o = run(&[
        "convergence",
        "--geometry",
        "cube-mortar-periodic",
        "--degree",
        "2",
        "--elements",
        "2,3",
        "--out",
        out.to_str().unwrap(),
        "--fields",
        vtk.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv(&out);
    let err = rows[0].iter().position(|h| h == "error").unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows[1..] {
        assert_eq!(significant_digits(&r[err]), 12, "{}", r[err]);
        assert!(r[err].parse::<f64>().unwrap() > 0.0);
    }
    assert!(std::fs::read_to_string(&vtk)
        .unwrap()
        .starts_with("# vtk DataFile"));
    let _ = std::fs::remove_file(out);
    let _ = std::fs::remove_file(vtk);
}

#[test]
fn infsup_and_gauge_none() {
    let out = out_path("infsup.csv");
    let o = run(&[
        "infsup",
        "--geometry",
        "cube-mortar-conforming:4",
        "--degree",
        "2",
        "--refine",
        "1",
        "--multiplier",
        "enriched",
        "--gauge",
        "none",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv(&out);
    assert_eq!(rows.len(), 2);
    let beta = rows[0].iter().position(|h| h == "beta").unwrap();
    assert!(rows[1][beta].parse::<f64>().unwrap() > 0.0);
    let _ = std::fs::remove_file(out);
}

#[test]
fn rejects_bad_arguments() {
    let o = run(&[
        "eigen",
        "--geometry",
        "cube",
        "--degree",
        "2",
        "--elements",
        "2",
        "--fields",
        "x.vtk",
    ]);
    assert!(!o.status.success());
    let o = run(&["kernel-table", "--geometry", "no-such-domain"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no-such-domain"));
}
