mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{sample_images, sample_paths};
use qivif::imgcodec::{read_rgb, write_png, RasterImage};
use qivif::metrics::luma;

fn qivif(args: &[&str], extra: &[&Path]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qivif"));
    cmd.args(args);
    for p in extra {
        cmd.arg(p);
    }
    cmd.output().expect("spawn qivif")
}

fn run(args: Vec<std::ffi::OsString>) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qivif")).args(args).output().expect("spawn qivif")
}

fn os(parts: &[&dyn AsRef<std::ffi::OsStr>]) -> Vec<std::ffi::OsString> {
    parts.iter().map(|p| p.as_ref().to_os_string()).collect()
}

#[test]
fn fuse_writes_png_and_metrics() {
    let (vis, ir) = sample_paths();
    let dir = tempfile::tempdir().unwrap();
    let out = run(os(&[&"fuse", &"--vis", &vis, &"--ir", &ir, &"--out", &dir.path(), &"--metrics", &"--dump-intermediates"]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fused = read_rgb(dir.path().join("fused.png")).unwrap();
    assert_eq!((fused.height(), fused.width()), (64, 64));
    let csv = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert!(csv.starts_with("image_id,sd,sf,ag,mi,en,qabf\n"));
    for name in ["vis_lighting.png", "ir_glow.png", "ir_structure.png", "vis_detail.png", "enhanced.png", "qhbf_trace.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn missing_input_exits_3_and_names_path() {
    let (vis, _) = sample_paths();
    let dir = tempfile::tempdir().unwrap();
    let ghost = dir.path().join("nowhere.png");
    let out = run(os(&[&"fuse", &"--vis", &vis, &"--ir", &ghost, &"--out", &dir.path()]));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.png"));
}

#[test]
fn dimension_mismatch_exits_3() {
    let (vis, _) = sample_paths();
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("small.png");
    write_png(&RasterImage::new(8, 8, 1, vec![100; 64]).unwrap(), &small).unwrap();
    let out = run(os(&[&"fuse", &"--vis", &vis, &"--ir", &small, &"--out", &dir.path()]));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn invalid_config_exits_4() {
    let (vis, ir) = sample_paths();
    let dir = tempfile::tempdir().unwrap();
    let out = run(os(&[&"--set", &"visible.qlrd.p=1.25", &"fuse", &"--vis", &vis, &"--ir", &ir, &"--out", &dir.path()]));
    assert_eq!(out.status.code(), Some(4));
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[qhbf]\nunknown = 1\n").unwrap();
    let out = run(os(&[&"--config", &cfg, &"--print-config"]));
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn print_config_round_trips() {
    let out = qivif(&["--print-config", "--set", "qhbf.w1=0.25"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let cfg = qivif::config::PipelineConfig::resolve(Some(&text), &[]).unwrap();
    assert_eq!(cfg.qhbf.w1, 0.25);
}

#[test]
fn unwritable_output_exits_2() {
    let (vis, ir) = sample_paths();
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = run(os(&[&"fuse", &"--vis", &vis, &"--ir", &ir, &"--out", &blocker.join("sub")]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (vis, ir) = sample_paths();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = run(os(&[&"fuse", &"--vis", &vis, &"--ir", &ir, &"--out", &d.path()]));
        assert!(out.status.success());
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("fused.png")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn identical_gray_pair_tracks_enhanced_visible() {
    let (_, ir) = sample_paths();
    let dir = tempfile::tempdir().unwrap();
    let out = run(os(&[&"fuse", &"--vis", &ir, &"--ir", &ir, &"--out", &dir.path(), &"--dump-intermediates"]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fused = luma(&read_rgb(dir.path().join("fused.png")).unwrap());
    let enhanced = luma(&read_rgb(dir.path().join("enhanced.png")).unwrap());
    let close = fused
        .data
        .iter()
        .zip(&enhanced.data)
        .filter(|(a, b)| (**a as i32 - **b as i32).abs() <= 2)
        .count();
    let frac = close as f64 / fused.data.len() as f64;
    assert!(frac >= 0.99, "{frac:.4}");
}

#[test]
fn batch_with_empty_manifest_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("empty.tsv");
    std::fs::write(&manifest, "# nothing yet\n").unwrap();
    let out = run(os(&[&"batch", &"--manifest", &manifest, &"--out", &dir.path().join("o")]));
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("o/metrics.csv")).unwrap();
    assert_eq!(csv, "image_id,sd,sf,ag,mi,en,qabf\n");
}

#[test]
fn batch_mean_row_matches_rows_and_failures_exit_1() {
    let (vis, ir) = sample_paths();
    let (vi, ii) = sample_images();
    let dir = tempfile::tempdir().unwrap();
    write_png(&vi.transpose(), dir.path().join("v2.png")).unwrap();
    write_png(&ii.transpose(), dir.path().join("i2.png")).unwrap();
    let manifest = dir.path().join("m.tsv");
    std::fs::write(
        &manifest,
        format!("{}\t{}\nv2.png\ti2.png\nmissing.png\ti2.png\n", vis.display(), ir.display()),
    )
    .unwrap();
    let out = run(os(&[&"batch", &"--manifest", &manifest, &"--out", &dir.path().join("o")]));
    assert_eq!(out.status.code(), Some(1));
    let csv = std::fs::read_to_string(dir.path().join("o/metrics.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2][0], "mean");
    for k in 1..7 {
        let a: f64 = rows[0][k].parse().unwrap();
        let b: f64 = rows[1][k].parse().unwrap();
        let m: f64 = rows[2][k].parse().unwrap();
        assert!((0.5 * (a + b) - m).abs() <= 1e-6 + 1e-9, "column {k}");
    }
    assert!(dir.path().join("o/0001_vis_glow_fused.png").exists());
}
