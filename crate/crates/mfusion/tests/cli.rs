use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mfusion::pnm::{load_pnm, save_pnm};
use mfusion_core::Image;

fn mfusion(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfusion")).current_dir(dir).args(args).output().expect("spawn mfusion")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn synth_fuse_metrics_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = mfusion(
        d,
        &[
            "synth", "--chart", "96x128", "--seed", "5", "--mask", "hhalf", "--sigma", "2", "--out-a", "a.pgm",
            "--out-b", "b.pgm", "--out-gt", "gt.pgm",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 3);
    assert_eq!(load_pnm(&d.join("a.pgm")).unwrap().dims(), (96, 128));

    for method in ["wavelet", "sf", "wavelet-sf", "contourlet-sf"] {
        let out = format!("{method}.pgm");
        let o = mfusion(d, &["fuse", "-m", method, "a.pgm", "b.pgm", "-o", &out]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).starts_with(&format!("wrote {out}")));
        assert_eq!(load_pnm(&d.join(&out)).unwrap().dims(), (96, 128));
    }

    let o = mfusion(
        d,
        &["metrics", "--inputs", "a.pgm", "b.pgm", "--fused", "sf.pgm", "--ground-truth", "gt.pgm", "--csv", "m.csv"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("rmse1="));
    let csv = fs::read_to_string(d.join("m.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "rmse1,rmse2,rmse,rmse_gt,sf_a,sf_b,sf_f");
    assert_eq!(lines.len(), 2);
    assert!(!csv.contains('\r'));
    let v: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
    assert!((v[2] - (v[0] + v[1]) / 2.0).abs() <= 1e-5 * v[2].max(1.0));
}

#[test]
fn fuse_options_and_granularity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(mfusion(
        d,
        &["synth", "--chart", "64x64", "--mask", "disk", "--sigma", "1.5", "--out-a", "a.pgm", "--out-b", "b.pgm"]
    )
    .status
    .success());
    let o = mfusion(
        d,
        &[
            "fuse",
            "-m",
            "contourlet-sf",
            "-b",
            "4x8",
            "-t",
            "0",
            "--lp-levels",
            "2",
            "--dfb-depths",
            "2,3",
            "--granularity",
            "subband",
            "a.pgm",
            "b.pgm",
            "-o",
            "f.pgm",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("12 decisions"), "{}", stdout(&o));
}

#[test]
fn unknown_method_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = mfusion(dir.path(), &["fuse", "-m", "bogus", "a.pgm", "b.pgm", "-o", "f.pgm"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("wavelet-sf") && err.contains("contourlet-sf"), "{err}");
}

#[test]
fn exit_codes_by_failure_kind() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    save_pnm(&Image::filled(16, 16, 10.0), &d.join("a.pgm")).unwrap();
    save_pnm(&Image::filled(16, 24, 10.0), &d.join("wide.pgm")).unwrap();
    fs::write(d.join("short.pgm"), b"P5 4 4 255\n\x00\x01").unwrap();

    assert_eq!(mfusion(d, &["fuse", "-m", "sf", "a.pgm", "missing.pgm", "-o", "f.pgm"]).status.code(), Some(2));
    let o = mfusion(d, &["fuse", "-m", "sf", "a.pgm", "short.pgm", "-o", "f.pgm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("byte"), "{}", stderr(&o));
    assert_eq!(mfusion(d, &["fuse", "-m", "sf", "a.pgm", "wide.pgm", "-o", "f.pgm"]).status.code(), Some(3));
    assert_eq!(mfusion(d, &["fuse", "-m", "sf", "-b", "0", "a.pgm", "a.pgm", "-o", "f.pgm"]).status.code(), Some(1));
    assert_eq!(
        mfusion(
            d,
            &["synth", "--chart", "32x32", "--mask", "vhalf", "--sigma", "2", "--out-a", "x.pgm", "--out-b", "y.pgm"]
        )
        .status
        .code(),
        Some(3)
    );
    assert_eq!(mfusion(d, &["fuse", "-m", "sf", "a.pgm", "a.pgm", "-o", "no/such/dir/f.pgm"]).status.code(), Some(2));
    assert!(!d.join("f.pgm").exists());
}

#[test]
fn bench_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let o = mfusion(dir.path(), &["bench", "--chart", "128x128", "--seed", "42", "--sigma", "2", "--csv", "t.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "method,rmse1,rmse2,rmse,rmse_gt");
    let methods: Vec<_> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(methods, ["wavelet", "sf", "wavelet-sf", "contourlet-sf"]);
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
}

#[test]
fn bench_from_ground_truth_file_matches_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(mfusion(
        d,
        &[
            "synth", "--chart", "64x96", "--seed", "2", "--mask", "vhalf", "--sigma", "1", "--out-a", "a0.pgm",
            "--out-b", "b0.pgm", "--out-gt", "g.pgm"
        ]
    )
    .status
    .success());
    let o = mfusion(d, &["bench", "--gt", "g.pgm", "--sigma", "2", "--csv", "t.csv", "--out-dir", "out"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(d.join("t.csv")).unwrap();
    let row = csv.lines().find(|l| l.starts_with("sf,")).unwrap();
    let o = mfusion(
        d,
        &[
            "metrics",
            "--inputs",
            "out/a.pgm",
            "out/b.pgm",
            "--fused",
            "out/sf.pgm",
            "--ground-truth",
            "out/gt.pgm",
            "--csv",
            "m.csv",
        ],
    );
    assert!(o.status.success());
    let m = fs::read_to_string(d.join("m.csv")).unwrap();
    let mrow: Vec<_> = m.lines().nth(1).unwrap().split(',').take(4).collect();
    assert_eq!(row.split(',').skip(1).collect::<Vec<_>>(), mrow);
}

#[test]
fn selfcheck_reports_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = mfusion(dir.path(), &["selfcheck", "--size", "64x48", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS ")).count(), 7, "{out}");
    assert!(!out.contains("FAIL"));
}
