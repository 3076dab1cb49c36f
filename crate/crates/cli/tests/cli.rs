use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arsc_cli::pgm;
use arsc_core::pipeline::{reference_image, GrayImage};

fn arsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arsc"))
        .args(args)
        .output()
        .expect("spawn arsc")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bundled_reference_matches_generator() {
    let img = pgm::read(&data("assets/reference.pgm")).unwrap();
    assert_eq!(img, reference_image());
}

#[test]
fn constant_image_is_reproduced() {
    let dir = tempfile::tempdir().unwrap();
    // levels the DC-chain oracle in arsc-core shows to be exact at 10 bits
    for level in [0u8, 255] {
        let input = dir.path().join("flat.pgm");
        let out = dir.path().join("out.pgm");
        pgm::write(&input, &GrayImage::filled(64, 64, level)).unwrap();
        let o = arsc(&["compress", "--in", s(&input), "--out", s(&out), "--bits", "10", "--mask", "allpass"]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("psnr_db inf"), "{}", stdout(&o));
        assert_eq!(pgm::read(&out).unwrap(), GrayImage::filled(64, 64, level));
    }
}

#[test]
fn reference_psnr_drops_with_bit_width() {
    let dir = tempfile::tempdir().unwrap();
    let psnr = |bits: &str| -> f64 {
        let out = dir.path().join(format!("out{bits}.pgm"));
        let o = arsc(&["compress", "--in", s(&data("assets/reference.pgm")), "--out", s(&out), "--bits", bits]);
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
            .lines()
            .find_map(|l| l.strip_prefix("psnr_db "))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(psnr("10") > psnr("6"));
}

#[test]
fn malformed_pgm_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.pgm");
    let out = dir.path().join("out.pgm");
    fs::write(&input, b"P5\n64 ").unwrap();
    let o = arsc(&["compress", "--in", s(&input), "--out", s(&out), "--bits", "8"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("byte 6"), "{}", stderr(&o));
    assert!(!out.exists());

    fs::write(&input, b"P5\n1 1\n1023\n\0\0").unwrap();
    let o = arsc(&["compress", "--in", s(&input), "--out", s(&out), "--bits", "8"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("maxval"), "{}", stderr(&o));
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(arsc(&["verify-mul", "--max-n", "11"]).status.code(), Some(2));
    assert_eq!(arsc(&["verify-mul", "--max-n", "2"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.pgm");
    assert_eq!(arsc(&["compress", "--in", s(&p), "--out", s(&p), "--bits", "5"]).status.code(), Some(2));
}

#[test]
fn verify_mul_small_widths() {
    let o = arsc(&["verify-mul", "--max-n", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,pairs,identity_violations,cbsc_max_abs_err,cbsc_mean_abs_err,conventional_mean_abs_err"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    // x in 0..8, w_s in 0..=8
    assert_eq!(&first[..3], &["3", "72", "0"]);
}

#[test]
fn calibrate_and_aging() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("platform.toml");
    let o = arsc(&["calibrate", "--rows", s(&data("data/published_rows.csv")), "--out", s(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p = arsc_cli::config::load(&cfg).unwrap();
    let ratio = p.model.cycles.c_ovh / p.model.cycles.c_sc;
    assert!((ratio / 23.3 - 1.0).abs() <= 0.1, "{ratio}");
    assert_eq!(p, arsc_cli::config::load(&data("data/platform.toml")).unwrap());

    let o = arsc(&["aging", "--platform", s(&cfg), "--target", "7.19", "--years", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 11);
    assert_eq!(&rows[0][..3], &["0", "85.7", "10"]);
    assert_eq!(&rows[10][..3], &["10", "75.7", "9"]);

    // no bit-width reaches 100 fps at these clocks
    let o = arsc(&["aging", "--platform", s(&cfg), "--target", "100", "--years", "1"]);
    assert!(o.status.success());
    for l in stdout(&o).lines().skip(1) {
        assert!(l.ends_with(",false"), "{l}");
        assert_eq!(l.split(',').nth(2), Some(""));
    }
}

#[test]
fn calibration_rejects_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("rows.csv");
    let cfg = dir.path().join("out.toml");
    fs::write(&rows, "bitwidth,freq_mhz,power_w,latency_s\n10,85.7,0.292,0.139\n").unwrap();
    let o = arsc(&["calibrate", "--rows", s(&rows), "--out", s(&cfg)]);
    assert!(!o.status.success());
    assert!(!cfg.exists());

    // pure 2^b latency scaling contradicted by a flat latency column
    fs::write(
        &rows,
        "bitwidth,freq_mhz,power_w,latency_s\n10,80,0.3,0.1\n9,40,0.2,0.1\n8,20,0.1,0.02\n7,10,0.05,0.1\n",
    )
    .unwrap();
    let o = arsc(&["calibrate", "--rows", s(&rows), "--out", s(&cfg)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("exceeds"), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("bitwidth,cycles_residual"), "{}", stdout(&o));
    assert!(!cfg.exists());
}

#[test]
fn synthetic_rows_calibrate_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("rows.csv");
    let cfg = dir.path().join("out.toml");
    // cycles = 1000 * 2^b + 50000, 10 fps, 10-bit row at the fastest clock
    let mut text = String::from("bitwidth,freq_mhz,power_w,latency_s\n");
    let f_ref = 10.0 * (1000.0 * 1024.0 + 50000.0) / 1e6;
    for b in [10u32, 8, 6] {
        let cyc = 1000.0 * f64::from(1u32 << b) + 50000.0;
        let f = 10.0 * cyc / 1e6;
        text += &format!("{b},{f},{},{}\n", 0.05 + 0.01 * f, cyc / (f_ref * 1e6));
    }
    fs::write(&rows, text).unwrap();
    let rep = dir.path().join("res.csv");
    let o = arsc(&["--report", s(&rep), "calibrate", "--rows", s(&rows), "--out", s(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let res = fs::read_to_string(&rep).unwrap();
    for l in res.lines().skip(1) {
        for v in l.split(',').skip(1) {
            assert!(v.parse::<f64>().unwrap().abs() < 1e-9, "{l}");
        }
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("in.pgm");
    pgm::write(&img, &GrayImage::from_fn(40, 24, |x, y| ((x * 7) ^ (y * 13)) as u8)).unwrap();
    let cfg = data("data/platform.toml");
    let mut seen: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
    for threads in ["1", "3", "1"] {
        let rep = dir.path().join(format!("r{}.csv", seen.len()));
        let out = dir.path().join(format!("o{}.pgm", seen.len()));
        let o = arsc(&[
            "--threads", threads, "--report", s(&rep), "compress", "--in", s(&img), "--out", s(&out),
            "--bits", "7", "--platform", s(&cfg),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        seen.push((fs::read(&rep).unwrap(), fs::read(&out).unwrap()));
    }
    assert!(seen.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn pgm_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.pgm");
    let img = GrayImage::from_fn(17, 5, |x, y| (x * 31 + y * 57) as u8);
    pgm::write(&p, &img).unwrap();
    let once = pgm::read(&p).unwrap();
    pgm::write(&p, &once).unwrap();
    assert_eq!(pgm::read(&p).unwrap(), img);
}

#[test]
fn mask_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("mask.txt");
    fs::write(&m, "1".repeat(8) + "\n" + &"00000000\n".repeat(7)).unwrap();
    let input = dir.path().join("in.pgm");
    let out = dir.path().join("out.pgm");
    pgm::write(&input, &GrayImage::from_fn(16, 16, |x, _| (x * 16) as u8)).unwrap();
    let o = arsc(&["compress", "--in", s(&input), "--out", s(&out), "--bits", "9", "--mask", s(&m)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = arsc(&["compress", "--in", s(&input), "--out", s(&out), "--bits", "9", "--mask", "lowpass:99"]);
    assert!(!o.status.success());
}
