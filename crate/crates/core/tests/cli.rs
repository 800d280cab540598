use std::ffi::OsString;

use tvolap::wav::read_wav;

fn run(args: &[&str]) -> (i32, String, String) {
    let argv: Vec<OsString> = std::iter::once("tvolap").chain(args.iter().copied()).map(Into::into).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = tvolap::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn switch_writes_metrics_and_audio() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let (code, stdout, stderr) = run(&[
        "switch", "--algo", "tvolap,ola", "--samples", "8192", "--switch-ms", "85.333333", "--out-dir", out_dir,
    ]);
    assert_eq!(code, 0, "{stderr}");
    let tvolap_row = stdout.lines().find(|l| l.starts_with("TVOLAP")).unwrap();
    assert!(tvolap_row.contains(",256,"), "{tvolap_row}");

    let audio = read_wav(dir.path().join("tvolap.wav")).unwrap();
    assert_eq!(audio.len(), 8192 + 2048 - 1);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(json[0]["transition_width"], 256);
}

#[test]
fn signal_then_process_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pink.wav");
    let (code, _, stderr) = run(&["signal", "pink", "--samples", "4000", "--out", input.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");

    let spec = format!("wav:{}", input.display());
    let out_dir = dir.path().join("out");
    let (code, _, stderr) = run(&[
        "process", "--input", &spec, "--ir", "delta", "--ir-len", "512", "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    let x = read_wav(&input).unwrap();
    let y = read_wav(out_dir.join("tvolap.wav")).unwrap();
    for (a, b) in x.channel(0).iter().zip(y.channel(0)) {
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn compare_reports_difference_level() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = run(&[
        "compare", "--input", "pink", "--samples", "24000", "--block", "2048", "--ir-len", "256", "--switch-ms", "300",
        "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.starts_with("fade_shape"), "{stdout}");
    assert!(dir.path().join("difference.wav").exists());
}
