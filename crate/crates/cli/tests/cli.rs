use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use baenet::dsp::{read_wav, write_wav, WavFormat};
use baenet::Waveform;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_baenet"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn noise(len: usize, seed: u64) -> Vec<f64> {
    let mut x = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    (0..len)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn wav(dir: &Path, name: &str, samples: Vec<f64>, format: WavFormat) -> PathBuf {
    let p = dir.join(name);
    write_wav(&p, &Waveform::new(samples, 48_000).unwrap(), format).unwrap();
    p
}

fn weights(dir: &Path, variant: &str) -> PathBuf {
    let p = dir.join(format!("{variant}.baew"));
    let o = run(&["gen-weights", "--output", p.to_str().unwrap(), "--variant", variant, "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stream(weights: &Path, input: &[f32]) -> Output {
    let mut child = bin()
        .args(["stream", "--weights", s(weights)])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let bytes: Vec<u8> = input.iter().flat_map(|v| v.to_le_bytes()).collect();
    let mut stdin = child.stdin.take().unwrap();
    let writer = std::thread::spawn(move || stdin.write_all(&bytes).unwrap());
    let out = child.wait_with_output().unwrap();
    writer.join().unwrap();
    out
}

fn floats(bytes: &[u8]) -> Vec<f32> {
    bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect()
}

#[test]
fn count_prints_parameters() {
    let o = run(&["count", "--variant", "lite"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("params=572422"), "{text}");
    assert!(text.contains("macs_per_second="), "{text}");
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["count", "--variant", "huge"])), 1);
    assert_eq!(code(&run(&["degrade", "--input", "a.wav", "--output", "b.wav"])), 1);
    assert_eq!(
        code(&run(&["degrade", "--input", "a.wav", "--output", "b.wav", "--cutoff", "1", "--schedule", "s"])),
        1
    );
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn io_and_format_errors() {
    let dir = TempDir::new().unwrap();
    let w = weights(dir.path(), "lite");
    let missing = run(&["extend", "--input", "/no/such.wav", "--output", "/tmp/x.wav", "--weights", s(&w)]);
    assert_eq!(code(&missing), 2);
    assert!(!missing.stderr.is_empty());
    assert_eq!(code(&run(&["bench", "--weights", "/no/such.baew"])), 2);

    let bad = dir.path().join("bad.baew");
    std::fs::write(&bad, b"BAEW\x07\x00\x00\x00").unwrap();
    let o = run(&["bench", "--weights", s(&bad), "--seconds", "0.1"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("version"));

    let not_wav = dir.path().join("in.wav");
    std::fs::write(&not_wav, b"hello").unwrap();
    let o = run(&["extend", "--input", s(&not_wav), "--output", s(&dir.path().join("o.wav")), "--weights", s(&w)]);
    assert_eq!(code(&o), 3);

    // a lite file cannot drive the full model
    let o = run(&["bench", "--weights", s(&w), "--variant", "full", "--seconds", "0.1"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn extend_is_deterministic_and_length_preserving() {
    let dir = TempDir::new().unwrap();
    let w = weights(dir.path(), "full");
    for format in [WavFormat::Int16, WavFormat::Float32] {
        let input = wav(dir.path(), "in.wav", noise(10_000, 1), format);
        let (a, b) = (dir.path().join("a.wav"), dir.path().join("b.wav"));
        for out in [&a, &b] {
            let o = run(&["extend", "--input", s(&input), "--output", s(out), "--weights", s(&w)]);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let (y, fmt) = read_wav(&a).unwrap();
        assert_eq!(y.len(), 10_000);
        assert_eq!(fmt, format);
    }
}

#[test]
fn stream_matches_extend_on_interior() {
    let dir = TempDir::new().unwrap();
    let w = weights(dir.path(), "full");
    let x: Vec<f64> = noise(30_000, 2).into_iter().map(|v| f64::from(v as f32)).collect();
    let input = wav(dir.path(), "in.wav", x.clone(), WavFormat::Float32);
    let out = dir.path().join("out.wav");
    assert_eq!(code(&run(&["extend", "--input", s(&input), "--output", s(&out), "--weights", s(&w)])), 0);
    let (offline, _) = read_wav(&out).unwrap();

    let o = stream(&w, &x.iter().map(|&v| v as f32).collect::<Vec<_>>());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("latency: 1536 samples"), "{stderr}");
    let y = floats(&o.stdout);
    assert_eq!(y.len(), x.len());
    assert!(y[..1536].iter().all(|&v| v == 0.0));
    for n in 0..x.len() - 2 * 1536 {
        let d = (f64::from(y[n + 1536]) - offline.samples()[n]).abs();
        assert!(d < 1e-5, "sample {n}: {d}");
    }
}

#[test]
fn stream_edge_cases() {
    let dir = TempDir::new().unwrap();
    let w = weights(dir.path(), "lite");
    let o = stream(&w, &[]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());

    let short: Vec<f32> = noise(1000, 3).into_iter().map(|v| v as f32).collect();
    let o = stream(&w, &short);
    assert_eq!(code(&o), 0);
    let y = floats(&o.stdout);
    assert_eq!(y.len(), 1000);
    assert!(y.iter().all(|&v| v == 0.0));

    let mut child = bin()
        .args(["stream", "--weights", s(&w)])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&[0, 0, 0, 0, 1, 2]).unwrap();
    assert_eq!(code(&child.wait_with_output().unwrap()), 3);
}

#[test]
fn degrade_and_eval() {
    let dir = TempDir::new().unwrap();
    let input = wav(dir.path(), "ref.wav", noise(48_000, 4), WavFormat::Float32);
    let low = dir.path().join("low.wav");
    let o = run(&["degrade", "--input", s(&input), "--output", s(&low), "--cutoff", "4000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let sched = dir.path().join("sched.txt");
    std::fs::write(&sched, "0 4000\n0.5 12000\n").unwrap();
    let fl = dir.path().join("fl.wav");
    let o = run(&["degrade", "--input", s(&input), "--output", s(&fl), "--schedule", s(&sched)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::write(&sched, "0.5 4000\n").unwrap();
    let o = run(&["degrade", "--input", s(&input), "--output", s(&fl), "--schedule", s(&sched)]);
    assert_eq!(code(&o), 3);
    let o = run(&["degrade", "--input", s(&input), "--output", s(&fl), "--cutoff", "30000"]);
    assert_eq!(code(&o), 1);

    let o = run(&["eval", "--reference", s(&input), "--degraded", s(&input)]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, ["lsd=0.000000", "segsnr=35.000000", "mrstft=0.000000", "wav=0.000000"]);

    let o = run(&["eval", "--reference", s(&input), "--degraded", s(&low), "--metrics", "lsd,wav", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["lsd"].as_f64().unwrap() > 1.0);
    assert!(v["wav"].as_f64().unwrap() > 0.0);
    assert!(v.get("segsnr").is_none());

    assert_eq!(code(&run(&["eval", "--reference", s(&input), "--degraded", s(&low), "--metrics", "pesq"])), 1);
}

#[test]
fn bench_reports_rtf() {
    let dir = TempDir::new().unwrap();
    let w = weights(dir.path(), "lite");
    let o = run(&["bench", "--weights", s(&w), "--seconds", "1"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["params=572422", "macs_per_second=", "rtf="] {
        assert!(text.contains(key), "{text}");
    }
}
