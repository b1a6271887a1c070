use std::io::{BufRead, BufReader, Lines, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdout, Command, Output, Stdio};

use sdzkp::protocol::Challenge;
use sdzkp::sdpinst::{SdpInstance, Witness};
use sdzkp::session::{read_frame, write_frame, Message};
use tempfile::TempDir;

fn sdzkp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdzkp"))
}

fn run(args: &[&str]) -> Output {
    sdzkp().args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn keygen(dir: &Path, name: &str, n: usize, k: usize, extra: &[&str]) -> (PathBuf, PathBuf) {
    let inst = dir.join(format!("{name}.sdz"));
    let wit = dir.join(format!("{name}.sdw"));
    let (n, k) = (n.to_string(), k.to_string());
    let mut args = vec![
        "keygen",
        "--n",
        &n,
        "--gens",
        "3",
        "--k",
        &k,
        "--instance",
        p(&inst),
        "--witness",
        p(&wit),
    ];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    (inst, wit)
}

struct Verifier {
    child: Child,
    addr: String,
    lines: Lines<BufReader<ChildStdout>>,
}

impl Verifier {
    fn spawn(inst: &Path, rounds: usize, extra: &[&str]) -> Self {
        let rounds = rounds.to_string();
        let mut cmd = sdzkp();
        cmd.args([
            "verify",
            "--listen",
            "127.0.0.1:0",
            "--rounds",
            &rounds,
            "--instance",
            p(inst),
        ]);
        if !extra.contains(&"--timeout-ms") {
            cmd.args(["--timeout-ms", "5000"]);
        }
        let mut child = cmd
            .args(extra)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
        let first = lines.next().unwrap().unwrap();
        let addr = first
            .strip_prefix("LISTENING ")
            .expect("listening line")
            .to_string();
        Verifier { child, addr, lines }
    }

    fn finish(mut self) -> (Vec<String>, Option<i32>) {
        let lines = self.lines.by_ref().map(|l| l.unwrap()).collect();
        (lines, self.child.wait().unwrap().code())
    }
}

fn prove(inst: &Path, who: &[&str], addr: &str, rounds: usize) -> Output {
    let rounds = rounds.to_string();
    sdzkp()
        .args([
            "prove",
            "--rounds",
            &rounds,
            "--connect",
            addr,
            "--instance",
            p(inst),
        ])
        .args(who)
        .output()
        .unwrap()
}

#[test]
fn keygen_files_roundtrip_and_validate() {
    let dir = TempDir::new().unwrap();
    let (inst, wit) = keygen(dir.path(), "a", 16, 6, &[]);
    let inst_bytes = std::fs::read(&inst).unwrap();
    let parsed = SdpInstance::from_bytes(&inst_bytes).unwrap();
    assert_eq!(parsed.to_bytes(), inst_bytes);
    assert_eq!((parsed.n(), parsed.k()), (16, 6));
    let w = Witness::from_bytes(&std::fs::read(&wit).unwrap()).unwrap();
    assert!(parsed.validate_witness(&w.h).unwrap());
}

#[test]
fn keygen_small_instance_within_distance_by_brute_force() {
    let dir = TempDir::new().unwrap();
    for preset in ["general", "abelian2"] {
        let (inst, _) = keygen(dir.path(), preset, 6, 3, &["--preset", preset]);
        let inst = SdpInstance::from_bytes(&std::fs::read(inst).unwrap()).unwrap();
        let (d, h) = inst.brute_force_distance(720).unwrap();
        assert!(d <= 3);
        assert!(inst.validate_witness(&h).unwrap());
    }
}

#[test]
fn keygen_rejects_bad_parameters() {
    let dir = TempDir::new().unwrap();
    let i = dir.path().join("x.sdz");
    let w = dir.path().join("x.sdw");
    let out = run(&[
        "keygen",
        "--n",
        "8",
        "--k",
        "9",
        "--instance",
        p(&i),
        "--witness",
        p(&w),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        run(&["keygen", "--n", "8", "--k", "2", "--preset", "cyclic"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["fs-verify", "--rounds", "3"]).status.code(), Some(2));
    let out = run(&[
        "fs-verify",
        "--instance",
        "/nonexistent",
        "--proof",
        "/nonexistent",
        "--rounds",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fs_prove_then_verify() {
    let dir = TempDir::new().unwrap();
    let (inst, wit) = keygen(dir.path(), "a", 64, 16, &[]);
    let proof = dir.path().join("p.bin");
    let out = run(&[
        "fs-prove",
        "--instance",
        p(&inst),
        "--witness",
        p(&wit),
        "--proof",
        p(&proof),
        "--rounds",
        "219",
        "--context",
        "login",
    ]);
    assert!(out.status.success());
    let verify = |ctx: &str, rounds: &str, proof: &Path| {
        run(&[
            "fs-verify",
            "--instance",
            p(&inst),
            "--proof",
            p(proof),
            "--rounds",
            rounds,
            "--context",
            ctx,
        ])
    };
    let ok = verify("login", "219", &proof);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).trim(), "ACCEPT");
    assert_eq!(verify("logout", "219", &proof).status.code(), Some(1));
    assert_eq!(verify("login", "218", &proof).status.code(), Some(1));

    let bytes = std::fs::read(&proof).unwrap();
    let truncated = dir.path().join("t.bin");
    std::fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
    let out = verify("login", "219", &truncated);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parsing proof"));
}

#[test]
fn honest_pair_accepts_over_loopback() {
    let dir = TempDir::new().unwrap();
    let (inst, wit) = keygen(dir.path(), "a", 32, 8, &[]);
    let v = Verifier::spawn(&inst, 100, &[]);
    let out = prove(&inst, &["--witness", p(&wit)], &v.addr, 100);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ACCEPT");
    assert_eq!(v.finish(), (vec!["ACCEPT".to_string()], Some(0)));
}

#[test]
fn wrong_witness_refuses_to_start() {
    let dir = TempDir::new().unwrap();
    let (inst, _) = keygen(dir.path(), "a", 16, 4, &[]);
    let (_, other) = keygen(dir.path(), "b", 16, 4, &[]);
    // nothing listens on the discard port; the witness check comes first
    let out = prove(&inst, &["--witness", p(&other)], "127.0.0.1:9", 10);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("witness"));
}

#[test]
fn cheating_prover_is_rejected() {
    let dir = TempDir::new().unwrap();
    let (inst, _) = keygen(dir.path(), "a", 16, 4, &[]);
    for strategy in ["01", "02", "12"] {
        let v = Verifier::spawn(&inst, 60, &[]);
        let out = prove(&inst, &["--cheat", strategy], &v.addr, 60);
        assert_eq!(out.status.code(), Some(1));
        assert_eq!(v.finish(), (vec!["REJECT".to_string()], Some(1)));
    }
}

#[test]
fn out_of_order_message_rejects() {
    let dir = TempDir::new().unwrap();
    let (inst, _) = keygen(dir.path(), "a", 16, 4, &[]);
    let v = Verifier::spawn(&inst, 5, &[]);
    let mut s = TcpStream::connect(&v.addr).unwrap();
    write_frame(&mut s, &Message::Challenge(Challenge::One)).unwrap();
    assert_eq!(read_frame(&mut s).unwrap(), Message::Verdict(false));
    assert_eq!(v.finish(), (vec!["REJECT".to_string()], Some(1)));
}

#[test]
fn malformed_frames_reject() {
    let dir = TempDir::new().unwrap();
    let (inst, _) = keygen(dir.path(), "a", 16, 4, &[]);
    let garbage: [&[u8]; 4] = [
        &[0xff, 0xff, 0xff, 0xff, 0x01],
        &[0, 0, 0, 0],
        &[2, 0, 0, 0, 0x01, 0x00],
        b"GET / HTTP/1.1\r\n\r\n",
    ];
    for bytes in garbage {
        let v = Verifier::spawn(&inst, 5, &[]);
        let mut s = TcpStream::connect(&v.addr).unwrap();
        s.write_all(bytes).unwrap();
        s.shutdown(std::net::Shutdown::Write).unwrap();
        let mut rest = Vec::new();
        let _ = s.read_to_end(&mut rest);
        assert_eq!(v.finish(), (vec!["REJECT".to_string()], Some(1)));
    }
}

#[test]
fn silent_peer_times_out() {
    let dir = TempDir::new().unwrap();
    let (inst, _) = keygen(dir.path(), "a", 16, 4, &[]);
    let v = Verifier::spawn(&inst, 5, &["--timeout-ms", "200"]);
    let _s = TcpStream::connect(&v.addr).unwrap();
    assert_eq!(v.finish(), (vec!["REJECT".to_string()], Some(1)));
}

#[test]
fn concurrent_sessions() {
    let dir = TempDir::new().unwrap();
    let (inst, wit) = keygen(dir.path(), "a", 32, 8, &[]);
    let v = Verifier::spawn(&inst, 50, &["--sessions", "3"]);
    let provers: Vec<Child> = (0..3)
        .map(|_| {
            sdzkp()
                .args([
                    "prove",
                    "--rounds",
                    "50",
                    "--connect",
                    &v.addr,
                    "--instance",
                    p(&inst),
                    "--witness",
                    p(&wit),
                ])
                .stdout(Stdio::null())
                .spawn()
                .unwrap()
        })
        .collect();
    for mut c in provers {
        assert!(c.wait().unwrap().success());
    }
    let (lines, code) = v.finish();
    assert_eq!(lines, vec!["ACCEPT"; 3]);
    assert_eq!(code, Some(0));
}

fn analyze(args: &[&str]) -> (serde_json::Value, Option<i32>) {
    let mut all = vec!["analyze"];
    all.extend_from_slice(args);
    let out = run(&all);
    (
        serde_json::from_slice(&out.stdout).unwrap(),
        out.status.code(),
    )
}

#[test]
fn analyze_report_schema() {
    let (r, code) = analyze(&["completeness", "--rounds", "2000"]);
    assert_eq!(code, Some(0));
    let obj = r.as_object().unwrap();
    for key in [
        "experiment",
        "samples",
        "statistic",
        "p_value",
        "pass",
        "details",
    ] {
        assert!(obj.contains_key(key), "{key}");
    }
    assert_eq!(r["experiment"], "completeness");
    assert_eq!(r["samples"], 2000);
    assert_eq!(r["statistic"], 1.0);
    assert_eq!(r["pass"], true);
}

#[test]
fn analyze_soundness_and_simulator_rates() {
    let (r, _) = analyze(&["soundness", "--strategy", "01", "--rounds", "20000"]);
    assert_eq!(r["experiment"], "soundness-01");
    assert!((r["statistic"].as_f64().unwrap() - 2.0 / 3.0).abs() < 0.015);

    let (r, _) = analyze(&[
        "simulator",
        "--M",
        "8",
        "--samples",
        "20000",
        "--runs",
        "5000",
    ]);
    assert!((r["statistic"].as_f64().unwrap() - 5.0 / 9.0).abs() < 0.02);
    let d = &r["details"];
    let limit = d["abort_bound"].as_f64().unwrap() + 3.0 * d["abort_sigma"].as_f64().unwrap();
    assert!(d["abort_rate"].as_f64().unwrap() <= limit);
}

#[test]
fn analyze_distribution_on_files() {
    let dir = TempDir::new().unwrap();
    let (inst, wit) = keygen(dir.path(), "a", 5, 2, &[]);
    let (r, code) = analyze(&[
        "distribution",
        "--instance",
        p(&inst),
        "--witness",
        p(&wit),
        "--samples",
        "20000",
    ]);
    assert_eq!(r["experiment"], "distribution");
    assert!(r["details"]["group_order"].as_f64().unwrap() <= 120.0);
    assert_eq!(code, Some(if r["pass"] == true { 0 } else { 1 }));
}
