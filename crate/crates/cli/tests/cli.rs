use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use glossa::corpus::{write_corpus_dir, write_parallel_dir};
use glossa::synth::{generate, SynthConfig};

fn glossa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glossa")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = glossa(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_synth(root: &Path) {
    let d = generate(&SynthConfig {
        base_sentences: 20,
        test_narratives: 4,
        test_min_sentences: 3,
        test_max_sentences: 8,
        mono_narratives: 10,
        mono_sentences: 10,
        nouns: 200,
        verbs: 150,
        adjectives: 60,
        adverbs: 20,
        ..Default::default()
    });
    write_corpus_dir(&d.base, &root.join("base")).unwrap();
    write_corpus_dir(&d.test, &root.join("test")).unwrap();
    write_corpus_dir(&d.mono, &root.join("mono")).unwrap();
    write_parallel_dir(&d.parallel, &root.join("parallel")).unwrap();
}

#[test]
fn every_subcommand_runs_on_synthetic_data() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    write_synth(root);
    let p = |name: &str| root.join(name).display().to_string();

    let stats = ok(&["corpus", "stats", &p("base"), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stats).unwrap();
    assert_eq!(v["sentences"], 20);
    assert!(ok(&["corpus", "stats", &p("parallel"), "--parallel"]).contains("tokens"));
    assert_eq!(ok(&["corpus", "validate", &p("test")]).trim(), "ok");

    let model = root.join("crf.model");
    let out = ok(&["train", "crf", "--train", &p("base"), "--test", &p("test"), "--out", &model.display().to_string()]);
    assert!(out.contains("accuracy\t"), "{out}");
    assert!(model.is_file());
    let out = ok(&["train", "neural", "--train", &p("base"), "--epochs", "2", "--dev-size", "2"]);
    assert!(out.contains("best_epoch"));
    let out = ok(&["train", "gdb", "--train", &p("base"), "--mono", &p("mono"), "--test", &p("test")]);
    assert!(out.contains("propagation_residual"));

    let dict = root.join("clp.tsv");
    ok(&["project", "--parallel", &p("parallel"), "--test-ids", "story-01,story-02,story-03,story-04", "--out", &dict.display().to_string()]);
    assert!(std::fs::read_to_string(&dict).unwrap().lines().count() > 10);
    let tsv = ok(&[
        "grid", "--train", &p("base"), "--test", &p("test"), "--mono", &p("mono"), "--parallel", &p("parallel"),
        "--taggers", "majority,gdb", "--conditions", "base,clp",
    ]);
    assert_eq!(tsv.lines().count(), 5);

    let al = ok(&["al", "--base", &p("base"), "--queue", &p("test"), "--mono", &p("mono"), "--taggers", "majority,crf-mod"]);
    assert_eq!(al.lines().count(), 5);
    let cv = ok(&["cv", "--narratives", &p("test"), "--tagger", "majority", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&cv).unwrap();
    assert_eq!(v["folds"].as_array().unwrap().len(), 4);
}

#[test]
fn bad_input_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("a.grk"), "leo ti\noju\n").unwrap();
    std::fs::write(tmp.path().join("a.ita"), "dice che\n").unwrap();
    let out = glossa(&["corpus", "validate", "--parallel", &tmp.path().display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let out = glossa(&["grid", "--train", "x", "--test", "x", "--mono", "x", "--conditions", "nope"]);
    assert!(!out.status.success());
}

#[test]
fn serve_reads_environment_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    write_synth(root);
    let cfg = root.join("service.toml");
    std::fs::write(&cfg, format!("port = 1\ntaggers = [\"majority\"]\ndata_dir = {:?}\n", root.join("data"))).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_glossa"))
        .args(["serve", "--config", &cfg.display().to_string()])
        .env("GLOSSA_PORT", "0")
        .env("GLOSSA_BASE_DIR", root.join("base"))
        .env("GLOSSA_QUEUE_DIR", root.join("test"))
        .env("GLOSSA_MONO_DIR", root.join("mono"))
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").unwrap_or_else(|| panic!("{line}")).to_string();

    let mut s = TcpStream::connect(&addr).unwrap();
    write!(s, "GET /api/tagset HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut resp = String::new();
    s.read_to_string(&mut resp).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(resp.starts_with("HTTP/1.1 200"), "{resp}");
    assert!(resp.contains("\"PUNCT\""));
}
