//! Serves the annotation loop on synthetic data and drives it over HTTP with
//! gold corrections until the queue is empty.

use std::time::Duration;

use glossa::harness::{AlConfig, TaggerKind, TaggerSpec};
use glossa::synth::{generate, SynthConfig};
use glossa_service::{Core, ServerHandle, ServiceInputs};
use serde_json::{json, Value};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = generate(&SynthConfig {
        test_narratives: 4,
        ..Default::default()
    });
    let dir = tempfile::tempdir()?;
    let inputs = ServiceInputs {
        base: d.base.clone(),
        queue: d.test.clone(),
        mono: d.mono.clone(),
        parallel: Some(d.parallel.clone()),
        al: AlConfig {
            taggers: vec![TaggerSpec::plain(TaggerKind::CrfMod), TaggerSpec::plain(TaggerKind::Gdb)],
            ..Default::default()
        },
    };
    let data_dir = dir.path().to_path_buf();
    let core = tokio::task::spawn_blocking(move || Core::open(inputs, &data_dir)).await??;
    let mut server = ServerHandle::bind(core, "127.0.0.1", 0, None).await?;
    server.start_worker();
    let base = server.url();
    println!("serving on {base}");
    let http = reqwest::Client::new();

    loop {
        let r = http.get(format!("{base}/api/tasks/next")).send().await?;
        match r.status().as_u16() {
            503 => {
                tokio::time::sleep(Duration::from_millis(50)).await;
                continue;
            }
            404 => break,
            _ => {}
        }
        let task: Value = r.json().await?;
        let id = task["narrative_id"].as_str().unwrap_or_default();
        let gold: Vec<Vec<String>> = d
            .test
            .get(id)
            .ok_or("unknown narrative")?
            .active_sentences()
            .map(|s| s.tags.iter().flatten().map(ToString::to_string).collect())
            .collect();
        let receipt: Value = http
            .post(format!("{base}/api/tasks/{}/submit", task["task_id"].as_str().unwrap_or_default()))
            .json(&json!({ "annotator_id": "example", "tags": gold }))
            .send()
            .await?
            .json()
            .await?;
        let task_id = receipt["task_id"].as_str().unwrap_or_default();
        println!("{task_id} corrected {} tokens, retrain ticket {}", receipt["changed_count"], receipt["ticket"]);
        loop {
            let t: Value = http.get(format!("{base}/api/retrain/{}", receipt["ticket"])).send().await?.json().await?;
            if t["status"] != "queued" && t["status"] != "running" {
                break;
            }
            tokio::time::sleep(Duration::from_millis(50)).await;
        }
    }
    let metrics: Value = http.get(format!("{base}/api/metrics")).send().await?.json().await?;
    for r in metrics["log"].as_array().into_iter().flatten() {
        let text = |k: &str| r[k].as_str().unwrap_or_default().to_string();
        let acc = r["accuracy"].as_f64().unwrap_or(f64::NAN);
        println!("iter {} {} {} acc {acc:.2}", r["iteration"], text("narrative_id"), text("method"));
    }
    server.shutdown().await?;
    Ok(())
}
