#![allow(dead_code)]

use std::path::Path;
use std::time::{Duration, Instant};

use glossa::corpus::Narrative;
use glossa::harness::{ActiveLearner, AlConfig, TaggerKind, TaggerSpec};
use glossa::synth::{generate, SynthConfig, SynthData};
use glossa_service::{Core, ServerHandle, ServiceInputs};
use serde_json::{json, Value};

pub fn small(seed: u64) -> SynthData {
    generate(&SynthConfig {
        seed,
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
    })
}

pub fn al_config() -> AlConfig {
    AlConfig {
        taggers: vec![
            TaggerSpec::plain(TaggerKind::Majority),
            TaggerSpec::plain(TaggerKind::CrfMod),
            TaggerSpec::plain(TaggerKind::Gdb),
        ],
        ..Default::default()
    }
}

pub fn inputs(d: &SynthData) -> ServiceInputs {
    ServiceInputs {
        base: d.base.clone(),
        queue: d.test.clone(),
        mono: d.mono.clone(),
        parallel: None,
        al: al_config(),
    }
}

pub fn learner(d: &SynthData) -> ActiveLearner {
    let i = inputs(d);
    ActiveLearner::new(&i.base, &i.queue, &i.mono, i.parallel.as_ref(), i.al).unwrap()
}

pub fn open_core(d: &SynthData, dir: &Path) -> Core {
    Core::open(inputs(d), dir).unwrap()
}

pub async fn start(d: &SynthData, dir: &Path, worker: bool, token: Option<&str>) -> ServerHandle {
    let d = d.clone();
    let dir = dir.to_path_buf();
    let core = tokio::task::spawn_blocking(move || open_core(&d, &dir)).await.unwrap();
    let mut h = ServerHandle::bind(core, "127.0.0.1", 0, token.map(String::from)).await.unwrap();
    if worker {
        h.start_worker();
    }
    h
}

pub fn gold_strings(n: &Narrative) -> Vec<Vec<String>> {
    n.active_sentences()
        .map(|s| s.tags.as_ref().unwrap().iter().map(ToString::to_string).collect())
        .collect()
}

pub fn predicted_strings(task: &Value) -> Vec<Vec<String>> {
    task["sentences"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["tags"].as_array().unwrap().iter().map(|t| t.as_str().unwrap().to_string()).collect())
        .collect()
}

#[derive(Clone)]
pub struct Client {
    pub base: String,
    pub http: reqwest::Client,
    pub token: Option<String>,
}

impl Client {
    pub fn new(h: &ServerHandle) -> Self {
        Client {
            base: h.url(),
            http: reqwest::Client::new(),
            token: None,
        }
    }

    fn auth(&self, r: reqwest::RequestBuilder) -> reqwest::RequestBuilder {
        match &self.token {
            Some(t) => r.bearer_auth(t),
            None => r,
        }
    }

    pub async fn get(&self, path: &str) -> (u16, Value) {
        let r = self.auth(self.http.get(format!("{}{path}", self.base))).send().await.unwrap();
        (r.status().as_u16(), r.json().await.unwrap())
    }

    pub async fn post(&self, path: &str, body: Value) -> (u16, Value) {
        let r = self.auth(self.http.post(format!("{}{path}", self.base))).json(&body).send().await.unwrap();
        (r.status().as_u16(), r.json().await.unwrap())
    }

    pub async fn submit(&self, task_id: &str, tags: &[Vec<String>]) -> (u16, Value) {
        self.post(&format!("/api/tasks/{task_id}/submit"), json!({ "annotator_id": "tester", "tags": tags })).await
    }

    /// Polls until a task is served (the first model may still be training).
    pub async fn next_task(&self) -> (u16, Value) {
        let deadline = Instant::now() + Duration::from_secs(120);
        loop {
            let (code, body) = self.get("/api/tasks/next").await;
            if code != 503 || Instant::now() > deadline {
                return (code, body);
            }
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
    }

    /// Polls a retrain ticket until it leaves queued/running.
    pub async fn wait_ticket(&self, ticket: u64) -> Value {
        let deadline = Instant::now() + Duration::from_secs(120);
        loop {
            let (code, body) = self.get(&format!("/api/retrain/{ticket}")).await;
            assert_eq!(code, 200, "{body}");
            let status = body["status"].as_str().unwrap().to_string();
            if status == "done" || status == "failed" || Instant::now() > deadline {
                return body;
            }
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
    }
}
