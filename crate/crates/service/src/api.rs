//! axum routes over [`Shared`].

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use glossa::harness::HarnessError;
use serde_json::json;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use crate::state::{Core, Shared, SubmitRequest};
use crate::{ServiceConfig, ServiceError};

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::Harness(HarnessError::QueueEmpty)
            | ServiceError::UnknownTask(_)
            | ServiceError::UnknownTicket(_) => StatusCode::NOT_FOUND,
            ServiceError::Harness(HarnessError::ModelNotReady) => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Harness(HarnessError::LengthMismatch { .. }) | ServiceError::UnknownTag(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ServiceError::StaleTask { .. } | ServiceError::NotInReview(_) | ServiceError::NothingToRetrain => {
                StatusCode::CONFLICT
            }
            ServiceError::Unauthorized => StatusCode::UNAUTHORIZED,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.kind(), "message": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}

type ApiResult = Result<Response, ServiceError>;

async fn blocking<T: Send + 'static>(
    shared: &Arc<Shared>,
    f: impl FnOnce(&mut Core) -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    let shared = Arc::clone(shared);
    tokio::task::spawn_blocking(move || f(&mut shared.lock()))
        .await
        .map_err(|e| ServiceError::Config(format!("request task failed: {e}")))?
}

async fn next_task(State(s): State<Arc<Shared>>) -> ApiResult {
    Ok(Json(blocking(&s, |c| c.next_task()).await?).into_response())
}

async fn submit(State(s): State<Arc<Shared>>, Path(id): Path<String>, Json(req): Json<SubmitRequest>) -> ApiResult {
    let (receipt, queued) = blocking(&s, move |c| c.submit(&id, &req)).await?;
    if queued {
        s.wake();
    }
    Ok(Json(receipt).into_response())
}

async fn retrain(State(s): State<Arc<Shared>>) -> ApiResult {
    let ticket = s.lock().request_retrain()?;
    s.wake();
    Ok((StatusCode::ACCEPTED, Json(s.lock().ticket(ticket)?)).into_response())
}

async fn ticket(State(s): State<Arc<Shared>>, Path(id): Path<u64>) -> ApiResult {
    Ok(Json(s.lock().ticket(id)?).into_response())
}

async fn metrics(State(s): State<Arc<Shared>>) -> ApiResult {
    Ok(Json(s.lock().metrics()).into_response())
}

async fn tagset(State(s): State<Arc<Shared>>) -> ApiResult {
    Ok(Json(s.lock().tagset().to_vec()).into_response())
}

async fn auth(State(token): State<Arc<String>>, req: Request, next: Next) -> Response {
    let ok = req
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .is_some_and(|t| t == token.as_str());
    if ok {
        next.run(req).await
    } else {
        ServiceError::Unauthorized.into_response()
    }
}

pub fn router(shared: Arc<Shared>, token: Option<String>) -> Router {
    let app = Router::new()
        .route("/api/tasks/next", get(next_task))
        .route("/api/tasks/{id}/submit", post(submit))
        .route("/api/retrain", post(retrain))
        .route("/api/retrain/{ticket}", get(ticket))
        .route("/api/metrics", get(metrics))
        .route("/api/tagset", get(tagset))
        .with_state(shared);
    match token {
        Some(t) => app.layer(middleware::from_fn_with_state(Arc::new(t), auth)),
        None => app,
    }
}

/// A running server. The retrain worker starts separately so callers can
/// observe the service before any model exists.
#[derive(Debug)]
pub struct ServerHandle {
    pub addr: SocketAddr,
    shared: Arc<Shared>,
    stop: Option<oneshot::Sender<()>>,
    server: JoinHandle<std::io::Result<()>>,
    worker: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub async fn bind(core: Core, host: &str, port: u16, token: Option<String>) -> Result<Self, ServiceError> {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| ServiceError::Io(format!("{host}:{port}"), e))?;
        let addr = listener.local_addr().map_err(|e| ServiceError::Io(format!("{host}:{port}"), e))?;
        let shared = Shared::new(core);
        let (stop, stopped) = oneshot::channel::<()>();
        let app = router(Arc::clone(&shared), token);
        let server = tokio::spawn(async move {
            axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = stopped.await;
                })
                .await
        });
        Ok(ServerHandle {
            addr,
            shared,
            stop: Some(stop),
            server,
            worker: None,
        })
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn shared(&self) -> &Arc<Shared> {
        &self.shared
    }

    /// Starts the background trainer. Returns the ticket queued when no model
    /// is trained on the current pool.
    pub fn start_worker(&mut self) -> Option<u64> {
        let ticket = self.shared.lock().ensure_model();
        if self.worker.is_none() {
            self.worker = Some(tokio::spawn(Arc::clone(&self.shared).run_worker()));
        }
        self.shared.wake();
        ticket
    }

    /// Stops accepting requests and waits for the server to drain. A
    /// training job in flight is abandoned; the log is already durable.
    pub async fn shutdown(mut self) -> Result<(), ServiceError> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(w) = self.worker.take() {
            w.abort();
        }
        match (&mut self.server).await {
            Ok(r) => r.map_err(|e| ServiceError::Io(self.addr.to_string(), e)),
            Err(e) => Err(ServiceError::Config(format!("server task failed: {e}"))),
        }
    }
}

/// Loads the corpora, replays the record log and serves until Ctrl-C.
pub async fn serve(cfg: ServiceConfig) -> Result<(), ServiceError> {
    let inputs = cfg.load_inputs()?;
    let data_dir = cfg.data_dir.clone();
    let core = tokio::task::spawn_blocking(move || Core::open(inputs, &data_dir))
        .await
        .map_err(|e| ServiceError::Config(format!("startup task failed: {e}")))??;
    let mut handle = ServerHandle::bind(core, &cfg.host, cfg.port, cfg.token.clone()).await?;
    handle.start_worker();
    eprintln!("listening on {}", handle.url());
    let _ = tokio::signal::ctrl_c().await;
    handle.shutdown().await
}
