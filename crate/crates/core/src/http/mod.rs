//! JSON-over-HTTP front ends for the chain node and the storage provider,
//! plus blocking clients that implement [`ChainAccess`](crate::chain::ChainAccess)
//! and [`ProviderApi`](crate::provider::ProviderApi).
//!
//! Error responses carry the serialized module error plus a readable message:
//! `{"error": "not_found", "message": "content not found"}`.

mod chain;
mod provider;

pub use chain::{chain_router, RemoteChain};
pub use provider::{provider_router, HttpProvider, UploadRequest, DeleteRequest};

use std::net::SocketAddr;
use std::thread::JoinHandle;
use std::time::Duration;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::{Json, Router};
use serde::Serialize;
use tokio::sync::oneshot;

pub(crate) const CLIENT_TIMEOUT: Duration = Duration::from_secs(120);

pub(crate) fn error_response<E: Serialize + std::fmt::Display>(status: StatusCode, err: &E) -> Response {
    let mut body = serde_json::to_value(err).unwrap_or_else(|_| serde_json::json!({}));
    if let Some(obj) = body.as_object_mut() {
        obj.insert("message".into(), serde_json::Value::String(err.to_string()));
    }
    (status, Json(body)).into_response()
}

/// Parses an error body written by [`error_response`].
pub(crate) fn parse_error<E: serde::de::DeserializeOwned>(body: &[u8]) -> Option<E> {
    let mut value: serde_json::Value = serde_json::from_slice(body).ok()?;
    value.as_object_mut()?.remove("message");
    serde_json::from_value(value).ok()
}

pub(crate) fn normalize_base(url: &str) -> String {
    let url = url.trim().trim_end_matches('/');
    if url.contains("://") {
        url.to_owned()
    } else {
        format!("http://{url}")
    }
}

/// Runs `router` on `addr` until the process exits, invoking `on_ready` with
/// the bound address first.
pub fn serve_blocking(
    router: Router,
    addr: SocketAddr,
    on_ready: impl FnOnce(SocketAddr),
) -> std::io::Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        on_ready(listener.local_addr()?);
        axum::serve(listener, router).await
    })
}

/// A server running on its own thread and runtime; stops on drop.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl ServerHandle {
    pub fn spawn(router: Router, addr: SocketAddr) -> std::io::Result<Self> {
        let (ready_tx, ready_rx) = std::sync::mpsc::channel();
        let (shutdown_tx, shutdown_rx) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(4)
                .enable_all()
                .build()?;
            runtime.block_on(async move {
                let listener = match tokio::net::TcpListener::bind(addr).await {
                    Ok(l) => l,
                    Err(e) => {
                        let _ = ready_tx.send(Err(e.kind()));
                        return Err(e);
                    }
                };
                let _ = ready_tx.send(listener.local_addr().map_err(|e| e.kind()));
                axum::serve(listener, router)
                    .with_graceful_shutdown(async {
                        let _ = shutdown_rx.await;
                    })
                    .await
            })
        });
        let addr = ready_rx
            .recv()
            .map_err(|_| std::io::Error::other("server thread exited"))?
            .map_err(std::io::Error::from)?;
        Ok(Self {
            addr,
            shutdown: Some(shutdown_tx),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}
