//! Provider API.
//!
//! | Method | Path                        | Body                                             | Response            |
//! |--------|-----------------------------|--------------------------------------------------|---------------------|
//! | PUT    | `/content`                  | `{"blob": base64, "submitter_pubkey": hex}`      | manifest JSON       |
//! | GET    | `/content/{id}/manifest`    |                                                  | manifest JSON       |
//! | GET    | `/content/{id}/chunk/{n}`   |                                                  | raw chunk bytes     |
//! | DELETE | `/content/{id}`             | `{"requester_pubkey": hex, "signature": hex}`    | `{"content_id", "deleted"}` |

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, put};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{error_response, normalize_base, parse_error, CLIENT_TIMEOUT};
use crate::crypto::PublicKey;
use crate::ids::ContentId;
use crate::provider::{ContentManifest, DeleteAck, ProviderApi, ProviderError, ProviderStore};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UploadRequest {
    pub blob: String,
    pub submitter_pubkey: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeleteRequest {
    pub requester_pubkey: String,
    pub signature: String,
}

fn status_for(err: &ProviderError) -> StatusCode {
    match err {
        ProviderError::EmptyBlob | ProviderError::Protocol(_) => StatusCode::BAD_REQUEST,
        ProviderError::StorageFull { .. } => StatusCode::INSUFFICIENT_STORAGE,
        ProviderError::NotFound => StatusCode::NOT_FOUND,
        ProviderError::IndexOutOfRange { .. } => StatusCode::RANGE_NOT_SATISFIABLE,
        ProviderError::Unauthorized => StatusCode::FORBIDDEN,
        ProviderError::Io(_) | ProviderError::Unavailable(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

struct ApiError(ProviderError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        error_response(status_for(&self.0), &self.0)
    }
}

impl From<ProviderError> for ApiError {
    fn from(err: ProviderError) -> Self {
        ApiError(err)
    }
}

fn bad_request(what: &str) -> ApiError {
    ApiError(ProviderError::Protocol(what.to_owned()))
}

fn parse_id(id: &str) -> Result<ContentId, ApiError> {
    id.parse().map_err(|_| bad_request("content id must be 64 hex characters"))
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ProviderError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(ProviderError::Io(e.to_string())))?
        .map_err(ApiError)
}

async fn upload(
    State(store): State<Arc<ProviderStore>>,
    body: Result<Json<UploadRequest>, axum::extract::rejection::JsonRejection>,
) -> Result<Json<ContentManifest>, ApiError> {
    let Json(req) = body.map_err(|e| bad_request(&e.body_text()))?;
    let blob = BASE64.decode(req.blob.as_bytes()).map_err(|_| bad_request("blob is not base64"))?;
    let submitter: PublicKey = req
        .submitter_pubkey
        .parse()
        .map_err(|_| bad_request("submitter_pubkey is not a compressed public key"))?;
    blocking(move || store.upload(&blob, &submitter)).await.map(Json)
}

async fn manifest(
    State(store): State<Arc<ProviderStore>>,
    Path(id): Path<String>,
) -> Result<Json<ContentManifest>, ApiError> {
    let id = parse_id(&id)?;
    blocking(move || store.get_manifest(&id)).await.map(Json)
}

async fn chunk(
    State(store): State<Arc<ProviderStore>>,
    Path((id, index)): Path<(String, u64)>,
) -> Result<Response, ApiError> {
    let id = parse_id(&id)?;
    let bytes = blocking(move || store.get_chunk(&id, index)).await?;
    Ok(([(header::CONTENT_TYPE, "application/octet-stream")], bytes).into_response())
}

async fn delete(
    State(store): State<Arc<ProviderStore>>,
    Path(id): Path<String>,
    body: Result<Json<DeleteRequest>, axum::extract::rejection::JsonRejection>,
) -> Result<Json<DeleteAck>, ApiError> {
    let id = parse_id(&id)?;
    let Json(req) = body.map_err(|e| bad_request(&e.body_text()))?;
    let requester: PublicKey = req
        .requester_pubkey
        .parse()
        .map_err(|_| bad_request("requester_pubkey is not a compressed public key"))?;
    let signature = hex::decode(req.signature.trim()).map_err(|_| bad_request("signature is not hex"))?;
    blocking(move || store.delete_content(&id, &requester, &signature)).await.map(Json)
}

/// Routes for the provider API. `max_upload_bytes` bounds request bodies.
pub fn provider_router(store: Arc<ProviderStore>, max_upload_bytes: usize) -> Router {
    Router::new()
        .route("/content", put(upload))
        .route("/content/{id}/manifest", get(manifest))
        .route("/content/{id}/chunk/{index}", get(chunk))
        .route("/content/{id}", axum::routing::delete(delete))
        .layer(DefaultBodyLimit::max(max_upload_bytes))
        .with_state(store)
}

/// Blocking HTTP client for a remote provider.
#[derive(Debug, Clone)]
pub struct HttpProvider {
    base: String,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(base_url: &str) -> Self {
        Self {
            base: normalize_base(base_url),
            client: reqwest::blocking::Client::builder()
                .timeout(CLIENT_TIMEOUT)
                .build()
                .expect("HTTP client builds"),
        }
    }

    fn finish(&self, result: reqwest::Result<reqwest::blocking::Response>) -> Result<Bytes, ProviderError> {
        let response = result.map_err(|e| ProviderError::Unavailable(format!("{}: {e}", self.base)))?;
        let status = response.status();
        let body = response
            .bytes()
            .map_err(|e| ProviderError::Unavailable(format!("{}: {e}", self.base)))?;
        if status.is_success() {
            return Ok(body);
        }
        Err(parse_error::<ProviderError>(&body)
            .unwrap_or_else(|| ProviderError::Protocol(format!("HTTP {status} from {}", self.base))))
    }

    fn json<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ProviderError> {
        serde_json::from_slice(body).map_err(|e| ProviderError::Protocol(e.to_string()))
    }
}

impl ProviderApi for HttpProvider {
    fn upload(&self, blob: &[u8], submitter: &PublicKey) -> Result<ContentManifest, ProviderError> {
        let req = UploadRequest {
            blob: BASE64.encode(blob),
            submitter_pubkey: submitter.to_hex(),
        };
        let body = self.finish(self.client.put(format!("{}/content", self.base)).json(&req).send())?;
        Self::json(&body)
    }

    fn get_manifest(&self, content_id: &ContentId) -> Result<ContentManifest, ProviderError> {
        let body = self.finish(
            self.client
                .get(format!("{}/content/{content_id}/manifest", self.base))
                .send(),
        )?;
        Self::json(&body)
    }

    fn get_chunk(&self, content_id: &ContentId, index: u64) -> Result<Vec<u8>, ProviderError> {
        let body = self.finish(
            self.client
                .get(format!("{}/content/{content_id}/chunk/{index}", self.base))
                .send(),
        )?;
        Ok(body.to_vec())
    }

    fn delete_content(
        &self,
        content_id: &ContentId,
        requester: &PublicKey,
        signature: &[u8],
    ) -> Result<DeleteAck, ProviderError> {
        let req = DeleteRequest {
            requester_pubkey: requester.to_hex(),
            signature: hex::encode(signature),
        };
        let body = self.finish(
            self.client
                .delete(format!("{}/content/{content_id}", self.base))
                .json(&req)
                .send(),
        )?;
        Self::json(&body)
    }

    fn endpoint(&self) -> String {
        self.base.clone()
    }
}
