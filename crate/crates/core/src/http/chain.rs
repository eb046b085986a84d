//! Chain node API.
//!
//! | Method | Path              | Body / query                          | Response                 |
//! |--------|-------------------|---------------------------------------|--------------------------|
//! | POST   | `/tx`             | `{"tx": hex(serialized tx)}`          | `{"txid": hex}`          |
//! | POST   | `/mine`           | `{"reward_to": hex, "timestamp": n?}` | tip JSON                 |
//! | GET    | `/tip`            |                                       | `{"height","hash","timestamp"}` |
//! | GET    | `/utxos/{addr}`   | `?view=spendable` (default confirmed) | list of UTXOs            |
//! | GET    | `/scan`           | `?from=n&to=n`                        | list of data records     |
//! | GET    | `/tx/{txid}`      |                                       | `{"height": n or null}`  |

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use super::{error_response, normalize_base, parse_error, CLIENT_TIMEOUT};
use crate::chain::{ChainAccess, ChainError, DataRecord, SharedChain, TipInfo, Utxo};
use crate::codec::{deserialize_tx, Transaction};
use crate::ids::{Address, Txid};

#[derive(Debug, Serialize, Deserialize)]
struct SubmitRequest {
    tx: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct SubmitResponse {
    txid: Txid,
}

#[derive(Debug, Serialize, Deserialize)]
struct MineRequest {
    reward_to: Address,
    #[serde(default)]
    timestamp: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TxStatus {
    height: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct UtxoQuery {
    #[serde(default)]
    view: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ScanQuery {
    from: Option<u64>,
    to: Option<u64>,
}

struct ApiError(ChainError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            ChainError::Storage(_) | ChainError::Unavailable(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ChainError::RangeOutOfBounds { .. } | ChainError::Codec(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        error_response(status, &self.0)
    }
}

impl From<ChainError> for ApiError {
    fn from(err: ChainError) -> Self {
        ApiError(err)
    }
}

async fn submit(State(chain): State<SharedChain>, Json(req): Json<SubmitRequest>) -> Result<Json<SubmitResponse>, ApiError> {
    let raw = hex::decode(req.tx.trim()).map_err(|_| ChainError::Codec("tx is not hex".into()))?;
    let tx = deserialize_tx(&raw).map_err(ChainError::from)?;
    let txid = tokio::task::spawn_blocking(move || chain.submit_tx(&tx))
        .await
        .map_err(|e| ChainError::Storage(e.to_string()))??;
    Ok(Json(SubmitResponse { txid }))
}

async fn mine(State(chain): State<SharedChain>, Json(req): Json<MineRequest>) -> Result<Json<TipInfo>, ApiError> {
    let tip = tokio::task::spawn_blocking(move || chain.mine_block(req.reward_to, req.timestamp))
        .await
        .map_err(|e| ChainError::Storage(e.to_string()))??;
    Ok(Json(tip))
}

async fn tip(State(chain): State<SharedChain>) -> Json<TipInfo> {
    Json(chain.read().tip_info())
}

async fn utxos(
    State(chain): State<SharedChain>,
    Path(addr): Path<String>,
    Query(q): Query<UtxoQuery>,
) -> Result<Json<Vec<Utxo>>, ApiError> {
    let addr: Address = addr
        .parse()
        .map_err(|_| ChainError::Codec("address must be 40 hex characters".into()))?;
    let chain = chain.read();
    Ok(Json(match q.view.as_deref() {
        Some("spendable") => chain.spendable_utxos(&addr),
        _ => chain.list_utxos(&addr),
    }))
}

async fn scan(State(chain): State<SharedChain>, Query(q): Query<ScanQuery>) -> Result<Json<Vec<DataRecord>>, ApiError> {
    let chain = chain.read();
    let to = q.to.unwrap_or(chain.tip().height());
    Ok(Json(chain.scan_data_outputs(q.from.unwrap_or(0), to)?))
}

async fn tx_status(State(chain): State<SharedChain>, Path(txid): Path<String>) -> Result<Json<TxStatus>, ApiError> {
    let txid: Txid = txid
        .parse()
        .map_err(|_| ChainError::Codec("txid must be 64 hex characters".into()))?;
    Ok(Json(TxStatus {
        height: chain.read().tx_location(&txid).map(|(h, _)| h),
    }))
}

pub fn chain_router(chain: SharedChain) -> Router {
    Router::new()
        .route("/tx", post(submit))
        .route("/mine", post(mine))
        .route("/tip", get(tip))
        .route("/utxos/{addr}", get(utxos))
        .route("/scan", get(scan))
        .route("/tx/{txid}", get(tx_status))
        .with_state(chain)
}

/// Blocking client for a chain node started with `node start`.
#[derive(Debug, Clone)]
pub struct RemoteChain {
    base: String,
    client: reqwest::blocking::Client,
}

impl RemoteChain {
    pub fn new(base_url: &str) -> Self {
        Self {
            base: normalize_base(base_url),
            client: reqwest::blocking::Client::builder()
                .timeout(CLIENT_TIMEOUT)
                .build()
                .expect("HTTP client builds"),
        }
    }

    fn finish<T: serde::de::DeserializeOwned>(
        &self,
        result: reqwest::Result<reqwest::blocking::Response>,
    ) -> Result<T, ChainError> {
        let response = result.map_err(|e| ChainError::Unavailable(format!("{}: {e}", self.base)))?;
        let status = response.status();
        let body = response
            .bytes()
            .map_err(|e| ChainError::Unavailable(format!("{}: {e}", self.base)))?;
        if !status.is_success() {
            return Err(parse_error::<ChainError>(&body)
                .unwrap_or_else(|| ChainError::Unavailable(format!("HTTP {status} from {}", self.base))));
        }
        serde_json::from_slice(&body).map_err(|e| ChainError::Unavailable(format!("bad response: {e}")))
    }

    pub fn mine_block(&self, reward_to: Address, timestamp: Option<u64>) -> Result<TipInfo, ChainError> {
        self.finish(
            self.client
                .post(format!("{}/mine", self.base))
                .json(&MineRequest { reward_to, timestamp })
                .send(),
        )
    }

    pub fn list_utxos(&self, address: &Address) -> Result<Vec<Utxo>, ChainError> {
        self.finish(self.client.get(format!("{}/utxos/{address}", self.base)).send())
    }
}

impl ChainAccess for RemoteChain {
    fn submit_tx(&self, tx: &Transaction) -> Result<Txid, ChainError> {
        let req = SubmitRequest {
            tx: hex::encode(tx.serialize()?),
        };
        let resp: SubmitResponse = self.finish(self.client.post(format!("{}/tx", self.base)).json(&req).send())?;
        Ok(resp.txid)
    }

    fn spendable_utxos(&self, address: &Address) -> Result<Vec<Utxo>, ChainError> {
        self.finish(
            self.client
                .get(format!("{}/utxos/{address}?view=spendable", self.base))
                .send(),
        )
    }

    fn scan_data_outputs(&self, from_height: u64, to_height: u64) -> Result<Vec<DataRecord>, ChainError> {
        self.finish(
            self.client
                .get(format!("{}/scan?from={from_height}&to={to_height}", self.base))
                .send(),
        )
    }

    fn tip(&self) -> Result<TipInfo, ChainError> {
        self.finish(self.client.get(format!("{}/tip", self.base)).send())
    }

    fn tx_height(&self, txid: &Txid) -> Result<Option<u64>, ChainError> {
        let status: TxStatus = self.finish(self.client.get(format!("{}/tx/{txid}", self.base)).send())?;
        Ok(status.height)
    }
}
