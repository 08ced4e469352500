//! JSON-over-HTTP service.
//!
//! Every request is answered from its body alone; the only state shared
//! between requests is the engine's memo cache.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use exactjack::dealer::{dealer_dist_p, dealer_dist_q};
use exactjack::expectation::{estimate_ew, expected_win, removal_effects};
use exactjack::{
    ActionEvaluation, CardValue, DealerDist, Deck, Error, GameExpectation, Measure, RemovalEffects, RemovalTable,
    Rules, SharedMemo, Solver,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cli::MAX_DEPTH;
use crate::json;

/// Default hit look-ahead for `/advise`.
pub const ADVISE_DEPTH: u8 = 4;

/// Hit entries kept before the cache is flushed.
const MAX_HIT_ENTRIES: usize = 8_000_000;

#[derive(Clone, Default)]
pub struct AppState {
    memo: Arc<SharedMemo>,
}

impl AppState {
    pub fn memo(&self) -> &SharedMemo {
        &self.memo
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/advise", post(advise))
        .route("/dealer-dist", post(dealer_dist))
        .route("/expected-win", post(expected_win_handler))
        .route("/removal-effects", post(removal_effects_handler))
        .with_state(state)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdviseRequest {
    /// Unseen cards: the upcard and the player's cards are already out.
    pub deck: Deck,
    pub rules: Rules,
    pub upcard: CardValue,
    pub player_cards: Vec<CardValue>,
    #[serde(default)]
    pub estimate: Option<EstimateInput>,
}

/// Asks `/advise` for a linear estimate of the shoe's expected win: the
/// cards removed so far are the fresh shoe of `initial_decks` minus `deck`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateInput {
    pub initial_decks: u32,
    /// Must hold a column for `initial_decks`, whose `base_ew` is used.
    pub removal_table: RemovalTable,
}

#[derive(Debug, Serialize)]
pub struct AdviseResponse {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<ActionEvaluation>,
    pub dealer_dist_q: DealerDist,
    pub is_player_natural: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payout: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ew_estimate: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DealerDistRequest {
    deck: Deck,
    rules: Rules,
    upcard: CardValue,
    #[serde(default = "default_measure")]
    measure: Measure,
}

fn default_measure() -> Measure {
    Measure::Q
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShoeRequest {
    deck: Deck,
    rules: Rules,
}

#[derive(Debug, Deserialize)]
struct DepthQuery {
    depth: Option<u8>,
}

/// Error body: `{code, field, message}`.
#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    pub code: &'static str,
    pub field: Option<String>,
    pub message: String,
}

impl ApiError {
    fn invalid(field: &str, message: impl Into<String>) -> ApiError {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "invalid-request",
            field: Some(field.to_string()),
            message: message.into(),
        }
    }
}

impl From<json::JsonError> for ApiError {
    fn from(e: json::JsonError) -> ApiError {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "invalid-json",
            field: e.field,
            message: e.message,
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> ApiError {
        let (status, code, field) = match e {
            Error::DegenerateCondition => (StatusCode::UNPROCESSABLE_ENTITY, "degenerate-condition", Some("deck")),
            Error::EmptyRank(_) => (StatusCode::BAD_REQUEST, "empty-rank", Some("deck")),
            Error::EmptyDeck => (StatusCode::BAD_REQUEST, "empty-deck", Some("deck")),
            Error::InvalidArgument(_) => (StatusCode::BAD_REQUEST, "invalid-argument", None),
        };
        ApiError {
            status,
            code,
            field: field.map(str::to_string),
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

/// Run engine work off the async executor.
async fn blocking<T, F>(state: AppState, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&SharedMemo) -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || {
        if state.memo.hit_entries() > MAX_HIT_ENTRIES {
            state.memo.clear_hits();
        }
        f(&state.memo)
    })
    .await
    .map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        code: "internal",
        field: None,
        message: e.to_string(),
    })?
    .map(Json)
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    Ok(json::parse(bytes)?)
}

async fn advise(
    State(state): State<AppState>,
    query: Result<Query<DepthQuery>, QueryRejection>,
    bytes: Bytes,
) -> ApiResult<AdviseResponse> {
    let depth = match query {
        Ok(Query(q)) => q.depth.unwrap_or(ADVISE_DEPTH),
        Err(e) => return Err(ApiError::invalid("depth", e.body_text())),
    };
    if depth > MAX_DEPTH {
        return Err(ApiError::invalid("depth", format!("depth must be at most {MAX_DEPTH}")));
    }
    let req: AdviseRequest = body(&bytes)?;
    if req.player_cards.len() < 2 {
        return Err(ApiError::invalid("player_cards", "a hand needs at least two cards"));
    }
    blocking(state, move |memo| advise_response(&req, depth, memo)).await
}

pub fn advise_response(req: &AdviseRequest, depth: u8, memo: &SharedMemo) -> Result<AdviseResponse, ApiError> {
    let solver = Solver::new(req.rules, memo).with_depth(depth);
    let dealer_dist_q = solver.dealer_q(req.upcard, &req.deck)?;
    let is_player_natural = matches!(req.player_cards.as_slice(), [a, b] if a.is_natural_with(*b));
    let (evaluation, payout) = if is_player_natural {
        (None, Some(1.5))
    } else {
        (Some(solver.evaluate_hand(&req.player_cards, req.upcard, &req.deck)?), None)
    };
    let ew_estimate = req.estimate.as_ref().map(|e| shoe_estimate(&req.deck, e)).transpose()?;
    Ok(AdviseResponse {
        evaluation,
        dealer_dist_q,
        is_player_natural,
        payout,
        ew_estimate,
    })
}

fn shoe_estimate(deck: &Deck, input: &EstimateInput) -> Result<f64, ApiError> {
    let initial = Deck::new(input.initial_decks).map_err(|e| ApiError::invalid("estimate.initial_decks", e.to_string()))?;
    let counts = deck
        .counts()
        .ok_or_else(|| ApiError::invalid("deck", "an estimate needs a finite deck"))?;
    let mut removed = Vec::new();
    for k in CardValue::ALL {
        let gone = initial
            .count(k)
            .checked_sub(counts[k.index()])
            .ok_or_else(|| ApiError::invalid("deck", format!("more cards of value {k} than the initial shoe holds")))?;
        removed.extend(std::iter::repeat_n(k, gone as usize));
    }
    let table = RemovalTable::new(input.removal_table.columns.clone())
        .map_err(|e| ApiError::invalid("estimate.removal_table", e.to_string()))?;
    let base = table
        .columns
        .iter()
        .find(|(n, _)| *n == input.initial_decks)
        .map(|(_, e)| e.base_ew)
        .ok_or_else(|| ApiError::invalid("estimate.initial_decks", "no removal table column for this shoe size"))?;
    Ok(estimate_ew(&initial, &removed, &table, base)?)
}

async fn dealer_dist(State(state): State<AppState>, bytes: Bytes) -> ApiResult<DealerDist> {
    let req: DealerDistRequest = body(&bytes)?;
    blocking(state, move |_| {
        Ok(match req.measure {
            Measure::P => dealer_dist_p(req.upcard, &req.deck, &req.rules)?,
            Measure::Q => dealer_dist_q(req.upcard, &req.deck, &req.rules)?,
        })
    })
    .await
}

async fn expected_win_handler(State(state): State<AppState>, bytes: Bytes) -> ApiResult<GameExpectation> {
    let req: ShoeRequest = body(&bytes)?;
    blocking(state, move |memo| Ok(expected_win(&Solver::new(req.rules, memo), &req.deck)?)).await
}

async fn removal_effects_handler(State(state): State<AppState>, bytes: Bytes) -> ApiResult<RemovalEffects> {
    let req: ShoeRequest = body(&bytes)?;
    blocking(state, move |memo| Ok(removal_effects(&Solver::new(req.rules, memo), &req.deck)?)).await
}
