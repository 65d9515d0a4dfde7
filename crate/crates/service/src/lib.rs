//! HTTP facade over fair-opportunity scenarios: load a scenario into an
//! in-memory session, edit its feasibility constraints, solve, and fetch
//! tables or synthetic samples.

pub mod problem;
pub mod store;

use std::num::NonZeroUsize;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use feo_core::fixtures;
use feo_core::inference::feo_table;
use feo_core::network::{Network, NetworkDoc};
use feo_core::roles::{scenario_from_docs, RolesDoc};
use feo_core::sampler::{self, SampleRequest, GENERATOR};
use feo_core::solver::{parse_constraints, solve_scenario, MarginalConstraint, SolveMode};
use serde::Deserialize;
use serde_json::{json, Value};
use tracing::info;

use crate::problem::Problem;
use crate::store::{Session, SessionHandle, SessionStore, Solved};

/// Largest sample a single request may ask for.
pub const MAX_SAMPLE: u64 = 1_000_000;

#[derive(Debug, Clone)]
pub struct Config {
    pub capacity: NonZeroUsize,
    pub solve_timeout: Duration,
}

impl Default for Config {
    fn default() -> Self {
        Self { capacity: NonZeroUsize::new(64).expect("nonzero"), solve_timeout: Duration::from_secs(30) }
    }
}

#[derive(Clone)]
struct AppState {
    store: Arc<SessionStore>,
    solve_timeout: Duration,
}

pub fn app(config: Config) -> Router {
    let state = AppState { store: Arc::new(SessionStore::new(config.capacity)), solve_timeout: config.solve_timeout };
    Router::new()
        .route("/v1/fixtures", get(list_fixtures))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}/tables", get(get_tables))
        .route("/v1/sessions/{id}/constraints", put(put_constraints))
        .route("/v1/sessions/{id}/solve", post(post_solve))
        .route("/v1/sessions/{id}/sample", get(get_sample))
        .fallback(|| async { Problem::new(StatusCode::NOT_FOUND, "NotFound", "no such endpoint") })
        .with_state(state)
}

type Reply = Result<Response, Problem>;

fn parse_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, Problem> {
    serde_json::from_slice(body).map_err(|e| Problem::bad_request("Parse", format!("invalid JSON body: {e}")))
}

fn etag(revision: u64) -> (header::HeaderName, HeaderValue) {
    (header::ETAG, HeaderValue::from_str(&format!("\"{revision}\"")).expect("ascii"))
}

fn session(state: &AppState, id: &str) -> Result<SessionHandle, Problem> {
    state
        .store
        .get(id)
        .ok_or_else(|| Problem::new(StatusCode::NOT_FOUND, "UnknownSession", format!("no session {id}")))
}

/// Runs blocking work on the pool. Work that has not finished by the
/// configured deadline, or finishes after it, fails with 504.
async fn blocking<T: Send + 'static>(state: &AppState, work: impl FnOnce() -> T + Send + 'static) -> Result<T, Problem> {
    let start = Instant::now();
    let timed_out = || {
        Problem::new(StatusCode::GATEWAY_TIMEOUT, "Timeout", format!("gave up after {:?}", state.solve_timeout))
    };
    match tokio::time::timeout(state.solve_timeout, tokio::task::spawn_blocking(work)).await {
        Ok(Ok(_)) if start.elapsed() > state.solve_timeout => Err(timed_out()),
        Ok(Ok(v)) => Ok(v),
        Ok(Err(e)) => Err(Problem::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string())),
        Err(_) => Err(timed_out()),
    }
}

async fn list_fixtures() -> Json<Value> {
    Json(json!(fixtures::list()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    fixture: Option<String>,
    network: Option<Value>,
    roles: Option<Value>,
    constraints: Option<Value>,
}

/// Constraints must parse, carry valid bounds and name known states.
fn check_constraints(network: &Network, value: &Value) -> Result<Vec<MarginalConstraint>, Problem> {
    let constraints = parse_constraints(&value.to_string())?;
    for c in &constraints {
        c.bounds()?;
        network.evidence(&c.event)?;
    }
    Ok(constraints)
}

fn network_from(value: &Value) -> Result<Network, Problem> {
    let doc = NetworkDoc::from_json(&value.to_string())?;
    let report = doc.validate();
    if let Some(first) = report.issues.first() {
        return Err(Problem::bad_request(first.kind(), first.to_string()).with("issues", report.to_json()["issues"].clone()));
    }
    Ok(Network::from_doc(&doc)?)
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Reply {
    let req: CreateSession = parse_json(&body)?;
    let session = blocking(&state, move || -> Result<Session, Problem> {
        let (network, roles, mut constraints) = match (&req.fixture, &req.network) {
            (Some(_), Some(_)) => return Err(Problem::bad_request("Usage", "give either fixture or network, not both")),
            (Some(name), None) => {
                let f = fixtures::get(name)?;
                (f.network()?, f.roles(), f.constraints())
            }
            (None, Some(net)) => {
                let network = network_from(net)?;
                let roles = req.roles.as_ref().ok_or_else(|| Problem::bad_request("MissingRoles", "a roles document is required"))?;
                (network, RolesDoc::from_json(&roles.to_string())?, Vec::new())
            }
            (None, None) => return Err(Problem::bad_request("Usage", "give a fixture name or a network document")),
        };
        if let Some(value) = &req.constraints {
            constraints = check_constraints(&network, value)?;
        }
        let scenario = scenario_from_docs(&network, &roles)?;
        let pre = feo_table(&scenario)?;
        Ok(Session::new(scenario, pre, constraints))
    })
    .await??;
    let id = state.store.insert(session);
    info!(session = %id, "session created");
    let location = HeaderValue::from_str(&format!("/v1/sessions/{id}")).expect("ascii");
    Ok((StatusCode::CREATED, [(header::LOCATION, location), etag(0)], Json(json!({ "id": id, "revision": 0 }))).into_response())
}

async fn get_tables(State(state): State<AppState>, Path(id): Path<String>) -> Reply {
    let handle = session(&state, &id)?;
    let s = handle.lock().await;
    let mut body = json!({
        "id": id,
        "revision": s.revision,
        "pre": s.pre,
        "pre_deviation": s.pre.deviation(),
    });
    if let Some(solved) = s.current() {
        body["post"] = json!(solved.outcome.post);
        body["post_deviation"] = json!(solved.outcome.post.deviation());
        body["status"] = json!(solved.report.status);
        body["solution_revision"] = json!(solved.revision);
    }
    Ok(([etag(s.revision)], Json(body)).into_response())
}

/// Revision named by an `If-Match` header, with or without entity-tag quotes.
fn if_match(headers: &HeaderMap) -> Result<Option<u64>, Problem> {
    let Some(value) = headers.get(header::IF_MATCH) else { return Ok(None) };
    let text = value.to_str().unwrap_or("").trim();
    let text = text.strip_prefix("W/").unwrap_or(text).trim_matches('"');
    text.parse()
        .map(Some)
        .map_err(|_| Problem::bad_request("InvalidPrecondition", format!("If-Match {text:?} is not a revision")))
}

async fn put_constraints(State(state): State<AppState>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> Reply {
    let handle = session(&state, &id)?;
    let expected = if_match(&headers)?;
    let value: Value = parse_json(&body)?;
    let mut s = handle.lock().await;
    if let Some(rev) = expected.filter(|&r| r != s.revision) {
        return Err(Problem::new(
            StatusCode::CONFLICT,
            "StaleRevision",
            format!("revision {rev} is stale; current revision is {}", s.revision),
        )
        .with("revision", json!(s.revision)));
    }
    let constraints = check_constraints(s.scenario.network(), &value)?;
    let count = constraints.len();
    s.replace_constraints(constraints);
    info!(session = %id, revision = s.revision, "constraints replaced");
    Ok(([etag(s.revision)], Json(json!({ "id": id, "revision": s.revision, "constraints": count }))).into_response())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveRequest {
    #[serde(default)]
    mode: Option<String>,
}

async fn post_solve(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Reply {
    let handle = session(&state, &id)?;
    let req: SolveRequest = if body.iter().all(u8::is_ascii_whitespace) { SolveRequest::default() } else { parse_json(&body)? };
    let mode: SolveMode = match req.mode.as_deref() {
        None => SolveMode::Auto,
        Some(m) => m.parse().map_err(|e: String| Problem::bad_request("InvalidMode", e))?,
    };
    // the session stays locked for the whole solve, so constraints cannot move underneath it
    let mut s = handle.lock().await;
    let scenario = s.scenario.clone();
    let constraints = s.constraints.clone();
    let outcome = blocking(&state, move || solve_scenario(&scenario, &constraints, mode)).await??;
    let report = outcome.report(&s.scenario);
    let revision = s.revision;
    let mut body = serde_json::to_value(&report).expect("report serializes");
    body["revision"] = json!(revision);
    info!(session = %id, revision, status = ?report.status, "solved");
    s.solved = Some(Solved { revision, outcome, report });
    Ok(([etag(revision)], Json(body)).into_response())
}

fn query_param(query: &str, key: &str) -> Option<String> {
    query.split('&').filter_map(|kv| kv.split_once('=')).find(|(k, _)| *k == key).map(|(_, v)| v.to_string())
}

async fn get_sample(State(state): State<AppState>, Path(id): Path<String>, RawQuery(query): RawQuery) -> Reply {
    let handle = session(&state, &id)?;
    let query = query.unwrap_or_default();
    let count = query_param(&query, "count")
        .ok_or_else(|| Problem::bad_request("InvalidCount", "count is required"))?
        .parse::<u64>()
        .ok()
        .filter(|c| (1..=MAX_SAMPLE).contains(c))
        .ok_or_else(|| Problem::bad_request("InvalidCount", format!("count must be between 1 and {MAX_SAMPLE}")))?;
    let seed = match query_param(&query, "seed") {
        None => 0,
        Some(s) => s.parse::<u64>().map_err(|_| Problem::bad_request("InvalidSeed", "seed must be an unsigned integer"))?,
    };
    let s = handle.lock().await;
    let solved = s.current().ok_or_else(|| {
        Problem::new(StatusCode::CONFLICT, "NotSolved", format!("revision {} has no solution; solve first", s.revision))
    })?;
    let network = solved.outcome.network.clone();
    let hash = sampler::network_hash(&network);
    let csv = blocking(&state, move || -> Result<Vec<u8>, Problem> {
        let data = sampler::sample(&network, &SampleRequest::new(count as usize, seed))?;
        let mut out = Vec::new();
        data.write_csv(&mut out).map_err(|e| Problem::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?;
        Ok(out)
    })
    .await??;
    let headers = [
        (header::CONTENT_TYPE, HeaderValue::from_static("text/csv")),
        (header::HeaderName::from_static("x-feo-generator"), HeaderValue::from_static(GENERATOR)),
        (header::HeaderName::from_static("x-feo-network-sha256"), HeaderValue::from_str(&hash).expect("hex")),
        (header::HeaderName::from_static("x-feo-seed"), HeaderValue::from(seed)),
    ];
    Ok((headers, csv).into_response())
}
