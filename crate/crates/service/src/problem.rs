use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use feo_core::fixtures::FixtureError;
use feo_core::inference::InferenceError;
use feo_core::network::NetworkError;
use feo_core::roles::RoleError;
use feo_core::sampler::SamplerError;
use feo_core::solver::SolverError;
use serde_json::{json, Map, Value};

/// Error response rendered as an `application/problem+json` document.
#[derive(Debug)]
pub struct Problem {
    pub status: StatusCode,
    pub kind: String,
    pub detail: String,
    pub extensions: Map<String, Value>,
}

impl Problem {
    pub fn new(status: StatusCode, kind: impl Into<String>, detail: impl Into<String>) -> Self {
        Self { status, kind: kind.into(), detail: detail.into(), extensions: Map::new() }
    }

    pub fn bad_request(kind: impl Into<String>, detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, kind, detail)
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.extensions.insert(key.to_string(), value);
        self
    }

    pub fn body(&self) -> Value {
        let mut doc = json!({
            "type": format!("urn:feo:problem:{}", self.kind),
            "title": self.status.canonical_reason().unwrap_or("Error"),
            "status": self.status.as_u16(),
            "detail": self.detail,
            "kind": self.kind,
        });
        let obj = doc.as_object_mut().expect("object");
        for (k, v) in &self.extensions {
            obj.insert(k.clone(), v.clone());
        }
        doc
    }
}

impl IntoResponse for Problem {
    fn into_response(self) -> Response {
        let body = self.body().to_string();
        (self.status, [(header::CONTENT_TYPE, "application/problem+json")], body).into_response()
    }
}

impl From<NetworkError> for Problem {
    fn from(e: NetworkError) -> Self {
        Self::bad_request(e.kind(), e.to_string())
    }
}

impl From<RoleError> for Problem {
    fn from(e: RoleError) -> Self {
        Self::bad_request(e.kind(), e.to_string())
    }
}

impl From<InferenceError> for Problem {
    fn from(e: InferenceError) -> Self {
        Self::bad_request(e.kind(), e.to_string())
    }
}

impl From<SolverError> for Problem {
    fn from(e: SolverError) -> Self {
        let status = if e.is_infeasible() {
            StatusCode::CONFLICT
        } else if matches!(e, SolverError::ValidationFailed(_)) {
            StatusCode::INTERNAL_SERVER_ERROR
        } else {
            StatusCode::BAD_REQUEST
        };
        let p = Self::new(status, e.kind(), e.to_string());
        match e {
            SolverError::InfeasibleConstraints { conflict } => p.with("conflict", json!(conflict)),
            _ => p,
        }
    }
}

impl From<SamplerError> for Problem {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::Io(_) => Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.kind(), e.to_string()),
            _ => Self::bad_request(e.kind(), e.to_string()),
        }
    }
}

impl From<FixtureError> for Problem {
    fn from(e: FixtureError) -> Self {
        match e {
            FixtureError::Unknown(_) => Self::new(StatusCode::NOT_FOUND, e.kind(), e.to_string()),
            FixtureError::DataUnavailable { .. } => Self::new(StatusCode::SERVICE_UNAVAILABLE, e.kind(), e.to_string()),
            FixtureError::Network(e) => e.into(),
            FixtureError::Roles(e) => e.into(),
            FixtureError::Solver(e) => e.into(),
            FixtureError::Learning(e) => Self::bad_request(e.kind(), e.to_string()),
        }
    }
}
