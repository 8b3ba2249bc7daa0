//! Thin async client for the `sarplan-service` HTTP API.

use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use sarplan_core::api::{
    ApiError, BudgetOverrides, ModelRequest, ModelResponse, PlanRequest, PlanResponse, ProfilesResponse,
    SweepRequest, SweepResponse, ValidateRequest, ValidateResponse,
};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),

    /// The service rejected the request.
    #[error("{}{}", .body.error, .body.pointer.as_deref().map(|p| format!(" (at {p})")).unwrap_or_default())]
    Api { status: StatusCode, body: ApiError },
}

impl ClientError {
    /// True when the service judged the input itself invalid.
    pub fn is_input_error(&self) -> bool {
        matches!(self, ClientError::Api { status, .. } if *status == StatusCode::UNPROCESSABLE_ENTITY)
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Clone, Debug)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn read<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let text = resp.text().await?;
        let body = serde_json::from_str(&text).unwrap_or(ApiError {
            error: text,
            pointer: None,
        });
        Err(ClientError::Api { status, body })
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        Self::read(self.http.get(format!("{}{path}", self.base)).send().await?).await
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        Self::read(self.http.post(format!("{}{path}", self.base)).json(body).send().await?).await
    }

    pub async fn health(&self) -> Result<Value> {
        self.get("/health").await
    }

    pub async fn profiles(&self) -> Result<ProfilesResponse> {
        self.get("/v1/profiles").await
    }

    pub async fn plan(&self, scenario: Value, budget: BudgetOverrides) -> Result<PlanResponse> {
        self.post("/v1/plan", &PlanRequest { scenario, budget }).await
    }

    pub async fn sweep(&self, scenario: Value, r_min: usize, r_max: usize, budget: BudgetOverrides) -> Result<SweepResponse> {
        self.post("/v1/sweep", &SweepRequest { scenario, r_min, r_max, budget }).await
    }

    pub async fn validate(&self, scenario: Value, plan: Value) -> Result<ValidateResponse> {
        self.post("/v1/validate", &ValidateRequest { scenario, plan }).await
    }

    pub async fn model(&self, scenario: Value, fleet_size: usize) -> Result<ModelResponse> {
        self.post("/v1/model", &ModelRequest { scenario, fleet_size }).await
    }
}
