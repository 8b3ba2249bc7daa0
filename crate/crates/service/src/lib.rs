//! HTTP/JSON front end for the mission planner.
//!
//! | method | path           | body              | response           |
//! |--------|----------------|-------------------|--------------------|
//! | GET    | `/health`      |                   | `{"status":"ok"}`  |
//! | GET    | `/v1/profiles` |                   | `ProfilesResponse` |
//! | POST   | `/v1/plan`     | `PlanRequest`     | `PlanResponse`     |
//! | POST   | `/v1/sweep`    | `SweepRequest`    | `SweepResponse`    |
//! | POST   | `/v1/validate` | `ValidateRequest` | `ValidateResponse` |
//! | POST   | `/v1/model`    | `ModelRequest`    | `ModelResponse`    |
//!
//! Bad input answers 422 with an [`ApiError`] that carries a JSON pointer
//! when one is known. Solver work runs on the blocking thread pool.

use axum::body::Bytes;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use tokio::net::TcpListener;

use sarplan_core::api::{
    ApiError, ModelRequest, ModelResponse, PlanRequest, PlanResponse, ProfilesResponse, SweepRequest,
    SweepResponse, ValidateRequest, ValidateResponse,
};
use sarplan_core::model::build_milp;
use sarplan_core::planner::{plan_mission, sweep_fleet, MissionPlanResult};
use sarplan_core::scenario::ScenarioFile;
use sarplan_core::validator::replay;
use sarplan_core::Error;

pub struct Failure {
    status: StatusCode,
    body: ApiError,
}

impl Failure {
    fn unprocessable(error: String, pointer: Option<String>) -> Self {
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: ApiError { error, pointer },
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Scenario { pointer, message } => Self::unprocessable(message, Some(pointer)),
            Error::InvalidInput(_) | Error::DimensionMismatch(_) | Error::ProvablyInfeasible(_) => {
                Self::unprocessable(e.to_string(), None)
            }
            other => Self {
                status: StatusCode::INTERNAL_SERVER_ERROR,
                body: ApiError {
                    error: other.to_string(),
                    pointer: None,
                },
            },
        }
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type Reply<T> = Result<Json<T>, Failure>;

fn decode<T: DeserializeOwned>(body: &[u8]) -> Result<T, Failure> {
    let mut de = serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let pointer = if path == "." { None } else { Some(format!("/{}", path.replace('.', "/"))) };
        Failure::unprocessable(e.inner().to_string(), pointer)
    })
}

fn scenario(doc: Value) -> Result<ScenarioFile, Failure> {
    Ok(ScenarioFile::parse(&doc.to_string())?)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Failure> + Send + 'static) -> Result<T, Failure> {
    tokio::task::spawn_blocking(f).await.map_err(|e| Failure {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        body: ApiError {
            error: format!("worker failed: {e}"),
            pointer: None,
        },
    })?
}

async fn health() -> Json<Value> {
    Json(json!({"status": "ok", "version": env!("CARGO_PKG_VERSION")}))
}

async fn profiles() -> Json<ProfilesResponse> {
    Json(ProfilesResponse::builtin())
}

async fn plan(body: Bytes) -> Reply<PlanResponse> {
    let req: PlanRequest = decode(&body)?;
    let file = scenario(req.scenario)?;
    let mission = file.request()?;
    let budget = req.budget.apply(file.budget());
    blocking(move || {
        let result = plan_mission(&mission, &budget)?;
        let trace = match &result.plan {
            Some(p) => {
                let inst = mission.instance(p.fleet_size)?;
                let mut tr = replay(&inst, &p.cell_paths())?;
                tr.check_claims(p);
                Some(tr)
            }
            None => None,
        };
        let events = result
            .events
            .iter()
            .map(|(r, e)| {
                let mut v = serde_json::to_value(e).expect("events serialize");
                v["fleet_size"] = json!(r);
                v
            })
            .collect();
        Ok(Json(PlanResponse { result, trace, events }))
    })
    .await
}

async fn sweep(body: Bytes) -> Reply<SweepResponse> {
    let req: SweepRequest = decode(&body)?;
    let file = scenario(req.scenario)?;
    let mission = file.request()?;
    let budget = req.budget.apply(file.budget());
    blocking(move || {
        let points = sweep_fleet(&mission, &budget, req.r_min, req.r_max)?;
        Ok(Json(SweepResponse {
            err: mission.err,
            epoch_s: mission.epoch_s,
            points,
        }))
    })
    .await
}

async fn validate(body: Bytes) -> Reply<ValidateResponse> {
    let req: ValidateRequest = decode(&body)?;
    let file = scenario(req.scenario)?;
    let mission = file.request()?;
    let result: MissionPlanResult = serde_path_to_error::deserialize(req.plan).map_err(|e| {
        Failure::unprocessable(e.inner().to_string(), Some(format!("/plan/{}", e.path().to_string().replace('.', "/"))))
    })?;
    let Some(p) = result.plan else {
        return Err(Failure::unprocessable("plan document carries no plan".into(), Some("/plan/plan".into())));
    };
    blocking(move || {
        let inst = mission.instance(p.fleet_size)?;
        let mut trace = replay(&inst, &p.cell_paths())?;
        trace.check_claims(&p);
        Ok(Json(ValidateResponse {
            clean: trace.is_clean(),
            trace,
        }))
    })
    .await
}

async fn model(body: Bytes) -> Reply<ModelResponse> {
    let req: ModelRequest = decode(&body)?;
    let file = scenario(req.scenario)?;
    let mission = file.request()?;
    if req.fleet_size == 0 {
        return Err(Failure::unprocessable("fleet_size must be at least 1".into(), Some("/fleet_size".into())));
    }
    blocking(move || {
        let inst = mission.instance(req.fleet_size)?;
        let m = build_milp(&inst)?;
        Ok(Json(ModelResponse {
            variables: m.variables.len(),
            constraints: m.constraints.len(),
            text: m.to_canonical_text(),
        }))
    })
    .await
}

pub fn router() -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/profiles", get(profiles))
        .route("/v1/plan", post(plan))
        .route("/v1/sweep", post(sweep))
        .route("/v1/validate", post(validate))
        .route("/v1/model", post(model))
}

/// Serves [`router`] on `listener` until the task is dropped.
pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}
