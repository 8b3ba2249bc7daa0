//! Request and response bodies of the HTTP service, shared by server and
//! client.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::energy::{comparison_table, quadruped_component_table, total_centiwatts, ComponentGroup, EnergyProfile};
use crate::planner::{MissionPlanResult, SweepPoint};
use crate::solver::{SolveBudget, SolveMode};
use crate::validator::ExplorationTrace;

/// Command-line style budget overrides applied on top of the scenario's
/// budget.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetOverrides {
    pub mode: Option<SolveMode>,
    pub max_nodes: Option<u64>,
    pub wall_seconds: Option<f64>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
}

impl BudgetOverrides {
    pub fn apply(&self, mut b: SolveBudget) -> SolveBudget {
        if let Some(m) = self.mode {
            b.mode = m;
        }
        if let Some(n) = self.max_nodes {
            b.max_nodes = n;
        }
        if let Some(s) = self.wall_seconds {
            b.wall_seconds = s;
        }
        if let Some(w) = self.workers {
            b.workers = w;
        }
        if let Some(s) = self.seed {
            b.seed = s;
        }
        if let Some(r) = self.restarts {
            b.restarts = r;
        }
        b
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRequest {
    /// Scenario document, validated by the server.
    pub scenario: Value,
    #[serde(default)]
    pub budget: BudgetOverrides,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanResponse {
    pub result: MissionPlanResult,
    /// Replay of the attached plan, if any.
    pub trace: Option<ExplorationTrace>,
    /// Solver events of each ladder rung, tagged with `fleet_size`.
    pub events: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    pub scenario: Value,
    pub r_min: usize,
    pub r_max: usize,
    #[serde(default)]
    pub budget: BudgetOverrides,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResponse {
    pub err: f64,
    pub epoch_s: f64,
    pub points: Vec<SweepPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateRequest {
    pub scenario: Value,
    /// A plan result document as written by `plan`.
    pub plan: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidateResponse {
    pub clean: bool,
    pub trace: ExplorationTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRequest {
    pub scenario: Value,
    pub fleet_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub variables: usize,
    pub constraints: usize,
    /// Canonical text form of the model.
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentEntry {
    pub group: ComponentGroup,
    pub element: String,
    pub watts: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub element: String,
    pub quadruped_w: f64,
    pub wheeled_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilesResponse {
    pub profiles: Vec<EnergyProfile>,
    pub quadruped_components: Vec<ComponentEntry>,
    pub comparison: Vec<ComparisonEntry>,
    pub quadruped_total_w: f64,
    pub wheeled_total_w: f64,
}

impl ProfilesResponse {
    pub fn builtin() -> Self {
        let comparison = comparison_table();
        Self {
            profiles: crate::energy::RobotKind::ALL
                .into_iter()
                .map(crate::energy::builtin_profile)
                .collect(),
            quadruped_components: quadruped_component_table()
                .iter()
                .map(|r| ComponentEntry {
                    group: r.group,
                    element: r.element.into(),
                    watts: r.watts,
                })
                .collect(),
            quadruped_total_w: total_centiwatts(comparison.iter().map(|r| r.quadruped_w)) as f64 / 100.0,
            wheeled_total_w: total_centiwatts(comparison.iter().map(|r| r.wheeled_w)) as f64 / 100.0,
            comparison: comparison
                .iter()
                .map(|r| ComparisonEntry {
                    element: r.element.into(),
                    quadruped_w: r.quadruped_w,
                    wheeled_w: r.wheeled_w,
                })
                .collect(),
        }
    }
}

/// Error body for every non-2xx response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub error: String,
    /// JSON pointer into the request's scenario, when the error has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointer: Option<String>,
}
