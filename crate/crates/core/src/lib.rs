//! Fleet sizing and path planning for energy-limited search-and-rescue robots.
//!
//! The area is a grid of cells one epoch of travel wide. [`model`] states the
//! single-fleet-size problem, [`solver`] solves it, [`planner`] walks fleet
//! sizes upward until a plan exists and [`validator`] replays plans
//! independently.

pub mod api;
pub mod energy;
pub mod error;
pub mod grid;
pub mod model;
pub mod planner;
pub mod scenario;
pub mod solver;
pub mod validator;

pub use energy::{builtin_profile, Energy, EnergyProfile, RobotKind};
pub use error::{Error, Result};
pub use grid::{build_grid, Cell, GridMap, Move};
pub use model::{build_milp, evaluate, RpInstance, Solution};
pub use planner::{plan_mission, sweep_fleet, MissionPlanResult, MissionRequest, PlanStatus};
pub use scenario::ScenarioFile;
pub use solver::{solve, SolveBudget, SolveMode, SolveOutcome, SolveStatus};
pub use validator::{replay, ExplorationTrace};
