//! Solvers for a single fleet size.
//!
//! * exact: depth-first branch-and-bound over joint robot moves, one robot
//!   decision per tree level, with dominance memoization per epoch.
//! * heuristic: greedy frontier assignment.
//! * auto: exact for instances with `R * T * |AB| <= 10_000`.
//!
//! Every solution returned here is a [`Solution`] that passes
//! [`crate::model::evaluate`].

pub mod bounds;
mod exact;
mod heuristic;
pub mod oracle;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::energy::{epoch_energy, Energy};
use crate::error::Result;
use crate::grid::Move;
use crate::model::{RpInstance, Solution};

pub use bounds::{counting_infeasibility, fleet_lower_bound, FleetBound};
pub use heuristic::greedy_paths;
pub use oracle::brute_force_oracle;

/// Largest `R * T * |AB|` that `auto` mode hands to the exact search.
pub const AUTO_EXACT_LIMIT: usize = 10_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Exact,
    Heuristic,
    #[default]
    Auto,
}

impl std::str::FromStr for SolveMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(SolveMode::Exact),
            "heuristic" => Ok(SolveMode::Heuristic),
            "auto" => Ok(SolveMode::Auto),
            other => Err(format!("unknown mode {other:?}, expected exact|heuristic|auto")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveBudget {
    pub mode: SolveMode,
    pub max_nodes: u64,
    pub wall_seconds: f64,
    /// `0` uses every available core.
    pub workers: usize,
    pub seed: u64,
    /// Extra heuristic passes with shuffled robot order.
    pub restarts: usize,
}

impl Default for SolveBudget {
    fn default() -> Self {
        Self {
            mode: SolveMode::Auto,
            max_nodes: 50_000_000,
            wall_seconds: 60.0,
            workers: 0,
            seed: 0,
            restarts: 0,
        }
    }
}

impl SolveBudget {
    pub fn validate(&self) -> crate::error::Result<()> {
        if self.max_nodes == 0 || self.wall_seconds.is_nan() || self.wall_seconds <= 0.0 {
            return Err(crate::error::Error::InvalidInput(
                "solver budget limits must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn wall_limit(&self) -> Duration {
        Duration::from_secs_f64(self.wall_seconds)
    }

    pub fn worker_count(&self) -> usize {
        if self.workers == 0 {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        } else {
            self.workers
        }
    }

    /// Mode actually used for `inst`.
    pub fn resolve_mode(&self, inst: &RpInstance) -> SolveMode {
        match self.mode {
            SolveMode::Auto => {
                let size = inst.num_robots() * inst.horizon * inst.grid.total_cells();
                if size <= AUTO_EXACT_LIMIT {
                    SolveMode::Exact
                } else {
                    SolveMode::Heuristic
                }
            }
            m => m,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    ProvablyInfeasible,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownReason {
    /// Node or wall-clock budget ran out before the search finished.
    BudgetExhausted,
    /// The heuristic found no plan meeting the target; nothing is proven.
    HeuristicFailed,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub memo_hits: u64,
    pub incumbent_updates: u64,
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// Structured solver trace, one JSON object per event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SolverEvent {
    Start {
        mode: SolveMode,
        robots: usize,
        horizon: usize,
        cells: usize,
        required: usize,
        root_bound: Option<usize>,
    },
    Incumbent {
        source: String,
        objective: usize,
        nodes: u64,
    },
    Finish {
        status: SolveStatus,
        objective: Option<usize>,
        bound: Option<usize>,
        nodes: u64,
        memo_hits: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub mode: SolveMode,
    pub solution: Option<Solution>,
    /// Lower bound on the objective; `None` when infeasible.
    pub bound: Option<usize>,
    pub unknown_reason: Option<UnknownReason>,
    /// Human-readable justification for infeasibility.
    pub infeasibility: Option<String>,
    pub stats: SolveStats,
    pub events: Vec<SolverEvent>,
}

impl SolveOutcome {
    pub fn objective(&self) -> Option<usize> {
        self.solution.as_ref().map(|s| s.objective)
    }

    pub fn has_solution(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Feasible)
    }

    /// Everything except timing, for determinism checks.
    pub fn same_result(&self, other: &SolveOutcome) -> bool {
        self.status == other.status
            && self.solution == other.solution
            && self.bound == other.bound
            && self.unknown_reason == other.unknown_reason
    }

    fn infeasible(mode: SolveMode, why: String, events: Vec<SolverEvent>) -> Self {
        Self {
            status: SolveStatus::ProvablyInfeasible,
            mode,
            solution: None,
            bound: None,
            unknown_reason: None,
            infeasibility: Some(why),
            stats: SolveStats::default(),
            events,
        }
    }
}

/// Per-robot energy tables in microjoules.
#[derive(Clone, Debug)]
pub(crate) struct RobotCosts {
    pub stay: i64,
    pub orthogonal: i64,
    pub diagonal: i64,
    /// Sensing plus transmission for entering an unexplored cell.
    pub gate: Vec<i64>,
    pub cheapest_step: i64,
    pub cheapest_explore: i64,
    /// Robots with equal class share every cost table.
    pub class: usize,
}

impl RobotCosts {
    pub fn step(&self, mv: Move) -> i64 {
        match mv {
            Move::Stay => self.stay,
            Move::Orthogonal => self.orthogonal,
            Move::Diagonal => self.diagonal,
        }
    }
}

/// Instance data flattened for the search loops.
#[derive(Clone, Debug)]
pub(crate) struct Prepared {
    pub width: usize,
    pub cells: usize,
    pub horizon: usize,
    pub need: usize,
    /// Moore neighborhoods by cell index, sorted, including the cell.
    pub neighbors: Vec<Vec<u32>>,
    pub robots: Vec<RobotCosts>,
    pub starts: Vec<u32>,
    pub batteries: Vec<i64>,
}

impl Prepared {
    pub fn new(inst: &RpInstance) -> Self {
        let grid = &inst.grid;
        let dt = inst.epoch_duration;
        let neighbors = grid
            .cells()
            .map(|c| grid.neighbors(c).into_iter().map(|n| grid.index(n) as u32).collect())
            .collect();
        let mut classes: Vec<&crate::energy::EnergyProfile> = Vec::new();
        let robots = inst
            .robots
            .iter()
            .map(|r| {
                let p = &r.profile;
                let class = match classes.iter().position(|q| *q == p) {
                    Some(i) => i,
                    None => {
                        classes.push(p);
                        classes.len() - 1
                    }
                };
                let origin = grid.base_station();
                let stay = epoch_energy(p, Move::Stay, false, origin, grid, dt).total.micro();
                let orthogonal = epoch_energy(p, Move::Orthogonal, false, origin, grid, dt).total.micro();
                let diagonal = epoch_energy(p, Move::Diagonal, false, origin, grid, dt).total.micro();
                let gate: Vec<i64> = grid
                    .cells()
                    .map(|c| {
                        let e = epoch_energy(p, Move::Orthogonal, true, c, grid, dt);
                        (e.sensing + e.tx).micro()
                    })
                    .collect();
                let cheapest_explore = orthogonal + gate.iter().copied().min().unwrap_or(0);
                RobotCosts {
                    stay,
                    orthogonal,
                    diagonal,
                    cheapest_step: stay.min(orthogonal),
                    cheapest_explore,
                    gate,
                    class,
                }
            })
            .collect();
        Self {
            width: grid.width_cells(),
            cells: grid.total_cells(),
            horizon: inst.horizon,
            need: inst.required_cells(),
            neighbors,
            robots,
            starts: inst.robots.iter().map(|r| grid.index(r.start) as u32).collect(),
            batteries: inst.robots.iter().map(|r| r.initial_battery.micro()).collect(),
        }
    }

    pub fn chebyshev(&self, x: u32, y: u32) -> usize {
        let (xa, xb) = (x as usize % self.width, x as usize / self.width);
        let (ya, yb) = (y as usize % self.width, y as usize / self.width);
        xa.abs_diff(ya).max(xb.abs_diff(yb))
    }

    pub fn move_kind(&self, from: u32, to: u32) -> Move {
        match self.chebyshev(from, to) {
            0 => Move::Stay,
            _ => {
                let same_row = from as usize / self.width == to as usize / self.width;
                let same_col = from as usize % self.width == to as usize % self.width;
                if same_row || same_col {
                    Move::Orthogonal
                } else {
                    Move::Diagonal
                }
            }
        }
    }

    /// Energy for robot `r` stepping `from -> to`; `unexplored` is the
    /// destination's state at the previous epoch.
    pub fn step_cost(&self, r: usize, from: u32, to: u32, unexplored: bool) -> i64 {
        let costs = &self.robots[r];
        let mut c = costs.step(self.move_kind(from, to));
        if unexplored {
            c += costs.gate[to as usize];
        }
        c
    }

    /// Explains why [`Prepared::root_bound`] found no completion epoch.
    pub fn energy_infeasibility(&self) -> String {
        let epochs = self.horizon.saturating_sub(1) as i64;
        for (r, costs) in self.robots.iter().enumerate() {
            let floor = epochs * costs.cheapest_step;
            if self.batteries[r] < floor {
                return format!(
                    "energy bound: robot {r} needs at least {} J to last {epochs} epochs at {} J per epoch (cheapest step), its battery holds {} J",
                    Energy::from_micro(floor),
                    Energy::from_micro(costs.cheapest_step),
                    Energy::from_micro(self.batteries[r])
                );
            }
        }
        let mut starts = self.starts.clone();
        starts.sort_unstable();
        starts.dedup();
        let paid: i64 = self
            .robots
            .iter()
            .zip(&self.batteries)
            .map(|(c, &b)| {
                let extra = c.cheapest_explore - c.cheapest_step;
                if extra <= 0 {
                    epochs
                } else {
                    epochs.min((b - epochs * c.cheapest_step) / extra)
                }
            })
            .sum();
        format!(
            "energy bound: the batteries pay for at most {paid} exploring epochs, {} new cells are needed",
            self.need.saturating_sub(starts.len())
        )
    }

    /// Root node: start cells explored, full initial batteries.
    pub fn root_bound(&self) -> Option<usize> {
        let mut starts = self.starts.clone();
        starts.sort_unstable();
        starts.dedup();
        let covered = (starts.len() >= self.need).then_some(0);
        bounds::completion_bound(self, 0, starts.len(), &self.batteries, covered)
    }
}

pub(crate) fn paths_to_solution(inst: &RpInstance, paths: &[Vec<u32>]) -> Result<Solution> {
    let cells: Vec<Vec<_>> = paths
        .iter()
        .map(|p| p.iter().map(|&i| inst.grid.cell(i as usize)).collect())
        .collect();
    Solution::from_paths(inst, &cells)
}

/// Solves one instance under `budget`.
pub fn solve(inst: &RpInstance, budget: &SolveBudget) -> Result<SolveOutcome> {
    inst.validate()?;
    budget.validate()?;
    let mode = budget.resolve_mode(inst);
    let prep = Prepared::new(inst);
    let root_bound = prep.root_bound();
    let mut events = vec![SolverEvent::Start {
        mode,
        robots: inst.num_robots(),
        horizon: inst.horizon,
        cells: prep.cells,
        required: prep.need,
        root_bound,
    }];
    let finish = |mut out: SolveOutcome, mut events: Vec<SolverEvent>| {
        events.push(SolverEvent::Finish {
            status: out.status,
            objective: out.objective(),
            bound: out.bound,
            nodes: out.stats.nodes,
            memo_hits: out.stats.memo_hits,
        });
        out.events = events;
        out
    };

    if let Some(why) = counting_infeasibility(inst) {
        return Ok(finish(SolveOutcome::infeasible(mode, why, Vec::new()), events));
    }
    let Some(root_bound) = root_bound else {
        let why = prep.energy_infeasibility();
        return Ok(finish(SolveOutcome::infeasible(mode, why, Vec::new()), events));
    };

    let out = match mode {
        SolveMode::Heuristic => heuristic::solve(inst, &prep, budget, root_bound, &mut events)?,
        _ => exact::solve(inst, &prep, budget, root_bound, &mut events)?,
    };
    Ok(finish(out, events))
}
