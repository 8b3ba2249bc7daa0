//! Fleet-size ladder: solve for one robot count after another, smallest
//! first, until a plan meets the exploration target within the response time
//! or the available fleet runs out.

use serde::{Deserialize, Serialize};

use crate::energy::{Energy, EnergyProfile};
use crate::error::{Error, Result};
use crate::grid::{build_grid, Cell, GridMap};
use crate::model::{RobotSpec, RpInstance, Solution};
use crate::solver::{
    self, fleet_lower_bound, greedy_paths, FleetBound, SolveBudget, SolveMode, SolveOutcome, SolveStatus,
    SolverEvent, UnknownReason,
};

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissionRequest {
    pub area_width_m: f64,
    pub area_height_m: f64,
    /// Required exploration rate in `(0, 1]`.
    pub err: f64,
    /// Target response time in seconds.
    pub trt_s: f64,
    /// Robots available.
    pub tfs: usize,
    pub speed_mps: f64,
    pub epoch_s: f64,
    pub base_station: Cell,
    /// Robot `i` starts at `start_cells[i % len]`; empty means the base station.
    #[serde(default)]
    pub start_cells: Vec<Cell>,
    pub profile: EnergyProfile,
    /// Defaults to a full battery.
    #[serde(default)]
    pub initial_battery_j: Option<f64>,
    #[serde(default = "one")]
    pub terrain_factor: f64,
}

impl MissionRequest {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.err > 0.0 && self.err <= 1.0) {
            return bad(format!("err must be in (0, 1], got {}", self.err));
        }
        if self.tfs == 0 {
            return bad("tfs must be at least 1".into());
        }
        if !(self.epoch_s.is_finite() && self.epoch_s > 0.0) {
            return bad(format!("epoch_s must be > 0, got {}", self.epoch_s));
        }
        if !(self.trt_s.is_finite() && self.trt_s >= self.epoch_s) {
            return bad(format!("trt_s must be at least one epoch ({} s), got {}", self.epoch_s, self.trt_s));
        }
        self.profile.validate()?;
        if let Some(b) = self.initial_battery_j {
            if !(b > 0.0 && b <= self.profile.battery_capacity_j) {
                return bad(format!("initial_battery_j must be in (0, {}], got {b}", self.profile.battery_capacity_j));
            }
        }
        let grid = self.grid()?;
        for (i, c) in self.start_cells.iter().enumerate() {
            if !grid.contains(*c) {
                return bad(format!("start cell {i} at {c} lies outside the grid"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridMap> {
        build_grid(self.area_width_m, self.area_height_m, self.speed_mps, self.epoch_s, self.base_station)?
            .with_terrain_factor(self.terrain_factor)
    }

    /// Epochs available, `floor(trt / epoch)`.
    pub fn horizon(&self) -> usize {
        (self.trt_s / self.epoch_s + 1e-9).floor() as usize
    }

    pub fn initial_battery(&self) -> Energy {
        self.initial_battery_j
            .map(Energy::from_joules)
            .unwrap_or_else(|| self.profile.battery_capacity())
    }

    pub fn start_of(&self, robot: usize) -> Cell {
        if self.start_cells.is_empty() {
            self.base_station
        } else {
            self.start_cells[robot % self.start_cells.len()]
        }
    }

    fn colocated(&self) -> bool {
        let mut s = self.start_cells.clone();
        s.sort();
        s.dedup();
        s.len() <= 1
    }

    pub fn instance(&self, robots: usize) -> Result<RpInstance> {
        let grid = self.grid()?;
        let specs = (0..robots)
            .map(|id| RobotSpec {
                id,
                profile: self.profile.clone(),
                start: self.start_of(id),
                initial_battery: self.initial_battery(),
            })
            .collect();
        RpInstance::new(grid, self.horizon(), self.epoch_s, specs, self.err, self.speed_mps)
    }

    pub fn fleet_bound(&self) -> Result<FleetBound> {
        Ok(fleet_lower_bound(
            &self.grid()?,
            self.err,
            self.horizon(),
            &self.profile,
            self.initial_battery(),
            self.epoch_s,
            self.colocated(),
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Planned,
    InfeasibleWithinTfs,
    /// A solver ran out of budget before deciding some fleet size.
    Inconclusive,
}

/// One rung of the fleet-size ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderStep {
    pub fleet_size: usize,
    pub mode: SolveMode,
    pub status: SolveStatus,
    pub objective: Option<usize>,
    pub bound: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unknown_reason: Option<UnknownReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasibility: Option<String>,
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotPlan {
    pub id: usize,
    /// `[epoch, a, b]`, epochs numbered from 1.
    pub path: Vec<[usize; 3]>,
    pub battery_j: Vec<Energy>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanDetails {
    pub fleet_size: usize,
    /// Epochs until the target is met, counting the start epoch.
    pub completion_epochs: Option<usize>,
    pub completion_time_s: Option<f64>,
    pub explored_cells: usize,
    pub explored_rate: f64,
    /// Explored fraction at each epoch.
    pub explored_rate_series: Vec<f64>,
    pub robots: Vec<RobotPlan>,
}

impl PlanDetails {
    pub fn from_solution(inst: &RpInstance, sol: &Solution) -> Self {
        let counts = sol.explored_counts();
        let total = inst.grid.total_cells() as f64;
        let completion = sol.completion_epoch(inst.required_cells()).map(|t| t + 1);
        let paths = sol.paths(&inst.grid);
        let robots = paths
            .iter()
            .zip(&sol.battery)
            .enumerate()
            .map(|(id, (p, b))| RobotPlan {
                id,
                path: p.iter().enumerate().map(|(t, c)| [t + 1, c.a, c.b]).collect(),
                battery_j: b.clone(),
            })
            .collect();
        let last = *counts.last().unwrap_or(&0);
        Self {
            fleet_size: inst.num_robots(),
            completion_epochs: completion,
            completion_time_s: completion.map(|k| k as f64 * inst.epoch_duration),
            explored_cells: last,
            explored_rate: last as f64 / total,
            explored_rate_series: counts.iter().map(|&k| k as f64 / total).collect(),
            robots,
        }
    }

    /// Paths as cells, in robot order.
    pub fn cell_paths(&self) -> Vec<Vec<Cell>> {
        self.robots
            .iter()
            .map(|r| r.path.iter().map(|&[_, a, b]| Cell::new(a, b)).collect())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissionPlanResult {
    pub status: PlanStatus,
    /// Smallest qualifying fleet, when one was found.
    pub fleet_size: Option<usize>,
    pub tfs: usize,
    pub horizon_epochs: usize,
    pub epoch_s: f64,
    pub grid_width: usize,
    pub grid_height: usize,
    pub cell_size_m: f64,
    pub total_cells: usize,
    pub required_cells: usize,
    pub fleet_bound: FleetBound,
    /// The plan, or on failure the best attempt (most cells explored, then
    /// earliest, then fewest robots).
    pub plan: Option<PlanDetails>,
    pub ladder: Vec<LadderStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasibility_reason: Option<String>,
    /// Solver events of every rung, in order.
    #[serde(skip)]
    pub events: Vec<(usize, SolverEvent)>,
}

fn step(r: usize, out: &SolveOutcome) -> LadderStep {
    LadderStep {
        fleet_size: r,
        mode: out.mode,
        status: out.status,
        objective: out.objective(),
        bound: out.bound,
        unknown_reason: out.unknown_reason,
        infeasibility: out.infeasibility.clone(),
        nodes: out.stats.nodes,
    }
}

/// Greedy plan that keeps exploring past the target, used as a fallback.
pub fn relaxed_plan(req: &MissionRequest, robots: usize) -> Result<PlanDetails> {
    let inst = req.instance(robots)?;
    let paths = greedy_paths(&inst, true);
    let sol = Solution::from_paths(&inst, &paths)?;
    Ok(PlanDetails::from_solution(&inst, &sol))
}

fn better_attempt(new: &PlanDetails, old: &PlanDetails) -> bool {
    let first_at = |p: &PlanDetails| {
        p.explored_rate_series
            .iter()
            .position(|&x| x >= p.explored_rate)
            .unwrap_or(usize::MAX)
    };
    new.explored_cells > old.explored_cells
        || (new.explored_cells == old.explored_cells && first_at(new) < first_at(old))
}

/// Walks fleet sizes from the lower bound up to `tfs`.
pub fn plan_mission(req: &MissionRequest, budget: &SolveBudget) -> Result<MissionPlanResult> {
    req.validate()?;
    budget.validate()?;
    let grid = req.grid()?;
    let bound = req.fleet_bound()?;
    let mut result = MissionPlanResult {
        status: PlanStatus::InfeasibleWithinTfs,
        fleet_size: None,
        tfs: req.tfs,
        horizon_epochs: req.horizon(),
        epoch_s: req.epoch_s,
        grid_width: grid.width_cells(),
        grid_height: grid.height_cells(),
        cell_size_m: grid.cell_size(),
        total_cells: grid.total_cells(),
        required_cells: crate::model::required_cells(req.err, grid.total_cells()),
        fleet_bound: bound,
        plan: None,
        ladder: Vec::new(),
        infeasibility_reason: None,
        events: Vec::new(),
    };

    let first = bound.min_robots.max(1);
    if first > req.tfs {
        let inst = req.instance(req.tfs)?;
        result.infeasibility_reason = Some(
            solver::counting_infeasibility(&inst).unwrap_or_else(|| {
                format!(
                    "fleet bound: at least {} robots are needed (coverage {}, energy {}), only {} available",
                    bound.min_robots, bound.coverage, bound.energy, req.tfs
                )
            }),
        );
        result.plan = Some(relaxed_plan(req, req.tfs)?);
        return Ok(result);
    }

    let mut best: Option<PlanDetails> = None;
    let mut reasons = Vec::new();
    for r in first..=req.tfs {
        let inst = req.instance(r)?;
        let out = solver::solve(&inst, budget)?;
        result.ladder.push(step(r, &out));
        result.events.extend(out.events.iter().cloned().map(|e| (r, e)));
        match (&out.status, &out.solution) {
            (SolveStatus::Optimal | SolveStatus::Feasible, Some(sol)) => {
                result.status = PlanStatus::Planned;
                result.fleet_size = Some(r);
                result.plan = Some(PlanDetails::from_solution(&inst, sol));
                return Ok(result);
            }
            (SolveStatus::Unknown, _) if out.unknown_reason == Some(UnknownReason::BudgetExhausted) => {
                result.status = PlanStatus::Inconclusive;
                result.plan = Some(relaxed_plan(req, r)?);
                result.infeasibility_reason = Some(format!("solver budget exhausted at {r} robot(s)"));
                return Ok(result);
            }
            _ => {
                if let Some(why) = &out.infeasibility {
                    reasons.push(format!("{r} robot(s): {why}"));
                } else {
                    reasons.push(format!("{r} robot(s): no plan found"));
                }
                let attempt = relaxed_plan(req, r)?;
                if best.as_ref().is_none_or(|b| better_attempt(&attempt, b)) {
                    best = Some(attempt);
                }
            }
        }
    }
    result.plan = best;
    result.infeasibility_reason = Some(reasons.join("; "));
    Ok(result)
}

/// Explored-rate curve for one fleet size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub fleet_size: usize,
    pub status: Option<SolveStatus>,
    /// Whether the target was met within the horizon.
    pub met_target: bool,
    /// `solver` when the curve comes from a solved plan, `relaxed_greedy`
    /// when it comes from the fallback plan.
    pub source: String,
    pub explored_rate_series: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Curves for each fleet size in `r_min..=r_max`; failures are recorded per
/// point and do not stop the sweep.
pub fn sweep_fleet(req: &MissionRequest, budget: &SolveBudget, r_min: usize, r_max: usize) -> Result<Vec<SweepPoint>> {
    req.validate()?;
    budget.validate()?;
    if r_min == 0 || r_min > r_max {
        return Err(Error::InvalidInput(format!("fleet range {r_min}..{r_max} is empty or starts at 0")));
    }
    let mut points = Vec::new();
    for r in r_min..=r_max {
        let point = match req.instance(r).and_then(|inst| solver::solve(&inst, budget).map(|o| (inst, o))) {
            Ok((inst, out)) => match (&out.solution, out.has_solution()) {
                (Some(sol), true) => {
                    let d = PlanDetails::from_solution(&inst, sol);
                    SweepPoint {
                        fleet_size: r,
                        status: Some(out.status),
                        met_target: true,
                        source: "solver".into(),
                        explored_rate_series: d.explored_rate_series,
                        error: None,
                    }
                }
                _ => match relaxed_plan(req, r) {
                    Ok(d) => SweepPoint {
                        fleet_size: r,
                        status: Some(out.status),
                        met_target: false,
                        source: "relaxed_greedy".into(),
                        explored_rate_series: d.explored_rate_series,
                        error: out.infeasibility.clone(),
                    },
                    Err(e) => failed(r, Some(out.status), e),
                },
            },
            Err(e) => failed(r, None, e),
        };
        points.push(point);
    }
    Ok(points)
}

/// One curve: `epoch, explored_pct`.
pub fn write_curve_csv<W: std::io::Write>(point: &SweepPoint, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "explored_pct"]).map_err(csv_err)?;
    for (t, x) in point.explored_rate_series.iter().enumerate() {
        w.write_record([(t + 1).to_string(), format!("{:.6}", 100.0 * x)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// All curves in long format: `fleet_size, epoch, explored_pct, met_target, source`.
pub fn write_sweep_csv<W: std::io::Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["fleet_size", "epoch", "explored_pct", "met_target", "source"])
        .map_err(csv_err)?;
    for p in points {
        for (t, x) in p.explored_rate_series.iter().enumerate() {
            w.write_record([
                p.fleet_size.to_string(),
                (t + 1).to_string(),
                format!("{:.6}", 100.0 * x),
                p.met_target.to_string(),
                p.source.clone(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn failed(r: usize, status: Option<SolveStatus>, e: Error) -> SweepPoint {
    SweepPoint {
        fleet_size: r,
        status,
        met_target: false,
        source: "none".into(),
        explored_rate_series: Vec::new(),
        error: Some(e.to_string()),
    }
}
