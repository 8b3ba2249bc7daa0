//! Independent replay of robot paths.
//!
//! Exploration state and batteries are recomputed from the paths alone using
//! [`epoch_energy`]; nothing from the solver or the MILP is consulted.
//!
//! Trace CSV columns, in order: `epoch` (from 1), `explored_cells`,
//! `explored_pct`, then for each robot `r{i}_a`, `r{i}_b`, `r{i}_battery_J`.
//! Cost CSV (long format): `epoch, robot, a, b, rx_J, tx_J, sensing_J,
//! motion_J, idle_J, total_J`, one row per robot per epoch after the first.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::energy::{epoch_energy, Energy, EpochCost};
use crate::error::{Error, Result};
use crate::grid::{Cell, Move};
use crate::model::RpInstance;
use crate::planner::PlanDetails;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    /// Step between cells that are not Moore neighbors.
    Mobility,
    BatteryUnderflow,
    CoverageShortfall,
    /// A battery level claimed by the plan differs from the replay.
    BatteryMismatch,
    /// Claimed completion or explored count differs from the replay.
    ClaimMismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub kind: IssueKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robot: Option<usize>,
    /// Epoch numbered from 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epoch: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotEpoch {
    pub cell: Cell,
    pub battery: Energy,
    /// Energy spent reaching this epoch; zero at the first epoch.
    pub cost: EpochCost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub explored_cells: usize,
    pub explored_pct: f64,
    pub robots: Vec<RobotEpoch>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplorationTrace {
    pub total_cells: usize,
    pub required_cells: usize,
    /// Epochs until the target is met, counting the start epoch.
    pub completion_epochs: Option<usize>,
    pub epochs: Vec<EpochRecord>,
    pub violations: Vec<Issue>,
}

impl ExplorationTrace {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn final_explored(&self) -> usize {
        self.epochs.last().map_or(0, |e| e.explored_cells)
    }

    /// Battery levels per robot per epoch.
    pub fn batteries(&self) -> Vec<Vec<Energy>> {
        let r_len = self.epochs.first().map_or(0, |e| e.robots.len());
        (0..r_len)
            .map(|r| self.epochs.iter().map(|e| e.robots[r].battery).collect())
            .collect()
    }

    /// Records any difference between the plan's claims and the replay.
    pub fn check_claims(&mut self, plan: &PlanDetails) {
        if plan.completion_epochs != self.completion_epochs {
            self.violations.push(Issue {
                kind: IssueKind::ClaimMismatch,
                robot: None,
                epoch: None,
                detail: format!(
                    "plan claims completion after {:?} epochs, replay gives {:?}",
                    plan.completion_epochs, self.completion_epochs
                ),
            });
        }
        if plan.explored_cells != self.final_explored() {
            self.violations.push(Issue {
                kind: IssueKind::ClaimMismatch,
                robot: None,
                epoch: None,
                detail: format!(
                    "plan claims {} explored cells, replay gives {}",
                    plan.explored_cells,
                    self.final_explored()
                ),
            });
        }
        for (r, robot) in plan.robots.iter().enumerate() {
            for (t, claimed) in robot.battery_j.iter().enumerate() {
                let Some(actual) = self.epochs.get(t).and_then(|e| e.robots.get(r)).map(|x| x.battery) else {
                    continue;
                };
                if *claimed != actual {
                    self.violations.push(Issue {
                        kind: IssueKind::BatteryMismatch,
                        robot: Some(r),
                        epoch: Some(t + 1),
                        detail: format!("plan claims {claimed} J, replay gives {actual} J"),
                    });
                }
            }
        }
    }
}

/// Replays `paths` (one cell per epoch per robot) on `inst`.
///
/// Errors when the number of paths, their lengths or their first cells do
/// not match the instance; everything else is reported as a violation.
pub fn replay(inst: &RpInstance, paths: &[Vec<Cell>]) -> Result<ExplorationTrace> {
    let grid = &inst.grid;
    let t_len = inst.horizon;
    if paths.len() != inst.num_robots() {
        return Err(Error::DimensionMismatch(format!(
            "{} paths for {} robots",
            paths.len(),
            inst.num_robots()
        )));
    }
    for (r, p) in paths.iter().enumerate() {
        if p.len() != t_len {
            return Err(Error::DimensionMismatch(format!(
                "robot {r} path has {} cells, horizon is {t_len}",
                p.len()
            )));
        }
        if p[0] != inst.robots[r].start {
            return Err(Error::DimensionMismatch(format!(
                "robot {r} starts at {}, expected {}",
                p[0], inst.robots[r].start
            )));
        }
        if let Some(c) = p.iter().find(|c| !grid.contains(**c)) {
            return Err(Error::DimensionMismatch(format!("robot {r} visits {c} outside the grid")));
        }
    }

    let total = grid.total_cells();
    let need = inst.required_cells();
    let mut seen = vec![false; total];
    let mut count = 0;
    let mut battery: Vec<Energy> = inst.robots.iter().map(|r| r.initial_battery).collect();
    let mut epochs = Vec::with_capacity(t_len);
    let mut violations = Vec::new();

    for t in 0..t_len {
        let mut robots = Vec::with_capacity(paths.len());
        for (r, p) in paths.iter().enumerate() {
            let to = p[t];
            let cost = if t == 0 {
                EpochCost::default()
            } else {
                let from = p[t - 1];
                let mv = Move::between(from, to).unwrap_or_else(|| {
                    violations.push(Issue {
                        kind: IssueKind::Mobility,
                        robot: Some(r),
                        epoch: Some(t + 1),
                        detail: format!("jump from {from} to {to}"),
                    });
                    Move::Diagonal
                });
                epoch_energy(&inst.robots[r].profile, mv, !seen[grid.index(to)], to, grid, inst.epoch_duration)
            };
            let was_negative = battery[r].is_negative();
            battery[r] -= cost.total;
            // Reported once per robot, at the first epoch below zero.
            if battery[r].is_negative() && !was_negative {
                violations.push(Issue {
                    kind: IssueKind::BatteryUnderflow,
                    robot: Some(r),
                    epoch: Some(t + 1),
                    detail: format!("battery at {} J", battery[r]),
                });
            }
            robots.push(RobotEpoch {
                cell: to,
                battery: battery[r],
                cost,
            });
        }
        for p in paths {
            let i = grid.index(p[t]);
            if !seen[i] {
                seen[i] = true;
                count += 1;
            }
        }
        epochs.push(EpochRecord {
            epoch: t + 1,
            explored_cells: count,
            explored_pct: 100.0 * count as f64 / total as f64,
            robots,
        });
    }
    if count < need {
        violations.push(Issue {
            kind: IssueKind::CoverageShortfall,
            robot: None,
            epoch: Some(t_len),
            detail: format!("{count} cells explored, {need} required"),
        });
    }
    let completion_epochs = epochs.iter().position(|e| e.explored_cells >= need).map(|t| t + 1);
    Ok(ExplorationTrace {
        total_cells: total,
        required_cells: need,
        completion_epochs,
        epochs,
        violations,
    })
}

pub fn write_trace_csv<W: Write>(trace: &ExplorationTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let r_len = trace.epochs.first().map_or(0, |e| e.robots.len());
    let mut header = vec!["epoch".to_string(), "explored_cells".into(), "explored_pct".into()];
    for r in 0..r_len {
        header.extend([format!("r{r}_a"), format!("r{r}_b"), format!("r{r}_battery_J")]);
    }
    w.write_record(&header).map_err(csv_err)?;
    for e in &trace.epochs {
        let mut row = vec![e.epoch.to_string(), e.explored_cells.to_string(), format!("{:.6}", e.explored_pct)];
        for r in &e.robots {
            row.extend([r.cell.a.to_string(), r.cell.b.to_string(), r.battery.to_string()]);
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_cost_csv<W: Write>(trace: &ExplorationTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "epoch", "robot", "a", "b", "rx_J", "tx_J", "sensing_J", "motion_J", "idle_J", "total_J",
    ])
    .map_err(csv_err)?;
    for e in trace.epochs.iter().skip(1) {
        for (r, x) in e.robots.iter().enumerate() {
            let c = &x.cost;
            w.write_record([
                e.epoch.to_string(),
                r.to_string(),
                x.cell.a.to_string(),
                x.cell.b.to_string(),
                c.rx.to_string(),
                c.tx.to_string(),
                c.sensing.to_string(),
                c.motion.to_string(),
                c.idle.to_string(),
                c.total.to_string(),
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
