//! Counting and energy arguments that bound coverage time and fleet size.

use serde::{Deserialize, Serialize};

use crate::energy::{epoch_energy, Energy, EnergyProfile};
use crate::grid::{GridMap, Move};
use crate::model::{required_cells, RpInstance};

use super::Prepared;

/// Earliest epoch (0-based) at which the target can be met from a node at
/// epoch `t` with `explored` cells and the given batteries, or `None` when
/// the target is out of reach.
///
/// Each robot adds at most one new cell per epoch, and only as many as its
/// battery allows once every remaining epoch is paid at the cheapest rate.
pub(crate) fn completion_bound(
    prep: &Prepared,
    t: usize,
    explored: usize,
    batteries: &[i64],
    covered_at: Option<usize>,
) -> Option<usize> {
    let remaining = (prep.horizon - 1 - t) as i64;
    let mut caps = Vec::with_capacity(batteries.len());
    for (r, &b) in batteries.iter().enumerate() {
        let costs = &prep.robots[r];
        let floor = remaining * costs.cheapest_step;
        if b < floor {
            return None;
        }
        let extra = costs.cheapest_explore - costs.cheapest_step;
        let cap = if extra <= 0 {
            remaining
        } else {
            remaining.min((b - floor) / extra)
        };
        caps.push(cap as usize);
    }
    if let Some(at) = covered_at {
        return Some(at);
    }
    if explored >= prep.need {
        return Some(t);
    }
    let deficit = prep.need - explored;
    if caps.iter().sum::<usize>() < deficit {
        return None;
    }
    let mut lo = 1usize;
    let mut hi = remaining as usize;
    // Smallest j with sum(min(j, cap_r)) >= deficit; monotone in j.
    while lo < hi {
        let mid = (lo + hi) / 2;
        let got: usize = caps.iter().map(|&c| c.min(mid)).sum();
        if got >= deficit {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(t + lo)
}

/// Why an instance cannot meet its target, when a counting argument shows it.
pub fn counting_infeasibility(inst: &RpInstance) -> Option<String> {
    let need = inst.required_cells();
    let mut starts: Vec<_> = inst.robots.iter().map(|r| inst.grid.index(r.start)).collect();
    starts.sort_unstable();
    starts.dedup();
    let r = inst.num_robots();
    let reach = starts.len() + r * (inst.horizon - 1);
    if reach < need {
        let start_desc = if starts.len() == 1 {
            "1 shared start cell".to_string()
        } else {
            format!("{} start cells", starts.len())
        };
        return Some(format!(
            "counting bound: {r} robot(s) from {start_desc} explore at most {} + {r} x {} = {reach} cells in {} epochs, fewer than the {need} required",
            starts.len(),
            inst.horizon - 1,
            inst.horizon
        ));
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FleetBound {
    /// `max(1, coverage, energy)`.
    pub min_robots: usize,
    /// From one new cell per robot per epoch; `usize::MAX` when no fleet
    /// size suffices.
    pub coverage: usize,
    /// From the number of exploring epochs a battery pays for.
    pub energy: usize,
    /// Exploring epochs a single full battery pays for.
    pub exploring_epochs_per_battery: usize,
}

/// Smallest fleet that could possibly meet the target.
///
/// Co-located fleets explore at most `1 + R (T - 1)` cells, fleets with
/// distinct starts `R T`. A robot whose battery pays for `k` exploring
/// epochs adds at most `k` cells beyond its start.
pub fn fleet_lower_bound(
    grid: &GridMap,
    kappa: f64,
    horizon: usize,
    profile: &EnergyProfile,
    initial_battery: Energy,
    epoch_duration: f64,
    colocated: bool,
) -> FleetBound {
    let need = required_cells(kappa, grid.total_cells());
    let coverage = if need <= 1 {
        1
    } else if colocated {
        if horizon <= 1 {
            usize::MAX
        } else {
            (need - 1).div_ceil(horizon - 1)
        }
    } else {
        need.div_ceil(horizon.max(1))
    };
    let explore = cheapest_exploring_epoch(grid, profile, epoch_duration);
    let per_battery = if explore.micro() <= 0 {
        usize::MAX
    } else {
        (initial_battery.micro() / explore.micro()).max(0) as usize
    };
    let energy = if per_battery == usize::MAX {
        1
    } else {
        need.div_ceil(per_battery + 1)
    };
    FleetBound {
        min_robots: coverage.max(energy).max(1),
        coverage,
        energy,
        exploring_epochs_per_battery: per_battery,
    }
}

/// Cheapest possible exploring epoch: an orthogonal move into the unexplored
/// cell with the lowest transmission cost.
pub fn cheapest_exploring_epoch(grid: &GridMap, profile: &EnergyProfile, epoch_duration: f64) -> Energy {
    grid.cells()
        .map(|c| epoch_energy(profile, Move::Orthogonal, true, c, grid, epoch_duration).total)
        .min()
        .unwrap_or(Energy::ZERO)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{builtin_profile, RobotKind};
    use crate::grid::Cell;

    fn small() -> GridMap {
        GridMap::new(5, 5, 10.0, Cell::new(0, 0)).unwrap()
    }

    #[test]
    fn colocated_small_scenario_needs_three() {
        let p = builtin_profile(RobotKind::Wheeled);
        let b = fleet_lower_bound(&small(), 0.7, 9, &p, p.battery_capacity(), 10.0, true);
        assert_eq!(b.coverage, 3);
        assert_eq!(b.min_robots, 3);
    }

    #[test]
    fn tiny_rate_needs_one() {
        let p = builtin_profile(RobotKind::Quadruped);
        let b = fleet_lower_bound(&small(), 1e-6, 9, &p, p.battery_capacity(), 10.0, true);
        assert_eq!(b.min_robots, 1);
    }

    #[test]
    fn dead_battery_needs_one_robot_per_cell() {
        let mut p = builtin_profile(RobotKind::Wheeled);
        p.battery_capacity_j = 100.0;
        let b = fleet_lower_bound(&small(), 0.7, 9, &p, p.battery_capacity(), 10.0, false);
        assert_eq!(b.exploring_epochs_per_battery, 0);
        assert_eq!(b.energy, 18);
        assert_eq!(b.min_robots, 18);
    }

    #[test]
    fn distinct_starts_bound() {
        let p = builtin_profile(RobotKind::Wheeled);
        let b = fleet_lower_bound(&small(), 0.7, 9, &p, p.battery_capacity(), 10.0, false);
        assert_eq!(b.coverage, 2);
    }

    #[test]
    fn energy_bound_on_large_grid() {
        // 16x16, 31.25 s epochs: wheeled pays 885.9375 J per exploring epoch,
        // quadruped 6795 J.
        let g = GridMap::new(16, 16, 31.25, Cell::new(0, 0)).unwrap();
        let w = builtin_profile(RobotKind::Wheeled);
        let q = builtin_profile(RobotKind::Quadruped);
        let bw = fleet_lower_bound(&g, 0.7, 180, &w, w.battery_capacity(), 31.25, true);
        let bq = fleet_lower_bound(&g, 0.7, 180, &q, q.battery_capacity(), 31.25, true);
        assert_eq!(bw.exploring_epochs_per_battery, 81);
        assert_eq!(bq.exploring_epochs_per_battery, 51);
        assert_eq!(bw.min_robots, 3);
        assert_eq!(bq.min_robots, 4);
    }

    #[test]
    fn counting_message_for_two_robots() {
        let p = builtin_profile(RobotKind::Wheeled);
        let inst = RpInstance::uniform(small(), 9, 10.0, &p, 2, Cell::new(0, 0), 0.7).unwrap();
        let msg = counting_infeasibility(&inst).unwrap();
        assert!(msg.contains("= 17 cells"), "{msg}");
        assert!(msg.contains("18 required"), "{msg}");
        let inst = RpInstance::uniform(small(), 9, 10.0, &p, 3, Cell::new(0, 0), 0.7).unwrap();
        assert!(counting_infeasibility(&inst).is_none());
    }
}
