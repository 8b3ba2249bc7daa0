//! Exhaustive enumeration of joint trajectories for tiny instances.
//!
//! Shares nothing with the search code beyond the instance itself: moves come
//! from [`GridMap::neighbors`](crate::grid::GridMap::neighbors) and costs from
//! [`RpInstance::step_cost`]. Used as a reference in tests.

use crate::energy::Energy;
use crate::error::{Error, Result};
use crate::grid::Cell;
use crate::model::{RpInstance, Solution};

use super::{SolveMode, SolveOutcome, SolveStats, SolveStatus};

/// Largest `R * T * |AB|` accepted by [`brute_force_oracle`].
pub const ORACLE_LIMIT: usize = 2000;

struct Enum<'a> {
    inst: &'a RpInstance,
    need: usize,
    /// `paths[r][t]`.
    paths: Vec<Vec<Cell>>,
    explored: Vec<bool>,
    batteries: Vec<Energy>,
    best: Option<(usize, Vec<Vec<Cell>>)>,
    nodes: u64,
}

impl Enum<'_> {
    fn count(&self) -> usize {
        self.explored.iter().filter(|&&x| x).count()
    }

    /// All robots placed through epoch `t`; `covered` is the completion epoch
    /// if already reached.
    fn epoch(&mut self, t: usize, covered: Option<usize>) -> bool {
        self.nodes += 1;
        if t + 1 == self.inst.horizon {
            if let Some(k) = covered {
                if self.best.as_ref().is_none_or(|b| k < b.0) {
                    self.best = Some((k, self.paths.clone()));
                }
                return true;
            }
            return false;
        }
        // A later completion cannot beat the best found so far.
        if covered.is_none() && self.best.as_ref().is_some_and(|b| t + 1 >= b.0) {
            return false;
        }
        let mut next = Vec::with_capacity(self.paths.len());
        self.robot(t, 0, covered, &mut next)
    }

    fn robot(&mut self, t: usize, r: usize, covered: Option<usize>, next: &mut Vec<Cell>) -> bool {
        if r == self.paths.len() {
            let mut newly = Vec::new();
            for &c in next.iter() {
                let i = self.inst.grid.index(c);
                if !self.explored[i] {
                    self.explored[i] = true;
                    newly.push(i);
                }
            }
            for (p, &c) in self.paths.iter_mut().zip(next.iter()) {
                p.push(c);
            }
            let now = covered.or_else(|| (self.count() >= self.need).then_some(t + 1));
            let done = self.epoch(t + 1, now);
            for p in self.paths.iter_mut() {
                p.pop();
            }
            for i in newly {
                self.explored[i] = false;
            }
            // Once coverage is fixed any one feasible continuation suffices.
            return done && covered.is_some();
        }
        let here = self.paths[r][t];
        for to in self.inst.grid.neighbors(here) {
            let explored = self.explored[self.inst.grid.index(to)];
            let cost = self.inst.step_cost(r, here, to, explored).expect("neighbor step");
            let left = self.batteries[r] - cost;
            if left.is_negative() {
                continue;
            }
            let saved = self.batteries[r];
            self.batteries[r] = left;
            next.push(to);
            let done = self.robot(t, r + 1, covered, next);
            next.pop();
            self.batteries[r] = saved;
            if done {
                return true;
            }
        }
        false
    }
}

/// Optimal objective by full enumeration, or proof of infeasibility.
///
/// Errors with [`Error::OracleLimit`] when `R * T * |AB|` exceeds
/// [`ORACLE_LIMIT`].
pub fn brute_force_oracle(inst: &RpInstance) -> Result<SolveOutcome> {
    inst.validate()?;
    let size = inst.num_robots() * inst.horizon * inst.grid.total_cells();
    if size > ORACLE_LIMIT {
        return Err(Error::OracleLimit {
            size,
            limit: ORACLE_LIMIT,
        });
    }
    let mut explored = vec![false; inst.grid.total_cells()];
    for r in &inst.robots {
        explored[inst.grid.index(r.start)] = true;
    }
    let need = inst.required_cells();
    let mut en = Enum {
        inst,
        need,
        paths: inst.robots.iter().map(|r| vec![r.start]).collect(),
        explored,
        batteries: inst.robots.iter().map(|r| r.initial_battery).collect(),
        best: None,
        nodes: 0,
    };
    let covered = (en.count() >= need).then_some(0);
    en.epoch(0, covered);

    let stats = SolveStats {
        nodes: en.nodes,
        ..SolveStats::default()
    };
    let (status, solution, bound, why) = match en.best {
        Some((k, paths)) => (SolveStatus::Optimal, Some(Solution::from_paths(inst, &paths)?), Some(k), None),
        None => (
            SolveStatus::ProvablyInfeasible,
            None,
            None,
            Some("exhaustive enumeration found no feasible trajectories".to_string()),
        ),
    };
    Ok(SolveOutcome {
        status,
        mode: SolveMode::Exact,
        solution,
        bound,
        unknown_reason: None,
        infeasibility: why,
        stats,
        events: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{builtin_profile, RobotKind};
    use crate::grid::GridMap;

    fn inst(w: usize, h: usize, robots: usize, horizon: usize, kappa: f64) -> RpInstance {
        let g = GridMap::new(w, h, 10.0, Cell::new(0, 0)).unwrap();
        RpInstance::uniform(g, horizon, 10.0, &builtin_profile(RobotKind::Wheeled), robots, Cell::new(0, 0), kappa)
            .unwrap()
    }

    #[test]
    fn line_of_three() {
        let out = brute_force_oracle(&inst(3, 1, 1, 4, 1.0)).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert_eq!(out.objective(), Some(2));
    }

    #[test]
    fn two_robots_add_two_cells_per_epoch() {
        let out = brute_force_oracle(&inst(3, 2, 2, 4, 1.0)).unwrap();
        assert_eq!(out.objective(), Some(3));
    }

    #[test]
    fn too_short_is_infeasible() {
        let out = brute_force_oracle(&inst(3, 1, 1, 2, 1.0)).unwrap();
        assert_eq!(out.status, SolveStatus::ProvablyInfeasible);
    }

    #[test]
    fn limit_is_enforced() {
        let err = brute_force_oracle(&inst(10, 10, 2, 11, 0.5)).unwrap_err();
        assert!(matches!(err, Error::OracleLimit { size: 2200, limit: 2000 }));
    }
}
