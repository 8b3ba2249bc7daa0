//! Greedy frontier assignment.
//!
//! Every epoch each robot, in turn, claims the nearest unexplored cell not
//! claimed by an earlier robot (Chebyshev distance, ties to the lowest cell
//! index) and takes one step toward it, preferring steps that land on fresh
//! cells. A robot only moves when its battery still covers standing still
//! for the rest of the horizon afterwards. The relaxed variant drops that
//! reserve and only refuses moves the battery cannot pay for.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::Cell;
use crate::model::RpInstance;

use super::{paths_to_solution, Prepared, SolveBudget, SolveMode, SolveOutcome, SolveStats, SolveStatus, SolverEvent, UnknownReason};

#[derive(Clone, Debug)]
pub(crate) struct GreedyRun {
    /// `paths[r][t]`, cell indices.
    pub paths: Vec<Vec<u32>>,
    /// First epoch meeting the coverage target.
    pub completion: Option<usize>,
    pub battery_ok: bool,
}

impl GreedyRun {
    pub fn feasible(&self) -> bool {
        self.battery_ok && self.completion.is_some()
    }
}

/// Runs the greedy policy with robots acting in `order`. With `relaxed` the
/// robots keep exploring until every cell is seen or their batteries run
/// dry, instead of stopping at the target.
pub(crate) fn greedy(prep: &Prepared, order: &[usize], relaxed: bool) -> GreedyRun {
    let n = prep.cells;
    let r_len = prep.robots.len();
    let t_len = prep.horizon;
    let stop_at = if relaxed { n } else { prep.need };

    let mut explored = vec![false; n];
    let mut count = 0;
    for &s in &prep.starts {
        if !explored[s as usize] {
            explored[s as usize] = true;
            count += 1;
        }
    }
    let mut pos = prep.starts.clone();
    let mut battery = prep.batteries.clone();
    let mut paths: Vec<Vec<u32>> = pos.iter().map(|&p| vec![p]).collect();
    let mut completion = (count >= prep.need).then_some(0);
    let mut battery_ok = true;
    let mut claimed: Vec<u32> = Vec::with_capacity(2 * r_len);

    for t in 0..t_len.saturating_sub(1) {
        let rest = (t_len - 2 - t) as i64;
        claimed.clear();
        let mut next = pos.clone();
        for &r in order {
            let here = pos[r];
            let stay_cost = prep.robots[r].stay;
            let mut choice = here;
            if count < stop_at {
                let target = (0..n as u32)
                    .filter(|&c| !explored[c as usize] && !claimed.contains(&c))
                    .min_by_key(|&c| (prep.chebyshev(here, c), c));
                if let Some(target) = target {
                    claimed.push(target);
                    choice = prep.neighbors[here as usize]
                        .iter()
                        .copied()
                        .filter(|&nb| nb != here)
                        .min_by_key(|&nb| {
                            let fresh = !explored[nb as usize] && !claimed.contains(&nb) || nb == target;
                            (prep.chebyshev(nb, target), !fresh, nb)
                        })
                        .unwrap_or(here);
                }
            }
            let cost = |to: u32| prep.step_cost(r, here, to, !explored[to as usize]);
            let reserve = if relaxed { 0 } else { rest * stay_cost };
            if choice != here && battery[r] - cost(choice) < reserve {
                choice = here;
            }
            if choice != here && !explored[choice as usize] && !claimed.contains(&choice) {
                claimed.push(choice);
            }
            battery[r] -= cost(choice);
            if battery[r] < 0 {
                battery_ok = false;
            }
            next[r] = choice;
        }
        for &c in &next {
            if !explored[c as usize] {
                explored[c as usize] = true;
                count += 1;
            }
        }
        pos = next;
        for (r, &p) in pos.iter().enumerate() {
            paths[r].push(p);
        }
        if completion.is_none() && count >= prep.need {
            completion = Some(t + 1);
        }
    }
    GreedyRun {
        paths,
        completion,
        battery_ok,
    }
}

/// Greedy plan for `inst` in robot-id order; `relaxed` keeps exploring past
/// the coverage target.
pub fn greedy_paths(inst: &RpInstance, relaxed: bool) -> Vec<Vec<Cell>> {
    let prep = Prepared::new(inst);
    let order: Vec<usize> = (0..inst.num_robots()).collect();
    greedy(&prep, &order, relaxed)
        .paths
        .iter()
        .map(|p| p.iter().map(|&c| inst.grid.cell(c as usize)).collect())
        .collect()
}

/// Best greedy run over the identity order plus `restarts` shuffled orders.
pub(crate) fn best_run(prep: &Prepared, restarts: usize, seed: u64) -> GreedyRun {
    let mut order: Vec<usize> = (0..prep.robots.len()).collect();
    let mut best = greedy(prep, &order, false);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        order.shuffle(&mut rng);
        let run = greedy(prep, &order, false);
        let better = match (run.feasible(), best.feasible()) {
            (true, false) => true,
            (true, true) => run.completion < best.completion,
            _ => false,
        };
        if better {
            best = run;
        }
    }
    best
}

pub(super) fn solve(
    inst: &RpInstance,
    prep: &Prepared,
    budget: &SolveBudget,
    root_bound: usize,
    events: &mut Vec<SolverEvent>,
) -> Result<SolveOutcome> {
    let run = best_run(prep, budget.restarts, budget.seed);
    let mut out = SolveOutcome {
        status: SolveStatus::Unknown,
        mode: SolveMode::Heuristic,
        solution: None,
        bound: Some(root_bound),
        unknown_reason: Some(UnknownReason::HeuristicFailed),
        infeasibility: None,
        stats: SolveStats::default(),
        events: Vec::new(),
    };
    if run.feasible() {
        let sol = paths_to_solution(inst, &run.paths)?;
        events.push(SolverEvent::Incumbent {
            source: "greedy".into(),
            objective: sol.objective,
            nodes: 0,
        });
        out.status = if sol.objective == root_bound {
            SolveStatus::Optimal
        } else {
            SolveStatus::Feasible
        };
        out.unknown_reason = None;
        out.solution = Some(sol);
    }
    Ok(out)
}
