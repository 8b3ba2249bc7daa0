//! Depth-first branch-and-bound over joint robot trajectories.
//!
//! Tree levels alternate over robots within an epoch, so a node fixes the
//! next cell of one robot. Full-epoch nodes are bounded with
//! [`completion_bound`] and checked against a dominance memo: a state is
//! skipped when an earlier state at the same epoch and positions had a
//! superset of explored cells, no lower batteries and no later completion.
//! Robots in identical states only branch in nondecreasing cell order.
//!
//! The search runs in two phases. The optimal value is found first (in
//! parallel when several workers are available, sharing the incumbent
//! through an atomic). A single-threaded pass then returns the first
//! solution in depth-first order that attains it, which makes the result
//! independent of thread scheduling.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::time::Instant;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::error::Result;
use crate::model::RpInstance;

use super::bounds::completion_bound;
use super::heuristic::best_run;
use super::{
    paths_to_solution, Prepared, SolveBudget, SolveMode, SolveOutcome, SolveStats, SolveStatus, SolverEvent,
    UnknownReason,
};

const MEMO_PER_KEY: usize = 16;
const MEMO_TOTAL: usize = 2_000_000;
const NONE: usize = usize::MAX;

struct Shared {
    incumbent: AtomicUsize,
    nodes: AtomicU64,
    exhausted: AtomicBool,
    max_nodes: u64,
    deadline: Instant,
}

impl Shared {
    fn out_of_budget(&self, batch: u64) -> bool {
        if self.exhausted.load(Ordering::Relaxed) {
            return true;
        }
        let total = self.nodes.fetch_add(batch, Ordering::Relaxed) + batch;
        if total > self.max_nodes || Instant::now() >= self.deadline {
            self.exhausted.store(true, Ordering::Relaxed);
            return true;
        }
        false
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Goal {
    /// Improve on the shared incumbent.
    Optimize,
    /// Stop at the first solution with objective at most this.
    AtMost(usize),
}

struct MemoEntry {
    explored: FixedBitSet,
    batteries: Vec<i64>,
    covered: usize,
}

impl MemoEntry {
    fn dominates(&self, explored: &FixedBitSet, batteries: &[i64], covered: usize) -> bool {
        self.covered <= covered
            && self.batteries.iter().zip(batteries).all(|(a, b)| a >= b)
            && self.explored.is_superset(explored)
    }
}

/// First-epoch joint move, used to split work across threads.
#[derive(Clone)]
struct RootChild {
    next: Vec<u32>,
    batteries: Vec<i64>,
}

struct Search<'a> {
    prep: &'a Prepared,
    shared: &'a Shared,
    goal: Goal,
    memo: HashMap<(usize, Vec<u32>), Vec<MemoEntry>>,
    memo_len: usize,
    /// `path[t][r]`.
    path: Vec<Vec<u32>>,
    explored: FixedBitSet,
    count: usize,
    batteries: Vec<i64>,
    covered_at: Option<usize>,
    best: Option<(usize, Vec<Vec<u32>>)>,
    pending_nodes: u64,
    memo_hits: u64,
    incumbent_updates: u64,
    stop: bool,
    collect: Option<Vec<RootChild>>,
}

impl<'a> Search<'a> {
    fn new(prep: &'a Prepared, shared: &'a Shared, goal: Goal) -> Self {
        let mut explored = FixedBitSet::with_capacity(prep.cells);
        for &s in &prep.starts {
            explored.insert(s as usize);
        }
        let count = explored.count_ones(..);
        Self {
            prep,
            shared,
            goal,
            memo: HashMap::new(),
            memo_len: 0,
            path: vec![prep.starts.clone()],
            explored,
            count,
            batteries: prep.batteries.clone(),
            covered_at: (count >= prep.need).then_some(0),
            best: None,
            pending_nodes: 0,
            memo_hits: 0,
            incumbent_updates: 0,
            stop: false,
            collect: None,
        }
    }

    fn tick(&mut self) -> bool {
        self.pending_nodes += 1;
        if self.pending_nodes >= 1024 {
            let batch = std::mem::take(&mut self.pending_nodes);
            if self.shared.out_of_budget(batch) {
                self.stop = true;
            }
        }
        self.stop
    }

    fn flush_nodes(&mut self) {
        let batch = std::mem::take(&mut self.pending_nodes);
        self.shared.nodes.fetch_add(batch, Ordering::Relaxed);
    }

    /// True when no solution with objective `>= bound` is wanted.
    fn prune(&self, bound: usize) -> bool {
        match self.goal {
            Goal::Optimize => bound >= self.shared.incumbent.load(Ordering::Relaxed),
            Goal::AtMost(s) => bound > s,
        }
    }

    fn record(&mut self, objective: usize) {
        if self.prune(objective) {
            return;
        }
        self.best = Some((objective, self.transposed_path()));
        self.incumbent_updates += 1;
        match self.goal {
            Goal::Optimize => {
                self.shared.incumbent.fetch_min(objective, Ordering::Relaxed);
            }
            Goal::AtMost(_) => self.stop = true,
        }
    }

    fn transposed_path(&self) -> Vec<Vec<u32>> {
        (0..self.prep.robots.len())
            .map(|r| self.path.iter().map(|step| step[r]).collect())
            .collect()
    }

    fn memo_check(&mut self, t: usize) -> bool {
        let covered = self.covered_at.unwrap_or(NONE);
        let key = (t, self.path[t].clone());
        let entries = self.memo.entry(key).or_default();
        if entries.iter().any(|e| e.dominates(&self.explored, &self.batteries, covered)) {
            self.memo_hits += 1;
            return true;
        }
        let before = entries.len();
        entries.retain(|e| {
            let newer = MemoEntry {
                explored: self.explored.clone(),
                batteries: self.batteries.clone(),
                covered,
            };
            !newer.dominates(&e.explored, &e.batteries, e.covered)
        });
        self.memo_len -= before - entries.len();
        if entries.len() < MEMO_PER_KEY && self.memo_len < MEMO_TOTAL {
            entries.push(MemoEntry {
                explored: self.explored.clone(),
                batteries: self.batteries.clone(),
                covered,
            });
            self.memo_len += 1;
        }
        false
    }

    /// Node whose positions at epoch `t` are all fixed.
    fn expand(&mut self, t: usize) {
        if self.tick() {
            return;
        }
        if t + 1 == self.prep.horizon {
            if let Some(at) = self.covered_at {
                self.record(at);
            }
            return;
        }
        let Some(bound) = completion_bound(self.prep, t, self.count, &self.batteries, self.covered_at) else {
            return;
        };
        if self.prune(bound) || self.memo_check(t) {
            return;
        }
        let r_len = self.prep.robots.len();
        // twin[r]: latest earlier robot in exactly the same state.
        let current = &self.path[t];
        let twin: Vec<Option<usize>> = (0..r_len)
            .map(|r| {
                (0..r).rev().find(|&q| {
                    current[q] == current[r]
                        && self.batteries[q] == self.batteries[r]
                        && self.prep.robots[q].class == self.prep.robots[r].class
                })
            })
            .collect();
        let mut next = current.clone();
        let mut claimed = Vec::with_capacity(r_len);
        self.assign(t, 0, &twin, &mut next, &mut claimed);
    }

    fn candidates(&self, t: usize, r: usize, claimed: &[u32]) -> Vec<u32> {
        let here = self.path[t][r];
        let mut out: Vec<u32> = self.prep.neighbors[here as usize].clone();
        if self.covered_at.is_some() {
            out.sort_by_key(|&c| (c != here, c));
            return out;
        }
        let fresh = |c: u32| !self.explored.contains(c as usize) && !claimed.contains(&c);
        let unexplored_around = |c: u32| {
            self.prep.neighbors[c as usize]
                .iter()
                .filter(|&&x| !self.explored.contains(x as usize))
                .count()
        };
        out.sort_by_key(|&c| {
            if fresh(c) {
                (0u8, usize::MAX - unexplored_around(c), c)
            } else if c == here {
                (1, 0, c)
            } else {
                (2, 0, c)
            }
        });
        out
    }

    fn assign(&mut self, t: usize, r: usize, twin: &[Option<usize>], next: &mut Vec<u32>, claimed: &mut Vec<u32>) {
        if self.stop {
            return;
        }
        if r == self.prep.robots.len() {
            if let Some(children) = self.collect.as_mut() {
                children.push(RootChild {
                    next: next.clone(),
                    batteries: self.batteries.clone(),
                });
                return;
            }
            self.descend(t, next, claimed);
            return;
        }
        if self.tick() {
            return;
        }
        let here = self.path[t][r];
        let rest = (self.prep.horizon - 2 - t) as i64;
        let floor = rest * self.prep.robots[r].cheapest_step;
        for dest in self.candidates(t, r, claimed) {
            if let Some(q) = twin[r] {
                if dest < next[q] {
                    continue;
                }
            }
            let unexplored = !self.explored.contains(dest as usize);
            let cost = self.prep.step_cost(r, here, dest, unexplored);
            let left = self.batteries[r] - cost;
            if left < floor {
                continue;
            }
            let claim = unexplored && !claimed.contains(&dest);
            if claim {
                claimed.push(dest);
            }
            let saved = self.batteries[r];
            self.batteries[r] = left;
            next[r] = dest;
            self.assign(t, r + 1, twin, next, claimed);
            self.batteries[r] = saved;
            if claim {
                claimed.pop();
            }
            if self.stop {
                return;
            }
        }
    }

    fn descend(&mut self, t: usize, next: &[u32], claimed: &[u32]) {
        for &c in claimed {
            self.explored.insert(c as usize);
        }
        self.count += claimed.len();
        let covered_before = self.covered_at;
        if self.covered_at.is_none() && self.count >= self.prep.need {
            self.covered_at = Some(t + 1);
        }
        self.path.push(next.to_vec());
        self.expand(t + 1);
        self.path.pop();
        self.covered_at = covered_before;
        self.count -= claimed.len();
        for &c in claimed {
            self.explored.set(c as usize, false);
        }
    }

    fn root_children(&mut self) -> Vec<RootChild> {
        self.collect = Some(Vec::new());
        let r_len = self.prep.robots.len();
        let current = self.path[0].clone();
        let twin: Vec<Option<usize>> = (0..r_len)
            .map(|r| {
                (0..r).rev().find(|&q| {
                    current[q] == current[r]
                        && self.batteries[q] == self.batteries[r]
                        && self.prep.robots[q].class == self.prep.robots[r].class
                })
            })
            .collect();
        let mut next = current;
        let mut claimed = Vec::new();
        self.assign(0, 0, &twin, &mut next, &mut claimed);
        self.collect.take().unwrap_or_default()
    }

    fn run_child(&mut self, child: &RootChild) {
        let claimed: Vec<u32> = {
            let mut v: Vec<u32> = child
                .next
                .iter()
                .copied()
                .filter(|&c| !self.explored.contains(c as usize))
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        self.batteries = child.batteries.clone();
        self.descend(0, &child.next, &claimed);
    }
}

pub(super) fn solve(
    inst: &RpInstance,
    prep: &Prepared,
    budget: &SolveBudget,
    root_bound: usize,
    events: &mut Vec<SolverEvent>,
) -> Result<SolveOutcome> {
    let started = Instant::now();
    let mut out = SolveOutcome {
        status: SolveStatus::Unknown,
        mode: SolveMode::Exact,
        solution: None,
        bound: Some(root_bound),
        unknown_reason: None,
        infeasibility: None,
        stats: SolveStats::default(),
        events: Vec::new(),
    };

    let greedy = best_run(prep, budget.restarts, budget.seed);
    let seed_incumbent = greedy.feasible().then(|| greedy.completion.unwrap_or(NONE));
    if let Some(obj) = seed_incumbent {
        events.push(SolverEvent::Incumbent {
            source: "greedy".into(),
            objective: obj,
            nodes: 0,
        });
        if obj == root_bound {
            out.status = SolveStatus::Optimal;
            out.solution = Some(paths_to_solution(inst, &greedy.paths)?);
            out.stats.wall_seconds = started.elapsed().as_secs_f64();
            return Ok(out);
        }
    }

    let shared = Shared {
        incumbent: AtomicUsize::new(seed_incumbent.unwrap_or(NONE)),
        nodes: AtomicU64::new(0),
        exhausted: AtomicBool::new(false),
        max_nodes: budget.max_nodes,
        deadline: started + budget.wall_limit(),
    };

    // Phase 1: optimal value.
    let workers = budget.worker_count();
    let mut memo_hits = 0;
    let mut updates = 0;
    let mut found: Option<(usize, Vec<Vec<u32>>)> = None;
    let mut keep_best = |cand: Option<(usize, Vec<Vec<u32>>)>| {
        if let Some(c) = cand {
            if found.as_ref().is_none_or(|f| c.0 < f.0) {
                found = Some(c);
            }
        }
    };
    if workers > 1 && prep.horizon > 1 {
        let mut root = Search::new(prep, &shared, Goal::Optimize);
        let children = root.root_children();
        root.flush_nodes();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| crate::error::Error::InvalidInput(format!("thread pool: {e}")))?;
        let results: Vec<_> = pool.install(|| {
            children
                .par_iter()
                .map(|child| {
                    let mut s = Search::new(prep, &shared, Goal::Optimize);
                    s.run_child(child);
                    s.flush_nodes();
                    (s.best, s.memo_hits, s.incumbent_updates)
                })
                .collect()
        });
        for (best, hits, ups) in results {
            memo_hits += hits;
            updates += ups;
            keep_best(best);
        }
    } else {
        let mut s = Search::new(prep, &shared, Goal::Optimize);
        s.expand(0);
        s.flush_nodes();
        memo_hits += s.memo_hits;
        updates += s.incumbent_updates;
        keep_best(s.best);
    }
    let exhausted = shared.exhausted.load(Ordering::Relaxed);
    let value = match (&found, seed_incumbent) {
        (Some((v, _)), _) => Some(*v),
        (None, Some(h)) => Some(h),
        (None, None) => None,
    };
    if let Some(v) = value {
        events.push(SolverEvent::Incumbent {
            source: "search".into(),
            objective: v,
            nodes: shared.nodes.load(Ordering::Relaxed),
        });
    }

    let fallback = || -> Result<Option<crate::model::Solution>> {
        match &found {
            Some((_, paths)) => Ok(Some(paths_to_solution(inst, paths)?)),
            None if greedy.feasible() => Ok(Some(paths_to_solution(inst, &greedy.paths)?)),
            None => Ok(None),
        }
    };

    if exhausted {
        out.solution = fallback()?;
        if out.solution.is_some() {
            out.status = SolveStatus::Feasible;
        } else {
            out.unknown_reason = Some(UnknownReason::BudgetExhausted);
        }
    } else if let Some(v) = value {
        // Phase 2: canonical solution at the optimal value.
        let mut canon = Search::new(prep, &shared, Goal::AtMost(v));
        canon.expand(0);
        canon.flush_nodes();
        memo_hits += canon.memo_hits;
        out.status = SolveStatus::Optimal;
        out.bound = Some(v);
        out.solution = match canon.best {
            Some((_, paths)) => Some(paths_to_solution(inst, &paths)?),
            None => fallback()?,
        };
    } else {
        out.status = SolveStatus::ProvablyInfeasible;
        out.bound = None;
        out.infeasibility = Some(format!(
            "exhaustive search: no trajectories explore {} of {} cells within {} epochs under the battery limits",
            prep.need, prep.cells, prep.horizon
        ));
    }

    out.stats = SolveStats {
        nodes: shared.nodes.load(Ordering::Relaxed),
        memo_hits,
        incumbent_updates: updates,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(out)
}
