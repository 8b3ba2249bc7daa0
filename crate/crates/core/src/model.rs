//! The resource-planning problem for one fleet size.
//!
//! [`RpInstance`] fixes the grid, horizon, robots and exploration target.
//! [`build_milp`] states the problem as an explicit 0-1 mixed-integer model
//! (kept as the reference formulation and for export), [`Solution`] holds the
//! dense decision variables, and [`evaluate`] re-checks a solution directly
//! from the constraint definitions without going through the MILP.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::energy::{epoch_energy, Energy, EnergyProfile};
use crate::error::{Error, Result};
use crate::grid::{Cell, GridMap, Move};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub id: usize,
    pub profile: EnergyProfile,
    pub start: Cell,
    pub initial_battery: Energy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RpInstance {
    pub grid: GridMap,
    /// Number of epochs `|T|`.
    pub horizon: usize,
    pub epoch_duration: f64,
    pub robots: Vec<RobotSpec>,
    /// Required exploration rate in `(0, 1]`.
    pub kappa: f64,
    pub speed: f64,
}

impl RpInstance {
    pub fn new(
        grid: GridMap,
        horizon: usize,
        epoch_duration: f64,
        robots: Vec<RobotSpec>,
        kappa: f64,
        speed: f64,
    ) -> Result<Self> {
        let inst = Self {
            grid,
            horizon,
            epoch_duration,
            robots,
            kappa,
            speed,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// `robots` copies of `profile`, all starting at `start` with a full battery.
    pub fn uniform(
        grid: GridMap,
        horizon: usize,
        epoch_duration: f64,
        profile: &EnergyProfile,
        robots: usize,
        start: Cell,
        kappa: f64,
    ) -> Result<Self> {
        let speed = grid.cell_size() / epoch_duration;
        let robots = (0..robots)
            .map(|id| RobotSpec {
                id,
                profile: profile.clone(),
                start,
                initial_battery: profile.battery_capacity(),
            })
            .collect();
        Self::new(grid, horizon, epoch_duration, robots, kappa, speed)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.horizon == 0 {
            return bad("horizon must be at least one epoch".into());
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return bad(format!("exploration rate must be in (0, 1], got {}", self.kappa));
        }
        if !(self.epoch_duration.is_finite() && self.epoch_duration > 0.0) {
            return bad(format!("epoch duration must be > 0, got {}", self.epoch_duration));
        }
        if self.robots.is_empty() {
            return bad("at least one robot is required".into());
        }
        for r in &self.robots {
            r.profile.validate()?;
            if !self.grid.contains(r.start) {
                return bad(format!("robot {} starts outside the grid at {}", r.id, r.start));
            }
            if r.initial_battery <= Energy::ZERO || r.initial_battery > r.profile.battery_capacity() {
                return bad(format!(
                    "robot {} initial battery {} J is not in (0, capacity]",
                    r.id, r.initial_battery
                ));
            }
        }
        Ok(())
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    /// Cells that must be explored by the final epoch, `ceil(kappa * |AB|)`.
    pub fn required_cells(&self) -> usize {
        required_cells(self.kappa, self.grid.total_cells())
    }

    /// Energy for `robot` moving `from -> to` when the destination was
    /// `explored` at the previous epoch.
    pub fn step_cost(&self, robot: usize, from: Cell, to: Cell, explored: bool) -> Option<Energy> {
        let mv = Move::between(from, to)?;
        let p = &self.robots[robot].profile;
        Some(epoch_energy(p, mv, !explored, to, &self.grid, self.epoch_duration).total)
    }
}

pub fn required_cells(kappa: f64, total_cells: usize) -> usize {
    let need = (kappa * total_cells as f64 - 1e-9).ceil().max(0.0) as usize;
    need.min(total_cells)
}

/// Dense assignment of every decision variable. Epochs are 0-based here.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    /// `d[t]`: coverage target not yet met at epoch `t`.
    pub d: Vec<bool>,
    /// `e[t][cell]`: cell explored by epoch `t`.
    pub e: Vec<Vec<bool>>,
    /// `l[r][t][cell]`: robot `r` occupies the cell at epoch `t`.
    pub l: Vec<Vec<Vec<bool>>>,
    /// `battery[r][t]`.
    pub battery: Vec<Vec<Energy>>,
    pub objective: usize,
}

impl Solution {
    /// Derives exploration state, completion flags and batteries from robot
    /// paths (one cell per epoch per robot).
    pub fn from_paths(inst: &RpInstance, paths: &[Vec<Cell>]) -> Result<Self> {
        let t_len = inst.horizon;
        let n = inst.grid.total_cells();
        if paths.len() != inst.num_robots() || paths.iter().any(|p| p.len() != t_len) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} paths of length {}",
                inst.num_robots(),
                t_len
            )));
        }
        let need = inst.required_cells();
        let mut l = vec![vec![vec![false; n]; t_len]; paths.len()];
        let mut e = vec![vec![false; n]; t_len];
        let mut battery = vec![vec![Energy::ZERO; t_len]; paths.len()];
        for t in 0..t_len {
            if t > 0 {
                let prev = e[t - 1].clone();
                e[t] = prev;
            }
            for (r, path) in paths.iter().enumerate() {
                let c = path[t];
                if !inst.grid.contains(c) {
                    return Err(Error::DimensionMismatch(format!("cell {c} outside grid")));
                }
                l[r][t][inst.grid.index(c)] = true;
                battery[r][t] = if t == 0 {
                    inst.robots[r].initial_battery
                } else {
                    let explored = e[t - 1][inst.grid.index(c)];
                    let cost = inst
                        .step_cost(r, path[t - 1], c, explored)
                        .ok_or_else(|| Error::InvalidInput(format!("robot {r} jumps to {c} at epoch {t}")))?;
                    battery[r][t - 1] - cost
                };
            }
            for path in paths {
                e[t][inst.grid.index(path[t])] = true;
            }
        }
        let d: Vec<bool> = e.iter().map(|row| row.iter().filter(|&&x| x).count() < need).collect();
        let objective = d.iter().filter(|&&x| x).count();
        Ok(Self {
            d,
            e,
            l,
            battery,
            objective,
        })
    }

    pub fn paths(&self, grid: &GridMap) -> Vec<Vec<Cell>> {
        self.l
            .iter()
            .map(|per_t| {
                per_t
                    .iter()
                    .map(|row| row.iter().position(|&x| x).map(|i| grid.cell(i)).unwrap_or(Cell::new(0, 0)))
                    .collect()
            })
            .collect()
    }

    pub fn explored_counts(&self) -> Vec<usize> {
        self.e.iter().map(|row| row.iter().filter(|&&x| x).count()).collect()
    }

    /// First epoch (0-based) whose explored count reaches the target.
    pub fn completion_epoch(&self, need: usize) -> Option<usize> {
        self.explored_counts().iter().position(|&k| k >= need)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Variable ids of the base decision variables, by position.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VarIndex {
    horizon: usize,
    cells: usize,
    d0: usize,
    e0: usize,
    l0: usize,
    b0: usize,
    arcs: HashMap<(usize, usize, usize, usize), usize>,
    gates: HashMap<(usize, usize, usize), usize>,
}

impl VarIndex {
    pub fn d(&self, t: usize) -> usize {
        self.d0 + t
    }
    pub fn e(&self, t: usize, cell: usize) -> usize {
        self.e0 + t * self.cells + cell
    }
    pub fn l(&self, r: usize, t: usize, cell: usize) -> usize {
        self.l0 + (r * self.horizon + t) * self.cells + cell
    }
    pub fn b(&self, r: usize, t: usize) -> usize {
        self.b0 + r * self.horizon + t
    }
    /// Arc variable for robot `r` moving `from -> to` between epochs `t` and `t+1`.
    pub fn arc(&self, r: usize, t: usize, from: usize, to: usize) -> Option<usize> {
        self.arcs.get(&(r, t, from, to)).copied()
    }
    /// Gating auxiliary `(1 - e[t][cell]) * l[r][t+1][cell]`.
    pub fn gate(&self, r: usize, t: usize, cell: usize) -> Option<usize> {
        self.gates.get(&(r, t, cell)).copied()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Minimized.
    pub objective: Vec<(usize, f64)>,
    pub index: VarIndex,
}

impl MilpModel {
    fn var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64) -> usize {
        self.variables.push(Variable { name, kind, lower, upper });
        self.variables.len() - 1
    }

    fn binary(&mut self, name: String) -> usize {
        self.var(name, VarKind::Binary, 0.0, 1.0)
    }

    fn add(&mut self, name: String, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { name, terms, relation, rhs });
    }

    pub fn count_vars(&self, prefix: &str) -> usize {
        self.variables.iter().filter(|v| v.name.starts_with(prefix)).count()
    }

    pub fn count_constraints(&self, prefix: &str) -> usize {
        self.constraints.iter().filter(|c| c.name.starts_with(prefix)).count()
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(i, c)| c * x[i]).sum()
    }

    /// Names of the constraints and bounds that `x` violates beyond `tol`.
    pub fn violated(&self, x: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (v, &val) in self.variables.iter().zip(x) {
            if val < v.lower - tol || val > v.upper + tol {
                out.push(format!("bound:{}", v.name));
            }
            if v.kind == VarKind::Binary && (val - val.round()).abs() > tol {
                out.push(format!("integrality:{}", v.name));
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(i, a)| a * x[i]).sum();
            let ok = match c.relation {
                Relation::Le => lhs <= c.rhs + tol,
                Relation::Ge => lhs >= c.rhs - tol,
                Relation::Eq => (lhs - c.rhs).abs() <= tol,
            };
            if !ok {
                out.push(c.name.clone());
            }
        }
        out
    }

    /// Plain-text canonical form: one line per variable, the objective, then
    /// one line per constraint, in emission order.
    pub fn to_canonical_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# variables {}", self.variables.len());
        for v in &self.variables {
            let kind = match v.kind {
                VarKind::Binary => "bin",
                VarKind::Continuous => "cont",
            };
            let _ = writeln!(s, "var {} {} [{}, {}]", v.name, kind, v.lower, v.upper);
        }
        let _ = write!(s, "min");
        for &(i, c) in &self.objective {
            let _ = write!(s, " {:+} {}", c, self.variables[i].name);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "# constraints {}", self.constraints.len());
        for c in &self.constraints {
            let _ = write!(s, "{}:", c.name);
            for &(i, a) in &c.terms {
                let _ = write!(s, " {:+} {}", a, self.variables[i].name);
            }
            let _ = writeln!(s, " {} {}", c.relation.symbol(), c.rhs);
        }
        s
    }

    /// Full variable assignment (including arc and gating auxiliaries)
    /// corresponding to `sol`.
    pub fn assignment(&self, inst: &RpInstance, sol: &Solution) -> Vec<f64> {
        let ix = &self.index;
        let n = inst.grid.total_cells();
        let mut x = vec![0.0; self.variables.len()];
        let bit = |b: bool| if b { 1.0 } else { 0.0 };
        for t in 0..inst.horizon {
            x[ix.d(t)] = bit(sol.d[t]);
            for c in 0..n {
                x[ix.e(t, c)] = bit(sol.e[t][c]);
            }
        }
        for r in 0..inst.num_robots() {
            for t in 0..inst.horizon {
                x[ix.b(r, t)] = sol.battery[r][t].joules();
                for c in 0..n {
                    x[ix.l(r, t, c)] = bit(sol.l[r][t][c]);
                }
            }
        }
        for (&(r, t, from, to), &id) in &ix.arcs {
            x[id] = bit(sol.l[r][t][from] && sol.l[r][t + 1][to]);
        }
        for (&(r, t, c), &id) in &ix.gates {
            x[id] = bit(!sol.e[t][c] && sol.l[r][t + 1][c]);
        }
        x
    }
}

fn counting_check(inst: &RpInstance) -> Result<()> {
    let need = inst.required_cells();
    let cap = inst.num_robots() * inst.horizon;
    if need > cap {
        return Err(Error::ProvablyInfeasible(format!(
            "{need} cells required but {} robots over {} epochs occupy at most {cap}",
            inst.num_robots(),
            inst.horizon
        )));
    }
    Ok(())
}

/// States the instance as a 0-1 MILP. Epoch labels in names are 1-based.
pub fn build_milp(inst: &RpInstance) -> Result<MilpModel> {
    inst.validate()?;
    counting_check(inst)?;
    let grid = &inst.grid;
    let n = grid.total_cells();
    let t_len = inst.horizon;
    let r_len = inst.num_robots();
    let need = inst.required_cells() as f64;
    let mut m = MilpModel::default();
    let name_c = |c: usize| {
        let cell = grid.cell(c);
        format!("{},{}", cell.a, cell.b)
    };

    m.index.horizon = t_len;
    m.index.cells = n;
    m.index.d0 = m.variables.len();
    for t in 0..t_len {
        m.binary(format!("d[{}]", t + 1));
    }
    m.index.e0 = m.variables.len();
    for t in 0..t_len {
        for c in 0..n {
            m.binary(format!("e[{},{}]", t + 1, name_c(c)));
        }
    }
    m.index.l0 = m.variables.len();
    for r in 0..r_len {
        for t in 0..t_len {
            for c in 0..n {
                m.binary(format!("l[{},{},{}]", r, t + 1, name_c(c)));
            }
        }
    }
    m.index.b0 = m.variables.len();
    for (r, robot) in inst.robots.iter().enumerate() {
        for t in 0..t_len {
            m.var(
                format!("b[{},{}]", r, t + 1),
                VarKind::Continuous,
                0.0,
                robot.profile.battery_capacity().joules(),
            );
        }
    }
    let ix = m.index.clone();

    m.objective = (0..t_len).map(|t| (ix.d(t), 1.0)).collect();

    m.add(
        "cover_final".into(),
        (0..n).map(|c| (ix.e(t_len - 1, c), 1.0)).collect(),
        Relation::Ge,
        need,
    );
    for r in 0..r_len {
        for t in 0..t_len {
            m.add(
                format!("occupy[{},{}]", r, t + 1),
                (0..n).map(|c| (ix.l(r, t, c), 1.0)).collect(),
                Relation::Eq,
                1.0,
            );
        }
    }
    for r in 0..r_len {
        for t in 1..t_len {
            for c in 0..n {
                let mut terms = vec![(ix.l(r, t, c), 1.0)];
                for nb in grid.neighbors(grid.cell(c)) {
                    terms.push((ix.l(r, t - 1, grid.index(nb)), -1.0));
                }
                m.add(format!("mobility[{},{},{}]", r, t + 1, name_c(c)), terms, Relation::Le, 0.0);
            }
        }
    }
    for t in 0..t_len {
        for c in 0..n {
            if t > 0 {
                let mut terms = vec![(ix.e(t, c), 1.0), (ix.e(t - 1, c), -1.0)];
                terms.extend((0..r_len).map(|r| (ix.l(r, t, c), -1.0)));
                m.add(format!("explore_ub[{},{}]", t + 1, name_c(c)), terms, Relation::Le, 0.0);
                m.add(
                    format!("explore_mono[{},{}]", t + 1, name_c(c)),
                    vec![(ix.e(t, c), 1.0), (ix.e(t - 1, c), -1.0)],
                    Relation::Ge,
                    0.0,
                );
            }
            let mut terms = vec![(ix.e(t, c), r_len as f64)];
            terms.extend((0..r_len).map(|r| (ix.l(r, t, c), -1.0)));
            m.add(format!("explore_lb[{},{}]", t + 1, name_c(c)), terms, Relation::Ge, 0.0);
        }
    }
    for t in 0..t_len {
        let mut terms: Vec<(usize, f64)> = (0..n).map(|c| (ix.e(t, c), 1.0)).collect();
        terms.push((ix.d(t), need));
        m.add(format!("done[{}]", t + 1), terms, Relation::Ge, need);
        if t + 1 < t_len {
            m.add(
                format!("done_mono[{}]", t + 1),
                vec![(ix.d(t + 1), 1.0), (ix.d(t), -1.0)],
                Relation::Le,
                0.0,
            );
        }
    }

    let starts: Vec<usize> = inst.robots.iter().map(|r| grid.index(r.start)).collect();
    for c in 0..n {
        let v = if starts.contains(&c) { 1.0 } else { 0.0 };
        m.add(format!("init_e[{}]", name_c(c)), vec![(ix.e(0, c), 1.0)], Relation::Eq, v);
    }
    for (r, robot) in inst.robots.iter().enumerate() {
        m.add(
            format!("init_l[{}]", r),
            vec![(ix.l(r, 0, grid.index(robot.start)), 1.0)],
            Relation::Eq,
            1.0,
        );
        m.add(
            format!("init_b[{}]", r),
            vec![(ix.b(r, 0), 1.0)],
            Relation::Eq,
            robot.initial_battery.joules(),
        );
    }

    linearize_movement(inst, &mut m);
    Ok(m)
}

/// Adds the arc and gating auxiliaries that linearize the products in the
/// battery recursion, and the recursion itself.
///
/// For every robot, transition `t -> t+1` and Moore pair `(c, c')` a binary
/// `m = l[t][c] * l[t+1][c']` is introduced; for every destination cell a
/// binary `g = (1 - e[t][c']) * l[t+1][c']` gates sensing and transmission.
pub fn linearize_movement(inst: &RpInstance, m: &mut MilpModel) {
    let grid = &inst.grid;
    let n = grid.total_cells();
    let name_c = |c: usize| {
        let cell = grid.cell(c);
        format!("{},{}", cell.a, cell.b)
    };
    for (r, robot) in inst.robots.iter().enumerate() {
        let p = &robot.profile;
        let dt = inst.epoch_duration;
        for t in 0..inst.horizon.saturating_sub(1) {
            let mut battery_terms = vec![(m.index.b(r, t + 1), 1.0), (m.index.b(r, t), -1.0)];
            let rx = epoch_energy(p, Move::Stay, false, robot.start, grid, dt).rx;
            for from in 0..n {
                for to_cell in grid.neighbors(grid.cell(from)) {
                    let to = grid.index(to_cell);
                    let id = m.binary(format!("m[{},{},{}->{}]", r, t + 1, name_c(from), name_c(to)));
                    m.index.arcs.insert((r, t, from, to), id);
                    let lf = m.index.l(r, t, from);
                    let lt = m.index.l(r, t + 1, to);
                    let tag = format!("{},{},{}->{}", r, t + 1, name_c(from), name_c(to));
                    m.add(format!("lin_m_lb[{tag}]"), vec![(id, 1.0), (lf, -1.0), (lt, -1.0)], Relation::Ge, -1.0);
                    m.add(format!("lin_m_from[{tag}]"), vec![(id, 1.0), (lf, -1.0)], Relation::Le, 0.0);
                    m.add(format!("lin_m_to[{tag}]"), vec![(id, 1.0), (lt, -1.0)], Relation::Le, 0.0);
                    let mv = Move::between(grid.cell(from), to_cell).expect("neighbor");
                    let cost = epoch_energy(p, mv, false, to_cell, grid, dt);
                    battery_terms.push((id, (cost.motion + cost.idle).joules()));
                }
            }
            for c in 0..n {
                let id = m.binary(format!("g[{},{},{}]", r, t + 1, name_c(c)));
                m.index.gates.insert((r, t, c), id);
                let lt = m.index.l(r, t + 1, c);
                let e = m.index.e(t, c);
                let tag = format!("{},{},{}", r, t + 1, name_c(c));
                m.add(format!("lin_g_lb[{tag}]"), vec![(id, 1.0), (lt, -1.0), (e, 1.0)], Relation::Ge, 0.0);
                m.add(format!("lin_g_occ[{tag}]"), vec![(id, 1.0), (lt, -1.0)], Relation::Le, 0.0);
                m.add(format!("lin_g_new[{tag}]"), vec![(id, 1.0), (e, 1.0)], Relation::Le, 1.0);
                let gated = epoch_energy(p, Move::Orthogonal, true, grid.cell(c), grid, dt);
                battery_terms.push((id, (gated.sensing + gated.tx).joules()));
            }
            m.add(format!("battery[{},{}]", r, t + 2), battery_terms, Relation::Eq, -rx.joules());
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// Final explored area below the target.
    Coverage,
    /// Robot not in exactly one cell.
    Occupancy,
    /// Step to a non-neighboring cell.
    Mobility,
    /// Cell marked explored without a visit.
    ExploreUpper,
    /// Explored cell becomes unexplored.
    ExploreMonotone,
    /// Occupied cell not marked explored.
    ExploreLower,
    /// Completion flag cleared while coverage is short.
    Completion,
    CompletionMonotone,
    /// Battery level does not follow the energy recursion.
    Battery,
    /// Battery outside `[0, capacity]`.
    BatteryBounds,
    /// Wrong initial position, exploration state or battery.
    Initial,
    /// Reported objective differs from the number of set completion flags.
    Objective,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ConstraintKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robot: Option<usize>,
    /// 0-based epoch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epoch: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<Cell>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

pub const MAX_REPORTED_VIOLATIONS: usize = 100;

struct Collector {
    out: Vec<Violation>,
    total: usize,
}

impl Collector {
    fn push(&mut self, kind: ConstraintKind, robot: Option<usize>, epoch: Option<usize>, cell: Option<Cell>, detail: String) {
        self.total += 1;
        if self.out.len() < MAX_REPORTED_VIOLATIONS {
            self.out.push(Violation { kind, robot, epoch, cell, detail });
        }
    }
}

/// Checks `sol` against every constraint of the problem, computed directly
/// from the definitions; returns at most [`MAX_REPORTED_VIOLATIONS`] items.
pub fn evaluate(inst: &RpInstance, sol: &Solution) -> Result<Evaluation> {
    let grid = &inst.grid;
    let n = grid.total_cells();
    let t_len = inst.horizon;
    let r_len = inst.num_robots();
    let dims_ok = sol.d.len() == t_len
        && sol.e.len() == t_len
        && sol.e.iter().all(|row| row.len() == n)
        && sol.l.len() == r_len
        && sol.l.iter().all(|per_t| per_t.len() == t_len && per_t.iter().all(|row| row.len() == n))
        && sol.battery.len() == r_len
        && sol.battery.iter().all(|b| b.len() == t_len);
    if !dims_ok {
        return Err(Error::DimensionMismatch(format!(
            "solution does not match {r_len} robots x {t_len} epochs x {n} cells"
        )));
    }
    let need = inst.required_cells();
    let mut v = Collector { out: Vec::new(), total: 0 };
    use ConstraintKind::*;

    let count = |row: &Vec<bool>| row.iter().filter(|&&x| x).count();
    let final_explored = count(&sol.e[t_len - 1]);
    if final_explored < need {
        v.push(Coverage, None, Some(t_len - 1), None, format!("{final_explored} explored < {need} required"));
    }

    // Position of each robot per epoch when the occupancy row is one-hot.
    let mut pos: Vec<Vec<Option<usize>>> = vec![vec![None; t_len]; r_len];
    for r in 0..r_len {
        for t in 0..t_len {
            let ones: Vec<usize> = (0..n).filter(|&c| sol.l[r][t][c]).collect();
            if ones.len() == 1 {
                pos[r][t] = Some(ones[0]);
            } else {
                v.push(Occupancy, Some(r), Some(t), None, format!("robot occupies {} cells", ones.len()));
            }
        }
    }

    for r in 0..r_len {
        for t in 1..t_len {
            if let (Some(a), Some(b)) = (pos[r][t - 1], pos[r][t]) {
                if grid.cell(a).chebyshev(grid.cell(b)) > 1 {
                    v.push(
                        Mobility,
                        Some(r),
                        Some(t),
                        Some(grid.cell(b)),
                        format!("step {} -> {} is not between neighbors", grid.cell(a), grid.cell(b)),
                    );
                }
            }
        }
    }

    for t in 0..t_len {
        for c in 0..n {
            let occupied = (0..r_len).filter(|&r| sol.l[r][t][c]).count();
            let cell = Some(grid.cell(c));
            if t > 0 {
                if sol.e[t][c] && !sol.e[t - 1][c] && occupied == 0 {
                    v.push(ExploreUpper, None, Some(t), cell, "explored without a visit".into());
                }
                if sol.e[t - 1][c] && !sol.e[t][c] {
                    v.push(ExploreMonotone, None, Some(t), cell, "explored cell reverted".into());
                }
            }
            if occupied > 0 && !sol.e[t][c] {
                v.push(ExploreLower, None, Some(t), cell, "occupied cell not explored".into());
            }
        }
        if !sol.d[t] && count(&sol.e[t]) < need {
            v.push(Completion, None, Some(t), None, format!("flag cleared with {} < {need} explored", count(&sol.e[t])));
        }
        if t > 0 && sol.d[t] && !sol.d[t - 1] {
            v.push(CompletionMonotone, None, Some(t), None, "completion flag set again".into());
        }
    }

    for c in 0..n {
        let is_start = inst.robots.iter().any(|r| grid.index(r.start) == c);
        if sol.e[0][c] != is_start {
            v.push(Initial, None, Some(0), Some(grid.cell(c)), "initial exploration state differs from start cells".into());
        }
    }
    for (r, robot) in inst.robots.iter().enumerate() {
        if pos[r][0] != Some(grid.index(robot.start)) {
            v.push(Initial, Some(r), Some(0), Some(robot.start), "robot not at its start cell".into());
        }
        if sol.battery[r][0] != robot.initial_battery {
            v.push(Initial, Some(r), Some(0), None, format!("initial battery {} != {}", sol.battery[r][0], robot.initial_battery));
        }
        let cap = robot.profile.battery_capacity();
        for t in 0..t_len {
            let b = sol.battery[r][t];
            if b.is_negative() || b > cap {
                v.push(BatteryBounds, Some(r), Some(t), None, format!("battery {b} J outside [0, {cap}]"));
            }
            if t == 0 {
                continue;
            }
            if let (Some(a), Some(c)) = (pos[r][t - 1], pos[r][t]) {
                let (from, to) = (grid.cell(a), grid.cell(c));
                if let Some(mv) = Move::between(from, to) {
                    let cost = epoch_energy(&robot.profile, mv, !sol.e[t - 1][c], to, grid, inst.epoch_duration);
                    let want = sol.battery[r][t - 1] - cost.total;
                    if b != want {
                        v.push(Battery, Some(r), Some(t), Some(to), format!("battery {b} J, recursion gives {want} J"));
                    }
                }
            }
        }
    }

    let flags = sol.d.iter().filter(|&&x| x).count();
    if flags != sol.objective {
        v.push(Objective, None, None, None, format!("objective {} but {flags} completion flags set", sol.objective));
    }

    Ok(Evaluation {
        feasible: v.total == 0,
        violations: v.out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{builtin_profile, RobotKind};

    fn inst(w: usize, h: usize, robots: usize, horizon: usize, kappa: f64) -> RpInstance {
        let g = GridMap::new(w, h, 10.0, Cell::new(0, 0)).unwrap();
        RpInstance::uniform(g, horizon, 10.0, &builtin_profile(RobotKind::Wheeled), robots, Cell::new(0, 0), kappa)
            .unwrap()
    }

    fn walk(cells: &[(usize, usize)]) -> Vec<Cell> {
        cells.iter().map(|&(a, b)| Cell::new(a, b)).collect()
    }

    #[test]
    fn model_size_small() {
        let i = inst(2, 2, 1, 4, 1.0);
        let m = build_milp(&i).unwrap();
        assert_eq!(m.count_vars("d["), 4);
        assert_eq!(m.count_vars("e["), 16);
        assert_eq!(m.count_vars("l["), 16);
        assert_eq!(m.objective.len(), 4);
        // 2x2: every cell neighbors every cell, 16 arcs per transition.
        assert_eq!(m.count_vars("m["), 16 * 3);
    }

    #[test]
    fn coverage_rhs_rounds_up() {
        let i = inst(5, 5, 2, 9, 0.7);
        let m = build_milp(&i).unwrap();
        assert_eq!(m.constraint("cover_final").unwrap().rhs, 18.0);
    }

    #[test]
    fn counting_infeasible_rejected() {
        let i = inst(5, 5, 1, 9, 1.0);
        assert!(matches!(build_milp(&i), Err(Error::ProvablyInfeasible(_))));
    }

    #[test]
    fn single_cell_trivially_done() {
        let i = inst(1, 1, 1, 1, 1.0);
        let m = build_milp(&i).unwrap();
        let sol = Solution::from_paths(&i, &[walk(&[(0, 0)])]).unwrap();
        assert_eq!(sol.objective, 0);
        let x = m.assignment(&i, &sol);
        assert!(m.violated(&x, 1e-6).is_empty());
        assert_eq!(m.objective_value(&x), 0.0);
    }

    #[test]
    fn interior_cell_has_nine_arcs() {
        let i = inst(3, 3, 1, 2, 0.1);
        let m = build_milp(&i).unwrap();
        let center = i.grid.index(Cell::new(1, 1));
        let arcs = (0..9).filter(|&to| m.index.arc(0, 0, center, to).is_some()).count();
        assert_eq!(arcs, 9);
    }

    #[test]
    fn product_linearization_forces_single_arc() {
        let i = inst(3, 3, 1, 2, 0.1);
        let m = build_milp(&i).unwrap();
        let sol = Solution::from_paths(&i, &[walk(&[(0, 0), (1, 1)])]).unwrap();
        let mut x = m.assignment(&i, &sol);
        let lin: Vec<&Constraint> = m.constraints.iter().filter(|c| c.name.starts_with("lin_m")).collect();
        let mut forced_one = 0;
        for (&(_, _, from, to), &id) in &m.index.arcs {
            let feasible_with = |x: &mut Vec<f64>, val: f64| {
                x[id] = val;
                lin.iter()
                    .filter(|c| c.terms.iter().any(|&(v, _)| v == id))
                    .all(|c| {
                        let lhs: f64 = c.terms.iter().map(|&(v, a)| a * x[v]).sum();
                        match c.relation {
                            Relation::Le => lhs <= c.rhs + 1e-9,
                            Relation::Ge => lhs >= c.rhs - 1e-9,
                            Relation::Eq => (lhs - c.rhs).abs() <= 1e-9,
                        }
                    })
            };
            let zero_ok = feasible_with(&mut x, 0.0);
            let one_ok = feasible_with(&mut x, 1.0);
            assert!(zero_ok ^ one_ok, "arc {from}->{to} not determined");
            if one_ok {
                forced_one += 1;
                assert_eq!((i.grid.cell(from), i.grid.cell(to)), (Cell::new(0, 0), Cell::new(1, 1)));
            }
        }
        assert_eq!(forced_one, 1);
    }

    #[test]
    fn stay_arc_charges_idle() {
        let i = inst(2, 2, 1, 2, 0.25);
        let m = build_milp(&i).unwrap();
        let c = i.grid.index(Cell::new(0, 0));
        let id = m.index.arc(0, 0, c, c).unwrap();
        let row = m.constraint("battery[0,2]").unwrap();
        let coeff = row.terms.iter().find(|&&(v, _)| v == id).unwrap().1;
        let stay = epoch_energy(&i.robots[0].profile, Move::Stay, false, Cell::new(0, 0), &i.grid, 10.0);
        assert_eq!(coeff, stay.idle.joules());
        assert_eq!(row.rhs, -stay.rx.joules());
    }

    #[test]
    fn walk_solution_satisfies_model_and_checker() {
        let i = inst(3, 3, 1, 9, 1.0);
        let path = walk(&[(0, 0), (1, 0), (2, 0), (2, 1), (1, 1), (0, 1), (0, 2), (1, 2), (2, 2)]);
        let sol = Solution::from_paths(&i, &[path]).unwrap();
        assert_eq!(sol.objective, 8);
        let ev = evaluate(&i, &sol).unwrap();
        assert!(ev.feasible, "{:?}", ev.violations);
        let m = build_milp(&i).unwrap();
        let x = m.assignment(&i, &sol);
        assert_eq!(m.violated(&x, 1e-6), Vec::<String>::new());
        assert_eq!(m.objective_value(&x), 8.0);
    }

    #[test]
    fn teleport_is_reported() {
        let i = inst(3, 3, 1, 3, 0.3);
        let mut sol = Solution::from_paths(&i, &[walk(&[(0, 0), (1, 0), (2, 0)])]).unwrap();
        // Rewrite epoch 1 so the robot jumps two cells from the start.
        sol.l[0][1] = vec![false; 9];
        sol.l[0][1][i.grid.index(Cell::new(2, 0))] = true;
        let ev = evaluate(&i, &sol).unwrap();
        assert!(!ev.feasible);
        assert!(ev.violations.iter().any(|v| v.kind == ConstraintKind::Mobility && v.epoch == Some(1)));
    }

    #[test]
    fn battery_overdraft_is_reported() {
        let g = GridMap::new(3, 1, 10.0, Cell::new(0, 0)).unwrap();
        let mut p = builtin_profile(RobotKind::Wheeled);
        p.battery_capacity_j = 300.0;
        let i = RpInstance::uniform(g, 3, 10.0, &p, 1, Cell::new(0, 0), 1.0).unwrap();
        let sol = Solution::from_paths(&i, &[walk(&[(0, 0), (1, 0), (2, 0)])]).unwrap();
        let ev = evaluate(&i, &sol).unwrap();
        assert!(ev.violations.iter().any(|v| v.kind == ConstraintKind::BatteryBounds && v.epoch == Some(2)));
    }

    #[test]
    fn evaluate_rejects_wrong_dimensions() {
        let i = inst(3, 3, 1, 3, 0.3);
        let sol = Solution::from_paths(&i, &[walk(&[(0, 0), (1, 0), (2, 0)])]).unwrap();
        let other = inst(3, 3, 2, 3, 0.3);
        assert!(matches!(evaluate(&other, &sol), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn canonical_text_lists_everything() {
        let i = inst(1, 2, 1, 2, 1.0);
        let m = build_milp(&i).unwrap();
        let text = m.to_canonical_text();
        assert!(text.starts_with(&format!("# variables {}\n", m.variables.len())));
        assert!(text.contains("cover_final: +1 e[2,0,0] +1 e[2,0,1] >= 2\n"));
        assert!(text.contains("min +1 d[1] +1 d[2]\n"));
        assert_eq!(text, build_milp(&i).unwrap().to_canonical_text());
    }

    #[test]
    fn instance_validation() {
        let g = GridMap::new(2, 2, 10.0, Cell::new(0, 0)).unwrap();
        let p = builtin_profile(RobotKind::Wheeled);
        assert!(RpInstance::uniform(g.clone(), 0, 10.0, &p, 1, Cell::new(0, 0), 0.5).is_err());
        assert!(RpInstance::uniform(g.clone(), 2, 10.0, &p, 1, Cell::new(0, 0), 0.0).is_err());
        assert!(RpInstance::uniform(g.clone(), 2, 10.0, &p, 1, Cell::new(0, 0), 1.1).is_err());
        assert!(RpInstance::uniform(g.clone(), 2, 10.0, &p, 1, Cell::new(2, 0), 0.5).is_err());
        assert!(RpInstance::uniform(g, 2, 10.0, &p, 0, Cell::new(0, 0), 0.5).is_err());
    }
}
