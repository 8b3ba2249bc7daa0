//! One line per acceptance criterion; exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use sarplan_core::energy::{
    builtin_profile, comparison_table, quadruped_component_table, total_centiwatts, Energy, RobotKind,
};
use sarplan_core::grid::Cell;
use sarplan_core::model::{evaluate, RpInstance};
use sarplan_core::planner::{plan_mission, PlanStatus};
use sarplan_core::scenario::ScenarioFile;
use sarplan_core::solver::{brute_force_oracle, solve, SolveBudget, SolveMode, SolveStatus};
use sarplan_core::validator::replay;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn scenario(name: &str) -> ScenarioFile {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    ScenarioFile::load(&p).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn exact() -> SolveBudget {
    SolveBudget {
        mode: SolveMode::Exact,
        workers: 1,
        ..SolveBudget::default()
    }
}

fn heuristic() -> SolveBudget {
    SolveBudget {
        mode: SolveMode::Heuristic,
        ..SolveBudget::default()
    }
}

const SEEDS: u64 = 40;

fn small_scenarios() -> Check {
    let mut notes = Vec::new();
    for name in ["50x50_wheeled.json", "50x50_quadruped.json"] {
        let file = scenario(name);
        let start = Instant::now();
        let res = plan_mission(&file.request().map_err(|e| e.to_string())?, &file.budget()).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        if res.status != PlanStatus::Planned || res.fleet_size != Some(3) || secs > 60.0 {
            return Err(format!("{name}: {:?} fleet {:?} in {secs:.2} s", res.status, res.fleet_size));
        }
        notes.push(format!("{name} fleet 3 in {:.1} ms", secs * 1e3));
    }
    Ok(notes.join(", "))
}

fn counting_proof() -> Check {
    let mut notes = Vec::new();
    for name in ["50x50_wheeled.json", "50x50_quadruped.json"] {
        let mut req = scenario(name).request().map_err(|e| e.to_string())?;
        req.tfs = 2;
        let res = plan_mission(&req, &SolveBudget::default()).map_err(|e| e.to_string())?;
        let why = res.infeasibility_reason.clone().unwrap_or_default();
        if res.status != PlanStatus::InfeasibleWithinTfs || !why.contains("= 17 cells") || !why.contains("18") {
            return Err(format!("{name}: {:?}, reason {why:?}", res.status));
        }
        notes.push(why);
    }
    Ok(notes.swap_remove(0))
}

fn oracle_agreement() -> Check {
    let start = Instant::now();
    let mut solved = 0;
    for seed in 0..SEEDS {
        let inst = common::random_instance(seed);
        let a = solve(&inst, &exact()).map_err(|e| e.to_string())?;
        let b = brute_force_oracle(&inst).map_err(|e| e.to_string())?;
        if a.status != b.status || a.objective() != b.objective() {
            return Err(format!(
                "seed {seed}: exact {:?}/{:?}, oracle {:?}/{:?}",
                a.status,
                a.objective(),
                b.status,
                b.objective()
            ));
        }
        solved += usize::from(a.has_solution());
    }
    Ok(format!(
        "{SEEDS} instances agree ({solved} feasible) in {:.1} ms",
        start.elapsed().as_secs_f64() * 1e3
    ))
}

/// Replays a solver solution and checks it is clean and conserves energy.
fn sound(inst: &RpInstance, label: &str, status: SolveStatus, sol: &sarplan_core::model::Solution) -> Result<(), String> {
    let ev = evaluate(inst, sol).map_err(|e| e.to_string())?;
    if !ev.feasible {
        return Err(format!("{label} ({status:?}): constraint check failed: {:?}", ev.violations.first()));
    }
    let tr = replay(inst, &sol.paths(&inst.grid)).map_err(|e| e.to_string())?;
    if !tr.is_clean() {
        return Err(format!("{label}: {:?}", tr.violations[0]));
    }
    if tr.batteries() != sol.battery {
        return Err(format!("{label}: replayed batteries differ from the solver's"));
    }
    if tr.completion_epochs != Some(sol.objective + 1) {
        return Err(format!("{label}: completion {:?} vs objective {}", tr.completion_epochs, sol.objective));
    }
    for (r, spec) in inst.robots.iter().enumerate() {
        let spent: Energy = tr.epochs.iter().map(|e| e.robots[r].cost.total).sum();
        if spec.initial_battery - tr.epochs.last().unwrap().robots[r].battery != spent {
            return Err(format!("{label}: robot {r} energy not conserved"));
        }
    }
    Ok(())
}

fn corpus() -> Vec<(String, RpInstance)> {
    let mut v: Vec<_> = (0..SEEDS).map(|s| (format!("seed {s}"), common::random_instance(s))).collect();
    for name in ["50x50_wheeled.json", "50x50_quadruped.json"] {
        let req = scenario(name).request().unwrap();
        for r in 1..=4 {
            v.push((format!("{name} R={r}"), req.instance(r).unwrap()));
        }
    }
    v.push(("4x4 R2".into(), common::uniform(4, 4, 2, 9, 1.0, RobotKind::Wheeled)));
    v
}

fn validator_soundness() -> Check {
    let mut checked = 0;
    for (label, inst) in corpus() {
        for budget in [exact(), heuristic()] {
            let out = solve(&inst, &budget).map_err(|e| e.to_string())?;
            if let Some(sol) = &out.solution {
                sound(&inst, &format!("{label} {:?}", budget.mode), out.status, sol)?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} solutions replay clean, battery drop equals summed costs"))
}

fn profiles() -> Check {
    let table1 = [
        15.77, 19.25, 29.38, 56.84, 21.62, 75.79, 93.14, 80.33, 73.86, 53.26, 108.86, 211.22,
    ];
    let ours: Vec<f64> = quadruped_component_table().iter().map(|r| r.watts).collect();
    if ours.len() != 12 || ours.iter().zip(table1).any(|(a, b)| (a - b).abs() > 0.005) {
        return Err(format!("component table {ours:?}"));
    }
    let quad = [15.77, 16.72, 76.09, 80.33, 108.86];
    let wheel = [4.0, 4.95, 12.0, 0.29, 7.40];
    let rows = comparison_table();
    let mut n = 0;
    for (i, row) in rows.iter().enumerate() {
        if (row.quadruped_w - quad[i]).abs() > 0.005 || (row.wheeled_w - wheel[i]).abs() > 0.005 {
            return Err(format!("{}: {} / {}", row.element, row.quadruped_w, row.wheeled_w));
        }
        n += 2;
    }
    let tq = total_centiwatts(rows.iter().map(|r| r.quadruped_w));
    let tw = total_centiwatts(rows.iter().map(|r| r.wheeled_w));
    if n != 10 || tq != 29777 || tw != 2864 {
        return Err(format!("totals {tq} / {tw} cW over {n} values"));
    }
    Ok("12 + 10 wattages match, totals 297.77 W and 28.64 W".into())
}

fn large_ordering() -> Check {
    let start = Instant::now();
    let mut out = Vec::new();
    for name in ["500x500_wheeled.json", "500x500_quadruped.json"] {
        let file = scenario(name);
        let res = plan_mission(&file.request().map_err(|e| e.to_string())?, &heuristic()).map_err(|e| e.to_string())?;
        out.push(res);
    }
    let secs = start.elapsed().as_secs_f64();
    let (w, q) = (&out[0], &out[1]);
    if w.status != PlanStatus::Planned {
        return Err(format!("wheeled not planned: {:?}", w.infeasibility_reason));
    }
    let wf = w.fleet_size.unwrap();
    let detail = match (q.status, q.fleet_size) {
        (PlanStatus::Planned, Some(qf)) if qf >= wf => format!("quadruped {qf} >= wheeled {wf}"),
        (PlanStatus::InfeasibleWithinTfs, _) => {
            let why = q.infeasibility_reason.as_deref().unwrap_or("no reason given");
            let first = why.split("; ").next().unwrap_or(why);
            format!("quadruped needs more than tfs = {} robots, first refusal: {first}; wheeled {wf}", q.tfs)
        }
        other => return Err(format!("quadruped {other:?} vs wheeled {wf}")),
    };
    if secs > 300.0 {
        return Err(format!("{detail}, but took {secs:.1} s"));
    }
    Ok(format!("{detail}; {secs:.1} s"))
}

fn properties() -> Check {
    // (a) explored share never drops on any replayed trace.
    let mut traces = 0;
    for (label, inst) in corpus() {
        for budget in [exact(), heuristic()] {
            let out = solve(&inst, &budget).map_err(|e| e.to_string())?;
            if let Some(sol) = &out.solution {
                let tr = replay(&inst, &sol.paths(&inst.grid)).map_err(|e| e.to_string())?;
                if tr.epochs.windows(2).any(|w| w[0].explored_pct > w[1].explored_pct) {
                    return Err(format!("(a) {label}: explored share dropped"));
                }
                traces += 1;
            }
        }
    }
    // (b) and (d) on oracle-sized instances.
    for seed in 0..SEEDS {
        let one = common::random_instance(seed);
        let mut objs = Vec::new();
        for r in 1..=3 {
            let mut inst = one.clone();
            let base = inst.robots[0].clone();
            inst.robots = (0..r)
                .map(|id| sarplan_core::model::RobotSpec { id, ..base.clone() })
                .collect();
            let ex = solve(&inst, &exact()).map_err(|e| e.to_string())?;
            let he = solve(&inst, &heuristic()).map_err(|e| e.to_string())?;
            if let (Some(h), Some(x)) = (he.objective(), ex.objective()) {
                if h < x {
                    return Err(format!("(d) seed {seed} R={r}: heuristic {h} < exact {x}"));
                }
            }
            if he.has_solution() && !ex.has_solution() {
                return Err(format!("(d) seed {seed} R={r}: heuristic solved what exact could not"));
            }
            objs.push(ex.objective().unwrap_or(usize::MAX));
        }
        if objs.windows(2).any(|w| w[1] > w[0]) {
            return Err(format!("(b) seed {seed}: objectives {objs:?}"));
        }
    }
    // (c) two single-worker CLI runs give identical bytes.
    let dir = std::env::temp_dir().join(format!("sarplan-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.join(format!("run{i}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_sarplan"))
            .args(["plan", "--scenario"])
            .arg(scenario_path("50x50_quadruped.json"))
            .arg("--out")
            .arg(&out)
            .args(["--workers", "1", "--seed", "7", "--mode", "exact"])
            .env_remove("SARPLAN_SERVER")
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("(c) run {i} exited {:?}", status.status.code()));
        }
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    if outputs[0] != outputs[1] {
        return Err("(c) result JSON differs between runs".into());
    }
    Ok(format!(
        "(a) {traces} traces monotone, (b) {SEEDS}x3 fleets nonincreasing, (c) byte-identical, (d) heuristic >= exact"
    ))
}

fn energy_gating() -> Check {
    let inst = scenario("50x50_wheeled.json").request().unwrap().instance(1).unwrap();
    let path = [(0, 0), (1, 0), (2, 0), (1, 0), (0, 0), (1, 1), (1, 1), (2, 2), (2, 2)]
        .map(|(a, b)| Cell::new(a, b))
        .to_vec();
    let tr = replay(&inst, &[path]).map_err(|e| e.to_string())?;
    let p = builtin_profile(RobotKind::Wheeled);
    for t in [3, 4, 6, 8] {
        let c = tr.epochs[t].robots[0].cost;
        if c.sensing != Energy::ZERO || c.tx != Energy::ZERO || c.rx != Energy::from_power(p.rx_power_w, 10.0, 1.0) {
            return Err(format!("revisit epoch {}: {c:?}", t + 1));
        }
    }
    for t in [1, 2, 5, 7] {
        let c = tr.epochs[t].robots[0].cost;
        if c.sensing == Energy::ZERO || c.tx == Energy::ZERO {
            return Err(format!("new cell epoch {}: {c:?}", t + 1));
        }
    }
    Ok("4 revisit epochs carry no sensing or transmission, 4 new-cell epochs do".into())
}

fn main() -> ExitCode {
    let checks: [Criterion; 8] = [
        ("1 small scenarios need three robots", small_scenarios),
        ("2 two robots proven too few", counting_proof),
        ("3 exact search agrees with enumeration", oracle_agreement),
        ("4 validator soundness and energy conservation", validator_soundness),
        ("5 energy profile tables", profiles),
        ("6 large area: quadruped fleet >= wheeled fleet", large_ordering),
        ("7 property suite", properties),
        ("8 revisits skip sensing and transmission", energy_gating),
    ];
    let mut failed = 0;
    for (name, f) in checks {
        match f() {
            Ok(msg) => println!("[PASS] {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {name}: {msg}");
            }
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
