//! `sarplan`: command-line client of the mission planner service.
//!
//! Without `--server` the service runs in-process on a loopback port.
//!
//! Exit codes: 0 success, 1 input or transport error, 2 infeasible within
//! the available fleet (or no fleet size in a sweep met the target),
//! 3 inconclusive (solver budget ran out), 4 plan failed validation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use sarplan_client::{Client, ClientError};
use sarplan_core::api::{BudgetOverrides, ProfilesResponse};
use sarplan_core::planner::{write_curve_csv, write_sweep_csv, PlanStatus};
use sarplan_core::solver::SolveMode;
use sarplan_core::validator::{write_cost_csv, write_trace_csv};

const INPUT_ERROR: u8 = 1;
const INFEASIBLE: u8 = 2;
const INCONCLUSIVE: u8 = 3;
const INVALID_PLAN: u8 = 4;

#[derive(Parser)]
#[command(name = "sarplan", version, about = "Fleet sizing and path planning for search-and-rescue robots")]
struct Cli {
    /// Service base URL; an in-process service is started when omitted.
    #[arg(long, global = true, env = "SARPLAN_SERVER")]
    server: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct BudgetArgs {
    #[arg(long, env = "SARPLAN_MODE")]
    mode: Option<SolveMode>,
    /// Node limit per fleet size.
    #[arg(long, env = "SARPLAN_BUDGET_NODES")]
    budget_nodes: Option<u64>,
    /// Wall-clock limit per fleet size, seconds.
    #[arg(long, env = "SARPLAN_BUDGET_SECONDS")]
    budget_seconds: Option<f64>,
    /// Search threads; 0 uses every core.
    #[arg(long, env = "SARPLAN_WORKERS")]
    workers: Option<usize>,
    #[arg(long, env = "SARPLAN_SEED")]
    seed: Option<u64>,
}

impl BudgetArgs {
    fn overrides(&self) -> BudgetOverrides {
        BudgetOverrides {
            mode: self.mode,
            max_nodes: self.budget_nodes,
            wall_seconds: self.budget_seconds,
            workers: self.workers,
            seed: self.seed,
            restarts: None,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Find the smallest fleet that meets the scenario's target.
    Plan {
        #[arg(long, env = "SARPLAN_SCENARIO")]
        scenario: PathBuf,
        /// Result JSON; trace, cost and solver-log files are written next to it.
        #[arg(long, env = "SARPLAN_OUT")]
        out: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Explored-area curves for a range of fleet sizes.
    Sweep {
        #[arg(long, env = "SARPLAN_SCENARIO")]
        scenario: PathBuf,
        #[arg(long)]
        r_min: usize,
        #[arg(long)]
        r_max: usize,
        /// Output directory.
        #[arg(long, env = "SARPLAN_OUT")]
        out: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Replay a plan and report violations.
    Validate {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, env = "SARPLAN_SCENARIO")]
        scenario: PathBuf,
    },
    /// Print the built-in energy profiles and the component table.
    Profiles,
    /// Write the mixed-integer model for one fleet size as text.
    Model {
        #[arg(long, env = "SARPLAN_SCENARIO")]
        scenario: PathBuf,
        #[arg(long)]
        fleet_size: usize,
        #[arg(long, env = "SARPLAN_OUT")]
        out: PathBuf,
    },
    /// Run the HTTP service in the foreground.
    Serve {
        #[arg(long, env = "SARPLAN_BIND", default_value = "127.0.0.1:8080")]
        bind: String,
    },
}

#[derive(Debug)]
struct Failure(String);

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        Failure(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<sarplan_core::Error> for Failure {
    fn from(e: sarplan_core::Error) -> Self {
        Failure(e.to_string())
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| Failure(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

/// `dir/stem.suffix` next to `out`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("plan");
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn create(path: &Path) -> Result<std::fs::File, Failure> {
    std::fs::File::create(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

async fn plan(client: &Client, scenario: &Path, out: &Path, budget: &BudgetArgs) -> Result<u8, Failure> {
    let resp = client.plan(read_json(scenario)?, budget.overrides()).await?;
    let r = &resp.result;
    write_json(out, r)?;
    if let Some(trace) = &resp.trace {
        write_trace_csv(trace, create(&sibling(out, "trace.csv"))?)?;
        write_cost_csv(trace, create(&sibling(out, "costs.csv"))?)?;
    }
    let mut log = String::new();
    for e in &resp.events {
        log.push_str(&e.to_string());
        log.push('\n');
    }
    std::fs::write(sibling(out, "solver.jsonl"), log)?;

    let status = serde_json::to_value(r.status).map_err(|e| Failure(e.to_string()))?;
    println!("status: {}", status.as_str().unwrap_or("?"));
    if let Some(n) = r.fleet_size {
        println!("fleet_size: {n}");
    }
    if let Some(p) = &r.plan {
        if r.status != PlanStatus::Planned {
            println!("best attempt: {} robot(s)", p.fleet_size);
        }
        match p.completion_epochs {
            Some(k) => println!("completion: {k} of {} epochs ({} s)", r.horizon_epochs, k as f64 * r.epoch_s),
            None => println!("completion: target not met in {} epochs", r.horizon_epochs),
        }
        println!(
            "explored: {}/{} cells ({:.1}%), {} required",
            p.explored_cells,
            r.total_cells,
            100.0 * p.explored_rate,
            r.required_cells
        );
    }
    if let Some(why) = &r.infeasibility_reason {
        println!("reason: {why}");
    }
    if let Some(tr) = &resp.trace {
        if !tr.is_clean() {
            let what = if r.status == PlanStatus::Planned { "plan" } else { "best attempt" };
            println!("replay of the {what}: {} violation(s)", tr.violations.len());
        }
    }
    Ok(match r.status {
        PlanStatus::Planned => 0,
        PlanStatus::InfeasibleWithinTfs => INFEASIBLE,
        PlanStatus::Inconclusive => INCONCLUSIVE,
    })
}

async fn sweep(
    client: &Client,
    scenario: &Path,
    r_min: usize,
    r_max: usize,
    out: &Path,
    budget: &BudgetArgs,
) -> Result<u8, Failure> {
    if r_min == 0 || r_min > r_max {
        return Err(Failure(format!("invalid fleet range {r_min}..{r_max}")));
    }
    let resp = client.sweep(read_json(scenario)?, r_min, r_max, budget.overrides()).await?;
    std::fs::create_dir_all(out)?;
    for p in &resp.points {
        write_curve_csv(p, create(&out.join(format!("curve_r{}.csv", p.fleet_size)))?)?;
        let last = p.explored_rate_series.last().copied().unwrap_or(0.0);
        println!(
            "R={:<3} final {:>6.1}%  {}{}",
            p.fleet_size,
            100.0 * last,
            if p.met_target { "target met" } else { "target not met" },
            p.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
        );
    }
    write_sweep_csv(&resp.points, create(&out.join("sweep.csv"))?)?;
    write_json(&out.join("sweep.json"), &resp)?;
    Ok(if resp.points.iter().any(|p| p.met_target) { 0 } else { INFEASIBLE })
}

async fn validate(client: &Client, plan: &Path, scenario: &Path) -> Result<u8, Failure> {
    let resp = client.validate(read_json(scenario)?, read_json(plan)?).await?;
    let tr = &resp.trace;
    println!(
        "replayed {} epochs: {}/{} cells explored, {} required",
        tr.epochs.len(),
        tr.final_explored(),
        tr.total_cells,
        tr.required_cells
    );
    if resp.clean {
        println!("no violations");
        return Ok(0);
    }
    println!("{} violation(s):", tr.violations.len());
    for v in &tr.violations {
        let kind = serde_json::to_value(v.kind).map_err(|e| Failure(e.to_string()))?;
        let robot = v.robot.map(|r| format!(" robot {r}")).unwrap_or_default();
        let epoch = v.epoch.map(|t| format!(" epoch {t}")).unwrap_or_default();
        println!("  {}{robot}{epoch}: {}", kind.as_str().unwrap_or("?"), v.detail);
    }
    Ok(INVALID_PLAN)
}

fn print_profiles(p: &ProfilesResponse) {
    println!("Quadruped component power (W)");
    for r in &p.quadruped_components {
        println!("  {}, {:.2}", r.element, r.watts);
    }
    for (name, pick, total) in [
        ("wheeled", (|r: &sarplan_core::api::ComparisonEntry| r.wheeled_w) as fn(&_) -> f64, p.wheeled_total_w),
        ("quadruped", |r: &sarplan_core::api::ComparisonEntry| r.quadruped_w, p.quadruped_total_w),
    ] {
        let prof = p.profiles.iter().find(|x| x.name == name);
        println!();
        match prof {
            Some(x) => println!("{name} profile (W), battery {} J", x.battery_capacity_j),
            None => println!("{name} profile (W)"),
        }
        for r in &p.comparison {
            println!("  {}, {:.2}", r.element, pick(r));
        }
        println!("  Total, {total:.2}");
    }
}

async fn run(cli: Cli) -> Result<u8, Failure> {
    if let Command::Serve { bind } = &cli.command {
        let listener = tokio::net::TcpListener::bind(bind).await?;
        eprintln!("listening on {}", listener.local_addr()?);
        sarplan_service::serve(listener).await?;
        return Ok(0);
    }
    let client = match &cli.server {
        Some(url) => Client::new(url.clone()),
        None => {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
            let addr = listener.local_addr()?;
            tokio::spawn(sarplan_service::serve(listener));
            Client::new(format!("http://{addr}"))
        }
    };
    match &cli.command {
        Command::Plan { scenario, out, budget } => plan(&client, scenario, out, budget).await,
        Command::Sweep {
            scenario,
            r_min,
            r_max,
            out,
            budget,
        } => sweep(&client, scenario, *r_min, *r_max, out, budget).await,
        Command::Validate { plan, scenario } => validate(&client, plan, scenario).await,
        Command::Profiles => {
            print_profiles(&client.profiles().await?);
            Ok(0)
        }
        Command::Model {
            scenario,
            fleet_size,
            out,
        } => {
            let m = client.model(read_json(scenario)?, *fleet_size).await?;
            std::fs::write(out, &m.text)?;
            println!("{} variables, {} constraints -> {}", m.variables, m.constraints, out.display());
            Ok(0)
        }
        Command::Serve { .. } => unreachable!(),
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).await {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
