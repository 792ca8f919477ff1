//! Scenario orchestration and CSV emission.
//!
//! Budget points run in parallel and write disjoint files; report and sweep
//! tables are assembled after the join, in input order.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};
use pev_bottleneck::model::optimal_charging_time;
use pev_bottleneck::oracle::best_response_dynamics;
use pev_bottleneck::{
    classical_equilibrium, evolve_queue, BestResponseConfig, DepartureProfile, IncentiveSchedule,
    LimitedBudgetSolution, QueueTrajectory, ScenarioParams, TimeGrid,
};
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::CliError;

/// Column documentation written to `schema.csv`: file, column, unit, meaning.
const SCHEMA: &[(&str, &str, &str, &str)] = &[
    ("queue_<budget>.csv", "t", "min", "departure time"),
    (
        "queue_<budget>.csv",
        "departure_rate",
        "veh/min",
        "departure rate r(t)",
    ),
    ("queue_<budget>.csv", "queue", "veh", "queue length Q(t)"),
    (
        "queue_<budget>.csv",
        "waiting_time",
        "min",
        "queueing delay Q(t)/s",
    ),
    (
        "classical.csv",
        "*",
        "",
        "same columns as queue_<budget>.csv for the no-incentive equilibrium",
    ),
    ("price_<budget>.csv", "t", "min", "departure time"),
    (
        "price_<budget>.csv",
        "discount",
        "$/min",
        "electricity discount p(t)",
    ),
    (
        "price_<budget>.csv",
        "net_price",
        "$/min",
        "base price minus discount",
    ),
    (
        "price_<budget>.csv",
        "charging_time",
        "min",
        "optimal charging stop at the discount",
    ),
    ("report.csv", "budget", "$", "requested budget"),
    ("report.csv", "m_dollars", "$", "money spent"),
    (
        "report.csv",
        "m_perceived",
        "$",
        "money perceived by commuters",
    ),
    (
        "report.csv",
        "inefficiency_gap",
        "$",
        "m_dollars - m_perceived",
    ),
    (
        "report.csv",
        "gap_share",
        "1",
        "inefficiency_gap / m_dollars; empty when nothing is spent",
    ),
    (
        "report.csv",
        "tstt",
        "veh min",
        "total queueing time of the simulated queue",
    ),
    (
        "report.csv",
        "tstt_closed_form",
        "veh min",
        "total queueing time from the closed form",
    ),
    (
        "report.csv",
        "tstt_share",
        "1",
        "tstt over the no-incentive total queueing time",
    ),
    (
        "report.csv",
        "c_e",
        "$",
        "departure-weighted mean total cost",
    ),
    ("report.csv", "peak_queue", "veh", "largest simulated queue"),
    (
        "report.csv",
        "peak_time",
        "min",
        "time of the largest queue",
    ),
    (
        "report.csv",
        "t_ell",
        "min",
        "start of the congested window",
    ),
    (
        "report.csv",
        "t_dblprime",
        "min",
        "departure time of the on-time arrival inside the window",
    ),
    ("report.csv", "t_r", "min", "end of the congested window"),
    (
        "report.csv",
        "mass_residual",
        "veh",
        "integral of r minus N",
    ),
    (
        "report.csv",
        "over_budget",
        "0/1",
        "budget exceeded the full-removal budget; unlimited policy used",
    ),
    (
        "report.csv",
        "discount_exceeds_base_price",
        "0/1",
        "some discount is above the base price",
    ),
    (
        "report.csv",
        "oracle_converged",
        "0/1",
        "best response settled (with --with-oracle)",
    ),
    (
        "report.csv",
        "oracle_iterations",
        "1",
        "best-response rounds (with --with-oracle)",
    ),
    (
        "report.csv",
        "oracle_max_improvement",
        "$",
        "largest remaining deviation gain (with --with-oracle)",
    ),
    (
        "report.csv",
        "oracle_tolerance",
        "$",
        "gain below which agents stay put (with --with-oracle)",
    ),
    (
        "report.csv",
        "oracle_tstt",
        "veh min",
        "total queueing time of the agent population (with --with-oracle)",
    ),
    (
        "report.csv",
        "oracle_tstt_deviation",
        "1",
        "(oracle_tstt - tstt) / no-incentive total queueing time (with --with-oracle)",
    ),
    ("sweep.csv", "budget", "$", "requested budget"),
    ("sweep.csv", "m_dollars", "$", "money spent"),
    (
        "sweep.csv",
        "m_perceived",
        "$",
        "money perceived by commuters",
    ),
    (
        "sweep.csv",
        "inefficiency_gap",
        "$",
        "m_dollars - m_perceived",
    ),
    (
        "sweep.csv",
        "gap_share",
        "1",
        "inefficiency_gap / m_dollars; empty when nothing is spent",
    ),
    (
        "sweep.csv",
        "tstt",
        "veh min",
        "total queueing time from the closed form",
    ),
    (
        "sweep.csv",
        "tstt_share",
        "1",
        "tstt over the no-incentive total queueing time",
    ),
    ("sweep.csv", "t_ell", "min", "start of the congested window"),
    (
        "sweep.csv",
        "t_dblprime",
        "min",
        "departure time of the on-time arrival inside the window",
    ),
    ("sweep.csv", "t_r", "min", "end of the congested window"),
    (
        "sweep.csv",
        "over_budget",
        "0/1",
        "budget exceeded the full-removal budget; unlimited policy used",
    ),
];

/// Fixed-precision rendering; values that round to zero print unsigned.
fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn ratio(a: f64, b: f64) -> String {
    if b > 0.0 {
        num(a / b)
    } else {
        String::new()
    }
}

/// File-name fragment for a budget, e.g. `8660.00`.
pub fn budget_label(budget: f64) -> String {
    format!("{budget:.2}")
}

fn write(path: PathBuf, body: String) -> Result<PathBuf, CliError> {
    std::fs::write(&path, body).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

fn queue_csv(profile: &DepartureProfile, traj: &QueueTrajectory) -> String {
    let mut out = String::from("t,departure_rate,queue,waiting_time\n");
    for (i, t) in traj.grid().points().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(t),
            num(profile.rate(t)),
            num(traj.queue()[i]),
            num(traj.waiting()[i])
        );
    }
    out
}

fn price_csv(schedule: &IncentiveSchedule, params: &ScenarioParams, grid: &TimeGrid) -> String {
    let mut out = String::from("t,discount,net_price,charging_time\n");
    for t in grid.points() {
        let p = schedule.discount(t);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(t),
            num(p),
            num(params.p_bar() - p),
            num(optimal_charging_time(p, params))
        );
    }
    out
}

/// Best-response verification of one budget point.
#[derive(Debug, Clone)]
pub struct OracleSummary {
    pub converged: bool,
    pub iterations: usize,
    pub max_improvement: f64,
    pub tolerance: f64,
    pub tstt: f64,
}

/// Everything computed for one requested budget.
#[derive(Debug, Clone)]
pub struct BudgetPoint {
    pub budget: f64,
    pub solution: LimitedBudgetSolution,
    /// Time of the largest simulated queue, min.
    pub peak_time: f64,
    pub oracle: Option<OracleSummary>,
}

/// One row of the sweep table.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub budget: f64,
    pub solution: LimitedBudgetSolution,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub points: Vec<BudgetPoint>,
    pub sweep: Vec<SweepRow>,
    pub files: Vec<PathBuf>,
}

fn solve(
    budget: f64,
    params: &ScenarioParams,
    grid: &TimeGrid,
) -> Result<LimitedBudgetSolution, CliError> {
    LimitedBudgetSolution::solve_or_unlimited(budget, params, grid)
        .map_err(|source| CliError::Numeric { budget, source })
}

fn run_oracle(
    sol: &LimitedBudgetSolution,
    params: &ScenarioParams,
    grid: &TimeGrid,
    seed: u64,
) -> Result<OracleSummary, CliError> {
    let cfg = BestResponseConfig {
        seed,
        ..BestResponseConfig::default()
    };
    let (pop, rep) = best_response_dynamics(&sol.schedule, params, &cfg);
    let traj = evolve_queue(&pop.departure_profile(), params, grid).map_err(|source| {
        CliError::Numeric {
            budget: sol.report.m_dollars,
            source,
        }
    })?;
    Ok(OracleSummary {
        converged: rep.converged,
        iterations: rep.iterations,
        max_improvement: rep.max_improvement,
        tolerance: rep.tolerance,
        tstt: traj.total_system_travel_time(),
    })
}

fn budget_point(
    budget: f64,
    cfg: &ScenarioConfig,
    grid: &TimeGrid,
    dir: &Path,
    with_oracle: bool,
) -> Result<(BudgetPoint, Vec<PathBuf>), CliError> {
    let params = &cfg.params;
    let solution = solve(budget, params, grid)?;
    let traj = evolve_queue(&solution.profile, params, grid)
        .map_err(|source| CliError::Numeric { budget, source })?;
    let label = budget_label(budget);
    let files = vec![
        write(
            dir.join(format!("queue_{label}.csv")),
            queue_csv(&solution.profile, &traj),
        )?,
        write(
            dir.join(format!("price_{label}.csv")),
            price_csv(&solution.schedule, params, grid),
        )?,
    ];
    let oracle = if with_oracle {
        Some(run_oracle(&solution, params, grid, cfg.seed)?)
    } else {
        None
    };
    info!(
        "budget {label}: window {:.3}..{:.3}",
        solution.t_ell, solution.t_r
    );
    Ok((
        BudgetPoint {
            budget,
            peak_time: traj.peak().0,
            solution,
            oracle,
        },
        files,
    ))
}

fn report_csv(points: &[BudgetPoint], nu: f64, with_oracle: bool) -> String {
    let mut out = String::from(
        "budget,m_dollars,m_perceived,inefficiency_gap,gap_share,tstt,tstt_closed_form,\
         tstt_share,c_e,peak_queue,peak_time,t_ell,t_dblprime,t_r,mass_residual,over_budget,\
         discount_exceeds_base_price",
    );
    if with_oracle {
        out.push_str(
            ",oracle_converged,oracle_iterations,oracle_max_improvement,oracle_tolerance,\
             oracle_tstt,oracle_tstt_deviation",
        );
    }
    out.push('\n');
    for pt in points {
        let s = &pt.solution;
        let r = &s.report;
        let cells = [
            num(pt.budget),
            num(r.m_dollars),
            num(r.m_perceived),
            num(r.inefficiency_gap),
            ratio(r.inefficiency_gap, r.m_dollars),
            num(r.tstt),
            num(s.tstt_closed_form),
            ratio(r.tstt, nu),
            num(r.c_e),
            num(r.peak_queue),
        ];
        out.push_str(&cells.join(","));
        let _ = write!(
            out,
            ",{},{},{},{},{},{},{}",
            num(pt.peak_time),
            num(s.t_ell),
            num(s.t_dblprime),
            num(s.t_r),
            num(r.mass_residual),
            flag(r.flags.over_budget),
            flag(r.flags.discount_exceeds_base_price)
        );
        if let Some(o) = &pt.oracle {
            let _ = write!(
                out,
                ",{},{},{},{},{},{}",
                flag(o.converged),
                o.iterations,
                num(o.max_improvement),
                num(o.tolerance),
                num(o.tstt),
                ratio(o.tstt - r.tstt, nu)
            );
        }
        out.push('\n');
    }
    out
}

fn sweep_csv(rows: &[SweepRow], nu: f64) -> String {
    let mut out = String::from(
        "budget,m_dollars,m_perceived,inefficiency_gap,gap_share,tstt,tstt_share,t_ell,\
         t_dblprime,t_r,over_budget\n",
    );
    for row in rows {
        let s = &row.solution;
        let r = &s.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            num(row.budget),
            num(r.m_dollars),
            num(r.m_perceived),
            num(r.inefficiency_gap),
            ratio(r.inefficiency_gap, r.m_dollars),
            num(s.tstt_closed_form),
            ratio(s.tstt_closed_form, nu),
            num(s.t_ell),
            num(s.t_dblprime),
            num(s.t_r),
            flag(r.flags.over_budget)
        );
    }
    out
}

/// Warns when the sweep departs from the expected trends: travel time
/// falling and the inefficiency share shrinking as the budget grows.
fn check_sweep_trends(rows: &[SweepRow]) {
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0].solution, &pair[1].solution);
        if pair[1].budget <= pair[0].budget {
            continue;
        }
        if b.tstt_closed_form > a.tstt_closed_form {
            warn!(
                "sweep: total queueing time rises between budgets {} and {}",
                budget_label(pair[0].budget),
                budget_label(pair[1].budget)
            );
        }
        let share = |s: &LimitedBudgetSolution| {
            (s.report.m_dollars > 0.0).then(|| s.report.inefficiency_gap / s.report.m_dollars)
        };
        if let (Some(x), Some(y)) = (share(a), share(b)) {
            if y > x * (1.0 + 1e-9) {
                warn!(
                    "sweep: inefficiency share rises between budgets {} and {}",
                    budget_label(pair[0].budget),
                    budget_label(pair[1].budget)
                );
            }
        }
    }
}

/// Solves every requested budget and sweep point and writes the CSV series,
/// the report, the sweep table and the schema into `cfg.output_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, with_oracle: bool) -> Result<RunSummary, CliError> {
    let params = &cfg.params;
    let dir = cfg.output_dir.as_path();
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let grid = TimeGrid::over_horizon(params, cfg.grid_dt)
        .map_err(|e| CliError::Config(format!("grid_dt = {}: {e}", cfg.grid_dt)))?;

    let mut budgets: Vec<f64> = Vec::with_capacity(cfg.budgets.len());
    for &b in &cfg.budgets {
        if budgets.iter().any(|&x| budget_label(x) == budget_label(b)) {
            warn!("budget {} listed twice; keeping the first", budget_label(b));
        } else {
            budgets.push(b);
        }
    }

    let eq = classical_equilibrium(params);
    let eq_traj = evolve_queue(&eq.profile, params, &grid).map_err(|source| CliError::Numeric {
        budget: 0.0,
        source,
    })?;
    let mut files = vec![
        write(dir.join("schema.csv"), schema_csv())?,
        write(dir.join("classical.csv"), queue_csv(&eq.profile, &eq_traj))?,
    ];

    let results = budgets
        .par_iter()
        .map(|&b| budget_point(b, cfg, &grid, dir, with_oracle))
        .collect::<Result<Vec<_>, _>>()?;
    let mut points = Vec::with_capacity(results.len());
    for (pt, written) in results {
        points.push(pt);
        files.extend(written);
    }
    let nu = params.nu();
    if !points.is_empty() {
        files.push(write(
            dir.join("report.csv"),
            report_csv(&points, nu, with_oracle),
        )?);
    }

    let mut sweep = Vec::new();
    if let Some(spec) = &cfg.sweep {
        sweep = spec
            .budgets()
            .par_iter()
            .map(|&b| {
                solve(b, params, &grid).map(|solution| SweepRow {
                    budget: b,
                    solution,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        check_sweep_trends(&sweep);
        files.push(write(dir.join("sweep.csv"), sweep_csv(&sweep, nu))?);
    }

    let stalled: Vec<String> = points
        .iter()
        .filter(|p| p.oracle.as_ref().is_some_and(|o| !o.converged))
        .map(|p| budget_label(p.budget))
        .collect();
    if !stalled.is_empty() {
        return Err(CliError::Oracle(stalled.join(", ")));
    }
    Ok(RunSummary {
        points,
        sweep,
        files,
    })
}

fn schema_csv() -> String {
    let mut out = String::from("file,column,unit,description\n");
    for (file, column, unit, description) in SCHEMA {
        let _ = writeln!(out, "{file},{column},{unit},\"{description}\"");
    }
    out
}
