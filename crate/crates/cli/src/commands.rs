use std::path::Path;

use fronthaul_core::ilp::{build_model, export_lp as write_lp, verify_plan, BuildOptions};
use fronthaul_core::model::compute_distances;
use fronthaul_core::render::{render_map, RenderStyle};
use fronthaul_core::scenario::{run_sweep, trend_checks, Outcome, ScenarioGrid, SweepOptions};
use fronthaul_core::solver::{solve as run_solver, SolveMode, SolveOptions, SolveStatus};
use fronthaul_core::{case_study, cost, io, IlpModel, ModelError, PlanningInstance, SolveError, SplitRatio};

use crate::config::Config;
use crate::error::CliError;
use crate::{Mode, Overrides};

fn load(arg: &str) -> Result<PlanningInstance, CliError> {
    let path = Path::new(arg);
    let loaded = if case_study::ALIASES.contains(&arg) && !path.exists() {
        io::load_instance_str(case_study::CASE_STUDY_JSON)?
    } else {
        io::load_instance(path)?
    };
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(loaded.instance)
}

/// The instance with overrides applied, revalidated.
fn instance(arg: &str, overrides: &Overrides) -> Result<PlanningInstance, CliError> {
    let mut inst = load(arg)?;
    if overrides.delay_us.is_none() && overrides.ratio.is_none() && !overrides.allow_nonstandard_ratio {
        return Ok(inst);
    }
    if let Some(d) = overrides.delay_us {
        inst.params.max_delay = d;
    }
    if let Some(r) = overrides.ratio {
        inst.params.split_ratio = SplitRatio(r);
    }
    inst.params.allow_nonstandard_ratio |= overrides.allow_nonstandard_ratio;
    let checked = io::check_instance(inst)?;
    for w in &checked.warnings {
        eprintln!("warning: {w}");
    }
    Ok(checked.instance)
}

fn model(inst: &PlanningInstance) -> Result<IlpModel, CliError> {
    build_model(inst, &compute_distances(inst), &BuildOptions::default()).map_err(|e| match e {
        ModelError::TooLarge { .. } | ModelError::Cost(_) => CliError::Rejected(e.to_string()),
        _ => CliError::Internal(e.to_string()),
    })
}

fn solver_error(e: SolveError) -> CliError {
    match e {
        SolveError::Options(_) => CliError::Usage(e.to_string()),
        SolveError::SizeGuard { .. } => CliError::Rejected(e.to_string()),
        _ => CliError::Internal(e.to_string()),
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn read_plan(path: &Path) -> Result<fronthaul_core::DeploymentPlan, CliError> {
    Ok(io::parse_plan(&io::read(path)?)?)
}

pub fn solve_options(
    config: &Config,
    mode: Mode,
    time_limit: Option<f64>,
    seed: Option<u64>,
    workers: Option<usize>,
    gap: Option<f64>,
) -> SolveOptions {
    let d = SolveOptions::default();
    let c = &config.solve;
    SolveOptions {
        mode: match mode {
            Mode::ExactBnb => SolveMode::ExactBnb,
            Mode::BruteForce => SolveMode::BruteForce,
        },
        time_limit: time_limit.or(c.time_limit).unwrap_or(d.time_limit),
        gap_tolerance: gap.or(c.gap_tolerance).unwrap_or(d.gap_tolerance),
        seed: seed.or(c.seed).unwrap_or(d.seed),
        node_limit: c.node_limit.unwrap_or(d.node_limit),
        workers: workers.or(c.workers).unwrap_or(d.workers),
        brute_force_guard: c.brute_force_guard.unwrap_or(d.brute_force_guard),
    }
}

pub fn validate(arg: &str) -> Result<(), CliError> {
    let inst = load(arg)?;
    let (m, n, p) = inst.site_counts();
    println!("valid: {m} central offices, {n} splitters, {p} RU/ONUs");
    Ok(())
}

pub fn solve(arg: &str, overrides: &Overrides, opts: SolveOptions, plan_out: &Path, report_out: &Path) -> Result<(), CliError> {
    opts.check().map_err(solver_error)?;
    let inst = instance(arg, overrides)?;
    let model = model(&inst)?;
    let result = run_solver(&model, &opts).map_err(solver_error)?;
    let label = match &result.status {
        SolveStatus::Optimal => "optimal".to_string(),
        SolveStatus::Feasible { gap } => format!("feasible (gap {:.4}%)", gap * 100.0),
        SolveStatus::TimedOut => "timed out".to_string(),
        SolveStatus::Infeasible { reason } => return Err(CliError::Rejected(format!("infeasible: {reason}"))),
    };
    let Some(plan) = result.plan else {
        return Err(CliError::Rejected(format!("{label} without a plan")));
    };
    let report = cost::total_cost(&plan, &inst).map_err(|e| CliError::Internal(e.to_string()))?;
    if report.tco != plan.objective_value {
        return Err(CliError::Internal(format!(
            "cost report total {} differs from the objective {}",
            report.tco, plan.objective_value
        )));
    }
    write(plan_out, &io::plan_json(&plan))?;
    let report_text = if report_out.extension().is_some_and(|e| e == "json") {
        io::canonical_json(&report)
    } else {
        io::cost_report_csv(&report)
    };
    write(report_out, &report_text)?;
    println!("status: {label}");
    println!("tco: {}", report.tco.round_dp(2));
    if let Some(b) = result.bound {
        println!("bound: {}", b.round_dp(2));
    }
    println!(
        "open: {} central offices, {} splitters; fiber {} km",
        plan.open_cos.len(),
        plan.open_splitters.len(),
        report.fiber_length_total_km.round_dp(3)
    );
    println!("nodes: {}, {:.2} s", result.stats.nodes_explored, result.stats.wall_time_s);
    println!("plan: {}\nreport: {}", plan_out.display(), report_out.display());
    Ok(())
}

pub fn sweep(arg: &str, grid_file: Option<&Path>, opts: &SweepOptions, out: &Path, json: Option<&Path>) -> Result<(), CliError> {
    opts.solve.check().map_err(solver_error)?;
    let base = load(arg)?;
    let grid: ScenarioGrid = match grid_file {
        Some(path) => serde_json::from_str(&io::read(path)?)
            .map_err(|e| CliError::Rejected(format!("grid {}: {e}", path.display())))?,
        None => ScenarioGrid::default(),
    };
    let report = run_sweep(&base, &grid, opts).map_err(|e| CliError::Rejected(e.to_string()))?;
    write(out, &report.to_csv())?;
    if let Some(path) = json {
        write(path, &io::canonical_json(&report))?;
    }
    for cell in &report.cells {
        let tco = cell.tco.map(|t| t.round_dp(2).to_string()).unwrap_or_else(|| "-".into());
        println!("{:>6} µs  {:<5} {:<10} {tco}", cell.threshold_us.normalize(), cell.ratio.to_string(), cell.status.label());
    }
    let verdicts = trend_checks(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut broken = Vec::new();
    for v in &verdicts {
        let outcome = match v.outcome {
            Outcome::Pass => "pass",
            Outcome::Fail => "FAIL",
            Outcome::Inconclusive => "inconclusive",
        };
        let kind = if v.hard { "invariant" } else { "trend" };
        println!("{outcome:<12} {kind} {:?} [{}]: {}", v.check, v.scope, v.detail);
        if v.hard && v.outcome == Outcome::Fail {
            broken.push(v.scope.clone());
        }
    }
    if !broken.is_empty() {
        return Err(CliError::Internal(format!("optimal values break monotonicity at {}", broken.join(", "))));
    }
    Ok(())
}

pub fn export_lp(arg: &str, overrides: &Overrides, out: &Path) -> Result<(), CliError> {
    let model = model(&instance(arg, overrides)?)?;
    let internal = |e: ModelError| CliError::Internal(e.to_string());
    if out == Path::new("-") {
        write_lp(&model, &mut std::io::stdout().lock()).map_err(internal)?;
    } else {
        let file = std::fs::File::create(out)
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", out.display())))?;
        write_lp(&model, &mut std::io::BufWriter::new(file)).map_err(internal)?;
        eprintln!(
            "{} variables, {} constraints written to {}",
            model.variables.len(),
            model.constraints.len(),
            out.display()
        );
    }
    Ok(())
}

pub fn verify(arg: &str, overrides: &Overrides, plan_path: &Path) -> Result<(), CliError> {
    let inst = instance(arg, overrides)?;
    let model = model(&inst)?;
    let plan = read_plan(plan_path)?;
    let verdict = verify_plan(&plan, &model).map_err(|e| CliError::Rejected(e.to_string()))?;
    if !verdict.feasible() {
        for v in &verdict.violations {
            let detail = v.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default();
            println!("violated {}: {} {} {}{detail}", v.row, v.lhs, v.sense.symbol(), v.rhs);
        }
        return Err(CliError::Rejected(format!("{} violated constraint(s)", verdict.violations.len())));
    }
    println!("feasible: objective {}", verdict.objective.round_dp(2));
    if verdict.objective != plan.objective_value {
        println!("note: plan file states objective {}", plan.objective_value.round_dp(2));
    }
    Ok(())
}

pub fn render(arg: &str, overrides: &Overrides, plan_path: &Path, out: &Path, style: &RenderStyle) -> Result<(), CliError> {
    style.check().map_err(CliError::Usage)?;
    let inst = instance(arg, overrides)?;
    let plan = read_plan(plan_path)?;
    let verdict = verify_plan(&plan, &model(&inst)?).map_err(|e| CliError::Rejected(e.to_string()))?;
    if !verdict.feasible() {
        eprintln!("warning: plan violates {} constraint(s)", verdict.violations.len());
    }
    let svg = render_map(&inst, &plan, style).map_err(|e| CliError::Rejected(e.to_string()))?;
    write(out, &svg)
}
