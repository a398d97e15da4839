//! Delay-threshold x split-ratio sweeps and the trend checks run on them.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::cost::{total_cost, CostReport};
use crate::error::ScenarioError;
use crate::ilp::{build_model, BuildOptions};
use crate::model::{compute_distances, PlanningInstance, SplitRatio};
use crate::plan::DeploymentPlan;
use crate::solver::{solve, SolveOptions, SolveStats, SolveStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGrid {
    /// µs, ascending.
    pub delay_thresholds_us: Vec<Decimal>,
    pub split_ratios: Vec<SplitRatio>,
    /// Overrides the base instance horizon when set.
    #[serde(default)]
    pub horizon_years: Option<u32>,
}

impl Default for ScenarioGrid {
    fn default() -> Self {
        ScenarioGrid {
            delay_thresholds_us: [10, 20, 30, 40, 50].into_iter().map(Decimal::from).collect(),
            split_ratios: [4, 8, 16].into_iter().map(SplitRatio).collect(),
            horizon_years: None,
        }
    }
}

impl ScenarioGrid {
    pub fn check(&self) -> Result<(), ScenarioError> {
        if self.delay_thresholds_us.is_empty() || self.split_ratios.is_empty() {
            return Err(ScenarioError::Grid("thresholds and ratios must be non-empty".into()));
        }
        if self.delay_thresholds_us.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScenarioError::Grid("delay thresholds must be strictly ascending".into()));
        }
        let mut ratios = self.split_ratios.clone();
        ratios.sort();
        ratios.dedup();
        if ratios.len() != self.split_ratios.len() {
            return Err(ScenarioError::Grid("split ratios must be distinct".into()));
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.delay_thresholds_us.len() * self.split_ratios.len()
    }

    /// Cell coordinates in report order: thresholds outer, ratios inner.
    pub fn points(&self) -> Vec<(Decimal, SplitRatio)> {
        self.delay_thresholds_us
            .iter()
            .flat_map(|t| self.split_ratios.iter().map(move |r| (*t, *r)))
            .collect()
    }

    /// The base instance specialised to one cell.
    pub fn cell_instance(&self, base: &PlanningInstance, threshold: Decimal, ratio: SplitRatio) -> PlanningInstance {
        let mut inst = base.clone();
        inst.params.max_delay = threshold;
        inst.params.split_ratio = ratio;
        if let Some(years) = self.horizon_years {
            inst.params.horizon_years = years;
        }
        inst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellStatus {
    Optimal,
    Feasible { gap: f64 },
    Infeasible { reason: String },
    TimedOut,
    /// The cell could not be set up or solved.
    Error { message: String },
}

impl CellStatus {
    pub fn label(&self) -> &'static str {
        match self {
            CellStatus::Optimal => "optimal",
            CellStatus::Feasible { .. } => "feasible",
            CellStatus::Infeasible { .. } => "infeasible",
            CellStatus::TimedOut => "timed_out",
            CellStatus::Error { .. } => "error",
        }
    }
}

impl From<SolveStatus> for CellStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => CellStatus::Optimal,
            SolveStatus::Feasible { gap } => CellStatus::Feasible { gap },
            SolveStatus::Infeasible { reason } => CellStatus::Infeasible { reason },
            SolveStatus::TimedOut => CellStatus::TimedOut,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub threshold_us: Decimal,
    pub ratio: SplitRatio,
    pub status: CellStatus,
    pub tco: Option<Decimal>,
    pub report: Option<CostReport>,
    pub plan: Option<DeploymentPlan>,
    pub stats: Option<SolveStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub grid: ScenarioGrid,
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    pub fn cell(&self, threshold: Decimal, ratio: SplitRatio) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.threshold_us == threshold && c.ratio == ratio)
    }

    /// Flat CSV, one row per cell, blank numbers for cells without a plan.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let _ = writer.write_record([
            "threshold_us",
            "ratio",
            "status",
            "tco",
            "capex_equipment",
            "capex_infrastructure",
            "capex_installation",
            "capex_total",
            "opex_energy",
            "opex_om",
            "opex_site_rental",
            "opex_total",
            "n_cos",
            "n_splitters",
            "fiber_km",
        ]);
        for c in &self.cells {
            let mut row = vec![c.threshold_us.normalize().to_string(), c.ratio.to_string(), c.status.label().into()];
            match &c.report {
                Some(r) => {
                    row.push(format!("{:.2}", r.tco.round_dp(2)));
                    for (_, v) in r.components().into_iter().take(8) {
                        row.push(format!("{:.2}", v.round_dp(2)));
                    }
                    row.push(r.unit_counts.n_co.to_string());
                    row.push(r.unit_counts.n_splitters.to_string());
                    row.push(r.fiber_length_total_km.round_dp(6).normalize().to_string());
                }
                None => row.extend(std::iter::repeat_n(String::new(), 12)),
            }
            let _ = writer.write_record(&row);
        }
        String::from_utf8(writer.into_inner().unwrap_or_default()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub solve: SolveOptions,
    /// Cells solved at the same time.
    pub parallel_cells: usize,
    /// Overall budget in seconds, split evenly over the cells.
    pub global_time_limit: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            solve: SolveOptions::default(),
            parallel_cells: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            global_time_limit: None,
        }
    }
}

fn run_cell(base: &PlanningInstance, grid: &ScenarioGrid, threshold: Decimal, ratio: SplitRatio, opts: &SolveOptions) -> SweepCell {
    let mut cell = SweepCell {
        threshold_us: threshold,
        ratio,
        status: CellStatus::TimedOut,
        tco: None,
        report: None,
        plan: None,
        stats: None,
    };
    let error = |cell: &mut SweepCell, message: String| cell.status = CellStatus::Error { message };
    let inst = grid.cell_instance(base, threshold, ratio);
    if let Err(e) = inst.validate() {
        error(&mut cell, e.to_string());
        return cell;
    }
    let model = match build_model(&inst, &compute_distances(&inst), &BuildOptions::default()) {
        Ok(m) => m,
        Err(e) => {
            error(&mut cell, e.to_string());
            return cell;
        }
    };
    let result = match solve(&model, opts) {
        Ok(r) => r,
        Err(e) => {
            error(&mut cell, e.to_string());
            return cell;
        }
    };
    cell.stats = Some(result.stats);
    cell.status = result.status.into();
    if let Some(plan) = result.plan {
        match total_cost(&plan, &inst) {
            Ok(report) if report.tco == plan.objective_value => {
                cell.tco = Some(report.tco);
                cell.report = Some(report);
                cell.plan = Some(plan);
            }
            Ok(report) => error(
                &mut cell,
                format!("cost report tco {} differs from solver objective {}", report.tco, plan.objective_value),
            ),
            Err(e) => error(&mut cell, e.to_string()),
        }
    }
    cell
}

/// Solves every grid cell independently. A failing cell is recorded in the
/// report and the sweep carries on.
pub fn run_sweep(base: &PlanningInstance, grid: &ScenarioGrid, opts: &SweepOptions) -> Result<SweepReport, ScenarioError> {
    grid.check()?;
    let points = grid.points();
    let mut solve_opts = opts.solve.clone();
    if let Some(total) = opts.global_time_limit {
        solve_opts.time_limit = solve_opts.time_limit.min(total / points.len() as f64);
    }
    let slots: Vec<Mutex<Option<SweepCell>>> = points.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let threads = opts.parallel_cells.clamp(1, points.len());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(t, r)) = points.get(k) else { break };
                let cell = run_cell(base, grid, t, r, &solve_opts);
                *slots[k].lock().expect("cell slot") = Some(cell);
            });
        }
    });
    let cells = slots
        .into_iter()
        .map(|s| s.into_inner().expect("cell slot").expect("every cell ran"))
        .collect();
    Ok(SweepReport {
        grid: grid.clone(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendCheck {
    /// TCO non-increasing in the delay threshold, per ratio.
    DelayMonotonicity,
    /// TCO(1:16) <= TCO(1:8) <= TCO(1:4), per threshold.
    RatioOrdering,
    /// Opex grows as the split ratio shrinks, per threshold.
    OpexOrdering,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// Some cell has no proven optimum.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendVerdict {
    pub check: TrendCheck,
    /// Hard invariants follow from optimality; the rest are observations.
    pub hard: bool,
    pub scope: String,
    pub outcome: Outcome,
    pub detail: String,
}

fn ordered(values: &[(String, Option<Decimal>)], non_increasing: bool) -> (Outcome, String) {
    if values.iter().any(|(_, v)| v.is_none()) {
        let missing: Vec<_> = values.iter().filter(|(_, v)| v.is_none()).map(|(k, _)| k.as_str()).collect();
        return (Outcome::Inconclusive, format!("no proven optimum at {}", missing.join(", ")));
    }
    let shown: Vec<String> = values
        .iter()
        .map(|(k, v)| format!("{k}: {}", v.unwrap_or_default().round_dp(2)))
        .collect();
    for w in values.windows(2) {
        let (a, b) = (w[0].1.unwrap_or_default(), w[1].1.unwrap_or_default());
        let ok = if non_increasing { b <= a } else { b >= a };
        if !ok {
            return (Outcome::Fail, format!("{} breaks at {} -> {}", shown.join(", "), w[0].0, w[1].0));
        }
    }
    (Outcome::Pass, shown.join(", "))
}

/// Evaluates the three trend checks. Cells that are not optimal make the
/// affected verdicts inconclusive; a report with missing cells is refused.
pub fn trend_checks(report: &SweepReport) -> Result<Vec<TrendVerdict>, ScenarioError> {
    let grid = &report.grid;
    if report.cells.len() != grid.size() {
        return Err(ScenarioError::Incomplete(format!(
            "{} cells for a {}-point grid",
            report.cells.len(),
            grid.size()
        )));
    }
    let value = |t: Decimal, r: SplitRatio, opex: bool| -> Result<Option<Decimal>, ScenarioError> {
        let cell = report
            .cell(t, r)
            .ok_or_else(|| ScenarioError::Incomplete(format!("missing cell {t} µs, {r}")))?;
        if cell.status != CellStatus::Optimal {
            return Ok(None);
        }
        Ok(cell.report.as_ref().map(|rep| if opex { rep.opex_total } else { rep.tco }))
    };
    let mut ratios = grid.split_ratios.clone();
    ratios.sort();
    let mut verdicts = Vec::new();
    for &r in &grid.split_ratios {
        let series = grid
            .delay_thresholds_us
            .iter()
            .map(|&t| Ok((format!("{} µs", t.normalize()), value(t, r, false)?)))
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        let (outcome, detail) = ordered(&series, true);
        verdicts.push(TrendVerdict {
            check: TrendCheck::DelayMonotonicity,
            hard: true,
            scope: format!("ratio {r}"),
            outcome,
            detail,
        });
    }
    for (check, opex) in [(TrendCheck::RatioOrdering, false), (TrendCheck::OpexOrdering, true)] {
        for &t in &grid.delay_thresholds_us {
            // Ascending ratio: TCO and Opex both expected non-increasing.
            let series = ratios
                .iter()
                .map(|&r| Ok((r.to_string(), value(t, r, opex)?)))
                .collect::<Result<Vec<_>, ScenarioError>>()?;
            let (outcome, detail) = ordered(&series, true);
            verdicts.push(TrendVerdict {
                check,
                hard: false,
                scope: format!("{} µs", t.normalize()),
                outcome,
                detail,
            });
        }
    }
    Ok(verdicts)
}
