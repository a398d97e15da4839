//! Exact optimization of the planning model.
//!
//! [`solve`] runs the specialized branch and bound; [`brute_force`] checks
//! every point of small models and serves as the reference. Both report the
//! objective recomputed from the model, so equal optima compare exactly.

mod bnb;
mod bound;
mod brute;
mod flow;
mod structure;

use std::time::{Duration, Instant};

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::ilp::{plan_values, verify_plan, IlpModel};
use crate::plan::{DeploymentPlan, FiberSummary};

pub use bound::{lower_bound, CoState, PartialAssignment, SplitterState};

use structure::Structure;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    #[default]
    ExactBnb,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub mode: SolveMode,
    /// Wall-clock budget in seconds.
    pub time_limit: f64,
    /// Relative gap at which the search may stop; 0 proves optimality.
    pub gap_tolerance: f64,
    /// Shuffles tie-breaking among equally ranked branching candidates.
    pub seed: u64,
    pub node_limit: u64,
    /// Search threads. Results are reproducible only with one.
    pub workers: usize,
    /// Largest configuration count brute force accepts.
    pub brute_force_guard: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: SolveMode::ExactBnb,
            time_limit: 900.0,
            gap_tolerance: 0.0,
            seed: 0,
            node_limit: 5_000_000,
            workers: 1,
            brute_force_guard: 5_000_000,
        }
    }
}

impl SolveOptions {
    pub fn check(&self) -> Result<(), SolveError> {
        if self.time_limit <= 0.0 || !self.time_limit.is_finite() {
            return Err(SolveError::Options(format!("time_limit must be positive, got {}", self.time_limit)));
        }
        if !(0.0..1.0).contains(&self.gap_tolerance) {
            return Err(SolveError::Options(format!(
                "gap_tolerance must lie in [0, 1), got {}",
                self.gap_tolerance
            )));
        }
        if self.workers == 0 {
            return Err(SolveError::Options("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Stopped within the gap tolerance.
    Feasible { gap: f64 },
    Infeasible { reason: String },
    /// Node or time limit reached; the plan, if any, is the best found.
    TimedOut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub wall_time_s: f64,
    pub objective: Decimal,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes_explored: u64,
    pub wall_time_s: f64,
    pub incumbent_trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub plan: Option<DeploymentPlan>,
    /// Proven lower bound on the optimum, when one is known.
    pub bound: Option<Decimal>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn objective(&self) -> Option<Decimal> {
        self.plan.as_ref().map(|p| p.objective_value)
    }
}

/// Fills in the plan's objective and fiber totals from the model, and
/// refuses plans that violate any row.
fn finish(model: &IlpModel, mut plan: DeploymentPlan) -> Result<DeploymentPlan, SolveError> {
    let verdict = verify_plan(&plan, model).map_err(|e| SolveError::Unsupported(e.to_string()))?;
    if let Some(v) = verdict.violations.first() {
        return Err(SolveError::Unsupported(format!(
            "internal plan violates {} ({} rows in total)",
            v.row,
            verdict.violations.len()
        )));
    }
    let index = plan.resolve_ids(&model.meta.ids).map_err(|e| SolveError::Unsupported(e.to_string()))?;
    let dm = &model.meta.distances;
    let has_distances = dm.feeder.len() == model.layout.cos && dm.distribution.len() == model.layout.splitters;
    plan.fiber = if has_distances {
        FiberSummary {
            feeder_km: index.homing.iter().map(|&(j, i)| dm.feeder(i, j)).sum(),
            distribution_km: index.assignment.iter().map(|&(r, j)| dm.distribution(j, r)).sum(),
        }
    } else {
        FiberSummary::default()
    };
    plan.objective_value = verdict.objective;
    Ok(plan)
}

fn infeasible_reason(model: &IlpModel, st: Option<&Structure>) -> String {
    if let Some(st) = st {
        if let Some(row) = &st.hopeless {
            return format!("row {row} cannot be satisfied");
        }
        if let Some(r) = st.stranded_ru() {
            return format!(
                "RU/ONU '{}' has no feasible (splitter, CO) pair under the delay, distance and capacity rows",
                model.meta.ids.ru_onus.get(r).map(String::as_str).unwrap_or("?")
            );
        }
        let capacity: u64 = st.cap.iter().map(|&c| u64::from(c)).sum();
        if capacity < st.p as u64 {
            return format!(
                "splitter capacity rows (eq14/eq22/eq23) admit {capacity} RU/ONUs in total, {} needed",
                st.p
            );
        }
        return "no plan satisfies the capacity (eq14/eq22/eq23) and DO limit (eq18) rows together".into();
    }
    "no point satisfies every row".into()
}

/// Optimizes the model. `Optimal` plans are global minimizers; every plan
/// returned passes [`verify_plan`].
pub fn solve(model: &IlpModel, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    opts.check()?;
    if opts.mode == SolveMode::BruteForce {
        return brute_force(model, opts.brute_force_guard);
    }
    let start = Instant::now();
    let st = Structure::extract(model)?;
    let stats = |nodes: u64, trace: Vec<TracePoint>| SolveStats {
        nodes_explored: nodes,
        wall_time_s: start.elapsed().as_secs_f64(),
        incumbent_trace: trace,
    };
    if st.hopeless.is_some() || st.stranded_ru().is_some() {
        return Ok(SolveResult {
            status: SolveStatus::Infeasible {
                reason: infeasible_reason(model, Some(&st)),
            },
            plan: None,
            bound: None,
            stats: stats(0, Vec::new()),
        });
    }
    let limits = bnb::Limits {
        deadline: start + Duration::from_secs_f64(opts.time_limit.min(1e9)),
        node_limit: opts.node_limit,
        gap_tolerance: opts.gap_tolerance,
        workers: opts.workers,
        seed: opts.seed,
    };
    let outcome = bnb::search(&st, &limits);
    let trace = outcome
        .trace
        .iter()
        .map(|&(t, c)| TracePoint {
            wall_time_s: t,
            objective: st.to_decimal(c) + st.constant,
        })
        .collect();
    let bound = outcome
        .bound
        .filter(|b| *b != i128::MIN)
        .map(|b| st.to_decimal(b) + st.constant);
    let plan = match &outcome.incumbent {
        Some(sol) => Some(finish(
            model,
            DeploymentPlan::from_links(&model.meta.ids, &sol.assignment, &sol.homing),
        )?),
        None => None,
    };
    let status = match (outcome.stop, &plan) {
        (bnb::Stop::Exhausted, None) => SolveStatus::Infeasible {
            reason: infeasible_reason(model, Some(&st)),
        },
        (bnb::Stop::Exhausted, Some(plan)) => match bound {
            Some(b) if b < plan.objective_value => {
                let gap = ((plan.objective_value - b) / plan.objective_value.abs().max(Decimal::ONE))
                    .try_into()
                    .unwrap_or(0.0);
                SolveStatus::Feasible { gap }
            }
            _ => SolveStatus::Optimal,
        },
        _ => SolveStatus::TimedOut,
    };
    let bound = match status {
        SolveStatus::Optimal => plan.as_ref().map(|p| p.objective_value),
        _ => bound,
    };
    Ok(SolveResult {
        status,
        plan,
        bound,
        stats: stats(outcome.nodes, trace),
    })
}

/// Reference optimum by checking every configuration against every row.
/// Refuses models whose configuration count exceeds `size_guard`.
pub fn brute_force(model: &IlpModel, size_guard: u64) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let estimate = brute::estimate(model);
    if estimate > size_guard as f64 {
        return Err(SolveError::SizeGuard {
            estimate,
            guard: size_guard,
        });
    }
    let (best, checked) = brute::enumerate(model)?;
    let mut stats = SolveStats {
        nodes_explored: checked,
        wall_time_s: 0.0,
        incumbent_trace: Vec::new(),
    };
    let result = match best {
        None => SolveResult {
            status: SolveStatus::Infeasible {
                reason: infeasible_reason(model, Structure::extract(model).ok().as_ref()),
            },
            plan: None,
            bound: None,
            stats: stats.clone(),
        },
        Some((values, objective)) => {
            let plan = finish(model, plan_from_values(model, &values))?;
            debug_assert_eq!(plan.objective_value, objective);
            stats.incumbent_trace.push(TracePoint {
                wall_time_s: start.elapsed().as_secs_f64(),
                objective,
            });
            SolveResult {
                status: SolveStatus::Optimal,
                bound: Some(plan.objective_value),
                plan: Some(plan),
                stats: stats.clone(),
            }
        }
    };
    Ok(SolveResult {
        stats: SolveStats {
            wall_time_s: start.elapsed().as_secs_f64(),
            ..result.stats
        },
        ..result
    })
}

fn plan_from_values(model: &IlpModel, values: &[bool]) -> DeploymentPlan {
    let l = model.layout;
    let ids = &model.meta.ids;
    let mut plan = DeploymentPlan::default();
    for i in 0..l.cos {
        if values[l.co_open(i)] {
            plan.open_cos.insert(ids.central_offices[i].clone());
        }
    }
    for j in 0..l.splitters {
        if values[l.splitter_open(j)] {
            plan.open_splitters.insert(ids.splitters[j].clone());
        }
        for i in 0..l.cos {
            if values[l.feeder(i, j)] {
                plan.splitter_homing.insert(ids.splitters[j].clone(), ids.central_offices[i].clone());
            }
        }
        for r in 0..l.rus {
            if values[l.distribution(j, r)] {
                plan.ru_assignment.insert(ids.ru_onus[r].clone(), ids.splitters[j].clone());
            }
        }
    }
    debug_assert_eq!(plan_values(&plan, model).ok().as_deref(), Some(values));
    plan
}
