mod common;

use fronthaul_core::ilp::{verify_plan, Family, IlpModel, LinearConstraint, Sense};
use fronthaul_core::solver::{
    brute_force, lower_bound, solve, CoState, PartialAssignment, SolveOptions, SolveResult, SolveStatus,
    SplitterState,
};
use fronthaul_core::{case_study, PlanningInstance, Site, SiteKind, SplitRatio};
use rand::Rng;
use rust_decimal::Decimal;

const GUARD: u64 = 50_000_000;

fn exact(model: &IlpModel) -> SolveResult {
    solve(model, &SolveOptions::default()).expect("bnb runs")
}

fn reference(model: &IlpModel) -> SolveResult {
    brute_force(model, GUARD).expect("brute force runs")
}

fn optimum(result: &SolveResult) -> Option<Decimal> {
    match result.status {
        SolveStatus::Optimal => Some(result.objective().expect("optimal carries a plan")),
        SolveStatus::Infeasible { .. } => None,
        ref other => panic!("unexpected status {other:?}"),
    }
}

#[test]
fn bnb_matches_brute_force_on_random_instances() {
    let mut rng = common::rng(7);
    let (mut feasible, mut infeasible) = (0, 0);
    for case in 0..240 {
        let inst = common::sized(&mut rng);
        let model = common::model(&inst);
        let fast = exact(&model);
        let slow = reference(&model);
        assert_eq!(optimum(&fast), optimum(&slow), "case {case}: {inst:?}");
        if let Some(plan) = &fast.plan {
            assert!(verify_plan(plan, &model).unwrap().feasible(), "case {case}");
            assert_eq!(fast.bound, Some(plan.objective_value));
            feasible += 1;
        } else {
            infeasible += 1;
        }
    }
    // Both outcomes must actually be exercised.
    assert!(feasible >= 100, "only {feasible} feasible cases");
    assert!(infeasible >= 10, "only {infeasible} infeasible cases");
}

fn fix(model: &mut IlpModel, var: usize, value: bool) {
    model.constraints.push(LinearConstraint {
        name: format!("pin_{var}"),
        tag: Family::RuFixed,
        terms: vec![(var as u32, Decimal::ONE)],
        sense: Sense::Eq,
        rhs: if value { Decimal::ONE } else { Decimal::ZERO },
    });
}

/// Cheapest completion of `partial`, by enumeration of the model with the
/// fixed decisions pinned.
fn best_completion(model: &IlpModel, partial: &PartialAssignment) -> Option<Decimal> {
    let l = model.layout;
    let mut pinned = model.clone();
    for (r, a) in partial.ru.iter().enumerate() {
        if let Some(j) = a {
            fix(&mut pinned, l.distribution(*j, r), true);
        }
    }
    for (j, s) in partial.splitters.iter().enumerate() {
        match s {
            SplitterState::Free => {}
            SplitterState::Closed => fix(&mut pinned, l.splitter_open(j), false),
            SplitterState::Open { co } => fix(&mut pinned, l.feeder(*co, j), true),
        }
    }
    for (i, c) in partial.cos.iter().enumerate() {
        match c {
            CoState::Free => {}
            CoState::Closed => fix(&mut pinned, l.co_open(i), false),
            CoState::Open => fix(&mut pinned, l.co_open(i), true),
        }
    }
    optimum(&reference(&pinned))
}

fn random_partial(rng: &mut rand_chacha::ChaCha8Rng, model: &IlpModel) -> PartialAssignment {
    let mut partial = PartialAssignment::empty(model);
    for c in partial.cos.iter_mut() {
        *c = match rng.gen_range(0..5) {
            0 => CoState::Closed,
            1 => CoState::Open,
            _ => CoState::Free,
        };
    }
    let live: Vec<usize> = (0..partial.cos.len()).filter(|&i| partial.cos[i] != CoState::Closed).collect();
    for s in partial.splitters.iter_mut() {
        *s = match rng.gen_range(0..4) {
            0 => SplitterState::Closed,
            1 if !live.is_empty() => SplitterState::Open {
                co: live[rng.gen_range(0..live.len())],
            },
            _ => SplitterState::Free,
        };
    }
    let usable: Vec<usize> =
        (0..partial.splitters.len()).filter(|&j| partial.splitters[j] != SplitterState::Closed).collect();
    for a in partial.ru.iter_mut() {
        if !usable.is_empty() && rng.gen_bool(0.4) {
            *a = Some(usable[rng.gen_range(0..usable.len())]);
        }
    }
    partial
}

/// Partial made of a random subset of the decisions of a feasible plan, so
/// at least one completion exists.
fn revealed(
    rng: &mut rand_chacha::ChaCha8Rng,
    model: &IlpModel,
    inst: &PlanningInstance,
    plan: &fronthaul_core::DeploymentPlan,
) -> PartialAssignment {
    let index = plan.resolve(inst).unwrap();
    let mut partial = PartialAssignment::empty(model);
    for i in 0..partial.cos.len() {
        if rng.gen_bool(0.5) {
            partial.cos[i] = if index.open_cos.contains(&i) { CoState::Open } else { CoState::Closed };
        }
    }
    for j in 0..partial.splitters.len() {
        if rng.gen_bool(0.5) {
            partial.splitters[j] = match index.homing.iter().find(|h| h.0 == j) {
                Some(&(_, co)) if partial.cos[co] != CoState::Closed => SplitterState::Open { co },
                Some(_) => SplitterState::Free,
                None => SplitterState::Closed,
            };
        }
    }
    for &(r, j) in &index.assignment {
        if rng.gen_bool(0.5) && partial.splitters[j] != SplitterState::Closed {
            partial.ru[r] = Some(j);
        }
    }
    partial
}

#[test]
fn lower_bound_never_exceeds_best_completion() {
    let mut rng = common::rng(11);
    let mut informative = 0;
    for case in 0..500 {
        let inst = common::sized(&mut rng);
        let model = common::model(&inst);
        let partial = match exact(&model).plan {
            Some(plan) if rng.gen_bool(0.5) => revealed(&mut rng, &model, &inst, &plan),
            _ => random_partial(&mut rng, &model),
        };
        let bound = lower_bound(&model, &partial).expect("consistent partial");
        match (bound, best_completion(&model, &partial)) {
            (Some(b), Some(best)) => {
                assert!(b <= best, "case {case}: bound {b} above completion {best}");
                informative += 1;
            }
            (None, Some(best)) => panic!("case {case}: bound claims no completion, oracle found {best}"),
            (_, None) => {}
        }
    }
    assert!(informative >= 180, "only {informative} partials had a completion");
}

#[test]
fn lower_bound_of_complete_plan_is_its_objective() {
    let mut rng = common::rng(13);
    let mut checked = 0;
    for _ in 0..60 {
        let inst = common::sized(&mut rng);
        let model = common::model(&inst);
        let Some(plan) = exact(&model).plan else { continue };
        let index = plan.resolve(&inst).unwrap();
        let mut partial = PartialAssignment::empty(&model);
        partial.cos.iter_mut().for_each(|c| *c = CoState::Closed);
        partial.splitters.iter_mut().for_each(|s| *s = SplitterState::Closed);
        for &i in &index.open_cos {
            partial.cos[i] = CoState::Open;
        }
        for &(j, i) in &index.homing {
            partial.splitters[j] = SplitterState::Open { co: i };
        }
        for &(r, j) in &index.assignment {
            partial.ru[r] = Some(j);
        }
        assert_eq!(lower_bound(&model, &partial).unwrap(), Some(plan.objective_value));
        checked += 1;
    }
    assert!(checked >= 30);
}

#[test]
fn inconsistent_partial_is_rejected() {
    let mut rng = common::rng(17);
    let inst = common::random_instance(&mut rng, 2, 2, 3);
    let model = common::model(&inst);
    let mut partial = PartialAssignment::empty(&model);
    partial.splitters[0] = SplitterState::Closed;
    partial.ru[1] = Some(0);
    assert!(lower_bound(&model, &partial).is_err());
    let mut short = PartialAssignment::empty(&model);
    short.ru.pop();
    assert!(lower_bound(&model, &short).is_err());
}

fn tiny(cos: &[(f64, f64)], splitters: &[(f64, f64)], rus: &[(f64, f64)]) -> PlanningInstance {
    let sites = |kind, prefix: &str, pts: &[(f64, f64)]| {
        pts.iter()
            .enumerate()
            .map(|(k, &(x, y))| Site::new(kind, format!("{prefix}{k}"), x, y))
            .collect::<Vec<_>>()
    };
    PlanningInstance {
        central_offices: sites(SiteKind::CentralOffice, "c", cos),
        splitters: sites(SiteKind::Splitter, "s", splitters),
        ru_onus: sites(SiteKind::RuOnu, "r", rus),
        params: case_study::default_params(),
        costs: case_study::case_study_costs(),
    }
}

#[test]
fn zero_delay_budget_is_infeasible_in_both_engines() {
    let mut inst = tiny(&[(0.0, 0.0), (2.0, 0.0)], &[(1.0, 0.0), (1.0, 1.0)], &[(1.5, 0.0), (1.0, 2.0)]);
    inst.params.max_delay = Decimal::ZERO;
    let model = common::model(&inst);
    for result in [exact(&model), reference(&model)] {
        assert!(matches!(result.status, SolveStatus::Infeasible { .. }), "{:?}", result.status);
        assert!(result.plan.is_none());
    }
}

#[test]
fn colocated_single_chain_costs_its_units() {
    let inst = tiny(&[(0.0, 0.0)], &[(0.0, 0.0)], &[(0.0, 0.0)]);
    let model = common::model(&inst);
    let fast = exact(&model);
    let slow = reference(&model);
    let plan = fast.plan.clone().unwrap();
    assert_eq!(fast.objective(), slow.objective());
    assert_eq!(plan.open_cos.len(), 1);
    assert_eq!(plan.ru_assignment["r0"], "s0");
    // Zero fiber: only equipment, energy, O&M and rent remain.
    let report = fronthaul_core::cost::total_cost(&plan, &inst).unwrap();
    assert_eq!(report.capex_infrastructure, Decimal::ZERO);
    assert_eq!(report.tco, plan.objective_value);
}

#[test]
fn small_ratio_forces_a_second_splitter() {
    // Five RU/ONUs on 1:4 splitters cannot share one splitter.
    let mut inst = tiny(
        &[(0.0, 0.0), (3.0, 0.0)],
        &[(1.0, 0.0), (2.0, 0.0)],
        &[(1.0, 0.5), (1.2, 0.0), (1.5, 0.2), (1.8, 0.1), (2.0, 0.5)],
    );
    inst.params.split_ratio = SplitRatio(4);
    let model = common::model(&inst);
    let fast = exact(&model);
    assert_eq!(optimum(&fast), optimum(&reference(&model)));
    assert_eq!(fast.plan.unwrap().open_splitters.len(), 2);
}
