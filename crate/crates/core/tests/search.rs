mod common;

use fronthaul_core::ilp::{verify_plan, Family};
use fronthaul_core::solver::{brute_force, solve, SolveMode, SolveOptions, SolveStatus};
use fronthaul_core::{case_study, SolveError};
use rust_decimal::Decimal;

fn optimum(model: &fronthaul_core::IlpModel, opts: &SolveOptions) -> Result<Option<Decimal>, SolveError> {
    let result = solve(model, opts)?;
    Ok(match result.status {
        SolveStatus::Optimal => result.objective(),
        SolveStatus::Infeasible { .. } => None,
        other => panic!("unexpected status {other:?}"),
    })
}

fn brute() -> SolveOptions {
    SolveOptions {
        mode: SolveMode::BruteForce,
        brute_force_guard: 50_000_000,
        ..SolveOptions::default()
    }
}

/// Treats infeasibility as +infinity.
fn le(a: Option<Decimal>, b: Option<Decimal>) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(a), Some(b)) => a <= b,
    }
}

#[test]
fn optimum_does_not_rise_with_delay_budget() {
    let mut rng = common::rng(21);
    for case in 0..60 {
        let mut inst = common::sized(&mut rng);
        let mut previous = None;
        for tau in [5, 10, 15, 20, 30, 40, 50] {
            inst.params.max_delay = Decimal::from(tau);
            let now = optimum(&common::model(&inst), &SolveOptions::default()).unwrap();
            if tau > 5 {
                assert!(le(now, previous), "case {case} at {tau} µs: {now:?} after {previous:?}");
            }
            previous = now;
        }
    }
}

#[test]
fn dropping_a_family_never_raises_the_optimum() {
    let mut rng = common::rng(23);
    let mut relaxed_by_bnb = 0;
    for case in 0..25 {
        let inst = common::sized(&mut rng);
        let model = common::model(&inst);
        let full = optimum(&model, &brute()).unwrap();
        for family in Family::ALL {
            let relaxed = model.without_families(&[family]);
            let reference = optimum(&relaxed, &brute()).unwrap();
            assert!(le(reference, full), "case {case} without {family}");
            match optimum(&relaxed, &SolveOptions::default()) {
                Ok(found) => {
                    assert_eq!(found, reference, "case {case} without {family}");
                    relaxed_by_bnb += 1;
                }
                Err(SolveError::Unsupported(_)) => {
                    assert!(
                        matches!(family, Family::Eq13 | Family::Eq15 | Family::Eq17),
                        "bnb refused {family}"
                    );
                }
                Err(e) => panic!("{e}"),
            }
        }
    }
    assert!(relaxed_by_bnb >= 25 * 10);
}

#[test]
fn same_seed_gives_the_same_plan() {
    let inst = case_study::instance();
    let mut params = inst.params.clone();
    params.max_delay = Decimal::from(20);
    params.split_ratio = fronthaul_core::SplitRatio(4);
    let inst = fronthaul_core::PlanningInstance { params, ..inst };
    let model = common::model(&inst);
    let opts = SolveOptions {
        seed: 42,
        ..SolveOptions::default()
    };
    let a = solve(&model, &opts).unwrap();
    let b = solve(&model, &opts).unwrap();
    assert_eq!(a.status, SolveStatus::Optimal);
    assert_eq!(a.plan, b.plan);
    assert_eq!(a.stats.nodes_explored, b.stats.nodes_explored);
    assert_eq!(
        fronthaul_core::io::plan_json(a.plan.as_ref().unwrap()),
        fronthaul_core::io::plan_json(b.plan.as_ref().unwrap())
    );
    for seed in [1, 2, 3] {
        let other = solve(&model, &SolveOptions { seed, ..opts.clone() }).unwrap();
        assert_eq!(other.objective(), a.objective(), "seed {seed}");
    }
    let parallel = solve(
        &model,
        &SolveOptions {
            workers: 4,
            ..opts.clone()
        },
    )
    .unwrap();
    assert_eq!(parallel.status, SolveStatus::Optimal);
    assert_eq!(parallel.objective(), a.objective());
}

#[test]
fn node_limit_stops_with_a_valid_plan() {
    let model = common::model(&case_study::instance());
    let result = solve(
        &model,
        &SolveOptions {
            node_limit: 1,
            ..SolveOptions::default()
        },
    )
    .unwrap();
    assert_eq!(result.status, SolveStatus::TimedOut);
    let plan = result.plan.expect("the root heuristic finds a plan");
    assert!(verify_plan(&plan, &model).unwrap().feasible());
    let bound = result.bound.expect("root bound");
    assert!(bound <= plan.objective_value);
    assert!(!result.stats.incumbent_trace.is_empty());
}

#[test]
fn incumbent_trace_improves() {
    let model = common::model(&case_study::instance());
    let result = solve(&model, &SolveOptions::default()).unwrap();
    let trace = &result.stats.incumbent_trace;
    assert!(trace.windows(2).all(|w| w[1].objective < w[0].objective && w[1].wall_time_s >= w[0].wall_time_s));
    assert_eq!(trace.last().map(|t| t.objective), result.objective());
}

#[test]
fn brute_force_respects_its_guard() {
    let model = common::model(&case_study::instance());
    match brute_force(&model, 1_000_000) {
        Err(SolveError::SizeGuard { estimate, guard }) => {
            assert!(estimate > 1e6);
            assert_eq!(guard, 1_000_000);
        }
        other => panic!("expected a guard refusal, got {other:?}"),
    }
}

#[test]
fn bad_options_are_rejected() {
    let model = common::model(&case_study::instance());
    for opts in [
        SolveOptions {
            time_limit: 0.0,
            ..SolveOptions::default()
        },
        SolveOptions {
            gap_tolerance: 1.5,
            ..SolveOptions::default()
        },
        SolveOptions {
            workers: 0,
            ..SolveOptions::default()
        },
    ] {
        assert!(matches!(solve(&model, &opts), Err(SolveError::Options(_))));
    }
}
