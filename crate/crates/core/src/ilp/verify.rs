use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::{Family, IlpModel, Sense};
use crate::error::PlanError;
use crate::plan::DeploymentPlan;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub tag: Family,
    pub row: String,
    pub lhs: Decimal,
    pub sense: Sense,
    pub rhs: Decimal,
    /// Negative by the amount of the violation.
    pub slack: Decimal,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub violations: Vec<Violation>,
    /// Objective recomputed from the model for this plan.
    pub objective: Decimal,
}

impl Verdict {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Binary point of the model encoded by a plan. Every RU/ONU is deployed.
pub fn plan_values(plan: &DeploymentPlan, model: &IlpModel) -> Result<Vec<bool>, PlanError> {
    let index = plan.resolve_ids(&model.meta.ids)?;
    let layout = model.layout;
    let mut values = vec![false; layout.n_variables()];
    for &i in &index.open_cos {
        values[layout.co_open(i)] = true;
    }
    for &j in &index.open_splitters {
        values[layout.splitter_open(j)] = true;
    }
    for &(r, j) in &index.assignment {
        values[layout.distribution(j, r)] = true;
    }
    for &(j, i) in &index.homing {
        values[layout.feeder(i, j)] = true;
    }
    for r in 0..layout.rus {
        values[layout.ru_deployed(r)] = true;
    }
    Ok(values)
}

fn describe(model: &IlpModel, tag: Family, lhs: Decimal) -> Option<String> {
    let params = &model.meta.params;
    match tag {
        Family::Eq24 => Some(format!(
            "path delay {} µs exceeds {} µs",
            (lhs - Decimal::TWO * model.meta.big_m_delay).normalize(),
            params.max_delay.normalize()
        )),
        Family::Eq26 => Some(format!(
            "path length {} km exceeds {} km",
            (lhs - Decimal::TWO * model.meta.big_m_distance).normalize(),
            params.max_total_distance.normalize()
        )),
        Family::Eq14 => Some(format!("{} RU/ONUs on a {} splitter", lhs.normalize(), params.split_ratio)),
        _ => None,
    }
}

/// Checks a plan against every row of the model and recomputes its
/// objective.
pub fn verify_plan(plan: &DeploymentPlan, model: &IlpModel) -> Result<Verdict, PlanError> {
    let values = plan_values(plan, model)?;
    let mut violations = Vec::new();
    for row in &model.constraints {
        let lhs = row.activity(&values);
        let slack = row.slack(lhs);
        if slack < Decimal::ZERO {
            violations.push(Violation {
                tag: row.tag,
                row: row.name.clone(),
                lhs,
                sense: row.sense,
                rhs: row.rhs,
                slack,
                detail: describe(model, row.tag, lhs),
            });
        }
    }
    Ok(Verdict {
        violations,
        objective: model.objective_value(&values),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_study;
    use crate::ilp::{build_model, BuildOptions};
    use crate::model::{compute_distances, PlanningInstance, Site, SiteKind, SplitRatio};
    use rust_decimal_macros::dec;

    fn line_instance(ru_x: f64) -> PlanningInstance {
        PlanningInstance {
            central_offices: vec![Site::new(SiteKind::CentralOffice, "co", 0.0, 0.0)],
            splitters: vec![Site::new(SiteKind::Splitter, "sp", 1.0, 0.0)],
            ru_onus: vec![Site::new(SiteKind::RuOnu, "ru", ru_x, 0.0)],
            params: case_study::default_params(),
            costs: case_study::case_study_costs(),
        }
    }

    fn single_chain_plan() -> DeploymentPlan {
        let ids = crate::plan::SiteIds {
            central_offices: vec!["co".into()],
            splitters: vec!["sp".into()],
            ru_onus: vec!["ru".into()],
        };
        DeploymentPlan::from_links(&ids, &[(0, 0)], &[(0, 0)])
    }

    #[test]
    fn eleven_km_path_violates_delay_budget() {
        let mut inst = line_instance(11.0);
        inst.params.max_delay = dec!(50);
        inst.params.max_total_distance = dec!(20);
        inst.params.max_distribution_fiber = dec!(20);
        let model = build_model(&inst, &compute_distances(&inst), &BuildOptions::default()).unwrap();
        let verdict = verify_plan(&single_chain_plan(), &model).unwrap();
        assert_eq!(verdict.violations.len(), 1);
        let v = &verdict.violations[0];
        assert_eq!(v.tag, Family::Eq24);
        assert_eq!(v.row, "eq24_c0_s0_r0");
        assert_eq!(v.slack, dec!(-5));
        assert_eq!(v.detail.as_deref(), Some("path delay 55 µs exceeds 50 µs"));
    }

    #[test]
    fn seventeen_rus_on_a_sixteen_way_splitter() {
        let mut inst = line_instance(1.0);
        inst.params.split_ratio = SplitRatio(16);
        inst.params.pon_downlink = dec!(1000);
        inst.params.pon_uplink = dec!(1000);
        inst.ru_onus = (0..17)
            .map(|k| Site::new(SiteKind::RuOnu, format!("ru{k:02}"), 1.0 + 0.01 * k as f64, 0.5))
            .collect();
        let model = build_model(&inst, &compute_distances(&inst), &BuildOptions::default()).unwrap();
        let ids = crate::plan::SiteIds::of(&inst);
        let assignment: Vec<_> = (0..17).map(|r| (r, 0)).collect();
        let plan = DeploymentPlan::from_links(&ids, &assignment, &[(0, 0)]);
        let verdict = verify_plan(&plan, &model).unwrap();
        assert_eq!(verdict.violations.len(), 1);
        assert_eq!(verdict.violations[0].tag, Family::Eq14);
        assert_eq!(verdict.violations[0].slack, dec!(-1));
    }

    #[test]
    fn unknown_site_is_structural_error() {
        let inst = line_instance(2.0);
        let model = build_model(&inst, &compute_distances(&inst), &BuildOptions::default()).unwrap();
        let mut plan = single_chain_plan();
        plan.ru_assignment.insert("ghost".into(), "sp".into());
        assert_eq!(
            verify_plan(&plan, &model).unwrap_err(),
            PlanError::UnknownSite {
                kind: "RU/ONU",
                id: "ghost".into()
            }
        );
    }

    #[test]
    fn empty_plan_misses_every_ru() {
        let inst = line_instance(2.0);
        let model = build_model(&inst, &compute_distances(&inst), &BuildOptions::default()).unwrap();
        let verdict = verify_plan(&DeploymentPlan::default(), &model).unwrap();
        assert!(verdict.violations.iter().any(|v| v.row == "eq13_r0"));
    }

    #[test]
    fn feasible_chain_objective_is_tco() {
        let inst = line_instance(2.0);
        let model = build_model(&inst, &compute_distances(&inst), &BuildOptions::default()).unwrap();
        let plan = single_chain_plan();
        let verdict = verify_plan(&plan, &model).unwrap();
        assert!(verdict.feasible(), "{:?}", verdict.violations);
        let report = crate::cost::total_cost(&plan, &inst).unwrap();
        assert_eq!(verdict.objective, report.tco);
    }
}
