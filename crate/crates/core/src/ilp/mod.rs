//! Solver-independent integer program for fronthaul planning.
//!
//! Binary variables:
//! - `x_ij`: CO `i` feeds splitter `j` (one DO and one AWG per feeder),
//! - `x_jr`: splitter `j` serves RU/ONU `r`,
//! - `C_i`, `S_j`, `R_r`: CO opened, splitter opened, RU/ONU deployed.
//!
//! The objective is the full TCO over the horizon: each variable carries its
//! Capex unit price plus `horizon_years` times its yearly Opex share, so the
//! value of any feasible point equals the cost-engine TCO exactly.
//!
//! Constraint rows are tagged with their family. Two families differ from
//! their textbook form: feeder homing is `sum_i x_ij = S_j` (unused splitter
//! sites need no feeder), and the DO limit is `sum_j x_ij <= H * C_i` per CO.
//! Per-path delay and distance rows carry a big-M guard so they only bind when
//! both links of the path are selected.

mod lp;
mod verify;

use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::cost::OmBasis;
use crate::error::{CostError, ModelError};
use crate::model::{DistanceMatrix, FiberSegment, ModelParams, PlanningInstance, SplitRatio};
use crate::plan::SiteIds;

pub use lp::{export_lp, lp_string};
pub use verify::{plan_values, verify_plan, Verdict, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKind {
    /// CO-splitter link `x_ij`, indices (co, splitter).
    Feeder,
    /// Splitter-RU link `x_jr`, indices (splitter, ru).
    Distribution,
    /// `C_i`, index (co, 0).
    CoOpen,
    /// `S_j`, index (splitter, 0).
    SplitterOpen,
    /// `R_r`, index (ru, 0).
    RuDeployed,
}

/// Ordering is by kind, then indices, which is also the variable order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VariableId {
    pub kind: VarKind,
    pub a: u32,
    pub b: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Eq13,
    Eq14,
    Eq15,
    Eq16,
    Eq17,
    Eq18,
    Eq19,
    Eq20,
    Eq22,
    Eq23,
    Eq24,
    Eq25,
    Eq26,
    /// `x_ij <= C_i`
    CoLink,
    /// `R_r = 1`
    RuFixed,
}

impl Family {
    pub const ALL: [Family; 15] = [
        Family::Eq13,
        Family::Eq14,
        Family::Eq15,
        Family::Eq16,
        Family::Eq17,
        Family::Eq18,
        Family::Eq19,
        Family::Eq20,
        Family::Eq22,
        Family::Eq23,
        Family::Eq24,
        Family::Eq25,
        Family::Eq26,
        Family::CoLink,
        Family::RuFixed,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Family::Eq13 => "eq13",
            Family::Eq14 => "eq14",
            Family::Eq15 => "eq15",
            Family::Eq16 => "eq16",
            Family::Eq17 => "eq17",
            Family::Eq18 => "eq18",
            Family::Eq19 => "eq19",
            Family::Eq20 => "eq20",
            Family::Eq22 => "eq22",
            Family::Eq23 => "eq23",
            Family::Eq24 => "eq24",
            Family::Eq25 => "eq25",
            Family::Eq26 => "eq26",
            Family::CoLink => "link",
            Family::RuFixed => "fix",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub name: String,
    pub tag: Family,
    /// (variable index, coefficient); each variable at most once.
    pub terms: Vec<(u32, Decimal)>,
    pub sense: Sense,
    pub rhs: Decimal,
}

impl LinearConstraint {
    pub fn activity(&self, values: &[bool]) -> Decimal {
        self.terms
            .iter()
            .filter(|(v, _)| values[*v as usize])
            .map(|(_, c)| *c)
            .sum()
    }

    /// Signed slack: negative when violated. For equalities this is
    /// `-|lhs - rhs|`.
    pub fn slack(&self, lhs: Decimal) -> Decimal {
        match self.sense {
            Sense::Le => self.rhs - lhs,
            Sense::Ge => lhs - self.rhs,
            Sense::Eq => -(lhs - self.rhs).abs(),
        }
    }
}

/// Site counts; variable indices follow from them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub cos: usize,
    pub splitters: usize,
    pub rus: usize,
}

impl Layout {
    pub fn n_variables(&self) -> usize {
        let (m, n, p) = (self.cos, self.splitters, self.rus);
        m * n + n * p + m + n + p
    }

    pub fn feeder(&self, co: usize, splitter: usize) -> usize {
        co * self.splitters + splitter
    }

    pub fn distribution(&self, splitter: usize, ru: usize) -> usize {
        self.cos * self.splitters + splitter * self.rus + ru
    }

    pub fn co_open(&self, co: usize) -> usize {
        self.cos * self.splitters + self.splitters * self.rus + co
    }

    pub fn splitter_open(&self, splitter: usize) -> usize {
        self.co_open(0) + self.cos + splitter
    }

    pub fn ru_deployed(&self, ru: usize) -> usize {
        self.splitter_open(0) + self.splitters + ru
    }

    pub fn index_of(&self, id: VariableId) -> usize {
        let (a, b) = (id.a as usize, id.b as usize);
        match id.kind {
            VarKind::Feeder => self.feeder(a, b),
            VarKind::Distribution => self.distribution(a, b),
            VarKind::CoOpen => self.co_open(a),
            VarKind::SplitterOpen => self.splitter_open(a),
            VarKind::RuDeployed => self.ru_deployed(a),
        }
    }

    fn variables(&self) -> Vec<VariableId> {
        let mut vars = Vec::with_capacity(self.n_variables());
        let id = |kind, a: usize, b: usize| VariableId {
            kind,
            a: a as u32,
            b: b as u32,
        };
        for i in 0..self.cos {
            for j in 0..self.splitters {
                vars.push(id(VarKind::Feeder, i, j));
            }
        }
        for j in 0..self.splitters {
            for r in 0..self.rus {
                vars.push(id(VarKind::Distribution, j, r));
            }
        }
        vars.extend((0..self.cos).map(|i| id(VarKind::CoOpen, i, 0)));
        vars.extend((0..self.splitters).map(|j| id(VarKind::SplitterOpen, j, 0)));
        vars.extend((0..self.rus).map(|r| id(VarKind::RuDeployed, r, 0)));
        vars
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    /// FNV-1a hash of the instance contents.
    pub fingerprint: String,
    pub ids: SiteIds,
    pub params: ModelParams,
    pub split_ratio: SplitRatio,
    pub om_basis: OmBasis,
    /// Big-M of the per-path delay rows, µs.
    pub big_m_delay: Decimal,
    /// Big-M of the per-path distance rows, km.
    pub big_m_distance: Decimal,
    pub distances: DistanceMatrix,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpModel {
    pub layout: Layout,
    pub variables: Vec<VariableId>,
    /// Objective coefficient per variable.
    pub objective: Vec<Decimal>,
    pub objective_constant: Decimal,
    pub constraints: Vec<LinearConstraint>,
    pub meta: ModelMeta,
}

impl IlpModel {
    pub fn objective_value(&self, values: &[bool]) -> Decimal {
        self.objective_constant
            + self
                .objective
                .iter()
                .zip(values)
                .filter(|(_, v)| **v)
                .map(|(c, _)| *c)
                .sum::<Decimal>()
    }

    pub fn variable_name(&self, index: usize) -> String {
        let v = self.variables[index];
        match v.kind {
            VarKind::Feeder => format!("x_c{}_s{}", v.a, v.b),
            VarKind::Distribution => format!("x_s{}_r{}", v.a, v.b),
            VarKind::CoOpen => format!("C_c{}", v.a),
            VarKind::SplitterOpen => format!("S_s{}", v.a),
            VarKind::RuDeployed => format!("R_r{}", v.a),
        }
    }

    /// Copy without the rows of the given families.
    pub fn without_families(&self, families: &[Family]) -> IlpModel {
        let mut model = self.clone();
        model.constraints.retain(|c| !families.contains(&c.tag));
        model
    }

    pub fn count_rows(&self, family: Family) -> usize {
        self.constraints.iter().filter(|c| c.tag == family).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub max_variables: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { max_variables: 250_000 }
    }
}

/// Per-variable objective coefficients: Capex price plus horizon times the
/// yearly Opex the unit causes.
struct Coefficients {
    co: Decimal,
    splitter: Decimal,
    /// Everything on a feeder except its fiber.
    feeder_base: Decimal,
    ru: Decimal,
    link_install: Decimal,
    fiber_mult: Decimal,
    constant: Decimal,
}

impl Coefficients {
    fn new(inst: &PlanningInstance) -> Result<Self, CostError> {
        let c = &inst.costs;
        let years = Decimal::from(inst.params.horizon_years);
        let equip_mult = Decimal::ONE + years * c.om_fraction;
        let infra_mult = match c.om_basis {
            OmBasis::Equipment => Decimal::ONE,
            OmBasis::TotalCapex => equip_mult,
        };
        let splitter = c.splitter_cost(inst.params.split_ratio)?;
        Ok(Coefficients {
            co: c.co_housing * equip_mult,
            splitter: splitter * equip_mult,
            feeder_base: (c.do_unit + c.awg) * equip_mult
                + years * c.yearly_energy(c.power_do + c.power_cooling),
            ru: c.ru_onu * equip_mult + years * (c.yearly_energy(c.power_ru_onu) + c.yearly_site_rent),
            link_install: c.per_link_installation() * infra_mult,
            fiber_mult: infra_mult,
            constant: years * c.software_license,
        })
    }
}

fn fingerprint(inst: &PlanningInstance) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for b in bytes {
            hash ^= u64::from(*b);
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
    };
    for site in inst.central_offices.iter().chain(&inst.splitters).chain(&inst.ru_onus) {
        feed(format!("{:?}|{}|{:?}|{:?};", site.kind, site.id, site.x, site.y).as_bytes());
    }
    feed(format!("{:?}", inst.params).as_bytes());
    feed(format!("{:?}", inst.costs).as_bytes());
    format!("{hash:016x}")
}

/// Builds every variable, the TCO objective and all constraint families.
pub fn build_model(inst: &PlanningInstance, dm: &DistanceMatrix, opts: &BuildOptions) -> Result<IlpModel, ModelError> {
    let (m, n, p) = inst.site_counts();
    let layout = Layout { cos: m, splitters: n, rus: p };
    let n_vars = layout.n_variables();
    if n_vars > opts.max_variables {
        let rows = p + 6 * n + m + 2 * m * n + 1 + 2 * n * p + 2 * m * n * p + p;
        return Err(ModelError::TooLarge {
            variables: n_vars,
            constraints: rows,
            budget: opts.max_variables,
        });
    }
    let params = &inst.params;
    let coef = Coefficients::new(inst).map_err(|e| ModelError::Cost(Box::new(e)))?;

    let mut objective = vec![Decimal::ZERO; n_vars];
    for i in 0..m {
        objective[layout.co_open(i)] = coef.co;
        for j in 0..n {
            objective[layout.feeder(i, j)] =
                coef.feeder_base + inst.costs.fiber_cost(dm.feeder(i, j)) * coef.fiber_mult + coef.link_install;
        }
    }
    for j in 0..n {
        objective[layout.splitter_open(j)] = coef.splitter;
        for r in 0..p {
            objective[layout.distribution(j, r)] =
                inst.costs.fiber_cost(dm.distribution(j, r)) * coef.fiber_mult + coef.link_install;
        }
    }
    for r in 0..p {
        objective[layout.ru_deployed(r)] = coef.ru;
    }

    let one = Decimal::ONE;
    let minus = Decimal::NEGATIVE_ONE;
    let v = |idx: usize| idx as u32;
    let mut rows: Vec<LinearConstraint> = Vec::new();
    let mut push = |name: String, tag: Family, terms: Vec<(u32, Decimal)>, sense: Sense, rhs: Decimal| {
        rows.push(LinearConstraint {
            name,
            tag,
            terms,
            sense,
            rhs,
        });
    };

    for r in 0..p {
        let terms = (0..n).map(|j| (v(layout.distribution(j, r)), one)).collect();
        push(format!("eq13_r{r}"), Family::Eq13, terms, Sense::Eq, one);
    }
    let ratio = Decimal::from(params.split_ratio.0);
    for j in 0..n {
        let terms = (0..p).map(|r| (v(layout.distribution(j, r)), one)).collect();
        push(format!("eq14_s{j}"), Family::Eq14, terms, Sense::Le, ratio);
    }
    for j in 0..n {
        for r in 0..p {
            let terms = vec![(v(layout.distribution(j, r)), one), (v(layout.splitter_open(j)), minus)];
            push(format!("eq15_s{j}_r{r}"), Family::Eq15, terms, Sense::Le, Decimal::ZERO);
        }
    }
    for j in 0..n {
        let mut terms: Vec<_> = (0..p).map(|r| (v(layout.distribution(j, r)), one)).collect();
        terms.push((v(layout.splitter_open(j)), minus));
        push(format!("eq16_s{j}"), Family::Eq16, terms, Sense::Ge, Decimal::ZERO);
    }
    for j in 0..n {
        let mut terms: Vec<_> = (0..m).map(|i| (v(layout.feeder(i, j)), one)).collect();
        terms.push((v(layout.splitter_open(j)), minus));
        push(format!("eq17_s{j}"), Family::Eq17, terms, Sense::Eq, Decimal::ZERO);
    }
    let h = Decimal::from(params.max_dos_per_co);
    for i in 0..m {
        let mut terms: Vec<_> = (0..n).map(|j| (v(layout.feeder(i, j)), one)).collect();
        terms.push((v(layout.co_open(i)), -h));
        push(format!("eq18_c{i}"), Family::Eq18, terms, Sense::Le, Decimal::ZERO);
    }
    for i in 0..m {
        for j in 0..n {
            let mut terms = vec![(v(layout.feeder(i, j)), one)];
            terms.extend((0..p).map(|r| (v(layout.distribution(j, r)), minus)));
            push(format!("eq19_c{i}_s{j}"), Family::Eq19, terms, Sense::Le, Decimal::ZERO);
        }
    }
    if n > 0 {
        let mut terms: Vec<_> = (0..n).map(|j| (v(layout.splitter_open(j)), one)).collect();
        for i in 0..m {
            for j in 0..n {
                terms.push((v(layout.feeder(i, j)), minus));
            }
        }
        push("eq20".to_string(), Family::Eq20, terms, Sense::Eq, Decimal::ZERO);
    }
    for j in 0..n {
        let down = (0..p).map(|r| (v(layout.distribution(j, r)), params.ru_downlink)).collect();
        push(format!("eq22_s{j}"), Family::Eq22, down, Sense::Le, params.pon_downlink);
        let up = (0..p).map(|r| (v(layout.distribution(j, r)), params.ru_uplink)).collect();
        push(format!("eq23_s{j}"), Family::Eq23, up, Sense::Le, params.pon_uplink);
    }

    let tau = params.delay_per_km;
    let big_m_distance = dm.max_feeder() + dm.max_distribution();
    let big_m_delay = tau * big_m_distance;
    for i in 0..m {
        for j in 0..n {
            let dij = dm.feeder(i, j);
            for r in 0..p {
                let djr = dm.distribution(j, r);
                let terms = vec![
                    (v(layout.feeder(i, j)), tau * dij + big_m_delay),
                    (v(layout.distribution(j, r)), tau * djr + big_m_delay),
                ];
                let rhs = params.max_delay + Decimal::TWO * big_m_delay;
                push(format!("eq24_c{i}_s{j}_r{r}"), Family::Eq24, terms, Sense::Le, rhs);
            }
        }
    }
    match params.d1_applies_to {
        FiberSegment::Distribution => {
            for j in 0..n {
                for r in 0..p {
                    let terms = vec![(v(layout.distribution(j, r)), dm.distribution(j, r))];
                    push(format!("eq25_s{j}_r{r}"), Family::Eq25, terms, Sense::Le, params.max_distribution_fiber);
                }
            }
        }
        FiberSegment::Feeder => {
            for i in 0..m {
                for j in 0..n {
                    let terms = vec![(v(layout.feeder(i, j)), dm.feeder(i, j))];
                    push(format!("eq25_c{i}_s{j}"), Family::Eq25, terms, Sense::Le, params.max_distribution_fiber);
                }
            }
        }
    }
    for i in 0..m {
        for j in 0..n {
            let dij = dm.feeder(i, j);
            for r in 0..p {
                let djr = dm.distribution(j, r);
                let terms = vec![
                    (v(layout.feeder(i, j)), dij + big_m_distance),
                    (v(layout.distribution(j, r)), djr + big_m_distance),
                ];
                let rhs = params.max_total_distance + Decimal::TWO * big_m_distance;
                push(format!("eq26_c{i}_s{j}_r{r}"), Family::Eq26, terms, Sense::Le, rhs);
            }
        }
    }
    for i in 0..m {
        for j in 0..n {
            let terms = vec![(v(layout.feeder(i, j)), one), (v(layout.co_open(i)), minus)];
            push(format!("link_c{i}_s{j}"), Family::CoLink, terms, Sense::Le, Decimal::ZERO);
        }
    }
    for r in 0..p {
        push(format!("fix_r{r}"), Family::RuFixed, vec![(v(layout.ru_deployed(r)), one)], Sense::Eq, one);
    }

    Ok(IlpModel {
        layout,
        variables: layout.variables(),
        objective,
        objective_constant: coef.constant,
        constraints: rows,
        meta: ModelMeta {
            fingerprint: fingerprint(inst),
            ids: SiteIds::of(inst),
            params: params.clone(),
            split_ratio: params.split_ratio,
            om_basis: inst.costs.om_basis,
            big_m_delay,
            big_m_distance,
            distances: dm.clone(),
            notes: vec![
                "RU/ONU units are priced at the RU/ONU unit cost (the printed objective uses the AWG price symbol)"
                    .to_string(),
                "AWG count equals the number of feeder links and is not a separate row".to_string(),
                format!("max_distribution_fiber applies to the {:?} segment", params.d1_applies_to).to_lowercase(),
            ],
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_study;
    use crate::model::{compute_distances, Site, SiteKind};
    use rust_decimal_macros::dec;

    pub(crate) fn tiny() -> PlanningInstance {
        PlanningInstance {
            central_offices: vec![Site::new(SiteKind::CentralOffice, "co", 0.0, 0.0)],
            splitters: vec![Site::new(SiteKind::Splitter, "sp", 0.0, 0.0)],
            ru_onus: vec![Site::new(SiteKind::RuOnu, "ru", 0.0, 0.0)],
            params: case_study::default_params(),
            costs: case_study::case_study_costs(),
        }
    }

    #[test]
    fn minimal_model_has_five_variables_and_every_family() {
        let inst = tiny();
        let model = build_model(&inst, &compute_distances(&inst), &BuildOptions::default()).unwrap();
        assert_eq!(model.variables.len(), 5);
        for family in Family::ALL {
            assert!(model.count_rows(family) >= 1, "{family} missing");
        }
        let mut used = [false; 5];
        for row in &model.constraints {
            for (v, _) in &row.terms {
                used[*v as usize] = true;
            }
        }
        assert!(used.iter().all(|u| *u));
        assert!(model.objective.iter().all(|c| *c >= Decimal::ZERO));
    }

    #[test]
    fn variables_sorted_by_kind_then_indices() {
        let inst = case_study::instance();
        let model = build_model(&inst, &compute_distances(&inst), &BuildOptions::default()).unwrap();
        assert!(model.variables.windows(2).all(|w| w[0] < w[1]));
        for (k, v) in model.variables.iter().enumerate() {
            assert_eq!(model.layout.index_of(*v), k);
        }
    }

    #[test]
    fn case_study_ratio_and_do_limit_rows() {
        let inst = case_study::instance();
        let model = build_model(&inst, &compute_distances(&inst), &BuildOptions::default()).unwrap();
        let eq14: Vec<_> = model.constraints.iter().filter(|c| c.tag == Family::Eq14).collect();
        assert_eq!(eq14.len(), inst.splitters.len());
        assert!(eq14.iter().all(|c| c.rhs == dec!(16) && c.sense == Sense::Le));
        let eq18: Vec<_> = model.constraints.iter().filter(|c| c.tag == Family::Eq18).collect();
        assert_eq!(eq18.len(), inst.central_offices.len());
        for (i, row) in eq18.iter().enumerate() {
            let co = model.layout.co_open(i) as u32;
            assert!(row.terms.contains(&(co, dec!(-10))));
        }
    }

    #[test]
    fn size_budget_reports_counts() {
        let inst = case_study::instance();
        let err = build_model(&inst, &compute_distances(&inst), &BuildOptions { max_variables: 100 }).unwrap_err();
        match err {
            ModelError::TooLarge { variables, budget, .. } => {
                assert_eq!(budget, 100);
                assert!(variables > 100);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn big_m_rows_are_slack_with_a_single_active_link() {
        let inst = case_study::instance();
        let model = build_model(&inst, &compute_distances(&inst), &BuildOptions::default()).unwrap();
        for row in model.constraints.iter().filter(|c| matches!(c.tag, Family::Eq24 | Family::Eq26)) {
            for (_, c) in &row.terms {
                assert!(*c <= row.rhs, "{} binds with one link", row.name);
            }
        }
    }
}
