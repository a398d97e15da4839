//! Total cost of ownership: Capex (equipment, infrastructure, installation)
//! plus a linear multiple of yearly Opex (energy, O&M, site rental).
//!
//! All arithmetic is exact decimal, so the identities
//! `capex_total = equipment + infrastructure + installation`,
//! `opex_total = energy + om + rental` and `tco = capex + years * opex`
//! hold without tolerance.

use std::collections::BTreeMap;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::error::CostError;
use crate::ilp::{build_model, verify_plan, BuildOptions};
use crate::model::{compute_distances, PlanningInstance, SplitRatio};
use crate::plan::DeploymentPlan;

pub const HOURS_PER_YEAR: Decimal = Decimal::from_parts(8760, 0, 0, false, 0);
const WH_PER_KWH: Decimal = Decimal::from_parts(1000, 0, 0, false, 0);
const M_PER_KM: Decimal = Decimal::from_parts(1000, 0, 0, false, 0);

/// What the yearly O&M fraction is applied to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmBasis {
    #[default]
    Equipment,
    TotalCapex,
}

/// Unit prices and power draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostTable {
    /// $ per central office housing.
    pub co_housing: Decimal,
    /// $ per DU/CU + OLT.
    pub do_unit: Decimal,
    pub awg: Decimal,
    pub splitter_by_ratio: BTreeMap<SplitRatio, Decimal>,
    pub ru_onu: Decimal,
    /// Material plus civil work, $ per metre.
    pub fiber_per_m: Decimal,
    /// $ per cell site per year.
    pub yearly_site_rent: Decimal,
    /// $ per kWh.
    pub electricity_price: Decimal,
    pub om_fraction: Decimal,
    #[serde(default)]
    pub om_basis: OmBasis,
    /// W (Wh drawn per hour).
    pub power_do: Decimal,
    pub power_cooling: Decimal,
    pub power_ru_onu: Decimal,
    /// Hours per link.
    #[serde(default)]
    pub install_time_per_link: Decimal,
    #[serde(default)]
    pub travel_time: Decimal,
    /// $ per hour.
    #[serde(default)]
    pub technician_salary: Decimal,
    #[serde(default)]
    pub technician_count: u32,
    /// $ per year.
    #[serde(default)]
    pub software_license: Decimal,
}

impl CostTable {
    pub fn check(&self) -> Vec<String> {
        let mut errors = Vec::new();
        let mut non_negative = vec![
            ("co_housing".to_string(), self.co_housing),
            ("do_unit".to_string(), self.do_unit),
            ("awg".to_string(), self.awg),
            ("ru_onu".to_string(), self.ru_onu),
            ("fiber_per_m".to_string(), self.fiber_per_m),
            ("yearly_site_rent".to_string(), self.yearly_site_rent),
            ("electricity_price".to_string(), self.electricity_price),
            ("power_do".to_string(), self.power_do),
            ("power_cooling".to_string(), self.power_cooling),
            ("power_ru_onu".to_string(), self.power_ru_onu),
            ("install_time_per_link".to_string(), self.install_time_per_link),
            ("travel_time".to_string(), self.travel_time),
            ("technician_salary".to_string(), self.technician_salary),
            ("software_license".to_string(), self.software_license),
        ];
        for (ratio, cost) in &self.splitter_by_ratio {
            non_negative.push((format!("splitter_by_ratio[{ratio}]"), *cost));
        }
        for (name, value) in non_negative {
            if value < Decimal::ZERO {
                errors.push(format!("costs.{name} must be non-negative, got {value}"));
            }
        }
        if self.om_fraction < Decimal::ZERO || self.om_fraction > Decimal::ONE {
            errors.push(format!("costs.om_fraction must lie in [0, 1], got {}", self.om_fraction));
        }
        errors
    }

    pub fn splitter_cost(&self, ratio: SplitRatio) -> Result<Decimal, CostError> {
        self.splitter_by_ratio
            .get(&ratio)
            .copied()
            .ok_or(CostError::UnknownRatio(ratio))
    }

    /// Installation cost of a single fiber link.
    pub fn per_link_installation(&self) -> Decimal {
        (self.install_time_per_link + Decimal::TWO * self.travel_time)
            * self.technician_salary
            * Decimal::from(self.technician_count)
    }

    /// Yearly energy bill of one continuously powered draw of `watts`.
    pub fn yearly_energy(&self, watts: Decimal) -> Decimal {
        self.electricity_price * HOURS_PER_YEAR * watts / WH_PER_KWH
    }

    /// Fiber (material and civil work) cost of `km` kilometres.
    pub fn fiber_cost(&self, km: Decimal) -> Decimal {
        km * M_PER_KM * self.fiber_per_m
    }

    /// Every field multiplied by `k`; counts are left alone.
    pub fn scaled(&self, k: Decimal) -> CostTable {
        CostTable {
            co_housing: self.co_housing * k,
            do_unit: self.do_unit * k,
            awg: self.awg * k,
            splitter_by_ratio: self.splitter_by_ratio.iter().map(|(r, c)| (*r, *c * k)).collect(),
            ru_onu: self.ru_onu * k,
            fiber_per_m: self.fiber_per_m * k,
            yearly_site_rent: self.yearly_site_rent * k,
            electricity_price: self.electricity_price * k,
            om_fraction: self.om_fraction,
            om_basis: self.om_basis,
            power_do: self.power_do,
            power_cooling: self.power_cooling,
            power_ru_onu: self.power_ru_onu,
            install_time_per_link: self.install_time_per_link,
            travel_time: self.travel_time,
            technician_salary: self.technician_salary * k,
            technician_count: self.technician_count,
            software_license: self.software_license * k,
        }
    }
}

/// Deployed unit counts. One DO and one AWG serve each feeder, and there is
/// exactly one feeder per opened splitter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitCounts {
    pub n_co: u64,
    pub n_do: u64,
    pub n_awg: u64,
    pub n_splitters: u64,
    pub n_ru_onu: u64,
}

impl UnitCounts {
    pub fn for_pons(n_co: u64, n_pons: u64, n_ru_onu: u64) -> Self {
        UnitCounts {
            n_co,
            n_do: n_pons,
            n_awg: n_pons,
            n_splitters: n_pons,
            n_ru_onu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub capex_equipment: Decimal,
    pub capex_infrastructure: Decimal,
    pub capex_installation: Decimal,
    pub capex_total: Decimal,
    pub opex_energy: Decimal,
    pub opex_om: Decimal,
    pub opex_site_rental: Decimal,
    pub opex_total: Decimal,
    pub tco: Decimal,
    pub horizon_years: u32,
    pub unit_counts: UnitCounts,
    pub feeder_km: Decimal,
    pub distribution_km: Decimal,
    pub fiber_length_total_km: Decimal,
    pub n_links: u64,
}

impl CostReport {
    /// Component names and values, in report order.
    pub fn components(&self) -> Vec<(&'static str, Decimal)> {
        vec![
            ("capex_equipment", self.capex_equipment),
            ("capex_infrastructure", self.capex_infrastructure),
            ("capex_installation", self.capex_installation),
            ("capex_total", self.capex_total),
            ("opex_energy", self.opex_energy),
            ("opex_om", self.opex_om),
            ("opex_site_rental", self.opex_site_rental),
            ("opex_total", self.opex_total),
            ("tco", self.tco),
        ]
    }

    /// Checks the three additive identities exactly.
    pub fn identities_hold(&self) -> bool {
        self.capex_total == self.capex_equipment + self.capex_infrastructure + self.capex_installation
            && self.opex_total == self.opex_energy + self.opex_om + self.opex_site_rental
            && self.tco == self.capex_total + Decimal::from(self.horizon_years) * self.opex_total
    }
}

pub fn equipment_cost(counts: &UnitCounts, costs: &CostTable, ratio: SplitRatio) -> Result<Decimal, CostError> {
    let splitter = if counts.n_splitters == 0 {
        costs.splitter_cost(ratio).unwrap_or(Decimal::ZERO)
    } else {
        costs.splitter_cost(ratio)?
    };
    Ok(Decimal::from(counts.n_co) * costs.co_housing
        + Decimal::from(counts.n_do) * costs.do_unit
        + Decimal::from(counts.n_awg) * costs.awg
        + Decimal::from(counts.n_splitters) * splitter
        + Decimal::from(counts.n_ru_onu) * costs.ru_onu)
}

pub fn infrastructure_cost(total_fiber_km: Decimal, costs: &CostTable) -> Decimal {
    costs.fiber_cost(total_fiber_km)
}

pub fn installation_cost(n_links: u64, costs: &CostTable) -> Decimal {
    Decimal::from(n_links) * costs.per_link_installation()
}

/// Yearly electricity bill of all DOs (each with its cooling) and RU/ONUs.
pub fn energy_cost(counts: &UnitCounts, costs: &CostTable) -> Decimal {
    let watts = Decimal::from(counts.n_do) * (costs.power_do + costs.power_cooling)
        + Decimal::from(counts.n_ru_onu) * costs.power_ru_onu;
    costs.yearly_energy(watts)
}

pub fn om_cost(basis: Decimal, costs: &CostTable) -> Decimal {
    costs.om_fraction * basis + costs.software_license
}

pub fn site_rental_cost(n_cell_sites: u64, costs: &CostTable) -> Decimal {
    Decimal::from(n_cell_sites) * costs.yearly_site_rent
}

/// Assembles a full report from deployment quantities.
pub fn cost_report(
    counts: UnitCounts,
    feeder_km: Decimal,
    distribution_km: Decimal,
    n_links: u64,
    ratio: SplitRatio,
    costs: &CostTable,
    horizon_years: u32,
) -> Result<CostReport, CostError> {
    let fiber = feeder_km + distribution_km;
    let capex_equipment = equipment_cost(&counts, costs, ratio)?;
    let capex_infrastructure = infrastructure_cost(fiber, costs);
    let capex_installation = installation_cost(n_links, costs);
    let capex_total = capex_equipment + capex_infrastructure + capex_installation;
    let opex_energy = energy_cost(&counts, costs);
    let om_basis = match costs.om_basis {
        OmBasis::Equipment => capex_equipment,
        OmBasis::TotalCapex => capex_total,
    };
    let opex_om = om_cost(om_basis, costs);
    let opex_site_rental = site_rental_cost(counts.n_ru_onu, costs);
    let opex_total = opex_energy + opex_om + opex_site_rental;
    let tco = capex_total + Decimal::from(horizon_years) * opex_total;
    Ok(CostReport {
        capex_equipment,
        capex_infrastructure,
        capex_installation,
        capex_total,
        opex_energy,
        opex_om,
        opex_site_rental,
        opex_total,
        tco,
        horizon_years,
        unit_counts: counts,
        feeder_km,
        distribution_km,
        fiber_length_total_km: fiber,
        n_links,
    })
}

/// Report for a plan without checking feasibility. Fiber lengths are taken
/// from the instance geometry, not from the plan's own summary.
pub fn plan_cost_report(plan: &DeploymentPlan, inst: &PlanningInstance) -> Result<CostReport, CostError> {
    let dm = compute_distances(inst);
    let index = plan.resolve(inst)?;
    let feeder_km: Decimal = index.homing.iter().map(|&(j, i)| dm.feeder(i, j)).sum();
    let distribution_km: Decimal = index.assignment.iter().map(|&(r, j)| dm.distribution(j, r)).sum();
    let n_pons = index.open_splitters.len() as u64;
    let counts = UnitCounts::for_pons(
        index.open_cos.len() as u64,
        n_pons,
        index.assignment.len() as u64,
    );
    let n_links = (index.homing.len() + index.assignment.len()) as u64;
    cost_report(
        counts,
        feeder_km,
        distribution_km,
        n_links,
        inst.params.split_ratio,
        &inst.costs,
        inst.params.horizon_years,
    )
}

/// Full TCO of a plan; infeasible plans are rejected with every violation.
pub fn total_cost(plan: &DeploymentPlan, inst: &PlanningInstance) -> Result<CostReport, CostError> {
    let dm = compute_distances(inst);
    let model = build_model(inst, &dm, &BuildOptions::default())?;
    let verdict = verify_plan(plan, &model)?;
    if !verdict.feasible() {
        return Err(CostError::Infeasible(verdict.violations));
    }
    plan_cost_report(plan, inst)
}
