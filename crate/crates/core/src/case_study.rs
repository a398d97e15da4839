//! The bundled 34-RU/ONU, 10x10 km evaluation instance and its cost table.

use std::collections::BTreeMap;

use rust_decimal::Decimal;

use crate::cost::{CostTable, OmBasis};
use crate::io::parse_instance;
use crate::model::{FiberSegment, ModelParams, PlanningInstance, SplitRatio};

pub const CASE_STUDY_JSON: &str = include_str!("../data/case_study.json");

/// Names accepted wherever an instance path is expected.
pub const ALIASES: [&str; 2] = ["case_study", "case-study"];

pub fn default_params() -> ModelParams {
    ModelParams {
        split_ratio: SplitRatio(16),
        allow_nonstandard_ratio: false,
        max_dos_per_co: 10,
        delay_per_km: Decimal::from(5),
        max_delay: Decimal::from(30),
        max_distribution_fiber: Decimal::from(10),
        max_total_distance: Decimal::from(20),
        pon_downlink: Decimal::from(40),
        pon_uplink: Decimal::from(40),
        ru_downlink: Decimal::new(25, 1),
        ru_uplink: Decimal::new(25, 1),
        horizon_years: 10,
        routing_factor: Decimal::ONE,
        d1_applies_to: FiberSegment::Distribution,
    }
}

/// Unit prices and power draws of the case study.
pub fn case_study_costs() -> CostTable {
    let splitters: BTreeMap<SplitRatio, Decimal> = [(4, 30), (8, 50), (16, 100)]
        .into_iter()
        .map(|(r, c)| (SplitRatio(r), Decimal::from(c)))
        .collect();
    CostTable {
        co_housing: Decimal::from(75_000),
        do_unit: Decimal::from(6_500),
        awg: Decimal::from(250),
        splitter_by_ratio: splitters,
        ru_onu: Decimal::from(3_500),
        fiber_per_m: Decimal::from(20),
        yearly_site_rent: Decimal::from(8_000),
        electricity_price: Decimal::new(15, 2),
        om_fraction: Decimal::new(1, 1),
        om_basis: OmBasis::Equipment,
        power_do: Decimal::from(255),
        power_cooling: Decimal::from(500),
        power_ru_onu: Decimal::from(104),
        install_time_per_link: Decimal::ZERO,
        travel_time: Decimal::ZERO,
        technician_salary: Decimal::ZERO,
        technician_count: 0,
        software_license: Decimal::ZERO,
    }
}

pub fn instance() -> PlanningInstance {
    parse_instance(CASE_STUDY_JSON).expect("bundled instance parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_document_matches_defaults() {
        let inst = instance();
        assert_eq!(inst.params, default_params());
        assert_eq!(inst.costs, case_study_costs());
        assert_eq!(inst.site_counts(), (6, 21, 34));
        assert!(inst.validate().unwrap().is_empty());
    }
}
