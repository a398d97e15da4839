//! Planning instance: candidate sites, geometry and network parameters.
//!
//! Canonical units are fixed: kilometres for distances, microseconds for
//! delays, Gb/s for rates, dollars for money and watts (drawn continuously,
//! i.e. Wh per hour) for power.

use std::collections::HashSet;
use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::cost::CostTable;
use crate::error::ValidationError;

/// Propagation budget of the fronthaul above which a warning is raised.
pub const CRAN_DELAY_BUDGET_US: Decimal = Decimal::from_parts(50, 0, 0, false, 0);

/// Splitting ratios accepted without the override flag.
pub const STANDARD_RATIOS: [u32; 3] = [4, 8, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteKind {
    CentralOffice,
    Splitter,
    RuOnu,
}

impl SiteKind {
    pub fn label(self) -> &'static str {
        match self {
            SiteKind::CentralOffice => "central office",
            SiteKind::Splitter => "splitter",
            SiteKind::RuOnu => "RU/ONU",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: String,
    pub kind: SiteKind,
    /// Easting in km.
    pub x: f64,
    /// Northing in km.
    pub y: f64,
}

impl Site {
    pub fn new(kind: SiteKind, id: impl Into<String>, x: f64, y: f64) -> Self {
        Site {
            id: id.into(),
            kind,
            x,
            y,
        }
    }
}

/// A power-splitter fan-out, printed as `1:n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SplitRatio(pub u32);

impl fmt::Display for SplitRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1:{}", self.0)
    }
}

/// Which fiber segment the `max_distribution_fiber` bound applies to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberSegment {
    #[default]
    Distribution,
    Feeder,
}

fn one() -> Decimal {
    Decimal::ONE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub split_ratio: SplitRatio,
    /// Accept ratios outside {4, 8, 16}.
    #[serde(default)]
    pub allow_nonstandard_ratio: bool,
    pub max_dos_per_co: u32,
    /// µs per km of fiber.
    pub delay_per_km: Decimal,
    /// µs, CO to RU/ONU.
    pub max_delay: Decimal,
    /// km.
    pub max_distribution_fiber: Decimal,
    /// km, CO to RU/ONU.
    pub max_total_distance: Decimal,
    pub pon_downlink: Decimal,
    pub pon_uplink: Decimal,
    pub ru_downlink: Decimal,
    pub ru_uplink: Decimal,
    pub horizon_years: u32,
    /// Multiplier from straight-line to installed fiber length.
    #[serde(default = "one")]
    pub routing_factor: Decimal,
    #[serde(default)]
    pub d1_applies_to: FiberSegment,
}

impl ModelParams {
    /// Errors and warnings, in that order.
    pub fn check(&self) -> (Vec<String>, Vec<String>) {
        let mut errors = Vec::new();
        let mut warnings = Vec::new();
        let ratio = self.split_ratio.0;
        if ratio == 0 {
            errors.push("split_ratio must be positive".to_string());
        } else if !self.allow_nonstandard_ratio && !STANDARD_RATIOS.contains(&ratio) {
            errors.push(format!(
                "split_ratio {} not in {{1:4, 1:8, 1:16}} (set allow_nonstandard_ratio to override)",
                self.split_ratio
            ));
        }
        if self.max_dos_per_co == 0 {
            errors.push("max_dos_per_co must be positive".to_string());
        }
        let positive = [
            ("delay_per_km", self.delay_per_km),
            ("max_distribution_fiber", self.max_distribution_fiber),
            ("max_total_distance", self.max_total_distance),
            ("pon_downlink", self.pon_downlink),
            ("pon_uplink", self.pon_uplink),
            ("ru_downlink", self.ru_downlink),
            ("ru_uplink", self.ru_uplink),
            ("routing_factor", self.routing_factor),
        ];
        for (name, value) in positive {
            if value <= Decimal::ZERO {
                errors.push(format!("{name} must be strictly positive, got {value}"));
            }
        }
        if self.max_delay < Decimal::ZERO {
            errors.push(format!("max_delay must be non-negative, got {}", self.max_delay));
        } else if self.max_delay > CRAN_DELAY_BUDGET_US {
            warnings.push(format!(
                "max_delay {} µs exceeds the {} µs C-RAN propagation budget",
                self.max_delay, CRAN_DELAY_BUDGET_US
            ));
        }
        if self.ru_downlink > self.pon_downlink {
            errors.push(format!(
                "ru_downlink {} exceeds pon_downlink {}",
                self.ru_downlink, self.pon_downlink
            ));
        }
        if self.ru_uplink > self.pon_uplink {
            errors.push(format!(
                "ru_uplink {} exceeds pon_uplink {}",
                self.ru_uplink, self.pon_uplink
            ));
        }
        (errors, warnings)
    }

    /// Longest CO-to-RU fiber path allowed by both the delay and the
    /// distance budget.
    pub fn path_limit_km(&self) -> Decimal {
        let by_delay = self.max_delay / self.delay_per_km;
        by_delay.min(self.max_total_distance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanningInstance {
    pub central_offices: Vec<Site>,
    pub splitters: Vec<Site>,
    pub ru_onus: Vec<Site>,
    pub params: ModelParams,
    pub costs: CostTable,
}

impl PlanningInstance {
    /// Checks every structural invariant. Warnings (non-fatal) are returned
    /// on success.
    pub fn validate(&self) -> Result<Vec<String>, ValidationError> {
        let mut errors = Vec::new();
        let sets = [
            ("C", SiteKind::CentralOffice, &self.central_offices),
            ("S", SiteKind::Splitter, &self.splitters),
            ("R", SiteKind::RuOnu, &self.ru_onus),
        ];
        for (set, kind, sites) in sets {
            if sites.is_empty() {
                errors.push(format!("empty set {set}"));
            }
            let mut seen = HashSet::new();
            for site in sites.iter() {
                if site.kind != kind {
                    errors.push(format!(
                        "site '{}' listed as {} but has kind {}",
                        site.id,
                        kind.label(),
                        site.kind.label()
                    ));
                }
                if !seen.insert(site.id.as_str()) {
                    errors.push(format!("duplicate {} id '{}'", kind.label(), site.id));
                }
                if !site.x.is_finite() || !site.y.is_finite() {
                    errors.push(format!("{} '{}' has non-finite coordinates", kind.label(), site.id));
                }
            }
        }
        let (param_errors, warnings) = self.params.check();
        errors.extend(param_errors);
        errors.extend(self.costs.check());
        if self.costs.splitter_cost(self.params.split_ratio).is_err() {
            errors.push(format!("costs.splitter_by_ratio has no entry for {}", self.params.split_ratio));
        }
        if errors.is_empty() {
            Ok(warnings)
        } else {
            Err(ValidationError { errors })
        }
    }

    /// Every RU/ONU needs at least one (splitter, CO) chain inside the
    /// delay, total-distance and segment-length bounds.
    pub fn precheck_feasibility(&self, dm: &DistanceMatrix) -> Result<(), ValidationError> {
        let limit = self.params.path_limit_km();
        let d1 = self.params.max_distribution_fiber;
        let mut errors = Vec::new();
        for (r, ru) in self.ru_onus.iter().enumerate() {
            let mut shortest: Option<Decimal> = None;
            let mut ok = false;
            for j in 0..self.splitters.len() {
                let djr = dm.distribution(j, r);
                if self.params.d1_applies_to == FiberSegment::Distribution && djr > d1 {
                    continue;
                }
                for i in 0..self.central_offices.len() {
                    let dij = dm.feeder(i, j);
                    if self.params.d1_applies_to == FiberSegment::Feeder && dij > d1 {
                        continue;
                    }
                    let total = dij + djr;
                    shortest = Some(shortest.map_or(total, |s| s.min(total)));
                    if total <= limit {
                        ok = true;
                    }
                }
            }
            if !ok {
                let detail = match shortest {
                    Some(s) => format!("shortest admissible chain {s} km, limit {limit} km"),
                    None => format!("no splitter within the {d1} km segment bound"),
                };
                errors.push(format!(
                    "RU/ONU '{}' has no feasible (splitter, CO) chain: {detail}",
                    ru.id
                ));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { errors })
        }
    }

    pub fn site_counts(&self) -> (usize, usize, usize) {
        (self.central_offices.len(), self.splitters.len(), self.ru_onus.len())
    }
}

/// Pairwise fiber lengths, rounded to 1e-6 km.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DistanceMatrix {
    /// `[co][splitter]`
    pub feeder: Vec<Vec<Decimal>>,
    /// `[splitter][ru]`
    pub distribution: Vec<Vec<Decimal>>,
}

impl DistanceMatrix {
    pub fn feeder(&self, co: usize, splitter: usize) -> Decimal {
        self.feeder[co][splitter]
    }

    pub fn distribution(&self, splitter: usize, ru: usize) -> Decimal {
        self.distribution[splitter][ru]
    }

    pub fn max_feeder(&self) -> Decimal {
        self.feeder.iter().flatten().copied().max().unwrap_or(Decimal::ZERO)
    }

    pub fn max_distribution(&self) -> Decimal {
        self.distribution.iter().flatten().copied().max().unwrap_or(Decimal::ZERO)
    }
}

/// Fiber length between two points: Euclidean distance times the routing
/// factor, rounded to 1e-6 km.
pub fn fiber_length(a: &Site, b: &Site, routing_factor: Decimal) -> Decimal {
    let straight = (a.x - b.x).hypot(a.y - b.y);
    let factor: f64 = routing_factor.try_into().unwrap_or(1.0);
    let micro = (straight * factor * 1e6).round();
    Decimal::new(micro as i64, 6)
}

pub fn compute_distances(inst: &PlanningInstance) -> DistanceMatrix {
    let rf = inst.params.routing_factor;
    let feeder = inst
        .central_offices
        .iter()
        .map(|co| inst.splitters.iter().map(|s| fiber_length(co, s, rf)).collect())
        .collect();
    let distribution = inst
        .splitters
        .iter()
        .map(|s| inst.ru_onus.iter().map(|r| fiber_length(s, r, rf)).collect())
        .collect();
    DistanceMatrix {
        feeder,
        distribution,
    }
}

/// One-way propagation delay of a CO-splitter-RU path. Sending, queuing and
/// processing delays are hardware-bound and taken as zero.
pub fn path_delay(d_feeder: Decimal, d_distribution: Decimal, delay_per_km: Decimal) -> Decimal {
    delay_per_km * (d_feeder + d_distribution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rust_decimal_macros::dec;

    fn site(kind: SiteKind, x: f64, y: f64) -> Site {
        Site::new(kind, "s", x, y)
    }

    #[test]
    fn three_four_five() {
        let co = site(SiteKind::CentralOffice, 0.0, 0.0);
        let sp = site(SiteKind::Splitter, 3.0, 4.0);
        assert_eq!(fiber_length(&co, &sp, Decimal::ONE), dec!(5));
    }

    #[test]
    fn co_located_is_zero() {
        let sp = site(SiteKind::Splitter, 1.25, 7.5);
        let ru = site(SiteKind::RuOnu, 1.25, 7.5);
        assert_eq!(fiber_length(&sp, &ru, Decimal::ONE), Decimal::ZERO);
    }

    #[test]
    fn routing_factor_scales() {
        let co = site(SiteKind::CentralOffice, 0.0, 0.0);
        let sp = site(SiteKind::Splitter, 3.0, 4.0);
        assert_eq!(fiber_length(&co, &sp, dec!(1.5)), dec!(7.5));
    }

    #[test]
    fn path_delay_examples() {
        assert_eq!(path_delay(dec!(4), dec!(2), dec!(5)), dec!(30));
        assert_eq!(path_delay(dec!(0), dec!(0), dec!(5)), dec!(0));
        assert_eq!(path_delay(dec!(10), dec!(0), dec!(5)), dec!(50));
    }

    proptest! {
        #[test]
        fn triangle_inequality(ax in -50.0f64..50.0, ay in -50.0f64..50.0,
                               bx in -50.0f64..50.0, by in -50.0f64..50.0,
                               cx in -50.0f64..50.0, cy in -50.0f64..50.0) {
            let a = site(SiteKind::CentralOffice, ax, ay);
            let b = site(SiteKind::Splitter, bx, by);
            let c = site(SiteKind::RuOnu, cx, cy);
            let ab = fiber_length(&a, &b, Decimal::ONE);
            let bc = fiber_length(&b, &c, Decimal::ONE);
            let ac = fiber_length(&a, &c, Decimal::ONE);
            // each length carries at most 5e-7 km of rounding
            prop_assert!(ac <= ab + bc + dec!(0.0000015));
            prop_assert_eq!(ab, fiber_length(&b, &a, Decimal::ONE));
            prop_assert!(ab >= Decimal::ZERO);
        }

        #[test]
        fn path_delay_is_linear(a in 0u32..100_000, b in 0u32..100_000, c in 0u32..100_000,
                                d in 0u32..100_000, tau in 1u32..20_000) {
            let (a, b, c, d) = (Decimal::new(a.into(), 3), Decimal::new(b.into(), 3),
                                Decimal::new(c.into(), 3), Decimal::new(d.into(), 3));
            let tau = Decimal::new(tau.into(), 3);
            prop_assert_eq!(path_delay(a, b, tau) + path_delay(c, d, tau), path_delay(a + c, b + d, tau));
        }
    }
}
