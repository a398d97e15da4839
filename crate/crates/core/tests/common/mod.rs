#![allow(dead_code)]

use fronthaul_core::{case_study, PlanningInstance, Site, SiteKind, SplitRatio};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn point(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // quarter-km grid over 3x3 km
    (f64::from(rng.gen_range(0..=12)) / 4.0, f64::from(rng.gen_range(0..=12)) / 4.0)
}

/// Small instance with every binding row reachable: tight delay budgets,
/// 1:4 splitters, low PON capacity and one or two DOs per CO.
pub fn random_instance(rng: &mut ChaCha8Rng, cos: usize, splitters: usize, rus: usize) -> PlanningInstance {
    let site = |kind, prefix: &str, k: usize, (x, y): (f64, f64)| Site::new(kind, format!("{prefix}{k}"), x, y);
    let mut params = case_study::default_params();
    params.split_ratio = SplitRatio(*[4u32, 8, 16].get(rng.gen_range(0..3)).unwrap());
    params.max_dos_per_co = rng.gen_range(1..=2);
    params.max_delay = Decimal::from(rng.gen_range(12..=40));
    params.max_total_distance = Decimal::from(rng.gen_range(4..=9));
    params.max_distribution_fiber = Decimal::from(rng.gen_range(2..=6));
    params.pon_downlink = Decimal::from(*[5u32, 7, 10, 40].get(rng.gen_range(0..4)).unwrap());
    params.pon_uplink = Decimal::from(*[5u32, 7, 10, 40].get(rng.gen_range(0..4)).unwrap());
    PlanningInstance {
        central_offices: (0..cos).map(|k| site(SiteKind::CentralOffice, "c", k, point(rng))).collect(),
        splitters: (0..splitters).map(|k| site(SiteKind::Splitter, "s", k, point(rng))).collect(),
        ru_onus: (0..rus).map(|k| site(SiteKind::RuOnu, "r", k, point(rng))).collect(),
        params,
        costs: case_study::case_study_costs(),
    }
}

pub fn sized(rng: &mut ChaCha8Rng) -> PlanningInstance {
    let (m, n, p) = (rng.gen_range(1..=2), rng.gen_range(1..=3), rng.gen_range(1..=5));
    random_instance(rng, m, n, p)
}

pub fn model(inst: &PlanningInstance) -> fronthaul_core::IlpModel {
    fronthaul_core::ilp::build_model(inst, &fronthaul_core::model::compute_distances(inst), &Default::default())
        .expect("small model builds")
}
