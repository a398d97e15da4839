//! Document formats: instance JSON, site CSV, plan JSON, cost-report JSON/CSV.
//!
//! Canonical JSON has sorted keys and numbers rounded to at most six decimal
//! places, so identical inputs give byte-identical files.

use std::path::Path;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::cost::{CostReport, CostTable};
use crate::error::LoadError;
use crate::model::{compute_distances, ModelParams, PlanningInstance, Site, SiteKind};
use crate::plan::DeploymentPlan;

pub const CANONICAL_DECIMALS: u32 = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteDoc {
    pub id: String,
    pub x_km: Decimal,
    pub y_km: Decimal,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SitesDoc {
    pub central_offices: Vec<SiteDoc>,
    pub splitters: Vec<SiteDoc>,
    pub ru_onus: Vec<SiteDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub sites: SitesDoc,
    pub params: ModelParams,
    pub costs: CostTable,
}

fn to_f64(d: Decimal) -> f64 {
    d.try_into().unwrap_or(f64::NAN)
}

fn to_decimal(x: f64) -> Decimal {
    Decimal::from_f64_retain(x)
        .map(|d| d.round_dp(CANONICAL_DECIMALS).normalize())
        .unwrap_or(Decimal::ZERO)
}

impl SiteDoc {
    fn site(&self, kind: SiteKind) -> Site {
        Site::new(kind, self.id.clone(), to_f64(self.x_km), to_f64(self.y_km))
    }

    fn of(site: &Site) -> Self {
        SiteDoc {
            id: site.id.clone(),
            x_km: to_decimal(site.x),
            y_km: to_decimal(site.y),
        }
    }
}

impl InstanceDoc {
    pub fn into_instance(self) -> PlanningInstance {
        let conv = |docs: &[SiteDoc], kind| docs.iter().map(|d| d.site(kind)).collect();
        PlanningInstance {
            central_offices: conv(&self.sites.central_offices, SiteKind::CentralOffice),
            splitters: conv(&self.sites.splitters, SiteKind::Splitter),
            ru_onus: conv(&self.sites.ru_onus, SiteKind::RuOnu),
            params: self.params,
            costs: self.costs,
        }
    }

    pub fn of(inst: &PlanningInstance) -> Self {
        let conv = |sites: &[Site]| sites.iter().map(SiteDoc::of).collect();
        InstanceDoc {
            sites: SitesDoc {
                central_offices: conv(&inst.central_offices),
                splitters: conv(&inst.splitters),
                ru_onus: conv(&inst.ru_onus),
            },
            params: inst.params.clone(),
            costs: inst.costs.clone(),
        }
    }
}

/// Parsed and validated instance plus any non-fatal warnings.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub instance: PlanningInstance,
    pub warnings: Vec<String>,
}

/// Parses an instance document without validating it.
pub fn parse_instance(text: &str) -> Result<PlanningInstance, LoadError> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| LoadError::Parse(e.to_string()))?;
    Ok(doc.into_instance())
}

/// Parses, validates every invariant and runs the feasibility pre-check.
pub fn load_instance_str(text: &str) -> Result<Loaded, LoadError> {
    let instance = parse_instance(text)?;
    check_instance(instance)
}

pub fn check_instance(instance: PlanningInstance) -> Result<Loaded, LoadError> {
    let warnings = instance.validate()?;
    instance.precheck_feasibility(&compute_distances(&instance))?;
    Ok(Loaded { instance, warnings })
}

pub fn load_instance(path: &Path) -> Result<Loaded, LoadError> {
    load_instance_str(&read(path)?)
}

pub fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn save_instance(inst: &PlanningInstance) -> String {
    canonical_json(&InstanceDoc::of(inst))
}

/// Site lists from CSV with header `kind,id,x_km,y_km`; kind is one of
/// `central_office`, `splitter`, `ru_onu`.
pub fn parse_sites_csv(text: &str) -> Result<SitesDoc, LoadError> {
    #[derive(Deserialize)]
    struct Row {
        kind: SiteKind,
        id: String,
        x_km: Decimal,
        y_km: Decimal,
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut sites = SitesDoc::default();
    for (k, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| LoadError::Parse(format!("sites csv record {}: {e}", k + 1)))?;
        let doc = SiteDoc {
            id: row.id,
            x_km: row.x_km,
            y_km: row.y_km,
        };
        match row.kind {
            SiteKind::CentralOffice => sites.central_offices.push(doc),
            SiteKind::Splitter => sites.splitters.push(doc),
            SiteKind::RuOnu => sites.ru_onus.push(doc),
        }
    }
    Ok(sites)
}

pub fn sites_csv(inst: &PlanningInstance) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let _ = writer.write_record(["kind", "id", "x_km", "y_km"]);
    for (kind, sites) in [
        ("central_office", &inst.central_offices),
        ("splitter", &inst.splitters),
        ("ru_onu", &inst.ru_onus),
    ] {
        for s in sites {
            let doc = SiteDoc::of(s);
            let _ = writer.write_record([kind, &doc.id, &doc.x_km.to_string(), &doc.y_km.to_string()]);
        }
    }
    String::from_utf8(writer.into_inner().unwrap_or_default()).unwrap_or_default()
}

/// Replaces the site lists of an instance document.
pub fn with_sites(mut inst: PlanningInstance, sites: SitesDoc) -> PlanningInstance {
    let doc = InstanceDoc {
        sites,
        params: inst.params.clone(),
        costs: inst.costs.clone(),
    };
    let fresh = doc.into_instance();
    inst.central_offices = fresh.central_offices;
    inst.splitters = fresh.splitters;
    inst.ru_onus = fresh.ru_onus;
    inst
}

fn round_number(n: &Number) -> Number {
    let text = n.to_string();
    let parsed = text
        .parse::<Decimal>()
        .or_else(|_| Decimal::from_scientific(&text));
    match parsed {
        Ok(d) => {
            let rounded = d.round_dp(CANONICAL_DECIMALS).normalize();
            serde_json::from_str::<Number>(&rounded.to_string()).unwrap_or_else(|_| n.clone())
        }
        Err(_) => n.clone(),
    }
}

fn canonicalize(value: Value) -> Value {
    match value {
        Value::Number(n) => Value::Number(round_number(&n)),
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys and at most six decimals per number.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("serializable document");
    let mut text = serde_json::to_string_pretty(&canonicalize(value)).expect("serializable value");
    text.push('\n');
    text
}

pub fn plan_json(plan: &DeploymentPlan) -> String {
    canonical_json(plan)
}

pub fn parse_plan(text: &str) -> Result<DeploymentPlan, LoadError> {
    serde_json::from_str(text).map_err(|e| LoadError::Parse(e.to_string()))
}

/// Two-column `component,value` CSV, values to the cent.
pub fn cost_report_csv(report: &CostReport) -> String {
    let mut out = String::from("component,value\n");
    for (name, value) in report.components() {
        out.push_str(&format!("{name},{:.2}\n", value.round_dp(2)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_study;
    use proptest::prelude::*;

    #[test]
    fn bundled_case_study_loads() {
        let loaded = load_instance_str(case_study::CASE_STUDY_JSON).unwrap();
        assert_eq!(loaded.instance.ru_onus.len(), 34);
        for s in loaded.instance.ru_onus.iter().chain(&loaded.instance.splitters).chain(&loaded.instance.central_offices) {
            assert!((0.0..=10.0).contains(&s.x) && (0.0..=10.0).contains(&s.y));
        }
    }

    #[test]
    fn empty_ru_set_is_reported() {
        let mut doc: InstanceDoc = serde_json::from_str(case_study::CASE_STUDY_JSON).unwrap();
        doc.sites.ru_onus.clear();
        let err = load_instance_str(&canonical_json(&doc)).unwrap_err();
        match err {
            LoadError::Validation(v) => assert!(v.errors.contains(&"empty set R".to_string()), "{v}"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn every_failed_check_is_listed() {
        let mut doc: InstanceDoc = serde_json::from_str(case_study::CASE_STUDY_JSON).unwrap();
        doc.sites.splitters.clear();
        doc.params.max_dos_per_co = 0;
        doc.costs.om_fraction = Decimal::TWO;
        let err = load_instance_str(&canonical_json(&doc)).unwrap_err();
        let LoadError::Validation(v) = err else { panic!("expected validation error") };
        assert_eq!(v.errors.len(), 3, "{v}");
    }

    #[test]
    fn remote_ru_fails_precheck_by_name() {
        let mut doc: InstanceDoc = serde_json::from_str(case_study::CASE_STUDY_JSON).unwrap();
        doc.sites.ru_onus.push(SiteDoc {
            id: "far-away".into(),
            x_km: Decimal::from(60),
            y_km: Decimal::from(60),
        });
        let err = load_instance_str(&canonical_json(&doc)).unwrap_err();
        let LoadError::Validation(v) = err else { panic!("expected validation error") };
        assert_eq!(v.errors.len(), 1);
        assert!(v.errors[0].contains("'far-away'"), "{v}");
    }

    #[test]
    fn missing_field_names_field_and_line() {
        let text = case_study::CASE_STUDY_JSON.replace("\"max_dos_per_co\"", "\"max_dos_per_c0\"");
        let err = load_instance_str(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("max_dos_per_c0") || msg.contains("max_dos_per_co"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn over_budget_delay_is_a_warning() {
        let mut inst = case_study::instance();
        inst.params.max_delay = Decimal::from(60);
        let loaded = check_instance(inst).unwrap();
        assert_eq!(loaded.warnings.len(), 1);
    }

    #[test]
    fn sites_csv_round_trip() {
        let inst = case_study::instance();
        let sites = parse_sites_csv(&sites_csv(&inst)).unwrap();
        let rebuilt = with_sites(inst.clone(), sites);
        assert_eq!(rebuilt, inst);
    }

    #[test]
    fn canonical_numbers_are_rounded() {
        let v = serde_json::json!({"b": 1.23456789, "a": 75000});
        assert_eq!(canonical_json(&v), "{\n  \"a\": 75000,\n  \"b\": 1.234568\n}\n");
    }

    proptest! {
        #[test]
        fn instance_round_trip(coords in proptest::collection::vec((0u32..10_000, 0u32..10_000), 3..12),
                               ratio in prop::sample::select(vec![4u32, 8, 16]),
                               years in 0u32..30) {
            let mut inst = case_study::instance();
            inst.params.split_ratio = crate::model::SplitRatio(ratio);
            inst.params.horizon_years = years;
            let site = |kind, k: usize, (x, y): (u32, u32)| {
                Site::new(kind, format!("{kind:?}-{k}"), f64::from(x) / 1000.0, f64::from(y) / 1000.0)
            };
            inst.central_offices = vec![site(SiteKind::CentralOffice, 0, coords[0])];
            inst.splitters = vec![site(SiteKind::Splitter, 0, coords[1])];
            inst.ru_onus = coords[2..].iter().enumerate().map(|(k, c)| site(SiteKind::RuOnu, k, *c)).collect();
            let text = save_instance(&inst);
            let back = parse_instance(&text).unwrap();
            prop_assert_eq!(&back, &inst);
            prop_assert_eq!(save_instance(&back), text);
        }
    }
}
