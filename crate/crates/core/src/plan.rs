use std::collections::{BTreeMap, BTreeSet, HashMap};

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::error::PlanError;
use crate::model::PlanningInstance;

/// Site identifiers of an instance, in index order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SiteIds {
    pub central_offices: Vec<String>,
    pub splitters: Vec<String>,
    pub ru_onus: Vec<String>,
}

impl SiteIds {
    pub fn of(inst: &PlanningInstance) -> Self {
        SiteIds {
            central_offices: inst.central_offices.iter().map(|s| s.id.clone()).collect(),
            splitters: inst.splitters.iter().map(|s| s.id.clone()).collect(),
            ru_onus: inst.ru_onus.iter().map(|s| s.id.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FiberSummary {
    pub feeder_km: Decimal,
    pub distribution_km: Decimal,
}

/// Selected sites and links of a fronthaul deployment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeploymentPlan {
    pub open_cos: BTreeSet<String>,
    pub open_splitters: BTreeSet<String>,
    /// RU/ONU id to splitter id.
    pub ru_assignment: BTreeMap<String, String>,
    /// Splitter id to CO id.
    pub splitter_homing: BTreeMap<String, String>,
    pub objective_value: Decimal,
    pub fiber: FiberSummary,
}

/// A plan translated to site indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlanIndex {
    pub open_cos: Vec<usize>,
    pub open_splitters: Vec<usize>,
    /// (ru, splitter)
    pub assignment: Vec<(usize, usize)>,
    /// (splitter, co)
    pub homing: Vec<(usize, usize)>,
}

fn lookup(ids: &[String]) -> HashMap<&str, usize> {
    ids.iter().enumerate().map(|(k, id)| (id.as_str(), k)).collect()
}

impl DeploymentPlan {
    pub fn resolve(&self, inst: &PlanningInstance) -> Result<PlanIndex, PlanError> {
        self.resolve_ids(&SiteIds::of(inst))
    }

    /// Maps every referenced id to its index; unknown ids are structural
    /// errors.
    pub fn resolve_ids(&self, ids: &SiteIds) -> Result<PlanIndex, PlanError> {
        let cos = lookup(&ids.central_offices);
        let sps = lookup(&ids.splitters);
        let rus = lookup(&ids.ru_onus);
        let co = |id: &String| {
            cos.get(id.as_str()).copied().ok_or_else(|| PlanError::UnknownSite {
                kind: "central office",
                id: id.clone(),
            })
        };
        let sp = |id: &String| {
            sps.get(id.as_str()).copied().ok_or_else(|| PlanError::UnknownSite {
                kind: "splitter",
                id: id.clone(),
            })
        };
        let ru = |id: &String| {
            rus.get(id.as_str()).copied().ok_or_else(|| PlanError::UnknownSite {
                kind: "RU/ONU",
                id: id.clone(),
            })
        };
        Ok(PlanIndex {
            open_cos: self.open_cos.iter().map(co).collect::<Result<_, _>>()?,
            open_splitters: self.open_splitters.iter().map(sp).collect::<Result<_, _>>()?,
            assignment: self
                .ru_assignment
                .iter()
                .map(|(r, j)| Ok((ru(r)?, sp(j)?)))
                .collect::<Result<_, PlanError>>()?,
            homing: self
                .splitter_homing
                .iter()
                .map(|(j, i)| Ok((sp(j)?, co(i)?)))
                .collect::<Result<_, PlanError>>()?,
        })
    }

    /// Builds a plan from indices. Open sets are derived from the links.
    pub fn from_links(ids: &SiteIds, assignment: &[(usize, usize)], homing: &[(usize, usize)]) -> Self {
        let mut plan = DeploymentPlan::default();
        for &(j, i) in homing {
            plan.open_splitters.insert(ids.splitters[j].clone());
            plan.open_cos.insert(ids.central_offices[i].clone());
            plan.splitter_homing
                .insert(ids.splitters[j].clone(), ids.central_offices[i].clone());
        }
        for &(r, j) in assignment {
            plan.ru_assignment.insert(ids.ru_onus[r].clone(), ids.splitters[j].clone());
        }
        plan
    }
}
