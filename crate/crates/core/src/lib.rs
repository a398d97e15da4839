//! Planning of delay-constrained TWDM-PON fronthaul for C-RAN.
//!
//! Pipeline: [`PlanningInstance`] -> [`ilp::build_model`] -> [`solver::solve`]
//! -> [`DeploymentPlan`] -> [`cost::total_cost`] / [`render::render_map`].

pub mod case_study;
pub mod cost;
pub mod error;
pub mod ilp;
pub mod io;
pub mod model;
pub mod plan;
pub mod render;
pub mod scenario;
pub mod solver;

pub use cost::{CostReport, CostTable};
pub use error::{CostError, LoadError, ModelError, PlanError, ScenarioError, SolveError, ValidationError};
pub use ilp::IlpModel;
pub use model::{DistanceMatrix, ModelParams, PlanningInstance, Site, SiteKind, SplitRatio};
pub use plan::DeploymentPlan;
