use thiserror::Error;

use crate::ilp::Violation;

/// Failures while turning a document into a [`crate::PlanningInstance`].
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Every failed invariant check, collected rather than stopping at the first.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("validation failed: {}", .errors.join("; "))]
pub struct ValidationError {
    pub errors: Vec<String>,
}

#[derive(Debug, Error)]
pub enum CostError {
    #[error("configuration error: no splitter cost configured for ratio {0}")]
    UnknownRatio(crate::SplitRatio),
    #[error("plan rejected: {} constraint violation(s), first: {}", .0.len(), .0.first().map(|v| v.row.as_str()).unwrap_or("-"))]
    Infeasible(Vec<Violation>),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model too large: {variables} variables and {constraints} constraints exceed the budget of {budget} variables")]
    TooLarge {
        variables: usize,
        constraints: usize,
        budget: usize,
    },
    #[error("no variables")]
    NoVariables,
    #[error(transparent)]
    Cost(Box<CostError>),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

/// A plan that cannot even be mapped onto the model's variables.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("unknown {kind} id '{id}'")]
    UnknownSite { kind: &'static str, id: String },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("unsupported model structure: {0}")]
    Unsupported(String),
    #[error("brute force refused: about {estimate:.3e} configurations exceed the guard of {guard}")]
    SizeGuard { estimate: f64, guard: u64 },
    #[error("invalid solve options: {0}")]
    Options(String),
    #[error("inconsistent partial assignment: {0}")]
    Partial(String),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("incomplete report: {0}")]
    Incomplete(String),
}
