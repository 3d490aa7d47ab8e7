use thiserror::Error;

use crate::znt::FitGeometry;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{function}: argument {value} outside the domain ({expected})")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    #[error("adiabatic gap vanishes at t = {t}")]
    Singularity { t: f64 },

    #[error("span refinement did not converge: |ΔP| = {last_change:e} after {refinements} refinements (T = {span})")]
    NonConvergence {
        refinements: u32,
        span: f64,
        last_change: f64,
    },

    #[error("step controller cannot meet tolerances at t = {t} (h = {step:e})")]
    ToleranceFailure { t: f64, step: f64 },

    #[error("residue limit diverges near t_c = {re} + {im}i; zero is not simple")]
    NonSimpleZero { re: f64, im: f64 },

    #[error("tunneling formula breaks down: Im U1 radicand = {radicand}")]
    BranchFailure { radicand: f64 },

    #[error("degenerate fit geometry (t_b = {}, t_t = {}, t_0 = {}, d² = {})", .0.t_b, .0.t_t, .0.t_0, .0.d_sq)]
    DegenerateGeometry(FitGeometry),

    #[error("extremum of {curve} not bracketed inside [{lo}, {hi}]")]
    Bracketing {
        curve: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("comparison requires the {0} column")]
    MissingColumn(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short variant name, used as a status token in tabular output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "Domain",
            Error::InvalidModel(_) => "InvalidModel",
            Error::InvalidSettings(_) => "InvalidSettings",
            Error::Singularity { .. } => "Singularity",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::ToleranceFailure { .. } => "ToleranceFailure",
            Error::NonSimpleZero { .. } => "NonSimpleZero",
            Error::BranchFailure { .. } => "BranchFailure",
            Error::DegenerateGeometry(_) => "DegenerateGeometry",
            Error::Bracketing { .. } => "Bracketing",
            Error::MissingColumn(_) => "MissingColumn",
            Error::Parse(_) => "Parse",
            Error::Csv(_) => "Csv",
            Error::Io(_) => "Io",
        }
    }

    pub(crate) fn domain(function: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            function,
            value,
            expected,
        }
    }
}
