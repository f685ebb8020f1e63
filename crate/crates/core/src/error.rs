use std::fmt;
use std::path::PathBuf;

/// Pipeline stage at which a SAFE run failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Fit,
    Draw,
    Transform,
    Summarise,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Fit => "fit",
            Stage::Draw => "draw",
            Stage::Transform => "transform",
            Stage::Summarise => "summarise",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("covariance matrix is not positive semi-definite (leading minor {minor} of {dim})")]
    Decomposition { minor: usize, dim: usize },

    #[error("truncated draw infeasible: acceptance rate {acceptance:.3e} below 1/{max_attempt_factor}")]
    TruncationInfeasible {
        acceptance: f64,
        max_attempt_factor: f64,
    },

    #[error("design mismatch: {0}")]
    DesignMismatch(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("domain error: {quantity} must be {requirement} (got {value})")]
    Domain {
        quantity: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("excess rejection: only {valid} of {drawn} replicates valid")]
    ExcessRejection { valid: usize, drawn: usize },

    #[error("degenerate batch: {valid} valid replicates, need at least 2")]
    DegenerateBatch { valid: usize },

    #[error("{stage} stage failed: {source}")]
    AtStage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("column {0} not found")]
    MissingColumn(String),

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        Error::AtStage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with stage and row wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStage { source, .. } | Error::Row { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Error {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Non-fatal conditions attached to results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Warning {
    /// Fewer than 99% of replicates survived rejection.
    LowValidFraction,
    /// B below the recommended 100000.
    FewReplicates,
    /// A quartet model was built with n = 2 for some group.
    SmallSample,
    /// An observed zero (or full) cell forced a continuity-corrected drawing probability.
    CorrectedDrawProbability,
    /// Continuity correction other than 0.5 or 1.
    NonstandardCorrection,
    /// The observed plug-in estimate needed a continuity correction.
    CorrectedPlugIn,
}

impl Warning {
    pub fn code(self) -> &'static str {
        match self {
            Warning::LowValidFraction => "low_valid_fraction",
            Warning::FewReplicates => "few_replicates",
            Warning::SmallSample => "small_sample",
            Warning::CorrectedDrawProbability => "corrected_draw_probability",
            Warning::NonstandardCorrection => "nonstandard_correction",
            Warning::CorrectedPlugIn => "corrected_plug_in",
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

pub(crate) fn push_unique(list: &mut Vec<Warning>, w: Warning) {
    if !list.contains(&w) {
        list.push(w);
    }
}
