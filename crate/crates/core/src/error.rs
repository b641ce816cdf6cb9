use thiserror::Error;

use crate::lattice::SiteCoord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("window too small: {site} must lie inside the window ({context})")]
    WindowTooSmall { site: SiteCoord, context: String },

    #[error("cell is not certified: its closure touches the window edge")]
    UncertifiedCell,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("horizon {0} exceeds the critical time ln 2")]
    BeyondCriticalTime(f64),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
