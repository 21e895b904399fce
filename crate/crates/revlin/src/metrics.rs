//! Machine-readable run reports emitted by the command-line tool.
//!
//! Everything in a document is deterministic for fixed inputs and
//! flags except the `excluded` block, which carries wall-clock timing
//! and is dropped by consumers that compare runs.

use serde::{Deserialize, Serialize};

use crate::arena::ResourceReport;
use crate::baselines::TraceReport;

/// Problem dimensions; only the fields that apply to the command are
/// present.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Dims {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d: Option<usize>,
}

/// Fields outside the comparable payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Excluded {
    pub wall_time_ms: u128,
}

/// One run's report: what ran, at what size, what it cost, and what
/// it produced. `oracle` is present when an irreversible comparison
/// was requested, `verified_roundtrip` when a round-trip check ran.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub command: String,
    pub dims: Dims,
    pub resource: ResourceReport,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle: Option<TraceReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verified_roundtrip: Option<bool>,
    pub outputs: Vec<String>,
    pub excluded: Excluded,
}
