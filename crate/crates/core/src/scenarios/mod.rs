//! Runnable experiment descriptions: each scenario kind is a TOML file plus
//! a driver that turns it into simulator runs and a serializable report.

pub mod compare;
pub mod controller;
pub mod corpus;
pub mod estimate;
pub mod maneuver;
pub mod simulate;

use crate::error::{GliderError, Result};

/// All scenario files carry this version; bump on breaking layout changes.
pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

pub(crate) fn from_toml<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| GliderError::Parse {
        file: origin.into(),
        row: 0,
        msg: e.to_string(),
    })
}

pub(crate) fn check_version(found: u32) -> Result<()> {
    if found != SCENARIO_SCHEMA_VERSION {
        return Err(GliderError::one_problem(format!(
            "scenario schema_version {found} unsupported, expected {SCENARIO_SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

pub use compare::{run_compare, CellOutcome, CompareReport, CompareScenario};
pub use controller::ControllerSection;
pub use corpus::{generate_corpus, CorpusRun, CorpusSpec};
pub use estimate::{
    default_prior, run_estimation, EstimateScenario, EstimationOutcome, McmcSection,
    PriorSection, RunPaths, SourceSection,
};
pub use maneuver::{run_maneuver, Leg, LegOutcome, ManeuverReport, ManeuverScenario, PhaseSummary};
pub use simulate::{run_simulate, ChannelReport, InitialSection, SimulateReport, SimulateScenario};
