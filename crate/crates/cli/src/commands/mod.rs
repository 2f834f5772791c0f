pub mod cache;
pub mod equilibria;
pub mod simulate;
pub mod spectrum;
pub mod sweep;

use crate::config::{Format, Scenario};
use crate::output::Header;
use std::path::PathBuf;

/// A loaded scenario with the command-line overrides applied.
#[derive(Clone, Debug)]
pub struct Run {
    pub scenario: Scenario,
    pub header: Header,
    pub out: PathBuf,
    pub format: Format,
}

impl Run {
    /// `seed` and `format` override the scenario; the header hashes the
    /// scenario after the overrides.
    pub fn new(mut scenario: Scenario, out: PathBuf, seed: Option<u64>, format: Option<Format>) -> Self {
        if let Some(seed) = seed {
            scenario.initial.seed = Some(seed);
        }
        if let Some(format) = format {
            scenario.output.format = format;
        }
        let header = Header::new(&scenario.hash());
        let format = scenario.output.format;
        Self {
            scenario,
            header,
            out,
            format,
        }
    }
}
