//! Scenario files.
//!
//! A scenario is a TOML document; every section is a struct with
//! `deny_unknown_fields`, so a misspelt key is an error rather than a silently
//! ignored default. The full key schema is listed in the README.

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// TOML integers are signed 64-bit.
pub const MAX_SEED: u64 = i64::MAX as u64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub cavity: CavitySection,
    pub inertia: InertiaSection,
    #[serde(default)]
    pub basis: BasisSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    #[serde(default = "one")]
    pub radius: f64,
    pub viscosity: f64,
}

/// Exactly one of the three keys must be present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaSection {
    /// Principal moments of the whole system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<[f64; 3]>,
    /// Symmetric inertia tensor; diagonalised before use.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[f64; 3]; 3]>,
    /// Principal moments of the rigid shell alone; the fluid's own inertia is
    /// added.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excess: Option<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub l_max: usize,
    pub n_max: usize,
    /// Directory of the operator cache; no caching if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

impl Default for BasisSection {
    fn default() -> Self {
        Self {
            l_max: 2,
            n_max: 2,
            cache_dir: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisChoice {
    Min,
    Mid,
    Max,
}

impl AxisChoice {
    pub fn all() -> [AxisChoice; 3] {
        [AxisChoice::Min, AxisChoice::Mid, AxisChoice::Max]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AxisChoice::Min => "min",
            AxisChoice::Mid => "mid",
            AxisChoice::Max => "max",
        }
    }

    /// Index into the ascending moment order.
    pub fn slot(&self) -> usize {
        match self {
            AxisChoice::Min => 0,
            AxisChoice::Mid => 1,
            AxisChoice::Max => 2,
        }
    }
}

/// Initial state: a permanent rotation (`equilibrium`, the largest-moment
/// family unless `a0` is given) or an explicit angular velocity `a0`, plus an optional fluid part.
///
/// The fluid part is, in order of precedence: explicit `c0`; random with
/// fluid energy `½cᵀ(M − Rᵀ𝕀⁻¹R)c = fluid_energy`; random with
/// `‖c‖_M = amplitude`. Random draws need a seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<AxisChoice>,
    /// `|𝕀a*|` of the permanent rotation.
    #[serde(default = "one")]
    pub momentum: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<Vec<f64>>,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fluid_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            equilibrium: Some(AxisChoice::Max),
            momentum: 1.0,
            a0: None,
            c0: None,
            amplitude: 0.0,
            fluid_energy: None,
            seed: None,
        }
    }
}

impl InitialSection {
    pub fn needs_seed(&self) -> bool {
        self.c0.is_none() && (self.fluid_energy.is_some() || self.amplitude > 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeChoice {
    Imex,
    ImexAdaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,
    #[serde(default = "default_guard")]
    pub blowup_guard: f64,
    /// Trailing window of the exponential fits; half the horizon if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<f64>,
    /// Samples below `fit_floor` times the series maximum are excluded from
    /// the fits (round-off floor).
    #[serde(default = "default_fit_floor")]
    pub fit_floor: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            horizon: default_horizon(),
            scheme: default_scheme(),
            dt: None,
            rtol: default_rtol(),
            sample_every: None,
            blowup_guard: default_guard(),
            fit_window: None,
            fit_floor: default_fit_floor(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default = "all_axes")]
    pub axes: Vec<AxisChoice>,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { axes: all_axes() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_format")]
    pub format: Format,
    #[serde(default = "yes")]
    pub trajectory: bool,
    /// Binary dump of the modal coefficients at every sample.
    #[serde(default)]
    pub modal_dump: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            format: default_format(),
            trajectory: true,
            modal_dump: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SweepSection {
    /// `𝕀(μ) = diag[μ1, μ, μ3]` with `μ1, μ3` from `[inertia]`, `a* ∥ e3`,
    /// `μ` on an odd grid centred at `μ3`.
    MuCrossing {
        half_width: f64,
        points: usize,
    },
    /// Random admissible inertia tensors `J_fluid + diag(excess)`.
    InertiaPanel {
        samples: usize,
        excess_min: f64,
        excess_max: f64,
        #[serde(default)]
        spectra: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Spectra at the three axes for each `(l_max, n_max)`.
    Refinement { resolutions: Vec<[usize; 2]> },
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn default_horizon() -> f64 {
    100.0
}

fn default_scheme() -> SchemeChoice {
    SchemeChoice::Imex
}

fn default_rtol() -> f64 {
    spinfluid_core::dynamics::DEFAULT_RTOL
}

fn default_guard() -> f64 {
    spinfluid_core::dynamics::DEFAULT_BLOWUP_GUARD
}

fn default_fit_floor() -> f64 {
    1e-10
}

fn default_format() -> Format {
    Format::Csv
}

fn all_axes() -> Vec<AxisChoice> {
    AxisChoice::all().to_vec()
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let mut scenario: Scenario =
            toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        if scenario.initial.equilibrium.is_none() && scenario.initial.a0.is_none() {
            scenario.initial.equilibrium = Some(AxisChoice::Max);
        }
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario types always serialise")
    }

    /// SHA-256 of the canonical serialisation.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.cavity.radius) || !positive(self.cavity.viscosity) {
            return bad("cavity radius and viscosity must be positive".into());
        }
        let given = [
            self.inertia.moments.is_some(),
            self.inertia.matrix.is_some(),
            self.inertia.excess.is_some(),
        ]
        .iter()
        .filter(|x| **x)
        .count();
        if given != 1 {
            return bad("[inertia] needs exactly one of `moments`, `matrix`, `excess`".into());
        }
        if self.basis.l_max == 0 {
            return bad("basis.l_max must be at least 1".into());
        }
        let init = &self.initial;
        if init.equilibrium.is_some() == init.a0.is_some() {
            return bad("[initial] needs exactly one of `equilibrium`, `a0`".into());
        }
        if !(init.momentum.is_finite() && init.momentum >= 0.0) {
            return bad("initial.momentum must be non-negative".into());
        }
        if !(init.amplitude.is_finite() && init.amplitude >= 0.0) {
            return bad("initial.amplitude must be non-negative".into());
        }
        if init.seed.is_some_and(|seed| seed > MAX_SEED) {
            return bad(format!("initial.seed must be at most {MAX_SEED}"));
        }
        if let Some(e) = init.fluid_energy {
            if !(e.is_finite() && e >= 0.0) {
                return bad("initial.fluid_energy must be non-negative".into());
            }
        }
        let int = &self.integrator;
        if !positive(int.horizon) {
            return bad("integrator.horizon must be positive".into());
        }
        if int.dt.is_some_and(|dt| !positive(dt)) {
            return bad("integrator.dt must be positive".into());
        }
        if !positive(int.rtol) || !positive(int.blowup_guard) {
            return bad("integrator.rtol and blowup_guard must be positive".into());
        }
        if int.sample_every == Some(0) {
            return bad("integrator.sample_every must be at least 1".into());
        }
        if int.fit_window.is_some_and(|w| !positive(w)) || !(int.fit_floor >= 0.0) {
            return bad("integrator.fit_window must be positive, fit_floor non-negative".into());
        }
        if self.spectrum.axes.is_empty() {
            return bad("spectrum.axes must not be empty".into());
        }
        match &self.sweep {
            Some(SweepSection::MuCrossing { half_width, points }) => {
                if !positive(*half_width) || *points < 3 || points % 2 == 0 {
                    return bad("mu-crossing needs half_width > 0 and an odd number of points ≥ 3".into());
                }
                if self.inertia.moments.is_none() && self.inertia.excess.is_none() {
                    return bad("mu-crossing needs diagonal inertia (`moments` or `excess`)".into());
                }
            }
            Some(SweepSection::InertiaPanel {
                samples,
                excess_min,
                excess_max,
                seed,
                ..
            }) => {
                if seed.is_some_and(|seed| seed > MAX_SEED) {
                    return bad(format!("sweep.seed must be at most {MAX_SEED}"));
                }
                if *samples == 0 || !(*excess_min >= 0.0 && excess_max > excess_min && excess_max.is_finite()) {
                    return bad("inertia-panel needs samples ≥ 1 and 0 ≤ excess_min < excess_max".into());
                }
            }
            Some(SweepSection::Refinement { resolutions })
                if resolutions.is_empty() || resolutions.iter().any(|r| r[0] == 0) =>
            {
                return bad("refinement needs resolutions with l_max ≥ 1".into());
            }
            Some(SweepSection::Refinement { .. }) | None => {}
        }
        Ok(())
    }
}
