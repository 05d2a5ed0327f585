//! Versioned TOML scenario configuration.
//!
//! Angles are radians, lengths metres (demonstrator) or drive units (trimer),
//! energies angular frequencies in rad/s, times seconds, complex numbers
//! `[re, im]` pairs.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use shapeholo_core::demonstrator::PlatformParams;
use shapeholo_core::trimer::{BondDrive, REFERENCE_MASSES};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    GateSynth,
    TraceSweep,
    TrimerSim,
    PhaseSweep,
    Linking,
    DemoBudget,
    Ramsey,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::GateSynth => "gate-synth",
            Scenario::TraceSweep => "trace-sweep",
            Scenario::TrimerSim => "trimer-sim",
            Scenario::PhaseSweep => "phase-sweep",
            Scenario::Linking => "linking",
            Scenario::DemoBudget => "demo-budget",
            Scenario::Ramsey => "ramsey",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema: u32,
    scenario: Scenario,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    params: toml::Table,
}

/// A parsed configuration file.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub params: ScenarioParams,
    /// Directory of the config file; relative paths resolve against it.
    pub base_dir: PathBuf,
    /// Raw file contents, echoed into the manifest.
    pub source: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ScenarioParams {
    GateSynth(GateSynthParams),
    TraceSweep(TraceSweepParams),
    TrimerSim(TrimerParams),
    PhaseSweep(PhaseSweepParams),
    Linking(LinkingParams),
    DemoBudget(DemoParams),
    Ramsey(RamseyParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateTarget {
    Pi2,
    Hadamard,
    Cnot,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateSynthParams {
    pub q: f64,
    pub target: GateTarget,
    pub steps: usize,
    pub repetitions: Option<u32>,
    pub calibrate: bool,
    /// Chern–Simons level for `cnot`; `4q²` when absent.
    pub level: Option<u32>,
}

impl Default for GateSynthParams {
    fn default() -> Self {
        Self {
            q: 100.0,
            target: GateTarget::Pi2,
            steps: 4096,
            repetitions: None,
            calibrate: true,
            level: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSweepParams {
    pub q: f64,
    pub theta0: f64,
    pub phi0: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub count: usize,
    pub steps: usize,
    pub psi: [f64; 2],
    /// Number of seeded random gauge rotations checked on the first loop.
    pub gauge_checks: usize,
}

impl Default for TraceSweepParams {
    fn default() -> Self {
        Self {
            q: 1.0,
            theta0: FRAC_PI_2,
            phi0: 0.0,
            a_min: 0.05,
            a_max: 0.5,
            count: 10,
            steps: 4096,
            psi: [0.0, 0.0],
            gauge_checks: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveParams {
    pub d12: f64,
    pub a12: f64,
    pub omega12: f64,
    pub d: f64,
    pub a: f64,
    pub omega: f64,
    pub phi13: f64,
    pub phi23: f64,
    pub masses: [f64; 3],
}

impl Default for DriveParams {
    fn default() -> Self {
        let f = BondDrive::reference(FRAC_PI_4, -FRAC_PI_4);
        Self {
            d12: f.d12,
            a12: f.a12,
            omega12: f.omega12,
            d: f.d,
            a: f.a,
            omega: f.omega,
            phi13: f.phi13,
            phi23: f.phi23,
            masses: REFERENCE_MASSES,
        }
    }
}

impl DriveParams {
    pub fn drive(&self) -> BondDrive {
        BondDrive {
            d12: self.d12,
            a12: self.a12,
            omega12: self.omega12,
            d: self.d,
            a: self.a,
            omega: self.omega,
            phi13: self.phi13,
            phi23: self.phi23,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrimerParams {
    #[serde(flatten)]
    pub drive: DriveParams,
    pub periods: usize,
    pub steps_per_period: usize,
    /// Samples between successive `L_eff` windows.
    pub l_eff_stride: usize,
}

impl Default for TrimerParams {
    fn default() -> Self {
        Self {
            drive: DriveParams::default(),
            periods: 20,
            steps_per_period: 256,
            l_eff_stride: 32,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSweepParams {
    #[serde(flatten)]
    pub drive: DriveParams,
    pub points: usize,
    pub periods: usize,
    pub steps_per_period: usize,
}

impl Default for PhaseSweepParams {
    fn default() -> Self {
        Self {
            drive: DriveParams::default(),
            points: 41,
            periods: 2,
            steps_per_period: 128,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkingParams {
    /// CSV files with `x,y,z` columns; the Hopf pair is used when empty.
    pub curves: Vec<PathBuf>,
    pub hopf_radius: f64,
    pub samples: usize,
    /// Charge per curve; `q` for every curve when empty.
    pub charges: Vec<f64>,
    pub q: f64,
    /// `4q²` when absent.
    pub level: Option<u32>,
    /// Declared self-linking per curve; zero when empty.
    pub slk: Vec<i64>,
}

impl Default for LinkingParams {
    fn default() -> Self {
        Self {
            curves: Vec::new(),
            hopf_radius: 1.0,
            samples: 512,
            charges: Vec::new(),
            q: 1.0,
            level: None,
            slk: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoParams {
    #[serde(flatten)]
    pub platform: PlatformParams,
    pub window_factor: f64,
    pub samples: usize,
}

impl Default for DemoParams {
    fn default() -> Self {
        Self {
            platform: PlatformParams::default(),
            window_factor: shapeholo_core::demonstrator::WINDOW_FACTOR,
            samples: 1024,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RamseyParams {
    #[serde(flatten)]
    pub platform: PlatformParams,
    /// Residual splitting (rad/s); the platform splitting when absent.
    pub delta_e: Option<f64>,
    pub window_factor: f64,
}

impl Default for RamseyParams {
    fn default() -> Self {
        Self {
            platform: PlatformParams::default(),
            delta_e: None,
            window_factor: shapeholo_core::demonstrator::WINDOW_FACTOR,
        }
    }
}

fn typed<T: DeserializeOwned>(table: toml::Table) -> CliResult<T> {
    table
        .try_into()
        .map_err(|e: toml::de::Error| CliError::validation(format!("invalid params: {}", e.message())))
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&source, base_dir)
    }

    pub fn parse(source: &str, base_dir: PathBuf) -> CliResult<Self> {
        let raw: RawConfig =
            toml::from_str(source).map_err(|e| CliError::validation(format!("malformed config: {}", e.message())))?;
        if raw.schema != SCHEMA_VERSION {
            return Err(CliError::validation(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                raw.schema
            )));
        }
        let params = match raw.scenario {
            Scenario::GateSynth => ScenarioParams::GateSynth(typed(raw.params)?),
            Scenario::TraceSweep => ScenarioParams::TraceSweep(typed(raw.params)?),
            Scenario::TrimerSim => ScenarioParams::TrimerSim(typed(raw.params)?),
            Scenario::PhaseSweep => ScenarioParams::PhaseSweep(typed(raw.params)?),
            Scenario::Linking => ScenarioParams::Linking(typed(raw.params)?),
            Scenario::DemoBudget => ScenarioParams::DemoBudget(typed(raw.params)?),
            Scenario::Ramsey => ScenarioParams::Ramsey(typed(raw.params)?),
        };
        Ok(Self {
            scenario: raw.scenario,
            seed: raw.seed.unwrap_or(0),
            output: raw.output,
            params,
            base_dir,
            source: source.to_string(),
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_gate_config() {
        let c = ScenarioConfig::parse("schema = 1\nscenario = \"gate-synth\"\n[params]\nq = 50.0\n", PathBuf::new())
            .unwrap();
        match c.params {
            ScenarioParams::GateSynth(p) => {
                assert_eq!(p.q, 50.0);
                assert_eq!(p.target, GateTarget::Pi2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        assert!(ScenarioConfig::parse("schema = 1\nscenario = \"ramsey\"\n[params]\nbogus = 1\n", PathBuf::new()).is_err());
        assert!(ScenarioConfig::parse("schema = 2\nscenario = \"ramsey\"\n", PathBuf::new()).is_err());
        assert!(ScenarioConfig::parse("scenario = \"nope\"\nschema = 1\n", PathBuf::new()).is_err());
    }

    #[test]
    fn flattened_platform_fields() {
        let c = ScenarioConfig::parse(
            "schema = 1\nscenario = \"demo-budget\"\n[params]\nepsilon = 0.1\nn_rep = 3\nwindow_factor = 5.0\n",
            PathBuf::new(),
        )
        .unwrap();
        match c.params {
            ScenarioParams::DemoBudget(p) => {
                assert_eq!(p.platform.epsilon, 0.1);
                assert_eq!(p.platform.n_rep, 3);
                assert_eq!(p.window_factor, 5.0);
                assert_eq!(p.platform.t_loop, 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }
}
