//! Experiment configuration: TOML in, validated model objects out.

use std::path::{Path, PathBuf};

use qbath::bath::{Bath, BathSpec, Preset, PresetParams, SystemSpec, ThermalParams};
use qbath::measurement::{ChannelMode, PatternEntry, ScheduleSpec, SlotPlan};
use qbath::operator::Operator;
use qbath::reconstruction::{build_config_set, ConfigSet, SlotBasis};
use qbath::spin::Axis;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub shots: usize,
    #[serde(default)]
    pub channel_mode: ChannelMode,
    /// Output directory; `--out` overrides it.
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub bath: BathConfig,
    /// Defaults to the preset's own coupling, or pure dephasing for custom baths.
    #[serde(default)]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub thermal: Option<ThermalParams>,
    #[serde(default)]
    pub correlations: Option<CorrelationsConfig>,
    #[serde(default)]
    pub protocol: Option<ProtocolConfig>,
    #[serde(default)]
    pub validate: Option<ValidateConfig>,
}

fn default_out() -> PathBuf {
    PathBuf::from("qbath-out")
}

/// Either a named preset with its parameters or an explicit spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub g: Option<f64>,
    #[serde(default)]
    pub j: Option<f64>,
    #[serde(default)]
    pub spec: Option<BathSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationsConfig {
    pub max_order: usize,
    pub times: Vec<f64>,
    #[serde(default = "default_axes")]
    pub axes: Vec<Axis>,
}

fn default_axes() -> Vec<Axis> {
    vec![Axis::Z]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProtocolConfig {
    /// One short sequence per shot at `times`, one basis per slot.
    Unit {
        times: Vec<f64>,
        delta_t: f64,
        bases: Vec<SlotBasis>,
    },
    /// Slots at `kτ`; `mask` marks used positions of the repeating window
    /// and `bases` gives one basis per used position.
    Streaming {
        tau: f64,
        delta_t: f64,
        num_slots: usize,
        mask: Vec<bool>,
        bases: Vec<SlotBasis>,
        #[serde(default)]
        idle: IdleAxes,
    },
}

/// Preparation and readout of idle streaming slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdleAxes {
    pub prep: [f64; 3],
    pub measure: [f64; 3],
}

impl Default for IdleAxes {
    fn default() -> Self {
        IdleAxes {
            prep: Axis::X.unit(),
            measure: Axis::Y.unit(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub truncation: usize,
    #[serde(default = "default_bloch")]
    pub initial_bloch: [f64; 3],
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_bloch() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

fn default_tolerance() -> f64 {
    1e-6
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form, after command-line overrides.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// A validated configuration with its model objects built.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub bath: Bath,
    pub system: SystemSpec,
    pub rho_b: Operator,
    pub protocol: Option<ResolvedProtocol>,
}

/// The reconstruction set plus one slot plan per variant.
pub struct ResolvedProtocol {
    pub set: ConfigSet,
    pub plans: Vec<SlotPlan>,
    /// Positions of the used slots inside each plan (or window).
    pub subset: Vec<usize>,
}

fn check_sorted(name: &str, times: &[f64]) -> CliResult<()> {
    if times.is_empty() {
        return Err(CliError::Config(format!("{name} is empty")));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CliError::Config(format!(
            "{name} must be strictly increasing, got {times:?}"
        )));
    }
    Ok(())
}

impl Experiment {
    pub fn prepare(config: ExperimentConfig) -> CliResult<Self> {
        let (bath, default_system) = resolve_bath(&config.bath)?;
        let system = config.system.clone().unwrap_or(default_system);
        let thermal = config
            .thermal
            .unwrap_or_else(ThermalParams::infinite_temperature);
        if !(thermal.beta >= 0.0) || !thermal.beta.is_finite() {
            return Err(CliError::Config(format!(
                "thermal.beta = {} must be finite and non-negative",
                thermal.beta
            )));
        }
        let rho_b = bath.thermal_state(thermal)?;

        if let Some(c) = &config.correlations {
            check_sorted("correlations.times", &c.times)?;
            if c.max_order == 0 || c.max_order > c.times.len() {
                return Err(CliError::Config(format!(
                    "correlations.max_order = {} must be between 1 and the number of times ({})",
                    c.max_order,
                    c.times.len()
                )));
            }
            if c.axes.is_empty() {
                return Err(CliError::Config("correlations.axes is empty".into()));
            }
        }
        if let Some(v) = &config.validate {
            if v.truncation < 2 || v.truncation % 2 == 1 {
                return Err(CliError::Config(format!(
                    "validate.truncation must be an even integer >= 2, got {}",
                    v.truncation
                )));
            }
            if !(v.tolerance > 0.0) {
                return Err(CliError::Config(format!(
                    "validate.tolerance = {} must be positive",
                    v.tolerance
                )));
            }
            let r = v.initial_bloch;
            if (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt() > 1.0 + 1e-12 {
                return Err(CliError::Config(format!(
                    "validate.initial_bloch {r:?} lies outside the Bloch ball"
                )));
            }
        }
        let protocol = config.protocol.as_ref().map(resolve_protocol).transpose()?;
        Ok(Experiment {
            config,
            bath,
            system,
            rho_b,
            protocol,
        })
    }
}

fn resolve_bath(c: &BathConfig) -> CliResult<(Bath, SystemSpec)> {
    match (c.preset, &c.spec) {
        (Some(preset), None) => {
            let defaults = PresetParams::default();
            let params = PresetParams {
                omega: c.omega.unwrap_or(defaults.omega),
                g: c.g.unwrap_or(defaults.g),
                j: c.j.unwrap_or(defaults.j),
            };
            Ok((Bath::build(&preset.spec(params))?, preset.system()))
        }
        (None, Some(spec)) => {
            if c.omega.is_some() || c.g.is_some() || c.j.is_some() {
                return Err(CliError::Config(
                    "bath.omega, bath.g and bath.j apply to presets only".into(),
                ));
            }
            Ok((Bath::build(spec)?, SystemSpec::pure_dephasing()))
        }
        _ => Err(CliError::Config(
            "bath needs exactly one of `preset` or `spec`".into(),
        )),
    }
}

fn resolve_protocol(p: &ProtocolConfig) -> CliResult<ResolvedProtocol> {
    match p {
        ProtocolConfig::Unit {
            times,
            delta_t,
            bases,
        } => {
            check_sorted("protocol.times", times)?;
            if bases.len() != times.len() {
                return Err(CliError::Config(format!(
                    "protocol.bases has {} entries for {} times",
                    bases.len(),
                    times.len()
                )));
            }
            let set = build_config_set(times, *delta_t, bases)?;
            let plans = set
                .variants()
                .iter()
                .map(|v| SlotPlan::unit(v.configs.clone()))
                .collect::<qbath::Result<Vec<_>>>()?;
            Ok(ResolvedProtocol {
                set,
                plans,
                subset: (0..times.len()).collect(),
            })
        }
        ProtocolConfig::Streaming {
            tau,
            delta_t,
            num_slots,
            mask,
            bases,
            idle,
        } => {
            if *tau < *delta_t {
                return Err(CliError::Config(format!(
                    "protocol.tau = {tau} is shorter than protocol.delta_t = {delta_t}"
                )));
            }
            let r = idle.prep;
            let m = idle.measure;
            let rm = r[0] * m[0] + r[1] * m[1] + r[2] * m[2];
            if rm.abs() > 1e-9 {
                return Err(CliError::Config(format!(
                    "protocol.idle axes violate r·m = 0 (r·m = {rm:.3e})"
                )));
            }
            let subset: Vec<usize> = (0..mask.len()).filter(|&k| mask[k]).collect();
            if bases.len() != subset.len() {
                return Err(CliError::Config(format!(
                    "protocol.bases has {} entries for {} used slots in protocol.mask",
                    bases.len(),
                    subset.len()
                )));
            }
            if subset.is_empty() {
                return Err(CliError::Config("protocol.mask has no used slot".into()));
            }
            let times: Vec<f64> = subset.iter().map(|&k| (k + 1) as f64 * tau).collect();
            let set = build_config_set(&times, *delta_t, bases)?;
            let plans = set
                .variants()
                .iter()
                .map(|v| {
                    let mut used = v.configs.iter();
                    let pattern = mask
                        .iter()
                        .map(|&on| match on {
                            true => {
                                let c = used.next().expect("one basis per used slot");
                                PatternEntry {
                                    prep: c.prep(),
                                    measure: c.measure(),
                                    used: true,
                                }
                            }
                            false => PatternEntry {
                                prep: idle.prep,
                                measure: idle.measure,
                                used: false,
                            },
                        })
                        .collect();
                    SlotPlan::streaming(&ScheduleSpec {
                        tau: *tau,
                        delta_t: *delta_t,
                        num_slots: *num_slots,
                        pattern,
                    })
                })
                .collect::<qbath::Result<Vec<_>>>()?;
            Ok(ResolvedProtocol { set, plans, subset })
        }
    }
}
