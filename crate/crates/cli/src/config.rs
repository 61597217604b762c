//! Run configuration in TOML.
//!
//! ```toml
//! preset = "paper-2cell"          # chain layout, or give [[cells]] instead
//! waveform = "paper-fsi"          # preset name, or a table (see below)
//!
//! [model]                         # dimensionless; or [dimensional], never both
//! a = 0.1                         # or a_mo / a_mi separately
//! z1 = 1.5
//! z_in = 0.25
//! z_out = 1.25
//!
//! [chain]
//! a_meh = 0.1                     # magnet coefficient used by the chain presets
//! conductance = 1e5
//! leak_height = 0.02
//! mobility = 10.0
//! reservoir_in = 0.0
//! reservoir_out = 0.0
//!
//! [numerics]
//! dt = 1e-4
//! cycles = 3
//! samples_per_cycle = 512
//! sweep_cap = 10000
//! ```
//!
//! Waveform tables carry a `kind`:
//!
//! * `{ kind = "preset", name = "square-500ms", p_max = 7.0, p_min = 1.0 }`
//! * `{ kind = "square", period = 1.0, p_high = 7.0, p_low = -1.0, ramp_fraction = 0.0 }`
//! * `{ kind = "knots", period = 1.0, points = [[0.0, 0.0], [0.5, 1.0]], interpolation = "linear" }`

use std::fmt;

use mehpp_core::model::{DEFAULT_Z1, DEFAULT_Z_IN, DEFAULT_Z_OUT};
use mehpp_core::pump::{
    DEFAULT_CONDUCTANCE, DEFAULT_LEAK_HEIGHT, DEFAULT_MEH_COEFFICIENT, DEFAULT_MOBILITY,
};
use mehpp_core::waveform::{DEFAULT_P_MAX, DEFAULT_P_MIN};
use mehpp_core::{
    make_square, nondimensionalize, CellSpec, ChainConfig, ChainPreset, DimensionalParams,
    Interpolation, MagnetoElasticParams, Preset, Waveform,
};
use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_CYCLES: u32 = 3;
pub const DEFAULT_SAMPLES_PER_CYCLE: usize = 512;
pub const DEFAULT_SWEEP_CAP: usize = 10_000;
pub const DEFAULT_PROFILE_SAMPLES: usize = 1001;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waveform: Option<WaveformSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensional: Option<DimensionalParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<CellBlock>>,
    #[serde(default)]
    pub chain: ChainBlock,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub analyze: AnalyzeBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_mo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_mi: Option<f64>,
    #[serde(default = "default_z1")]
    pub z1: f64,
    #[serde(default = "default_z_in")]
    pub z_in: f64,
    #[serde(default = "default_z_out")]
    pub z_out: f64,
}

impl Default for ModelBlock {
    fn default() -> Self {
        Self {
            a: Some(DEFAULT_MEH_COEFFICIENT),
            a_mo: None,
            a_mi: None,
            z1: DEFAULT_Z1,
            z_in: DEFAULT_Z_IN,
            z_out: DEFAULT_Z_OUT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_mo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_mi: Option<f64>,
    #[serde(default = "one")]
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainBlock {
    #[serde(default = "default_a_meh")]
    pub a_meh: f64,
    #[serde(default = "default_conductance")]
    pub conductance: f64,
    #[serde(default = "default_leak")]
    pub leak_height: f64,
    #[serde(default = "default_mobility")]
    pub mobility: f64,
    #[serde(default)]
    pub reservoir_in: f64,
    #[serde(default)]
    pub reservoir_out: f64,
}

impl Default for ChainBlock {
    fn default() -> Self {
        Self {
            a_meh: DEFAULT_MEH_COEFFICIENT,
            conductance: DEFAULT_CONDUCTANCE,
            leak_height: DEFAULT_LEAK_HEIGHT,
            mobility: DEFAULT_MOBILITY,
            reservoir_in: 0.0,
            reservoir_out: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Number of waveform periods simulated by `cycle` and `pump`.
    #[serde(default = "default_cycles")]
    pub cycles: u32,
    #[serde(default = "default_samples")]
    pub samples_per_cycle: usize,
    #[serde(default = "default_sweep_cap")]
    pub sweep_cap: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            cycles: DEFAULT_CYCLES,
            samples_per_cycle: DEFAULT_SAMPLES_PER_CYCLE,
            sweep_cap: DEFAULT_SWEEP_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeBlock {
    /// Symmetric coefficients to analyse; the model's own when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_values: Option<Vec<f64>>,
    /// Points per profile on `[z_in, z1 - 1e-3]`.
    #[serde(default = "default_profile_samples")]
    pub samples: usize,
}

impl Default for AnalyzeBlock {
    fn default() -> Self {
        Self {
            a_values: None,
            samples: DEFAULT_PROFILE_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_output_dir")]
    pub dir: String,
    #[serde(default)]
    pub svg: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            dir: DEFAULT_OUTPUT_DIR.to_string(),
            svg: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    NetVolumePerCycle,
    LoopArea,
    ACritMargin,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::NetVolumePerCycle => "net_volume_per_cycle",
            Metric::LoopArea => "loop_area",
            Metric::ACritMargin => "a_crit_margin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub metric: Metric,
    pub axes: Vec<Axis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

/// Sweepable parameter names.
pub const AXIS_NAMES: [&str; 12] = [
    "a",
    "a_mo",
    "a_mi",
    "z1",
    "z_in",
    "z_out",
    "a_meh",
    "conductance",
    "leak_height",
    "mobility",
    "p_max",
    "p_min",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum WaveformSpec {
    Named(String),
    Table(WaveformTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WaveformTable {
    Preset {
        name: String,
        #[serde(default = "default_p_max")]
        p_max: f64,
        #[serde(default = "default_p_min")]
        p_min: f64,
    },
    Square {
        #[serde(default = "one")]
        period: f64,
        #[serde(default = "default_p_max")]
        p_high: f64,
        #[serde(default = "default_p_low")]
        p_low: f64,
        #[serde(default)]
        ramp_fraction: f64,
    },
    Knots {
        period: f64,
        points: Vec<(f64, f64)>,
        #[serde(default)]
        interpolation: Interpolation,
    },
}

impl<'de> Deserialize<'de> for WaveformSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct SpecVisitor;

        impl<'de> Visitor<'de> for SpecVisitor {
            type Value = WaveformSpec;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a waveform preset name or a waveform table")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                Ok(WaveformSpec::Named(v.to_string()))
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                map: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                WaveformTable::deserialize(de::value::MapAccessDeserializer::new(map))
                    .map(WaveformSpec::Table)
            }
        }

        deserializer.deserialize_any(SpecVisitor)
    }
}

fn one() -> f64 {
    1.0
}
fn default_z1() -> f64 {
    DEFAULT_Z1
}
fn default_z_in() -> f64 {
    DEFAULT_Z_IN
}
fn default_z_out() -> f64 {
    DEFAULT_Z_OUT
}
fn default_a_meh() -> f64 {
    DEFAULT_MEH_COEFFICIENT
}
fn default_conductance() -> f64 {
    DEFAULT_CONDUCTANCE
}
fn default_leak() -> f64 {
    DEFAULT_LEAK_HEIGHT
}
fn default_mobility() -> f64 {
    DEFAULT_MOBILITY
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_cycles() -> u32 {
    DEFAULT_CYCLES
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES_PER_CYCLE
}
fn default_sweep_cap() -> usize {
    DEFAULT_SWEEP_CAP
}
fn default_profile_samples() -> usize {
    DEFAULT_PROFILE_SAMPLES
}
fn default_output_dir() -> String {
    DEFAULT_OUTPUT_DIR.to_string()
}
fn default_p_max() -> f64 {
    DEFAULT_P_MAX
}
fn default_p_min() -> f64 {
    DEFAULT_P_MIN
}
fn default_p_low() -> f64 {
    -DEFAULT_P_MIN
}

/// Parses and validates a config, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((0, 0));
        CliError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
}

/// Renders a config back to TOML. `parse_config` of the result reproduces it.
pub fn serialize_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config is always representable")
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

impl RunConfig {
    fn fill_defaults(&mut self) {
        if self.model.is_none() && self.dimensional.is_none() {
            self.model = Some(ModelBlock::default());
        }
        if self.preset.is_none() && self.cells.is_none() {
            self.preset = Some(ChainPreset::Paper2Cell.name().to_string());
        }
        if self.waveform.is_none() {
            self.waveform = Some(WaveformSpec::Named(Preset::PaperFsi.name().to_string()));
        }
    }

    /// Checks every invariant by resolving the config into model objects.
    pub fn validate(&self) -> Result<()> {
        match (&self.model, &self.dimensional) {
            (Some(_), Some(_)) => {
                return Err(CliError::invalid(
                    "model/dimensional",
                    "exactly one of [model] and [dimensional] may be given",
                ))
            }
            (None, None) => {
                return Err(CliError::invalid(
                    "model/dimensional",
                    "a parameter block is required",
                ))
            }
            _ => {}
        }
        if self.preset.is_some() && self.cells.is_some() {
            return Err(CliError::invalid(
                "preset/cells",
                "give either a chain preset or [[cells]], not both",
            ));
        }
        self.params()?;
        self.chain_config()?;
        self.waveform()?;
        let n = &self.numerics;
        if !(n.dt > 0.0 && n.dt.is_finite()) {
            return Err(CliError::invalid("numerics.dt", "must be positive"));
        }
        if n.cycles == 0 {
            return Err(CliError::invalid("numerics.cycles", "must be at least 1"));
        }
        if n.samples_per_cycle < 4 {
            return Err(CliError::invalid(
                "numerics.samples_per_cycle",
                "must be at least 4",
            ));
        }
        if let Some(values) = &self.analyze.a_values {
            if values.is_empty() || values.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
                return Err(CliError::invalid(
                    "analyze.a_values",
                    "need at least one non-negative value",
                ));
            }
        }
        if self.analyze.samples < 2 {
            return Err(CliError::invalid("analyze.samples", "must be at least 2"));
        }
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
        }
        Ok(())
    }

    /// Dimensionless membrane parameters.
    pub fn params(&self) -> Result<MagnetoElasticParams> {
        if let Some(d) = &self.dimensional {
            return Ok(nondimensionalize(d)?);
        }
        let m = self
            .model
            .as_ref()
            .ok_or_else(|| CliError::invalid("model", "missing parameter block"))?;
        let (a_mo, a_mi) = coefficients("model", m.a, m.a_mo, m.a_mi, DEFAULT_MEH_COEFFICIENT)?;
        Ok(MagnetoElasticParams::new(
            a_mo, a_mi, m.z1, m.z_in, m.z_out,
        )?)
    }

    pub fn chain_config(&self) -> Result<ChainConfig> {
        let base = self.params()?;
        let cells = match (&self.preset, &self.cells) {
            (Some(name), None) => {
                let preset = ChainPreset::from_name(name).ok_or_else(|| {
                    let known: Vec<_> = ChainPreset::ALL.iter().map(|p| p.name()).collect();
                    CliError::invalid(
                        "preset",
                        format!("unknown chain preset {name:?}; known: {}", known.join(", ")),
                    )
                })?;
                preset.cells(&base, self.chain.a_meh)
            }
            (None, Some(cells)) => cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let (a_mo, a_mi) =
                        coefficients(&format!("cells[{i}]"), c.a, c.a_mo, c.a_mi, 0.0)?;
                    Ok(CellSpec {
                        params: MagnetoElasticParams { a_mo, a_mi, ..base },
                        length: c.length,
                    })
                })
                .collect::<Result<_>>()?,
            _ => {
                return Err(CliError::invalid(
                    "preset/cells",
                    "give either a chain preset or [[cells]]",
                ))
            }
        };
        let cfg = ChainConfig {
            cells,
            conductance_coefficient: self.chain.conductance,
            leak_height: self.chain.leak_height,
            mobility: self.chain.mobility,
            reservoir_pressure_in: self.chain.reservoir_in,
            reservoir_pressure_out: self.chain.reservoir_out,
        };
        cfg.validate().map_err(|e| match CliError::from(e) {
            CliError::Invalid { field, reason } => {
                CliError::invalid(format!("chain: {field}"), reason)
            }
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn waveform(&self) -> Result<Waveform> {
        let spec = self
            .waveform
            .as_ref()
            .ok_or_else(|| CliError::invalid("waveform", "missing"))?;
        let named = |name: &str, p_max: f64, p_min: f64| {
            Preset::from_name(name)
                .map(|p| p.build(p_max, p_min))
                .ok_or_else(|| {
                    let known: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                    CliError::invalid(
                        "waveform",
                        format!(
                            "unknown waveform preset {name:?}; known: {}",
                            known.join(", ")
                        ),
                    )
                })
        };
        let w = match spec {
            WaveformSpec::Named(name) => named(name, DEFAULT_P_MAX, DEFAULT_P_MIN)?,
            WaveformSpec::Table(WaveformTable::Preset { name, p_max, p_min }) => {
                if !p_max.is_finite() || !p_min.is_finite() {
                    return Err(CliError::invalid(
                        "waveform",
                        "p_max and p_min must be finite",
                    ));
                }
                named(name, *p_max, *p_min)?
            }
            WaveformSpec::Table(WaveformTable::Square {
                period,
                p_high,
                p_low,
                ramp_fraction,
            }) => make_square(*period, *p_high, *p_low, *ramp_fraction)
                .map_err(|e| prefixed("waveform", e))?,
            WaveformSpec::Table(WaveformTable::Knots {
                period,
                points,
                interpolation,
            }) => Waveform::new(points.clone(), *period, *interpolation)
                .map_err(|e| prefixed("waveform", e))?,
        };
        Ok(w)
    }

    /// Simulated duration of `cycle` and `pump`: whole waveform periods.
    pub fn duration(&self) -> Result<f64> {
        Ok(self.numerics.cycles as f64 * self.waveform()?.period())
    }

    pub fn sweep_spec(&self) -> Result<&SweepSpec> {
        self.sweep
            .as_ref()
            .ok_or_else(|| CliError::invalid("sweep", "the sweep command needs a [sweep] block"))
    }

    /// Returns a copy with one named parameter replaced.
    pub fn with_override(&self, name: &str, value: f64) -> Result<RunConfig> {
        let mut c = self.clone();
        fn model_field<'a>(c: &'a mut RunConfig, name: &str) -> Result<&'a mut ModelBlock> {
            c.model.as_mut().ok_or_else(|| {
                CliError::invalid(format!("sweep axis {name}"), "needs a [model] block")
            })
        }
        match name {
            "a" => {
                let m = model_field(&mut c, name)?;
                m.a = Some(value);
                m.a_mo = None;
                m.a_mi = None;
            }
            "a_mo" | "a_mi" => {
                let m = model_field(&mut c, name)?;
                let (mo, mi) = coefficients("model", m.a, m.a_mo, m.a_mi, DEFAULT_MEH_COEFFICIENT)?;
                m.a = None;
                m.a_mo = Some(if name == "a_mo" { value } else { mo });
                m.a_mi = Some(if name == "a_mi" { value } else { mi });
            }
            "z1" => model_field(&mut c, name)?.z1 = value,
            "z_in" => model_field(&mut c, name)?.z_in = value,
            "z_out" => model_field(&mut c, name)?.z_out = value,
            "a_meh" => c.chain.a_meh = value,
            "conductance" => c.chain.conductance = value,
            "leak_height" => c.chain.leak_height = value,
            "mobility" => c.chain.mobility = value,
            "p_max" | "p_min" => {
                let spec = c
                    .waveform
                    .take()
                    .unwrap_or(WaveformSpec::Named(Preset::PaperFsi.name().into()));
                c.waveform = Some(match spec {
                    WaveformSpec::Named(name_) => {
                        let (p_max, p_min) = if name == "p_max" {
                            (value, DEFAULT_P_MIN)
                        } else {
                            (DEFAULT_P_MAX, value)
                        };
                        WaveformSpec::Table(WaveformTable::Preset {
                            name: name_,
                            p_max,
                            p_min,
                        })
                    }
                    WaveformSpec::Table(WaveformTable::Preset {
                        name: n,
                        p_max,
                        p_min,
                    }) => WaveformSpec::Table(if name == "p_max" {
                        WaveformTable::Preset {
                            name: n,
                            p_max: value,
                            p_min,
                        }
                    } else {
                        WaveformTable::Preset {
                            name: n,
                            p_max,
                            p_min: value,
                        }
                    }),
                    WaveformSpec::Table(WaveformTable::Square {
                        period,
                        p_high,
                        p_low,
                        ramp_fraction,
                    }) => WaveformSpec::Table(WaveformTable::Square {
                        period,
                        p_high: if name == "p_max" { value } else { p_high },
                        p_low: if name == "p_min" { -value } else { p_low },
                        ramp_fraction,
                    }),
                    WaveformSpec::Table(WaveformTable::Knots { .. }) => {
                        return Err(CliError::invalid(
                            format!("sweep axis {name}"),
                            "not available for knot waveforms",
                        ))
                    }
                });
            }
            other => {
                return Err(CliError::invalid(
                    "sweep.axes.name",
                    format!(
                        "unknown parameter {other:?}; known: {}",
                        AXIS_NAMES.join(", ")
                    ),
                ))
            }
        }
        Ok(c)
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(CliError::invalid(
                "sweep.axes",
                "at least one axis is required",
            ));
        }
        for (i, axis) in self.axes.iter().enumerate() {
            if !AXIS_NAMES.contains(&axis.name.as_str()) {
                return Err(CliError::invalid(
                    format!("sweep.axes[{i}].name"),
                    format!(
                        "unknown parameter {:?}; known: {}",
                        axis.name,
                        AXIS_NAMES.join(", ")
                    ),
                ));
            }
            if axis.values.len() < 2 {
                return Err(CliError::invalid(
                    format!("sweep.axes[{i}].values"),
                    "need at least two values",
                ));
            }
            if axis.values.iter().any(|v| !v.is_finite()) {
                return Err(CliError::invalid(
                    format!("sweep.axes[{i}].values"),
                    "values must be finite",
                ));
            }
        }
        Ok(())
    }

    /// Number of grid points in the cartesian product.
    pub fn grid_size(&self) -> usize {
        self.axes
            .iter()
            .map(|a| a.values.len())
            .fold(1usize, |n, k| n.saturating_mul(k))
    }
}

fn coefficients(
    block: &str,
    a: Option<f64>,
    a_mo: Option<f64>,
    a_mi: Option<f64>,
    default: f64,
) -> Result<(f64, f64)> {
    match (a, a_mo, a_mi) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(CliError::invalid(
            format!("{block}.a"),
            "give either a or a_mo/a_mi, not both",
        )),
        (Some(a), None, None) => Ok((a, a)),
        (None, mo, mi) if mo.is_some() || mi.is_some() => {
            Ok((mo.unwrap_or(0.0), mi.unwrap_or(0.0)))
        }
        _ => Ok((default, default)),
    }
}

fn prefixed(block: &str, e: mehpp_core::Error) -> CliError {
    match CliError::from(e) {
        CliError::Invalid { field, reason } => {
            CliError::invalid(format!("{block}.{field}"), reason)
        }
        other => other,
    }
}
