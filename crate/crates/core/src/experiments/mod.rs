//! Transport protocols and the parameter-sweep engine.

mod protocols;
mod sweep;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::results::{SweepGrid, TimeTrace};
use crate::spin::{Direction, SystemConfig, BULK_HYPERFINE};

pub use protocols::{
    esr_window_current, loaded_state, readout_nuclear_state, run_cluster, run_psb_esr,
    run_readout_protocol, run_spin_funnel, run_stark_sweep, transport_then_esr, ReadoutResult,
};
pub use sweep::{sweep, sweep_with, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    SpinFunnel,
    PsbEsr,
    Readout,
    StarkSweep,
    Cluster,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 5] = [
        ExperimentId::SpinFunnel,
        ExperimentId::PsbEsr,
        ExperimentId::Readout,
        ExperimentId::StarkSweep,
        ExperimentId::Cluster,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::SpinFunnel => "spin_funnel",
            ExperimentId::PsbEsr => "psb_esr",
            ExperimentId::Readout => "readout",
            ExperimentId::StarkSweep => "stark_sweep",
            ExperimentId::Cluster => "cluster",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentId::SpinFunnel => {
                "reverse-bias current minus the two-level dot reference over (detuning, B0)"
            }
            ExperimentId::PsbEsr => "forward transport into Pauli blockade, then ESR drive",
            ExperimentId::Readout => {
                "nuclear spin readout: NMR rotation on the left nucleus, then PSB + ESR"
            }
            ExperimentId::StarkSweep => "post-ESR current over (B0, hyperfine difference)",
            ExperimentId::Cluster => {
                "single donor next to a two-donor cluster, long transport then ESR"
            }
        }
    }

    /// Whether the experiment produces a 2-D grid rather than a time trace.
    pub fn is_sweep(self) -> bool {
        matches!(self, ExperimentId::SpinFunnel | ExperimentId::StarkSweep)
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                Error::Manifest(format!(
                    "unknown experiment '{s}', expected one of: {}",
                    ExperimentId::ALL.map(|i| i.as_str()).join(", ")
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// A sweep axis, in the axis' own unit (mT for fields, MHz otherwise).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl AxisSpec {
    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        AxisSpec {
            min,
            max,
            points,
            spacing: Spacing::Linear,
        }
    }

    pub fn log(min: f64, max: f64, points: usize) -> Self {
        AxisSpec {
            min,
            max,
            points,
            spacing: Spacing::Log,
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::invalid(name, "axis bounds must be finite"));
        }
        if self.points == 0 {
            return Err(Error::invalid(name, "axis needs at least one point"));
        }
        if self.points > 1 && self.max <= self.min {
            return Err(Error::invalid(name, "axis max must exceed min"));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(Error::invalid(name, "log-spaced axis needs min > 0"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                let f = k as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + f * (self.max - self.min),
                    Spacing::Log => self.min * (self.max / self.min).powf(f),
                }
            })
            .collect()
    }

    pub fn step(&self) -> f64 {
        if self.points < 2 {
            0.0
        } else {
            (self.max - self.min) / (self.points - 1) as f64
        }
    }
}

/// Stage timings in μs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    /// Transport without drive.
    pub transport: f64,
    /// ESR-driven transport.
    pub esr: f64,
    pub sample_step: f64,
    /// Fraction of the ESR stage, counted from its end, over which the
    /// steady current is averaged.
    pub readout_fraction: f64,
    /// Averaging window of the spin-funnel current.
    pub funnel_window: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Timing {
            transport: 50.0,
            esr: 50.0,
            sample_step: 0.01,
            readout_fraction: 0.2,
            funnel_window: 1.0,
        }
    }
}

impl Timing {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("transport", self.transport),
            ("esr", self.esr),
            ("sample_step", self.sample_step),
            ("funnel_window", self.funnel_window),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be > 0 μs, got {v}")));
            }
        }
        if !(self.readout_fraction > 0.0 && self.readout_fraction <= 1.0) {
            return Err(Error::invalid("readout_fraction", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// How the spin-funnel current is obtained at each grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunnelMode {
    /// Exact time average over `Timing::funnel_window` starting from the
    /// loaded (0,1) state with unpolarized nuclei.
    Window,
    /// Null-space steady state of the generator.
    SteadyState,
}

/// Nuclear part of the initial state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuclearInit {
    /// Maximally mixed over all configurations.
    Mixed,
    /// Every nucleus up.
    AllUp,
}

/// A fully resolved experiment recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub config: SystemConfig,
    pub timing: Timing,
    /// Sweep axes: (Δ in MHz, B₀ in mT) for the spin funnel and
    /// (B₀ in mT, δA_LR in MHz) for the Stark sweep.
    pub x_axis: Option<AxisSpec>,
    pub y_axis: Option<AxisSpec>,
    /// NMR rotation of the left nucleus about x, radians (readout only).
    pub theta: f64,
    pub nuclear_init: NuclearInit,
    pub funnel_mode: FunnelMode,
    /// ESR frequency in MHz; resolved from the spectrum when absent.
    pub drive_frequency: Option<f64>,
}

impl ExperimentSpec {
    /// Default recipe for each experiment.
    pub fn defaults(id: ExperimentId) -> Self {
        let a = BULK_HYPERFINE;
        let mut spec = ExperimentSpec {
            id,
            config: SystemConfig::default(),
            timing: Timing::default(),
            x_axis: None,
            y_axis: None,
            theta: 0.0,
            nuclear_init: NuclearInit::Mixed,
            funnel_mode: FunnelMode::Window,
            drive_frequency: None,
        };
        match id {
            ExperimentId::SpinFunnel => {
                spec.config.direction = Direction::Reverse;
                spec.config.tc = 2000.0;
                spec.config.b0 = 0.25;
                spec.x_axis = Some(AxisSpec::linear(0.0, 9800.0, 50));
                spec.y_axis = Some(AxisSpec::linear(10.0, 500.0, 50));
            }
            ExperimentId::PsbEsr => {}
            ExperimentId::Readout => {
                spec.theta = std::f64::consts::PI;
                spec.nuclear_init = NuclearInit::AllUp;
            }
            ExperimentId::StarkSweep => {
                spec.x_axis = Some(AxisSpec::linear(1.0, 1000.0, 20));
                spec.y_axis = Some(AxisSpec::linear(0.0, 20.0, 10));
            }
            ExperimentId::Cluster => {
                spec.config.b0 = 0.01;
                spec.config.a_right = vec![a, a];
                spec.timing.transport = 500.0;
                spec.timing.esr = 100.0;
            }
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.timing.validate()?;
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta", "must be finite"));
        }
        if let Some(f) = self.drive_frequency {
            if !f.is_finite() {
                return Err(Error::invalid("drive_frequency", "must be finite"));
            }
        }
        let needs = match self.id {
            ExperimentId::SpinFunnel => Direction::Reverse,
            _ => Direction::Forward,
        };
        if self.config.direction != needs {
            return Err(Error::invalid(
                "direction",
                format!("{} runs in {needs:?} direction", self.id),
            ));
        }
        if self.id.is_sweep() {
            let x = self
                .x_axis
                .as_ref()
                .ok_or_else(|| Error::invalid("x_axis", "sweep needs an x axis"))?;
            let y = self
                .y_axis
                .as_ref()
                .ok_or_else(|| Error::invalid("y_axis", "sweep needs a y axis"))?;
            x.validate("x_axis")?;
            y.validate("y_axis")?;
        }
        match self.id {
            ExperimentId::SpinFunnel => {
                let x = self.x_axis.as_ref().expect("checked");
                let y = self.y_axis.as_ref().expect("checked");
                if x.min < 0.0 {
                    return Err(Error::invalid("x_axis", "detuning grid must have Δ ≥ 0"));
                }
                if y.min < 0.0 {
                    return Err(Error::invalid("y_axis", "field grid must have B0 ≥ 0"));
                }
            }
            ExperimentId::StarkSweep => {
                if !self.config.is_single_donor_pair() {
                    return Err(Error::invalid(
                        "a_left",
                        "Stark sweep needs one donor per dot",
                    ));
                }
                let x = self.x_axis.as_ref().expect("checked");
                let y = self.y_axis.as_ref().expect("checked");
                if x.min < 0.0 {
                    return Err(Error::invalid("x_axis", "field grid must have B0 ≥ 0"));
                }
                if y.min < 0.0 || y.max > self.config.a_left[0] {
                    return Err(Error::invalid(
                        "y_axis",
                        format!(
                            "hyperfine difference must lie in [0, {}] MHz",
                            self.config.a_left[0]
                        ),
                    ));
                }
            }
            ExperimentId::Cluster => {
                if self.config.is_single_donor_pair() {
                    return Err(Error::invalid(
                        "a_right",
                        "cluster experiment needs two donors on one side",
                    ));
                }
            }
            ExperimentId::PsbEsr | ExperimentId::Readout => {}
        }
        Ok(())
    }

    /// The readout protocol's θ folded into [0, 2π).
    pub fn normalized_theta(&self) -> f64 {
        self.theta.rem_euclid(std::f64::consts::TAU)
    }
}

/// Result of one experiment run.
#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentOutput {
    Trace(TimeTrace),
    Grid(SweepGrid),
}

impl ExperimentOutput {
    pub fn metadata(&self) -> &BTreeMap<String, Value> {
        match self {
            ExperimentOutput::Trace(t) => &t.metadata,
            ExperimentOutput::Grid(g) => &g.metadata,
        }
    }

    pub fn metadata_mut(&mut self) -> &mut BTreeMap<String, Value> {
        match self {
            ExperimentOutput::Trace(t) => &mut t.metadata,
            ExperimentOutput::Grid(g) => &mut g.metadata,
        }
    }
}

/// Metadata common to every output: the resolved recipe and code version.
pub(crate) fn base_metadata(spec: &ExperimentSpec) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("experiment".into(), json!(spec.id.as_str()));
    m.insert(
        "spec".into(),
        serde_json::to_value(spec).unwrap_or(Value::Null),
    );
    m.insert("code_version".into(), json!(env!("CARGO_PKG_VERSION")));
    m
}

/// Runs the experiment named in `spec`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    Ok(match spec.id {
        ExperimentId::SpinFunnel => ExperimentOutput::Grid(run_spin_funnel(spec)?),
        ExperimentId::StarkSweep => ExperimentOutput::Grid(run_stark_sweep(spec)?),
        ExperimentId::PsbEsr => ExperimentOutput::Trace(run_psb_esr(spec)?),
        ExperimentId::Readout => ExperimentOutput::Trace(run_readout_protocol(spec)?.trace),
        ExperimentId::Cluster => ExperimentOutput::Trace(run_cluster(spec)?),
    })
}
