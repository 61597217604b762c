//! Chain of membrane cells between two reservoirs, coupled through a
//! lubrication network.
//!
//! Each cell is an overdamped membrane, `dz/dt = -mobility * (p_pneu - P - p*(z))`,
//! that latches against a wall while the membrane pushes into it. Neighbouring
//! cells exchange fluid through interfaces of conductance `c * h^3`, where `h`
//! is the smaller channel gap of the two sides, floored at the leak height.
//! Fluid is incompressible, so every cell's volume change is balanced by the
//! net flow through its two interfaces.

mod chain;
pub mod metrics;
pub mod network;

pub use chain::{
    build_chain, step, Cell, CellChain, CellSpec, ChainConfig, ChainPreset, FlowRecord,
    DEFAULT_CONDUCTANCE, DEFAULT_LEAK_HEIGHT, DEFAULT_MEH_COEFFICIENT, DEFAULT_MOBILITY,
};
pub use metrics::{
    event_times, net_flow_metrics, phase_signs, CellEvents, FlowMetrics, Phase, PhaseSigns,
};

use crate::error::{Error, Result};
use crate::waveform::Waveform;

/// Time series and per-cycle contact timing of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub records: Vec<FlowRecord>,
    pub period: f64,
    pub dt: f64,
    pub stroke_volume: f64,
    /// `[cycle][cell]` inner-wall closure and detach times.
    pub events: Vec<Vec<CellEvents>>,
}

impl RunResult {
    pub fn last(&self) -> &FlowRecord {
        self.records.last().expect("a run has at least one record")
    }

    /// `|integral(inflow - outflow) - (V(T) - V(0))|`.
    pub fn conservation_residual(&self) -> f64 {
        let first = &self.records[0];
        let last = self.last();
        let net_in: f64 = self
            .records
            .windows(2)
            .map(|w| (w[1].t - w[0].t) * (w[1].inflow - w[1].outflow))
            .sum();
        (net_in - (last.total_volume - first.total_volume)).abs()
    }

    pub fn max_total_volume(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.total_volume)
            .fold(0.0, f64::max)
    }
}

/// Runs `config` under `waveform` for `duration` with fixed step `dt`.
pub fn run(config: &ChainConfig, waveform: &Waveform, duration: f64, dt: f64) -> Result<RunResult> {
    let period = waveform.period();
    if !(duration >= period) {
        return Err(Error::param(
            "duration",
            "must cover at least one waveform period",
        ));
    }
    if !(dt > 0.0 && dt <= period / 1000.0 * (1.0 + 1e-12)) {
        return Err(Error::param("dt", "must lie in (0, period / 1000]"));
    }
    let mut chain = build_chain(config)?;
    let steps = (duration / dt).round() as usize;
    let mut records = Vec::with_capacity(steps + 1);
    records.push(chain.snapshot(0.0, waveform.pressure_at(0.0)));
    for k in 0..steps {
        records.push(chain.advance(k as f64 * dt, dt, waveform)?);
    }
    let events = event_times(&records, period);
    Ok(RunResult {
        records,
        period,
        dt,
        stroke_volume: chain.stroke_volume(),
        events,
    })
}
