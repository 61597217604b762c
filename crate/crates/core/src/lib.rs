//! Reduced-order models of a magneto-elastic hysteresis peristaltic pump.
//!
//! * [`model`]: membrane force balance, extrema and critical magnet coefficient.
//! * [`cycle`]: quasi-static hysteresis loop with wall latching and snap-through.
//! * [`pump`]: a chain of membrane cells coupled through a lubrication network.
//! * [`waveform`]: periodic pneumatic pressure schedules.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cycle;
pub mod error;
pub mod model;
pub mod pump;
pub mod roots;
pub mod waveform;

pub use cycle::{
    contact_force, loop_area, step_quasi_static, trace_cycle, CycleState, CycleTrace, Landscape,
    SnapEvent, WallState,
};
pub use error::{Error, Result};
pub use model::{
    critical_coefficient, equilibria_at_pressure, nondimensionalize, pressure_dimensional,
    pressure_star, pressure_star_slope, stationary_points, DimensionalParams, EquilibriumRoot,
    MagnetoElasticParams, StationaryKind, StationaryPoint,
};
pub use pump::{
    build_chain, event_times, net_flow_metrics, run, step, Cell, CellChain, CellEvents, CellSpec,
    ChainConfig, ChainPreset, FlowMetrics, FlowRecord, RunResult,
};
pub use waveform::{make_square, Interpolation, Preset, Waveform};
