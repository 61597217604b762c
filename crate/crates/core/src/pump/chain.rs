use serde::{Deserialize, Serialize};

use super::network::solve_tridiagonal;
use crate::cycle::{Landscape, WallState};
use crate::error::{Error, Result};
use crate::model::MagnetoElasticParams;
use crate::waveform::Waveform;

pub const DEFAULT_CONDUCTANCE: f64 = 1.0e5;
pub const DEFAULT_LEAK_HEIGHT: f64 = 0.02;
pub const DEFAULT_MOBILITY: f64 = 10.0;
/// Coefficient of the magnet-equipped cells in the presets.
pub const DEFAULT_MEH_COEFFICIENT: f64 = 0.1;

const MAX_ITERATIONS: usize = 50;
const PRESSURE_TOLERANCE: f64 = 1e-10;
/// A cell that has flipped between free and pinned this often in one step stays pinned.
const MAX_MODE_SWITCHES: u8 = 3;

/// Per-cell parameters of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub params: MagnetoElasticParams,
    /// Axial extent; the cell volume is `length * z*`.
    pub length: f64,
}

/// A membrane cell with its current opening.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub params: MagnetoElasticParams,
    pub length: f64,
    pub z_star: f64,
    pub wall: WallState,
}

impl Cell {
    /// Channel gap above the inner wall.
    fn gap(&self) -> f64 {
        self.z_star - self.params.z_in_star
    }

    pub fn volume(&self) -> f64 {
        self.length * self.z_star
    }

    /// Volume swept between the two walls.
    pub fn stroke(&self) -> f64 {
        self.length * (self.params.z_out_star - self.params.z_in_star)
    }
}

/// Chain layout and hydraulic constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub cells: Vec<CellSpec>,
    /// Interface conductance per cubed opening.
    pub conductance_coefficient: f64,
    /// Smallest effective interface opening; keeps a closed cell slightly leaky.
    pub leak_height: f64,
    /// Membrane rate per unit pressure imbalance.
    pub mobility: f64,
    pub reservoir_pressure_in: f64,
    pub reservoir_pressure_out: f64,
}

impl ChainConfig {
    pub fn new(cells: Vec<CellSpec>) -> Self {
        Self {
            cells,
            conductance_coefficient: DEFAULT_CONDUCTANCE,
            leak_height: DEFAULT_LEAK_HEIGHT,
            mobility: DEFAULT_MOBILITY,
            reservoir_pressure_in: 0.0,
            reservoir_pressure_out: 0.0,
        }
    }

    pub fn from_preset(preset: ChainPreset, base: &MagnetoElasticParams) -> Self {
        Self::new(preset.cells(base, DEFAULT_MEH_COEFFICIENT))
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.len() < 2 {
            return Err(Error::param("cells", "a chain needs at least two cells"));
        }
        for c in &self.cells {
            c.params.validate()?;
            if !(c.length > 0.0) {
                return Err(Error::param("cells.length", "must be positive"));
            }
        }
        if !(self.conductance_coefficient > 0.0) {
            return Err(Error::param("conductance_coefficient", "must be positive"));
        }
        let z_in_min = self
            .cells
            .iter()
            .map(|c| c.params.z_in_star)
            .fold(f64::INFINITY, f64::min);
        if !(self.leak_height > 0.0 && self.leak_height < z_in_min) {
            return Err(Error::param(
                "leak_height",
                format!("must lie in (0, {z_in_min})"),
            ));
        }
        if !(self.mobility > 0.0) {
            return Err(Error::param("mobility", "must be positive"));
        }
        if !self.reservoir_pressure_in.is_finite() || !self.reservoir_pressure_out.is_finite() {
            return Err(Error::param("reservoir_pressure", "must be finite"));
        }
        Ok(())
    }

    /// Same chain seen from the other end: cells reversed, reservoirs swapped.
    pub fn mirrored(&self) -> Self {
        let mut m = self.clone();
        m.cells.reverse();
        std::mem::swap(&mut m.reservoir_pressure_in, &mut m.reservoir_pressure_out);
        m
    }

    pub fn stroke_volume(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c.length * (c.params.z_out_star - c.params.z_in_star))
            .sum()
    }
}

/// Named chain layouts. Magnet placement inside the reference device is not
/// known; these are readings of "closure starts on the left and runs right".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainPreset {
    /// Left cell without magnets, right cell with magnets.
    Paper2Cell,
    /// Five cells with the coefficient graded linearly from 0 on the left.
    Graded5Cell,
    /// Two magnet-free cells.
    Symmetric2Cell,
}

impl ChainPreset {
    pub const ALL: [ChainPreset; 3] = [
        ChainPreset::Paper2Cell,
        ChainPreset::Graded5Cell,
        ChainPreset::Symmetric2Cell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChainPreset::Paper2Cell => "paper-2cell",
            ChainPreset::Graded5Cell => "graded-5cell",
            ChainPreset::Symmetric2Cell => "symmetric-2cell",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Unit-length cells sharing the walls and magnet plane of `base`, with
    /// magnet coefficient `a_meh` on the magnet-equipped side.
    pub fn cells(self, base: &MagnetoElasticParams, a_meh: f64) -> Vec<CellSpec> {
        let with_a = |a: f64| CellSpec {
            params: MagnetoElasticParams {
                a_mo: a,
                a_mi: a,
                ..*base
            },
            length: 1.0,
        };
        match self {
            ChainPreset::Paper2Cell => vec![with_a(0.0), with_a(a_meh)],
            ChainPreset::Graded5Cell => (0..5).map(|i| with_a(a_meh * i as f64 / 4.0)).collect(),
            ChainPreset::Symmetric2Cell => vec![with_a(0.0), with_a(0.0)],
        }
    }
}

/// One time sample of a pump run.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    pub t: f64,
    pub p_pneu: f64,
    /// Rate into the tube at the inlet, held over the step ending at `t`.
    pub inflow: f64,
    /// Rate out of the tube at the outlet, held over the same step.
    pub outflow: f64,
    pub cell_pressures: Vec<f64>,
    pub openings: Vec<f64>,
    pub walls: Vec<WallState>,
    pub accumulated_flow: f64,
    pub volume_conveyed: f64,
    /// Total cell volume `sum(length * z*)`.
    pub total_volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Free,
    /// Ends the step on the inner (`false`) or outer (`true`) wall.
    Pinned {
        outer: bool,
    },
}

/// Cells plus the running flow integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct CellChain {
    cells: Vec<Cell>,
    conductance_coefficient: f64,
    leak_height: f64,
    mobility: f64,
    reservoir_in: f64,
    reservoir_out: f64,
    accumulated_flow: f64,
    volume_conveyed: f64,
}

/// Places every cell at its zero-pressure equilibrium.
pub fn build_chain(config: &ChainConfig) -> Result<CellChain> {
    config.validate()?;
    let cells = config
        .cells
        .iter()
        .map(|spec| {
            let s = Landscape::new(spec.params).equilibrium_at(0.0);
            Cell {
                params: spec.params,
                length: spec.length,
                z_star: s.z_star,
                wall: s.wall,
            }
        })
        .collect();
    Ok(CellChain {
        cells,
        conductance_coefficient: config.conductance_coefficient,
        leak_height: config.leak_height,
        mobility: config.mobility,
        reservoir_in: config.reservoir_pressure_in,
        reservoir_out: config.reservoir_pressure_out,
        accumulated_flow: 0.0,
        volume_conveyed: 0.0,
    })
}

impl CellChain {
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(Cell::volume).sum()
    }

    pub fn stroke_volume(&self) -> f64 {
        self.cells.iter().map(Cell::stroke).sum()
    }

    /// Conductances of the `N + 1` interfaces, inlet first.
    pub fn conductances(&self) -> Vec<f64> {
        let n = self.cells.len();
        (0..=n)
            .map(|j| {
                let left = if j > 0 {
                    self.cells[j - 1].gap()
                } else {
                    f64::INFINITY
                };
                let right = if j < n {
                    self.cells[j].gap()
                } else {
                    f64::INFINITY
                };
                let h = left.min(right).max(self.leak_height);
                self.conductance_coefficient * h * h * h
            })
            .collect()
    }

    /// Record of the current state with zero flow, used as the first sample of a run.
    pub fn snapshot(&self, t: f64, p_pneu: f64) -> FlowRecord {
        let rest = 0.5 * (self.reservoir_in + self.reservoir_out);
        FlowRecord {
            t,
            p_pneu,
            inflow: 0.0,
            outflow: 0.0,
            cell_pressures: vec![rest; self.cells.len()],
            openings: self.cells.iter().map(|c| c.z_star).collect(),
            walls: self.cells.iter().map(|c| c.wall).collect(),
            accumulated_flow: self.accumulated_flow,
            volume_conveyed: self.volume_conveyed,
            total_volume: self.total_volume(),
        }
    }

    /// Advances from `t` to `t + dt`.
    ///
    /// Internal pressures and membrane rates are solved together at the end
    /// of the step; openings advance explicitly. Cells that would cross a
    /// wall during the step are pinned to land on it exactly, and cells on a
    /// wall stay there while the membrane pushes into it.
    pub fn advance(&mut self, t: f64, dt: f64, waveform: &Waveform) -> Result<FlowRecord> {
        if !(dt > 0.0) {
            return Err(Error::param("dt", "must be positive"));
        }
        let n = self.cells.len();
        let t_next = t + dt;
        let p = waveform.pressure_at(t_next);
        let g = self.conductances();
        let mu = self.mobility;
        let p_star: Vec<f64> = self
            .cells
            .iter()
            .map(|c| c.params.p_raw(c.z_star))
            .collect();

        let mut modes: Vec<Mode> = self
            .cells
            .iter()
            .map(|c| {
                if c.z_star <= c.params.z_in_star {
                    Mode::Pinned { outer: false }
                } else if c.z_star >= c.params.z_out_star {
                    Mode::Pinned { outer: true }
                } else {
                    Mode::Free
                }
            })
            .collect();
        let mut switches = vec![0u8; n];
        let mut pressures = vec![f64::NAN; n];
        let mut residual = f64::INFINITY;
        let mut converged = false;

        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];

        for _ in 0..MAX_ITERATIONS {
            for i in 0..n {
                let c = &self.cells[i];
                let (gl, gr) = (g[i], g[i + 1]);
                sub[i] = -gl;
                sup[i] = -gr;
                match modes[i] {
                    Mode::Free => {
                        let k = c.length * mu;
                        diag[i] = gl + gr + k;
                        rhs[i] = k * (p - p_star[i]);
                    }
                    Mode::Pinned { outer } => {
                        let rate = (self.wall_of(i, outer) - c.z_star) / dt;
                        diag[i] = gl + gr;
                        rhs[i] = -c.length * rate;
                    }
                }
            }
            rhs[0] += g[0] * self.reservoir_in;
            rhs[n - 1] += g[n] * self.reservoir_out;
            solve_tridiagonal(&sub, &diag, &sup, &mut rhs);

            residual = rhs
                .iter()
                .zip(&pressures)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            pressures.copy_from_slice(&rhs);

            let mut changed = false;
            for i in 0..n {
                if switches[i] >= MAX_MODE_SWITCHES {
                    continue;
                }
                let c = &self.cells[i];
                let free_rate = -mu * (p - pressures[i] - p_star[i]);
                let target = c.z_star + dt * free_rate;
                let next = match modes[i] {
                    Mode::Free if target <= c.params.z_in_star => Mode::Pinned { outer: false },
                    Mode::Free if target >= c.params.z_out_star => Mode::Pinned { outer: true },
                    Mode::Pinned { outer: false } if target > c.params.z_in_star => Mode::Free,
                    Mode::Pinned { outer: true } if target < c.params.z_out_star => Mode::Free,
                    m => m,
                };
                if next != modes[i] {
                    modes[i] = next;
                    switches[i] += 1;
                    changed = true;
                }
            }
            if !changed {
                converged = true;
                break;
            }
        }
        if !converged && residual > PRESSURE_TOLERANCE {
            return Err(Error::Convergence {
                t: t_next,
                residual,
            });
        }
        if pressures.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { t: t_next });
        }

        for i in 0..n {
            let p_tm = p - pressures[i];
            let c = &mut self.cells[i];
            match modes[i] {
                Mode::Free => {
                    let rate = -mu * (p_tm - p_star[i]);
                    c.z_star =
                        (c.z_star + dt * rate).clamp(c.params.z_in_star, c.params.z_out_star);
                    c.wall = WallState::Interior;
                }
                Mode::Pinned { outer: true } => {
                    c.z_star = c.params.z_out_star;
                    c.wall = WallState::OuterContact {
                        contact_force: (c.params.p_raw(c.z_star) - p_tm).max(0.0),
                    };
                }
                Mode::Pinned { outer: false } => {
                    c.z_star = c.params.z_in_star;
                    c.wall = WallState::InnerContact {
                        contact_force: (p_tm - c.params.p_raw(c.z_star)).max(0.0),
                    };
                }
            }
        }

        let inflow = g[0] * (self.reservoir_in - pressures[0]);
        let outflow = g[n] * (pressures[n - 1] - self.reservoir_out);
        self.accumulated_flow += dt * 0.5 * (inflow + outflow);
        self.volume_conveyed += dt * outflow;

        Ok(FlowRecord {
            t: t_next,
            p_pneu: p,
            inflow,
            outflow,
            cell_pressures: pressures,
            openings: self.cells.iter().map(|c| c.z_star).collect(),
            walls: self.cells.iter().map(|c| c.wall).collect(),
            accumulated_flow: self.accumulated_flow,
            volume_conveyed: self.volume_conveyed,
            total_volume: self.total_volume(),
        })
    }

    fn wall_of(&self, i: usize, outer: bool) -> f64 {
        let prm = &self.cells[i].params;
        if outer {
            prm.z_out_star
        } else {
            prm.z_in_star
        }
    }
}

/// Functional form of [`CellChain::advance`].
pub fn step(
    chain: &CellChain,
    t: f64,
    dt: f64,
    waveform: &Waveform,
) -> Result<(CellChain, FlowRecord)> {
    let mut next = chain.clone();
    let record = next.advance(t, dt, waveform)?;
    Ok((next, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::Interpolation;
    use approx::assert_abs_diff_eq;

    fn base() -> MagnetoElasticParams {
        MagnetoElasticParams::symmetric(0.0)
    }

    #[test]
    fn paper_chain_initial_state() {
        let chain =
            build_chain(&ChainConfig::from_preset(ChainPreset::Paper2Cell, &base())).unwrap();
        let c = chain.cells();
        assert_eq!(c[0].z_star, 1.0);
        assert_eq!(c[0].wall, WallState::Interior);
        assert_eq!(c[1].z_star, 1.25);
        assert!(c[1].wall.is_outer());
        assert_eq!(chain.conductances().len(), 3);
    }

    #[test]
    fn graded_chain_openings_nondecreasing() {
        let chain =
            build_chain(&ChainConfig::from_preset(ChainPreset::Graded5Cell, &base())).unwrap();
        let z: Vec<f64> = chain.cells().iter().map(|c| c.z_star).collect();
        assert_eq!(z.len(), 5);
        assert!(z.iter().all(|&v| (1.0..=1.25).contains(&v)));
        assert!(z.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn config_validation_names_the_field() {
        let mut cfg = ChainConfig::from_preset(ChainPreset::Paper2Cell, &base());
        cfg.leak_height = 0.0;
        match build_chain(&cfg) {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "leak_height"),
            other => panic!("unexpected {other:?}"),
        }
        let mut cfg = ChainConfig::from_preset(ChainPreset::Paper2Cell, &base());
        cfg.cells.truncate(1);
        assert!(build_chain(&cfg).is_err());
        let mut cfg = ChainConfig::from_preset(ChainPreset::Paper2Cell, &base());
        cfg.mobility = -1.0;
        assert!(build_chain(&cfg).is_err());
    }

    #[test]
    fn frozen_at_walls_gives_no_flow() {
        let mut cfg = ChainConfig::from_preset(ChainPreset::Paper2Cell, &base());
        cfg.cells = vec![cfg.cells[1]; 3];
        let mut chain = build_chain(&cfg).unwrap();
        let w = Waveform::constant(1.0, 1.0).unwrap();
        for k in 0..100 {
            let r = chain.advance(k as f64 * 1e-3, 1e-3, &w).unwrap();
            assert_eq!(r.inflow, 0.0);
            assert_eq!(r.outflow, 0.0);
            assert!(r.walls.iter().all(|w| w.is_outer()));
        }
    }

    #[test]
    fn single_squeezed_cell_splits_flow_symmetrically() {
        // middle cell squeezed, outer cells latched open: equal conductances either side
        let latched = ChainPreset::Paper2Cell.cells(&base(), 0.1)[1];
        let free = ChainPreset::Paper2Cell.cells(&base(), 0.1)[0];
        let cfg = ChainConfig::new(vec![latched, free, latched]);
        let mut chain = build_chain(&cfg).unwrap();
        let w = Waveform::new(vec![(0.0, 0.5)], 1.0, Interpolation::Linear).unwrap();
        let dt = 1e-4;
        let z0 = chain.cells()[1].z_star;
        let r = chain.advance(0.0, dt, &w).unwrap();
        let zdot = (chain.cells()[1].z_star - z0) / dt;
        assert!(zdot < 0.0);
        assert_abs_diff_eq!(r.inflow, 0.5 * zdot, epsilon = 1e-9);
        assert_abs_diff_eq!(r.outflow, -0.5 * zdot, epsilon = 1e-9);
    }

    #[test]
    fn zero_actuation_is_stationary() {
        for preset in ChainPreset::ALL {
            let mut chain = build_chain(&ChainConfig::from_preset(preset, &base())).unwrap();
            let before: Vec<f64> = chain.cells().iter().map(|c| c.z_star).collect();
            let w = Waveform::constant(0.0, 1.0).unwrap();
            for k in 0..50 {
                let r = chain.advance(k as f64 * 1e-3, 1e-3, &w).unwrap();
                assert!(r.inflow.abs() < 1e-12 && r.outflow.abs() < 1e-12);
            }
            let after: Vec<f64> = chain.cells().iter().map(|c| c.z_star).collect();
            for (a, b) in before.iter().zip(&after) {
                assert!((a - b).abs() < 1e-12 * 1e-3);
            }
        }
    }

    #[test]
    fn step_rejects_nonpositive_dt() {
        let mut chain =
            build_chain(&ChainConfig::from_preset(ChainPreset::Paper2Cell, &base())).unwrap();
        let w = Waveform::constant(0.0, 1.0).unwrap();
        assert!(chain.advance(0.0, 0.0, &w).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let mut cfg = ChainConfig::from_preset(ChainPreset::Paper2Cell, &base());
        cfg.mobility = 1e308;
        cfg.conductance_coefficient = 1e308;
        let mut chain = build_chain(&cfg).unwrap();
        let w = Waveform::constant(1e308, 1.0).unwrap();
        assert!(matches!(
            chain.advance(0.0, 1e-3, &w),
            Err(Error::NonFinite { .. })
        ));
    }
}
