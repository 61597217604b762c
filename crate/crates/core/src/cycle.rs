//! Quasi-static membrane trajectory with wall contact and snap-through.
//!
//! Between two samples the applied pressure is swept linearly. Along the sweep
//! the membrane either stays latched against a wall, follows a stable branch
//! of `p*(z)` (one with `dp*/dz < 0`), or jumps at constant pressure when a
//! contact force reaches zero on an unstable wall or the branch ends at a fold.
//! Every event is placed at the exact pressure where it happens, so snap
//! pressures do not depend on the sampling density.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{equilibria_in, stationary_points, MagnetoElasticParams};
use crate::roots::{bisect, BISECTION_TOL, SCAN_INTERVALS};
use crate::waveform::Waveform;

/// Offset from the snap origin when searching for landing roots, so the
/// double root at a fold or the wall itself is not picked up again.
const SNAP_EXCLUSION: f64 = 1e-7;
const MAX_EVENTS_PER_STEP: usize = 32;
/// Largest `z*` spacing of path vertices along a followed branch.
const PATH_SPACING: f64 = 2e-3;

/// Default sampling density of [`trace_cycle`].
pub const DEFAULT_SAMPLES_PER_CYCLE: usize = 512;

/// Contact status. Forces are dimensionless and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum WallState {
    Interior,
    InnerContact { contact_force: f64 },
    OuterContact { contact_force: f64 },
}

impl WallState {
    pub fn label(&self) -> &'static str {
        match self {
            WallState::Interior => "interior",
            WallState::InnerContact { .. } => "inner_contact",
            WallState::OuterContact { .. } => "outer_contact",
        }
    }

    pub fn contact_force(&self) -> Option<f64> {
        match *self {
            WallState::Interior => None,
            WallState::InnerContact { contact_force }
            | WallState::OuterContact { contact_force } => Some(contact_force),
        }
    }

    pub fn is_inner(&self) -> bool {
        matches!(self, WallState::InnerContact { .. })
    }

    pub fn is_outer(&self) -> bool {
        matches!(self, WallState::OuterContact { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleState {
    pub z_star: f64,
    pub wall: WallState,
    pub p_applied: f64,
}

impl CycleState {
    pub fn validate(&self, params: &MagnetoElasticParams) -> Result<()> {
        let (zi, zo) = (params.z_in_star, params.z_out_star);
        if !(self.z_star >= zi && self.z_star <= zo) {
            return Err(Error::InvalidState(format!(
                "z* = {} outside walls [{zi}, {zo}]",
                self.z_star
            )));
        }
        match self.wall {
            WallState::InnerContact { .. } if self.z_star != zi => Err(Error::InvalidState(
                "inner contact away from the inner wall".into(),
            )),
            WallState::OuterContact { .. } if self.z_star != zo => Err(Error::InvalidState(
                "outer contact away from the outer wall".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Constant-pressure jump between branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapEvent {
    /// Time of the sample whose pressure sweep contained the snap.
    pub t: f64,
    /// Index of that sample in the trace.
    pub sample: usize,
    pub p_applied: f64,
    pub z_from: f64,
    pub z_to: f64,
}

/// Sampled trajectory over a waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleTrace {
    pub samples: Vec<(f64, CycleState)>,
    pub snap_events: Vec<SnapEvent>,
    pub samples_per_cycle: usize,
    /// `(z*, p)` polyline including the corners of every latch, detach and snap.
    pub path: Vec<(f64, f64)>,
    /// Position of each sample in `path`.
    pub path_index: Vec<usize>,
}

impl CycleTrace {
    /// Number of complete cycles covered.
    pub fn cycles(&self) -> usize {
        self.samples.len().saturating_sub(1) / self.samples_per_cycle
    }

    /// Sample index range `(start, end]` of cycle `c`; cycle 0 also owns sample 0.
    fn cycle_bounds(&self, c: usize) -> (usize, usize) {
        (c * self.samples_per_cycle, (c + 1) * self.samples_per_cycle)
    }

    pub fn snaps_in_cycle(&self, c: usize) -> Vec<SnapEvent> {
        let (start, end) = self.cycle_bounds(c);
        self.snap_events
            .iter()
            .filter(|e| (e.sample > start || (c == 0 && e.sample == 0)) && e.sample <= end)
            .copied()
            .collect()
    }

    /// True when the states at all cycle boundaries from the first one on agree to `tol`.
    pub fn is_periodic(&self, tol: f64) -> bool {
        let n = self.cycles();
        if n < 2 {
            return true;
        }
        let first = self.samples[self.samples_per_cycle].1;
        (2..=n).all(|c| {
            let s = self.samples[c * self.samples_per_cycle].1;
            (s.z_star - first.z_star).abs() <= tol && s.wall.label() == first.wall.label()
        })
    }

    /// Closed `(z*, p)` path of cycle `c`.
    pub fn cycle_path(&self, c: usize) -> &[(f64, f64)] {
        let (start, end) = self.cycle_bounds(c);
        &self.path[self.path_index[start]..=self.path_index[end]]
    }
}

/// Normal force from the wall the state touches.
pub fn contact_force(state: &CycleState, params: &MagnetoElasticParams) -> Result<f64> {
    match state.wall {
        WallState::Interior => Err(Error::InvalidState(
            "contact force requested for a membrane not touching a wall".into(),
        )),
        WallState::OuterContact { .. } => {
            Ok((params.p_raw(params.z_out_star) - state.p_applied).max(0.0))
        }
        WallState::InnerContact { .. } => {
            Ok((state.p_applied - params.p_raw(params.z_in_star)).max(0.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Contact {
    Interior,
    Inner,
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Inward,
    Outward,
}

/// Result of one pressure sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: CycleState,
    /// Corners visited before reaching the final state, in order.
    pub vertices: Vec<(f64, f64)>,
    /// `(pressure, z_from, z_to)` of each snap.
    pub snaps: Vec<(f64, f64, f64)>,
}

/// Parameters plus the fold positions between the walls, computed once.
#[derive(Debug, Clone)]
pub struct Landscape {
    params: MagnetoElasticParams,
    folds: Vec<f64>,
}

impl Landscape {
    pub fn new(params: MagnetoElasticParams) -> Self {
        let folds = stationary_points(&params)
            .into_iter()
            .map(|s| s.z_star)
            .filter(|&z| z > params.z_in_star && z < params.z_out_star)
            .collect();
        Self { params, folds }
    }

    pub fn params(&self) -> &MagnetoElasticParams {
        &self.params
    }

    /// Equilibrium reached by loading quasi-statically from rest to pressure `p`:
    /// latched open if the outer contact holds, otherwise the most open stable
    /// root, otherwise the inner wall.
    pub fn equilibrium_at(&self, p: f64) -> CycleState {
        let prm = &self.params;
        let (zi, zo) = (prm.z_in_star, prm.z_out_star);
        let contact = if p <= prm.p_raw(zo) {
            (zo, Contact::Outer)
        } else if let Some(r) = equilibria_in(p, prm, zi, zo, SCAN_INTERVALS)
            .into_iter()
            .rfind(|r| r.stable)
        {
            (r.z_star, Contact::Interior)
        } else if p >= prm.p_raw(zi) {
            (zi, Contact::Inner)
        } else {
            (zo, Contact::Outer)
        };
        self.finish(contact.0, contact.1, p)
    }

    fn finish(&self, z: f64, contact: Contact, p: f64) -> CycleState {
        let prm = &self.params;
        let wall = match contact {
            Contact::Interior => WallState::Interior,
            Contact::Inner => WallState::InnerContact {
                contact_force: (p - prm.p_raw(prm.z_in_star)).max(0.0),
            },
            Contact::Outer => WallState::OuterContact {
                contact_force: (prm.p_raw(prm.z_out_star) - p).max(0.0),
            },
        };
        CycleState {
            z_star: z,
            wall,
            p_applied: p,
        }
    }

    /// Stable branch `[lo, hi]` containing `z`, bounded by folds or walls.
    fn branch(&self, z: f64) -> Option<(f64, f64)> {
        if self.params.slope_raw(z) >= 0.0 {
            return None;
        }
        let lo = self
            .folds
            .iter()
            .copied()
            .filter(|&f| f < z)
            .fold(self.params.z_in_star, f64::max);
        let hi = self
            .folds
            .iter()
            .copied()
            .filter(|&f| f > z)
            .fold(self.params.z_out_star, f64::min);
        Some((lo, hi))
    }

    /// Nearest stable root of `p*(z) = p` beyond `z_from` in `dir`, else that wall.
    fn snap_target(&self, z_from: f64, p: f64, dir: Direction) -> (f64, Contact) {
        let prm = &self.params;
        match dir {
            Direction::Inward => {
                let hi = z_from - SNAP_EXCLUSION;
                equilibria_in(p, prm, prm.z_in_star, hi, SCAN_INTERVALS)
                    .into_iter()
                    .rfind(|r| r.stable)
                    .map(|r| r.z_star)
                    .map(|z| (z, Contact::Interior))
                    .unwrap_or((prm.z_in_star, Contact::Inner))
            }
            Direction::Outward => {
                let lo = z_from + SNAP_EXCLUSION;
                equilibria_in(p, prm, lo, prm.z_out_star, SCAN_INTERVALS)
                    .into_iter()
                    .find(|r| r.stable)
                    .map(|r| (r.z_star, Contact::Interior))
                    .unwrap_or((prm.z_out_star, Contact::Outer))
            }
        }
    }

    /// Pushes vertices strictly between `from` and `to` along the curve `p*(z)`.
    fn follow(&self, from: f64, to: f64, vertices: &mut Vec<(f64, f64)>) {
        let n = ((to - from).abs() / PATH_SPACING).ceil().min(4096.0) as usize;
        for k in 1..n {
            let z = from + (to - from) * k as f64 / n as f64;
            vertices.push((z, self.params.p_raw(z)));
        }
    }

    /// Sweeps the applied pressure from `state.p_applied` to `p_next`.
    pub fn advance(&self, state: &CycleState, p_next: f64) -> Transition {
        let prm = &self.params;
        let (zi, zo) = (prm.z_in_star, prm.z_out_star);
        let mut z = state.z_star.clamp(zi, zo);
        let mut contact = match state.wall {
            WallState::Interior => Contact::Interior,
            WallState::InnerContact { .. } => Contact::Inner,
            WallState::OuterContact { .. } => Contact::Outer,
        };
        let mut p = state.p_applied;
        let mut vertices = Vec::new();
        let mut snaps = Vec::new();

        for _ in 0..MAX_EVENTS_PER_STEP {
            match contact {
                Contact::Outer => {
                    let peel = prm.p_raw(zo);
                    if p_next <= peel {
                        p = p_next;
                        break;
                    }
                    p = p.max(peel);
                    vertices.push((zo, p));
                    if prm.slope_raw(zo) < 0.0 {
                        contact = Contact::Interior;
                    } else {
                        let (to, c) = self.snap_target(zo, p, Direction::Inward);
                        snaps.push((p, zo, to));
                        vertices.push((to, p));
                        z = to;
                        contact = c;
                    }
                }
                Contact::Inner => {
                    let peel = prm.p_raw(zi);
                    if p_next >= peel {
                        p = p_next;
                        break;
                    }
                    p = p.min(peel);
                    vertices.push((zi, p));
                    if prm.slope_raw(zi) < 0.0 {
                        contact = Contact::Interior;
                    } else {
                        let (to, c) = self.snap_target(zi, p, Direction::Outward);
                        snaps.push((p, zi, to));
                        vertices.push((to, p));
                        z = to;
                        contact = c;
                    }
                }
                Contact::Interior => match self.branch(z) {
                    Some((lo, hi)) => {
                        let p_lo = prm.p_raw(lo);
                        let p_hi = prm.p_raw(hi);
                        if p_next <= p_lo && p_next >= p_hi {
                            let g = |x: f64| prm.p_raw(x) - p_next;
                            let g_lo = g(lo);
                            let root = if g_lo == 0.0 {
                                lo
                            } else if g(hi) == 0.0 {
                                hi
                            } else {
                                bisect(&g, lo, hi, g_lo, BISECTION_TOL)
                            };
                            self.follow(z, root, &mut vertices);
                            z = root;
                            p = p_next;
                            break;
                        }
                        let (edge, p_edge, dir) = if p_next > p_lo {
                            (lo, p_lo, Direction::Inward)
                        } else {
                            (hi, p_hi, Direction::Outward)
                        };
                        p = p_edge;
                        self.follow(z, edge, &mut vertices);
                        vertices.push((edge, p));
                        if edge == zi {
                            z = zi;
                            contact = Contact::Inner;
                        } else if edge == zo {
                            z = zo;
                            contact = Contact::Outer;
                        } else {
                            let (to, c) = self.snap_target(edge, p, dir);
                            snaps.push((p, edge, to));
                            vertices.push((to, p));
                            z = to;
                            contact = c;
                        }
                    }
                    None => {
                        // Off any stable branch: jump along the net force.
                        let excess = prm.p_raw(z) - p;
                        let dir = if excess > 0.0 || (excess == 0.0 && p_next < p) {
                            Direction::Outward
                        } else {
                            Direction::Inward
                        };
                        vertices.push((z, p));
                        let (to, c) = self.snap_target(z, p, dir);
                        snaps.push((p, z, to));
                        vertices.push((to, p));
                        z = to;
                        contact = c;
                    }
                },
            }
        }

        Transition {
            state: self.finish(z, contact, p),
            vertices,
            snaps,
        }
    }
}

/// Moves `state` quasi-statically to applied pressure `p_next`.
pub fn step_quasi_static(
    state: &CycleState,
    p_next: f64,
    params: &MagnetoElasticParams,
) -> CycleState {
    Landscape::new(*params).advance(state, p_next).state
}

/// Traces `n_cycles` of `waveform`, starting from the equilibrium at zero pressure.
pub fn trace_cycle(
    params: &MagnetoElasticParams,
    waveform: &Waveform,
    n_cycles: usize,
    samples_per_cycle: usize,
) -> Result<CycleTrace> {
    params.validate()?;
    if !(waveform.period() > 0.0) {
        return Err(Error::param("waveform.period", "must be positive"));
    }
    if n_cycles < 1 {
        return Err(Error::param("n_cycles", "at least one cycle is required"));
    }
    if samples_per_cycle < 8 {
        return Err(Error::param(
            "samples_per_cycle",
            "at least 8 samples per cycle",
        ));
    }
    let land = Landscape::new(*params);
    let mut state = land.equilibrium_at(0.0);
    let dt = waveform.period() / samples_per_cycle as f64;
    let total = n_cycles * samples_per_cycle;

    let mut trace = CycleTrace {
        samples: Vec::with_capacity(total + 1),
        snap_events: Vec::new(),
        samples_per_cycle,
        path: vec![(state.z_star, state.p_applied)],
        path_index: Vec::with_capacity(total + 1),
    };
    for k in 0..=total {
        let t = k as f64 * dt;
        let tr = land.advance(&state, waveform.pressure_at(t));
        trace.path.extend_from_slice(&tr.vertices);
        trace
            .snap_events
            .extend(tr.snaps.iter().map(|&(p, z_from, z_to)| SnapEvent {
                t,
                sample: k,
                p_applied: p,
                z_from,
                z_to,
            }));
        state = tr.state;
        trace.path.push((state.z_star, state.p_applied));
        trace.path_index.push(trace.path.len() - 1);
        trace.samples.push((t, state));
    }
    Ok(trace)
}

/// Signed shoelace area of the last cycle's `(z*, p)` loop.
///
/// Counter-clockwise loops (latched open while pressure rises, closed while
/// it falls) are positive, i.e. net work done on the membrane.
pub fn loop_area(trace: &CycleTrace) -> Result<f64> {
    let n = trace.cycles();
    if n < 1 {
        return Err(Error::TooShort {
            needed: trace.samples_per_cycle as f64 + 1.0,
            got: trace.samples.len() as f64,
        });
    }
    Ok(shoelace(trace.cycle_path(n - 1)))
}

pub(crate) fn shoelace(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..pts.len() {
        let (x0, y0) = pts[i];
        let (x1, y1) = pts[(i + 1) % pts.len()];
        twice += x0 * y1 - x1 * y0;
    }
    0.5 * twice
}
