//! Flow integrals, per-cycle volumes, contact timing and phase flow signs.
//!
//! Flows in a [`FlowRecord`] are held over the step that ends at its time
//! stamp, so every integral here adds `rate * (t_k - t_{k-1})` for each record
//! after the first. That is the exact integral of what the stepper applied and
//! keeps volume balances closed to round-off.

use super::chain::FlowRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowMetrics {
    /// `(t, integral of (inflow + outflow) / 2)`.
    pub accumulated_flow: Vec<(f64, f64)>,
    /// `(t, integral of outflow)`.
    pub volume_conveyed: Vec<(f64, f64)>,
    /// Conveyed volume at the end of each full cycle.
    pub conveyed_at_cycle_end: Vec<f64>,
    /// Conveyed volume over the last full cycle.
    pub net_volume_per_cycle: f64,
}

/// Index of the record at time `t`, assuming records fall on a uniform grid.
fn index_at(series: &[FlowRecord], t: f64) -> usize {
    let idx = series.partition_point(|r| r.t < t);
    if idx >= series.len() {
        return series.len() - 1;
    }
    if idx > 0 && (t - series[idx - 1].t).abs() < (series[idx].t - t).abs() {
        idx - 1
    } else {
        idx
    }
}

fn full_cycles(series: &[FlowRecord], period: f64) -> usize {
    let span = series.last().map_or(0.0, |r| r.t) - series.first().map_or(0.0, |r| r.t);
    (span / period + 1e-9).floor() as usize
}

pub fn net_flow_metrics(series: &[FlowRecord], period: f64) -> Result<FlowMetrics> {
    let cycles = full_cycles(series, period);
    if cycles < 1 {
        return Err(Error::TooShort {
            needed: period,
            got: series.last().map_or(0.0, |r| r.t) - series.first().map_or(0.0, |r| r.t),
        });
    }
    let t0 = series[0].t;
    let mut accumulated = Vec::with_capacity(series.len());
    let mut conveyed = Vec::with_capacity(series.len());
    let (mut acc, mut conv) = (0.0, 0.0);
    accumulated.push((t0, acc));
    conveyed.push((t0, conv));
    for w in series.windows(2) {
        let h = w[1].t - w[0].t;
        acc += h * 0.5 * (w[1].inflow + w[1].outflow);
        conv += h * w[1].outflow;
        accumulated.push((w[1].t, acc));
        conveyed.push((w[1].t, conv));
    }
    let conveyed_at_cycle_end: Vec<f64> = (1..=cycles)
        .map(|c| conveyed[index_at(series, t0 + c as f64 * period)].1)
        .collect();
    let before_last = if cycles >= 2 {
        conveyed_at_cycle_end[cycles - 2]
    } else {
        0.0
    };
    Ok(FlowMetrics {
        net_volume_per_cycle: conveyed_at_cycle_end[cycles - 1] - before_last,
        accumulated_flow: accumulated,
        volume_conveyed: conveyed,
        conveyed_at_cycle_end,
    })
}

/// Inner-wall contact timing of one cell in one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellEvents {
    /// First time the cell reaches the inner wall.
    pub closure_time: Option<f64>,
    /// First time it leaves the inner wall.
    pub detach_time: Option<f64>,
}

/// Contact events indexed `[cycle][cell]`. A record at `t` belongs to cycle
/// `ceil(t / period) - 1`.
pub fn event_times(series: &[FlowRecord], period: f64) -> Vec<Vec<CellEvents>> {
    let n_cells = series.first().map_or(0, |r| r.walls.len());
    let cycles = (series.last().map_or(0.0, |r| r.t) / period - 1e-9)
        .ceil()
        .max(0.0) as usize;
    let mut out = vec![vec![CellEvents::default(); n_cells]; cycles];
    for w in series.windows(2) {
        let c = ((w[1].t / period - 1e-9).ceil() as usize)
            .saturating_sub(1)
            .min(cycles.saturating_sub(1));
        for (i, ev) in out[c].iter_mut().enumerate() {
            let (was, is) = (w[0].walls[i].is_inner(), w[1].walls[i].is_inner());
            if !was && is && ev.closure_time.is_none() {
                ev.closure_time = Some(w[1].t);
            }
            if was && !is && ev.detach_time.is_none() {
                ev.detach_time = Some(w[1].t);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Pressurization,
    Depressurization,
}

/// Flow signs seen during one cycle, split by actuation phase.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseSigns {
    pub inflow_negative_in_pressurization: bool,
    pub outflow_negative_in_depressurization: bool,
    pub min_inflow_pressurization: f64,
    pub min_outflow_depressurization: f64,
}

/// Phase of each record from the trend of `p_pneu`: rising pressure and the
/// plateau that follows it count as pressurization, falling pressure and its
/// plateau as depressurization. Records before the first trend are `None`.
pub fn phases(series: &[FlowRecord]) -> Vec<Option<Phase>> {
    let mut current = None;
    let mut out = Vec::with_capacity(series.len());
    out.push(None);
    for w in series.windows(2) {
        let d = w[1].p_pneu - w[0].p_pneu;
        if d > 0.0 {
            current = Some(Phase::Pressurization);
        } else if d < 0.0 {
            current = Some(Phase::Depressurization);
        }
        out.push(current);
    }
    out
}

/// Flow-sign signature of cycle `cycle` (0-based).
pub fn phase_signs(series: &[FlowRecord], period: f64, cycle: usize) -> PhaseSigns {
    let ph = phases(series);
    let lo = cycle as f64 * period;
    let hi = lo + period;
    let mut s = PhaseSigns {
        min_inflow_pressurization: f64::INFINITY,
        min_outflow_depressurization: f64::INFINITY,
        ..Default::default()
    };
    for (r, p) in series.iter().zip(ph) {
        if r.t <= lo + 1e-12 || r.t > hi + 1e-12 {
            continue;
        }
        match p {
            Some(Phase::Pressurization) => {
                s.min_inflow_pressurization = s.min_inflow_pressurization.min(r.inflow)
            }
            Some(Phase::Depressurization) => {
                s.min_outflow_depressurization = s.min_outflow_depressurization.min(r.outflow)
            }
            None => {}
        }
    }
    s.inflow_negative_in_pressurization = s.min_inflow_pressurization < 0.0;
    s.outflow_negative_in_depressurization = s.min_outflow_depressurization < 0.0;
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::WallState;
    use approx::assert_abs_diff_eq;

    fn rec(t: f64, q_in: f64, q_out: f64, inner: bool) -> FlowRecord {
        FlowRecord {
            t,
            p_pneu: 0.0,
            inflow: q_in,
            outflow: q_out,
            cell_pressures: vec![0.0],
            openings: vec![1.0],
            walls: vec![if inner {
                WallState::InnerContact { contact_force: 0.0 }
            } else {
                WallState::Interior
            }],
            accumulated_flow: 0.0,
            volume_conveyed: 0.0,
            total_volume: 1.0,
        }
    }

    #[test]
    fn constant_flow_integrates_linearly() {
        let q = 0.7;
        let series: Vec<_> = (0..=200)
            .map(|k| rec(k as f64 * 0.01, q, q, false))
            .collect();
        let m = net_flow_metrics(&series, 1.0).unwrap();
        for (&(t, a), &(_, v)) in m.accumulated_flow.iter().zip(&m.volume_conveyed) {
            assert_abs_diff_eq!(a, q * t, epsilon = 1e-12);
            assert_abs_diff_eq!(v, q * t, epsilon = 1e-12);
        }
        assert_eq!(m.conveyed_at_cycle_end.len(), 2);
        assert_abs_diff_eq!(m.net_volume_per_cycle, q, epsilon = 1e-12);
    }

    #[test]
    fn short_series_rejected() {
        let series: Vec<_> = (0..10)
            .map(|k| rec(k as f64 * 0.01, 1.0, 1.0, false))
            .collect();
        assert!(matches!(
            net_flow_metrics(&series, 1.0),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn cell_without_contact_has_no_events() {
        let series: Vec<_> = (0..=100)
            .map(|k| rec(k as f64 * 0.01, 0.0, 0.0, false))
            .collect();
        let ev = event_times(&series, 1.0);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0][0], CellEvents::default());
    }

    #[test]
    fn events_are_assigned_to_their_cycle() {
        let series: Vec<_> = (0..=200)
            .map(|k| {
                let t = k as f64 * 0.01;
                let phase = t.rem_euclid(1.0);
                rec(t, 0.0, 0.0, (0.3..0.6).contains(&phase))
            })
            .collect();
        let ev = event_times(&series, 1.0);
        assert_eq!(ev.len(), 2);
        assert_abs_diff_eq!(ev[0][0].closure_time.unwrap(), 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(ev[0][0].detach_time.unwrap(), 0.6, epsilon = 1e-9);
        assert_abs_diff_eq!(ev[1][0].closure_time.unwrap(), 1.3, epsilon = 1e-9);
        assert_abs_diff_eq!(ev[1][0].detach_time.unwrap(), 1.6, epsilon = 1e-9);
    }
}
