//! Periodic pneumatic pressure schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default positive plateau of the presets (dimensionless).
pub const DEFAULT_P_MAX: f64 = 7.0;
/// Default magnitude of the negative plateau of the presets.
pub const DEFAULT_P_MIN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Straight lines between knots.
    #[default]
    Linear,
    /// Each knot value holds until the next knot (ideal switching).
    Hold,
}

/// Periodic pressure schedule defined by knots on `[0, period]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    knots: Vec<(f64, f64)>,
    period: f64,
    interpolation: Interpolation,
}

impl Waveform {
    pub fn new(knots: Vec<(f64, f64)>, period: f64, interpolation: Interpolation) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::param("period", "must be positive and finite"));
        }
        if knots.is_empty() {
            return Err(Error::param("knots", "at least one knot is required"));
        }
        if knots.iter().any(|&(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(Error::param("knots", "knot values must be finite"));
        }
        if knots.iter().any(|&(t, _)| t < 0.0 || t > period) {
            return Err(Error::param(
                "knots",
                "knot times must lie within [0, period]",
            ));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::param(
                "knots",
                "knot times must be strictly increasing",
            ));
        }
        Ok(Self {
            knots,
            period,
            interpolation,
        })
    }

    /// A constant schedule.
    pub fn constant(pressure: f64, period: f64) -> Result<Self> {
        Self::new(vec![(0.0, pressure)], period, Interpolation::Linear)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn max_pressure(&self) -> f64 {
        self.knots
            .iter()
            .map(|k| k.1)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_pressure(&self) -> f64 {
        self.knots.iter().map(|k| k.1).fold(f64::INFINITY, f64::min)
    }

    /// Pressure at time `t` of the periodic extension.
    pub fn pressure_at(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if n == 1 {
            return self.knots[0].1;
        }
        let tau = t.rem_euclid(self.period);
        let first = self.knots[0];
        let last = self.knots[n - 1];
        let (left, right) = if tau < first.0 {
            ((last.0 - self.period, last.1), first)
        } else if tau >= last.0 {
            let wrap = if last.0 < self.period {
                (first.0 + self.period, first.1)
            } else {
                last
            };
            (last, wrap)
        } else {
            // first knot with time > tau
            let i = self.knots.partition_point(|k| k.0 <= tau);
            (self.knots[i - 1], self.knots[i])
        };
        match self.interpolation {
            Interpolation::Hold => left.1,
            Interpolation::Linear => {
                let span = right.0 - left.0;
                if span <= 0.0 {
                    left.1
                } else {
                    left.1 + (right.1 - left.1) * (tau - left.0) / span
                }
            }
        }
    }
}

/// Two equal plateaus at `p_high` and `p_low` joined by linear ramps.
///
/// Each transition lasts `ramp_fraction * period` and is centred on the
/// switching instants `0` and `period / 2`, so each plateau lasts
/// `period * (0.5 - ramp_fraction)`. A zero ramp gives an ideal square wave.
pub fn make_square(period: f64, p_high: f64, p_low: f64, ramp_fraction: f64) -> Result<Waveform> {
    if !(0.0..0.5).contains(&ramp_fraction) {
        return Err(Error::param("ramp_fraction", "must lie in [0, 0.5)"));
    }
    if !(period > 0.0) {
        return Err(Error::param("period", "must be positive"));
    }
    let half = 0.5 * period;
    if ramp_fraction == 0.0 {
        return Waveform::new(
            vec![(0.0, p_high), (half, p_low)],
            period,
            Interpolation::Hold,
        );
    }
    let r = 0.5 * ramp_fraction * period;
    let mid = 0.5 * (p_high + p_low);
    Waveform::new(
        vec![
            (0.0, mid),
            (r, p_high),
            (half - r, p_high),
            (half + r, p_low),
            (period - r, p_low),
        ],
        period,
        Interpolation::Linear,
    )
}

/// Named schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Idle until 0.2, ramp to the high plateau by 0.3, hold to 0.5, ramp to
    /// the low plateau by 0.7, hold to 1.1, then ramp back to zero by 1.2.
    /// The reported actuation windows overlap (positive 0.3–0.7, negative
    /// 0.5–1.1); the 0.5–0.7 overlap is read as the down-ramp.
    PaperFsi,
    /// 1 s square wave switching every 500 ms with 5 % ramps.
    Square500ms,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::PaperFsi, Preset::Square500ms];

    pub fn name(self) -> &'static str {
        match self {
            Preset::PaperFsi => "paper-fsi",
            Preset::Square500ms => "square-500ms",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "paper-fsi" | "paper_fsi" => Some(Preset::PaperFsi),
            "square-500ms" | "square_500ms" => Some(Preset::Square500ms),
            _ => None,
        }
    }

    /// Builds the schedule with positive plateau `p_max` and negative plateau `-p_min`.
    pub fn build(self, p_max: f64, p_min: f64) -> Waveform {
        match self {
            Preset::PaperFsi => paper_fsi(p_max, p_min),
            Preset::Square500ms => make_square(1.0, p_max, -p_min, 0.05).expect("valid preset"),
        }
    }
}

pub fn paper_fsi(p_max: f64, p_min: f64) -> Waveform {
    Waveform::new(
        vec![
            (0.0, 0.0),
            (0.2, 0.0),
            (0.3, p_max),
            (0.5, p_max),
            (0.7, -p_min),
            (1.1, -p_min),
        ],
        1.2,
        Interpolation::Linear,
    )
    .expect("valid preset")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn flat_schedule_is_zero_everywhere() {
        let w = Waveform::new(vec![(0.0, 0.0), (1.0, 0.0)], 1.0, Interpolation::Linear).unwrap();
        for t in [0.0, 0.3, 0.999, 1.0, 17.25] {
            assert_eq!(w.pressure_at(t), 0.0);
        }
    }

    #[test]
    fn square_preset_plateaus() {
        let w = Preset::Square500ms.build(DEFAULT_P_MAX, DEFAULT_P_MIN);
        assert_eq!(w.pressure_at(0.25), 7.0);
        assert_eq!(w.pressure_at(0.75), -1.0);
        assert_eq!(w.period(), 1.0);
    }

    #[test]
    fn paper_fsi_timing() {
        let w = Preset::PaperFsi.build(7.0, 1.0);
        assert_eq!(w.pressure_at(0.1), 0.0);
        assert_eq!(w.pressure_at(0.4), 7.0);
        assert_eq!(w.pressure_at(0.9), -1.0);
        assert_abs_diff_eq!(w.pressure_at(0.25), 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w.pressure_at(1.15), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn exact_at_knots() {
        let w = Preset::PaperFsi.build(7.0, 1.0);
        for &(t, p) in w.knots() {
            assert_eq!(w.pressure_at(t), p);
        }
    }

    #[test]
    fn ideal_square() {
        let w = make_square(1.0, 7.0, -1.0, 0.0).unwrap();
        assert_eq!(w.interpolation(), Interpolation::Hold);
        assert_eq!(w.pressure_at(0.0), 7.0);
        assert_eq!(w.pressure_at(0.4999), 7.0);
        assert_eq!(w.pressure_at(0.5), -1.0);
        assert_eq!(w.pressure_at(0.9999), -1.0);
    }

    #[test]
    fn ramped_square_plateau_lengths() {
        let w = make_square(1.0, 7.0, -1.0, 0.1).unwrap();
        let k = w.knots();
        assert_abs_diff_eq!(k[2].0 - k[1].0, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!((k[4].0 - k[3].0), 0.4, epsilon = 1e-12);
        assert_eq!(w.pressure_at(0.25), 7.0);
        assert_eq!(w.pressure_at(0.75), -1.0);
    }

    #[test]
    fn symmetric_square_has_zero_mean() {
        for ramp in [0.0, 0.1, 0.3] {
            let w = make_square(1.0, 3.0, -3.0, ramp).unwrap();
            let n = 1000;
            // midpoint rule is exact for piecewise-linear integrands with knots on the grid
            let mean: f64 = (0..n)
                .map(|i| w.pressure_at((i as f64 + 0.5) / n as f64))
                .sum::<f64>()
                / n as f64;
            assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn invalid_ramp_and_period_rejected() {
        assert!(make_square(1.0, 1.0, -1.0, 0.5).is_err());
        assert!(make_square(1.0, 1.0, -1.0, -0.1).is_err());
        assert!(Waveform::new(vec![(0.0, 1.0)], 0.0, Interpolation::Linear).is_err());
        assert!(Waveform::new(vec![(0.5, 1.0), (0.2, 0.0)], 1.0, Interpolation::Linear).is_err());
        assert!(Waveform::new(vec![(0.0, 1.0), (1.5, 0.0)], 1.0, Interpolation::Linear).is_err());
    }

    #[test]
    fn wraps_between_last_and_first_knot() {
        let w = Waveform::new(vec![(0.25, 1.0), (0.75, -1.0)], 1.0, Interpolation::Linear).unwrap();
        assert_abs_diff_eq!(w.pressure_at(0.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.pressure_at(1.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.pressure_at(0.5), 0.0, epsilon = 1e-12);
    }
}
