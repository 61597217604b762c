//! Membrane force balance and static analysis of the pressure–displacement curve.
//!
//! The membrane is a linear spring pulled outward by an outer magnet and inward
//! by its mirror partner across the channel. Both magnetic forces fall off with
//! the cube of distance. In dimensionless form the equilibrium pressure is
//!
//! ```text
//! p*(z) = 1 - z + a_mo / (z1 - z)^3 - a_mi / (8 z^3)
//! ```
//!
//! with positions scaled by the natural half-gap `z0` and pressures by `k_e * z0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{self, SCAN_INTERVALS};

/// Default dimensionless inner wall position.
pub const DEFAULT_Z_IN: f64 = 0.25;
/// Default dimensionless outer wall position.
pub const DEFAULT_Z_OUT: f64 = 1.25;
/// Default dimensionless outer-magnet plane.
pub const DEFAULT_Z1: f64 = 1.5;

/// Physical membrane and magnet constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionalParams {
    /// Elastic spring constant per unit area.
    pub k_e: f64,
    /// Inner-magnet force coefficient.
    pub k_mi: f64,
    /// Outer-magnet force coefficient.
    pub k_mo: f64,
    /// Natural half-gap of the membrane.
    pub z0: f64,
    /// Outer-magnet plane.
    pub z1: f64,
    pub z_in: f64,
    pub z_out: f64,
}

impl DimensionalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_e > 0.0) {
            return Err(Error::param("k_e", "must be positive"));
        }
        if !(self.k_mi >= 0.0) {
            return Err(Error::param("k_mi", "must be non-negative"));
        }
        if !(self.k_mo >= 0.0) {
            return Err(Error::param("k_mo", "must be non-negative"));
        }
        let ordered =
            0.0 < self.z_in && self.z_in < self.z0 && self.z0 < self.z_out && self.z_out < self.z1;
        if !ordered {
            return Err(Error::param(
                "z_in/z0/z_out/z1",
                "require 0 < z_in < z0 < z_out < z1",
            ));
        }
        Ok(())
    }
}

/// Dimensionless model coefficients and wall positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetoElasticParams {
    pub a_mo: f64,
    pub a_mi: f64,
    pub z1_star: f64,
    pub z_in_star: f64,
    pub z_out_star: f64,
}

impl MagnetoElasticParams {
    pub fn new(
        a_mo: f64,
        a_mi: f64,
        z1_star: f64,
        z_in_star: f64,
        z_out_star: f64,
    ) -> Result<Self> {
        let p = Self {
            a_mo,
            a_mi,
            z1_star,
            z_in_star,
            z_out_star,
        };
        p.validate()?;
        Ok(p)
    }

    /// Equal inner and outer coefficients with the default walls and magnet plane.
    pub fn symmetric(a: f64) -> Self {
        Self {
            a_mo: a,
            a_mi: a,
            z1_star: DEFAULT_Z1,
            z_in_star: DEFAULT_Z_IN,
            z_out_star: DEFAULT_Z_OUT,
        }
    }

    pub fn with_z1(mut self, z1_star: f64) -> Self {
        self.z1_star = z1_star;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_mo >= 0.0) {
            return Err(Error::param("a_mo", "must be non-negative"));
        }
        if !(self.a_mi >= 0.0) {
            return Err(Error::param("a_mi", "must be non-negative"));
        }
        let ordered = 0.0 < self.z_in_star
            && self.z_in_star < 1.0
            && 1.0 < self.z_out_star
            && self.z_out_star < self.z1_star;
        if !ordered {
            return Err(Error::param(
                "z_in_star/z_out_star/z1_star",
                "require 0 < z_in_star < 1 < z_out_star < z1_star",
            ));
        }
        Ok(())
    }

    /// True when no magnet term is present.
    pub fn is_bare_spring(&self) -> bool {
        self.a_mo == 0.0 && self.a_mi == 0.0
    }

    fn check_domain(&self, z: f64) -> Result<()> {
        if z > 0.0 && z < self.z1_star {
            Ok(())
        } else {
            Err(Error::Domain {
                z,
                lo: 0.0,
                hi: self.z1_star,
            })
        }
    }

    #[inline]
    pub(crate) fn p_raw(&self, z: f64) -> f64 {
        let gap = self.z1_star - z;
        1.0 - z + self.a_mo / (gap * gap * gap) - self.a_mi / (8.0 * z * z * z)
    }

    #[inline]
    pub(crate) fn slope_raw(&self, z: f64) -> f64 {
        let gap = self.z1_star - z;
        let g2 = gap * gap;
        let z2 = z * z;
        -1.0 + 3.0 * self.a_mo / (g2 * g2) + 3.0 * self.a_mi / (8.0 * z2 * z2)
    }
}

/// Equilibrium pressure in physical units for membrane position `z`.
pub fn pressure_dimensional(z: f64, params: &DimensionalParams) -> Result<f64> {
    if !(z > 0.0 && z < params.z1) {
        return Err(Error::Domain {
            z,
            lo: 0.0,
            hi: params.z1,
        });
    }
    let gap = params.z1 - z;
    Ok(
        params.k_e * (params.z0 - z) + params.k_mo / (gap * gap * gap)
            - params.k_mi / (8.0 * z * z * z),
    )
}

/// Scales physical constants by `k_e` and `z0`.
pub fn nondimensionalize(params: &DimensionalParams) -> Result<MagnetoElasticParams> {
    params.validate()?;
    let scale = params.k_e * params.z0.powi(4);
    MagnetoElasticParams::new(
        params.k_mo / scale,
        params.k_mi / scale,
        params.z1 / params.z0,
        params.z_in / params.z0,
        params.z_out / params.z0,
    )
}

/// Dimensionless equilibrium pressure `p*(z*)`.
pub fn pressure_star(z_star: f64, params: &MagnetoElasticParams) -> Result<f64> {
    params.check_domain(z_star)?;
    Ok(params.p_raw(z_star))
}

/// Analytic derivative `dp*/dz*`.
pub fn pressure_star_slope(z_star: f64, params: &MagnetoElasticParams) -> Result<f64> {
    params.check_domain(z_star)?;
    Ok(params.slope_raw(z_star))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryKind {
    LocalMaximum,
    LocalMinimum,
}

/// Extremum of `p*(z*)` inside `(z_in*, z1*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub z_star: f64,
    pub p_star: f64,
    pub kind: StationaryKind,
}

/// Position where `p*(z*)` equals a prescribed pressure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRoot {
    pub z_star: f64,
    /// `dp*/dz* < 0` at the root, i.e. stable under pressure control.
    pub stable: bool,
}

/// All extrema of `p*` in `(z_in*, z1*)`, ordered by position.
///
/// Only strict sign changes of the slope count, so an exactly tangent slope
/// minimum (the critical coefficient itself) yields no points.
pub fn stationary_points(params: &MagnetoElasticParams) -> Vec<StationaryPoint> {
    stationary_points_with(params, SCAN_INTERVALS)
}

pub(crate) fn stationary_points_with(
    params: &MagnetoElasticParams,
    intervals: usize,
) -> Vec<StationaryPoint> {
    if params.is_bare_spring() {
        return Vec::new();
    }
    let lo = params.z_in_star;
    let hi = params.z1_star * (1.0 - 1e-9);
    let slope = |z: f64| params.slope_raw(z);
    roots::sign_changes(&slope, lo, hi, intervals)
        .into_iter()
        .filter(|c| c.at > lo && c.at < params.z1_star)
        .map(|c| StationaryPoint {
            z_star: c.at,
            p_star: params.p_raw(c.at),
            kind: if c.rising {
                StationaryKind::LocalMinimum
            } else {
                StationaryKind::LocalMaximum
            },
        })
        .collect()
}

/// Largest equal coefficient `a` for which `p*` still has extrema, using the
/// default inner wall as the lower edge of the analysis window.
pub fn critical_coefficient(z1_star: f64) -> f64 {
    critical_coefficient_in_window(z1_star, DEFAULT_Z_IN)
}

/// `a_crit = 1 / (3 min f)` with `f(z) = 1/(z1 - z)^4 + 1/(8 z^4)` minimised over `(z_in, z1)`.
///
/// `f` is convex, so its minimiser is the closed-form stationary point
/// `z1 - z = 8^(1/5) z`, clamped to the window.
pub fn critical_coefficient_in_window(z1_star: f64, z_in_star: f64) -> f64 {
    let z = (z1_star / (1.0 + 8f64.powf(0.2))).max(z_in_star);
    let gap = z1_star - z;
    let f = 1.0 / gap.powi(4) + 1.0 / (8.0 * z.powi(4));
    1.0 / (3.0 * f)
}

/// All positions in `[z_in*, z_out*]` where the membrane balances `p_star`.
pub fn equilibria_at_pressure(p_star: f64, params: &MagnetoElasticParams) -> Vec<EquilibriumRoot> {
    equilibria_in(
        p_star,
        params,
        params.z_in_star,
        params.z_out_star,
        SCAN_INTERVALS,
    )
}

/// Roots of `p*(z) = p_star` on `[lo, hi]`, including exact zeros at either end.
pub(crate) fn equilibria_in(
    p_star: f64,
    params: &MagnetoElasticParams,
    lo: f64,
    hi: f64,
    intervals: usize,
) -> Vec<EquilibriumRoot> {
    if !(hi > lo) {
        return Vec::new();
    }
    let f = |z: f64| params.p_raw(z) - p_star;
    let mut zs: Vec<f64> = Vec::new();
    if f(lo) == 0.0 {
        zs.push(lo);
    }
    zs.extend(
        roots::sign_changes(&f, lo, hi, intervals)
            .into_iter()
            .map(|c| c.at),
    );
    if f(hi) == 0.0 {
        zs.push(hi);
    }
    zs.into_iter()
        .map(|z| EquilibriumRoot {
            z_star: z,
            stable: params.slope_raw(z) < 0.0,
        })
        .collect()
}
