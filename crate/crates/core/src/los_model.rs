//! Closed-form probability that one of the two buildings nearest to a ground
//! user blocks the link to the ABS.
//!
//! With Rayleigh(`gamma`) building heights and elevation `theta`, a building
//! at ordinal `kappa` starts shadowing the observed street at height
//! `h_min = (kappa - 1)(S + W) tan(theta)` and shadows the whole street once
//! it reaches `h_max = h_min + S tan(theta)`. The NLOS probability is the
//! expected shadowed fraction of the street:
//!
//! ```text
//! P = gamma sqrt(pi/2) / (S tan theta) * [erf(h_max / (sqrt2 gamma)) - erf(h_min / (sqrt2 gamma))]
//! ```
//!
//! Off-axis links see projected widths `S' = S + 2 S cot(phi)` and
//! `W' = W / cos(phi)`, which replace `S` and `W` in the expressions above.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Result};
use crate::geometry::{EnvironmentParams, LinkAngles};

/// Smallest azimuth fed to the `cot` projection (degrees).
pub const AZIMUTH_FLOOR_DEG: f64 = 1.0;
/// Largest azimuth fed to the `1/cos` projection (degrees).
pub const AZIMUTH_CEILING_DEG: f64 = 89.0;

/// Which of the two nearest buildings along the look direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Neighbor {
    First,
    Second,
}

impl Neighbor {
    /// `kappa - 1`.
    fn blocks_before(self) -> f64 {
        match self {
            Neighbor::First => 0.0,
            Neighbor::Second => 1.0,
        }
    }

    pub fn kappa(self) -> u8 {
        match self {
            Neighbor::First => 1,
            Neighbor::Second => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalHeights {
    /// Lowest height at which the building shadows any of the street.
    pub min: f64,
    /// Height at which the shadow covers the full street width.
    pub max: f64,
    pub neighbor: Neighbor,
}

pub fn critical_heights(
    theta_deg: f64,
    street_width: f64,
    building_width: f64,
    neighbor: Neighbor,
) -> Result<CriticalHeights> {
    check_elevation(theta_deg)?;
    let tan = theta_deg.to_radians().tan();
    let offset = neighbor.blocks_before() * (street_width + building_width);
    Ok(CriticalHeights {
        min: offset * tan,
        max: (offset + street_width) * tan,
        neighbor,
    })
}

/// NLOS probability caused by the `neighbor` building at elevation
/// `theta_deg`, clamped to `[0, 1]`.
pub fn p_nlos_building(
    theta_deg: f64,
    street_width: f64,
    building_width: f64,
    gamma: f64,
    neighbor: Neighbor,
) -> Result<f64> {
    check_domain("gamma", gamma, gamma > 0.0, "gamma > 0")?;
    let heights = critical_heights(theta_deg, street_width, building_width, neighbor)?;
    // The prefactor uses the first building's full-shadow height for both
    // neighbors; it equals the span h_max - h_min of either one.
    let first_max = street_width * theta_deg.to_radians().tan();
    let scale = SQRT_2 * gamma;
    let raw = gamma * FRAC_PI_2.sqrt() / first_max
        * (libm::erf(heights.max / scale) - libm::erf(heights.min / scale));
    if neighbor == Neighbor::First {
        debug_assert!(raw <= 1.0 + 1e-12, "first-building NLOS probability {raw} exceeds 1");
    }
    Ok(raw.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveWidths {
    pub street: f64,
    pub building: f64,
}

/// Azimuth-projected street and building widths.
///
/// The `cot` term diverges at `phi = 0` and the `1/cos` term at `phi = 90`,
/// so each is evaluated with its own azimuth clamped away from its pole
/// ([`AZIMUTH_FLOOR_DEG`] and [`AZIMUTH_CEILING_DEG`]).
pub fn effective_widths(phi_deg: f64, street_width: f64, building_width: f64) -> Result<EffectiveWidths> {
    check_domain("phi", phi_deg, (0.0..=90.0).contains(&phi_deg), "0 <= phi <= 90 degrees")?;
    let for_street = phi_deg.max(AZIMUTH_FLOOR_DEG).to_radians();
    let for_building = phi_deg.min(AZIMUTH_CEILING_DEG).to_radians();
    Ok(EffectiveWidths {
        street: street_width + 2.0 * street_width / for_street.tan(),
        building: building_width / for_building.cos(),
    })
}

/// NLOS probability of a link with the given geometry. A user directly
/// below the ABS is always in LOS.
pub fn p_nlos_link(angles: &LinkAngles, params: &EnvironmentParams, neighbor: Neighbor) -> Result<f64> {
    if angles.theta >= 90.0 {
        return Ok(0.0);
    }
    let widths = effective_widths(angles.phi, params.street_width, params.building_width)?;
    p_nlos_building(angles.theta, widths.street, widths.building, params.gamma, neighbor)
}

fn check_elevation(theta_deg: f64) -> Result<()> {
    check_domain(
        "theta",
        theta_deg,
        theta_deg > 0.0 && theta_deg < 90.0,
        "0 < theta < 90 degrees",
    )
}
