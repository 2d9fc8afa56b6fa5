use std::f64::consts::PI;

use crate::{Error, Result};

/// Plunger-driven vacuum chamber. SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct SuctionGeometry {
    /// Chamber bore `D_v`.
    pub chamber_diameter: f64,
    /// Plunger diameter `D_p`; sets the effective area.
    pub plunger_diameter: f64,
    /// Plunger stroke `q_max`.
    pub stroke: f64,
    /// Nominal plunger rest position `q_rest`.
    pub rest: f64,
    /// Ambient pressure `P0`, Pa.
    pub ambient_pressure: f64,
}

impl SuctionGeometry {
    /// The built device at standard atmosphere.
    pub fn built() -> Self {
        Self {
            chamber_diameter: 0.021,
            plunger_diameter: 0.027,
            stroke: 0.025,
            rest: 0.005,
            ambient_pressure: 101_325.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.chamber_diameter > 0.0
            && self.plunger_diameter > 0.0
            && self.ambient_pressure > 0.0
            && self.rest > 0.0
            && self.rest < self.stroke
            && [
                self.chamber_diameter,
                self.plunger_diameter,
                self.stroke,
                self.rest,
                self.ambient_pressure,
            ]
            .iter()
            .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGeometry(format!("suction: {self:?}")))
        }
    }

    /// `A_p = pi D_p^2 / 4`.
    pub fn plunger_area(&self) -> f64 {
        PI * self.plunger_diameter * self.plunger_diameter / 4.0
    }
}

/// Chamber gauge pressure at plunger position `q`; negative is vacuum.
///
/// Uses `P0 (V0/V1 - 1)` with `V0/V1 = q_rest / (q - q_rest)`. Positions
/// below the rest position are accepted and use the same expression.
pub fn pressure_differential(q: f64, g: &SuctionGeometry) -> Result<f64> {
    if !(0.0..=g.stroke).contains(&q) {
        return Err(Error::OutOfStroke {
            value: q,
            min: 0.0,
            max: g.stroke,
        });
    }
    let expanded = q - g.rest;
    if expanded.abs() <= 1e-12 * g.stroke {
        return Err(Error::DegenerateVolume);
    }
    Ok(g.ambient_pressure * (g.rest / expanded - 1.0))
}

/// Holding force of the cup, `-A_p * dP`.
pub fn suction_force(q: f64, g: &SuctionGeometry) -> Result<f64> {
    Ok(-g.plunger_area() * pressure_differential(q, g)?)
}
