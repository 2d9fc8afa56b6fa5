//! Analytic device models.
//!
//! All quantities are SI. Geometry files use mm and degrees in their key
//! suffixes (`d_h_mm`, `theta_min_deg`) and are converted by [`load_geometry`].

mod flicker;
mod four_bar;
mod gear;
mod suction;

use std::path::Path;

use serde::Deserialize;

pub use flicker::{
    cord_force, draw_angle, elastic_length, latch, max_stroke, pin_displacement, ratchet_positions,
    release_speed, speed_from_energy, stored_energy, striker_torque, FlickerGeometry,
};
pub use four_bar::{
    extended_crank_angle, folded_crank_angle, grashof_check, rocker_angle, rocker_limits,
    rocker_limits_for, FourBarGeometry, RockerLimits,
};
pub use gear::{gear_output, gear_torque, GearPair};
pub use suction::{pressure_differential, suction_force, SuctionGeometry};

use crate::{Error, Result};

const MM: f64 = 1e-3;

/// Any of the device geometries, as loaded from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Flicker(FlickerGeometry),
    Suction(SuctionGeometry),
    FourBar(FourBarGeometry),
    Gear(GearPair),
}

impl Geometry {
    pub fn kind(&self) -> &'static str {
        match self {
            Geometry::Flicker(_) => "flicker",
            Geometry::Suction(_) => "suction",
            Geometry::FourBar(_) => "four_bar",
            Geometry::Gear(_) => "gear",
        }
    }
}

// Read in two passes so unknown-key errors keep their line numbers, which an
// internally tagged enum would lose.
#[derive(Deserialize)]
struct KindOnly {
    kind: Kind,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum Kind {
    Flicker,
    Suction,
    FourBar,
    Gear,
}

enum GeometryFile {
    Flicker(FlickerFile),
    Suction(SuctionFile),
    FourBar(FourBarFile),
    Gear(GearFile),
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FlickerFile {
    kind: String,
    striker_length_mm: f64,
    d_h_mm: f64,
    theta_min_deg: f64,
    theta_max_deg: f64,
    d_eb_mm: f64,
    theta_eb_deg: f64,
    d_es_mm: f64,
    k_n_per_m: Option<f64>,
    l0_mm: Option<f64>,
    ratchet_levels: usize,
}

impl Default for FlickerFile {
    fn default() -> Self {
        Self {
            kind: String::new(),
            striker_length_mm: 125.0,
            d_h_mm: 53.8,
            theta_min_deg: -5.0,
            theta_max_deg: 30.0,
            d_eb_mm: 62.4,
            theta_eb_deg: -11.7,
            d_es_mm: 85.0,
            k_n_per_m: None,
            l0_mm: None,
            ratchet_levels: 5,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SuctionFile {
    kind: String,
    d_v_mm: f64,
    d_p_mm: f64,
    q_max_mm: f64,
    q_rest_mm: f64,
    p0_pa: f64,
}

impl Default for SuctionFile {
    fn default() -> Self {
        Self {
            kind: String::new(),
            d_v_mm: 21.0,
            d_p_mm: 27.0,
            q_max_mm: 25.0,
            q_rest_mm: 5.0,
            p0_pa: 101_325.0,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FourBarFile {
    kind: String,
    l1_mm: f64,
    l2_mm: f64,
    l3_mm: f64,
    l4_mm: f64,
}

impl Default for FourBarFile {
    fn default() -> Self {
        Self {
            kind: String::new(),
            l1_mm: 3.0,
            l2_mm: 32.0,
            l3_mm: 7.5,
            l4_mm: 35.5,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GearFile {
    kind: String,
    r_in_mm: f64,
    r_out_mm: f64,
}

impl Default for GearFile {
    fn default() -> Self {
        Self {
            kind: String::new(),
            r_in_mm: 6.25,
            r_out_mm: 15.0,
        }
    }
}

impl GeometryFile {
    fn parse(path: &Path, text: &str) -> Result<Self> {
        let KindOnly { kind } = crate::io::parse_config(path, text)?;
        Ok(match kind {
            Kind::Flicker => GeometryFile::Flicker(crate::io::parse_config(path, text)?),
            Kind::Suction => GeometryFile::Suction(crate::io::parse_config(path, text)?),
            Kind::FourBar => GeometryFile::FourBar(crate::io::parse_config(path, text)?),
            Kind::Gear => GeometryFile::Gear(crate::io::parse_config(path, text)?),
        })
    }

    fn into_geometry(self) -> Result<Geometry> {
        Ok(match self {
            GeometryFile::Flicker(f) => {
                let stiffness = f
                    .k_n_per_m
                    .ok_or_else(|| Error::InvalidGeometry("k_n_per_m is required".into()))?;
                let l0 = f
                    .l0_mm
                    .ok_or_else(|| Error::InvalidGeometry("l0_mm is required".into()))?;
                let g = FlickerGeometry {
                    striker_length: f.striker_length_mm * MM,
                    pin_offset: f.d_h_mm * MM,
                    theta_min: f.theta_min_deg.to_radians(),
                    theta_max: f.theta_max_deg.to_radians(),
                    base_attach_distance: f.d_eb_mm * MM,
                    base_attach_angle: f.theta_eb_deg.to_radians(),
                    striker_attach_distance: f.d_es_mm * MM,
                    stiffness,
                    relaxed_length: l0 * MM,
                    ratchet_levels: f.ratchet_levels,
                };
                g.validate()?;
                Geometry::Flicker(g)
            }
            GeometryFile::Suction(f) => {
                let g = SuctionGeometry {
                    chamber_diameter: f.d_v_mm * MM,
                    plunger_diameter: f.d_p_mm * MM,
                    stroke: f.q_max_mm * MM,
                    rest: f.q_rest_mm * MM,
                    ambient_pressure: f.p0_pa,
                };
                g.validate()?;
                Geometry::Suction(g)
            }
            GeometryFile::FourBar(f) => Geometry::FourBar(FourBarGeometry::new(
                f.l1_mm * MM,
                f.l2_mm * MM,
                f.l3_mm * MM,
                f.l4_mm * MM,
            )?),
            GeometryFile::Gear(f) => {
                Geometry::Gear(GearPair::new(f.r_in_mm * MM, f.r_out_mm * MM)?)
            }
        })
    }
}

/// Loads a geometry file. The `kind` key selects the device
/// (`flicker`, `suction`, `four_bar`, `gear`); omitted keys take the built
/// device's dimensions, except the flicker cord's `k_n_per_m` and `l0_mm`,
/// which must be given.
pub fn load_geometry(path: &Path) -> Result<Geometry> {
    let text = crate::io::read_to_string(path)?;
    GeometryFile::parse(path, &text)?.into_geometry()
}

pub fn parse_geometry(text: &str) -> Result<Geometry> {
    GeometryFile::parse(Path::new("<geometry>"), text)?.into_geometry()
}
