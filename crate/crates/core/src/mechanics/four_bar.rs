//! Crank-rocker driving the moving scissor blade.
//!
//! Frame: crank pivot at the origin, rocker pivot at `(l4, 0)`. The crank
//! angle is measured from the ground line towards the rocker pivot. The rocker
//! angle is the interior angle at the rocker pivot between the ground line
//! (pointing back at the crank pivot) and the rocker, with the coupler joint
//! on the upper side of the ground line.

use std::f64::consts::PI;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourBarGeometry {
    crank: f64,
    coupler: f64,
    rocker: f64,
    ground: f64,
}

impl FourBarGeometry {
    /// Checks positivity and the Grashof crank-rocker condition.
    pub fn new(crank: f64, coupler: f64, rocker: f64, ground: f64) -> Result<Self> {
        let links = [crank, coupler, rocker, ground];
        if links.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidGeometry(format!(
                "four-bar links must be positive: {links:?}"
            )));
        }
        if !grashof_check(crank, coupler, rocker, ground) {
            return Err(Error::InvalidGeometry(format!(
                "links {links:?} do not form a Grashof crank-rocker"
            )));
        }
        Ok(Self {
            crank,
            coupler,
            rocker,
            ground,
        })
    }

    /// The scissor linkage as built: 3, 32, 7.5 and 35.5 mm.
    pub fn scissors() -> Self {
        Self::new(0.003, 0.032, 0.0075, 0.0355).expect("built linkage is a crank-rocker")
    }

    pub fn crank(&self) -> f64 {
        self.crank
    }

    pub fn coupler(&self) -> f64 {
        self.coupler
    }

    pub fn rocker(&self) -> f64 {
        self.rocker
    }

    pub fn ground(&self) -> f64 {
        self.ground
    }
}

/// True when the crank `l1` is the shortest link and
/// shortest + longest <= sum of the other two.
pub fn grashof_check(l1: f64, l2: f64, l3: f64, l4: f64) -> bool {
    let links = [l1, l2, l3, l4];
    let shortest = links.iter().copied().fold(f64::INFINITY, f64::min);
    let longest = links.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = links.iter().sum();
    l1 <= shortest && shortest + longest <= total - shortest - longest
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RockerLimits {
    pub min: f64,
    pub max: f64,
    /// `max - min`.
    pub range: f64,
}

fn cosine_rule_angle(adjacent_a: f64, adjacent_b: f64, opposite: f64) -> Result<f64> {
    let c = (adjacent_a * adjacent_a + adjacent_b * adjacent_b - opposite * opposite)
        / (2.0 * adjacent_a * adjacent_b);
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::LinkageInfeasible(format!(
            "cosine {c} outside [-1, 1]"
        )));
    }
    Ok(c.acos())
}

/// Rocker extremes from raw link lengths. The extended toggle (crank and
/// coupler in line, `l1 + l2`) gives the maximum, the folded one
/// (`|l1 - l2|`) the minimum.
pub fn rocker_limits_for(l1: f64, l2: f64, l3: f64, l4: f64) -> Result<RockerLimits> {
    let max = cosine_rule_angle(l3, l4, l1 + l2)?;
    let min = cosine_rule_angle(l3, l4, l1 - l2)?;
    Ok(RockerLimits {
        min,
        max,
        range: max - min,
    })
}

pub fn rocker_limits(g: &FourBarGeometry) -> Result<RockerLimits> {
    rocker_limits_for(g.crank, g.coupler, g.rocker, g.ground)
}

/// Rocker angle for a crank angle, from the vector-loop closure.
///
/// With the crank tip `A`, the triangle rocker pivot / `A` / coupler joint
/// has sides `l3`, `|A - O4|`, `l2`; the rocker angle is the direction of
/// `A` seen from the rocker pivot plus that triangle's angle at the pivot.
/// Taking the `+` solution keeps the coupler joint above the ground line,
/// which is one continuous assembly branch for a crank-rocker.
pub fn rocker_angle(crank_angle: f64, g: &FourBarGeometry) -> Result<f64> {
    let (ax, ay) = (g.crank * crank_angle.cos(), g.crank * crank_angle.sin());
    let (dx, dy) = (g.ground - ax, ay);
    let pivot_to_crank = dx.hypot(dy);
    let direction = dy.atan2(dx);
    let spread = cosine_rule_angle(g.rocker, pivot_to_crank, g.coupler)?;
    Ok(direction + spread)
}

fn joint_at(rocker_angle: f64, g: &FourBarGeometry) -> (f64, f64) {
    (
        g.ground - g.rocker * rocker_angle.cos(),
        g.rocker * rocker_angle.sin(),
    )
}

/// Crank angle of the extended toggle, where the rocker is at its maximum.
pub fn extended_crank_angle(g: &FourBarGeometry) -> Result<f64> {
    let limits = rocker_limits(g)?;
    let (bx, by) = joint_at(limits.max, g);
    Ok(by.atan2(bx))
}

/// Crank angle of the folded toggle, where the rocker is at its minimum.
pub fn folded_crank_angle(g: &FourBarGeometry) -> Result<f64> {
    let limits = rocker_limits(g)?;
    let (bx, by) = joint_at(limits.min, g);
    Ok(by.atan2(bx) + PI)
}
