use crate::{Error, Result};

/// Striker, pin line and elastic cord of the flicking device. SI units.
///
/// Angles are measured from vertical. The pin travels along a line
/// `pin_offset` below the striker axis; `x = 0` is the rest position at
/// `theta_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlickerGeometry {
    /// Striker arm length `L_s`.
    pub striker_length: f64,
    /// Distance `d_h` from the striker axis to the pin line.
    pub pin_offset: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    /// Cord anchor on the base: distance `d_eb` and angle `theta_eb`.
    pub base_attach_distance: f64,
    pub base_attach_angle: f64,
    /// Cord anchor on the striker, distance `d_es` from the pivot.
    pub striker_attach_distance: f64,
    /// Cord stiffness `K`, N/m.
    pub stiffness: f64,
    /// Relaxed cord length `L0`.
    pub relaxed_length: f64,
    pub ratchet_levels: usize,
}

impl FlickerGeometry {
    /// Dimensions of the built device. The cord is a bought part whose
    /// stiffness and relaxed length have to be measured, so they are inputs.
    pub fn built(stiffness: f64, relaxed_length: f64) -> Result<Self> {
        let g = Self {
            striker_length: 0.125,
            pin_offset: 0.0538,
            theta_min: (-5.0f64).to_radians(),
            theta_max: 30.0f64.to_radians(),
            base_attach_distance: 0.0624,
            base_attach_angle: (-11.7f64).to_radians(),
            striker_attach_distance: 0.085,
            stiffness,
            relaxed_length,
            ratchet_levels: 5,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidGeometry(format!("flicker: {msg}")));
        let all = [
            self.striker_length,
            self.pin_offset,
            self.theta_min,
            self.theta_max,
            self.base_attach_distance,
            self.base_attach_angle,
            self.striker_attach_distance,
            self.stiffness,
            self.relaxed_length,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("non-finite dimension");
        }
        if self.pin_offset <= 0.0 {
            return bad("d_h must be positive");
        }
        if self.theta_min >= self.theta_max {
            return bad("theta_min must be below theta_max");
        }
        if self.theta_min.abs() >= std::f64::consts::FRAC_PI_2
            || self.theta_max.abs() >= std::f64::consts::FRAC_PI_2
        {
            return bad("draw angles must lie within (-90, 90) degrees");
        }
        if self.striker_attach_distance <= 0.0 || self.base_attach_distance <= 0.0 {
            return bad("cord attachment distances must be positive");
        }
        if self.stiffness <= 0.0 {
            return bad("K must be positive");
        }
        if self.relaxed_length < 0.0 {
            return bad("L0 must be non-negative");
        }
        if self.ratchet_levels == 0 {
            return bad("at least one ratchet level required");
        }
        Ok(())
    }

    fn rest_offset(&self) -> f64 {
        self.pin_offset * self.theta_min.tan()
    }
}

/// Pin displacement from rest at which the striker reaches `theta`.
pub fn pin_displacement(theta: f64, g: &FlickerGeometry) -> f64 {
    g.pin_offset * theta.tan() - g.rest_offset()
}

/// Full pin stroke, `x(theta_max)`.
pub fn max_stroke(g: &FlickerGeometry) -> f64 {
    pin_displacement(g.theta_max, g)
}

/// Striker draw angle for a pin displacement `x` from rest.
pub fn draw_angle(x: f64, g: &FlickerGeometry) -> Result<f64> {
    let max = max_stroke(g);
    // Allow round-off when x was itself computed from theta_max.
    let slack = 1e-12 * max.abs().max(1.0);
    if !(x >= -slack && x <= max + slack) {
        return Err(Error::OutOfStroke {
            value: x,
            min: 0.0,
            max,
        });
    }
    Ok((x + g.rest_offset()).atan2(g.pin_offset))
}

/// Cord length between its base and striker anchors (cosine rule).
pub fn elastic_length(theta_d: f64, g: &FlickerGeometry) -> f64 {
    let (a, b) = (g.striker_attach_distance, g.base_attach_distance);
    (a * a + b * b - 2.0 * a * b * (theta_d - g.base_attach_angle).cos()).sqrt()
}

/// Cord tension. A slack cord carries no load.
pub fn cord_force(theta_d: f64, g: &FlickerGeometry) -> f64 {
    (g.stiffness * (elastic_length(theta_d, g) - g.relaxed_length)).max(0.0)
}

/// Restoring torque of the cord about the striker pivot.
pub fn striker_torque(theta_d: f64, g: &FlickerGeometry) -> f64 {
    let length = elastic_length(theta_d, g);
    if length == 0.0 {
        return 0.0;
    }
    let sin_cord = g.base_attach_distance / length * (theta_d - g.base_attach_angle).sin();
    cord_force(theta_d, g) * g.striker_attach_distance * sin_cord
}

fn cord_energy(theta_d: f64, g: &FlickerGeometry) -> f64 {
    let stretch = (elastic_length(theta_d, g) - g.relaxed_length).max(0.0);
    0.5 * g.stiffness * stretch * stretch
}

/// Elastic energy stored relative to the rest angle `theta_min`.
pub fn stored_energy(theta_d: f64, g: &FlickerGeometry) -> f64 {
    cord_energy(theta_d, g) - cord_energy(g.theta_min, g)
}

/// Pin displacements of the ratchet teeth, evenly spaced up to full stroke.
pub fn ratchet_positions(g: &FlickerGeometry) -> Vec<f64> {
    let max = max_stroke(g);
    let levels = g.ratchet_levels;
    (1..=levels)
        .map(|i| max * i as f64 / levels as f64)
        .collect()
}

/// Highest ratchet level (1-based) whose tooth is at or below `x`.
pub fn latch(teeth: &[f64], x: f64) -> Option<usize> {
    teeth.iter().rposition(|&tooth| tooth <= x).map(|i| i + 1)
}

/// Striker angular speed after releasing all stored energy into an inertia
/// `inertia` (kg·m²).
pub fn release_speed(theta_d: f64, g: &FlickerGeometry, inertia: f64) -> Result<f64> {
    speed_from_energy(stored_energy(theta_d, g), inertia)
}

/// `sqrt(2 E / I)`; negative energies count as zero.
pub fn speed_from_energy(energy: f64, inertia: f64) -> Result<f64> {
    if !(inertia > 0.0 && inertia.is_finite()) {
        return Err(Error::InvalidInertia(inertia));
    }
    Ok((2.0 * energy.max(0.0) / inertia).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> FlickerGeometry {
        FlickerGeometry::built(100.0, 0.0226).unwrap()
    }

    #[test]
    fn rest_angle() {
        let g = g();
        let theta = draw_angle(0.0, &g).unwrap();
        assert!((theta.to_degrees() + 5.0).abs() < 1e-12);
    }

    #[test]
    fn full_stroke() {
        let g = g();
        let x = max_stroke(&g);
        // 53.8 * (tan 30 + tan 5) mm
        assert!((x * 1e3 - 35.768).abs() < 1e-3);
        let theta = draw_angle(0.035768, &g).unwrap();
        assert!((theta.to_degrees() - 30.0).abs() < 0.05);
        assert!(matches!(
            draw_angle(x + 1e-6, &g),
            Err(Error::OutOfStroke { .. })
        ));
        assert!(draw_angle(-1e-6, &g).is_err());
    }

    #[test]
    fn cord_lengths() {
        let g = g();
        let collinear = elastic_length(g.base_attach_angle, &g);
        assert!((collinear - 0.0226).abs() < 1e-12);
        // cosine rule at 30 deg: sqrt(85^2 + 62.4^2 - 2*85*62.4*cos(41.7 deg)) mm
        let full = elastic_length(30f64.to_radians(), &g);
        assert!((full * 1e3 - 56.56).abs() < 0.01);
    }

    #[test]
    fn torque_zero_cases() {
        let g = g();
        assert_eq!(striker_torque(g.base_attach_angle, &g), 0.0);
        let slack = FlickerGeometry {
            relaxed_length: 0.1,
            ..g.clone()
        };
        for i in 0..=20 {
            let theta = g.theta_min + (g.theta_max - g.theta_min) * i as f64 / 20.0;
            assert_eq!(striker_torque(theta, &slack), 0.0);
            assert_eq!(stored_energy(theta, &slack), 0.0);
        }
    }

    #[test]
    fn energy_closed_form() {
        let mut g = g();
        g.relaxed_length = elastic_length(g.theta_min, &g);
        assert_eq!(stored_energy(g.theta_min, &g), 0.0);
        let stretch = elastic_length(g.theta_max, &g) - elastic_length(g.theta_min, &g);
        let expected = 0.5 * 100.0 * stretch * stretch;
        assert!((stored_energy(g.theta_max, &g) - expected).abs() < 1e-15);
    }

    #[test]
    fn ratchet() {
        let g = g();
        let teeth = ratchet_positions(&g);
        assert_eq!(teeth.len(), 5);
        assert!((teeth[4] - max_stroke(&g)).abs() < 1e-15);
        assert_eq!(latch(&teeth, 0.0), None);
        assert_eq!(latch(&teeth, teeth[2] - 1e-9), Some(2));
        assert_eq!(latch(&teeth, teeth[2]), Some(3));
        assert_eq!(latch(&teeth, 1.0), Some(5));

        let e1 = stored_energy(draw_angle(teeth[0], &g).unwrap(), &g);
        let e5 = stored_energy(draw_angle(teeth[4], &g).unwrap(), &g);
        assert!(e5 > e1);
    }

    #[test]
    fn release_speeds() {
        let g = g();
        assert_eq!(release_speed(g.theta_min, &g, 1e-4).unwrap(), 0.0);
        assert!(matches!(
            release_speed(0.1, &g, 0.0),
            Err(Error::InvalidInertia(_))
        ));
        let w1 = release_speed(0.3, &g, 2e-4).unwrap();
        let w2 = release_speed(0.3, &g, 1e-4).unwrap();
        // halving inertia is the same as doubling energy
        assert!((w2 / w1 - 2f64.sqrt()).abs() < 1e-12);
        assert!((speed_from_energy(0.02, 1e-4).unwrap() - 20.0).abs() < 1e-12);
        assert!((speed_from_energy(0.04, 1e-4).unwrap() / 20.0 - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(FlickerGeometry::built(0.0, 0.02).is_err());
        assert!(FlickerGeometry::built(100.0, -0.01).is_err());
        let mut g = g();
        g.ratchet_levels = 0;
        assert!(g.validate().is_err());
    }
}
