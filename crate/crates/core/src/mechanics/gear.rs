use crate::{Error, Result};

/// External spur gear mesh, given by pitch radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GearPair {
    r_in: f64,
    r_out: f64,
}

impl GearPair {
    pub fn new(r_in: f64, r_out: f64) -> Result<Self> {
        if !(r_in > 0.0 && r_out > 0.0 && r_in.is_finite() && r_out.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "gear radii must be positive, got {r_in} and {r_out}"
            )));
        }
        Ok(Self { r_in, r_out })
    }

    /// The 12.5 mm : 30 mm screwdriver drive (1 : 2.4).
    pub fn screwdriver() -> Self {
        Self {
            r_in: 0.00625,
            r_out: 0.015,
        }
    }

    pub fn r_in(&self) -> f64 {
        self.r_in
    }

    pub fn r_out(&self) -> f64 {
        self.r_out
    }

    /// Speed reduction `r_out / r_in`.
    pub fn ratio(&self) -> f64 {
        self.r_out / self.r_in
    }
}

/// Output rotation for an input rotation; an external mesh reverses direction.
pub fn gear_output(theta_in: f64, gp: &GearPair) -> f64 {
    -theta_in * (gp.r_in / gp.r_out)
}

/// Output torque of an ideal (lossless) mesh.
pub fn gear_torque(torque_in: f64, gp: &GearPair) -> f64 {
    -torque_in * (gp.r_out / gp.r_in)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn screwdriver_ratio() {
        let gp = GearPair::screwdriver();
        assert_eq!(gear_output(2.4, &gp).abs(), 1.0);
        assert_eq!(gear_output(0.0, &gp), 0.0);
        assert!(gear_output(1.0, &gp) < 0.0);
        assert!((gear_torque(1.0, &gp).abs() - 2.4).abs() < 1e-15);
        assert!((gp.ratio() - 2.4).abs() < 1e-15);
    }

    #[test]
    fn power_balance() {
        let gp = GearPair::new(0.004, 0.011).unwrap();
        let (dtheta, torque) = (0.37, 0.8);
        let p_in = dtheta * torque;
        let p_out = gear_output(dtheta, &gp) * gear_torque(torque, &gp);
        assert!((p_in - p_out).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(GearPair::new(0.0, 1.0).is_err());
        assert!(GearPair::new(1.0, f64::NAN).is_err());
    }
}
