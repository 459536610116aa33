use std::ops::Mul;

use crate::error::{Error, Result};

/// Paraxial ray-transfer matrix acting on `(height, angle)` with an affine
/// offset.
///
/// The offset carries prism-like deflection: a thin deflector adds a
/// constant `angle_offset`, and propagating that kick through later
/// elements accumulates a `height_offset` as well. The linear part always
/// has unit determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayTransferMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub height_offset: f64,
    pub angle_offset: f64,
}

impl RayTransferMatrix {
    pub const IDENTITY: RayTransferMatrix = RayTransferMatrix {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
        height_offset: 0.0,
        angle_offset: 0.0,
    };

    /// Free-space propagation over `distance` metres.
    pub fn propagation(distance: f64) -> Result<Self> {
        if !(distance >= 0.0) || !distance.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "propagation distance must be finite and non-negative, got {distance}"
            )));
        }
        Ok(Self {
            b: distance,
            ..Self::IDENTITY
        })
    }

    /// Thin element of optical power `power` (m⁻¹) with a constant angular
    /// kick `deflection` (radians).
    pub fn thin_element(power: f64, deflection: f64) -> Self {
        Self {
            c: -power,
            angle_offset: deflection,
            ..Self::IDENTITY
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Map a ray `(height, angle)` through the element.
    pub fn apply(&self, height: f64, angle: f64) -> (f64, f64) {
        (
            self.a * height + self.b * angle + self.height_offset,
            self.c * height + self.d * angle + self.angle_offset,
        )
    }

    /// `self` followed by `next` (i.e. `next * self`).
    pub fn then(&self, next: &RayTransferMatrix) -> RayTransferMatrix {
        *next * *self
    }
}

/// Matrix product in composition order: `(lhs * rhs)` applies `rhs` first.
impl Mul for RayTransferMatrix {
    type Output = RayTransferMatrix;

    fn mul(self, rhs: RayTransferMatrix) -> RayTransferMatrix {
        let (ho, ao) = self.apply(rhs.height_offset, rhs.angle_offset);
        RayTransferMatrix {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
            height_offset: ho,
            angle_offset: ao,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_propagation_is_identity() {
        assert_eq!(
            RayTransferMatrix::propagation(0.0).unwrap(),
            RayTransferMatrix::IDENTITY
        );
    }

    #[test]
    fn propagation_entries() {
        let p = RayTransferMatrix::propagation(0.005).unwrap();
        assert_eq!((p.a, p.b, p.c, p.d), (1.0, 0.005, 0.0, 1.0));
        assert_eq!(p.angle_offset, 0.0);
    }

    #[test]
    fn negative_distance_rejected() {
        assert!(RayTransferMatrix::propagation(-1e-3).is_err());
        assert!(RayTransferMatrix::propagation(f64::NAN).is_err());
    }

    #[test]
    fn thin_element_entries() {
        assert_eq!(
            RayTransferMatrix::thin_element(0.0, 0.0),
            RayTransferMatrix::IDENTITY
        );
        let e = RayTransferMatrix::thin_element(100.0, 0.0);
        assert_eq!((e.a, e.b, e.c, e.d), (1.0, 0.0, -100.0, 1.0));
        assert_eq!(RayTransferMatrix::thin_element(20.0, 0.0).c, -20.0);
    }

    #[test]
    fn deflection_propagates_into_height_offset() {
        let kick = RayTransferMatrix::thin_element(0.0, 0.1);
        let p = RayTransferMatrix::propagation(0.01).unwrap();
        let m = kick.then(&p);
        let (h, u) = m.apply(0.0, 0.0);
        assert!((h - 0.001).abs() < 1e-15);
        assert!((u - 0.1).abs() < 1e-15);
    }

    #[test]
    fn lens_two_f_conjugate() {
        let lens = RayTransferMatrix::thin_element(100.0, 0.0);
        let s = lens.then(&RayTransferMatrix::propagation(0.02).unwrap());
        assert_eq!((s.a, s.b, s.c, s.d), (-1.0, 0.02, -100.0, 1.0));
    }
}
