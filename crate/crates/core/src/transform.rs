//! Rigid-plus-scale transforms recovered by registration.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Similarity transform `p -> scale * rotation * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimTransform<F: Real = f64> {
    pub scale: F,
    pub rotation: [[F; 3]; 3],
    pub translation: [F; 3],
}

impl<F: Real> Default for SimTransform<F> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<F: Real> SimTransform<F> {
    pub fn identity() -> Self {
        SimTransform {
            scale: F::one(),
            rotation: [
                [F::one(), F::zero(), F::zero()],
                [F::zero(), F::one(), F::zero()],
                [F::zero(), F::zero(), F::one()],
            ],
            translation: [F::zero(); 3],
        }
    }

    pub fn new(scale: F, rotation: Matrix3<F>, translation: Vector3<F>) -> Self {
        let mut r = [[F::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = rotation[(i, j)];
            }
        }
        SimTransform {
            scale,
            rotation: r,
            translation: [translation.x, translation.y, translation.z],
        }
    }

    /// Rotation about the z axis, counter-clockwise, in degrees.
    pub fn rotation_z_deg(angle_deg: F) -> Self {
        let a = angle_deg * F::pi() / F::of(180.0);
        let (s, c) = (a.sin(), a.cos());
        let mut t = Self::identity();
        t.rotation = [
            [c, -s, F::zero()],
            [s, c, F::zero()],
            [F::zero(), F::zero(), F::one()],
        ];
        t
    }

    pub fn rotation_matrix(&self) -> Matrix3<F> {
        Matrix3::from_fn(|i, j| self.rotation[i][j])
    }

    pub fn translation_vector(&self) -> Vector3<F> {
        Vector3::new(self.translation[0], self.translation[1], self.translation[2])
    }

    pub fn apply(&self, p: &Vector3<F>) -> Vector3<F> {
        self.rotation_matrix() * p * self.scale + self.translation_vector()
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &SimTransform<F>) -> SimTransform<F> {
        let r = self.rotation_matrix() * other.rotation_matrix();
        let t = self.rotation_matrix() * other.translation_vector() * self.scale
            + self.translation_vector();
        SimTransform::new(self.scale * other.scale, r, t)
    }

    pub fn inverse(&self) -> SimTransform<F> {
        let rt = self.rotation_matrix().transpose();
        let s = F::one() / self.scale;
        let t = -(rt * self.translation_vector()) * s;
        SimTransform::new(s, rt, t)
    }

    /// Max-norm of `R^T R - I`.
    pub fn orthogonality_error(&self) -> F {
        let r = self.rotation_matrix();
        let e = r.transpose() * r - Matrix3::identity();
        let mut m = F::zero();
        for i in 0..3 {
            for j in 0..3 {
                if e[(i, j)].abs() > m {
                    m = e[(i, j)].abs();
                }
            }
        }
        m
    }

    pub fn validate(&self) -> Result<()> {
        let tol = F::of(1e-9);
        if self.orthogonality_error() > tol {
            return Err(Error::invalid("rotation is not orthogonal within 1e-9"));
        }
        if (self.rotation_matrix().determinant() - F::one()).abs() > tol {
            return Err(Error::invalid("rotation determinant is not +1 within 1e-9"));
        }
        if !(self.scale > F::zero()) {
            return Err(Error::invalid("scale must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn apply_and_inverse_roundtrip() {
        let t: SimTransform = SimTransform::new(
            1.3,
            SimTransform::rotation_z_deg(37.0).rotation_matrix(),
            Vector3::new(1.0, -2.0, 0.5),
        );
        let p = Vector3::new(0.3, 0.7, 1.1);
        let q = t.inverse().apply(&t.apply(&p));
        assert_relative_eq!((q - p).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn compose_matches_sequential_application() {
        let a: SimTransform = SimTransform::new(
            0.9,
            SimTransform::rotation_z_deg(20.0).rotation_matrix(),
            Vector3::new(1.0, 0.0, 2.0),
        );
        let b: SimTransform = SimTransform::new(
            1.4,
            SimTransform::rotation_z_deg(-50.0).rotation_matrix(),
            Vector3::new(-0.4, 0.6, 0.0),
        );
        let p = Vector3::new(2.0, 3.0, -1.0);
        let ab = a.compose(&b);
        assert_relative_eq!((ab.apply(&p) - a.apply(&b.apply(&p))).norm(), 0.0, epsilon = 1e-12);
        assert!(ab.validate().is_ok());
    }
}
