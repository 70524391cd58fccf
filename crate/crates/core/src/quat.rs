//! Quaternion algebra on the ambient space of all quaternions.
//!
//! A quaternion is stored as an explicit scalar part and vector part so the
//! scalar/vector projections are plain field accesses. Nothing here
//! normalizes implicitly: unit norm is a property of the dynamics, not of
//! the type.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Three-vector used for angular velocity, torque and disturbance.
pub type Vec3 = nalgebra::Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    /// Scalar part.
    pub s: f64,
    /// Vector part.
    pub v: Vec3,
}

impl Quaternion {
    pub const fn new(s: f64, x: f64, y: f64, z: f64) -> Self {
        Self {
            s,
            v: Vec3::new(x, y, z),
        }
    }

    pub const fn from_parts(s: f64, v: Vec3) -> Self {
        Self { s, v }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    /// The pure quaternion identified with `v`.
    pub const fn pure(v: Vec3) -> Self {
        Self { s: 0.0, v }
    }

    /// Scalar-first array `[w, x, y, z]`.
    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.s, self.v.x, self.v.y, self.v.z]
    }

    pub fn scalar_part(&self) -> f64 {
        self.s
    }

    /// Vector part, whether or not the scalar part vanishes.
    pub fn vec(&self) -> Vec3 {
        self.v
    }

    pub fn conj(&self) -> Self {
        Self {
            s: self.s,
            v: -self.v,
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.s * self.s + self.v.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            s: self.s * k,
            v: self.v * k,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.s.is_finite() && self.v.iter().all(|c| c.is_finite())
    }

    /// Unit quaternion for a rotation of `angle` radians about `axis`.
    ///
    /// The axis is normalized; a zero axis yields the identity.
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 {
            return Self::identity();
        }
        let half = 0.5 * angle;
        Self::from_parts(half.cos(), axis * (half.sin() / n))
    }
}

/// Quaternion product `p q`.
pub fn mul(p: &Quaternion, q: &Quaternion) -> Quaternion {
    Quaternion {
        s: p.s * q.s - p.v.dot(&q.v),
        v: q.v * p.s + p.v * q.s + p.v.cross(&q.v),
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        mul(&self, &rhs)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, k: f64) -> Quaternion {
        self.scale(k)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion {
            s: self.s + rhs.s,
            v: self.v + rhs.v,
        }
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, rhs: Quaternion) {
        self.s += rhs.s;
        self.v += rhs.v;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion {
            s: self.s - rhs.s,
            v: self.v - rhs.v,
        }
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion {
            s: -self.s,
            v: -self.v,
        }
    }
}

impl Default for Quaternion {
    fn default() -> Self {
        Self::identity()
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, ({}, {}, {}))",
            self.s, self.v.x, self.v.y, self.v.z
        )
    }
}

/// Mixed absolute/relative closeness used throughout the test suites.
pub fn approx_eq(a: f64, b: f64, atol: f64, rtol: f64) -> bool {
    (a - b).abs() <= atol + rtol * a.abs().max(b.abs())
}

/// Componentwise [`approx_eq`] for quaternions.
pub fn quat_approx_eq(p: &Quaternion, q: &Quaternion, atol: f64, rtol: f64) -> bool {
    p.to_array()
        .iter()
        .zip(q.to_array().iter())
        .all(|(a, b)| approx_eq(*a, *b, atol, rtol))
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    #[test]
    fn unit_basis_relations() {
        assert_eq!(I * J, K);
        assert_eq!(J * K, I);
        assert_eq!(K * I, J);
        assert_eq!(I * J, -(J * I));
        assert_eq!(I * I, Quaternion::new(-1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn hand_expanded_product() {
        let p = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        let q = Quaternion::new(1.0, 0.0, 1.0, 0.0);
        // (1 + i)(1 + j) = 1 + j + i + k
        assert_eq!(p * q, Quaternion::new(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn conj_and_norm() {
        let q = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(q.conj(), Quaternion::new(1.0, -2.0, -3.0, -4.0));
        assert_eq!(q.conj().conj(), q);
        assert_eq!(Quaternion::new(1.0, 1.0, 1.0, 1.0).norm(), 2.0);
        assert_eq!(Quaternion::identity().norm(), 1.0);
        assert_eq!((q.conj() * q).scalar_part(), q.norm_sq());
    }

    #[test]
    fn pure_and_vec() {
        let v = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(Quaternion::pure(v), Quaternion::new(0.0, 1.0, 2.0, 3.0));
        assert_eq!(Quaternion::new(5.0, 1.0, 2.0, 3.0).vec(), v);
        assert_eq!(Quaternion::pure(v).vec(), v);
    }

    #[test]
    fn axis_angle_is_unit() {
        let q = Quaternion::from_axis_angle(Vec3::new(1.0, 2.0, -1.0), 0.7);
        assert!((q.norm() - 1.0).abs() < 1e-15);
        assert_eq!(
            Quaternion::from_axis_angle(Vec3::zeros(), 1.0),
            Quaternion::identity()
        );
    }
}
