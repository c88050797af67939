//! Minimal 3D vector / matrix / quaternion math for the physics engine.
//!
//! Hand-rolled rather than pulled from a linear-algebra crate so the exact
//! floating-point operation order is pinned down by this crate alone.

use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const fn vec3(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3 { x, y, z }
}

impl Vec3 {
    pub const ZERO: Vec3 = vec3(0.0, 0.0, 0.0);
    pub const X: Vec3 = vec3(1.0, 0.0, 0.0);
    pub const Y: Vec3 = vec3(0.0, 1.0, 0.0);
    pub const Z: Vec3 = vec3(0.0, 0.0, 1.0);

    pub fn dot(self, rhs: Vec3) -> f64 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn cross(self, rhs: Vec3) -> Vec3 {
        vec3(
            self.y * rhs.z - self.z * rhs.y,
            self.z * rhs.x - self.x * rhs.z,
            self.x * rhs.y - self.y * rhs.x,
        )
    }

    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn length(self) -> f64 {
        libm::sqrt(self.length_squared())
    }

    pub fn normalized(self) -> Vec3 {
        let len = self.length();
        debug_assert!(len > 0.0, "normalizing zero vector");
        self / len
    }

    /// Some unit vector orthogonal to `self` (which must be non-zero).
    /// Deterministic: picks the axis least aligned with `self`.
    pub fn any_orthonormal(self) -> Vec3 {
        let axis = if self.x.abs() <= self.y.abs() && self.x.abs() <= self.z.abs() {
            Vec3::X
        } else if self.y.abs() <= self.z.abs() {
            Vec3::Y
        } else {
            Vec3::Z
        };
        self.cross(axis).normalized()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        vec3(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, rhs: Vec3) {
        *self = *self + rhs;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        vec3(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, rhs: Vec3) {
        *self = *self - rhs;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        vec3(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        vec3(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        rhs * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, rhs: f64) -> Vec3 {
        vec3(self.x / rhs, self.y / rhs, self.z / rhs)
    }
}

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mat3 {
    pub rows: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const ZERO: Mat3 = Mat3 { rows: [[0.0; 3]; 3] };

    pub fn from_diagonal(d: Vec3) -> Mat3 {
        Mat3 {
            rows: [[d.x, 0.0, 0.0], [0.0, d.y, 0.0], [0.0, 0.0, d.z]],
        }
    }

    pub fn transpose(self) -> Mat3 {
        let r = self.rows;
        Mat3 {
            rows: [
                [r[0][0], r[1][0], r[2][0]],
                [r[0][1], r[1][1], r[2][1]],
                [r[0][2], r[1][2], r[2][2]],
            ],
        }
    }

    /// Skew-symmetric cross-product matrix: `skew(v) * u == v.cross(u)`.
    pub fn skew(v: Vec3) -> Mat3 {
        Mat3 {
            rows: [[0.0, -v.z, v.y], [v.z, 0.0, -v.x], [-v.y, v.x, 0.0]],
        }
    }

    pub fn inverse(self) -> Mat3 {
        let r = self.rows;
        let c00 = r[1][1] * r[2][2] - r[1][2] * r[2][1];
        let c01 = r[1][2] * r[2][0] - r[1][0] * r[2][2];
        let c02 = r[1][0] * r[2][1] - r[1][1] * r[2][0];
        let det = r[0][0] * c00 + r[0][1] * c01 + r[0][2] * c02;
        debug_assert!(det != 0.0, "inverting singular matrix");
        let inv_det = 1.0 / det;
        let c10 = r[0][2] * r[2][1] - r[0][1] * r[2][2];
        let c11 = r[0][0] * r[2][2] - r[0][2] * r[2][0];
        let c12 = r[0][1] * r[2][0] - r[0][0] * r[2][1];
        let c20 = r[0][1] * r[1][2] - r[0][2] * r[1][1];
        let c21 = r[0][2] * r[1][0] - r[0][0] * r[1][2];
        let c22 = r[0][0] * r[1][1] - r[0][1] * r[1][0];
        Mat3 {
            rows: [
                [c00 * inv_det, c10 * inv_det, c20 * inv_det],
                [c01 * inv_det, c11 * inv_det, c21 * inv_det],
                [c02 * inv_det, c12 * inv_det, c22 * inv_det],
            ],
        }
    }

    pub fn is_finite(self) -> bool {
        self.rows.iter().all(|row| row.iter().all(|v| v.is_finite()))
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        let r = self.rows;
        vec3(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }
}

impl Mul<Mat3> for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.rows[i][0] * rhs.rows[0][j]
                    + self.rows[i][1] * rhs.rows[1][j]
                    + self.rows[i][2] * rhs.rows[2][j];
            }
        }
        Mat3 { rows: out }
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, rhs: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.rows[i][j] + rhs.rows[i][j];
            }
        }
        Mat3 { rows: out }
    }
}

/// Unit quaternion, scalar-first.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Quat {
        let half = 0.5 * angle;
        let s = libm::sin(half);
        let a = axis.normalized();
        Quat {
            w: libm::cos(half),
            x: a.x * s,
            y: a.y * s,
            z: a.z * s,
        }
    }

    pub fn norm_squared(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.norm_squared())
    }

    pub fn normalized(self) -> Quat {
        let n = self.norm();
        Quat {
            w: self.w / n,
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }

    /// Renormalize only when the norm has actually drifted; keeps an exactly
    /// unmoving state bit-identical across steps.
    pub fn renormalized_if_drifted(self) -> Quat {
        if (self.norm_squared() - 1.0).abs() > 1e-12 {
            self.normalized()
        } else {
            self
        }
    }

    pub fn conjugate(self) -> Quat {
        Quat {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn mul_quat(self, r: Quat) -> Quat {
        Quat {
            w: self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            x: self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            y: self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            z: self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        }
    }

    pub fn rotate(self, v: Vec3) -> Vec3 {
        // q * (0, v) * q^-1 expanded via the two-cross-product form.
        let u = vec3(self.x, self.y, self.z);
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }

    pub fn to_matrix(self) -> Mat3 {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Mat3 {
            rows: [
                [
                    1.0 - 2.0 * (y * y + z * z),
                    2.0 * (x * y - w * z),
                    2.0 * (x * z + w * y),
                ],
                [
                    2.0 * (x * y + w * z),
                    1.0 - 2.0 * (x * x + z * z),
                    2.0 * (y * z - w * x),
                ],
                [
                    2.0 * (x * z - w * y),
                    2.0 * (y * z + w * x),
                    1.0 - 2.0 * (x * x + y * y),
                ],
            ],
        }
    }

    /// One explicit-Euler step of the kinematic equation
    /// `q' = q + dt/2 * (0, omega) * q`, followed by lazy renormalization.
    pub fn integrate(self, omega: Vec3, dt: f64) -> Quat {
        if omega == Vec3::ZERO {
            return self;
        }
        let dq = Quat {
            w: 0.0,
            x: omega.x,
            y: omega.y,
            z: omega.z,
        }
        .mul_quat(self);
        let half_dt = 0.5 * dt;
        Quat {
            w: self.w + dq.w * half_dt,
            x: self.x + dq.x * half_dt,
            y: self.y + dq.y * half_dt,
            z: self.z + dq.z * half_dt,
        }
        .renormalized_if_drifted()
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn cross_follows_right_hand_rule() {
        let c = Vec3::X.cross(Vec3::Y);
        approx(c.z, 1.0, 1e-15);
        approx(c.x, 0.0, 1e-15);
    }

    #[test]
    fn mat3_inverse_roundtrip() {
        let m = Mat3 {
            rows: [[2.0, 1.0, 0.5], [0.0, 3.0, -1.0], [1.0, 0.0, 4.0]],
        };
        let p = m * m.inverse();
        for i in 0..3 {
            for j in 0..3 {
                approx(p.rows[i][j], if i == j { 1.0 } else { 0.0 }, 1e-12);
            }
        }
    }

    #[test]
    fn quat_rotation_matches_matrix() {
        let q = Quat::from_axis_angle(vec3(1.0, 2.0, -0.5), 0.7);
        let v = vec3(0.3, -1.1, 2.2);
        let a = q.rotate(v);
        let b = q.to_matrix() * v;
        approx(a.x, b.x, 1e-12);
        approx(a.y, b.y, 1e-12);
        approx(a.z, b.z, 1e-12);
    }

    #[test]
    fn quat_rotation_about_y() {
        // 90 degrees about +y maps +x to -z.
        let q = Quat::from_axis_angle(Vec3::Y, core::f64::consts::FRAC_PI_2);
        let v = q.rotate(Vec3::X);
        approx(v.x, 0.0, 1e-12);
        approx(v.z, -1.0, 1e-12);
    }

    #[test]
    fn skew_matrix_is_cross_product() {
        let a = vec3(1.0, -2.0, 0.5);
        let b = vec3(0.3, 4.0, -1.0);
        let c1 = Mat3::skew(a) * b;
        let c2 = a.cross(b);
        approx(c1.x, c2.x, 1e-15);
        approx(c1.y, c2.y, 1e-15);
        approx(c1.z, c2.z, 1e-15);
    }

    #[test]
    fn integrate_zero_omega_is_identity_op() {
        let q = Quat::from_axis_angle(vec3(0.2, 1.0, 0.4), 1.3);
        let q2 = q.integrate(Vec3::ZERO, 0.005);
        assert_eq!(q.w.to_bits(), q2.w.to_bits());
        assert_eq!(q.x.to_bits(), q2.x.to_bits());
        assert_eq!(q.y.to_bits(), q2.y.to_bits());
        assert_eq!(q.z.to_bits(), q2.z.to_bits());
    }

    #[test]
    fn any_orthonormal_is_orthogonal_unit() {
        for v in [vec3(1.0, 0.0, 0.0), vec3(0.1, -3.0, 0.2), vec3(0.0, 0.0, -2.0)] {
            let o = v.any_orthonormal();
            approx(o.dot(v), 0.0, 1e-12);
            approx(o.length(), 1.0, 1e-12);
        }
    }
}
