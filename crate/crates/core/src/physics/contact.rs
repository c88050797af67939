//! Ground-plane contact detection and contact solver parameters.

use alloc::vec::Vec;

use super::body::RigidBody;
use crate::math::{Vec3, vec3};

/// Parameters of the iterative contact/constraint solver.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ContactParams {
    pub friction_coefficient: f64,
    /// Must stay 0: bounce is out of scope for this engine.
    pub restitution: f64,
    /// Per-step position error feedback factor.
    pub baumgarte_beta: f64,
    /// Penetration depth tolerated without positional correction, m.
    pub penetration_slop: f64,
    pub solver_iterations: u32,
}

impl Default for ContactParams {
    fn default() -> ContactParams {
        ContactParams {
            friction_coefficient: 0.8,
            restitution: 0.0,
            baumgarte_beta: 0.2,
            penetration_slop: 0.0005,
            solver_iterations: 10,
        }
    }
}

impl ContactParams {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.friction_coefficient < 0.0 {
            return Err("friction_coefficient must be >= 0");
        }
        if self.restitution != 0.0 {
            return Err("restitution must be 0");
        }
        if self.solver_iterations < 1 {
            return Err("solver_iterations must be >= 1");
        }
        if !(self.baumgarte_beta >= 0.0 && self.baumgarte_beta <= 1.0) {
            return Err("baumgarte_beta must be in [0, 1]");
        }
        if self.penetration_slop < 0.0 {
            return Err("penetration_slop must be >= 0");
        }
        Ok(())
    }
}

/// One contact of a box corner with the ground plane z = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundContact {
    /// Contact point in world coordinates (the penetrating corner).
    pub point: Vec3,
    /// How deep the corner is below the plane, m (positive).
    pub penetration: f64,
    /// Contact normal; always +z for the ground plane.
    pub normal: Vec3,
}

/// Corners of the body's box that are below the ground plane, in the fixed
/// corner enumeration order.
pub fn detect_ground_contacts(body: &RigidBody) -> Vec<GroundContact> {
    let mut contacts = Vec::new();
    for corner in body.corners_world() {
        if corner.z < 0.0 {
            contacts.push(GroundContact {
                point: corner,
                penetration: -corner.z,
                normal: vec3(0.0, 0.0, 1.0),
            });
        }
    }
    contacts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Quat;

    #[test]
    fn box_above_plane_has_no_contacts() {
        let b = RigidBody::new_box(1.0, vec3(0.1, 0.1, 0.1), vec3(0.0, 0.0, 1.0));
        assert!(detect_ground_contacts(&b).is_empty());
    }

    #[test]
    fn box_straddling_plane_touches_with_four_corners() {
        // Half-height 0.005, centered at z = 0: the 4 bottom corners sit at
        // depth 0.005.
        let b = RigidBody::new_box(1.0, vec3(0.1, 0.2, 0.01), Vec3::ZERO);
        let contacts = detect_ground_contacts(&b);
        assert_eq!(contacts.len(), 4);
        for c in &contacts {
            assert!((c.penetration - 0.005).abs() < 1e-15);
            assert_eq!(c.normal, vec3(0.0, 0.0, 1.0));
        }
    }

    #[test]
    fn rotated_box_reports_hand_computed_corners() {
        // Unit cube rotated 45 degrees about +x, center lifted to z = 0.1.
        // Corner heights become 0.1 + {-sqrt(0.5), 0, +sqrt(0.5)}; exactly
        // the two lowest corners are below the plane, at depth
        // sqrt(0.5) - 0.1.
        let mut b = RigidBody::new_box(1.0, vec3(1.0, 1.0, 1.0), vec3(0.0, 0.0, 0.1));
        b.orientation = Quat::from_axis_angle(Vec3::X, core::f64::consts::FRAC_PI_4);
        let contacts = detect_ground_contacts(&b);
        assert_eq!(contacts.len(), 2);
        let expected_depth = libm::sqrt(0.5) - 0.1;
        for c in &contacts {
            assert!(
                (c.penetration - expected_depth).abs() < 1e-12,
                "depth {}",
                c.penetration
            );
        }
        // The penetrating corners sit on the rotated bottom edge
        // (+-0.5, 0, 0.1 - sqrt(0.5)).
        for c in &contacts {
            assert!(c.point.y.abs() < 1e-12);
            assert!((c.point.x.abs() - 0.5).abs() < 1e-12);
        }
    }
}
