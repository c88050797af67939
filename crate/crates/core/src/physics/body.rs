//! Rigid bodies with box collision shapes, maximal coordinates.

use crate::math::{vec3, Mat3, Quat, Vec3};

#[derive(Clone, Debug, PartialEq)]
pub struct RigidBody {
    pub mass: f64,
    /// Body-frame inertia tensor (symmetric positive definite).
    pub inertia_body: Mat3,
    pub inv_mass: f64,
    pub inv_inertia_body: Mat3,
    pub position: Vec3,
    pub orientation: Quat,
    pub linear_velocity: Vec3,
    pub angular_velocity: Vec3,
    /// Box collision half extents.
    pub half_extents: Vec3,
    /// External force/torque accumulators, consumed and cleared by each step.
    pub force: Vec3,
    pub torque: Vec3,
}

impl RigidBody {
    /// Uniform-density box. `dims` are full extents.
    pub fn new_box(mass: f64, dims: Vec3, position: Vec3) -> RigidBody {
        assert!(mass > 0.0, "body mass must be positive");
        assert!(
            dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0,
            "box dims must be positive"
        );
        let ix = mass / 12.0 * (dims.y * dims.y + dims.z * dims.z);
        let iy = mass / 12.0 * (dims.x * dims.x + dims.z * dims.z);
        let iz = mass / 12.0 * (dims.x * dims.x + dims.y * dims.y);
        RigidBody {
            mass,
            inertia_body: Mat3::from_diagonal(vec3(ix, iy, iz)),
            inv_mass: 1.0 / mass,
            inv_inertia_body: Mat3::from_diagonal(vec3(1.0 / ix, 1.0 / iy, 1.0 / iz)),
            position,
            orientation: Quat::IDENTITY,
            linear_velocity: Vec3::ZERO,
            angular_velocity: Vec3::ZERO,
            half_extents: dims * 0.5,
            force: Vec3::ZERO,
            torque: Vec3::ZERO,
        }
    }

    pub fn rotation(&self) -> Mat3 {
        self.orientation.to_matrix()
    }

    /// World-frame inverse inertia: R * I_body^-1 * R^T.
    pub fn inv_inertia_world(&self) -> Mat3 {
        let r = self.rotation();
        r * self.inv_inertia_body * r.transpose()
    }

    /// World-frame inertia: R * I_body * R^T.
    pub fn inertia_world(&self) -> Mat3 {
        let r = self.rotation();
        r * self.inertia_body * r.transpose()
    }

    /// Velocity of a material point at world offset `r` from the center of mass.
    pub fn velocity_at(&self, r: Vec3) -> Vec3 {
        self.linear_velocity + self.angular_velocity.cross(r)
    }

    pub fn local_to_world(&self, local: Vec3) -> Vec3 {
        self.position + self.orientation.rotate(local)
    }

    pub fn world_to_local(&self, world: Vec3) -> Vec3 {
        self.orientation.conjugate().rotate(world - self.position)
    }

    /// Accumulate an external force (applied at the center of mass) for the
    /// next step.
    pub fn apply_force(&mut self, f: Vec3) {
        self.force += f;
    }

    pub fn apply_torque(&mut self, t: Vec3) {
        self.torque += t;
    }

    /// The 8 box corners in world coordinates, fixed enumeration order.
    pub fn corners_world(&self) -> [Vec3; 8] {
        let h = self.half_extents;
        let mut out = [Vec3::ZERO; 8];
        for (i, corner) in out.iter_mut().enumerate() {
            let local = vec3(
                if i & 1 == 0 { -h.x } else { h.x },
                if i & 2 == 0 { -h.y } else { h.y },
                if i & 4 == 0 { -h.z } else { h.z },
            );
            *corner = self.local_to_world(local);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite()
            && self.orientation.is_finite()
            && self.linear_velocity.is_finite()
            && self.angular_velocity.is_finite()
    }
}
