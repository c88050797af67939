//! Actuated revolute (hinge) joints.

use super::body::RigidBody;
use crate::math::Vec3;

/// Hinge between two bodies with a symmetric angle limit and a
/// torque-clamped position servo.
///
/// Anchors, axes and the angle reference vectors are stored in each body's
/// local frame at construction time; the joint is satisfied when the two
/// world-frame anchor points coincide and the two world-frame axes align.
#[derive(Clone, Debug, PartialEq)]
pub struct RevoluteJoint {
    pub body_a: usize,
    pub body_b: usize,
    pub anchor_a: Vec3,
    pub anchor_b: Vec3,
    pub axis_a: Vec3,
    pub axis_b: Vec3,
    /// Angle reference vectors, orthogonal to the axis in each local frame.
    pub ref_a: Vec3,
    pub ref_b: Vec3,
    /// Symmetric rotation limit in radians: the joint angle is kept in
    /// [-limit, +limit].
    pub limit: f64,
    /// Servo setpoint in radians.
    pub motor_target: f64,
    /// Torque budget of the servo; 0 disables the motor.
    pub motor_max_torque: f64,
    /// Angular speed cap of the servo drive, rad/s.
    pub motor_max_speed: f64,
}

impl RevoluteJoint {
    /// Create a hinge at the given world-space anchor and axis, measuring
    /// the joint angle as zero in the bodies' current relative pose.
    pub fn new(
        body_a: usize,
        body_b: usize,
        a: &RigidBody,
        b: &RigidBody,
        world_anchor: Vec3,
        world_axis: Vec3,
        limit: f64,
    ) -> RevoluteJoint {
        assert!(body_a != body_b, "joint must connect two distinct bodies");
        assert!(
            limit > 0.0 && limit <= core::f64::consts::FRAC_PI_2,
            "joint limit must be in (0, pi/2]"
        );
        let axis = world_axis.normalized();
        let reference = axis.any_orthonormal();
        RevoluteJoint {
            body_a,
            body_b,
            anchor_a: a.world_to_local(world_anchor),
            anchor_b: b.world_to_local(world_anchor),
            axis_a: a.orientation.conjugate().rotate(axis),
            axis_b: b.orientation.conjugate().rotate(axis),
            ref_a: a.orientation.conjugate().rotate(reference),
            ref_b: b.orientation.conjugate().rotate(reference),
            limit,
            motor_target: 0.0,
            motor_max_torque: 0.0,
            motor_max_speed: 0.0,
        }
    }

    pub fn with_motor(mut self, max_torque: f64, max_speed: f64) -> RevoluteJoint {
        assert!(max_torque >= 0.0 && max_speed >= 0.0);
        self.motor_max_torque = max_torque;
        self.motor_max_speed = max_speed;
        self
    }

    /// Signed rotation of body b relative to body a about the hinge axis.
    pub fn angle(&self, a: &RigidBody, b: &RigidBody) -> f64 {
        let n = a.orientation.rotate(self.axis_a);
        let ua = a.orientation.rotate(self.ref_a);
        let ub = b.orientation.rotate(self.ref_b);
        libm::atan2(n.dot(ua.cross(ub)), ua.dot(ub))
    }
}
