//! Sequential-impulse constraint rows for joints and ground contacts.
//!
//! All effective masses and position-error biases are prepared once per
//! step (poses are frozen during the velocity solve); the per-iteration
//! passes then only read/write velocities, in a fixed order.

use alloc::vec::Vec;

use super::body::RigidBody;
use super::contact::detect_ground_contacts;
use super::joint::RevoluteJoint;
use crate::math::{vec3, Mat3, Vec3};

fn two_mut(bodies: &mut [RigidBody], a: usize, b: usize) -> (&mut RigidBody, &mut RigidBody) {
    debug_assert!(a != b);
    if a < b {
        let (lo, hi) = bodies.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = bodies.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

pub(super) struct JointSolve {
    a: usize,
    b: usize,
    arm_a: Vec3,
    arm_b: Vec3,
    inv_k_point: Mat3,
    bias_point: Vec3,
    axis: Vec3,
    tangent_p: Vec3,
    tangent_q: Vec3,
    inv_k_axes: [[f64; 2]; 2],
    bias_axes: [f64; 2],
    inv_k_axial: f64,
    motor_active: bool,
    motor_target_velocity: f64,
    motor_impulse_cap: f64,
    motor_impulse: f64,
    /// Axial relative velocity may not exceed this (speculative upper stop).
    upper_velocity_cap: f64,
    /// ... and may not fall below this (lower stop).
    lower_velocity_cap: f64,
    upper_impulse: f64,
    lower_impulse: f64,
}

pub(super) fn prepare_joint(
    bodies: &[RigidBody],
    inv_inertia: &[Mat3],
    joint: &RevoluteJoint,
    dt: f64,
    beta_over_dt: f64,
) -> JointSolve {
    let a = &bodies[joint.body_a];
    let b = &bodies[joint.body_b];
    let ii_a = inv_inertia[joint.body_a];
    let ii_b = inv_inertia[joint.body_b];

    let arm_a = a.orientation.rotate(joint.anchor_a);
    let arm_b = b.orientation.rotate(joint.anchor_b);

    // Point-coincidence block.
    let inv_mass_sum = a.inv_mass + b.inv_mass;
    let sa = Mat3::skew(arm_a);
    let sb = Mat3::skew(arm_b);
    // K = (1/ma + 1/mb) I - [ra] Ia^-1 [ra] - [rb] Ib^-1 [rb]
    let mut k = Mat3::from_diagonal(vec3(inv_mass_sum, inv_mass_sum, inv_mass_sum));
    let ka = sa * ii_a * sa;
    let kb = sb * ii_b * sb;
    for i in 0..3 {
        for j in 0..3 {
            k.rows[i][j] -= ka.rows[i][j] + kb.rows[i][j];
        }
    }
    let position_error = (b.position + arm_b) - (a.position + arm_a);
    let bias_point = position_error * -beta_over_dt;

    // Axis-alignment block on the plane orthogonal to the hinge axis.
    let axis = a.orientation.rotate(joint.axis_a);
    let axis_b = b.orientation.rotate(joint.axis_b);
    let tangent_p = axis.any_orthonormal();
    let tangent_q = axis.cross(tangent_p);
    let ii_sum = ii_a + ii_b;
    let kpp = tangent_p.dot(ii_sum * tangent_p);
    let kpq = tangent_p.dot(ii_sum * tangent_q);
    let kqq = tangent_q.dot(ii_sum * tangent_q);
    let det = kpp * kqq - kpq * kpq;
    let inv_k_axes = if det != 0.0 {
        [
            [kqq / det, -kpq / det],
            [-kpq / det, kpp / det],
        ]
    } else {
        [[0.0; 2]; 2]
    };
    // Small-angle rotation vector taking axis_b onto axis (= axis_b x axis):
    // the bias drives the relative angular velocity to shrink it.
    let misalignment = axis_b.cross(axis);
    let bias_axes = [
        beta_over_dt * tangent_p.dot(misalignment),
        beta_over_dt * tangent_q.dot(misalignment),
    ];

    let k_axial = axis.dot(ii_sum * axis);
    let inv_k_axial = if k_axial != 0.0 { 1.0 / k_axial } else { 0.0 };

    let angle = joint.angle(a, b);
    let motor_active = joint.motor_max_torque > 0.0;
    let motor_target_velocity = if motor_active {
        let unclamped = (joint.motor_target - angle) / dt;
        unclamped.clamp(-joint.motor_max_speed, joint.motor_max_speed)
    } else {
        0.0
    };

    // Speculative stops: while inside the limit the joint may approach it no
    // faster than it can cover the remaining angle this step; beyond the
    // limit the stop pushes back with Baumgarte feedback.
    let upper_velocity_cap = if angle <= joint.limit {
        (joint.limit - angle) / dt
    } else {
        -beta_over_dt * (angle - joint.limit)
    };
    let lower_velocity_cap = if angle >= -joint.limit {
        (-joint.limit - angle) / dt
    } else {
        -beta_over_dt * (angle + joint.limit)
    };

    JointSolve {
        a: joint.body_a,
        b: joint.body_b,
        arm_a,
        arm_b,
        inv_k_point: k.inverse(),
        bias_point,
        axis,
        tangent_p,
        tangent_q,
        inv_k_axes,
        bias_axes,
        inv_k_axial,
        motor_active,
        motor_target_velocity,
        motor_impulse_cap: joint.motor_max_torque * dt,
        motor_impulse: 0.0,
        upper_velocity_cap,
        lower_velocity_cap,
        upper_impulse: 0.0,
        lower_impulse: 0.0,
    }
}

impl JointSolve {
    fn apply_angular(
        &self,
        bodies: &mut [RigidBody],
        inv_inertia: &[Mat3],
        angular_impulse: Vec3,
    ) {
        let (body_a, body_b) = two_mut(bodies, self.a, self.b);
        body_a.angular_velocity -= inv_inertia[self.a] * angular_impulse;
        body_b.angular_velocity += inv_inertia[self.b] * angular_impulse;
    }

    fn axial_velocity(&self, bodies: &[RigidBody]) -> f64 {
        self.axis
            .dot(bodies[self.b].angular_velocity - bodies[self.a].angular_velocity)
    }

    pub(super) fn solve(&mut self, bodies: &mut [RigidBody], inv_inertia: &[Mat3]) {
        // Axis alignment (2 angular rows solved as a block).
        {
            let rel = bodies[self.b].angular_velocity - bodies[self.a].angular_velocity;
            let cp = self.tangent_p.dot(rel);
            let cq = self.tangent_q.dot(rel);
            let rhs = [self.bias_axes[0] - cp, self.bias_axes[1] - cq];
            let lp = self.inv_k_axes[0][0] * rhs[0] + self.inv_k_axes[0][1] * rhs[1];
            let lq = self.inv_k_axes[1][0] * rhs[0] + self.inv_k_axes[1][1] * rhs[1];
            self.apply_angular(
                bodies,
                inv_inertia,
                self.tangent_p * lp + self.tangent_q * lq,
            );
        }

        // Point coincidence (3 rows solved as a block).
        {
            let vel_b = bodies[self.b].velocity_at(self.arm_b);
            let vel_a = bodies[self.a].velocity_at(self.arm_a);
            let impulse = self.inv_k_point * (self.bias_point - (vel_b - vel_a));
            let (body_a, body_b) = two_mut(bodies, self.a, self.b);
            body_a.linear_velocity -= impulse * body_a.inv_mass;
            body_a.angular_velocity -= inv_inertia[self.a] * self.arm_a.cross(impulse);
            body_b.linear_velocity += impulse * body_b.inv_mass;
            body_b.angular_velocity += inv_inertia[self.b] * self.arm_b.cross(impulse);
        }

        // Motor: velocity row along the axis, impulse capped by the torque
        // budget accumulated over the step.
        if self.motor_active {
            let rel = self.axial_velocity(bodies);
            let delta = (self.motor_target_velocity - rel) * self.inv_k_axial;
            let old = self.motor_impulse;
            self.motor_impulse =
                (old + delta).clamp(-self.motor_impulse_cap, self.motor_impulse_cap);
            let applied = self.motor_impulse - old;
            if applied != 0.0 {
                self.apply_angular(bodies, inv_inertia, self.axis * applied);
            }
        }

        self.solve_stops(bodies, inv_inertia);
    }

    /// Angle stops, one-sided accumulated impulses. Solved at the end of
    /// every joint pass and again in the settle sweeps after the main loop,
    /// so no other row gets to push a joint past its limit unanswered.
    pub(super) fn solve_stops(&mut self, bodies: &mut [RigidBody], inv_inertia: &[Mat3]) {
        {
            let rel = self.axial_velocity(bodies);
            let delta = (self.upper_velocity_cap - rel) * self.inv_k_axial;
            let old = self.upper_impulse;
            self.upper_impulse = (old + delta).min(0.0);
            let applied = self.upper_impulse - old;
            if applied != 0.0 {
                self.apply_angular(bodies, inv_inertia, self.axis * applied);
            }
        }
        {
            let rel = self.axial_velocity(bodies);
            let delta = (self.lower_velocity_cap - rel) * self.inv_k_axial;
            let old = self.lower_impulse;
            self.lower_impulse = (old + delta).max(0.0);
            let applied = self.lower_impulse - old;
            if applied != 0.0 {
                self.apply_angular(bodies, inv_inertia, self.axis * applied);
            }
        }
    }
}

pub(super) struct ContactSolve {
    body: usize,
    arm: Vec3,
    inv_k_normal: f64,
    inv_k_t1: f64,
    inv_k_t2: f64,
    bias: f64,
    pub(super) normal_impulse: f64,
    t1_impulse: f64,
    t2_impulse: f64,
}

const NORMAL: Vec3 = vec3(0.0, 0.0, 1.0);
const TANGENT_1: Vec3 = vec3(1.0, 0.0, 0.0);
const TANGENT_2: Vec3 = vec3(0.0, 1.0, 0.0);

fn row_inv_mass(body: &RigidBody, inv_inertia: Mat3, arm: Vec3, dir: Vec3) -> f64 {
    let rn = arm.cross(dir);
    let k = body.inv_mass + rn.dot(inv_inertia * rn);
    if k != 0.0 {
        1.0 / k
    } else {
        0.0
    }
}

/// Detect ground contacts for every body and prepare solver rows.
pub(super) fn prepare_contacts(
    bodies: &[RigidBody],
    inv_inertia: &[Mat3],
    slop: f64,
    beta_over_dt: f64,
) -> Vec<ContactSolve> {
    let mut out = Vec::new();
    for (index, body) in bodies.iter().enumerate() {
        for contact in detect_ground_contacts(body) {
            let arm = contact.point - body.position;
            out.push(ContactSolve {
                body: index,
                arm,
                inv_k_normal: row_inv_mass(body, inv_inertia[index], arm, NORMAL),
                inv_k_t1: row_inv_mass(body, inv_inertia[index], arm, TANGENT_1),
                inv_k_t2: row_inv_mass(body, inv_inertia[index], arm, TANGENT_2),
                bias: beta_over_dt * (contact.penetration - slop).max(0.0),
                normal_impulse: 0.0,
                t1_impulse: 0.0,
                t2_impulse: 0.0,
            });
        }
    }
    out
}

impl ContactSolve {
    pub(super) fn body_index(&self) -> usize {
        self.body
    }

    pub(super) fn solve(&mut self, bodies: &mut [RigidBody], inv_inertia: &[Mat3], friction: f64) {
        let inv_inertia = inv_inertia[self.body];
        let body = &mut bodies[self.body];

        // Non-penetration along +z, accumulated impulse kept non-negative.
        let v_n = body.velocity_at(self.arm).dot(NORMAL);
        let delta = (self.bias - v_n) * self.inv_k_normal;
        let old = self.normal_impulse;
        self.normal_impulse = (old + delta).max(0.0);
        let applied = self.normal_impulse - old;
        if applied != 0.0 {
            let impulse = NORMAL * applied;
            body.linear_velocity += impulse * body.inv_mass;
            body.angular_velocity += inv_inertia * self.arm.cross(impulse);
        }

        // Coulomb friction in the ground plane, boxed by mu * normal impulse.
        let cap = friction * self.normal_impulse;
        {
            let v_t = body.velocity_at(self.arm).dot(TANGENT_1);
            let delta = -v_t * self.inv_k_t1;
            let old = self.t1_impulse;
            self.t1_impulse = (old + delta).clamp(-cap, cap);
            let applied = self.t1_impulse - old;
            if applied != 0.0 {
                let impulse = TANGENT_1 * applied;
                body.linear_velocity += impulse * body.inv_mass;
                body.angular_velocity += inv_inertia * self.arm.cross(impulse);
            }
        }
        {
            let v_t = body.velocity_at(self.arm).dot(TANGENT_2);
            let delta = -v_t * self.inv_k_t2;
            let old = self.t2_impulse;
            self.t2_impulse = (old + delta).clamp(-cap, cap);
            let applied = self.t2_impulse - old;
            if applied != 0.0 {
                let impulse = TANGENT_2 * applied;
                body.linear_velocity += impulse * body.inv_mass;
                body.angular_velocity += inv_inertia * self.arm.cross(impulse);
            }
        }
    }
}
