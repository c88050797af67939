//! Minimal deterministic 3D rigid-body engine: boxes in maximal
//! coordinates, actuated revolute joints with limits, and ground-plane
//! contacts with Coulomb friction, resolved by iterative sequential
//! impulses with Baumgarte position stabilization.
//!
//! Integration is semi-implicit Euler. During free rotation the angular
//! *momentum* is the conserved quantity: after the orientation update the
//! angular velocity is re-derived from the carried-over momentum, which
//! keeps torque-free tumbling exact and the integrator stable.

mod body;
mod contact;
mod joint;
mod solver;

pub use body::RigidBody;
pub use contact::{detect_ground_contacts, ContactParams, GroundContact};
pub use joint::RevoluteJoint;

use alloc::vec::Vec;

use crate::math::{vec3, Mat3, Vec3};

/// Conventional gravity vector for this engine (z up).
pub const STANDARD_GRAVITY: Vec3 = vec3(0.0, 0.0, -9.81);

/// Per-step diagnostics returned by [`WorldState::step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    /// Sum of the accumulated ground-contact normal impulses, N*s.
    pub normal_impulse: f64,
    /// Bit i set when body i (i < 64) touched the ground this step.
    pub contact_mask: u64,
    /// False when any body state went non-finite; the world is then no
    /// longer meaningful and the episode should be abandoned.
    pub finite: bool,
}

impl StepInfo {
    pub fn body_touched_ground(&self, index: usize) -> bool {
        index < 64 && self.contact_mask & (1 << index) != 0
    }
}

/// All simulation state for one episode: bodies, joints, parameters, clock.
///
/// A world is confined to one thread; distinct worlds are independent.
#[derive(Clone, Debug)]
pub struct WorldState {
    pub bodies: Vec<RigidBody>,
    pub joints: Vec<RevoluteJoint>,
    pub gravity: Vec3,
    pub contact_params: ContactParams,
    /// Simulated time, s; monotone non-decreasing.
    pub time: f64,
}

impl WorldState {
    pub fn new(gravity: Vec3, contact_params: ContactParams) -> WorldState {
        contact_params.validate().expect("invalid contact params");
        WorldState {
            bodies: Vec::new(),
            joints: Vec::new(),
            gravity,
            contact_params,
            time: 0.0,
        }
    }

    /// Add a body and return its index.
    pub fn add_body(&mut self, body: RigidBody) -> usize {
        self.bodies.push(body);
        self.bodies.len() - 1
    }

    /// Add a joint and return its index. Panics on invalid body indices.
    pub fn add_joint(&mut self, joint: RevoluteJoint) -> usize {
        assert!(joint.body_a < self.bodies.len() && joint.body_b < self.bodies.len());
        self.joints.push(joint);
        self.joints.len() - 1
    }

    /// Current angle of joint `index`, rad.
    pub fn joint_angle(&self, index: usize) -> f64 {
        let j = &self.joints[index];
        j.angle(&self.bodies[j.body_a], &self.bodies[j.body_b])
    }

    pub fn is_finite(&self) -> bool {
        self.bodies.iter().all(|b| b.is_finite())
    }

    /// Advance the world by `dt` seconds.
    ///
    /// Deterministic: equal input worlds produce bit-identical outputs.
    /// A non-finite outcome is reported via [`StepInfo::finite`], not a panic.
    pub fn step(&mut self, dt: f64) -> StepInfo {
        assert!(dt > 0.0, "dt must be positive");
        let params = self.contact_params;
        let beta_over_dt = params.baumgarte_beta / dt;

        // Integrate external forces and gravity into velocities.
        for body in &mut self.bodies {
            let accel = self.gravity + body.force * body.inv_mass;
            body.linear_velocity += accel * dt;
            if body.torque != Vec3::ZERO {
                body.angular_velocity += body.inv_inertia_world() * body.torque * dt;
            }
            body.force = Vec3::ZERO;
            body.torque = Vec3::ZERO;
        }

        // Poses are frozen for the rest of the step; cache world-frame
        // inverse inertia once.
        let inv_inertia: Vec<Mat3> = self.bodies.iter().map(|b| b.inv_inertia_world()).collect();

        let mut joint_rows: Vec<solver::JointSolve> = self
            .joints
            .iter()
            .map(|j| solver::prepare_joint(&self.bodies, &inv_inertia, j, dt, beta_over_dt))
            .collect();
        let mut contact_rows = solver::prepare_contacts(
            &self.bodies,
            &inv_inertia,
            params.penetration_slop,
            beta_over_dt,
        );

        for _ in 0..params.solver_iterations {
            for row in &mut joint_rows {
                row.solve(&mut self.bodies, &inv_inertia);
            }
            for row in &mut contact_rows {
                row.solve(&mut self.bodies, &inv_inertia, params.friction_coefficient);
            }
        }
        // Joint stops get the last word so no contact or coupled joint can
        // push an angle past its limit within this step.
        const LIMIT_SETTLE_SWEEPS: u32 = 4;
        for _ in 0..LIMIT_SETTLE_SWEEPS {
            for row in &mut joint_rows {
                row.solve_stops(&mut self.bodies, &inv_inertia);
            }
        }

        // Semi-implicit position update; angular velocity is re-derived from
        // the conserved angular momentum after the orientation moves.
        for body in &mut self.bodies {
            let momentum = body.inertia_world() * body.angular_velocity;
            body.position += body.linear_velocity * dt;
            let rotated = body.angular_velocity != Vec3::ZERO;
            body.orientation = body.orientation.integrate(body.angular_velocity, dt);
            if rotated {
                body.angular_velocity = body.inv_inertia_world() * momentum;
            }
        }

        // Hard positional stop: whatever angle overshoot the velocity rows
        // could not see (axis wobble, the momentum remap) is rotated away
        // about the hinge axis on the child body.
        for j in 0..self.joints.len() {
            let joint = &self.joints[j];
            let a = &self.bodies[joint.body_a];
            let b = &self.bodies[joint.body_b];
            let angle = joint.angle(a, b);
            let excess = if angle > joint.limit {
                angle - joint.limit
            } else if angle < -joint.limit {
                angle + joint.limit
            } else {
                continue;
            };
            let axis = a.orientation.rotate(joint.axis_a);
            let child = joint.body_b;
            let correction = crate::math::Quat::from_axis_angle(axis, -excess);
            let body = &mut self.bodies[child];
            body.orientation = correction
                .mul_quat(body.orientation)
                .renormalized_if_drifted();
        }
        self.time += dt;

        let mut contact_mask = 0u64;
        let mut normal_impulse = 0.0;
        for row in &contact_rows {
            normal_impulse += row.normal_impulse;
            if row.body_index() < 64 {
                contact_mask |= 1 << row.body_index();
            }
        }
        StepInfo {
            normal_impulse,
            contact_mask,
            finite: self.is_finite(),
        }
    }
}
