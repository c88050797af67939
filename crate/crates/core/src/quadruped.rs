//! The simulated quadruped: a flat central body with four two-link legs,
//! built from a [`QuadrupedSpec`] and the current [`Morphology`], plus the
//! episode runner that scores one controller on one body.
//!
//! Each physical limb consists of three equal segments; the outer two are
//! joined by a telescoping length parameter rather than a simulated
//! prismatic joint, so a limb is modeled as two rigid links: a proximal
//! link (one segment) behind the hip hinge and a distal link (the remaining
//! segments, carrying their combined mass) behind the knee hinge. Leg
//! growth changes only the distal link's length; masses never change.

use alloc::vec::Vec;
use core::fmt;

use crate::controller::{denormalize, Network};
use crate::math::{vec3, Vec3};
use crate::physics::{ContactParams, RevoluteJoint, RigidBody, WorldState, STANDARD_GRAVITY};

/// Fixed geometry, masses and actuation of the robot.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct QuadrupedSpec {
    /// Central body box, full extents (x forward, y transverse, z up), m.
    pub body_dims: Vec3,
    pub body_mass: f64,
    /// One leg segment: (length, width, thickness), m.
    pub segment_dims: Vec3,
    pub segment_mass: f64,
    pub segments_per_limb: u32,
    /// Maximum telescoping extension of the distal link, m.
    pub prismatic_stroke_max: f64,
    /// Leg length at zero extension, m.
    pub base_leg_length: f64,
    /// Physical rotation limit of every revolute joint, rad.
    pub revolute_limit_max: f64,
    /// Joint servo torque budget, N*m.
    pub motor_max_torque: f64,
    /// Joint servo speed cap, rad/s.
    pub motor_max_speed: f64,
    /// Initial gap between the feet and the ground, m.
    pub rest_clearance: f64,
    pub contact: ContactParams,
}

impl Default for QuadrupedSpec {
    fn default() -> QuadrupedSpec {
        QuadrupedSpec {
            body_dims: vec3(0.30, 0.15, 0.01),
            body_mass: 2.0,
            segment_dims: vec3(0.05, 0.025, 0.005),
            segment_mass: 0.25,
            segments_per_limb: 3,
            prismatic_stroke_max: 0.075,
            base_leg_length: 0.10,
            revolute_limit_max: core::f64::consts::FRAC_PI_2,
            motor_max_torque: 2.0,
            motor_max_speed: 6.0,
            rest_clearance: 0.001,
            contact: ContactParams::default(),
        }
    }
}

impl QuadrupedSpec {
    /// Body plus all leg segments.
    pub fn total_mass(&self) -> f64 {
        self.body_mass + 4.0 * self.segments_per_limb as f64 * self.segment_mass
    }

    /// Distal link length before extension: whatever the proximal segment
    /// leaves of the base leg length.
    fn distal_base_length(&self) -> f64 {
        self.base_leg_length - self.segment_dims.x
    }

    pub fn validate(&self) -> Result<(), QuadrupedError> {
        let all_positive = self.body_dims.x > 0.0
            && self.body_dims.y > 0.0
            && self.body_dims.z > 0.0
            && self.segment_dims.x > 0.0
            && self.segment_dims.y > 0.0
            && self.segment_dims.z > 0.0
            && self.body_mass > 0.0
            && self.segment_mass > 0.0;
        if !all_positive {
            return Err(QuadrupedError::InvalidSpec(
                "dimensions and masses must be positive",
            ));
        }
        if self.segments_per_limb < 2 {
            return Err(QuadrupedError::InvalidSpec(
                "need at least two segments per limb",
            ));
        }
        if self.distal_base_length() <= 0.0 {
            return Err(QuadrupedError::InvalidSpec(
                "base leg length must exceed the proximal segment",
            ));
        }
        if self.prismatic_stroke_max < 0.0 {
            return Err(QuadrupedError::InvalidSpec("stroke must be >= 0"));
        }
        if !(self.revolute_limit_max > 0.0
            && self.revolute_limit_max <= core::f64::consts::FRAC_PI_2)
        {
            return Err(QuadrupedError::InvalidSpec(
                "revolute limit must be in (0, pi/2]",
            ));
        }
        if self.motor_max_torque <= 0.0 || self.motor_max_speed <= 0.0 {
            return Err(QuadrupedError::InvalidSpec(
                "motor parameters must be positive",
            ));
        }
        self.contact
            .validate()
            .map_err(QuadrupedError::InvalidSpec)?;
        Ok(())
    }
}

/// The developmental state of the body: how far the legs have grown and how
/// much of the joint range the controller may use.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Morphology {
    leg_extension: f64,
    motion_fraction: f64,
}

impl Morphology {
    /// `leg_extension` in meters (>= 0), `motion_fraction` in (0, 1].
    pub fn new(leg_extension: f64, motion_fraction: f64) -> Result<Morphology, QuadrupedError> {
        if !(leg_extension >= 0.0 && leg_extension.is_finite())
            || !(motion_fraction > 0.0 && motion_fraction <= 1.0)
        {
            return Err(QuadrupedError::MorphologyOutOfBounds {
                leg_extension,
                motion_fraction,
            });
        }
        Ok(Morphology {
            leg_extension,
            motion_fraction,
        })
    }

    /// Fully developed body: maximum leg length, full joint range.
    pub fn adult(spec: &QuadrupedSpec) -> Morphology {
        Morphology {
            leg_extension: spec.prismatic_stroke_max,
            motion_fraction: 1.0,
        }
    }

    pub fn leg_extension(&self) -> f64 {
        self.leg_extension
    }

    pub fn motion_fraction(&self) -> f64 {
        self.motion_fraction
    }

    pub fn leg_length(&self, spec: &QuadrupedSpec) -> f64 {
        spec.base_leg_length + self.leg_extension
    }

    /// Angle range available to the controller at this developmental state.
    pub fn max_angle(&self, spec: &QuadrupedSpec) -> f64 {
        self.motion_fraction * spec.revolute_limit_max
    }
}

/// How an episode scores movement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FitnessMetric {
    /// Straight-line planar displacement of the body center, start to end.
    #[default]
    NetDisplacement,
    /// Planar path length of the body center sampled at control ticks.
    PathLength,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct EpisodeConfig {
    /// Episode duration, s.
    pub duration: f64,
    /// Controller tick period, s; an integer multiple of `physics_dt`.
    pub control_dt: f64,
    /// Physics step, s.
    pub physics_dt: f64,
    /// Sanity bound on mean speed, m/s; a larger apparent fitness marks the
    /// episode as a physics explosion.
    pub speed_limit: f64,
    pub fitness_metric: FitnessMetric,
}

impl Default for EpisodeConfig {
    fn default() -> EpisodeConfig {
        EpisodeConfig {
            duration: 3.0,
            control_dt: 0.050,
            physics_dt: 0.005,
            speed_limit: 5.0,
            fitness_metric: FitnessMetric::NetDisplacement,
        }
    }
}

impl EpisodeConfig {
    fn is_near_integer(x: f64) -> bool {
        (x - libm::floor(x + 0.5)).abs() < 1e-9
    }

    pub fn validate(&self) -> Result<(), QuadrupedError> {
        if self.duration < 0.0 || self.physics_dt <= 0.0 || self.control_dt <= 0.0 {
            return Err(QuadrupedError::InvalidEpisodeConfig(
                "durations and steps must be positive",
            ));
        }
        if !Self::is_near_integer(self.control_dt / self.physics_dt) {
            return Err(QuadrupedError::InvalidEpisodeConfig(
                "control_dt must be an integer multiple of physics_dt",
            ));
        }
        if !Self::is_near_integer(self.duration / self.control_dt) {
            return Err(QuadrupedError::InvalidEpisodeConfig(
                "duration must be an integer multiple of control_dt",
            ));
        }
        if self.speed_limit <= 0.0 {
            return Err(QuadrupedError::InvalidEpisodeConfig(
                "speed_limit must be positive",
            ));
        }
        Ok(())
    }

    pub fn control_ticks(&self) -> u32 {
        libm::floor(self.duration / self.control_dt + 0.5) as u32
    }

    pub fn physics_substeps(&self) -> u32 {
        libm::floor(self.control_dt / self.physics_dt + 0.5) as u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AbortReason {
    /// A body state went NaN/inf.
    NonFiniteState,
    /// Apparent mean speed exceeded the sanity bound.
    SpeedLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeResult {
    /// Movement score, m; 0 when aborted.
    pub fitness: f64,
    /// The central body touched the ground at some point.
    pub fell: bool,
    /// Set when the episode was abandoned; fitness is then 0.
    pub abort: Option<AbortReason>,
    /// Body center at episode end.
    pub final_position: Vec3,
    /// Yaw of the body's forward axis at episode end, rad.
    pub final_heading: f64,
    /// Body center at each control tick, when recording was requested.
    pub trajectory: Option<Vec<Vec3>>,
}

impl EpisodeResult {
    pub fn aborted(&self) -> bool {
        self.abort.is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuadrupedError {
    MorphologyOutOfBounds {
        leg_extension: f64,
        motion_fraction: f64,
    },
    ExtensionExceedsStroke {
        leg_extension: f64,
        stroke_max: f64,
    },
    LegLengthInvalid(f64),
    MaxAngleInvalid(f64),
    InvalidSpec(&'static str),
    InvalidEpisodeConfig(&'static str),
}

impl fmt::Display for QuadrupedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadrupedError::MorphologyOutOfBounds {
                leg_extension,
                motion_fraction,
            } => write!(
                f,
                "morphology out of bounds: extension {leg_extension}, fraction {motion_fraction}"
            ),
            QuadrupedError::ExtensionExceedsStroke {
                leg_extension,
                stroke_max,
            } => write!(
                f,
                "leg extension {leg_extension} exceeds stroke maximum {stroke_max}"
            ),
            QuadrupedError::LegLengthInvalid(l) => write!(f, "leg length {l} not buildable"),
            QuadrupedError::MaxAngleInvalid(a) => write!(f, "max angle {a} not usable"),
            QuadrupedError::InvalidSpec(msg) => write!(f, "invalid spec: {msg}"),
            QuadrupedError::InvalidEpisodeConfig(msg) => {
                write!(f, "invalid episode config: {msg}")
            }
        }
    }
}

/// Index of the central body in the built world.
pub const BODY_INDEX: usize = 0;
/// Number of actuated joints (hip + knee per limb).
pub const JOINT_COUNT: usize = 8;

/// Limb attachment corners in joint order: front-left, front-right,
/// rear-left, rear-right (x forward, y left).
const CORNER_SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

/// Build the robot at a given developmental state, standing at the origin
/// in its rest pose: all joint angles zero, legs straight down, feet
/// `rest_clearance` above the plane, zero velocities.
///
/// Joint order: limb by limb in [`CORNER_SIGNS`] order, hip before knee;
/// network output i drives joint i. Hinge axes are all +y (the body's
/// transverse axis), so legs swing in the sagittal plane.
pub fn build_world(spec: &QuadrupedSpec, morph: Morphology) -> Result<WorldState, QuadrupedError> {
    if morph.leg_extension > spec.prismatic_stroke_max {
        return Err(QuadrupedError::ExtensionExceedsStroke {
            leg_extension: morph.leg_extension,
            stroke_max: spec.prismatic_stroke_max,
        });
    }
    build_world_with_leg(spec, morph.leg_length(spec))
}

/// Build with an explicit leg length, bypassing the stroke bound. Used by
/// robustness sweeps that perturb the body beyond the morphology the
/// controller grew up with; the length still has to be physically buildable.
pub fn build_world_with_leg(
    spec: &QuadrupedSpec,
    leg_length: f64,
) -> Result<WorldState, QuadrupedError> {
    spec.validate()?;
    let proximal_len = spec.segment_dims.x;
    let distal_len = leg_length - proximal_len;
    if !(distal_len > 0.0 && leg_length.is_finite()) {
        return Err(QuadrupedError::LegLengthInvalid(leg_length));
    }

    let mut world = WorldState::new(STANDARD_GRAVITY, spec.contact);

    let half_body = spec.body_dims * 0.5;
    let anchor_z = leg_length + spec.rest_clearance;
    let body_center_z = anchor_z + half_body.z;
    let torso = world.add_body(RigidBody::new_box(
        spec.body_mass,
        spec.body_dims,
        vec3(0.0, 0.0, body_center_z),
    ));
    debug_assert_eq!(torso, BODY_INDEX);

    let link_x = spec.segment_dims.z; // thickness faces forward
    let link_y = spec.segment_dims.y;
    let distal_mass = (spec.segments_per_limb - 1) as f64 * spec.segment_mass;

    for (sx, sy) in CORNER_SIGNS {
        let hip_anchor = vec3(sx * half_body.x, sy * half_body.y, anchor_z);
        let proximal = world.add_body(RigidBody::new_box(
            spec.segment_mass,
            vec3(link_x, link_y, proximal_len),
            hip_anchor - vec3(0.0, 0.0, proximal_len * 0.5),
        ));
        let knee_anchor = hip_anchor - vec3(0.0, 0.0, proximal_len);
        let distal = world.add_body(RigidBody::new_box(
            distal_mass,
            vec3(link_x, link_y, distal_len),
            knee_anchor - vec3(0.0, 0.0, distal_len * 0.5),
        ));

        let hip = RevoluteJoint::new(
            BODY_INDEX,
            proximal,
            &world.bodies[BODY_INDEX],
            &world.bodies[proximal],
            hip_anchor,
            Vec3::Y,
            spec.revolute_limit_max,
        )
        .with_motor(spec.motor_max_torque, spec.motor_max_speed);
        world.add_joint(hip);

        let knee = RevoluteJoint::new(
            proximal,
            distal,
            &world.bodies[proximal],
            &world.bodies[distal],
            knee_anchor,
            Vec3::Y,
            spec.revolute_limit_max,
        )
        .with_motor(spec.motor_max_torque, spec.motor_max_speed);
        world.add_joint(knee);
    }
    debug_assert_eq!(world.joints.len(), JOINT_COUNT);
    Ok(world)
}

/// Run one evaluation episode of `network` on the robot body given by
/// `morph`. The controller input at control time t is `2 sin(t)`; the 8
/// outputs are denormalized onto +-`morph.max_angle(spec)` and written as
/// servo targets, then the physics runs until the next tick. Deterministic.
pub fn run_episode(
    spec: &QuadrupedSpec,
    morph: Morphology,
    network: &mut Network,
    cfg: &EpisodeConfig,
    record_trajectory: bool,
) -> Result<EpisodeResult, QuadrupedError> {
    if morph.leg_extension > spec.prismatic_stroke_max {
        return Err(QuadrupedError::ExtensionExceedsStroke {
            leg_extension: morph.leg_extension,
            stroke_max: spec.prismatic_stroke_max,
        });
    }
    run_episode_with(
        spec,
        morph.leg_length(spec),
        morph.max_angle(spec),
        network,
        cfg,
        record_trajectory,
    )
}

/// Episode runner with explicit leg length and denormalization angle; the
/// entry point for robustness perturbations, where either value may exceed
/// the ranges seen during evolution (the physical joint limits still apply).
pub fn run_episode_with(
    spec: &QuadrupedSpec,
    leg_length: f64,
    max_angle: f64,
    network: &mut Network,
    cfg: &EpisodeConfig,
    record_trajectory: bool,
) -> Result<EpisodeResult, QuadrupedError> {
    cfg.validate()?;
    if !(max_angle > 0.0 && max_angle.is_finite()) {
        return Err(QuadrupedError::MaxAngleInvalid(max_angle));
    }
    let mut world = build_world_with_leg(spec, leg_length)?;
    network.reset();

    let start = world.bodies[BODY_INDEX].position;
    let mut previous = start;
    let mut path_length = 0.0;
    let mut fell = false;
    let mut trajectory = record_trajectory.then(Vec::new);
    if let Some(t) = trajectory.as_mut() {
        t.push(start);
    }

    let ticks = cfg.control_ticks();
    let substeps = cfg.physics_substeps();
    for tick in 0..ticks {
        let t = tick as f64 * cfg.control_dt;
        let input = 2.0 * libm::sin(t);
        let outputs = network.activate(input);
        let targets = denormalize(&outputs, max_angle);
        for (joint, &target) in world.joints.iter_mut().zip(targets.iter()) {
            joint.motor_target = target;
        }
        for _ in 0..substeps {
            let info = world.step(cfg.physics_dt);
            if !info.finite {
                return Ok(EpisodeResult {
                    fitness: 0.0,
                    fell,
                    abort: Some(AbortReason::NonFiniteState),
                    final_position: previous,
                    final_heading: 0.0,
                    trajectory,
                });
            }
            if info.body_touched_ground(BODY_INDEX) {
                fell = true;
            }
        }
        let here = world.bodies[BODY_INDEX].position;
        let dx = here.x - previous.x;
        let dy = here.y - previous.y;
        path_length += libm::sqrt(dx * dx + dy * dy);
        previous = here;
        if let Some(t) = trajectory.as_mut() {
            t.push(here);
        }
    }

    let end = world.bodies[BODY_INDEX].position;
    let (dx, dy) = (end.x - start.x, end.y - start.y);
    let displacement = libm::sqrt(dx * dx + dy * dy);
    let fitness = match cfg.fitness_metric {
        FitnessMetric::NetDisplacement => displacement,
        FitnessMetric::PathLength => path_length,
    };
    let forward = world.bodies[BODY_INDEX].orientation.rotate(Vec3::X);
    let final_heading = libm::atan2(forward.y, forward.x);

    if fitness > cfg.speed_limit * cfg.duration {
        return Ok(EpisodeResult {
            fitness: 0.0,
            fell,
            abort: Some(AbortReason::SpeedLimit),
            final_position: end,
            final_heading,
            trajectory,
        });
    }
    Ok(EpisodeResult {
        fitness,
        fell,
        abort: None,
        final_position: end,
        final_heading,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::{compile, ConnectionGene, Genome, INPUT_NODE, OUTPUT_NODES};

    #[test]
    fn total_mass_is_five_kilograms_exactly() {
        let spec = QuadrupedSpec::default();
        assert_eq!(spec.total_mass(), 5.0);
        for extension in [0.0, 0.0375, 0.075] {
            let world = build_world(&spec, Morphology::new(extension, 1.0).unwrap()).unwrap();
            let sum: f64 = world.bodies.iter().map(|b| b.mass).sum();
            assert_eq!(sum, 5.0);
            assert_eq!(world.bodies.len(), 9);
            assert_eq!(world.joints.len(), JOINT_COUNT);
        }
    }

    #[test]
    fn morphology_endpoints_match_leg_lengths() {
        let spec = QuadrupedSpec::default();
        assert_eq!(Morphology::new(0.0, 1.0).unwrap().leg_length(&spec), 0.10);
        assert_eq!(Morphology::new(0.075, 1.0).unwrap().leg_length(&spec), 0.175);
        let mid = Morphology::new(0.0375, 0.5).unwrap();
        assert_eq!(mid.leg_length(&spec), 0.1375);
        assert!((mid.max_angle(&spec) - core::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn leg_length_increases_with_extension() {
        let spec = QuadrupedSpec::default();
        let mut last = 0.0;
        for i in 0..=10 {
            let ext = i as f64 * 0.0075;
            let len = Morphology::new(ext, 1.0).unwrap().leg_length(&spec);
            assert!(len > last);
            last = len;
        }
    }

    #[test]
    fn out_of_bounds_morphologies_rejected() {
        assert!(Morphology::new(-0.01, 1.0).is_err());
        assert!(Morphology::new(0.0, 0.0).is_err());
        assert!(Morphology::new(0.0, 1.5).is_err());
        let spec = QuadrupedSpec::default();
        let too_long = Morphology::new(0.08, 1.0).unwrap();
        assert!(matches!(
            build_world(&spec, too_long),
            Err(QuadrupedError::ExtensionExceedsStroke { .. })
        ));
    }

    #[test]
    fn feet_start_just_above_ground() {
        let spec = QuadrupedSpec::default();
        let world = build_world(&spec, Morphology::adult(&spec)).unwrap();
        // Distal links are bodies 2, 4, 6, 8.
        for limb in 0..4 {
            let distal = &world.bodies[2 + 2 * limb];
            let bottom = distal.position.z - distal.half_extents.z;
            assert!(
                (bottom - spec.rest_clearance).abs() < 1e-12,
                "bottom {bottom}"
            );
        }
    }

    #[test]
    fn zero_duration_episode_scores_zero() {
        let spec = QuadrupedSpec::default();
        let mut net = compile(&Genome::empty()).unwrap();
        let cfg = EpisodeConfig {
            duration: 0.0,
            ..EpisodeConfig::default()
        };
        let r = run_episode(&spec, Morphology::adult(&spec), &mut net, &cfg, false).unwrap();
        assert_eq!(r.fitness, 0.0);
        assert!(!r.aborted());
    }

    #[test]
    fn zero_controller_stands_still_at_every_leg_length() {
        let spec = QuadrupedSpec::default();
        let cfg = EpisodeConfig::default();
        for extension in [0.0, 0.0375, 0.075] {
            let morph = Morphology::new(extension, 1.0).unwrap();
            let mut net = compile(&Genome::empty()).unwrap();
            let r = run_episode(&spec, morph, &mut net, &cfg, false).unwrap();
            assert!(!r.aborted());
            assert!(!r.fell, "body touched ground at extension {extension}");
            assert!(
                r.fitness < 0.02,
                "drifted {} m at extension {extension}",
                r.fitness
            );
        }
    }

    #[test]
    fn episodes_are_bit_reproducible() {
        let spec = QuadrupedSpec::default();
        let mut g = Genome::empty();
        // A controller that actually moves: strong sine-driven joints.
        for (i, &out) in OUTPUT_NODES.iter().enumerate() {
            g.connections.push(ConnectionGene {
                innovation: i as u32,
                from: INPUT_NODE,
                to: out,
                weight: if i % 2 == 0 { 1.4 } else { -0.9 },
                enabled: true,
            });
        }
        let cfg = EpisodeConfig::default();
        let morph = Morphology::adult(&spec);
        let mut n1 = compile(&g).unwrap();
        let mut n2 = compile(&g).unwrap();
        let r1 = run_episode(&spec, morph, &mut n1, &cfg, false).unwrap();
        let r2 = run_episode(&spec, morph, &mut n2, &cfg, false).unwrap();
        assert_eq!(r1.fitness.to_bits(), r2.fitness.to_bits());
        assert_eq!(r1.final_position, r2.final_position);
        assert_eq!(r1.fell, r2.fell);
    }

    #[test]
    fn episode_length_counts() {
        let cfg = EpisodeConfig::default();
        assert_eq!(cfg.control_ticks(), 60);
        assert_eq!(cfg.physics_substeps(), 10);
        let bad = EpisodeConfig {
            control_dt: 0.033,
            ..cfg
        };
        assert!(bad.validate().is_err());
    }
}
