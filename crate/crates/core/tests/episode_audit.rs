//! Episode-level audits across randomly wired controllers: the speed
//! sanity bound, state finiteness, joint-limit compliance, and genome text
//! round-trips through evolved structure.

use morphodev_core::controller::{compile, Genome};
use morphodev_core::development::{morphology_at, DevelopmentSchedule};
use morphodev_core::neat::{evolve, EvalFailure, NeatConfig};
use morphodev_core::quadruped::{
    build_world, run_episode, EpisodeConfig, Morphology, QuadrupedSpec, JOINT_COUNT,
};
use morphodev_core::rng::Rng;

fn random_genomes(count: usize, weight_range: f64, seed: u64) -> Vec<Genome> {
    let cfg = NeatConfig {
        init_weight_range: weight_range,
        ..NeatConfig::default()
    };
    let mut rng = Rng::from_seed(seed);
    (0..count)
        .map(|_| morphodev_core::neat::initial_genome(&cfg, &mut rng))
        .collect()
}

#[test]
fn random_controllers_respect_speed_bound_or_abort() {
    let spec = QuadrupedSpec::default();
    let cfg = EpisodeConfig::default();
    let bound = cfg.speed_limit * cfg.duration;
    for (i, genome) in random_genomes(24, 8.0, 123).iter().enumerate() {
        let mut net = compile(genome).unwrap();
        let r = run_episode(&spec, Morphology::adult(&spec), &mut net, &cfg, false).unwrap();
        if r.aborted() {
            assert_eq!(r.fitness, 0.0, "genome {i}: aborted episodes score zero");
        } else {
            assert!(
                r.fitness <= bound,
                "genome {i}: fitness {} above the {bound} m bound",
                r.fitness
            );
            assert!(r.final_position.is_finite());
        }
    }
}

#[test]
fn violent_controllers_keep_joints_within_limits() {
    let spec = QuadrupedSpec::default();
    let morph = Morphology::adult(&spec);
    let slack = 0.02;
    for genome in random_genomes(6, 8.0, 321) {
        let mut net = compile(&genome).unwrap();
        net.reset();
        let mut world = build_world(&spec, morph).unwrap();
        for tick in 0..60 {
            let t = tick as f64 * 0.05;
            let outputs = net.activate(2.0 * libm::sin(t));
            for (j, joint) in world.joints.iter_mut().enumerate() {
                joint.motor_target = outputs[j] * morph.max_angle(&spec);
            }
            for _ in 0..10 {
                if !world.step(0.005).finite {
                    return; // separately audited by the speed-bound test
                }
                for j in 0..JOINT_COUNT {
                    let angle = world.joint_angle(j);
                    assert!(
                        angle.abs() <= spec.revolute_limit_max + slack,
                        "joint {j} at {angle} rad"
                    );
                }
            }
        }
    }
}

#[test]
fn trajectory_recording_does_not_change_outcomes() {
    let spec = QuadrupedSpec::default();
    let cfg = EpisodeConfig::default();
    let genome = &random_genomes(1, 2.0, 9)[0];
    let mut n1 = compile(genome).unwrap();
    let mut n2 = compile(genome).unwrap();
    let plain = run_episode(&spec, Morphology::adult(&spec), &mut n1, &cfg, false).unwrap();
    let recorded = run_episode(&spec, Morphology::adult(&spec), &mut n2, &cfg, true).unwrap();
    assert_eq!(plain.fitness.to_bits(), recorded.fitness.to_bits());
    let track = recorded.trajectory.expect("trajectory requested");
    assert_eq!(track.len() as u32, cfg.control_ticks() + 1);
    assert_eq!(track.last().unwrap(), &recorded.final_position);
}

#[test]
fn evolved_genomes_roundtrip_through_text_exactly() {
    let cfg = NeatConfig {
        population_size: 16,
        generations: 15,
        p_add_connection: 0.5,
        p_add_node: 0.3,
        ..NeatConfig::default()
    };
    let spec = QuadrupedSpec::default();
    let schedule = DevelopmentSchedule::growth(10);
    // Cheap structural evaluator; no physics needed to grow topology.
    let mut evaluator = |genomes: &[Genome], _m: Morphology, _g: u32| {
        genomes
            .iter()
            .map(|g| Ok::<f64, EvalFailure>(g.connections.len() as f64))
            .collect::<Vec<_>>()
    };
    let outcome = evolve(
        &mut evaluator,
        &cfg,
        |g| morphology_at(schedule, g, &spec),
        2024,
    )
    .unwrap();
    let mut grew = false;
    for genome in outcome
        .final_population
        .iter()
        .chain(core::iter::once(&outcome.best.genome))
    {
        let text = genome.to_text();
        let parsed = Genome::from_text(&text).unwrap();
        assert_eq!(&parsed, genome);
        assert_eq!(parsed.to_text(), text);
        grew |= genome.nodes.len() > 10;
    }
    assert!(grew, "expected hidden nodes after 15 generations");
}
