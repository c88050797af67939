//! Neuroevolution of the gait controllers: speciation with fitness
//! sharing, innovation-aligned crossover, structural and weight mutation,
//! and the generation loop that ties them to a developmental schedule.

mod innovation;
mod reproduce;
mod species;

pub use innovation::{InnovationRegistry, SplitRecord};
pub use reproduce::reproduce;
pub use species::{compatibility_distance, speciate, Species};

use alloc::vec::Vec;
use core::fmt;

use crate::controller::{ConnectionGene, Genome};
use crate::quadruped::Morphology;
use crate::rng::Rng;
use crate::stats;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct NeatConfig {
    pub population_size: usize,
    /// Number of reproduction rounds; the run evaluates `generations + 1`
    /// populations including the initial one.
    pub generations: u32,
    /// Compatibility coefficient on excess genes.
    pub compat_excess: f64,
    /// Compatibility coefficient on disjoint genes.
    pub compat_disjoint: f64,
    /// Compatibility coefficient on mean matching-weight difference.
    pub compat_weight: f64,
    /// Initial speciation threshold; adapted during the run.
    pub compat_threshold: f64,
    pub compat_threshold_min: f64,
    /// Per-generation threshold adjustment toward `target_species`.
    pub compat_threshold_step: f64,
    pub target_species: usize,
    /// Fraction of each species allowed to breed.
    pub survival_fraction: f64,
    /// Champions copied verbatim per quota-holding species.
    pub elitism: usize,
    /// Probability a child's weights are mutated at all.
    pub p_weight_mutate: f64,
    pub weight_perturb_sigma: f64,
    /// Within weight mutation: chance of a full reset instead of a perturbation.
    pub p_weight_reset: f64,
    pub weight_reset_range: f64,
    pub weight_clamp: f64,
    pub p_add_connection: f64,
    pub p_add_node: f64,
    pub crossover_rate: f64,
    /// Chance that a gene disabled in either parent is re-enabled in the child.
    pub p_disabled_reenable: f64,
    /// Generations without species improvement before it stops breeding.
    pub stagnation_limit: u32,
    /// Initial connection weights are uniform in +-this.
    pub init_weight_range: f64,
    /// Permit recurrent connections (one-tick delay in the phenotype).
    pub allow_recurrent: bool,
}

impl Default for NeatConfig {
    fn default() -> NeatConfig {
        NeatConfig {
            population_size: 50,
            generations: 300,
            compat_excess: 1.0,
            compat_disjoint: 1.0,
            compat_weight: 0.4,
            compat_threshold: 3.0,
            compat_threshold_min: 0.3,
            compat_threshold_step: 0.1,
            target_species: 5,
            survival_fraction: 0.2,
            elitism: 1,
            p_weight_mutate: 0.8,
            weight_perturb_sigma: 0.5,
            p_weight_reset: 0.1,
            weight_reset_range: 4.0,
            weight_clamp: 8.0,
            p_add_connection: 0.1,
            p_add_node: 0.03,
            crossover_rate: 0.75,
            p_disabled_reenable: 0.25,
            stagnation_limit: 15,
            init_weight_range: 1.0,
            allow_recurrent: true,
        }
    }
}

impl NeatConfig {
    pub fn validate(&self) -> Result<(), NeatError> {
        if self.population_size < 2 {
            return Err(NeatError::InvalidConfig("population_size must be >= 2"));
        }
        let probabilities = [
            self.p_weight_mutate,
            self.p_weight_reset,
            self.p_add_connection,
            self.p_add_node,
            self.crossover_rate,
            self.p_disabled_reenable,
            self.survival_fraction,
        ];
        if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(NeatError::InvalidConfig("probabilities must be in [0, 1]"));
        }
        if self.compat_threshold <= 0.0 || self.compat_threshold_min <= 0.0 {
            return Err(NeatError::InvalidConfig("thresholds must be positive"));
        }
        if self.weight_clamp <= 0.0 || self.weight_reset_range <= 0.0 {
            return Err(NeatError::InvalidConfig("weight ranges must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NeatError {
    InvalidConfig(&'static str),
    NoSpecies,
    EvaluationCountMismatch,
}

impl fmt::Display for NeatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeatError::InvalidConfig(msg) => write!(f, "invalid NEAT config: {msg}"),
            NeatError::NoSpecies => write!(f, "no species to reproduce from"),
            NeatError::EvaluationCountMismatch => {
                write!(f, "evaluator returned the wrong number of fitnesses")
            }
        }
    }
}

/// Why one genome's evaluation was discarded (it scores 0 and is flagged).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EvalFailure {
    /// Simulation state went NaN/inf.
    NonFinite,
    /// Episode tripped the mean-speed sanity bound.
    SpeedLimit,
    /// The genome could not be compiled.
    InvalidGenome,
}

/// Scores one generation of genomes on a fixed morphology. Implementations
/// must be deterministic in (genome, morphology); calls may fan the batch
/// out over threads as long as result order matches genome order.
pub trait FitnessEvaluator {
    fn evaluate(
        &mut self,
        genomes: &[Genome],
        morphology: Morphology,
        generation: u32,
    ) -> Vec<Result<f64, EvalFailure>>;
}

impl<F> FitnessEvaluator for F
where
    F: FnMut(&[Genome], Morphology, u32) -> Vec<Result<f64, EvalFailure>>,
{
    fn evaluate(
        &mut self,
        genomes: &[Genome],
        morphology: Morphology,
        generation: u32,
    ) -> Vec<Result<f64, EvalFailure>> {
        self(genomes, morphology, generation)
    }
}

/// Everything logged about one generation.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats {
    pub generation: u32,
    /// Best fitness in this generation's population, m.
    pub best_fitness: f64,
    /// Best fitness observed so far in the run, m.
    pub best_fitness_so_far: f64,
    pub median_fitness: f64,
    pub species_count: usize,
    pub evaluations: usize,
    pub eval_failures: usize,
    /// The morphology every individual was evaluated with.
    pub morphology: Morphology,
}

#[derive(Clone, Debug)]
pub struct BestGenome {
    pub genome: Genome,
    pub fitness: f64,
    pub generation: u32,
}

#[derive(Clone, Debug)]
pub struct EvolveOutcome {
    /// One record per evaluated generation: `generations + 1` entries.
    pub records: Vec<GenerationStats>,
    pub final_population: Vec<Genome>,
    /// Highest-fitness genome ever observed (on whatever morphology its
    /// generation used).
    pub best: BestGenome,
}

/// Fully connected minimal genome: input and bias wired to every output
/// with uniform random weights.
pub fn initial_genome(cfg: &NeatConfig, rng: &mut Rng) -> Genome {
    let mut genome = Genome::empty();
    for (j, &out) in crate::controller::OUTPUT_NODES.iter().enumerate() {
        genome.connections.push(ConnectionGene {
            innovation: InnovationRegistry::initial_innovation(false, j),
            from: crate::controller::INPUT_NODE,
            to: out,
            weight: rng.range(-cfg.init_weight_range, cfg.init_weight_range),
            enabled: true,
        });
    }
    for (j, &out) in crate::controller::OUTPUT_NODES.iter().enumerate() {
        genome.connections.push(ConnectionGene {
            innovation: InnovationRegistry::initial_innovation(true, j),
            from: crate::controller::BIAS_NODE,
            to: out,
            weight: rng.range(-cfg.init_weight_range, cfg.init_weight_range),
            enabled: true,
        });
    }
    genome
}

/// Run the evolutionary loop: evaluate, log, speciate, reproduce; the
/// morphology of each generation comes from `morphology_for` (the
/// development schedule). Deterministic given the seed.
pub fn evolve(
    evaluator: &mut dyn FitnessEvaluator,
    cfg: &NeatConfig,
    morphology_for: impl Fn(u32) -> Morphology,
    seed: u64,
) -> Result<EvolveOutcome, NeatError> {
    cfg.validate()?;
    let mut rng = Rng::from_seed(seed);
    let mut registry = InnovationRegistry::new();
    let mut population: Vec<Genome> = (0..cfg.population_size)
        .map(|_| initial_genome(cfg, &mut rng))
        .collect();
    let mut species: Vec<Species> = Vec::new();
    let mut threshold = cfg.compat_threshold;
    let mut records = Vec::with_capacity(cfg.generations as usize + 1);
    let mut best: Option<BestGenome> = None;

    for generation in 0..=cfg.generations {
        let morphology = morphology_for(generation);
        let results = evaluator.evaluate(&population, morphology, generation);
        if results.len() != population.len() {
            return Err(NeatError::EvaluationCountMismatch);
        }
        let mut failures = 0;
        for (genome, result) in population.iter_mut().zip(results) {
            genome.fitness = match result {
                Ok(f) if f.is_finite() && f >= 0.0 => f,
                Ok(_) | Err(_) => {
                    failures += 1;
                    0.0
                }
            };
        }

        let (best_index, best_fitness) = population
            .iter()
            .enumerate()
            .map(|(i, g)| (i, g.fitness))
            .max_by(|(_, a), (_, b)| a.partial_cmp(b).expect("finite fitness"))
            .expect("non-empty population");
        if best.as_ref().is_none_or(|b| best_fitness > b.fitness) {
            best = Some(BestGenome {
                genome: population[best_index].clone(),
                fitness: best_fitness,
                generation,
            });
        }

        species = speciate(&population, species, threshold, cfg);

        let fitnesses: Vec<f64> = population.iter().map(|g| g.fitness).collect();
        let median_fitness = stats::summarize(&fitnesses)
            .map(|s| s.median)
            .unwrap_or(0.0);
        records.push(GenerationStats {
            generation,
            best_fitness,
            best_fitness_so_far: best.as_ref().map(|b| b.fitness).unwrap_or(best_fitness),
            median_fitness,
            species_count: species.len(),
            evaluations: population.len(),
            eval_failures: failures,
            morphology,
        });

        // Nudge the speciation threshold toward the target species count.
        if species.len() > cfg.target_species {
            threshold += cfg.compat_threshold_step;
        } else if species.len() < cfg.target_species {
            threshold = (threshold - cfg.compat_threshold_step).max(cfg.compat_threshold_min);
        }

        if generation < cfg.generations {
            population = reproduce(&population, &mut species, &mut registry, cfg, &mut rng)?;
        }
    }

    Ok(EvolveOutcome {
        records,
        final_population: population,
        best: best.expect("at least one generation evaluated"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn synthetic(cfg: &NeatConfig) -> NeatConfig {
        NeatConfig {
            population_size: 20,
            generations: 25,
            ..cfg.clone()
        }
    }

    /// Deterministic toy evaluator: likes many enabled connections and
    /// weights near 1.
    fn structure_score(genomes: &[Genome], _m: Morphology, _g: u32) -> Vec<Result<f64, EvalFailure>> {
        genomes
            .iter()
            .map(|g| {
                let enabled: f64 = g
                    .connections
                    .iter()
                    .filter(|c| c.enabled)
                    .map(|c| 1.0 / (1.0 + (c.weight - 1.0).abs()))
                    .sum();
                Ok(enabled)
            })
            .collect()
    }

    #[test]
    fn zero_generations_evaluates_once_without_reproduction() {
        let cfg = NeatConfig {
            population_size: 8,
            generations: 0,
            ..NeatConfig::default()
        };
        let outcome = evolve(&mut structure_score, &cfg, |_| dummy_morph(), 7).unwrap();
        assert_eq!(outcome.records.len(), 1);
        assert_eq!(outcome.final_population.len(), 8);
        // Initial genomes are exactly the minimal topology.
        for g in &outcome.final_population {
            assert_eq!(g.connections.len(), 16);
            assert_eq!(g.validate(), Ok(()));
        }
    }

    fn dummy_morph() -> Morphology {
        Morphology::new(0.075, 1.0).unwrap()
    }

    #[test]
    fn constant_evaluator_gives_flat_best_curve() {
        let cfg = synthetic(&NeatConfig::default());
        let mut flat = |genomes: &[Genome], _m: Morphology, _g: u32| {
            genomes.iter().map(|_| Ok(1.0)).collect::<Vec<_>>()
        };
        let outcome = evolve(&mut flat, &cfg, |_| dummy_morph(), 3).unwrap();
        for r in &outcome.records {
            assert_eq!(r.best_fitness, 1.0);
            assert_eq!(r.median_fitness, 1.0);
            assert_eq!(r.evaluations, 20);
        }
    }

    #[test]
    fn seeded_runs_replay_identically() {
        let cfg = synthetic(&NeatConfig::default());
        let a = evolve(&mut structure_score, &cfg, |_| dummy_morph(), 42).unwrap();
        let b = evolve(&mut structure_score, &cfg, |_| dummy_morph(), 42).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.final_population, b.final_population);
        assert_eq!(a.best.genome, b.best.genome);
        let c = evolve(&mut structure_score, &cfg, |_| dummy_morph(), 43).unwrap();
        assert_ne!(a.final_population, c.final_population);
    }

    #[test]
    fn population_size_is_invariant_and_best_is_monotone() {
        let cfg = synthetic(&NeatConfig::default());
        let outcome = evolve(&mut structure_score, &cfg, |_| dummy_morph(), 9).unwrap();
        assert_eq!(outcome.records.len(), 26);
        let mut prev_best = f64::NEG_INFINITY;
        for r in &outcome.records {
            assert_eq!(r.evaluations, 20);
            // Fixed evaluator + fixed morphology: elites make the
            // best-of-generation curve non-decreasing.
            assert!(r.best_fitness >= prev_best - 1e-12, "{r:?}");
            prev_best = r.best_fitness;
            assert!(r.best_fitness_so_far >= r.best_fitness - 1e-12);
            assert!(r.species_count >= 1);
        }
    }

    #[test]
    fn eval_failures_are_counted_and_scored_zero() {
        let cfg = NeatConfig {
            population_size: 6,
            generations: 2,
            ..NeatConfig::default()
        };
        let mut flaky = |genomes: &[Genome], _m: Morphology, _g: u32| {
            genomes
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    if i % 2 == 0 {
                        Err(EvalFailure::NonFinite)
                    } else {
                        Ok(1.0)
                    }
                })
                .collect::<Vec<_>>()
        };
        let outcome = evolve(&mut flaky, &cfg, |_| dummy_morph(), 1).unwrap();
        for r in &outcome.records {
            assert_eq!(r.eval_failures, 3);
            assert_eq!(r.best_fitness, 1.0);
        }
    }

    #[test]
    fn innovation_numbers_stay_consistent_across_population() {
        let cfg = NeatConfig {
            population_size: 24,
            generations: 40,
            p_add_connection: 0.4,
            p_add_node: 0.2,
            ..NeatConfig::default()
        };
        let outcome = evolve(&mut structure_score, &cfg, |_| dummy_morph(), 17).unwrap();
        // Same structural signature -> same innovation number, everywhere.
        let mut seen: vec::Vec<(u32, (u32, u32))> = vec::Vec::new();
        for g in &outcome.final_population {
            assert_eq!(g.validate(), Ok(()));
            for c in &g.connections {
                match seen.iter().find(|(innovation, _)| *innovation == c.innovation) {
                    Some((_, pair)) => assert_eq!(*pair, (c.from, c.to)),
                    None => seen.push((c.innovation, (c.from, c.to))),
                }
            }
        }
        // And the run actually grew structure.
        assert!(seen.len() > 16, "no structural growth happened");
    }

    #[test]
    fn validation_rejects_tiny_population() {
        let cfg = NeatConfig {
            population_size: 1,
            ..NeatConfig::default()
        };
        assert!(matches!(
            evolve(&mut structure_score, &cfg, |_| dummy_morph(), 0),
            Err(NeatError::InvalidConfig(_))
        ));
    }
}
