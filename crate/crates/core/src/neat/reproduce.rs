//! Selection, crossover and mutation: one generation to the next.

use alloc::vec::Vec;

use super::innovation::InnovationRegistry;
use super::species::Species;
use super::{NeatConfig, NeatError};
use crate::controller::{ConnectionGene, Genome, NodeGene, NodeRole, BIAS_NODE, INPUT_NODE};
use crate::rng::Rng;

/// Largest-remainder apportionment of `total` offspring over `weights`;
/// fractional-part ties go to the smaller index. All-zero weights fall back
/// to an even split.
fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|w| total as f64 * w / sum).collect()
    } else {
        weights
            .iter()
            .map(|_| total as f64 / weights.len() as f64)
            .collect()
    };
    let mut counts: Vec<usize> = quotas.iter().map(|q| libm::floor(*q) as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - libm::floor(quotas[a]);
        let fb = quotas[b] - libm::floor(quotas[b]);
        fb.partial_cmp(&fa).expect("finite quotas").then(a.cmp(&b))
    });
    let mut remaining = total - counts.iter().sum::<usize>();
    let mut k = 0;
    while remaining > 0 {
        counts[order[k % order.len()]] += 1;
        remaining -= 1;
        k += 1;
    }
    counts
}

/// Align two innovation-sorted genomes; matching genes inherit their weight
/// from a random parent, disjoint and excess genes come from the fitter
/// parent only (first parent on a fitness tie). A gene disabled in either
/// parent is re-enabled in the child with probability `p_disabled_reenable`.
fn crossover(first: &Genome, second: &Genome, cfg: &NeatConfig, rng: &mut Rng) -> Genome {
    let (fitter, weaker) = if second.fitness > first.fitness {
        (second, first)
    } else {
        (first, second)
    };
    let mut connections = Vec::with_capacity(fitter.connections.len());
    let mut j = 0;
    for gene in &fitter.connections {
        while j < weaker.connections.len() && weaker.connections[j].innovation < gene.innovation {
            j += 1;
        }
        let matching = weaker
            .connections
            .get(j)
            .filter(|other| other.innovation == gene.innovation);
        let mut child = match matching {
            Some(other) => {
                let mut inherited = if rng.chance(0.5) { *other } else { *gene };
                if !(gene.enabled && other.enabled) {
                    inherited.enabled = rng.chance(cfg.p_disabled_reenable);
                }
                inherited
            }
            None => *gene,
        };
        // Endpoints always come from the fitter parent's gene so the node
        // set below is guaranteed to cover them.
        child.from = gene.from;
        child.to = gene.to;
        child.innovation = gene.innovation;
        connections.push(child);
    }
    Genome {
        nodes: fitter.nodes.clone(),
        connections,
        fitness: 0.0,
    }
}

/// Would adding `from -> to` close a directed cycle through enabled
/// connections?
fn creates_cycle(genome: &Genome, from: u32, to: u32) -> bool {
    if from == to {
        return true;
    }
    // DFS from `to` looking for `from`.
    let mut stack = alloc::vec![to];
    let mut visited: Vec<u32> = Vec::new();
    while let Some(node) = stack.pop() {
        if node == from {
            return true;
        }
        if visited.contains(&node) {
            continue;
        }
        visited.push(node);
        for c in &genome.connections {
            if c.enabled && c.from == node {
                stack.push(c.to);
            }
        }
    }
    false
}

fn insert_sorted(genome: &mut Genome, gene: ConnectionGene) {
    let at = genome
        .connections
        .partition_point(|c| c.innovation < gene.innovation);
    genome.connections.insert(at, gene);
}

fn mutate_weights(genome: &mut Genome, cfg: &NeatConfig, rng: &mut Rng) {
    for c in &mut genome.connections {
        if rng.chance(cfg.p_weight_reset) {
            c.weight = rng.range(-cfg.weight_reset_range, cfg.weight_reset_range);
        } else {
            c.weight += rng.normal(cfg.weight_perturb_sigma);
        }
        c.weight = c.weight.clamp(-cfg.weight_clamp, cfg.weight_clamp);
    }
}

fn mutate_add_connection(
    genome: &mut Genome,
    registry: &mut InnovationRegistry,
    cfg: &NeatConfig,
    rng: &mut Rng,
) {
    const ATTEMPTS: usize = 20;
    for _ in 0..ATTEMPTS {
        let from = genome.nodes[rng.below(genome.nodes.len())].id;
        // Targets: anything that is not the input or the bias.
        let targets: usize = genome.nodes.len() - 2;
        let mut pick = rng.below(targets);
        let to = genome
            .nodes
            .iter()
            .filter(|n| n.id != INPUT_NODE && n.id != BIAS_NODE)
            .find(|_| {
                if pick == 0 {
                    true
                } else {
                    pick -= 1;
                    false
                }
            })
            .map(|n| n.id)
            .expect("at least the outputs are targets");
        if genome.has_connection(from, to) {
            continue;
        }
        if !cfg.allow_recurrent && creates_cycle(genome, from, to) {
            continue;
        }
        let innovation = registry.connection_innovation(from, to);
        debug_assert!(!genome.connections.iter().any(|c| c.innovation == innovation));
        insert_sorted(
            genome,
            ConnectionGene {
                innovation,
                from,
                to,
                weight: rng.range(-cfg.init_weight_range, cfg.init_weight_range),
                enabled: true,
            },
        );
        return;
    }
}

fn mutate_add_node(genome: &mut Genome, registry: &mut InnovationRegistry, rng: &mut Rng) {
    let enabled: Vec<usize> = genome
        .connections
        .iter()
        .enumerate()
        .filter(|(_, c)| c.enabled)
        .map(|(i, _)| i)
        .collect();
    if enabled.is_empty() {
        return;
    }
    // Scan candidates from a random start; skip splits whose hidden node
    // this genome already carries (possible when the same connection was
    // split in an earlier generation).
    let start = rng.below(enabled.len());
    for k in 0..enabled.len() {
        let idx = enabled[(start + k) % enabled.len()];
        let conn = genome.connections[idx];
        let record = registry.split_connection(conn.innovation, conn.from, conn.to);
        if genome.has_node(record.node_id) {
            continue;
        }
        genome.connections[idx].enabled = false;
        genome.nodes.push(NodeGene {
            id: record.node_id,
            role: NodeRole::Hidden,
        });
        insert_sorted(
            genome,
            ConnectionGene {
                innovation: record.incoming_innovation,
                from: conn.from,
                to: record.node_id,
                weight: 1.0,
                enabled: true,
            },
        );
        insert_sorted(
            genome,
            ConnectionGene {
                innovation: record.outgoing_innovation,
                from: record.node_id,
                to: conn.to,
                weight: conn.weight,
                enabled: true,
            },
        );
        return;
    }
}

fn mutate(genome: &mut Genome, registry: &mut InnovationRegistry, cfg: &NeatConfig, rng: &mut Rng) {
    if rng.chance(cfg.p_weight_mutate) {
        mutate_weights(genome, cfg, rng);
    }
    if rng.chance(cfg.p_add_connection) {
        mutate_add_connection(genome, registry, cfg, rng);
    }
    if rng.chance(cfg.p_add_node) {
        mutate_add_node(genome, registry, rng);
    }
    debug_assert_eq!(genome.validate(), Ok(()));
}

/// Produce the next population: fitness sharing sets per-species offspring
/// quotas (largest-remainder rounding), champions of quota-holding species
/// are copied verbatim, and the rest are bred from each species' top
/// survival fraction by crossover or cloning followed by mutation.
pub fn reproduce(
    population: &[Genome],
    species: &mut [Species],
    registry: &mut InnovationRegistry,
    cfg: &NeatConfig,
    rng: &mut Rng,
) -> Result<Vec<Genome>, NeatError> {
    if species.is_empty() {
        return Err(NeatError::NoSpecies);
    }

    // Stagnation bookkeeping on raw best fitness.
    for s in species.iter_mut() {
        let generation_best = s
            .members
            .iter()
            .map(|&i| population[i].fitness)
            .fold(f64::NEG_INFINITY, f64::max);
        if generation_best > s.best_fitness {
            s.best_fitness = generation_best;
            s.stagnation = 0;
        } else {
            s.stagnation += 1;
        }
    }

    // The species holding the population champion is exempt from
    // stagnation removal and is guaranteed a quota below, so the best
    // fitness never regresses while the evaluator and morphology are fixed.
    let champion = population
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.fitness.partial_cmp(&b.fitness).expect("finite fitness"))
        .map(|(i, _)| i)
        .expect("non-empty population");
    let champion_species = species
        .iter()
        .position(|s| s.members.contains(&champion))
        .expect("champion belongs to a species");

    // Species weight = mean shared fitness = sum(f) / |s|^2. Stagnant
    // species stop reproducing.
    let mut weights: Vec<f64> = species
        .iter()
        .map(|s| {
            let sum: f64 = s.members.iter().map(|&i| population[i].fitness).sum();
            let n = s.members.len() as f64;
            sum / (n * n)
        })
        .collect();
    for (i, (s, w)) in species.iter().zip(weights.iter_mut()).enumerate() {
        if i != champion_species && s.stagnation > cfg.stagnation_limit {
            *w = 0.0;
        }
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        // Nobody scored; share offspring among non-stagnant species.
        for (i, (s, w)) in species.iter().zip(weights.iter_mut()).enumerate() {
            *w = if i == champion_species || s.stagnation <= cfg.stagnation_limit {
                1.0
            } else {
                0.0
            };
        }
    }

    let mut quotas = apportion(&weights, cfg.population_size);
    if quotas[champion_species] == 0 {
        let donor = quotas
            .iter()
            .enumerate()
            .max_by_key(|&(_, &q)| q)
            .map(|(i, _)| i)
            .expect("non-empty quota list");
        quotas[donor] -= 1;
        quotas[champion_species] += 1;
    }
    let mut next = Vec::with_capacity(cfg.population_size);
    for (s, &quota) in species.iter().zip(quotas.iter()) {
        if quota == 0 {
            continue;
        }
        // Rank members best-first; ties keep population order.
        let mut ranked = s.members.clone();
        ranked.sort_by(|&a, &b| {
            population[b]
                .fitness
                .partial_cmp(&population[a].fitness)
                .expect("finite fitness")
                .then(a.cmp(&b))
        });

        let elites = cfg.elitism.min(quota).min(ranked.len());
        for &champion in ranked.iter().take(elites) {
            next.push(population[champion].clone());
        }

        let pool_len = ((cfg.survival_fraction * ranked.len() as f64) as usize).max(1);
        let pool = &ranked[..pool_len.min(ranked.len())];
        for _ in elites..quota {
            let mut child = if pool.len() >= 2 && rng.chance(cfg.crossover_rate) {
                let a = pool[rng.below(pool.len())];
                let b = loop {
                    let candidate = pool[rng.below(pool.len())];
                    if candidate != a {
                        break candidate;
                    }
                };
                crossover(&population[a], &population[b], cfg, rng)
            } else {
                let parent = pool[rng.below(pool.len())];
                let mut clone = population[parent].clone();
                clone.fitness = 0.0;
                clone
            };
            mutate(&mut child, registry, cfg, rng);
            next.push(child);
        }
    }
    debug_assert_eq!(next.len(), cfg.population_size);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::OUTPUT_NODES;

    fn flat_genome(weight: f64, fitness: f64) -> Genome {
        let mut g = Genome::empty();
        for (j, &out) in OUTPUT_NODES.iter().enumerate() {
            g.connections.push(ConnectionGene {
                innovation: j as u32,
                from: INPUT_NODE,
                to: out,
                weight,
                enabled: true,
            });
        }
        g.fitness = fitness;
        g
    }

    #[test]
    fn apportion_preserves_total_and_largest_remainders() {
        assert_eq!(apportion(&[1.0, 1.0, 1.0], 9), alloc::vec![3, 3, 3]);
        assert_eq!(apportion(&[0.0, 0.0], 4), alloc::vec![2, 2]);
        // 10 * [0.55, 0.25, 0.20] = [5.5, 2.5, 2.0]: floors take 9, the
        // leftover goes to the largest remainder (tie -> earlier index).
        assert_eq!(apportion(&[0.55, 0.25, 0.20], 10), alloc::vec![6, 2, 2]);
        let counts = apportion(&[3.0, 1.0, 1.0, 1.0], 50);
        assert_eq!(counts.iter().sum::<usize>(), 50);
    }

    #[test]
    fn crossover_endpoints_exist_and_closure_holds() {
        let mut rng = Rng::from_seed(5);
        let cfg = NeatConfig::default();
        let mut a = flat_genome(1.0, 2.0);
        // Give `a` an extra hidden node and connections.
        let mut registry = InnovationRegistry::new();
        mutate_add_node(&mut a, &mut registry, &mut rng);
        mutate_add_connection(&mut a, &mut registry, &cfg, &mut rng);
        let b = flat_genome(-1.0, 1.0);
        for _ in 0..50 {
            let child = crossover(&a, &b, &cfg, &mut rng);
            assert_eq!(child.validate(), Ok(()));
            for c in &child.connections {
                assert!(
                    a.connections.iter().any(|g| g.innovation == c.innovation)
                        || b.connections.iter().any(|g| g.innovation == c.innovation)
                );
            }
        }
    }

    #[test]
    fn add_node_disables_split_connection_and_rewires() {
        let mut rng = Rng::from_seed(1);
        let mut registry = InnovationRegistry::new();
        let mut g = flat_genome(0.7, 0.0);
        let nodes_before = g.nodes.len();
        let conn_before = g.connections.len();
        mutate_add_node(&mut g, &mut registry, &mut rng);
        assert_eq!(g.nodes.len(), nodes_before + 1);
        assert_eq!(g.connections.len(), conn_before + 2);
        let disabled: Vec<_> = g.connections.iter().filter(|c| !c.enabled).collect();
        assert_eq!(disabled.len(), 1);
        let split = disabled[0];
        let hidden = g.nodes.last().unwrap().id;
        let incoming = g
            .connections
            .iter()
            .find(|c| c.to == hidden)
            .expect("incoming half");
        let outgoing = g
            .connections
            .iter()
            .find(|c| c.from == hidden)
            .expect("outgoing half");
        assert_eq!(incoming.weight, 1.0);
        assert_eq!(outgoing.weight, split.weight);
        assert_eq!(incoming.from, split.from);
        assert_eq!(outgoing.to, split.to);
        assert_eq!(g.validate(), Ok(()));
    }

    #[test]
    fn add_connection_respects_feedforward_flag() {
        let cfg = NeatConfig {
            allow_recurrent: false,
            p_add_connection: 1.0,
            ..NeatConfig::default()
        };
        let mut rng = Rng::from_seed(3);
        let mut registry = InnovationRegistry::new();
        let mut g = flat_genome(0.5, 0.0);
        for _ in 0..30 {
            mutate_add_connection(&mut g, &mut registry, &cfg, &mut rng);
            mutate_add_node(&mut g, &mut registry, &mut rng);
        }
        assert_eq!(g.validate(), Ok(()));
        for c in g.connections.iter().filter(|c| c.enabled) {
            let mut trimmed = g.clone();
            trimmed
                .connections
                .retain(|x| x.innovation != c.innovation);
            assert!(
                !creates_cycle(&trimmed, c.from, c.to),
                "cycle via {} -> {}",
                c.from,
                c.to
            );
        }
    }

    #[test]
    fn reproduce_keeps_population_size_and_elites() {
        let cfg = NeatConfig {
            population_size: 12,
            ..NeatConfig::default()
        };
        let mut rng = Rng::from_seed(11);
        let mut registry = InnovationRegistry::new();
        let population: Vec<Genome> = (0..12)
            .map(|i| flat_genome(i as f64 * 0.1, i as f64))
            .collect();
        let mut species = crate::neat::speciate(&population, Vec::new(), 3.0, &cfg);
        let next = reproduce(&population, &mut species, &mut registry, &cfg, &mut rng).unwrap();
        assert_eq!(next.len(), 12);
        // The champion (fitness 11, weight 1.1) survives verbatim.
        assert!(next
            .iter()
            .any(|g| g.connections[0].weight == 1.1 && g.fitness == 11.0));
    }

    #[test]
    fn clones_only_when_all_rates_zero() {
        let cfg = NeatConfig {
            population_size: 10,
            p_weight_mutate: 0.0,
            p_add_connection: 0.0,
            p_add_node: 0.0,
            crossover_rate: 0.0,
            survival_fraction: 1.0,
            ..NeatConfig::default()
        };
        let mut rng = Rng::from_seed(2);
        let mut registry = InnovationRegistry::new();
        let population: Vec<Genome> = (0..10).map(|i| flat_genome(0.25, i as f64)).collect();
        let mut species = crate::neat::speciate(&population, Vec::new(), 3.0, &cfg);
        let next = reproduce(&population, &mut species, &mut registry, &cfg, &mut rng).unwrap();
        for child in &next {
            assert_eq!(child.connections, population[0].connections);
            assert_eq!(child.nodes, population[0].nodes);
        }
    }

    #[test]
    fn empty_species_list_is_an_error() {
        let cfg = NeatConfig::default();
        let mut rng = Rng::from_seed(0);
        let mut registry = InnovationRegistry::new();
        let population = alloc::vec![flat_genome(0.0, 0.0)];
        let result = reproduce(&population, &mut [], &mut registry, &cfg, &mut rng);
        assert!(matches!(result, Err(NeatError::NoSpecies)));
    }
}
