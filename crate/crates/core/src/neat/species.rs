//! Compatibility distance and speciation.

use alloc::vec::Vec;

use super::NeatConfig;
use crate::controller::Genome;

/// A group of topologically similar genomes sharing fitness.
#[derive(Clone, Debug)]
pub struct Species {
    /// Classification anchor, carried over from the previous generation.
    pub representative: Genome,
    /// Indices into the current population.
    pub members: Vec<usize>,
    /// Best raw fitness this species has ever produced.
    pub best_fitness: f64,
    /// Generations since `best_fitness` last improved.
    pub stagnation: u32,
}

/// NEAT compatibility distance:
/// `c1 * E / N + c2 * D / N + c3 * mean(|dw|)` over matching genes, where
/// N is the larger connection count, taken as 1 for genomes under 20 genes.
pub fn compatibility_distance(a: &Genome, b: &Genome, cfg: &NeatConfig) -> f64 {
    let ca = &a.connections;
    let cb = &b.connections;
    let max_a = ca.last().map_or(0, |c| c.innovation);
    let max_b = cb.last().map_or(0, |c| c.innovation);

    let mut i = 0;
    let mut j = 0;
    let mut matching = 0usize;
    let mut weight_diff = 0.0;
    let mut disjoint = 0usize;
    let mut excess = 0usize;
    while i < ca.len() || j < cb.len() {
        match (ca.get(i), cb.get(j)) {
            (Some(ga), Some(gb)) if ga.innovation == gb.innovation => {
                matching += 1;
                weight_diff += (ga.weight - gb.weight).abs();
                i += 1;
                j += 1;
            }
            // While both lists are live, an unmatched gene is inside the
            // other's innovation range: disjoint. Genes past the other's
            // maximum only appear once that list is exhausted: excess.
            (Some(ga), Some(gb)) if ga.innovation < gb.innovation => {
                debug_assert!(ga.innovation < max_b);
                disjoint += 1;
                i += 1;
            }
            (Some(_), Some(gb)) => {
                debug_assert!(gb.innovation < max_a);
                disjoint += 1;
                j += 1;
            }
            (Some(_), None) => {
                excess += 1;
                i += 1;
            }
            (None, Some(_)) => {
                excess += 1;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }

    let larger = ca.len().max(cb.len());
    let n = if larger < 20 { 1.0 } else { larger as f64 };
    let mean_weight_diff = if matching > 0 {
        weight_diff / matching as f64
    } else {
        0.0
    };
    cfg.compat_excess * excess as f64 / n
        + cfg.compat_disjoint * disjoint as f64 / n
        + cfg.compat_weight * mean_weight_diff
}

/// Assign every genome to the first species whose representative lies
/// within `threshold`, founding new species as needed. Species that end up
/// empty are dropped; surviving species get their representative replaced
/// by their first member of this generation.
pub fn speciate(
    population: &[Genome],
    mut species: Vec<Species>,
    threshold: f64,
    cfg: &NeatConfig,
) -> Vec<Species> {
    for s in &mut species {
        s.members.clear();
    }
    for (index, genome) in population.iter().enumerate() {
        let home = species
            .iter_mut()
            .find(|s| compatibility_distance(genome, &s.representative, cfg) < threshold);
        match home {
            Some(s) => s.members.push(index),
            None => species.push(Species {
                representative: genome.clone(),
                members: alloc::vec![index],
                best_fitness: f64::NEG_INFINITY,
                stagnation: 0,
            }),
        }
    }
    species.retain(|s| !s.members.is_empty());
    for s in &mut species {
        s.representative = population[s.members[0]].clone();
    }
    debug_assert_eq!(
        species.iter().map(|s| s.members.len()).sum::<usize>(),
        population.len()
    );
    species
}
