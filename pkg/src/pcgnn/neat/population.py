"""Speciation and generational reproduction."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from pcgnn.neat.config import NeatConfig
from pcgnn.neat.genome import Genome, InnovationRegistry, compatibility_distance, crossover, mutate

log = logging.getLogger(__name__)


@dataclass
class Species:
    key: int
    representative: Genome
    members: list[int] = field(default_factory=list)
    best_fitness: float = -math.inf
    last_improved: int = 0


def speciate(population: list[Genome], species: list[Species], config: NeatConfig,
             next_key: int = 0, generation: int = 0) -> tuple[list[Species], int]:
    """Assign every genome to the first species whose representative lies strictly
    within the compatibility threshold, founding new species as needed.

    ``species`` carries representatives (and stagnation bookkeeping) from the
    previous generation; species that attract no members are dropped. The
    representative of each surviving species becomes its first member.
    """
    if not population:
        raise ValueError("cannot speciate an empty population")
    pool = [Species(s.key, s.representative, [], s.best_fitness, s.last_improved) for s in species]
    for idx, genome in enumerate(population):
        for sp in pool:
            if compatibility_distance(genome, sp.representative, config) < config.compatibility_threshold:
                sp.members.append(idx)
                break
        else:
            pool.append(Species(next_key, genome, [idx], last_improved=generation))
            next_key += 1
    survivors = [sp for sp in pool if sp.members]
    for sp in survivors:
        sp.representative = population[sp.members[0]]
    return survivors, next_key


def allocate_offspring(scores: list[float], total: int) -> list[int]:
    """Split ``total`` slots proportionally to ``scores`` (largest remainder)."""
    if not scores:
        return []
    floor = min(scores)
    if floor < 0:
        scores = [s - floor for s in scores]
    mass = sum(scores)
    if mass <= 0:
        scores = [1.0] * len(scores)
        mass = float(len(scores))
    exact = [total * s / mass for s in scores]
    quotas = [int(math.floor(e)) for e in exact]
    remaining = total - sum(quotas)
    by_remainder = sorted(range(len(exact)), key=lambda i: (-(exact[i] - quotas[i]), i))
    for i in by_remainder[:remaining]:
        quotas[i] += 1
    return quotas


def reproduce(species: list[Species], population: list[Genome], fitnesses: list[float],
              config: NeatConfig, registry: InnovationRegistry, rng: np.random.Generator,
              generation: int) -> tuple[list[Genome], list[Species], list[int | None]]:
    """Build the next population.

    Returns ``(offspring, species, elite_sources)`` where ``elite_sources[i]``
    is the index of the current genome that offspring ``i`` copies unchanged,
    or None for genomes produced by crossover and mutation.
    """
    if len(fitnesses) != len(population):
        raise ValueError("one fitness per genome required")
    if not all(math.isfinite(f) for f in fitnesses):
        raise ValueError("fitnesses must be finite")

    best_idx = max(range(len(population)), key=lambda i: fitnesses[i])

    alive = []
    for sp in species:
        top = max(fitnesses[i] for i in sp.members)
        if top > sp.best_fitness:
            sp.best_fitness = top
            sp.last_improved = generation
        alive.append(sp)
    stagnant = {sp.key for sp in alive if generation - sp.last_improved >= config.stagnation_limit}
    holds_best = {sp.key for sp in alive if best_idx in sp.members}

    if stagnant and len(stagnant) == len(alive):
        log.warning("all species stagnant at generation %d; reseeding from the global best", generation)
        return _reseed(population, best_idx, config, registry, rng, generation)

    alive = [sp for sp in alive if sp.key not in stagnant or sp.key in holds_best]

    # Sharing each member's fitness by species size and summing gives the species mean.
    scores = [float(np.mean([fitnesses[i] for i in sp.members])) for sp in alive]
    quotas = allocate_offspring(scores, config.population_size)
    best_sp = next(i for i, sp in enumerate(alive) if sp.key in holds_best)
    if quotas[best_sp] == 0:
        donor = max(range(len(quotas)), key=lambda i: (quotas[i], -i))
        quotas[donor] -= 1
        quotas[best_sp] += 1

    offspring: list[Genome] = []
    elite_sources: list[int | None] = []
    next_species = []
    for sp, quota in zip(alive, quotas):
        if quota == 0:
            continue
        ranked = sorted(sp.members, key=lambda i: (-fitnesses[i], i))
        n_elite = min(config.elitism, quota, len(ranked))
        for i in ranked[:n_elite]:
            offspring.append(population[i].copy())
            elite_sources.append(i)
        cutoff = max(2, int(math.ceil(config.survival_fraction * len(ranked))))
        parents = ranked[:cutoff]
        for _ in range(quota - n_elite):
            a = parents[rng.integers(len(parents))]
            b = parents[rng.integers(len(parents))]
            if a == b:
                child = population[a].copy()
            else:
                child = crossover(population[a], population[b], fitnesses[a], fitnesses[b], rng)
            offspring.append(mutate(child, config, registry, rng))
            elite_sources.append(None)
        next_species.append(Species(sp.key, population[ranked[0]], [], sp.best_fitness, sp.last_improved))
    for g in offspring:
        g.fitness = None
    return offspring, next_species, elite_sources


def _reseed(population: list[Genome], best_idx: int, config: NeatConfig,
            registry: InnovationRegistry, rng: np.random.Generator, generation: int):
    best = population[best_idx]
    offspring = [best.copy()]
    while len(offspring) < config.population_size:
        offspring.append(mutate(best, config, registry, rng))
    for g in offspring:
        g.fitness = None
    species = [Species(0, best, [], -math.inf, generation)]
    return offspring, species, [best_idx] + [None] * (len(offspring) - 1)
