"""DirectGA baseline: evolve each level directly as a flat tile grid."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pcgnn import diversity
from pcgnn.diversity import DistanceFunction, NoveltyArchive, NoveltyConfig
from pcgnn.fitness import entropy_fitness, partial_solvability
from pcgnn.tilemap import MAZE_TILESET, Level, Tileset

# A genome is a flat int64 array of tile indices, row-major.
GridGenome = np.ndarray


@dataclass(frozen=True)
class DirectGAConfig:
    population_size: int = 100
    generations: int = 100
    desired_entropy: float = 1.0
    chunk_edge: int = 7
    use_partial_solvability: bool = True
    use_novelty: bool = False
    entropy_weight: float = 0.5
    partial_solvability_weight: float = 0.5
    novelty_weight: float = 0.0
    novelty: NoveltyConfig = field(default_factory=lambda: NoveltyConfig(
        k_neighbors=15, archive_lambda=1, distance=DistanceFunction.VISUAL_DIVERSITY, intra_k=1))
    mutation_prob: float = 0.2
    elitism: int = 1

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must be in [0, 1]")
        if not 0 <= self.elitism <= self.population_size:
            raise ValueError("elitism must lie in [0, population_size]")
        if min(self.entropy_weight, self.partial_solvability_weight, self.novelty_weight) < 0:
            raise ValueError("fitness weights must be nonnegative")


def two_point_crossover(g1: GridGenome, g2: GridGenome,
                        rng: np.random.Generator) -> tuple[GridGenome, GridGenome]:
    """Swap the segment between two uniform cut points ``i <= j`` in ``[0, len]``."""
    if len(g1) != len(g2):
        raise ValueError(f"genome lengths differ: {len(g1)} vs {len(g2)}")
    i, j = sorted(int(v) for v in rng.integers(0, len(g1) + 1, size=2))
    c1, c2 = np.array(g1), np.array(g2)
    c1[i:j], c2[i:j] = g2[i:j], g1[i:j]
    return c1, c2


def roulette_probabilities(fitnesses) -> np.ndarray:
    f = np.asarray(fitnesses, dtype=np.float64)
    if np.any(f < 0):
        raise ValueError("roulette selection needs nonnegative fitnesses")
    total = f.sum()
    if total == 0:
        return np.full(len(f), 1.0 / len(f))
    return f / total


def roulette_select(population, fitnesses, rng: np.random.Generator):
    """Pick one individual with probability proportional to its fitness;
    uniform when every fitness is zero."""
    if len(population) != len(fitnesses) or not len(population):
        raise ValueError("need one fitness per individual and a nonempty population")
    return population[int(rng.choice(len(population), p=roulette_probabilities(fitnesses)))]


def mutate_grid(genome: GridGenome, n_tiles: int, prob: float, rng: np.random.Generator) -> GridGenome:
    """Resample each gene uniformly with probability ``prob``."""
    out = np.array(genome)
    mask = rng.random(len(out)) < prob
    out[mask] = rng.integers(0, n_tiles, int(mask.sum()))
    return out


def _fitnesses(levels: list[Level], config: DirectGAConfig, archive: NoveltyArchive,
               rng: np.random.Generator) -> tuple[np.ndarray, NoveltyArchive]:
    fit = np.array([config.entropy_weight * entropy_fitness(lvl, config.chunk_edge, config.desired_entropy)
                    for lvl in levels])
    if config.use_partial_solvability:
        fit += config.partial_solvability_weight * np.array([partial_solvability(l) for l in levels])
    if config.use_novelty:
        scores, archive = diversity.novelty_scores([[l] for l in levels], archive, config.novelty, rng)
        fit += config.novelty_weight * np.array(scores)
    return fit, archive


def directga_evolve(config: DirectGAConfig, width: int, height: int, rng: np.random.Generator,
                    tileset: Tileset = MAZE_TILESET) -> Level:
    """Evolve one level from a fresh random population and return the fittest grid.

    Each generation keeps the ``elitism`` best genomes unchanged and fills
    the rest with roulette-selected parent pairs, two-point crossover and
    per-gene mutation.
    """
    n = tileset.n
    size = width * height
    to_level = lambda g: Level(g.reshape(height, width), tileset)  # noqa: E731
    population = [rng.integers(0, n, size) for _ in range(config.population_size)]
    archive = NoveltyArchive()
    fit, archive = _fitnesses([to_level(g) for g in population], config, archive, rng)

    for _ in range(config.generations):
        order = np.argsort(-fit, kind="stable")
        nxt = [population[i] for i in order[:config.elitism]]
        probs = roulette_probabilities(fit)
        while len(nxt) < config.population_size:
            a, b = rng.choice(len(population), size=2, p=probs)
            c1, c2 = two_point_crossover(population[a], population[b], rng)
            nxt.append(mutate_grid(c1, n, config.mutation_prob, rng))
            if len(nxt) < config.population_size:
                nxt.append(mutate_grid(c2, n, config.mutation_prob, rng))
        population = nxt
        fit, archive = _fitnesses([to_level(g) for g in population], config, archive, rng)

    return to_level(population[int(np.argmax(fit))])


DIRECTGA_PLUS = DirectGAConfig()
DIRECTGA_NOVELTY = DirectGAConfig(
    population_size=50, generations=100, desired_entropy=0.0,
    entropy_weight=0.33, partial_solvability_weight=0.33, novelty_weight=0.33, use_novelty=True)
