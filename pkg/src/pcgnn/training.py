"""Evolving level generators: NEAT over networks, scored by solvability and novelty."""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from pcgnn import diversity
from pcgnn.diversity import NoveltyArchive, NoveltyConfig
from pcgnn.fitness import solvability_fitness
from pcgnn.generator import Generator, GeneratorSettings, window_input_width
from pcgnn.neat import Genome, NeatConfig, initial_population, reproduce, speciate
from pcgnn.tilemap import Game, Level

log = logging.getLogger(__name__)

# Fixed stream tags so the initial population, reproduction and archive
# sampling never share random numbers with per-individual evaluation.
_INIT_STREAM = 1_000_001
_REPRODUCE_STREAM = 1_000_002
_ARCHIVE_STREAM = 1_000_003


@dataclass(frozen=True)
class FitnessWeights:
    novelty: float = 0.399
    solvability: float = 0.202
    intra: float = 0.399

    def __post_init__(self):
        values = (self.novelty, self.solvability, self.intra)
        if min(values) < 0 or max(values) <= 0:
            raise ValueError("weights must be nonnegative with at least one positive")


@dataclass(frozen=True)
class TrainConfig:
    game: Game
    generator_settings: GeneratorSettings
    generations: int = 200
    levels_per_individual: int = 24
    neat: NeatConfig = field(default_factory=NeatConfig)
    novelty: NoveltyConfig = field(default_factory=NoveltyConfig)
    weights: FitnessWeights = field(default_factory=FitnessWeights)
    level_width: int = 14
    level_height: int = 14
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "game", Game(self.game))
        if self.generations < 1 or self.levels_per_individual < 1:
            raise ValueError("generations and levels_per_individual must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if self.weights.intra > 0 and self.levels_per_individual < 2:
            raise ValueError("intra-novelty needs levels_per_individual >= 2")


@dataclass(frozen=True)
class Evaluation:
    levels: tuple[Level, ...]
    solvability: float
    intra: float
    simple: float
    features: tuple = field(repr=False, compare=False, default=())


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best: float
    mean: float
    worst: float
    best_solv: float
    best_intra: float
    best_novelty: float
    seconds_phase1: float
    seconds_phase2: float


@dataclass
class TrainReport:
    rows: list[GenerationStats] = field(default_factory=list)
    best_composite: float = float("-inf")
    best_generation: int = -1

    COLUMNS = ("generation", "best", "mean", "worst", "best_solv", "best_intra",
               "best_novelty", "seconds_phase1", "seconds_phase2")

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.COLUMNS)
            for row in self.rows:
                writer.writerow([getattr(row, c) if c == "generation" else repr(float(getattr(row, c)))
                                 for c in self.COLUMNS])


def individual_rng(master_seed: int, generation: int, index: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, generation, index])


def _evaluate(genome: Genome, config: TrainConfig, rng: np.random.Generator) -> Evaluation:
    generator = Generator.from_genome(genome, config.generator_settings)
    levels = tuple(generator.generate(config.level_width, config.level_height, rng)
                   for _ in range(config.levels_per_individual))
    d = config.novelty.distance
    features = tuple(diversity.prepare(lvl, d) for lvl in levels)
    w = config.weights
    solv = solvability_fitness(levels) if w.solvability > 0 else 0.0
    intra = (diversity.intra_novelty_prepared(features, config.novelty.intra_k, d)
             if w.intra > 0 else 0.0)
    simple = w.solvability * solv + w.intra * intra
    return Evaluation(levels, solv, intra, simple, features)


def evaluate_individual(genome: Genome, config: TrainConfig,
                        rng: np.random.Generator) -> tuple[list[Level], float]:
    """Generate N levels and score them on solvability and intra-novelty.

    Returns the levels and ``w_solv * solvability + w_intra * intra_novelty``.
    Population novelty is added later since it depends on the other genomes.
    """
    ev = _evaluate(genome, config, rng)
    return list(ev.levels), ev.simple


def _evaluate_task(args) -> Evaluation:
    genome, config, generation, index = args
    return _evaluate(genome, config, individual_rng(config.master_seed, generation, index))


def selection_key(composite: float, solvability: float, genome: Genome) -> tuple:
    """Higher is better: composite fitness, then solvability, then the smaller genome."""
    return composite, solvability, -genome.size


GenerationHook = Callable[[int, list[Genome], list], None]


def train(config: TrainConfig, workers: int = 1,
          on_generation: GenerationHook | None = None) -> tuple[Genome, TrainReport]:
    """Run the full evolutionary loop and return the best genome ever seen.

    Args:
        config: Complete run description, including the master seed.
        workers: Processes used for per-individual evaluation. Results do not
            depend on this value.
        on_generation: Optional ``(generation, population, species)`` callback
            invoked after speciation, e.g. to validate genomes.

    Returns:
        The genome with the highest composite fitness over all generations
        and the per-generation report.
    """
    settings = config.generator_settings
    n_inputs = window_input_width(settings)
    seed = config.master_seed
    population, registry = initial_population(config.neat, n_inputs, settings.output_count,
                                              np.random.default_rng([seed, _INIT_STREAM]))
    repro_rng = np.random.default_rng([seed, _REPRODUCE_STREAM])
    archive_rng = np.random.default_rng([seed, _ARCHIVE_STREAM])
    archive = NoveltyArchive()
    species: list = []
    next_key = 0
    cached: list[Evaluation | None] = [None] * len(population)
    report = TrainReport()
    best_key = None
    best_genome = population[0]
    w = config.weights

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for gen in range(config.generations):
            registry.next_generation()
            species, next_key = speciate(population, species, config.neat, next_key, gen)
            if on_generation is not None:
                on_generation(gen, population, species)

            t0 = time.perf_counter()
            todo = [i for i, ev in enumerate(cached) if ev is None]
            tasks = [(population[i], config, gen, i) for i in todo]
            if pool is not None:
                results = list(pool.map(_evaluate_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
            else:
                results = [_evaluate_task(t) for t in tasks]
            for i, ev in zip(todo, results):
                cached[i] = ev
            evals: list[Evaluation] = cached  # type: ignore[assignment]
            t1 = time.perf_counter()

            novelty, archive = diversity.novelty_scores(
                [ev.levels for ev in evals], archive, config.novelty, archive_rng,
                features=[ev.features for ev in evals])
            composite = [ev.simple + w.novelty * nov for ev, nov in zip(evals, novelty)]
            for genome, fit in zip(population, composite):
                genome.fitness = fit

            gen_best = max(range(len(population)),
                           key=lambda i: selection_key(composite[i], evals[i].solvability, population[i]))
            key = selection_key(composite[gen_best], evals[gen_best].solvability, population[gen_best])
            if best_key is None or key > best_key:
                best_key = key
                best_genome = population[gen_best].copy()
                best_genome.fitness = composite[gen_best]
                report.best_composite = composite[gen_best]
                report.best_generation = gen

            if gen + 1 < config.generations:
                offspring, species, sources = reproduce(species, population, composite, config.neat,
                                                        registry, repro_rng, gen)
                # elites are unchanged copies, so their evaluation carries over
                cached = [None if src is None else evals[src] for src in sources]
                population = offspring
            t2 = time.perf_counter()

            report.rows.append(GenerationStats(
                gen, max(composite), float(np.mean(composite)), min(composite),
                evals[gen_best].solvability, evals[gen_best].intra, novelty[gen_best],
                t1 - t0, t2 - t1))
            log.info("gen %d best %.4f mean %.4f solv %.3f", gen, max(composite),
                     float(np.mean(composite)), evals[gen_best].solvability)
    finally:
        if pool is not None:
            pool.shutdown()
    return best_genome, report


def generate_levels(genome: Genome, settings: GeneratorSettings, width: int, height: int,
                    count: int, rng: np.random.Generator) -> list[Level]:
    generator = Generator.from_genome(genome, settings)
    return [generator.generate(width, height, rng) for _ in range(count)]


def level_solvability(levels: Sequence[Level]) -> float:
    return solvability_fitness(levels)
