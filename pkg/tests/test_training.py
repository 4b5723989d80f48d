from dataclasses import replace

import numpy as np
import pytest

from pcgnn.diversity import NoveltyConfig
from pcgnn.fitness import solvability_fitness
from pcgnn.generator import GeneratorSettings
from pcgnn.neat import NeatConfig, initial_population, validate_genome
from pcgnn.training import (FitnessWeights, TrainConfig, TrainReport, evaluate_individual,
                            individual_rng, selection_key, train)
from pcgnn.tilemap import MAZE_TILESET, Game

SETTINGS = GeneratorSettings(MAZE_TILESET)


def small_config(**overrides) -> TrainConfig:
    base = dict(game=Game.MAZE, generator_settings=SETTINGS, generations=4, levels_per_individual=4,
                neat=NeatConfig(population_size=8), novelty=NoveltyConfig(k_neighbors=3, intra_k=2),
                level_width=8, level_height=8, master_seed=0)
    base.update(overrides)
    return TrainConfig(**base)


def some_genome(seed=0):
    pop, _ = initial_population(NeatConfig(population_size=2), 12, 1, np.random.default_rng(seed))
    return pop[0]


def test_weights_validation():
    with pytest.raises(ValueError):
        FitnessWeights(0, 0, 0)
    with pytest.raises(ValueError):
        FitnessWeights(-1, 1, 1)


def test_config_validation():
    with pytest.raises(ValueError):
        small_config(generations=0)
    with pytest.raises(ValueError):
        small_config(levels_per_individual=1)
    small_config(levels_per_individual=1, weights=FitnessWeights(0.5, 0.5, 0))


def test_simple_fitness_is_solvability_alone():
    cfg = small_config(weights=FitnessWeights(0, 1, 0))
    levels, simple = evaluate_individual(some_genome(), cfg, np.random.default_rng(1))
    assert len(levels) == 4
    assert simple == solvability_fitness(levels)


def test_duplicate_levels_have_zero_intra():
    # a genome with all-zero weights always emits the empty maze
    g = some_genome()
    g.connections = [replace(c, weight=0.0) for c in g.connections]
    cfg = small_config(levels_per_individual=2, weights=FitnessWeights(0, 0, 1))
    levels, simple = evaluate_individual(g, cfg, np.random.default_rng(0))
    assert levels[0] == levels[1] and simple == 0


def test_evaluate_individual_deterministic():
    cfg = small_config()
    a = evaluate_individual(some_genome(3), cfg, individual_rng(0, 1, 2))
    b = evaluate_individual(some_genome(3), cfg, individual_rng(0, 1, 2))
    assert a == b


def test_one_generation_pair():
    cfg = small_config(generations=1, neat=NeatConfig(population_size=2))
    best, report = train(cfg)
    assert len(report.rows) == 1
    assert report.best_composite == report.rows[0].best
    assert best.fitness == report.rows[0].best


@pytest.mark.parametrize("seed", range(5))
def test_best_trace_monotone_without_novelty(seed):
    cfg = small_config(generations=8, master_seed=seed, weights=FitnessWeights(0, 0.5, 0.5))
    _, report = train(cfg)
    best = [row.best for row in report.rows]
    assert all(b >= a for a, b in zip(best, best[1:])), best


def test_training_returns_best_ever():
    _, report = train(small_config(generations=5))
    assert report.best_composite == max(row.best for row in report.rows)


def test_workers_do_not_change_results(tmp_path):
    cfg = small_config(generations=3)
    g1, r1 = train(cfg, workers=1)
    g2, r2 = train(cfg, workers=2)
    assert g1.structure_key() == g2.structure_key()
    assert [(r.best, r.mean, r.worst) for r in r1.rows] == [(r.best, r.mean, r.worst) for r in r2.rows]


def test_argmax_invariant_under_weight_scaling():
    # doubling is exact in floating point, so every comparison is preserved
    w = FitnessWeights(0.399, 0.202, 0.399)
    a = train(small_config(generations=3, weights=w))
    b = train(small_config(generations=3, weights=FitnessWeights(2 * w.novelty, 2 * w.solvability, 2 * w.intra)))
    assert a[0].structure_key() == b[0].structure_key()
    for ra, rb in zip(a[1].rows, b[1].rows):
        assert rb.best == 2 * ra.best


def test_generation_hook_sees_valid_genomes():
    seen = []

    def hook(gen, population, species):
        seen.append(gen)
        assert all(not validate_genome(g) for g in population)
        assert sorted(i for s in species for i in s.members) == list(range(len(population)))

    train(small_config(generations=3), on_generation=hook)
    assert seen == [0, 1, 2]


def test_selection_key_prefers_smaller_genomes():
    small, big = some_genome(), some_genome()
    big.nodes = big.nodes + [replace(big.nodes[-1], node_id=99)]
    assert selection_key(1.0, 0.5, small) > selection_key(1.0, 0.5, big)
    assert selection_key(1.0, 0.6, big) > selection_key(1.0, 0.5, small)


def test_report_csv(tmp_path):
    _, report = train(small_config(generations=2))
    report.write_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == ",".join(TrainReport.COLUMNS)
    assert len(lines) == 3 and lines[1].startswith("0,")
