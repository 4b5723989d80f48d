"""Flat ``key = value`` run configuration with named presets.

Resolution order, later wins: game defaults, preset, config file, explicit
overrides. The resolved mapping can be echoed back to a file and loaded again
to reproduce a run exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from pcgnn.directga import DirectGAConfig
from pcgnn.diversity import DistanceFunction, NoveltyConfig
from pcgnn.generator import GeneratorSettings
from pcgnn.neat import NeatConfig
from pcgnn.tilemap import Game, tileset_for
from pcgnn.training import FitnessWeights, TrainConfig


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def _parse_distance(text: str) -> str:
    return DistanceFunction(text.strip()).value


def _parse_game(text: str) -> str:
    return Game(text.strip()).value


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    doc: str


KEYS: dict[str, Key] = {
    "game": Key(_parse_game, "maze or mario"),
    "seed": Key(int, "master seed"),
    "train.generations": Key(int, "PCGNN generations (G)"),
    "train.levels_per_individual": Key(int, "levels generated per network (N)"),
    "train.level_width": Key(int, "training level width"),
    "train.level_height": Key(int, "training level height"),
    "neat.population_size": Key(int, "NEAT population size"),
    "neat.c1": Key(float, "excess-gene coefficient"),
    "neat.c2": Key(float, "disjoint-gene coefficient"),
    "neat.c3": Key(float, "weight-difference coefficient"),
    "neat.compatibility_threshold": Key(float, "speciation threshold"),
    "neat.add_node_prob": Key(float, "add-node mutation probability"),
    "neat.add_conn_prob": Key(float, "add-connection mutation probability"),
    "neat.weight_mutate_rate": Key(float, "per-weight perturbation probability"),
    "neat.weight_replace_rate": Key(float, "per-weight replacement probability"),
    "neat.weight_perturb_span": Key(float, "uniform perturbation half-width"),
    "neat.survival_fraction": Key(float, "share of each species eligible as parents"),
    "neat.elitism": Key(int, "unchanged copies per species"),
    "neat.stagnation_limit": Key(int, "generations without improvement before removal"),
    "novelty.k_neighbors": Key(int, "neighbours averaged for novelty (K)"),
    "novelty.archive_lambda": Key(int, "individuals added to the archive per generation"),
    "novelty.distance": Key(_parse_distance, "level distance function"),
    "novelty.intra_k": Key(int, "neighbours for intra-novelty"),
    "weights.novelty": Key(float, "novelty weight"),
    "weights.solvability": Key(float, "solvability weight"),
    "weights.intra": Key(float, "intra-novelty weight"),
    "generator.context_size": Key(int, "window radius (c)"),
    "generator.predict_size": Key(int, "tiles predicted per query (only 1)"),
    "generator.num_random_vars": Key(int, "random inputs per cell (r)"),
    "generator.perturb_size": Key(float, "input perturbation half-width (p)"),
    "generator.one_hot_inputs": Key(_parse_bool, "one-hot tile inputs"),
    "generator.padding_value": Key(int, "out-of-bounds tile value (fixed -1)"),
    "directga.population_size": Key(int, "DirectGA population"),
    "directga.generations": Key(int, "DirectGA generations"),
    "directga.desired_entropy": Key(float, "target mean chunk entropy"),
    "directga.chunk_edge": Key(int, "entropy chunk side length"),
    "directga.use_partial_solvability": Key(_parse_bool, "include partial solvability"),
    "directga.use_novelty": Key(_parse_bool, "include novelty"),
    "directga.entropy_weight": Key(float, "entropy fitness weight"),
    "directga.partial_solvability_weight": Key(float, "partial solvability weight"),
    "directga.novelty_weight": Key(float, "novelty weight"),
    "directga.k_neighbors": Key(int, "novelty neighbours"),
    "directga.archive_lambda": Key(int, "archive additions per generation"),
    "directga.distance": Key(_parse_distance, "novelty distance"),
    "directga.mutation_prob": Key(float, "per-gene resampling probability"),
    "directga.elitism": Key(int, "best genomes copied unchanged"),
}

MAZE_DEFAULTS: dict[str, Any] = {
    "game": "maze",
    "seed": 0,
    "train.generations": 200,
    "train.levels_per_individual": 24,
    "train.level_width": 14,
    "train.level_height": 14,
    "neat.population_size": 50,
    "neat.c1": 1.0,
    "neat.c2": 1.0,
    "neat.c3": 0.4,
    "neat.compatibility_threshold": 3.0,
    "neat.add_node_prob": 0.03,
    "neat.add_conn_prob": 0.1,
    "neat.weight_mutate_rate": 0.8,
    "neat.weight_replace_rate": 0.1,
    "neat.weight_perturb_span": 0.5,
    "neat.survival_fraction": 0.2,
    "neat.elitism": 2,
    "neat.stagnation_limit": 15,
    "novelty.k_neighbors": 15,
    "novelty.archive_lambda": 0,
    "novelty.distance": "visual_diversity_reachable",
    "novelty.intra_k": 10,
    "weights.novelty": 0.399,
    "weights.solvability": 0.202,
    "weights.intra": 0.399,
    "generator.context_size": 1,
    "generator.predict_size": 1,
    "generator.num_random_vars": 4,
    "generator.perturb_size": 0.1565,
    "generator.one_hot_inputs": False,
    "generator.padding_value": -1,
    "directga.population_size": 100,
    "directga.generations": 100,
    "directga.desired_entropy": 1.0,
    "directga.chunk_edge": 7,
    "directga.use_partial_solvability": True,
    "directga.use_novelty": False,
    "directga.entropy_weight": 0.5,
    "directga.partial_solvability_weight": 0.5,
    "directga.novelty_weight": 0.0,
    "directga.k_neighbors": 15,
    "directga.archive_lambda": 1,
    "directga.distance": "visual_diversity",
    "directga.mutation_prob": 0.2,
    "directga.elitism": 1,
}

MARIO_DEFAULTS: dict[str, Any] = {
    **MAZE_DEFAULTS,
    "game": "mario",
    "train.generations": 150,
    "train.levels_per_individual": 6,
    "train.level_width": 114,
    "neat.population_size": 100,
    "novelty.distance": "visual_diversity",
    "novelty.intra_k": 2,
    "weights.novelty": 0.25,
    "weights.solvability": 0.5,
    "weights.intra": 0.25,
    "generator.perturb_size": 0.0,
    "generator.one_hot_inputs": True,
}

# Per-game overrides on top of the game defaults.
PRESETS: dict[str, dict[str, dict[str, Any]]] = {
    "paper": {"maze": {}, "mario": {}},
    "desk": {
        "maze": {"neat.population_size": 20, "train.generations": 50,
                 "train.levels_per_individual": 12},
        "mario": {"neat.population_size": 20, "train.generations": 30,
                  "train.levels_per_individual": 3, "train.level_width": 56},
    },
    "directga-plus": {g: {
        "directga.population_size": 100, "directga.generations": 100,
        "directga.desired_entropy": 1.0, "directga.use_partial_solvability": True,
        "directga.use_novelty": False, "directga.entropy_weight": 0.5,
        "directga.partial_solvability_weight": 0.5, "directga.novelty_weight": 0.0,
    } for g in ("maze", "mario")},
    "directga-novelty": {g: {
        "directga.population_size": 50, "directga.generations": 100,
        "directga.desired_entropy": 0.0, "directga.use_partial_solvability": True,
        "directga.use_novelty": True, "directga.entropy_weight": 0.33,
        "directga.partial_solvability_weight": 0.33, "directga.novelty_weight": 0.33,
        "directga.k_neighbors": 15, "directga.archive_lambda": 1,
        "directga.distance": "visual_diversity",
    } for g in ("maze", "mario")},
}


def parse_config_text(text: str) -> dict[str, str]:
    """Raw ``key = value`` pairs; ``#`` starts a comment."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(key, "unknown configuration key")
        raw[key] = value
    return raw


def _coerce(key: str, value: Any) -> Any:
    if key not in KEYS:
        raise ConfigError(key, "unknown configuration key")
    if isinstance(value, str):
        try:
            return KEYS[key].parse(value)
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from None
    return value


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class RunConfig:
    """Fully resolved configuration: every key in ``KEYS`` has a value."""

    def __init__(self, values: dict[str, Any]):
        missing = set(KEYS) - set(values)
        if missing:
            raise ConfigError(sorted(missing)[0], "missing value")
        self.values = dict(values)
        self._validate()

    @classmethod
    def resolve(cls, game: str | None = None, preset: str | None = None,
                file_text: str | None = None, overrides: dict[str, Any] | None = None) -> "RunConfig":
        file_values = {k: _coerce(k, v) for k, v in parse_config_text(file_text or "").items()}
        override_values = {k: _coerce(k, v) for k, v in (overrides or {}).items()}
        if game is not None:
            override_values["game"] = _coerce("game", game)
        chosen = override_values.get("game", file_values.get("game", "maze"))
        values = dict(MARIO_DEFAULTS if chosen == "mario" else MAZE_DEFAULTS)
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigError("preset", f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
            values.update(PRESETS[preset][chosen])
        values.update(file_values)
        values.update(override_values)
        return cls(values)

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    @property
    def game(self) -> Game:
        return Game(self.values["game"])

    def to_text(self) -> str:
        return "".join(f"{k} = {_format(self.values[k])}\n" for k in KEYS)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    def _section(self, prefix: str) -> dict[str, Any]:
        return {k[len(prefix) + 1:]: v for k, v in self.values.items() if k.startswith(prefix + ".")}

    def _validate(self) -> None:
        # build every derived config once so bad values surface with their key
        builders = {
            "neat": self.neat_config, "generator": self.generator_settings,
            "novelty": self.novelty_config, "weights": self.fitness_weights,
            "train": self.train_config, "directga": self.directga_config,
        }
        for section, build in builders.items():
            try:
                build()
            except ValueError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(section, str(exc)) from None

    def neat_config(self) -> NeatConfig:
        return NeatConfig(**self._section("neat"))

    def generator_settings(self) -> GeneratorSettings:
        return GeneratorSettings(tileset_for(self.game), **self._section("generator"))

    def novelty_config(self) -> NoveltyConfig:
        return NoveltyConfig(**self._section("novelty"))

    def fitness_weights(self) -> FitnessWeights:
        return FitnessWeights(**self._section("weights"))

    def train_config(self) -> TrainConfig:
        t = self._section("train")
        return TrainConfig(
            game=self.game, generator_settings=self.generator_settings(),
            generations=t["generations"], levels_per_individual=t["levels_per_individual"],
            neat=self.neat_config(), novelty=self.novelty_config(), weights=self.fitness_weights(),
            level_width=t["level_width"], level_height=t["level_height"], master_seed=self.values["seed"])

    def directga_config(self) -> DirectGAConfig:
        d = self._section("directga")
        novelty = NoveltyConfig(k_neighbors=d.pop("k_neighbors"), archive_lambda=d.pop("archive_lambda"),
                                distance=d.pop("distance"), intra_k=1)
        return DirectGAConfig(novelty=novelty, **d)
