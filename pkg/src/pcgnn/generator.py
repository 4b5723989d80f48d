"""Sliding-window level generation from an evolved network.

A level starts as uniform noise and is overwritten cell by cell in raster
order: each cell's padded neighbourhood (plus fresh random inputs and a small
perturbation) goes through the network, and the decoded tile is written back
before moving on, so later cells see earlier predictions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from pcgnn.neat.genome import Genome
from pcgnn.neat.network import FeedforwardNetwork, activate, build_network
from pcgnn.tilemap import PADDING, Level, Tileset, padded_window, random_level

# Above this many random draws per level, draw and generate one row at a time.
_ROW_CHUNK_THRESHOLD = 1 << 20


@dataclass(frozen=True)
class GeneratorSettings:
    tileset: Tileset
    context_size: int = 1
    predict_size: int = 1
    num_random_vars: int = 4
    perturb_size: float = 0.1565
    one_hot_inputs: bool = False
    padding_value: int = PADDING

    def __post_init__(self):
        if self.context_size < 1:
            raise ValueError("context_size must be >= 1")
        if self.num_random_vars < 0 or self.perturb_size < 0:
            raise ValueError("num_random_vars and perturb_size must be non-negative")
        if self.predict_size != 1:
            raise ValueError("only predict_size = 1 is supported")
        if self.padding_value != PADDING:
            raise ValueError("padding_value is fixed at -1")

    @property
    def window_size(self) -> int:
        return (2 * self.context_size + 1) ** 2 - 1

    @property
    def output_count(self) -> int:
        return 1 if self.tileset.n == 2 else self.tileset.n

    @property
    def draws_per_cell(self) -> int:
        # r random inputs followed by one perturbation per network input
        return self.num_random_vars + window_input_width(self)


def window_input_width(settings: GeneratorSettings) -> int:
    per_cell = settings.tileset.n if settings.one_hot_inputs else 1
    return settings.window_size * per_cell + settings.num_random_vars


def _encode(window: np.ndarray, settings: GeneratorSettings, uniforms: np.ndarray) -> np.ndarray:
    r = settings.num_random_vars
    if settings.one_hot_inputs:
        n = settings.tileset.n
        onehot = np.zeros((len(window), n))
        inside = window >= 0
        onehot[np.flatnonzero(inside), window[inside]] = 1.0
        encoded = onehot.ravel()
    else:
        encoded = window.astype(np.float64)
    randoms = 2.0 * uniforms[:r] - 1.0
    noise = settings.perturb_size * (2.0 * uniforms[r:] - 1.0)
    return np.concatenate([encoded, randoms]) + noise


def encode_window(window: np.ndarray, settings: GeneratorSettings,
                  rng: np.random.Generator) -> np.ndarray:
    """Network input for one cell: encoded window, U(-1,1) random inputs, then
    U(-p, p) noise added to every entry. One-hot padding is an all-zero block."""
    window = np.asarray(window, dtype=np.int64)
    if len(window) != settings.window_size:
        raise ValueError(f"window has {len(window)} entries, expected {settings.window_size}")
    return _encode(window, settings, rng.random(settings.draws_per_cell))


def decode_output(outputs, tileset: Tileset) -> int:
    """Two-tile sets threshold a single output at 0.5 (strictly above means tile 1);
    larger sets take the argmax, lowest index on ties."""
    outputs = list(outputs)
    if tileset.n == 2:
        if len(outputs) != 1:
            raise ValueError(f"two-tile decoding expects 1 output, got {len(outputs)}")
        return 1 if outputs[0] > 0.5 else 0
    if len(outputs) != tileset.n:
        raise ValueError(f"expected {tileset.n} outputs, got {len(outputs)}")
    return int(np.argmax(outputs))


@dataclass(frozen=True)
class Generator:
    network: FeedforwardNetwork
    settings: GeneratorSettings

    def __post_init__(self):
        expected = window_input_width(self.settings)
        if self.network.input_count != expected:
            raise ValueError(
                f"network has {self.network.input_count} inputs but settings need {expected}")
        if self.network.output_count != self.settings.output_count:
            raise ValueError(
                f"network has {self.network.output_count} outputs but the tileset needs "
                f"{self.settings.output_count}")

    @classmethod
    def from_genome(cls, genome: Genome, settings: GeneratorSettings) -> "Generator":
        return cls(build_network(genome), settings)

    def generate(self, width: int, height: int, rng: np.random.Generator) -> Level:
        return generate_level(self, width, height, rng)


@numba.njit(cache=True)
def _generate_rows(cells, draws, y0, c, one_hot, n_tiles, r, p,
                   order, starts, sources, weights, dead, outputs, node_count, input_count):
    height, width = cells.shape
    inputs = np.empty(input_count)
    values = np.empty(node_count)
    span = 2 * c + 1
    for row in range(draws.shape[0]):
        y = y0 + row
        for x in range(width):
            u = draws[row, x]
            k = 0
            for dy in range(span):
                for dx in range(span):
                    if dy == c and dx == c:
                        continue
                    yy = y + dy - c
                    xx = x + dx - c
                    v = -1
                    if 0 <= yy < height and 0 <= xx < width:
                        v = cells[yy, xx]
                    if one_hot:
                        for t in range(n_tiles):
                            inputs[k + t] = 1.0 if v == t else 0.0
                        k += n_tiles
                    else:
                        inputs[k] = v
                        k += 1
            for j in range(r):
                inputs[k + j] = 2.0 * u[j] - 1.0
            for j in range(input_count):
                inputs[j] = inputs[j] + p * (2.0 * u[r + j] - 1.0)

            for j in range(input_count):
                values[j] = inputs[j]
            for j in range(dead.shape[0]):
                values[dead[j]] = 0.5
            for i in range(order.shape[0]):
                total = 0.0
                for e in range(starts[i], starts[i + 1]):
                    total += weights[e] * values[sources[e]]
                values[order[i]] = 1.0 / (1.0 + np.exp(-(4.9 * total)))

            if outputs.shape[0] == 1:
                tile = 1 if values[outputs[0]] > 0.5 else 0
            else:
                tile = 0
                best = values[outputs[0]]
                for t in range(1, outputs.shape[0]):
                    if values[outputs[t]] > best:
                        best = values[outputs[t]]
                        tile = t
            cells[y, x] = tile


def generate_level(generator: Generator, width: int, height: int,
                   rng: np.random.Generator) -> Level:
    """Raster-scan generation.

    Random stream layout: first the initial ``height x width`` grid, then for
    every cell in raster order ``r`` uniforms for the random inputs followed by
    one uniform per network input for the perturbation.
    """
    settings = generator.settings
    cells = np.array(random_level(width, height, settings.tileset, rng).cells)
    net = generator.network
    per_cell = settings.draws_per_cell
    args = (settings.context_size, settings.one_hot_inputs, settings.tileset.n,
            settings.num_random_vars, float(settings.perturb_size),
            net.order, net.starts, net.sources, net.weights, net.dead, net.outputs,
            net.node_count, net.input_count)
    if width * height * per_cell <= _ROW_CHUNK_THRESHOLD:
        _generate_rows(cells, rng.random((height, width, per_cell)), 0, *args)
    else:
        for y in range(height):
            _generate_rows(cells, rng.random((1, width, per_cell)), y, *args)
    return Level(cells, settings.tileset)


def generate_level_reference(generator: Generator, width: int, height: int,
                             rng: np.random.Generator) -> Level:
    """Straight-line version of ``generate_level`` built from the public pieces.

    Consumes the random stream identically, so both paths must agree exactly.
    """
    settings = generator.settings
    level = random_level(width, height, settings.tileset, rng)
    cells = np.array(level.cells)
    for y in range(height):
        for x in range(width):
            window = padded_window(Level(cells, settings.tileset), x, y, settings.context_size)
            encoded = encode_window(window, settings, rng)
            cells[y, x] = decode_output(activate(generator.network, encoded), settings.tileset)
    return Level(cells, settings.tileset)
