"""Decode a genome into a feedforward evaluation schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pcgnn.neat.genome import Genome, NodeKind

STEEPNESS = 4.9


def steep_sigmoid(z: float) -> float:
    z = STEEPNESS * z
    if z < -700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(-z))


class CycleError(ValueError):
    pass


@dataclass(frozen=True)
class FeedforwardNetwork:
    """Nodes are re-indexed densely: inputs first (0..k-1), then everything else.

    ``order`` lists non-input node slots in evaluation order; the incoming
    links of ``order[i]`` are ``sources[starts[i]:starts[i+1]]`` with matching
    ``weights``. Slots in ``dead`` are unreachable from the inputs and hold
    sigmoid(0).
    """

    input_count: int
    output_count: int
    node_count: int
    order: np.ndarray
    starts: np.ndarray
    sources: np.ndarray
    weights: np.ndarray
    dead: np.ndarray
    outputs: np.ndarray

    def activate(self, inputs) -> list[float]:
        return activate(self, inputs)


def _topological_order(node_ids, edges) -> list[int]:
    indegree = {n: 0 for n in node_ids}
    children: dict[int, list[int]] = {n: [] for n in node_ids}
    for a, b in edges:
        indegree[b] += 1
        children[a].append(b)
    ready = sorted(n for n, d in indegree.items() if d == 0)
    order = []
    while ready:
        n = ready.pop(0)
        order.append(n)
        for m in children[n]:
            indegree[m] -= 1
            if indegree[m] == 0:
                ready.append(m)
    if len(order) != len(node_ids):
        raise CycleError("genome contains a cycle among enabled connections")
    return order


def build_network(genome: Genome) -> FeedforwardNetwork:
    inputs = genome.input_ids
    outputs = genome.output_ids
    others = [n.node_id for n in genome.nodes if n.kind is not NodeKind.INPUT]
    slot = {nid: i for i, nid in enumerate(inputs)}
    for nid in others:
        slot[nid] = len(slot)

    enabled = [c for c in genome.connections if c.enabled]
    order = _topological_order([n.node_id for n in genome.nodes],
                               [(c.from_node, c.to_node) for c in enabled])

    reachable = set(inputs)
    for nid in order:
        if any(c.to_node == nid and c.from_node in reachable for c in enabled):
            reachable.add(nid)

    incoming: dict[int, list] = {nid: [] for nid in others}
    for c in enabled:
        incoming[c.to_node].append(c)

    sched, starts, sources, weights = [], [0], [], []
    dead = []
    for nid in order:
        if nid in slot and nid not in inputs:
            if nid not in reachable:
                dead.append(slot[nid])
                continue
            sched.append(slot[nid])
            for c in incoming[nid]:
                sources.append(slot[c.from_node])
                weights.append(c.weight)
            starts.append(len(sources))
    return FeedforwardNetwork(
        input_count=len(inputs),
        output_count=len(outputs),
        node_count=len(slot),
        order=np.array(sched, dtype=np.int64),
        starts=np.array(starts, dtype=np.int64),
        sources=np.array(sources, dtype=np.int64),
        weights=np.array(weights, dtype=np.float64),
        dead=np.array(dead, dtype=np.int64),
        outputs=np.array([slot[o] for o in outputs], dtype=np.int64),
    )


def activate(network: FeedforwardNetwork, inputs) -> list[float]:
    """Input nodes pass through; every other node applies sigmoid(4.9 * weighted sum)."""
    if len(inputs) != network.input_count:
        raise ValueError(f"expected {network.input_count} inputs, got {len(inputs)}")
    values = [0.5] * network.node_count
    values[: network.input_count] = [float(v) for v in inputs]
    sources = network.sources.tolist()
    weights = network.weights.tolist()
    starts = network.starts.tolist()
    for i, node in enumerate(network.order.tolist()):
        total = 0.0
        for e in range(starts[i], starts[i + 1]):
            total += weights[e] * values[sources[e]]
        values[node] = steep_sigmoid(total)
    return [values[o] for o in network.outputs.tolist()]
