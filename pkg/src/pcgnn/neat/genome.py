"""NEAT genotype: node and connection genes, innovation tracking, variation operators."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from pcgnn.neat.config import NeatConfig


class NodeKind(str, enum.Enum):
    INPUT = "input"
    HIDDEN = "hidden"
    OUTPUT = "output"


@dataclass(frozen=True)
class NodeGene:
    node_id: int
    kind: NodeKind
    activation: str = "steep_sigmoid"


@dataclass(frozen=True)
class ConnectionGene:
    innovation: int
    from_node: int
    to_node: int
    weight: float
    enabled: bool = True


@dataclass
class Genome:
    nodes: list[NodeGene]
    connections: list[ConnectionGene]
    fitness: float | None = None

    @property
    def input_ids(self) -> list[int]:
        return [n.node_id for n in self.nodes if n.kind is NodeKind.INPUT]

    @property
    def output_ids(self) -> list[int]:
        return [n.node_id for n in self.nodes if n.kind is NodeKind.OUTPUT]

    @property
    def size(self) -> int:
        return len(self.nodes) + len(self.connections)

    def innovations(self) -> set[int]:
        return {c.innovation for c in self.connections}

    def copy(self) -> "Genome":
        return Genome(list(self.nodes), list(self.connections), self.fitness)

    def structure_key(self) -> tuple:
        """Everything except fitness; equal keys mean identical genomes."""
        return (tuple(self.nodes), tuple(self.connections))


class InnovationRegistry:
    """Hands out innovation numbers and node ids for structural mutations.

    Identical events within one generation share numbers; call
    ``next_generation`` between generations to forget the event cache.
    """

    def __init__(self, next_innovation: int = 0, next_node_id: int = 0):
        self.next_innovation = next_innovation
        self.next_node_id = next_node_id
        self._connections: dict[tuple[int, int], int] = {}
        self._splits: dict[int, tuple[int, int, int]] = {}

    def next_generation(self) -> None:
        self._connections.clear()
        self._splits.clear()

    def connection(self, from_node: int, to_node: int) -> int:
        key = (from_node, to_node)
        if key not in self._connections:
            self._connections[key] = self.next_innovation
            self.next_innovation += 1
        return self._connections[key]

    def split(self, innovation: int) -> tuple[int, int, int]:
        """(new node id, innovation of in-link, innovation of out-link) for splitting a gene."""
        if innovation not in self._splits:
            self._splits[innovation] = self._fresh_split()
        return self._splits[innovation]

    def _fresh_split(self) -> tuple[int, int, int]:
        node = self.next_node_id
        self.next_node_id += 1
        first = self.next_innovation
        self.next_innovation += 2
        return node, first, first + 1

    def reserve_node_ids(self, count: int) -> None:
        self.next_node_id = max(self.next_node_id, count)


def initial_population(config: NeatConfig, input_count: int, output_count: int,
                       rng: np.random.Generator,
                       registry: InnovationRegistry | None = None) -> tuple[list[Genome], InnovationRegistry]:
    """Fully connected input->output genomes with N(0, 1) weights and no hidden nodes."""
    if input_count < 1 or output_count < 1:
        raise ValueError("need at least one input and one output")
    registry = registry or InnovationRegistry()
    registry.reserve_node_ids(input_count + output_count)
    nodes = [NodeGene(i, NodeKind.INPUT) for i in range(input_count)]
    nodes += [NodeGene(input_count + j, NodeKind.OUTPUT) for j in range(output_count)]
    links = [(i, input_count + j) for i in range(input_count) for j in range(output_count)]
    innovations = [registry.connection(a, b) for a, b in links]
    population = []
    for _ in range(config.population_size):
        weights = rng.standard_normal(len(links))
        conns = [ConnectionGene(inn, a, b, float(w))
                 for inn, (a, b), w in zip(innovations, links, weights)]
        population.append(Genome(list(nodes), conns))
    return population, registry


def creates_cycle(connections, from_node: int, to_node: int) -> bool:
    """True if adding from_node -> to_node closes a directed cycle over ``connections``."""
    if from_node == to_node:
        return True
    adjacency: dict[int, list[int]] = {}
    for c in connections:
        adjacency.setdefault(c.from_node, []).append(c.to_node)
    stack, seen = [to_node], {to_node}
    while stack:
        node = stack.pop()
        if node == from_node:
            return True
        for nxt in adjacency.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def mutate(genome: Genome, config: NeatConfig, registry: InnovationRegistry,
           rng: np.random.Generator) -> Genome:
    """Return a mutated copy: maybe split a link, maybe add a link, then jitter weights.

    Acyclicity is checked against every connection gene, enabled or not, so
    re-enabling a gene later can never close a loop.
    """
    nodes = list(genome.nodes)
    conns = list(genome.connections)

    if config.add_node_prob > 0 and rng.random() < config.add_node_prob:
        enabled = [i for i, c in enumerate(conns) if c.enabled]
        if enabled:
            idx = enabled[rng.integers(len(enabled))]
            old = conns[idx]
            node_id, in_inn, out_inn = registry.split(old.innovation)
            present_nodes = {n.node_id for n in nodes}
            present_inn = {c.innovation for c in conns}
            if node_id in present_nodes or in_inn in present_inn or out_inn in present_inn:
                node_id, in_inn, out_inn = registry._fresh_split()
            conns[idx] = replace(old, enabled=False)
            nodes.append(NodeGene(node_id, NodeKind.HIDDEN))
            conns.append(ConnectionGene(in_inn, old.from_node, node_id, 1.0))
            conns.append(ConnectionGene(out_inn, node_id, old.to_node, old.weight))

    if config.add_conn_prob > 0 and rng.random() < config.add_conn_prob:
        sources = [n.node_id for n in nodes if n.kind is not NodeKind.OUTPUT]
        targets = [n.node_id for n in nodes if n.kind is not NodeKind.INPUT]
        a = sources[rng.integers(len(sources))]
        b = targets[rng.integers(len(targets))]
        existing = {(c.from_node, c.to_node) for c in conns}
        if (a, b) not in existing and not creates_cycle(conns, a, b):
            inn = registry.connection(a, b)
            if inn in {c.innovation for c in conns}:
                inn = registry.next_innovation
                registry.next_innovation += 1
            conns.append(ConnectionGene(inn, a, b, float(rng.standard_normal())))

    if config.weight_mutate_rate > 0 or config.weight_replace_rate > 0:
        for i, c in enumerate(conns):
            roll = rng.random()
            if roll < config.weight_replace_rate:
                conns[i] = replace(c, weight=float(rng.standard_normal()))
            elif roll < config.weight_replace_rate + config.weight_mutate_rate:
                span = config.weight_perturb_span
                conns[i] = replace(c, weight=c.weight + float(rng.uniform(-span, span)))

    return Genome(nodes, conns)


def crossover(parent_a: Genome, parent_b: Genome, fitness_a: float, fitness_b: float,
              rng: np.random.Generator) -> Genome:
    """Align genes by innovation; matching genes come from either parent at random,
    disjoint and excess genes from the fitter one (a coin flip decides ties)."""
    if fitness_a > fitness_b:
        fitter, other = parent_a, parent_b
    elif fitness_b > fitness_a:
        fitter, other = parent_b, parent_a
    elif rng.random() < 0.5:
        fitter, other = parent_a, parent_b
    else:
        fitter, other = parent_b, parent_a

    other_genes = {c.innovation: c for c in other.connections}
    child = []
    for gene in fitter.connections:
        partner = other_genes.get(gene.innovation)
        if partner is None:
            child.append(gene)
            continue
        chosen = gene if rng.random() < 0.5 else partner
        if not (gene.enabled and partner.enabled):
            chosen = replace(chosen, enabled=not rng.random() < 0.75)
        child.append(chosen)
    return Genome(list(fitter.nodes), child)


def compatibility_distance(g1: Genome, g2: Genome, config: NeatConfig) -> float:
    """c1*E/N + c2*D/N + c3*mean|dw| over connection genes."""
    a = {c.innovation: c for c in g1.connections}
    b = {c.innovation: c for c in g2.connections}
    if not a and not b:
        return 0.0
    cutoff = min(max(a, default=-1), max(b, default=-1))
    matching = a.keys() & b.keys()
    unmatched = a.keys() ^ b.keys()
    excess = sum(1 for inn in unmatched if inn > cutoff)
    disjoint = len(unmatched) - excess
    weight_diff = (sum(abs(a[i].weight - b[i].weight) for i in matching) / len(matching)
                   if matching else 0.0)
    n = max(len(a), len(b), 1)
    return config.c1 * excess / n + config.c2 * disjoint / n + config.c3 * weight_diff


def validate_genome(genome: Genome) -> list[str]:
    """Structural invariant violations; empty when the genome is sound."""
    problems = []
    ids = [n.node_id for n in genome.nodes]
    if len(set(ids)) != len(ids):
        problems.append("duplicate node ids")
    kinds = {n.node_id: n.kind for n in genome.nodes}
    innovations = [c.innovation for c in genome.connections]
    if len(set(innovations)) != len(innovations):
        problems.append("duplicate innovation numbers")
    pairs = [(c.from_node, c.to_node) for c in genome.connections]
    if len(set(pairs)) != len(pairs):
        problems.append("duplicate (from, to) pairs")
    for c in genome.connections:
        if c.from_node not in kinds or c.to_node not in kinds:
            problems.append(f"connection {c.innovation} references a missing node")
        elif kinds[c.to_node] is NodeKind.INPUT:
            problems.append(f"connection {c.innovation} feeds an input node")
    if has_cycle(genome.connections):
        problems.append("cycle in connection graph")
    return problems


def has_cycle(connections) -> bool:
    adjacency: dict[int, list[int]] = {}
    for c in connections:
        adjacency.setdefault(c.from_node, []).append(c.to_node)
    state: dict[int, int] = {}  # 1 = on stack, 2 = done
    for root in adjacency:
        if root in state:
            continue
        stack = [(root, iter(adjacency.get(root, ())))]
        state[root] = 1
        while stack:
            node, children = stack[-1]
            for nxt in children:
                mark = state.get(nxt)
                if mark == 1:
                    return True
                if mark is None:
                    state[nxt] = 1
                    stack.append((nxt, iter(adjacency.get(nxt, ()))))
                    break
            else:
                state[node] = 2
                stack.pop()
    return False


# -- genome file format -------------------------------------------------------

HEADER = "pcgnn-genome v1"


def format_genome(genome: Genome) -> str:
    lines = [f"{HEADER} inputs={len(genome.input_ids)} outputs={len(genome.output_ids)}", "NODES"]
    lines += [f"{n.node_id} {n.kind.value}" for n in genome.nodes]
    lines.append("CONNECTIONS")
    lines += [f"{c.innovation} {c.from_node} {c.to_node} {c.weight:.17g} {int(c.enabled)}"
              for c in genome.connections]
    return "\n".join(lines) + "\n"


def parse_genome(text: str) -> Genome:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(HEADER):
        raise ValueError("not a pcgnn genome file (bad header)")
    fields = dict(part.split("=", 1) for part in lines[0][len(HEADER):].split())
    try:
        section_nodes = lines.index("NODES")
        section_conns = lines.index("CONNECTIONS")
    except ValueError as exc:
        raise ValueError("genome file is missing a NODES or CONNECTIONS section") from exc
    nodes = []
    for ln in lines[section_nodes + 1:section_conns]:
        node_id, kind = ln.split()
        nodes.append(NodeGene(int(node_id), NodeKind(kind)))
    conns = []
    for ln in lines[section_conns + 1:]:
        inn, a, b, w, en = ln.split()
        conns.append(ConnectionGene(int(inn), int(a), int(b), float(w), en == "1"))
    genome = Genome(nodes, conns)
    if len(genome.input_ids) != int(fields["inputs"]) or len(genome.output_ids) != int(fields["outputs"]):
        raise ValueError("genome header disagrees with its NODES section")
    return genome


def save_genome(path: str | Path, genome: Genome) -> None:
    Path(path).write_text(format_genome(genome), encoding="utf-8")


def load_genome(path: str | Path) -> Genome:
    return parse_genome(Path(path).read_text(encoding="utf-8"))
