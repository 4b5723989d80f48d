from pcgnn.neat.config import NeatConfig
from pcgnn.neat.genome import (
    ConnectionGene,
    Genome,
    InnovationRegistry,
    NodeGene,
    NodeKind,
    compatibility_distance,
    crossover,
    initial_population,
    load_genome,
    mutate,
    save_genome,
    validate_genome,
)
from pcgnn.neat.network import FeedforwardNetwork, activate, build_network, steep_sigmoid
from pcgnn.neat.population import Species, reproduce, speciate

__all__ = [
    "ConnectionGene", "FeedforwardNetwork", "Genome", "InnovationRegistry", "NeatConfig",
    "NodeGene", "NodeKind", "Species", "activate", "build_network", "compatibility_distance",
    "crossover", "initial_population", "load_genome", "mutate", "reproduce", "save_genome",
    "speciate", "steep_sigmoid", "validate_genome",
]
