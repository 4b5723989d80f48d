from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass(frozen=True)
class NeatConfig:
    population_size: int = 50
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 0.4
    compatibility_threshold: float = 3.0
    add_node_prob: float = 0.03
    add_conn_prob: float = 0.1
    weight_mutate_rate: float = 0.8
    weight_replace_rate: float = 0.1
    weight_perturb_span: float = 0.5
    survival_fraction: float = 0.2
    elitism: int = 2
    stagnation_limit: int = 15

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        for f in fields(self):
            if f.name.endswith(("_prob", "_rate")) or f.name == "survival_fraction":
                value = getattr(self, f.name)
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"{f.name} must be in [0, 1], got {value}")
        if self.weight_mutate_rate + self.weight_replace_rate > 1.0:
            raise ValueError("weight_mutate_rate + weight_replace_rate must not exceed 1")
        if self.elitism < 0 or self.stagnation_limit < 1:
            raise ValueError("elitism must be >= 0 and stagnation_limit >= 1")
