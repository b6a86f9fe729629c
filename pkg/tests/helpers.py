import math
from typing import List, Sequence, Tuple

import networkx as nx
import numpy as np

from app.models.scenario import ScenarioConfig
from app.simulation.simulator import Simulation

Point = Tuple[float, float]


def make_scenario(**overrides) -> ScenarioConfig:
    values = {"mobility": "static", "duration": 5.0}
    values.update(overrides)
    return ScenarioConfig.model_validate(values)


def chain_positions(n: int, spacing: float = 150.0, y: float = 300.0) -> List[Point]:
    return [(50.0 + spacing * i, y) for i in range(n)]


def static_simulation(positions: Sequence[Point], **overrides) -> Simulation:
    scenario = make_scenario(nodes=len(positions), **overrides)
    return Simulation(scenario, positions=list(positions))


def unit_disk_graph(positions: Sequence[Point], radius: float = 250.0) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(len(positions)))
    for i, (xi, yi) in enumerate(positions):
        for j in range(i + 1, len(positions)):
            xj, yj = positions[j]
            if math.hypot(xi - xj, yi - yj) <= radius:
                graph.add_edge(i, j)
    return graph


def random_connected_topology(seed: int, min_nodes: int = 4, max_nodes: int = 10) -> Tuple[List[Point], nx.Graph]:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(min_nodes, max_nodes + 1))
    while True:
        positions = [(float(x), float(y)) for x, y in rng.uniform(0.0, 500.0, size=(n, 2))]
        graph = unit_disk_graph(positions)
        if nx.is_connected(graph):
            return positions, graph


def farthest_pair(graph: nx.Graph) -> Tuple[int, int]:
    lengths = dict(nx.all_pairs_shortest_path_length(graph))
    return max(((s, d) for s in lengths for d in lengths[s] if s != d), key=lambda p: (lengths[p[0]][p[1]], -p[0], -p[1]))
