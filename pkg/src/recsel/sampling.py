"""Random-walk graph sampling.

Reduces a bipartite graph to a subgraph induced by the first ``theta``
distinct nodes visited by a restarting random walk.  The walk is driven
by numpy's PCG64 generator, so the same (graph, config) pair yields the
same subgraph on every run and platform.

Walk procedure (one RNG draw order, replayable by tests):

1. pick a start node uniformly from all nodes;
2. each step, draw ``u ~ U[0,1)``: if ``u < restart_probability`` jump
   back to the walk's start node, otherwise draw a uniform neighbor of
   the current node and move there (a neighborless node counts as a
   jump back to the start);
3. every node stepped onto joins the visited set; if the visited set
   has not grown for ``100 * theta`` consecutive steps, restart the
   walk from a uniformly drawn *unvisited* node (covers disconnected
   graphs);
4. stop once ``min(theta, |V|)`` distinct nodes are visited.

Node draws index the graph's node tuple (users first, then items);
neighbor draws index the node's adjacency list in edge insertion order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyGraph
from .ingest import BipartiteGraph

DEFAULT_THETA = 100
DEFAULT_RESTART_PROBABILITY = 0.15


@dataclass(frozen=True)
class WalkConfig:
    theta: int = DEFAULT_THETA
    restart_probability: float = DEFAULT_RESTART_PROBABILITY
    seed: int = 0

    def __post_init__(self):
        if self.theta < 1:
            raise ValueError("theta must be >= 1")
        if not (0.0 <= self.restart_probability < 1.0):
            raise ValueError("restart probability must lie in [0, 1)")


def random_walk_sample(g: BipartiteGraph, cfg: WalkConfig) -> BipartiteGraph:
    """Subgraph of ``g`` induced by a seeded restarting random walk.

    Returns ``g`` itself when ``theta >= |V|``.  The result always has
    exactly ``min(theta, |V|)`` nodes and keeps only edges with both
    endpoints visited, so bipartiteness is preserved by construction.
    """
    if not g.edges:
        raise EmptyGraph("cannot walk a graph without edges")
    nodes = g.nodes
    if cfg.theta >= len(nodes):
        return g

    rng = np.random.default_rng(np.random.PCG64(cfg.seed))
    adjacency = g.adjacency()
    stall_limit = 100 * cfg.theta

    start = nodes[int(rng.integers(len(nodes)))]
    current = start
    visited = {start}
    stalled = 0
    while len(visited) < cfg.theta:
        if stalled >= stall_limit:
            unvisited = [n for n in nodes if n not in visited]
            start = unvisited[int(rng.integers(len(unvisited)))]
            current = start
            visited.add(start)
            stalled = 0
            continue
        neighbors = adjacency[current]
        if rng.random() < cfg.restart_probability or not neighbors:
            current = start
        else:
            current = neighbors[int(rng.integers(len(neighbors)))][0]
        if current in visited:
            stalled += 1
        else:
            visited.add(current)
            stalled = 0
    return g.induced(visited)
