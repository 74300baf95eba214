import numpy as np
import pytest

from recsel.ingest import BipartiteGraph, RatingDataset, parse_ratings

TOY_CSV = """u1,i1,5
u1,i2,3
u1,i3,4
u2,i1,4
u2,i3,2
u3,i2,3
u3,i3,5
"""


@pytest.fixture
def toy_dataset() -> RatingDataset:
    """3 users x 3 items, 7 ratings; the running example everywhere."""
    return parse_ratings(TOY_CSV, name="toy")


@pytest.fixture
def toy_graph(toy_dataset):
    from recsel.ingest import to_bipartite_graph

    return to_bipartite_graph(toy_dataset)


def random_bipartite(rng: np.random.Generator, max_users: int = 5,
                     max_items: int = 5) -> BipartiteGraph:
    """Small random weighted bipartite graph without isolated nodes."""
    n_users = int(rng.integers(1, max_users + 1))
    n_items = int(rng.integers(1, max_items + 1))
    edges = []
    for u in range(n_users):
        for i in range(n_items):
            if rng.random() < 0.5:
                edges.append((f"u:{u}", f"i:{i}", float(rng.integers(1, 6))))
    if not edges:
        edges.append(("u:0", "i:0", float(rng.integers(1, 6))))
    users = tuple(dict.fromkeys(e[0] for e in edges))
    items = tuple(dict.fromkeys(e[1] for e in edges))
    return BipartiteGraph(user_nodes=users, item_nodes=items, edges=tuple(edges),
                          weight_range=(1.0, 5.0))


def random_dataset(rng: np.random.Generator, name: str = "rnd",
                   max_users: int = 8, max_items: int = 8,
                   min_ratings: int = 1) -> RatingDataset:
    n_users = int(rng.integers(1, max_users + 1))
    n_items = int(rng.integers(1, max_items + 1))
    while n_users * n_items < min_ratings:
        n_users += 1
        n_items += 1
    cells = [(u, i) for u in range(n_users) for i in range(n_items)]
    rng.shuffle(cells)
    count = int(rng.integers(min_ratings, len(cells) + 1))
    triples = [(f"u{u}", f"i{i}", float(rng.integers(1, 6))) for u, i in cells[:count]]
    users: dict[str, int] = {}
    items: dict[str, int] = {}
    ratings = []
    for user, item, value in triples:
        ratings.append((users.setdefault(user, len(users)),
                        items.setdefault(item, len(items)), value))
    return RatingDataset(name=name, users=tuple(users), items=tuple(items),
                         ratings=tuple(ratings), scale=(1.0, 5.0))
