import dataclasses
import typing

import networkx as nx
import numpy as np

import src.utils as utils


EDGE_ADDITION = "edge-addition"
WEIGHT_UPDATE = "weight-update"


@dataclasses.dataclass(frozen=True)
class RatingScale:
    r_max: float = 1.0

    def __post_init__(self):
        if not self.r_max > 0:
            raise ValueError(f"rating scale half-width must be positive, got {self.r_max}")


def normalize_rating(raw, scale: RatingScale) -> float:
    raw = float(raw)
    if abs(raw) > scale.r_max:
        raise ValueError(f"rating {raw} is outside the scale [-{scale.r_max}, {scale.r_max}]")
    return raw / scale.r_max


@dataclasses.dataclass(frozen=True)
class Neighbourhood:
    pred: typing.FrozenSet[int]
    succ: typing.FrozenSet[int]
    indeg: int
    outdeg: int


class EdgeArrays:
    """Flat, (source, target)-sorted edge columns for the vectorised FGA sweeps.

    Instances are never mutated; with_rating() returns a new one. The sort order is unique, so
    arrays produced by incremental edits equal those rebuilt from scratch element for element.
    """

    def __init__(self, n, src, dst, w):
        self.n = int(n)
        self.src: np.ndarray = src
        self.dst: np.ndarray = dst
        self.w: np.ndarray = w
        self._indeg = None
        self._outdeg = None

    @staticmethod
    def from_edges(n, edges: typing.Iterable[typing.Tuple[int, int, float]]) -> 'EdgeArrays':
        edges = list(edges)
        src = np.fromiter((e[0] for e in edges), dtype=np.int64, count=len(edges))
        dst = np.fromiter((e[1] for e in edges), dtype=np.int64, count=len(edges))
        w = np.fromiter((e[2] for e in edges), dtype=np.float64, count=len(edges))
        order = np.lexsort((dst, src))
        return EdgeArrays(n, src[order], dst[order], w[order])

    def __len__(self):
        return len(self.src)

    @property
    def indeg(self) -> np.ndarray:
        if self._indeg is None:
            self._indeg = np.bincount(self.dst, minlength=self.n)
        return self._indeg

    @property
    def outdeg(self) -> np.ndarray:
        if self._outdeg is None:
            self._outdeg = np.bincount(self.src, minlength=self.n)
        return self._outdeg

    def _locate(self, u, v) -> typing.Tuple[int, bool]:
        lo = np.searchsorted(self.src, u, side='left')
        hi = np.searchsorted(self.src, u, side='right')
        pos = lo + np.searchsorted(self.dst[lo:hi], v, side='left')
        found = pos < hi and self.dst[pos] == v
        return int(pos), bool(found)

    def with_rating(self, u, v, w) -> 'EdgeArrays':
        """(u, v) rated with w: replaces an existing weight or inserts the edge in sorted position."""
        n = max(self.n, u + 1, v + 1)
        pos, found = self._locate(u, v)
        if found:
            new_w = self.w.copy()
            new_w[pos] = w
            return EdgeArrays(n, self.src, self.dst, new_w)
        else:
            return EdgeArrays(n,
                              np.insert(self.src, pos, u),
                              np.insert(self.dst, pos, v),
                              np.insert(self.w, pos, w))

    def with_nodes(self, n) -> 'EdgeArrays':
        if n < self.n:
            raise ValueError(f"cannot shrink edge arrays from {self.n} to {n} nodes")
        return EdgeArrays(n, self.src, self.dst, self.w)


class Wsn:
    """A weighted signed network: directed, no self-loops, weights in [-1, 1].

    Nodes are dense integer ids 0..n-1; every node also carries a string label (defaults to
    the id) and labels map one-to-one onto ids. Mutators change the graph in place, use copy()
    to get an exclusive handle before editing a graph that is shared.
    """

    def __init__(self, name=None):
        self.name = name
        self._g = nx.DiGraph()
        self._labels: typing.List[str] = []
        self._ids: typing.Dict[str, int] = {}
        self._arrays: typing.Optional[EdgeArrays] = None

    def copy(self) -> 'Wsn':
        res = Wsn(self.name)
        res._g = self._g.copy()
        res._labels = list(self._labels)
        res._ids = dict(self._ids)
        res._arrays = self._arrays  # immutable, safe to share
        return res

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r}, nodes={self.num_nodes()}, edges={self.num_edges()})"

    # nodes

    def add_node(self, label=None) -> int:
        v = len(self._labels)
        label = str(v) if label is None else str(label)
        if label in self._ids:
            raise ValueError(f"duplicate node label: {label!r}")
        self._labels.append(label)
        self._ids[label] = v
        self._g.add_node(v)
        if self._arrays is not None:
            self._arrays = self._arrays.with_nodes(v + 1)
        return v

    def add_nodes(self, count) -> typing.List[int]:
        return [self.add_node() for _ in range(count)]

    def node_for_label(self, label, create=False) -> int:
        label = str(label)
        if label in self._ids:
            return self._ids[label]
        elif create:
            return self.add_node(label)
        else:
            raise KeyError(f"unknown node label: {label!r}")

    def label_of(self, v) -> str:
        self._check_node(v)
        return self._labels[v]

    def labels(self) -> typing.List[str]:
        return list(self._labels)

    def num_nodes(self) -> int:
        return len(self._labels)

    def nodes(self) -> range:
        return range(len(self._labels))

    def has_node(self, v) -> bool:
        return isinstance(v, (int, np.integer)) and 0 <= v < len(self._labels)

    # edges

    def num_edges(self) -> int:
        return self._g.number_of_edges()

    def has_edge(self, u, v) -> bool:
        return self._g.has_edge(u, v)

    def weight(self, u, v) -> float:
        if not self._g.has_edge(u, v):
            raise KeyError(f"no edge ({u}, {v})")
        return self._g[u][v]['weight']

    def edges(self) -> typing.Iterator[typing.Tuple[int, int, float]]:
        for u, v, w in sorted(self._g.edges(data='weight')):
            yield u, v, w

    def add_edge(self, u, v, w) -> 'Wsn':
        self._check_node(u)
        self._check_node(v)
        w = utils.check_weight(w)
        if u == v:
            raise ValueError(f"self-loops are not allowed: ({u}, {v})")
        if self._g.has_edge(u, v):
            raise ValueError(f"edge ({u}, {v}) already exists, use update_weight to re-rate")
        self._g.add_edge(u, v, weight=w)
        self._note_rating(u, v, w)
        return self

    def update_weight(self, u, v, w) -> 'Wsn':
        w = utils.check_weight(w)
        if not self._g.has_edge(u, v):
            raise KeyError(f"cannot update missing edge ({u}, {v})")
        if self._g[u][v]['weight'] != w:
            self._g[u][v]['weight'] = w
            self._note_rating(u, v, w)
        return self

    def rate(self, u, v, w) -> str:
        """Adds (u, v) or re-rates it; returns which of the two moves happened."""
        if self.has_edge(u, v):
            self.update_weight(u, v, w)
            return WEIGHT_UPDATE
        else:
            self.add_edge(u, v, w)
            return EDGE_ADDITION

    def _remove_edge(self, u, v):
        self._g.remove_edge(u, v)
        self._arrays = None

    def _note_rating(self, u, v, w):
        if self._arrays is not None:
            self._arrays = self._arrays.with_rating(u, v, w)

    # queries

    def pred(self, v) -> typing.Set[int]:
        self._check_node(v)
        return set(self._g.predecessors(v))

    def succ(self, u) -> typing.Set[int]:
        self._check_node(u)
        return set(self._g.successors(u))

    def indeg(self, v) -> int:
        self._check_node(v)
        return self._g.in_degree(v)

    def outdeg(self, u) -> int:
        self._check_node(u)
        return self._g.out_degree(u)

    def neighbourhood(self, v) -> Neighbourhood:
        pred = frozenset(self.pred(v))
        succ = frozenset(self.succ(v))
        return Neighbourhood(pred, succ, len(pred), len(succ))

    def edge_arrays(self) -> EdgeArrays:
        if self._arrays is None:
            self._arrays = EdgeArrays.from_edges(self.num_nodes(), self._g.edges(data='weight'))
        return self._arrays

    def validate(self):
        """Full scan of the data model invariants."""
        for u, v, w in self._g.edges(data='weight'):
            if u == v:
                raise utils.InvariantViolation(f"self-loop at {u}")
            if not utils.in_range(w, -1.0, 1.0):
                raise utils.InvariantViolation(f"weight of ({u}, {v}) out of range: {w}")
        indeg_total = sum(d for _, d in self._g.in_degree())
        outdeg_total = sum(d for _, d in self._g.out_degree())
        if not indeg_total == outdeg_total == self.num_edges():
            raise utils.InvariantViolation(f"degree sums disagree: {indeg_total}, {outdeg_total}, "
                                           f"{self.num_edges()}")
        if set(self._g.nodes()) != set(self.nodes()):
            raise utils.InvariantViolation("node ids are not dense")
        return True

    def _check_node(self, v):
        if not self.has_node(v):
            raise KeyError(f"unknown node: {v}")


def from_edges(n, edges, name=None) -> Wsn:
    res = Wsn(name)
    res.add_nodes(n)
    for u, v, w in edges:
        res.add_edge(u, v, w)
    return res
