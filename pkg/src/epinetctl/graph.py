"""Weighted interaction graphs and the random geometric generators.

Entry ``weights[i, j]`` is the influence of node ``j`` on node ``i``, so row
``i`` lists the in-neighbours of ``i``.  Networks are immutable once built.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import DimensionError, DisconnectedError, ParameterError

RNG_ALGORITHM = "numpy.random.PCG64"
MAX_ATTEMPTS = 1000


@dataclass(frozen=True, eq=False)
class Network:
    weights: np.ndarray
    positions: Optional[np.ndarray] = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise DimensionError(f"weights must be a non-empty square matrix, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ParameterError("weights must be finite")
        if np.any(w < 0):
            raise ParameterError("weights must be non-negative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.positions is not None:
            p = np.array(self.positions, dtype=float)
            if p.shape != (w.shape[0], 2):
                raise DimensionError(f"positions must have shape ({w.shape[0]}, 2), got {p.shape}")
            p.setflags(write=False)
            object.__setattr__(self, "positions", p)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def neighbors(self, i: int) -> np.ndarray:
        """In-neighbours of node ``i`` (support of row ``i``, excluding ``i``)."""
        row = self.weights[i]
        idx = np.flatnonzero(row > 0)
        return idx[idx != i]

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        if not np.array_equal(self.weights, other.weights):
            return False
        if (self.positions is None) != (other.positions is None):
            return False
        return self.positions is None or np.array_equal(self.positions, other.positions)

    __hash__ = None

    def to_dict(self) -> dict:
        out = {"n": self.n, "weights": self.weights.tolist()}
        if self.positions is not None:
            out["positions"] = self.positions.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Network":
        weights = np.asarray(data["weights"], dtype=float)
        if "n" in data and int(data["n"]) != weights.shape[0]:
            raise DimensionError(f"'n'={data['n']} disagrees with weights of size {weights.shape[0]}")
        return cls(weights, data.get("positions"))

    def to_json(self) -> str:
        # json writes floats with repr(), the shortest string that round-trips exactly
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Network":
        return cls.from_dict(json.loads(text))


def is_strongly_connected(net: Network) -> bool:
    if net.n == 1:
        return bool(net.weights[0, 0] > 0)
    ncomp, _ = connected_components(net.weights > 0, directed=True, connection="strong")
    return ncomp == 1


def _check_edge_params(radius, self_weight, cross_weight):
    if radius <= 0:
        raise ParameterError("radius must be positive")
    if self_weight < 0 or cross_weight < 0:
        raise ParameterError("weights must be non-negative")


def from_positions(positions: Sequence[Sequence[float]], radius: float,
                   self_weight: float, cross_weight: float) -> Network:
    """Geometric edge rule: nodes within ``radius`` (inclusive) are linked both ways.

    No connectivity check is made here; callers decide what to do with a
    disconnected layout.
    """
    _check_edge_params(radius, self_weight, cross_weight)
    p = np.asarray(positions, dtype=float)
    if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] != 2:
        raise DimensionError("positions must be a non-empty list of 2-d points")
    dist = np.linalg.norm(p[:, None, :] - p[None, :, :], axis=-1)
    w = np.where(dist <= radius, float(cross_weight), 0.0)
    np.fill_diagonal(w, float(self_weight))
    return Network(w, p)


def _generate(draw, radius, self_weight, cross_weight, max_attempts):
    for _ in range(max_attempts):
        net = from_positions(draw(), radius, self_weight, cross_weight)
        if is_strongly_connected(net):
            return net
    raise DisconnectedError(max_attempts)


def random_geometric(n: int, side: float, radius: float, self_weight: float,
                     cross_weight: float, seed: int,
                     max_attempts: int = MAX_ATTEMPTS) -> Network:
    """Uniform positions in ``[0, side]^2``, redrawn until strongly connected."""
    if n < 1:
        raise ParameterError("n must be at least 1")
    if side <= 0:
        raise ParameterError("side must be positive")
    _check_edge_params(radius, self_weight, cross_weight)
    rng = np.random.default_rng(seed)
    return _generate(lambda: rng.uniform(0.0, side, size=(n, 2)),
                     radius, self_weight, cross_weight, max_attempts)


def random_clustered(n: int, side: float, radius: float, self_weight: float,
                     cross_weight: float, seed: int, cluster_size: int,
                     cluster_side: float, max_attempts: int = MAX_ATTEMPTS) -> Network:
    """Like :func:`random_geometric`, but ``cluster_size`` randomly chosen nodes
    are packed into the corner square ``[0, cluster_side]^2``.

    Cluster membership is a random subset, so node indices (and anything
    banded by index, such as caps) are not correlated with the cluster.
    """
    if n < 1:
        raise ParameterError("n must be at least 1")
    if not 0 <= cluster_size <= n:
        raise ParameterError("cluster_size must lie in [0, n]")
    if side <= 0 or cluster_side <= 0 or cluster_side > side:
        raise ParameterError("need 0 < cluster_side <= side")
    _check_edge_params(radius, self_weight, cross_weight)
    rng = np.random.default_rng(seed)

    def draw():
        p = rng.uniform(0.0, side, size=(n, 2))
        members = rng.choice(n, size=cluster_size, replace=False)
        p[members] = rng.uniform(0.0, cluster_side, size=(cluster_size, 2))
        return p

    return _generate(draw, radius, self_weight, cross_weight, max_attempts)


def neighbor_sum(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (net.n,):
        raise DimensionError(f"state has shape {x.shape}, expected ({net.n},)")
    return net.weights @ x
