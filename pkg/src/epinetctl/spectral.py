"""Spectral abscissa and Perron vector of irreducible Metzler matrices.

``s(M)`` is found by shifting ``M`` to a primitive non-negative matrix
``M + sigma I`` and running plain power iteration on it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .dynamics import EpidemicParams
from .errors import ConvergenceError, DimensionError, NotIrreducibleError, ParameterError
from .graph import Network

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1_000_000


@dataclass(frozen=True)
class SpectralResult:
    abscissa: float
    perron: np.ndarray
    iterations: int
    residual: float


def as_metzler(m) -> np.ndarray:
    """Validate ``m`` as a square real matrix with non-negative off-diagonal entries."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ParameterError("matrix entries must be finite")
    off = m[~np.eye(m.shape[0], dtype=bool)]
    if np.any(off < 0):
        raise ParameterError("matrix is not Metzler: negative off-diagonal entry")
    return m


def is_irreducible(m) -> bool:
    m = np.asarray(m, dtype=float)
    if m.shape[0] == 1:
        return True
    support = m != 0
    np.fill_diagonal(support, False)
    ncomp, _ = connected_components(support, directed=True, connection="strong")
    return ncomp == 1


def build_linearized(params: EpidemicParams, net: Network) -> np.ndarray:
    """Assemble ``B A - Gamma``, the linearisation of either field at the origin."""
    if params.n != net.n:
        raise DimensionError(f"params describe {params.n} nodes, network has {net.n}")
    m = params.beta[:, None] * net.weights
    m[np.diag_indices(net.n)] -= params.gamma
    return m


def spectral_abscissa(m, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> SpectralResult:
    """Largest real part of the spectrum of an irreducible Metzler matrix.

    The Perron vector is returned strictly positive with unit max-norm. The
    loop stops on the max-norm residual ``||M v - s v||`` rather than on
    iterate changes, so a slowly separating dominant pair shows up as a
    :class:`ConvergenceError` instead of a silently wrong value.
    """
    m = as_metzler(m)
    if tol <= 0:
        raise ParameterError("tol must be positive")
    n = m.shape[0]
    if n == 1:
        return SpectralResult(float(m[0, 0]), np.ones(1), 0, 0.0)
    if not is_irreducible(m):
        raise NotIrreducibleError("not irreducible: support graph is not strongly connected")

    sigma = float(np.max(np.abs(np.diag(m)))) + 1.0
    p = m + sigma * np.eye(n)
    v = np.ones(n)
    residual = np.inf
    s = 0.0
    for it in range(1, max_iter + 1):
        w = p @ v
        v = w / np.max(w)
        mv = m @ v
        s = float(v @ mv / (v @ v))
        residual = float(np.max(np.abs(mv - s * v)))
        if residual <= tol:
            return SpectralResult(s, v, it, residual)
    raise ConvergenceError("power iteration", residual, max_iter)
