"""Networked SIS vector fields and the infection-cap feedback law.

For node ``i`` with neighbour pressure ``S_i = sum_j a_ij x_j``::

    open loop     dx_i = beta_i (1 - x_i) S_i - gamma_i x_i
    control       u_i  = -beta_i c_i x_i (1 - x_i) S_i
    closed loop   dx_i = beta_i (1 - c_i x_i) (1 - x_i) S_i - gamma_i x_i

Fields are evaluated on all of ``[0, 1]^n``, including states above the caps,
so that verification code can probe the boundary.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, ParameterError
from .graph import Network

Field = Callable[[np.ndarray], np.ndarray]


def _vector(value, n, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise DimensionError(f"{name} has shape {arr.shape}, expected ({n},)")
    return arr


@dataclass(frozen=True, eq=False)
class EpidemicParams:
    """Per-node infection rates, healing rates and cap parameters.

    The cap on node ``i`` is ``1 / cap_c[i]``.  Validation happens once here,
    never inside the field evaluations.
    """

    beta: np.ndarray
    gamma: np.ndarray
    cap_c: np.ndarray

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float)).copy()
        n = beta.shape[0]
        gamma = _vector(self.gamma, n, "gamma").copy()
        cap_c = _vector(self.cap_c, n, "cap_c").copy()
        if beta.ndim != 1 or n < 1:
            raise DimensionError("beta must be a non-empty vector")
        for name, arr in (("beta", beta), ("gamma", gamma), ("cap_c", cap_c)):
            if not np.all(np.isfinite(arr)):
                raise ParameterError(f"{name} must be finite")
        if np.any(beta <= 0):
            raise ParameterError("beta must be positive")
        if np.any(gamma < 0):
            raise ParameterError("gamma must be non-negative")
        if np.any(cap_c <= 1):
            raise ParameterError("cap_c must exceed 1")
        for name, arr in (("beta", beta), ("gamma", gamma), ("cap_c", cap_c)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def broadcast(cls, n: int, beta, gamma, cap_c) -> "EpidemicParams":
        """Build from scalars or length-``n`` sequences."""
        return cls(_vector(beta, n, "beta"), _vector(gamma, n, "gamma"), _vector(cap_c, n, "cap_c"))

    @property
    def n(self) -> int:
        return self.beta.shape[0]

    @property
    def caps(self) -> np.ndarray:
        return 1.0 / self.cap_c

    def replace(self, **changes) -> "EpidemicParams":
        fields = {"beta": self.beta, "gamma": self.gamma, "cap_c": self.cap_c}
        fields.update(changes)
        return EpidemicParams.broadcast(self.n, **fields)

    def to_dict(self) -> dict:
        return {"beta": self.beta.tolist(), "gamma": self.gamma.tolist(), "cap_c": self.cap_c.tolist()}

    @classmethod
    def from_dict(cls, data: dict, n: int | None = None) -> "EpidemicParams":
        """Parse the JSON form; scalar entries are broadcast to ``n`` nodes."""
        if n is None:
            sizes = [len(v) for v in data.values() if np.ndim(v) == 1]
            if not sizes:
                raise DimensionError("node count unknown: pass n or give at least one array")
            n = sizes[0]
        return cls.broadcast(n, data["beta"], data["gamma"], data["cap_c"])


def _check(params: EpidemicParams, net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if params.n != net.n:
        raise DimensionError(f"params describe {params.n} nodes, network has {net.n}")
    if x.shape != (net.n,):
        raise DimensionError(f"state has shape {x.shape}, expected ({net.n},)")
    return x


def open_loop_field(params: EpidemicParams, net: Network, x) -> np.ndarray:
    x = _check(params, net, x)
    return params.beta * (1.0 - x) * (net.weights @ x) - params.gamma * x


def control_input(params: EpidemicParams, net: Network, x) -> np.ndarray:
    x = _check(params, net, x)
    return -params.beta * params.cap_c * x * (1.0 - x) * (net.weights @ x)


def closed_loop_field(params: EpidemicParams, net: Network, x) -> np.ndarray:
    x = _check(params, net, x)
    return params.beta * (1.0 - params.cap_c * x) * (1.0 - x) * (net.weights @ x) - params.gamma * x


def scaling_factor(params: EpidemicParams, x) -> np.ndarray:
    """Multiplier ``1 - c_i x_i`` the controller applies to each infection rate."""
    x = np.asarray(x, dtype=float)
    if x.shape != (params.n,):
        raise DimensionError(f"state has shape {x.shape}, expected ({params.n},)")
    return 1.0 - params.cap_c * x


def make_field(params: EpidemicParams, net: Network, controlled: bool = True) -> Field:
    """Return a dimension-unchecked closure for the integrator's inner loop."""
    if params.n != net.n:
        raise DimensionError(f"params describe {params.n} nodes, network has {net.n}")
    a = np.array(net.weights)
    beta = np.array(params.beta)
    gamma = np.array(params.gamma)
    if controlled:
        c = np.array(params.cap_c)

        def field(x):
            return beta * (1.0 - c * x) * (1.0 - x) * (a @ x) - gamma * x
    else:
        def field(x):
            return beta * (1.0 - x) * (a @ x) - gamma * x
    return field


def make_control(params: EpidemicParams, net: Network) -> Field:
    a = np.array(net.weights)
    k = np.array(params.beta * params.cap_c)
    return lambda x: -k * x * (1.0 - x) * (a @ x)
