"""Regime classification and the endemic equilibrium of the controlled system."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import EpidemicParams, closed_loop_field
from .errors import ConvergenceError, DimensionError, WrongRegimeError
from .graph import Network
from .spectral import DEFAULT_TOL as SPECTRAL_TOL
from .spectral import build_linearized, spectral_abscissa

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000
MARGIN = 1e-8

STALL_WINDOW = 100
STALL_RATIO = 1e-3
DAMPING = 0.5


class Regime(enum.Enum):
    DFE_ONLY = "DFE"
    ENDEMIC = "endemic"


@dataclass(frozen=True)
class EquilibriumReport:
    regime: Regime
    spectral_abscissa: float
    endemic_point: Optional[np.ndarray] = None
    residual: float = 0.0
    iterations: int = 0
    marginal: bool = False

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "spectral_abscissa": self.spectral_abscissa,
            "endemic_point": None if self.endemic_point is None else self.endemic_point.tolist(),
            "residual": self.residual,
            "iterations": self.iterations,
            "marginal": self.marginal,
        }


def scalar_cap_root(beta: float, gamma: float, c: float, s: float) -> float:
    """Solve ``gamma x = beta (1 - c x)(1 - x) s`` for the root in ``[0, 1/c]``.

    This is the smaller root of ``beta c s x^2 - (beta (1 + c) s + gamma) x + beta s``.
    """
    if s <= 0.0:
        return 0.0
    if gamma == 0.0:
        return 1.0 / c
    a = beta * c * s
    b = beta * (1.0 + c) * s + gamma
    k = beta * s
    disc = b * b - 4.0 * a * k
    # disc = (beta s (c - 1))^2 + gamma^2 + 2 beta s gamma (1 + c) > 0 analytically
    assert disc >= -1e-12 * b * b, f"negative discriminant {disc}"
    # 2k / (b + sqrt(disc)) is the small root without cancellation; the min()
    # only absorbs rounding for tiny gamma
    return min(2.0 * k / (b + math.sqrt(max(disc, 0.0))), 1.0 / c)


def equilibrium_residual(params: EpidemicParams, net: Network, x) -> float:
    return float(np.max(np.abs(closed_loop_field(params, net, x))))


def _cap_map(beta, gamma, c, s):
    """Vectorised :func:`scalar_cap_root` for the damped-Jacobi fallback."""
    a = beta * c * s
    b = beta * (1.0 + c) * s + gamma
    k = beta * s
    disc = np.maximum(b * b - 4.0 * a * k, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        root = np.where(b > 0, 2.0 * k / (b + np.sqrt(disc)), 0.0)
    return np.where(s > 0, np.minimum(root, 1.0 / c), 0.0)


def solve_endemic(params: EpidemicParams, net: Network, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER, x_init=None,
                  check_regime: bool = True) -> tuple[np.ndarray, int, float]:
    """Endemic equilibrium by Gauss-Seidel sweeps of the componentwise cap root.

    Starts from the cap vector unless ``x_init`` is given. Returns
    ``(x, sweeps, residual)``. If the residual stops improving
    (less than 0.1% over 100 sweeps) the iteration switches to damped Jacobi.
    """
    if params.n != net.n:
        raise DimensionError(f"params describe {params.n} nodes, network has {net.n}")
    if check_regime:
        s = spectral_abscissa(build_linearized(params, net)).abscissa
        if s <= MARGIN:
            raise WrongRegimeError(f"wrong regime: s(BA - Gamma) = {s:.6g} <= 0, only the DFE exists")

    beta = params.beta.tolist()
    gamma = params.gamma.tolist()
    c = params.cap_c.tolist()
    a = np.array(net.weights)
    x = np.array(params.caps if x_init is None else x_init, dtype=float)
    if x.shape != (net.n,):
        raise DimensionError(f"x_init has shape {x.shape}, expected ({net.n},)")

    history = []
    jacobi = False
    residual = equilibrium_residual(params, net, x)
    for sweep in range(1, max_iter + 1):
        if jacobi:
            x = (1.0 - DAMPING) * x + DAMPING * _cap_map(params.beta, params.gamma, params.cap_c, a @ x)
        else:
            for i in range(net.n):
                x[i] = scalar_cap_root(beta[i], gamma[i], c[i], float(a[i] @ x))
        residual = equilibrium_residual(params, net, x)
        if residual <= tol:
            return x, sweep, residual
        history.append(residual)
        if not jacobi and len(history) > STALL_WINDOW:
            before = history[-STALL_WINDOW - 1]
            if before - residual < STALL_RATIO * before:
                jacobi = True
    raise ConvergenceError("endemic fixed point", residual, max_iter)


def classify(params: EpidemicParams, net: Network, tol: float = DEFAULT_TOL,
             max_iter: int = DEFAULT_MAX_ITER, spectral_tol: float = SPECTRAL_TOL) -> EquilibriumReport:
    """Decide DFE-only vs endemic from ``s(BA - Gamma)``; solve for the endemic point if any.

    Abscissas within ``1e-8`` of zero are treated as DFE-only and flagged marginal.
    """
    s = spectral_abscissa(build_linearized(params, net), tol=spectral_tol).abscissa
    if s <= MARGIN:
        return EquilibriumReport(Regime.DFE_ONLY, s, marginal=abs(s) <= MARGIN)
    x, sweeps, residual = solve_endemic(params, net, tol, max_iter, check_regime=False)
    return EquilibriumReport(Regime.ENDEMIC, s, x, residual, sweeps)
