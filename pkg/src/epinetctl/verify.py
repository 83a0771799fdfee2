"""Machine-checkable verdicts on trajectories: cap invariance, Lyapunov decrease,
and controlled-vs-uncontrolled comparisons."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import EpidemicParams, make_control, make_field
from .errors import DimensionError, ParameterError
from .graph import Network
from .integrate import RunOptions, Trajectory, integrate

CAP_TOL = 1e-7
LYAPUNOV_TOL = 1e-6


@dataclass(frozen=True)
class InvarianceReport:
    max_cap_violation: float
    max_negativity: float
    tol: float
    neg_tol: float

    @property
    def passed(self) -> bool:
        return self.max_cap_violation <= self.tol and self.max_negativity <= self.neg_tol

    def to_dict(self) -> dict:
        return {"max_cap_violation": self.max_cap_violation, "max_negativity": self.max_negativity,
                "tol": self.tol, "neg_tol": self.neg_tol, "pass": self.passed}


@dataclass(frozen=True)
class LyapunovReport:
    values: np.ndarray
    max_uptick: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_uptick <= self.tol

    def to_dict(self) -> dict:
        return {"initial": float(self.values[0]), "final": float(self.values[-1]),
                "max_uptick": self.max_uptick, "tol": self.tol, "pass": self.passed}


def check_cap_invariance(traj: Trajectory, cap_c, tol: float = CAP_TOL,
                         neg_tol: float | None = None) -> InvarianceReport:
    """Worst excursion above ``1/c_i`` and below zero over all recorded samples.

    ``neg_tol`` defaults to ``tol``.
    """
    cap_c = np.asarray(cap_c, dtype=float)
    if cap_c.shape != (traj.states.shape[1],):
        raise DimensionError(f"cap_c has shape {cap_c.shape}, trajectory has {traj.states.shape[1]} nodes")
    over = float(np.max(traj.states - 1.0 / cap_c))
    under = float(np.max(-traj.states))
    return InvarianceReport(over, under, tol, tol if neg_tol is None else neg_tol)


def lyapunov_values(states: np.ndarray, endemic) -> np.ndarray:
    endemic = np.asarray(endemic, dtype=float)
    if np.any(endemic <= 0):
        raise ParameterError("endemic point must be strictly positive")
    return np.max(np.abs(states - endemic) / endemic, axis=1)


def check_lyapunov_decrease(traj: Trajectory, endemic, tol: float = LYAPUNOV_TOL,
                            skip: int = 0) -> LyapunovReport:
    """Sample ``V(x) = max_i |x_i - xbar_i| / xbar_i`` along the trajectory.

    ``max_uptick`` is the largest increase between consecutive samples after
    the first ``skip`` samples are dropped.
    """
    endemic = np.asarray(endemic, dtype=float)
    if endemic.shape != (traj.states.shape[1],):
        raise DimensionError("endemic point dimension does not match trajectory")
    values = lyapunov_values(traj.states, endemic)
    tail = values[skip:]
    uptick = float(np.max(np.diff(tail), initial=0.0)) if tail.size > 1 else 0.0
    return LyapunovReport(values, max(uptick, 0.0), tol)


@dataclass(frozen=True)
class PairedSummary:
    open_loop: Trajectory
    closed_loop: Trajectory
    peak_open: np.ndarray
    peak_closed: np.ndarray
    terminal_open: np.ndarray
    terminal_closed: np.ndarray
    tol: float

    @property
    def terminal_gap(self) -> np.ndarray:
        return self.terminal_open - self.terminal_closed

    @property
    def max_peak_excess(self) -> float:
        return float(np.max(self.peak_closed - self.peak_open))

    @property
    def passed(self) -> bool:
        return self.max_peak_excess <= self.tol

    def to_dict(self) -> dict:
        return {
            "peak_open": self.peak_open.tolist(), "peak_closed": self.peak_closed.tolist(),
            "terminal_open": self.terminal_open.tolist(),
            "terminal_closed": self.terminal_closed.tolist(),
            "terminal_gap": self.terminal_gap.tolist(),
            "max_peak_excess": self.max_peak_excess, "pass": self.passed,
        }


def compare_open_closed(params: EpidemicParams, net: Network, x0, opts: RunOptions,
                        tol: float = CAP_TOL, record_controls: bool = False) -> PairedSummary:
    x0 = np.asarray(x0, dtype=float)
    control = make_control(params, net) if record_controls else None
    traj_open = integrate(make_field(params, net, controlled=False), x0, opts)
    traj_closed = integrate(make_field(params, net, controlled=True), x0, opts, control=control)
    return PairedSummary(
        traj_open, traj_closed,
        traj_open.states.max(axis=0), traj_closed.states.max(axis=0),
        traj_open.terminal.copy(), traj_closed.terminal.copy(), tol,
    )
