"""Fixed-step RK4 and adaptive Dormand-Prince integration of vector fields.

States are never clamped or projected; if a closed-loop run leaves its cap
box, that is a bug the verifier is supposed to catch.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterator, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, ParameterError

Field = Callable[[np.ndarray], np.ndarray]


class Method(enum.Enum):
    RK4 = "rk4"
    RK45 = "rk45"


class Status(enum.Enum):
    CONVERGED = "converged"
    TIMED_OUT = "timed_out"


@dataclass(frozen=True)
class RunOptions:
    method: Method = Method.RK4
    dt: float = 0.01
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    t_end: float = 200.0
    record_every: float = 0.1
    converge_tol: Optional[float] = None
    converge_window: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.t_end <= 0:
            raise ParameterError("t_end must be positive")
        if self.record_every <= 0:
            raise ParameterError("record_every must be positive")
        if self.method is Method.RK4 and not 0 < self.dt <= self.t_end:
            raise ParameterError("dt must lie in (0, t_end]")
        if self.method is Method.RK45 and (self.abs_tol <= 0 or self.rel_tol <= 0):
            raise ParameterError("tolerances must be positive")
        if self.converge_tol is not None and self.converge_tol < 0:
            raise ParameterError("converge_tol must be non-negative")
        if self.converge_window is not None and self.converge_window < 0:
            raise ParameterError("converge_window must be non-negative")

    def to_dict(self) -> dict:
        return {
            "method": self.method.value, "dt": self.dt, "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol, "t_end": self.t_end, "record_every": self.record_every,
            "converge_tol": self.converge_tol, "converge_window": self.converge_window,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunOptions":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown run options: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    controls: Optional[np.ndarray] = None
    meta: dict = dc_field(default_factory=dict)

    @property
    def terminal(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self) -> str:
        """CSV text with header ``t,x_1,...,x_n[,u_1,...,u_n]`` at 17 significant digits."""
        n = self.states.shape[1]
        header = ["t"] + [f"x_{i}" for i in range(1, n + 1)]
        body = np.column_stack([self.times, self.states])
        if self.controls is not None:
            header += [f"u_{i}" for i in range(1, n + 1)]
            body = np.column_stack([body, self.controls])
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        np.savetxt(buf, body, fmt="%.17g", delimiter=",", newline="\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Trajectory":
        lines = text.strip("\n").split("\n")
        header = lines[0].split(",")
        data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", ndmin=2)
        n = sum(1 for h in header if h.startswith("x_"))
        controls = data[:, 1 + n:] if len(header) > 1 + n else None
        return cls(data[:, 0], data[:, 1:1 + n], controls)


def rk4_step(field: Field, x: np.ndarray, h: float) -> np.ndarray:
    k1 = field(x)
    k2 = field(x + 0.5 * h * k1)
    k3 = field(x + 0.5 * h * k2)
    k4 = field(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def record_times(opts: RunOptions) -> np.ndarray:
    k = int(math.floor(opts.t_end / opts.record_every + 1e-9))
    times = opts.record_every * np.arange(k + 1)
    times = times[times < opts.t_end * (1 - 1e-12)]
    return np.append(times, opts.t_end)


def _advance(field: Field, x: np.ndarray, t0: float, t1: float, opts: RunOptions) -> np.ndarray:
    if opts.method is Method.RK4:
        m = max(1, math.ceil((t1 - t0) / opts.dt - 1e-9))
        h = (t1 - t0) / m
        for _ in range(m):
            x = rk4_step(field, x, h)
        return x
    sol = solve_ivp(lambda t, y: field(y), (t0, t1), x, method="RK45",
                    rtol=opts.rel_tol, atol=opts.abs_tol)
    if sol.status != 0:
        raise IntegrationError(f"step-size underflow near t={sol.t[-1]:.6g}: {sol.message}")
    return sol.y[:, -1]


def _march(field: Field, x0: np.ndarray, opts: RunOptions) -> Iterator[tuple[float, np.ndarray]]:
    times = record_times(opts)
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise IntegrationError("initial state is not finite")
    yield float(times[0]), x
    for t0, t1 in zip(times[:-1], times[1:]):
        # blow-ups are reported below with time and component
        with np.errstate(over="ignore", invalid="ignore"):
            x = _advance(field, x, float(t0), float(t1), opts)
        bad = np.flatnonzero(~np.isfinite(x))
        if bad.size:
            raise IntegrationError(f"non-finite state at t={t1:.6g}, component x_{bad[0] + 1}")
        yield float(t1), x


def _pack(times, states, control, meta) -> Trajectory:
    states = np.array(states)
    controls = np.array([control(s) for s in states]) if control is not None else None
    return Trajectory(np.array(times), states, controls, meta)


def _meta(opts: RunOptions, **extra) -> dict:
    return {"integrator": opts.to_dict(), **extra}


def integrate(field: Field, x0, opts: RunOptions = RunOptions(),
              control: Optional[Field] = None) -> Trajectory:
    """Integrate ``dx/dt = field(x)`` from ``x0`` to ``opts.t_end``.

    Samples are taken at multiples of ``record_every`` plus ``t_end``. When
    ``control`` is given it is evaluated at every recorded state.
    """
    times, states = [], []
    for t, x in _march(field, x0, opts):
        times.append(t)
        states.append(x)
    return _pack(times, states, control, _meta(opts))


def simulate_until_converged(field: Field, x0, opts: RunOptions,
                             control: Optional[Field] = None) -> tuple[Trajectory, Status]:
    """Integrate until ``||field(x)||_inf <= converge_tol`` has held on every
    recorded sample spanning ``converge_window`` time units, or until ``t_end``.

    ``converge_tol = 0`` never converges, even at an exact equilibrium.
    """
    if opts.converge_tol is None or opts.converge_window is None:
        raise ParameterError("converge_tol and converge_window must be set")
    times, states = [], []
    streak_start = None
    status = Status.TIMED_OUT
    for t, x in _march(field, x0, opts):
        times.append(t)
        states.append(x)
        if opts.converge_tol > 0 and float(np.max(np.abs(field(x)))) <= opts.converge_tol:
            if streak_start is None:
                streak_start = t
            if t - streak_start >= opts.converge_window:
                status = Status.CONVERGED
                break
        else:
            streak_start = None
    return _pack(times, states, control, _meta(opts, status=status.value)), status
