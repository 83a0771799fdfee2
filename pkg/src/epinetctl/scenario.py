"""JSON scenarios and the five built-in reproduction experiments.

A scenario file looks like::

    {
      "graph":  {"generator": "geometric", "n": 100, "side": 100, "radius": 25,
                 "self_weight": 0.3, "cross_weight": 0.02},
      "params": {"beta": 0.8, "gamma": 0.3},
      "caps":   [{"range": [1, 20], "cap": 0.5}, ...],
      "x0":     {"infected_nodes": [1, 2, 3], "level": 0.1},
      "run":    {"method": "rk4", "dt": 0.01, "t_end": 200, "record_every": 0.1},
      "seed":   42
    }

Caps are cap *levels* ``1/c_i``. Node ids in ``caps`` ranges and
``infected_nodes`` are 1-based.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import graph as G
from .dynamics import EpidemicParams
from .errors import EpinetError, ScenarioError
from .integrate import RunOptions

GENERATORS = ("geometric", "clustered", "positions")

# Cap bands for nodes 1-20, 21-40, ..., 81-100.
BAND_CAPS = (0.5, 0.45, 0.3, 0.25, 0.2)
BAND_SIZE = 20
# Off-diagonal weight for the built-in experiments. With the literal 0.003 the
# beta=0.8, gamma=0.3 experiments come out disease-free at n=100, r=25.
REPRODUCE_CROSS_WEIGHT = 0.02
REPRODUCE_SELF_WEIGHT = 0.3
REFERENCE_ABSCISSA = {1: -0.313, 2: 0.198, 3: 0.198, 4: 0.276, 5: 0.214}


@dataclass(frozen=True, eq=False)
class Resolved:
    net: G.Network
    params: EpidemicParams
    x0: np.ndarray
    run: RunOptions
    meta: dict = field(default_factory=dict)


def _num(value, where, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(where, f"expected a number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise ScenarioError(where, "must be finite")
    if positive and value <= 0:
        raise ScenarioError(where, "must be positive")
    if nonneg and value < 0:
        raise ScenarioError(where, "must be non-negative")
    return value


def _int(value, where, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(where, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ScenarioError(where, f"must be at least {minimum}")
    return value


def _require(d, key, where):
    if not isinstance(d, dict):
        raise ScenarioError(where, "expected an object")
    if key not in d:
        raise ScenarioError(f"{where}.{key}", "missing")
    return d[key]


@dataclass(eq=False)
class Scenario:
    graph: dict
    params: dict
    caps: Any = None
    x0: Any = None
    run: dict = field(default_factory=dict)
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        if not isinstance(data, dict):
            raise ScenarioError("<root>", "scenario must be a JSON object")
        unknown = set(data) - {"graph", "params", "caps", "x0", "run", "seed", "name"}
        if unknown:
            raise ScenarioError(sorted(unknown)[0], "unknown top-level field")
        scenario = cls(
            graph=_require(data, "graph", "<root>"),
            params=_require(data, "params", "<root>"),
            caps=data.get("caps"),
            x0=data.get("x0"),
            run=data.get("run", {}),
            seed=_int(data.get("seed", 0), "seed", minimum=0),
        )
        return scenario

    @classmethod
    def load(cls, path) -> "Scenario":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ScenarioError("<file>", f"cannot read {path}: {exc.strerror}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError("<file>", f"not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = {"graph": self.graph, "params": self.params}
        if self.caps is not None:
            out["caps"] = self.caps
        if self.x0 is not None:
            out["x0"] = self.x0
        out["run"] = self.run
        out["seed"] = self.seed
        return copy.deepcopy(out)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    def with_seed(self, seed: int) -> "Scenario":
        out = Scenario(**self.to_dict())
        out.seed = _int(seed, "seed", minimum=0)
        return out

    def resolve(self) -> Resolved:
        net = resolve_graph(self.graph, self.seed)
        n = net.n
        params = resolve_params(self.params, self.caps, n)
        x0 = resolve_x0(self.x0, params, n)
        if not isinstance(self.run, dict):
            raise ScenarioError("run", "expected an object")
        try:
            run = RunOptions.from_dict(self.run)
        except (EpinetError, TypeError, ValueError) as exc:
            raise ScenarioError("run", str(exc)) from exc
        meta = {"scenario_hash": self.digest(), "seed": self.seed, "rng": G.RNG_ALGORITHM}
        return Resolved(net, params, x0, run, meta)


def resolve_graph(spec: dict, seed: int) -> G.Network:
    if not isinstance(spec, dict):
        raise ScenarioError("graph", "expected an object")
    if "weights" in spec:
        try:
            return G.Network(np.asarray(spec["weights"], dtype=float), spec.get("positions"))
        except (EpinetError, ValueError, TypeError) as exc:
            raise ScenarioError("graph.weights", str(exc)) from exc
    kind = _require(spec, "generator", "graph")
    if kind not in GENERATORS:
        raise ScenarioError("graph.generator", f"expected one of {GENERATORS}, got {kind!r}")
    radius = _num(_require(spec, "radius", "graph"), "graph.radius", positive=True)
    self_w = _num(spec.get("self_weight", 0.3), "graph.self_weight", nonneg=True)
    cross_w = _num(spec.get("cross_weight", 0.003), "graph.cross_weight", nonneg=True)
    if kind == "positions":
        pos = _require(spec, "positions", "graph")
        try:
            return G.from_positions(pos, radius, self_w, cross_w)
        except (EpinetError, ValueError, TypeError) as exc:
            raise ScenarioError("graph.positions", str(exc)) from exc
    n = _int(_require(spec, "n", "graph"), "graph.n", minimum=1)
    side = _num(spec.get("side", 100.0), "graph.side", positive=True)
    if kind == "geometric":
        return G.random_geometric(n, side, radius, self_w, cross_w, seed)
    size = _int(_require(spec, "cluster_size", "graph"), "graph.cluster_size", minimum=0)
    cside = _num(_require(spec, "cluster_side", "graph"), "graph.cluster_side", positive=True)
    if size > n:
        raise ScenarioError("graph.cluster_size", "exceeds n")
    if cside > side:
        raise ScenarioError("graph.cluster_side", "exceeds side")
    return G.random_clustered(n, side, radius, self_w, cross_w, seed, size, cside)


def _rate(value, where, n, positive):
    if isinstance(value, list):
        if len(value) != n:
            raise ScenarioError(where, f"expected {n} entries, got {len(value)}")
        vals = [_num(v, f"{where}[{i}]") for i, v in enumerate(value)]
    else:
        vals = [_num(value, where)] * n
    for i, v in enumerate(vals):
        if positive and v <= 0:
            raise ScenarioError(where, f"entry {i} must be positive")
        if v < 0:
            raise ScenarioError(where, f"entry {i} must be non-negative")
    return np.array(vals)


def resolve_caps(spec, n: int) -> np.ndarray:
    """Cap levels ``1/c_i`` from a scalar, a per-node list, or a list of bands."""
    if spec is None:
        raise ScenarioError("caps", "missing")
    if isinstance(spec, list) and spec and all(isinstance(b, dict) for b in spec):
        levels = np.full(n, np.nan)
        for k, band in enumerate(spec):
            rng = _require(band, "range", f"caps[{k}]")
            if not isinstance(rng, list) or len(rng) != 2:
                raise ScenarioError(f"caps[{k}].range", "expected [lo, hi]")
            lo, hi = rng
            lo = _int(lo, f"caps[{k}].range", minimum=1)
            hi = _int(hi, f"caps[{k}].range", minimum=lo)
            if hi > n:
                raise ScenarioError(f"caps[{k}].range", f"node {hi} out of range 1..{n}")
            levels[lo - 1:hi] = _num(_require(band, "cap", f"caps[{k}]"), f"caps[{k}].cap")
        missing = np.flatnonzero(np.isnan(levels))
        if missing.size:
            raise ScenarioError("caps", f"node {missing[0] + 1} not covered by any band")
    else:
        levels = _rate(spec, "caps", n, positive=True)
    if np.any(levels <= 0) or np.any(levels >= 1):
        raise ScenarioError("caps", "cap levels must lie strictly between 0 and 1")
    return levels


def resolve_params(spec: dict, caps, n: int) -> EpidemicParams:
    if not isinstance(spec, dict):
        raise ScenarioError("params", "expected an object")
    unknown = set(spec) - {"beta", "gamma", "cap_c"}
    if unknown:
        raise ScenarioError(f"params.{sorted(unknown)[0]}", "unknown parameter")
    beta = _rate(_require(spec, "beta", "params"), "params.beta", n, positive=True)
    gamma = _rate(_require(spec, "gamma", "params"), "params.gamma", n, positive=False)
    if "cap_c" in spec:
        if caps is not None:
            raise ScenarioError("caps", "give either caps or params.cap_c, not both")
        cap_c = _rate(spec["cap_c"], "params.cap_c", n, positive=True)
        if np.any(cap_c <= 1):
            raise ScenarioError("params.cap_c", "entries must exceed 1")
    else:
        cap_c = 1.0 / resolve_caps(caps, n)
    return EpidemicParams(beta, gamma, cap_c)


def resolve_x0(spec, params: EpidemicParams, n: int) -> np.ndarray:
    if spec is None:
        raise ScenarioError("x0", "missing")
    if isinstance(spec, dict):
        ids = _require(spec, "infected_nodes", "x0")
        level = _num(_require(spec, "level", "x0"), "x0.level", nonneg=True)
        if not isinstance(ids, list):
            raise ScenarioError("x0.infected_nodes", "expected a list of node ids")
        x0 = np.zeros(n)
        for k, i in enumerate(ids):
            i = _int(i, f"x0.infected_nodes[{k}]", minimum=1)
            if i > n:
                raise ScenarioError(f"x0.infected_nodes[{k}]", f"node {i} out of range 1..{n}")
            x0[i - 1] = level
    else:
        x0 = _rate(spec, "x0", n, positive=False)
    if np.any(x0 > 1):
        raise ScenarioError("x0", "infection fractions must lie in [0, 1]")
    over = np.flatnonzero(x0 > params.caps * (1 + 1e-12))
    if over.size:
        i = over[0]
        raise ScenarioError("x0", f"node {i + 1} starts at {x0[i]} above its cap {params.caps[i]:.6g}")
    return x0


def band_caps(n: int = 100, first_band: float | None = None) -> list:
    caps = [{"range": [k * BAND_SIZE + 1, (k + 1) * BAND_SIZE], "cap": cap}
            for k, cap in enumerate(BAND_CAPS) if k * BAND_SIZE < n]
    if first_band is not None:
        caps[0]["cap"] = first_band
    return caps


def builtin(experiment: int, seed: int = 0, cross_weight: float = REPRODUCE_CROSS_WEIGHT,
            t_end: float = 500.0) -> Scenario:
    """Built-in scenario for experiment 1-5.

    1: beta=0.3, gamma=0.5 (extinction); 2: beta=0.8, gamma=0.3 (endemic);
    3: as 2 with the first band's cap raised to 0.9; 4: as 2 with radius 50;
    5: as 2 on a layout with a dense bottom-left cluster.
    """
    if experiment not in REFERENCE_ABSCISSA:
        raise ScenarioError("experiment", f"expected 1..5, got {experiment}")
    g = {"generator": "geometric", "n": 100, "side": 100.0, "radius": 25.0,
         "self_weight": REPRODUCE_SELF_WEIGHT, "cross_weight": cross_weight}
    params = {"beta": 0.8, "gamma": 0.3}
    caps = band_caps()
    if experiment == 1:
        params = {"beta": 0.3, "gamma": 0.5}
    elif experiment == 3:
        caps = band_caps(first_band=0.9)
    elif experiment == 4:
        # same positions as experiment 2, wider radius
        base = resolve_graph(g, seed)
        g = {"generator": "positions", "positions": base.positions.tolist(), "radius": 50.0,
             "self_weight": REPRODUCE_SELF_WEIGHT, "cross_weight": cross_weight}
    elif experiment == 5:
        g.update(generator="clustered", cluster_size=40, cluster_side=30.0)
    return Scenario(
        graph=g, params=params, caps=caps,
        x0={"infected_nodes": list(range(1, 11)), "level": 0.1},
        run={"method": "rk4", "dt": 0.01, "t_end": t_end, "record_every": 0.1},
        seed=seed,
    )
