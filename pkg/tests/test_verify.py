import math

import numpy as np
import pytest

from epinetctl import (EpidemicParams, Network, ParameterError, RunOptions, Trajectory,
                       check_cap_invariance, check_lyapunov_decrease, compare_open_closed,
                       integrate, solve_endemic)
from epinetctl.dynamics import make_field

XBAR = (3 - math.sqrt(5)) / 4


def _traj(states):
    states = np.asarray(states, dtype=float)
    return Trajectory(np.arange(len(states), dtype=float), states)


def test_invariance_constant_zero():
    rep = check_cap_invariance(_traj(np.zeros((5, 3))), [2.0, 3.0, 4.0])
    assert rep.max_cap_violation <= 0 and rep.max_negativity == 0.0
    assert rep.passed


def test_invariance_counterexample():
    states = np.full((4, 2), 0.1)
    states[2, 1] = 0.5 + 0.01
    rep = check_cap_invariance(_traj(states), [4.0, 2.0])
    assert rep.max_cap_violation == pytest.approx(0.01, abs=1e-15)
    assert not rep.passed
    assert rep.to_dict()["pass"] is False


def test_invariance_negativity():
    rep = check_cap_invariance(_traj([[0.1, -1e-8]]), [2.0, 2.0], tol=1e-7, neg_tol=1e-9)
    assert rep.max_negativity == pytest.approx(1e-8)
    assert not rep.passed


def test_invariance_closed_loop_run():
    rng = np.random.default_rng(2)
    from conftest import random_instance
    net, p = random_instance(rng, 20)
    traj = integrate(make_field(p, net), p.caps * rng.random(20), RunOptions(t_end=50.0))
    assert check_cap_invariance(traj, p.cap_c).passed


def test_lyapunov_constant_at_equilibrium():
    rep = check_lyapunov_decrease(_traj([[XBAR, XBAR]] * 5), [XBAR, XBAR])
    assert np.all(rep.values == 0.0)
    assert rep.passed


def test_lyapunov_endemic_pair(endemic2):
    net, p = endemic2
    traj = integrate(make_field(p, net), [0.1, 0.1], RunOptions(t_end=100.0))
    rep = check_lyapunov_decrease(traj, [XBAR, XBAR])
    assert rep.passed
    assert rep.values[-1] < 1e-6 < rep.values[0]


def test_lyapunov_detects_divergence(endemic2):
    net, p = endemic2
    # the open loop heads for 0.5, away from the controlled equilibrium
    traj = integrate(make_field(p, net, controlled=False), [XBAR, XBAR], RunOptions(t_end=50.0))
    rep = check_lyapunov_decrease(traj, [XBAR, XBAR])
    assert not rep.passed
    assert rep.values[-1] == pytest.approx((0.5 - XBAR) / XBAR, abs=1e-4)


def test_lyapunov_rejects_zero_component():
    with pytest.raises(ParameterError):
        check_lyapunov_decrease(_traj([[0.1, 0.1]]), [0.0, 0.2])


def test_compare_dfe():
    net = Network([[0, 1], [1, 0]])
    p = EpidemicParams.broadcast(2, 0.3, 0.5, 2.0)
    cmp = compare_open_closed(p, net, [0.1, 0.1], RunOptions(t_end=200.0))
    assert np.max(cmp.terminal_open) < 1e-9 and np.max(cmp.terminal_closed) < 1e-9
    assert cmp.passed


def test_compare_endemic(endemic2):
    net, p = endemic2
    cmp = compare_open_closed(p, net, [0.1, 0.1], RunOptions(t_end=200.0), record_controls=True)
    assert np.allclose(cmp.terminal_open, 0.5, atol=1e-4)
    assert np.allclose(cmp.terminal_closed, XBAR, atol=1e-4)
    assert np.all(cmp.terminal_gap > 0.3)
    assert np.all(cmp.peak_closed <= cmp.peak_open + 1e-7)
    assert cmp.closed_loop.controls is not None


def test_compare_zero_start(endemic2):
    net, p = endemic2
    cmp = compare_open_closed(p, net, [0.0, 0.0], RunOptions(t_end=5.0))
    assert np.all(cmp.open_loop.states == 0) and np.all(cmp.closed_loop.states == 0)
