import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epinetctl import (ConvergenceError, EpidemicParams, Network, NotIrreducibleError,
                       ParameterError, build_linearized, spectral_abscissa)

from conftest import random_instance
from oracles import abscissa_2x2, abscissa_3x3


def test_build_linearized_examples():
    p = EpidemicParams.broadcast(2, 0.3, 0.5, 2.0)
    net = Network([[0.3, 0.003], [0.003, 0.3]])
    assert np.allclose(build_linearized(p, net), [[-0.41, 0.0009], [0.0009, -0.41]], atol=1e-16)

    a = np.array([[0.2, 0.5], [0.1, 0.4]])
    identity = EpidemicParams.broadcast(2, 1.0, 0.0, 2.0)
    assert np.array_equal(build_linearized(identity, Network(a)), a)

    single = EpidemicParams.broadcast(1, 1.0, 2.0, 2.0)
    assert build_linearized(single, Network([[0.5]])).tolist() == [[-1.5]]


def test_permutation_pair():
    res = spectral_abscissa([[0.0, 1.0], [1.0, 0.0]])
    assert res.abscissa == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(res.perron, [1.0, 1.0])


def test_weak_coupling_pair():
    res = spectral_abscissa([[-0.41, 0.0009], [0.0009, -0.41]])
    assert res.abscissa == pytest.approx(-0.4091, abs=1e-12)


def test_endemic_cross_pair():
    p = EpidemicParams.broadcast(2, 1.0, 0.5, 2.0)
    res = spectral_abscissa(build_linearized(p, Network([[0, 1], [1, 0]])))
    assert res.abscissa == pytest.approx(0.5, abs=1e-12)


def test_rejects_reducible():
    with pytest.raises(NotIrreducibleError):
        spectral_abscissa([[0.0, 1.0], [0.0, 0.0]])


def test_rejects_non_metzler():
    with pytest.raises(ParameterError):
        spectral_abscissa([[0.0, -1.0], [1.0, 0.0]])


def test_no_convergence_reported():
    rng = np.random.default_rng(0)
    net, p = random_instance(rng, 30)
    with pytest.raises(ConvergenceError) as err:
        spectral_abscissa(build_linearized(p, net), tol=1e-14, max_iter=2)
    assert err.value.iterations == 2


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.sampled_from([2, 3]))
def test_matches_closed_form(seed, n):
    rng = np.random.default_rng(seed)
    net, p = random_instance(rng, n)
    m = build_linearized(p, net)
    res = spectral_abscissa(m, tol=1e-11)
    expected = abscissa_2x2(m) if n == 2 else abscissa_3x3(m)
    assert abs(res.abscissa - expected) <= 1e-10
    assert np.all(res.perron > 0)
    assert res.residual <= 1e-11


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 40),
       alpha=st.floats(-2.0, 3.0))
def test_shift_invariance(seed, n, alpha):
    rng = np.random.default_rng(seed)
    net, p = random_instance(rng, n)
    m = build_linearized(p, net)
    base = spectral_abscissa(m, tol=1e-11).abscissa
    shifted = spectral_abscissa(m + alpha * np.eye(n), tol=1e-11).abscissa
    assert shifted == pytest.approx(base + alpha, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 30))
def test_perron_residual_and_positivity(seed, n):
    rng = np.random.default_rng(seed)
    net, p = random_instance(rng, n)
    m = build_linearized(p, net)
    res = spectral_abscissa(m)
    assert np.max(np.abs(m @ res.perron - res.abscissa * res.perron)) <= 1e-10
    assert np.all(res.perron > 0)
    assert np.max(res.perron) == pytest.approx(1.0)


def test_uniform_parameter_identity():
    rng = np.random.default_rng(4)
    net, _ = random_instance(rng, 25)
    s_a = spectral_abscissa(net.weights).abscissa
    for beta, gamma in [(0.3, 0.5), (0.8, 0.3), (1.7, 0.0)]:
        p = EpidemicParams.broadcast(25, beta, gamma, 2.0)
        s = spectral_abscissa(build_linearized(p, net)).abscissa
        assert s == pytest.approx(beta * s_a - gamma, abs=1e-9)
