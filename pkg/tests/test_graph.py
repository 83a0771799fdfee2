import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epinetctl import (DimensionError, DisconnectedError, Network, ParameterError,
                       from_positions, is_strongly_connected, neighbor_sum, random_clustered,
                       random_geometric)


def test_network_rejects_negative_weights():
    with pytest.raises(ParameterError):
        Network([[0.0, -1.0], [1.0, 0.0]])


def test_network_rejects_non_square():
    with pytest.raises(DimensionError):
        Network([[0.0, 1.0]])


def test_network_is_immutable():
    net = Network([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ValueError):
        net.weights[0, 0] = 5.0


@pytest.mark.parametrize("weights, expected", [
    ([[0, 1], [1, 0]], True),
    ([[0, 1], [0, 0]], False),
    ([[0, 0, 1], [1, 0, 0], [0, 1, 0]], True),
    ([[0.3]], True),
    ([[0.0]], False),
])
def test_is_strongly_connected(weights, expected):
    assert is_strongly_connected(Network(weights)) is expected


def test_random_geometric_hundred_nodes():
    net = random_geometric(100, 100.0, 25.0, 0.3, 0.003, seed=42)
    assert net.n == 100
    assert is_strongly_connected(net)
    assert np.all(np.diag(net.weights) == 0.3)
    off = net.weights[~np.eye(100, dtype=bool)]
    assert set(np.unique(off)) <= {0.0, 0.003}
    assert np.all(net.positions >= 0) and np.all(net.positions <= 100)


def test_random_geometric_single_node():
    net = random_geometric(1, 100.0, 25.0, 0.3, 0.003, seed=7)
    assert net.weights.tolist() == [[0.3]]


def test_random_geometric_radius_covers_area():
    net = random_geometric(2, 1.0, 2.0, 0.3, 0.003, seed=3)
    assert net.weights[0, 1] == net.weights[1, 0] == 0.003


def test_random_geometric_deterministic():
    a = random_geometric(50, 100.0, 25.0, 0.3, 0.003, seed=11)
    b = random_geometric(50, 100.0, 25.0, 0.3, 0.003, seed=11)
    assert a == b
    assert a.to_json() == b.to_json()


def test_random_geometric_gives_up():
    with pytest.raises(DisconnectedError) as err:
        random_geometric(10, 100.0, 0.1, 0.3, 0.003, seed=0, max_attempts=5)
    assert err.value.attempts == 5
    assert "5" in str(err.value)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 40))
def test_geometric_invariants(seed, n):
    net = random_geometric(n, 100.0, 40.0, 0.3, 0.003, seed)
    w = net.weights
    off = ~np.eye(n, dtype=bool)
    assert np.array_equal(w, w.T)
    assert np.all(np.diag(w) == 0.3)
    assert set(np.unique(w[off])) <= {0.0, 0.003}
    assert is_strongly_connected(net)


def test_from_positions_chain():
    net = from_positions([[0, 0], [10, 0], [20, 0], [30, 0]], 15.0, 0.3, 0.003)
    expected = np.diag([0.3] * 4)
    for i in range(3):
        expected[i, i + 1] = expected[i + 1, i] = 0.003
    assert np.array_equal(net.weights, expected)


def test_from_positions_closed_ball():
    net = from_positions([[0, 0], [3, 4]], 5.0, 0.0, 1.0)
    assert net.weights[0, 1] == 1.0


def test_from_positions_two_clusters_disconnected():
    pts = [[0, 0], [1, 1], [50, 50], [51, 50]]
    assert not is_strongly_connected(from_positions(pts, 5.0, 0.3, 0.003))


def test_clustered_layout_denser_block():
    net = random_clustered(100, 100.0, 25.0, 0.3, 0.003, seed=5, cluster_size=40, cluster_side=30.0)
    assert is_strongly_connected(net)
    pos = net.positions
    in_cluster = np.all(pos <= 30.0, axis=1)
    # brute-force neighbour count from the raw positions
    pairs = {}
    for i, j in itertools.combinations(range(100), 2):
        if np.hypot(*(pos[i] - pos[j])) <= 25.0:
            key = (bool(in_cluster[i]), bool(in_cluster[j]))
            pairs[key] = pairs.get(key, 0) + 1
    total_edges = sum(pairs.values())
    assert total_edges == int(np.count_nonzero(np.triu(net.weights, 1)))
    k = int(in_cluster.sum())
    cluster_density = pairs.get((True, True), 0) / (k * (k - 1) / 2)
    overall_density = total_edges / (100 * 99 / 2)
    assert cluster_density > 2 * overall_density


def test_neighbor_sum_examples():
    cross = Network([[0, 1], [1, 0]])
    assert neighbor_sum(cross, [0.2, 0.4]).tolist() == [0.4, 0.2]
    assert neighbor_sum(cross, [0, 0]).tolist() == [0, 0]
    w = Network([[0.3, 0.003], [0.003, 0.3]])
    assert neighbor_sum(w, [0.1, 0.1]) == pytest.approx([0.0303, 0.0303], abs=1e-15)


def test_neighbor_sum_dimension_mismatch():
    with pytest.raises(DimensionError):
        neighbor_sum(Network([[0, 1], [1, 0]]), [0.1, 0.2, 0.3])


def test_neighbor_sum_unit_vector_is_column():
    net = random_geometric(20, 100.0, 40.0, 0.3, 0.003, seed=1)
    for j in range(20):
        e = np.zeros(20)
        e[j] = 1.0
        assert np.array_equal(neighbor_sum(net, e), net.weights[:, j])


def test_json_round_trip_exact():
    rng = np.random.default_rng(0)
    net = Network(rng.random((6, 6)) / 3.0, rng.random((6, 2)) * 100)
    back = Network.from_json(net.to_json())
    assert back == net
    data = Network.from_dict({"n": 2, "weights": [[0, 1], [1, 0]]})
    assert data.positions is None


def test_json_n_mismatch():
    with pytest.raises(DimensionError):
        Network.from_dict({"n": 3, "weights": [[0, 1], [1, 0]]})
