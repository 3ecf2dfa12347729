import numpy as np
import pytest

from surplus_consensus import (
    WeightPolicy,
    closed_components,
    conserved_average,
    counterexample_reachable_only,
    counterexample_two_components,
    fig3_family,
    globally_reachable_nodes,
    in_neighbors,
    is_jointly_strongly_connected,
    is_strongly_connected,
    lyapunov,
    out_neighbors,
    periodic_ring_4,
    random_schedule,
    run,
    union_digraph,
    validate_weights,
)
from surplus_consensus.analysis import distances
from surplus_consensus.graph import complete_digraph, jointly_has_globally_reachable

QUARTER = WeightPolicy.uniform(0.25, 0.25, 0.25)


def test_ring_phases():
    sched = periodic_ring_4()
    assert sched.period == 4
    assert all(not is_strongly_connected(sched.graph(k)) for k in range(8))
    assert all(len(sched.graph(k).edges) == 1 for k in range(4))
    assert is_jointly_strongly_connected(sched, 3)
    assert union_digraph(sched, 0, 3).edges == {(1, 2), (2, 3), (3, 4), (4, 1)}
    assert all(validate_weights(QUARTER, g) == [] for g in sched.graphs)


def test_dense_family_edge_orientation_small():
    g = fig3_family(3, orientation="edge")
    assert len(g.edges) == 5
    assert (2, 3) not in g.edges
    assert in_neighbors(g, 3) == {1}


def test_dense_family_matrix_orientation_small():
    g = fig3_family(3)
    assert len(g.edges) == 5
    assert (3, 2) not in g.edges
    assert out_neighbors(g, 3) == {1}
    assert in_neighbors(g, 3) == {1, 2}


@pytest.mark.parametrize("orientation", ["matrix", "edge"])
def test_dense_family_properties(orientation):
    for n in range(3, 61):
        g = fig3_family(n, orientation)
        assert len(g.edges) == n * (n - 1) - (n - 2)
        assert is_strongly_connected(g)
        indeg, outdeg = len(in_neighbors(g, n)), len(out_neighbors(g, n))
        if orientation == "edge":
            assert (indeg, outdeg) == (1, n - 1)
        else:
            assert (indeg, outdeg) == (n - 1, 1)
        policy = WeightPolicy.uniform(1 / n, 1 / n, 1 / (2 * n))
        assert validate_weights(policy, g) == []


def test_dense_family_orientations_are_mirror_images():
    n = 7
    a, b = fig3_family(n, "matrix"), fig3_family(n, "edge")
    assert a.edges == {(i, j) for j, i in b.edges}


def test_dense_family_errors():
    with pytest.raises(ValueError):
        fig3_family(2)
    with pytest.raises(ValueError):
        fig3_family(5, orientation="sideways")


@pytest.mark.parametrize("n1,n2", [(1, 1), (2, 3), (4, 4), (1, 5)])
def test_two_components_counterexample(n1, n2):
    sched, st0 = counterexample_two_components(n1, n2)
    n = n1 + n2
    g = sched.graph(0)
    assert len(closed_components(g)) == 2
    assert not any(is_jointly_strongly_connected(sched, w) for w in range(4))
    traj = run(sched, QUARTER, st0, 100)
    assert (traj.x == st0.x).all() and (traj.s == 0.0).all()
    x_a = conserved_average(st0)
    expected = max(abs(2.0 * n2 / n), abs(-2.0 * n1 / n))
    assert distances(traj.x[-1], traj.s[-1], x_a, "linf") == pytest.approx(expected, abs=1e-12)


def test_two_components_equal_values_is_consensus():
    sched, st0 = counterexample_two_components(2, 2, a=0.5, b=0.5)
    assert lyapunov(st0) == 0.0


@pytest.mark.parametrize("n,r", [(2, 1), (3, 2), (5, 2), (6, 1), (6, 3)])
def test_reachable_only_counterexample(n, r):
    sched, st0 = counterexample_reachable_only(n, r)
    g = sched.graph(0)
    core = set(range(1, n - r + 1))
    assert globally_reachable_nodes(g) == core
    assert closed_components(g) == [core]
    assert jointly_has_globally_reachable(sched, 0)
    assert not is_jointly_strongly_connected(sched, 0)
    traj = run(sched, QUARTER, st0, 100)
    assert (traj.x[:, : n - r] == 1.0).all()
    x_a = conserved_average(st0)
    final = distances(traj.x[-1], traj.s[-1], x_a, "linf")
    assert final >= abs(1.0 - x_a) - 1e-12
    assert abs(1.0 - x_a) == pytest.approx(2.0 * r / n)


def test_reachable_only_low_core_still_stuck():
    # core below the rest: outside nodes drift down but the core never moves
    sched, st0 = counterexample_reachable_only(5, 2, a=-1.0, b=1.0)
    traj = run(sched, QUARTER, st0, 200)
    assert (traj.x[:, :3] == -1.0).all()
    assert traj.s.min() >= 0


def test_reachable_only_errors():
    for n, r in [(3, 0), (3, 3), (1, 1)]:
        with pytest.raises(ValueError):
            counterexample_reachable_only(n, r)


def test_random_schedule():
    assert all(random_schedule(4, 1.0, 1).graph(k) == complete_digraph(4) for k in range(5))
    a, b = random_schedule(5, 0.4, 11), random_schedule(5, 0.4, 11)
    assert [a.graph(k) for k in range(50)] == [b.graph(k) for k in range(50)]
    assert is_jointly_strongly_connected(a, 4, horizon=200)
    assert union_digraph(a, 0, 0) == a.graph(0)


def test_random_schedule_edge_density():
    sched = random_schedule(6, 0.3, 5)
    counts = np.array([len(sched.graph(k).edges) for k in range(400)])
    assert counts.mean() / 30 == pytest.approx(0.3, abs=0.02)
