import numpy as np
import pytest

from conftest import random_digraph, random_state, random_valid_weights
from surplus_consensus import (
    Digraph,
    NetworkState,
    WeightPolicy,
    WeightViolation,
    build_matrices,
    check_stochasticity,
    step,
    step_baseline,
    step_matrix,
)
from surplus_consensus.errors import DimensionError
from surplus_consensus.graph import complete_digraph
from surplus_consensus.matrix import write_matrix_csv
from surplus_consensus.protocol import neighbor_terms

QUARTER = WeightPolicy.uniform(0.25, 0.25, 0.25)
TWO = Digraph(2, {(2, 1)})


def test_two_node_matrices():
    m = build_matrices(TWO, QUARTER, [1, 1])
    np.testing.assert_allclose(np.eye(2) - m.L, [[0.75, 0.25], [0.0, 1.0]])
    np.testing.assert_allclose(m.S, [[1.0, 0.25], [0.0, 0.75]])
    np.testing.assert_allclose(m.E, np.diag([0.25, 0.25]))
    assert m.M.shape == (4, 4)
    np.testing.assert_array_equal(m.M[2:, :2], m.L)
    assert m.M[2:, :2].min() < 0


def test_empty_graph_matrices():
    m = build_matrices(Digraph(3), QUARTER, [1, 0, 1])
    e = np.diag([0.25] * 3)
    assert not m.L.any()
    np.testing.assert_array_equal(m.S, np.eye(3))
    np.testing.assert_array_equal(m.M, np.block([[np.eye(3), e], [np.zeros((3, 3)), np.eye(3) - e]]))
    rep = check_stochasticity(m)
    assert rep.row_sum_dev == rep.s_col_sum_dev == rep.m_col_sum_dev == 0.0


def test_switch_off_kills_adjacency():
    m = build_matrices(complete_digraph(4), WeightPolicy.uniform(0.2, 0.2, 0.2), [0, 0, 0, 0])
    assert not m.A.any() and not m.L.any()


def test_step_matrix_agrees_with_step_example():
    st0 = NetworkState([0.0, 1.0], [0.0, 0.4])
    rec = step(TWO, QUARTER, st0)
    out = step_matrix(build_matrices(TWO, QUARTER, rec.c), st0)
    np.testing.assert_allclose(np.concatenate([out.x, out.s]), [0.0, 1.1, 0.1, 0.2], atol=1e-15)


def test_step_matrix_fixed_point_and_conservation():
    m = build_matrices(complete_digraph(3), WeightPolicy.uniform(0.2, 0.2, 0.5), [1, 0, 1])
    out = step_matrix(m, NetworkState.consensus(2.5, 3))
    np.testing.assert_allclose(out.x, 2.5, atol=1e-15)
    np.testing.assert_allclose(out.s, 0.0, atol=1e-15)
    st0 = NetworkState([3.0, -1.0, 7.0], [0.5, 0.0, 1.0])
    out = step_matrix(m, st0)
    assert abs(out.x.sum() + out.s.sum() - 10.5) <= 1e-12 * 10.5


def test_corrupted_s_is_flagged():
    m = build_matrices(complete_digraph(3), WeightPolicy.uniform(0.2, 0.2, 0.3), [1, 1, 1])
    m.S = m.S.copy()
    m.S[0, 1] += 1e-3
    rep = check_stochasticity(m)
    assert rep.s_col_sum_dev == pytest.approx(1e-3, rel=1e-6)
    assert not rep.ok()


def test_build_matrices_errors():
    with pytest.raises(WeightViolation):
        build_matrices(TWO, WeightPolicy.uniform(0.25, 0.9, 0.25), [1, 1])
    with pytest.raises(DimensionError):
        build_matrices(TWO, QUARTER, [1, 1, 1])
    with pytest.raises(DimensionError):
        step_matrix(build_matrices(TWO, QUARTER, [1, 1]), NetworkState([1.0, 2.0, 3.0]))


def test_oracle_equivalence_random_instances():
    gen = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        n = int(gen.integers(2, 9))
        g = random_digraph(gen, n, gen.uniform(0.05, 1.0))
        policy = random_valid_weights(gen, g)
        st0 = random_state(gen, n)
        a, _, _ = policy.weights(g)
        c = neighbor_terms(a, st0.x) <= 0
        m = build_matrices(g, policy, c)
        rep = check_stochasticity(m)
        assert rep.ok(1e-12), rep
        rec = step(g, policy, st0)
        out = step_matrix(m, st0)
        worst = max(worst, np.abs(out.x - rec.x_next).max(), np.abs(out.s - rec.s_next).max())
    assert worst <= 1e-10


def test_baseline_matrix_matches_step_baseline():
    gen = np.random.default_rng(77)
    for _ in range(200):
        n = int(gen.integers(2, 9))
        g = random_digraph(gen, n, gen.uniform(0.1, 1.0))
        policy = random_valid_weights(gen, g)
        st0 = NetworkState(gen.uniform(-10, 10, n), gen.normal(0, 2, n))
        rec = step_baseline(g, policy, st0)
        out = step_matrix(build_matrices(g, policy, np.ones(n)), st0)
        np.testing.assert_allclose(out.x, rec.x_next, atol=1e-10, rtol=0)
        np.testing.assert_allclose(out.s, rec.s_next, atol=1e-10, rtol=0)
        tot = st0.x.sum() + st0.s.sum()
        assert abs(rec.x_next.sum() + rec.s_next.sum() - tot) < 1e-10


def test_write_matrix_csv(tmp_path):
    m = build_matrices(TWO, QUARTER, [1, 1])
    path = tmp_path / "m.csv"
    write_matrix_csv(path, m.M)
    rows = path.read_text().splitlines()
    assert len(rows) == 4 and all(len(r.split(",")) == 4 for r in rows)
    np.testing.assert_array_equal(np.loadtxt(path, delimiter=","), m.M)
