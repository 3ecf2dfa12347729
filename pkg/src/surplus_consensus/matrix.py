"""Block-matrix form of one round, used as an oracle for :mod:`protocol`.

With switching decisions ``c`` fixed, a round is the linear map
``[x'; s'] = M [x; s]`` where::

    A = [c_i a_ij]        L = D - A,  D = diag(row sums of A)
    B = [b_ih]^T          S = (I - D~) + B,  D~ = diag(row sums of [b_ih])
    E = diag(eps_i)       M = [[I - L, E], [L, S - E]]

``I - L`` is row stochastic, ``S`` column stochastic and every column of
``M`` sums to one, which is why ``sum(x + s)`` never changes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, WeightViolation
from .graph import Digraph
from .protocol import NetworkState, WeightPolicy, check_weights


@dataclass
class UpdateMatrices:
    A: np.ndarray
    L: np.ndarray
    B: np.ndarray
    S: np.ndarray
    E: np.ndarray
    M: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass
class StochasticityReport:
    row_sum_dev: float  # max |row sum of I - L - 1|
    s_col_sum_dev: float  # max |column sum of S - 1|
    m_col_sum_dev: float  # max |column sum of M - 1|
    min_entry_i_minus_l: float
    min_entry_s: float

    @property
    def negative_entries(self) -> bool:
        return self.min_entry_i_minus_l < 0.0 or self.min_entry_s < 0.0

    def ok(self, tol: float = 1e-12) -> bool:
        return (max(self.row_sum_dev, self.s_col_sum_dev, self.m_col_sum_dev) < tol
                and not self.negative_entries)


def assemble(a, b, eps, c) -> UpdateMatrices:
    """Matrices from raw weight arrays and a 0/1 switching vector."""
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    n = a.shape[0]
    eye = np.eye(n)
    A = c[:, None] * a
    L = np.diag(A.sum(axis=1)) - A
    B = np.asarray(b, dtype=float).T
    S = (eye - np.diag(B.sum(axis=0))) + B
    E = np.diag(np.asarray(eps, dtype=float))
    M = np.block([[eye - L, E], [L, S - E]])
    return UpdateMatrices(A, L, B, S, E, M)


def build_matrices(g: Digraph, policy: WeightPolicy, c, k: int = 0) -> UpdateMatrices:
    c = np.asarray(c)
    if c.shape != (g.n,):
        raise DimensionError(f"switching vector of shape {c.shape} for n={g.n}")
    a, b, eps = policy.weights(g, k)
    report = check_weights(g, a, b, eps)
    if report:
        raise WeightViolation(report, k)
    return assemble(a, b, eps, c)


def step_matrix(m: UpdateMatrices, st: NetworkState) -> NetworkState:
    if st.n != m.n:
        raise DimensionError(f"state has n={st.n}, matrices have n={m.n}")
    z = m.M @ np.concatenate([st.x, st.s])
    return NetworkState(z[: m.n], z[m.n:])


def check_stochasticity(m: UpdateMatrices) -> StochasticityReport:
    n = m.n
    i_minus_l = np.eye(n) - m.L
    return StochasticityReport(
        row_sum_dev=float(np.max(np.abs(i_minus_l.sum(axis=1) - 1.0), initial=0.0)),
        s_col_sum_dev=float(np.max(np.abs(m.S.sum(axis=0) - 1.0), initial=0.0)),
        m_col_sum_dev=float(np.max(np.abs(m.M.sum(axis=0) - 1.0), initial=0.0)),
        min_entry_i_minus_l=float(i_minus_l.min()),
        min_entry_s=float(m.S.min()),
    )


def write_matrix_csv(path, mat):
    """Dump a matrix row-major, one CSV line per row, shortest round-trip floats."""
    with open(path, "w", newline="") as fh:
        for row in np.asarray(mat):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
