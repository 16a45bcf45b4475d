from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasieinstein import algebra
from quasieinstein.algebra import LieAlgebraModel


def milnor_ricci(q) -> np.ndarray:
    """Ricci of su(2) with ``Q = diag(q)`` from Milnor's frame formulas."""
    q = np.asarray(q, dtype=float)
    lam = np.array([np.sqrt(q[i] / (q[(i + 1) % 3] * q[(i + 2) % 3])) for i in range(3)])
    mu = 0.5 * lam.sum() - lam
    ric = [2 * mu[(i + 1) % 3] * mu[(i + 2) % 3] * q[i] for i in range(3)]
    return np.diag(ric)


def test_su2_bi_invariant():
    L = LieAlgebraModel.su2()
    curv = algebra.algebra_curvature(L)
    assert np.max(np.abs(curv.ricci - 0.5 * np.eye(3))) <= 1e-10
    assert curv.scalar == pytest.approx(1.5)


def test_ricci_is_scale_invariant():
    a = algebra.algebra_curvature(LieAlgebraModel.su2(3.0 * np.eye(3))).ricci
    np.testing.assert_allclose(a, 0.5 * np.eye(3), atol=1e-14)


@given(st.tuples(*[st.floats(0.1, 10)] * 3))
@settings(max_examples=50, deadline=None)
def test_milnor_oracle(q):
    curv = algebra.algebra_curvature(LieAlgebraModel.su2(np.diag(q)))
    assert np.max(np.abs(curv.ricci - milnor_ricci(q))) <= 1e-10 * max(1.0, *q) ** 3


def _random_orthogonal(rng, d):
    Qm, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Qm * np.sign(np.diag(R))


def _change_basis(L: LieAlgebraModel, P: np.ndarray) -> LieAlgebraModel:
    Pinv = np.linalg.inv(P)
    c = np.einsum("ck,kij,ia,jb->cab", Pinv, L.c, P, P)
    return LieAlgebraModel(c, P.T @ L.Q @ P)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_change_of_basis_invariance(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((3, 3))
    L = LieAlgebraModel.su2(A @ A.T + np.eye(3))
    P = _random_orthogonal(rng, 3)
    L2 = _change_basis(L, P)
    c1, c2 = algebra.algebra_curvature(L), algebra.algebra_curvature(L2)
    assert abs(c1.scalar - c2.scalar) <= 1e-10 * max(1.0, abs(c1.scalar))
    np.testing.assert_allclose(c2.ricci, P.T @ c1.ricci @ P, atol=1e-10)


def test_abelian_is_flat_and_has_only_trivial_solution():
    L = LieAlgebraModel.abelian(3)
    assert np.all(algebra.algebra_curvature(L).ricci == 0)
    sols = algebra.qe_solve(L, 2.0)
    assert [(s.X, s.lam) for s in sols] == [((0.0, 0.0, 0.0), 0.0)]


def test_validation():
    with pytest.raises(algebra.AlgebraError, match="positive definite"):
        LieAlgebraModel.su2(np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(algebra.AlgebraError, match="antisymmetric"):
        LieAlgebraModel(np.ones((2, 2, 2)), np.eye(2))
    c = np.zeros((3, 3, 3))
    # [e1, e2] = e3, [e1, e3] = e1 violates Jacobi
    for (i, j, k) in [(0, 1, 2), (0, 2, 0)]:
        c[k, i, j], c[k, j, i] = 1.0, -1.0
    with pytest.raises(algebra.AlgebraError, match="Jacobi"):
        LieAlgebraModel(c, np.eye(3))


def test_algebraic_residual_and_lie_derivative():
    L = LieAlgebraModel.su2()
    E = algebra.algebraic_qe_residual(L, np.zeros(3), 1.0, 0.5)
    assert np.max(np.abs(E)) <= 1e-15
    # every left-invariant field on a bi-invariant metric is Killing
    X = np.array([0.3, -1.0, 2.0])
    assert algebra.q_norm(L, algebra.lie_derivative_metric(L, X)) <= 1e-14
    with pytest.raises(ValueError):
        algebra.algebraic_qe_residual(L, X, 0.0, 1.0)


@pytest.mark.parametrize("a, m", [(2.0, 2.0), (0.5, -2.0), (3.0, 4.0)])
def test_berger_solutions_match_closed_form(a, m):
    L = LieAlgebraModel.su2(np.diag([a, 1.0, 1.0]))
    sols = algebra.qe_solve(L, m)
    x = np.sqrt(m * (a - 1) / a)  # |X|^2 = a x^2 = m (a - 1)
    found = sorted(s.X[0] for s in sols)
    np.testing.assert_allclose(found, [-x, x], atol=1e-9)
    for s in sols:
        assert s.lam == pytest.approx(1 - a / 2, abs=1e-10)
        assert s.residual <= 1e-10 and s.killing


def test_berger_no_solution_with_wrong_sign():
    L = LieAlgebraModel.su2(np.diag([2.0, 1.0, 1.0]))
    assert algebra.qe_solve(L, -2.0) == []


def test_qe_solve_is_deterministic():
    L = LieAlgebraModel.su2(np.diag([1.7, 1.0, 1.0]))
    assert algebra.qe_solve(L, 2.0) == algebra.qe_solve(L, 2.0)
