from __future__ import annotations

import numpy as np
import pytest

from quasieinstein.geometry import analytic


@pytest.mark.parametrize("radius", [1.0, 0.5, 2.0])
def test_round_sphere_closed_forms(radius):
    M = analytic.round_sphere(radius)
    assert abs(M.volume - 4 * np.pi * radius**2) <= 1e-10 * max(1, radius**2)
    assert M.linf(M.ricci() - M.metric * (1 / radius**2)) <= 1e-12
    assert M.linf(M.scalar_curvature() - M.constant(2 / radius**2)) <= 1e-12
    assert M.linf(M.trace(M.ricci()) - M.scalar_curvature()) <= 1e-12


def test_first_harmonic_eigenvalue():
    M = analytic.round_sphere(1.0)
    f = analytic.sphere_harmonic_l1(M, 1.0)
    assert M.linf(M.laplacian(f) + 2.0 * f) <= 1e-12
    # int cos^2 = 4 pi / 3 on the unit sphere
    assert abs(M.integrate(f * f) - 4 * np.pi / 3) <= 1e-12
    # grad cos(theta) is a conformal field: L g = 2 Hess f = -2 f g
    assert M.linf(M.lie_derivative(M.grad(f)) + M.metric * f * 2.0) <= 1e-12


def test_circle_cross_sphere():
    M = analytic.circle_cross_sphere(1.0, 2 * np.pi)
    assert abs(M.volume - 8 * np.pi**2) <= 1e-10
    assert M.linf(M.scalar_curvature() - M.constant(2.0)) <= 1e-12
    X = M.parallel_vector([1.0, 0.0, 0.0])
    assert M.linf(M.lie_derivative(X)) == 0.0
    assert M.linf(M.div(X)) == 0.0
    assert M.periods(M.flat(X)) == pytest.approx([2 * np.pi], abs=1e-12)


def test_parallel_vector_rejects_sphere_directions():
    M = analytic.circle_cross_sphere(1.0, 2 * np.pi)
    with pytest.raises(ValueError):
        M.parallel_vector([0.0, 1.0, 0.0])


def test_contracted_bianchi_on_product():
    M = analytic.circle_cross_sphere(2.0, 3.0)
    res = M.div_sym(M.ricci()) - 0.5 * M.gradient(M.scalar_curvature())
    assert M.linf(res) == 0.0
