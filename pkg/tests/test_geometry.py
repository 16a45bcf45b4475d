from __future__ import annotations

import numpy as np
import pytest
from helpers import perturbed_flat, random_scalar, random_vector
from hypothesis import given, settings
from hypothesis import strategies as st

from quasieinstein import zoo
from quasieinstein.geometry.chart import ChartGrid
from quasieinstein.geometry.fields import ChartMismatch
from quasieinstein.geometry.grid import MetricField, curvature_package, spectral_partial
from quasieinstein.kernels import NotPositiveDefinite

TWO_PI = 2 * np.pi
seeds = st.integers(0, 2**32 - 1)


def flat(N=32, n=2):
    return zoo.flat_torus(n, N)


def torus(N=64):
    return zoo.torus_of_revolution(2.0, 1.0, N)


# --------------------------------------------------------------- chart grid


def test_chart_nodes_and_validation():
    c = ChartGrid((8, 16), (1.0, TWO_PI))
    assert c.size == 128
    np.testing.assert_allclose(c.axes[0], np.arange(8) / 8)
    for bad in [(7,), (6,)]:
        with pytest.raises(ValueError):
            ChartGrid(bad)


def test_spectral_partial_band_limited():
    M = flat(32)
    u1, _ = M.coords
    d = spectral_partial(M.scalar(np.sin(u1)), 0)
    assert np.max(np.abs(d.data - np.cos(u1))) <= 1e-12
    assert np.all(spectral_partial(M.constant(3.0), 1).data == 0.0)


def test_spectral_partial_exp_sin():
    M = flat(64)
    u1, _ = M.coords
    d = spectral_partial(M.scalar(np.exp(np.sin(u1))), 0)
    assert np.max(np.abs(d.data - np.cos(u1) * np.exp(np.sin(u1)))) <= 1e-9


def test_diff_matrix_matches_fft():
    c = ChartGrid((16,))
    f = np.exp(np.cos(c.coords[0]))
    np.testing.assert_allclose(c.diff_matrix(0) @ f, c.partial(f, 0), atol=1e-12)


# --------------------------------------------------------------- metric


def test_metric_validation():
    c = ChartGrid((8, 8))
    g = np.zeros((2, 2, 8, 8))
    g[0, 0] = 1.0
    g[1, 1] = np.where(c.coords[0] > 3, -1.0, 1.0)
    with pytest.raises(NotPositiveDefinite):
        MetricField(c, g)
    g[1, 1] = 1.0
    g[0, 1] = 0.1
    with pytest.raises(ValueError):
        MetricField(c, g)


def test_inverse_metric():
    M = perturbed_flat(np.random.default_rng(1), 32)
    prod = np.einsum("ik...,kj...->ij...", M.g, M.ginv)
    assert np.max(np.abs(prod - np.eye(2)[:, :, None, None])) <= 1e-12


def test_flat_torus_curvature_is_zero():
    pkg = curvature_package(flat(16, 3))
    assert np.all(pkg["christoffel"] == 0)
    assert np.all(pkg["ricci"].data == 0)
    assert np.all(pkg["scalar"].data == 0)


def test_torus_scalar_curvature():
    M = torus(64)
    _, u2 = M.coords
    exact = 2 * np.cos(u2) / (2 + np.cos(u2))
    assert M.linf(M.scalar_curvature() - M.scalar(exact)) <= 1e-8
    # at u2 = 0 the Gaussian curvature is 1/3
    assert abs(M.scalar_curvature().data[0, 0] - 2 / 3) <= 1e-8


def test_spectral_convergence():
    errs = []
    for N in (16, 32):
        M = torus(N)
        _, u2 = M.coords
        errs.append(M.linf(M.scalar_curvature() - M.scalar(2 * np.cos(u2) / (2 + np.cos(u2)))))
    assert errs[1] * 1e3 <= errs[0]


def test_ricci_symmetric():
    M = perturbed_flat(np.random.default_rng(2), 32)
    ric = M.ricci_raw
    assert np.max(np.abs(ric - np.swapaxes(ric, 0, 1))) <= 1e-12


# --------------------------------------------------------------- operators


def test_lie_derivative_examples():
    M = flat(32)
    u1, _ = M.coords
    assert M.linf(M.lie_derivative(M.vector([np.full(M.chart.shape, 1.5), 0.0]))) == 0.0
    L = M.lie_derivative(M.grad(M.scalar(np.sin(u1))))
    expected = np.zeros_like(L.data)
    expected[0, 0] = -2 * np.sin(u1)
    assert np.max(np.abs(L.data - expected)) <= 1e-10
    T = torus(32)
    assert T.linf(T.lie_derivative(T.vector([1.0, 0.0]))) <= 1e-10


def test_hessian_laplacian_examples():
    M = flat(32)
    u1, _ = M.coords
    f = M.scalar(np.sin(u1))
    assert M.linf(M.laplacian(f) + f) <= 1e-10
    c = M.constant(2.0)
    assert M.linf(M.hessian(c)) == 0.0
    assert M.linf(M.laplacian(c)) == 0.0


def test_divergence_examples():
    M = flat(32)
    u1, _ = M.coords
    assert M.linf(M.div(M.grad(M.scalar(np.sin(u1)))) + M.scalar(np.sin(u1))) <= 1e-10
    assert M.linf(M.div(M.vector([2.0, 0.0]))) == 0.0
    T = torus(32)
    assert T.linf(T.div(T.vector([1.0, 0.0]))) <= 1e-12


def test_div_sym_examples():
    T = torus(64)
    assert T.linf(T.div_sym(T.metric)) <= 1e-12
    bianchi = T.div_sym(T.ricci()) - 0.5 * T.gradient(T.scalar_curvature())
    assert T.linf(bianchi) <= 1e-8
    f = random_scalar(np.random.default_rng(3), T)
    assert T.linf(T.div_sym(T.metric * f) - T.gradient(f)) <= 1e-10


def test_integrals():
    M = flat(32)
    u1, _ = M.coords
    assert abs(M.integrate(M.constant(1.0)) - 4 * np.pi**2) <= 1e-12
    assert M.integrate(M.scalar(np.sin(u1))) == pytest.approx(0.0, abs=1e-15)
    T = torus(64)
    assert abs(T.volume - 8 * np.pi**2) <= 1e-10


def test_tensor_algebra():
    T = torus(32)
    X = random_vector(np.random.default_rng(4), T)
    assert T.linf(T.sharp(T.flat(X)) - X) <= 1e-12
    assert np.max(np.abs(T.tensor_norm2(T.metric).data - 2)) <= 1e-12
    M = flat(32)
    u1, _ = M.coords
    X = M.grad(M.scalar(np.sin(u1)))
    assert M.linf(M.tensor_norm2(M.lie_derivative(X)) - M.scalar(4 * np.sin(u1) ** 2)) <= 1e-10
    f = M.scalar(np.cos(u1))
    assert M.linf(M.directional(f, X) + M.scalar(np.sin(u1) * np.cos(u1))) <= 1e-12


def test_fields_do_not_mix_across_charts():
    a, b = flat(16), flat(16)
    with pytest.raises(ChartMismatch):
        a.constant(1.0) + b.constant(1.0)
    with pytest.raises(ChartMismatch):
        a.div(b.vector([0.0, 0.0]))


# --------------------------------------------------------------- properties


def _manifold(kind: str, rng):
    return torus(64) if kind == "torus" else perturbed_flat(rng, 64)


kinds = st.sampled_from(["torus", "perturbed"])


@given(seeds, kinds)
@settings(max_examples=10, deadline=None)
def test_discrete_stokes(seed, kind):
    rng = np.random.default_rng(seed)
    M = _manifold(kind, rng)
    X = random_vector(rng, M)
    assert abs(M.integrate(M.div(X))) <= 1e-10 * M.linf(X) * M.volume


@given(seeds, kinds)
@settings(max_examples=10, deadline=None)
def test_lie_of_gradient_is_twice_hessian(seed, kind):
    rng = np.random.default_rng(seed)
    M = _manifold(kind, rng)
    f = random_scalar(rng, M)
    assert M.linf(M.lie_derivative(M.grad(f)) - 2.0 * M.hessian(f)) <= 1e-9


@given(seeds, kinds)
@settings(max_examples=10, deadline=None)
def test_laplacian_is_trace_of_hessian(seed, kind):
    rng = np.random.default_rng(seed)
    M = _manifold(kind, rng)
    f = random_scalar(rng, M)
    assert M.linf(M.laplacian(f) - M.trace(M.hessian(f))) <= 1e-10


@given(seeds, kinds)
@settings(max_examples=10, deadline=None)
def test_divergence_product_rule(seed, kind):
    rng = np.random.default_rng(seed)
    M = _manifold(kind, rng)
    X = random_vector(rng, M)
    d = M.div(X)
    lhs = M.div(X * d)
    rhs = d * d + M.directional(d, X)
    assert M.linf(lhs - rhs) <= 1e-8


@given(seeds)
@settings(max_examples=5, deadline=None)
def test_contracted_bianchi_random_metrics(seed):
    M = perturbed_flat(np.random.default_rng(seed), 64)
    res = M.div_sym(M.ricci()) - 0.5 * M.gradient(M.scalar_curvature())
    assert M.linf(res) <= 1e-7
