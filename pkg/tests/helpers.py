"""Random smooth data on periodic charts."""
from __future__ import annotations

import itertools

import numpy as np

from quasieinstein.geometry.chart import ChartGrid
from quasieinstein.geometry.grid import MetricField


def trig_poly(rng: np.random.Generator, chart: ChartGrid, degree: int = 2, amplitude: float = 1.0) -> np.ndarray:
    """Random real trigonometric polynomial of the given degree per axis."""
    out = np.zeros(chart.shape)
    scaled = [2 * np.pi * u / L for u, L in zip(chart.coords, chart.periods)]
    for k in itertools.product(range(-degree, degree + 1), repeat=chart.n):
        phase = sum(ki * u for ki, u in zip(k, scaled))
        a, b = rng.standard_normal(2) / (1 + sum(map(abs, k)))
        out += a * np.cos(phase) + b * np.sin(phase)
    return amplitude * out


def perturbed_flat(rng: np.random.Generator, N: int = 64, n: int = 2, eps: float = 0.15) -> MetricField:
    """``delta + eps h`` with ``h`` a random symmetric trig polynomial, kept definite."""
    chart = ChartGrid((N,) * n)
    g = np.zeros((n, n) + chart.shape)
    for i in range(n):
        for j in range(i, n):
            h = trig_poly(rng, chart, 2)
            h /= np.max(np.abs(h))
            g[i, j] = g[j, i] = eps * h / n
        g[i, i] += 1.0
    return MetricField(chart, g, name="perturbed_flat")


def random_vector(rng, M, degree: int = 2):
    return M.vector([trig_poly(rng, M.chart, degree) for _ in range(M.n)])


def random_scalar(rng, M, degree: int = 2):
    return M.scalar(trig_poly(rng, M.chart, degree))
