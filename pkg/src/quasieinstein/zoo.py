"""Named test manifolds and exact quasi-Einstein triples."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from quasieinstein import expr
from quasieinstein.analysis.qe import QEData
from quasieinstein.geometry import analytic
from quasieinstein.geometry.chart import ChartGrid
from quasieinstein.geometry.grid import MetricField

DEFAULT_N = 64


@dataclass(frozen=True)
class GeneratorSpec:
    """A generator name, its real parameters and the grid resolution.

    ``expressions`` carries the metric components of ``custom_chart`` keyed
    by ``"g11"``, ``"g12"``, ...
    """

    name: str
    params: dict[str, float] = field(default_factory=dict)
    resolution: int = DEFAULT_N
    expressions: dict[str, str] = field(default_factory=dict)


@dataclass
class Construction:
    manifold: object
    qe: QEData | None = None
    fields: dict = field(default_factory=dict)


def flat_torus(n: int = 2, N: int = DEFAULT_N, periods=None) -> MetricField:
    return MetricField.euclidean(ChartGrid((N,) * n, periods))


def torus_of_revolution(R0: float = 2.0, r: float = 1.0, N: int = DEFAULT_N) -> MetricField:
    """``(R0 + r cos u2)^2 du1^2 + r^2 du2^2``."""
    if not 0 < r < R0:
        raise ValueError(f"torus of revolution needs 0 < r < R0, got r={r}, R0={R0}")
    chart = ChartGrid((N, N))
    _, u2 = chart.coords
    g = np.zeros((2, 2, N, N))
    g[0, 0] = (R0 + r * np.cos(u2)) ** 2
    g[1, 1] = r * r
    return MetricField(chart, g, name=f"torus_of_revolution(R0={R0:g}, r={r:g})")


def circle_qe(c: float, m: float, N: int = DEFAULT_N) -> Construction:
    """Unit-speed circle of length ``2 pi`` with ``X = c d/dtheta``, ``lam = -c^2/m``."""
    if m == 0:
        raise ValueError("m must be nonzero")
    M = MetricField.euclidean(ChartGrid((N,)))
    M.name = "circle"
    X = M.vector([np.full(N, float(c))])
    return Construction(M, QEData(m, -c * c / m, X))


def s1_cross_einstein(rho: float, m: float, circle_length: float = 2 * np.pi, **quad) -> Construction:
    """``S^1 x S^2(1/sqrt(rho))`` with ``X = c d/dt``, ``c^2 = -m rho``, ``lam = rho``."""
    if m == 0:
        raise ValueError("m must be nonzero")
    if m * rho > 0:
        raise ValueError(f"need m*rho <= 0 for a real field, got m={m}, rho={rho}")
    if rho <= 0:
        raise ValueError("only rho > 0 (round sphere factor) is available in closed form")
    M = analytic.circle_cross_sphere(1.0 / np.sqrt(rho), circle_length, **quad)
    c = np.sqrt(-m * rho)
    X = M.parallel_vector([c, 0.0, 0.0])
    return Construction(M, QEData(m, rho, X), {"c": c})


def round_sphere(radius: float = 1.0, m: float = 1.0, **quad) -> Construction:
    """Round sphere with the trivial solution ``X = 0``, ``lam = 1/radius^2``."""
    M = analytic.round_sphere(radius, **quad)
    qe = QEData(m, 1.0 / radius**2, M.zero_vector())
    return Construction(M, qe, {"cos_theta": analytic.sphere_harmonic_l1(M, radius)})


def custom_chart(expressions: dict[str, str], params: dict[str, float] | None = None,
                 n: int | None = None, N: int = DEFAULT_N, periods=None) -> MetricField:
    """Metric from component expressions in ``u1 .. un`` and parameters.

    Missing off-diagonal components are zero; ``gji`` may be given instead
    of ``gij``.
    """
    comps = {}
    for key, text in expressions.items():
        if len(key) != 3 or key[0] != "g" or not key[1:].isdigit():
            raise ValueError(f"metric component keys look like g11, g12: got {key!r}")
        i, j = int(key[1]) - 1, int(key[2]) - 1
        comps[(min(i, j), max(i, j))] = text
    if n is None:
        n = max(max(k) for k in comps) + 1
    for i in range(n):
        if (i, i) not in comps:
            raise ValueError(f"missing diagonal component g{i + 1}{i + 1}")
    chart = ChartGrid((N,) * n, periods)
    env = dict(params or {})
    env.update({f"u{k + 1}": chart.coords[k] for k in range(n)})
    g = np.zeros((n, n) + chart.shape)
    for (i, j), text in comps.items():
        if j >= n:
            raise ValueError(f"component g{i + 1}{j + 1} exceeds dimension {n}")
        val = np.broadcast_to(expr.evaluate(expr.parse(text), env), chart.shape)
        g[i, j] = val
        g[j, i] = val
    return MetricField(chart, g, name="custom_chart")


GENERATORS = ("flat_torus", "torus_of_revolution", "round_sphere", "circle_qe", "s1_cross_einstein", "custom_chart")


def construct(spec: GeneratorSpec) -> Construction:
    """Build the manifold (and exact triple, if any) named by ``spec``."""
    p = dict(spec.params)
    N = spec.resolution
    name = spec.name

    def take(key, default=None):
        if key in p:
            return float(p.pop(key))
        if default is None:
            raise ValueError(f"{name} needs parameter {key!r}")
        return default

    if name == "flat_torus":
        n = int(take("n", 2.0))
        periods = [take(f"L{i + 1}", 2 * np.pi) for i in range(n)]
        out = Construction(flat_torus(n, N, periods))
    elif name == "torus_of_revolution":
        out = Construction(torus_of_revolution(take("R0"), take("r"), N))
    elif name == "round_sphere":
        out = round_sphere(take("radius", 1.0), take("m", 1.0))
    elif name == "circle_qe":
        out = circle_qe(take("c"), take("m"), N)
    elif name == "s1_cross_einstein":
        out = s1_cross_einstein(take("rho"), take("m"), take("length", 2 * np.pi))
    elif name == "custom_chart":
        n = int(p.pop("n")) if "n" in p else None
        periods = None
        if n is not None:
            periods = [take(f"L{i + 1}", 2 * np.pi) for i in range(n)]
        out = Construction(custom_chart(spec.expressions, p, n, N, periods))
        p = {}
    else:
        raise ValueError(f"unknown generator {name!r}; known: {', '.join(GENERATORS)}")
    if p:
        raise ValueError(f"unknown parameters for {name}: {', '.join(sorted(p))}")
    return out
