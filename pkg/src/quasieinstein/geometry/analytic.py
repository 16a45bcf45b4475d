"""Closed-form manifolds evaluated at quadrature nodes.

Round spheres and their products with a circle never touch a spectral chart:
metric, Christoffel symbols and curvature are closed forms, and fields carry
closed-form covariant jets (see :mod:`.jets`). Nothing is differentiated
numerically, so the poles never enter.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np

from quasieinstein.geometry.fields import (
    ChartMismatch,
    Field,
    OneFormField,
    ScalarField,
    SymTensorField,
    TensorField,
    VectorField,
)
from quasieinstein.geometry.jets import (
    Contract,
    Derivative,
    JetContext,
    Permute,
    Product,
    Source,
)


class AnalyticManifold:
    """A manifold given by closed forms at a fixed quadrature rule.

    Parameters
    ----------
    name : str
        Label used in reports.
    coords : dict[str, ndarray]
        Coordinate values at the nodes (flattened).
    g, christoffel, ricci : ndarray
        Closed-form ``g_ij``, ``Gam^k_ij`` and ``Ric_ij`` at the nodes.
    weights : ndarray
        Quadrature weights including the volume density.
    volume : float
        Exact total volume; the quadrature must reproduce it to 1e-10.
    ricci_parallel : bool
        Whether ``nabla Ric = 0`` (true for Einstein manifolds and products
        of them).
    loops : sequence of (int, float)
        Coordinate index and length of each circle factor, spanning the
        first homology together.
    """

    kind = "analytic"

    def __init__(self, name, coords, g, christoffel, ricci, weights, volume, *, ricci_parallel, loops=()):
        self.name = name
        self.coords = coords
        self.g = np.asarray(g, dtype=float)
        self.n = self.g.shape[0]
        stack = np.moveaxis(self.g, -1, 0)
        np.linalg.cholesky(stack)  # raises if not positive definite
        self.ginv = np.moveaxis(np.linalg.inv(stack), 0, -1)
        self.christoffel = np.asarray(christoffel, dtype=float)
        self.ricci_values = np.asarray(ricci, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.exact_volume = float(volume)
        self.ricci_parallel = ricci_parallel
        self.loops = tuple(loops)
        self.ctx = JetContext(self.ginv)
        if abs(self.weights.sum() - self.exact_volume) > 1e-10 * max(1.0, self.exact_volume):
            raise ValueError("quadrature does not reproduce the total volume")

    def __repr__(self):
        return f"AnalyticManifold({self.name}, nodes={self.node_count})"

    @property
    def node_count(self) -> int:
        return self.g.shape[-1]

    @property
    def volume(self) -> float:
        return float(self.weights.sum())

    def _own(self, *fields: Field):
        for f in fields:
            if f.manifold is not self:
                raise ChartMismatch("field does not belong to this manifold")

    # ------------------------------------------------------------ fields
    def constant(self, c: float) -> ScalarField:
        return ScalarField(self, Source.parallel(self.ctx, np.full(self.node_count, float(c)), 0, "constant"))

    def scalar(self, values) -> ScalarField:
        """A sampled scalar without derivative information."""
        v = np.broadcast_to(np.asarray(values, dtype=float), (self.node_count,)).copy()
        return ScalarField(self, Source.values_only(self.ctx, v, 0))

    def scalar_jet(self, derivs, zero_from=None, label="scalar") -> ScalarField:
        return ScalarField(self, Source(self.ctx, 0, derivs, zero_from, label))

    def parallel_vector(self, components, label="X") -> VectorField:
        """A vector field with parallel (covariantly constant) components.

        ``components`` are contravariant coordinate components; parallelism is
        verified against the closed-form Christoffel symbols.
        """
        X = np.array([np.broadcast_to(np.asarray(c, dtype=float), (self.node_count,)) for c in components])
        # with constant coordinate components, nabla_i X^j = Gam^j_ik X^k
        if np.any(np.ptp(X, axis=1) > 1e-14):
            raise ValueError("parallel_vector expects coordinate-constant components")
        defect = np.einsum("jik...,k...->ij...", self.christoffel, X)
        if np.max(np.abs(defect)) > 1e-12:
            raise ValueError(f"vector field {label!r} is not parallel")
        low = np.einsum("ij...,j...->i...", self.g, X)
        return VectorField(self, Source.parallel(self.ctx, low, 1, label))

    def zero_vector(self) -> VectorField:
        return VectorField(self, Source.parallel(self.ctx, np.zeros((self.n, self.node_count)), 1, "zero"))

    @cached_property
    def metric(self) -> SymTensorField:
        return SymTensorField(self, Source.parallel(self.ctx, self.g, 2, "g"))

    def ricci(self) -> SymTensorField:
        zero_from = 1 if self.ricci_parallel else None
        ric = self.ricci_values
        return SymTensorField(self, Source(self.ctx, 2, lambda k: ric if k == 0 else None, zero_from, "Ric"))

    def scalar_curvature(self) -> ScalarField:
        R = np.einsum("ij...,ij...->...", self.ginv, self.ricci_values)
        zero_from = 1 if self.ricci_parallel else None
        return ScalarField(self, Source(self.ctx, 0, lambda k: R if k == 0 else None, zero_from, "R"))

    # ------------------------------------------------------ tensor algebra
    def flat(self, X: VectorField) -> OneFormField:
        self._own(X)
        return OneFormField(self, X.data)

    def sharp(self, w: OneFormField) -> VectorField:
        self._own(w)
        return VectorField(self, w.data)

    def vector_components(self, X: VectorField) -> np.ndarray:
        return np.einsum("ij...,j...->i...", self.ginv, X.data.value)

    def inner(self, A: Field, B: Field) -> ScalarField:
        self._own(A, B)
        if isinstance(A, ScalarField):
            return ScalarField(self, A.data * B.data)
        r = A.rank
        return ScalarField(self, Contract(Product(A.data, B.data), [(i, r + i) for i in range(r)]))

    def tensor_norm2(self, T: Field) -> ScalarField:
        return self.inner(T, T)

    def pointwise_norm(self, T: Field) -> np.ndarray:
        if isinstance(T, ScalarField):
            return np.abs(T.values())
        v = T.values()
        r = T.rank
        L = "abcdefgh"
        spec = ",".join(f"{L[i]}{L[r + i]}..." for i in range(r)) + f",{L[:r]}...,{L[r:2 * r]}...->..."
        return np.sqrt(np.maximum(np.einsum(spec, *([self.ginv] * r), v, v), 0.0))

    def square(self, w: OneFormField) -> SymTensorField:
        self._own(w)
        return SymTensorField(self, Product(w.data, w.data))

    def sym_product(self, a: OneFormField, b: OneFormField) -> SymTensorField:
        self._own(a, b)
        t = Product(a.data, b.data)
        return SymTensorField(self, t + Permute(t, (1, 0)))

    def contract(self, T: Field, X: VectorField) -> OneFormField:
        self._own(T, X)
        return OneFormField(self, Contract(Product(T.data, X.data), [(0, 2)]))

    def outer(self, A: Field, B: Field) -> TensorField:
        self._own(A, B)
        return TensorField(self, Product(A.data, B.data), A.rank + B.rank)

    def permute(self, T: Field, perm) -> TensorField:
        self._own(T)
        return TensorField(self, Permute(T.data, perm), T.rank)

    def pair(self, w: OneFormField, X: VectorField) -> ScalarField:
        self._own(w, X)
        return ScalarField(self, Contract(Product(w.data, X.data), [(0, 1)]))

    def trace(self, T: Field) -> ScalarField:
        self._own(T)
        return ScalarField(self, Contract(T.data, [(0, 1)]))

    # ------------------------------------------------------ differential ops
    def gradient(self, f: ScalarField) -> OneFormField:
        self._own(f)
        return OneFormField(self, Derivative(f.data))

    def grad(self, f: ScalarField) -> VectorField:
        return self.sharp(self.gradient(f))

    def directional(self, f: ScalarField, X: VectorField) -> ScalarField:
        return self.pair(self.gradient(f), X)

    def covariant_derivative(self, F: Field) -> TensorField:
        self._own(F)
        r = F.rank
        d = Derivative(F.data)
        if r == 0:
            return TensorField(self, d, 1)
        return TensorField(self, Permute(d, (r,) + tuple(range(r))), r + 1)

    def covariant_along(self, X: VectorField, Y: VectorField) -> OneFormField:
        nab = self.covariant_derivative(X).data  # [i, j] = nabla_i X_j
        return OneFormField(self, Contract(Product(nab, Y.data), [(0, 2)]))

    def lie_derivative(self, X: VectorField) -> SymTensorField:
        self._own(X)
        d = Derivative(X.data)
        return SymTensorField(self, d + Permute(d, (1, 0)))

    def hessian(self, f: ScalarField) -> SymTensorField:
        self._own(f)
        return SymTensorField(self, Derivative(Derivative(f.data)))

    def laplacian(self, f: ScalarField) -> ScalarField:
        return self.trace(self.hessian(f))

    def div(self, X: VectorField) -> ScalarField:
        self._own(X)
        return ScalarField(self, Contract(Derivative(X.data), [(0, 1)]))

    def div_sym(self, T: SymTensorField) -> OneFormField:
        self._own(T)
        return OneFormField(self, Contract(Derivative(T.data), [(0, 2)]))

    def periods(self, w: OneFormField) -> list[float]:
        """Integrals of a closed one-form around the circle factors."""
        self._own(w)
        comps = w.values()
        return [L * self.integrate(comps[i]) / self.volume for i, L in self.loops]

    # ------------------------------------------------------------ reductions
    def integrate(self, f) -> float:
        if isinstance(f, ScalarField):
            self._own(f)
            f = f.values()
        f = np.broadcast_to(np.asarray(f, dtype=float), (self.node_count,))
        return float(np.sum(f * self.weights))

    def linf(self, T: Field) -> float:
        return float(np.max(self.pointwise_norm(T)))

    def l2(self, T: Field) -> float:
        return float(np.sqrt(max(self.integrate(self.pointwise_norm(T) ** 2), 0.0)))

    def sd(self, f: ScalarField) -> float:
        return float(np.std(f.values()))

    def mean(self, f: ScalarField) -> float:
        return float(np.mean(f.values()))


# ----------------------------------------------------------------------------
# concrete manifolds

def _sphere_nodes(n_theta: int, n_phi: int):
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = np.arange(n_phi) * (2 * np.pi / n_phi)
    T, F = np.meshgrid(theta, phi, indexing="ij")
    W = np.broadcast_to(w[:, None] * (2 * np.pi / n_phi), T.shape)
    return T.ravel(), F.ravel(), W.ravel()


def round_sphere(radius: float = 1.0, n_theta: int = 16, n_phi: int = 32) -> AnalyticManifold:
    """Round 2-sphere in (colatitude, longitude); ``Ric = g / radius^2``."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    a2 = radius * radius
    th, ph, w = _sphere_nodes(n_theta, n_phi)
    P = th.size
    s, c = np.sin(th), np.cos(th)
    g = np.zeros((2, 2, P))
    g[0, 0] = a2
    g[1, 1] = a2 * s * s
    gam = np.zeros((2, 2, 2, P))
    gam[0, 1, 1] = -s * c
    gam[1, 0, 1] = gam[1, 1, 0] = c / s
    M = AnalyticManifold(
        f"round_sphere(radius={radius:g})",
        {"theta": th, "phi": ph},
        g,
        gam,
        g / a2,
        a2 * w,
        4 * np.pi * a2,
        ricci_parallel=True,
    )
    return M


def sphere_harmonic_l1(M: AnalyticManifold, radius: float) -> ScalarField:
    """``cos(colatitude)`` with its full closed-form jet.

    Degree-one harmonics satisfy ``Hess f = -(f / radius^2) g``, which fixes
    every higher derivative recursively.
    """
    th = M.coords["theta"]
    f0 = np.cos(th)
    df = np.stack([-np.sin(th), np.zeros_like(th)])
    kappa = 1.0 / (radius * radius)
    cache = {0: f0, 1: df}

    def derivs(k):
        if k not in cache:
            lower = derivs(k - 2)
            # (nabla^k f)_{d1 d2 ...} = -kappa g_{d1 d2} (nabla^{k-2} f)_{d3 ...}
            g = M.g[(slice(None), slice(None)) + (None,) * (k - 2)]
            cache[k] = -kappa * g * lower[None, None]
        return cache[k]

    return M.scalar_jet(derivs, label="cos(theta)")


def circle_cross_sphere(
    radius: float = 1.0,
    circle_length: float = 2 * np.pi,
    n_t: int = 16,
    n_theta: int = 12,
    n_phi: int = 24,
) -> AnalyticManifold:
    """Product ``S^1 x S^2`` with metric ``dt^2 + radius^2 g_{S^2}``."""
    if radius <= 0 or circle_length <= 0:
        raise ValueError("radius and circle length must be positive")
    a2 = radius * radius
    th, ph, w = _sphere_nodes(n_theta, n_phi)
    t = np.arange(n_t) * (circle_length / n_t)
    Tt, Th = np.meshgrid(t, th, indexing="ij")
    _, Ph = np.meshgrid(t, ph, indexing="ij")
    W = (circle_length / n_t) * np.broadcast_to(w, Tt.shape) * a2
    Tt, Th, Ph, W = Tt.ravel(), Th.ravel(), Ph.ravel(), W.ravel()
    P = Tt.size
    s, c = np.sin(Th), np.cos(Th)
    g = np.zeros((3, 3, P))
    g[0, 0] = 1.0
    g[1, 1] = a2
    g[2, 2] = a2 * s * s
    gam = np.zeros((3, 3, 3, P))
    gam[1, 2, 2] = -s * c
    gam[2, 1, 2] = gam[2, 2, 1] = c / s
    ric = np.zeros((3, 3, P))
    ric[1, 1] = 1.0
    ric[2, 2] = s * s
    return AnalyticManifold(
        f"S1xS2(radius={radius:g}, length={circle_length:g})",
        {"t": Tt, "theta": Th, "phi": Ph},
        g,
        gam,
        ric,
        W,
        circle_length * 4 * np.pi * a2,
        ricci_parallel=True,
        loops=[(0, circle_length)],
    )
