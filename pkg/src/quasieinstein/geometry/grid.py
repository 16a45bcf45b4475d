"""Riemannian metrics sampled on periodic chart grids."""
from __future__ import annotations

from functools import cached_property

import numpy as np

from quasieinstein import kernels
from quasieinstein.geometry.chart import ChartGrid
from quasieinstein.geometry.fields import (
    ChartMismatch,
    Field,
    OneFormField,
    ScalarField,
    SymTensorField,
    TensorField,
    VectorField,
)


_LETTERS = "abcdefghijklmnop"


def _flat(a: np.ndarray, lead: int) -> np.ndarray:
    return a.reshape(a.shape[:lead] + (-1,))


class MetricField:
    """A metric ``g_ij`` on a :class:`ChartGrid`, with its derived geometry.

    The inverse, volume density, Christoffel symbols and curvature are
    computed on first use and cached for the lifetime of the object.
    All operators below are Fourier-collocation exact for band-limited data.
    """

    kind = "grid"

    def __init__(self, chart: ChartGrid, g: np.ndarray, *, name: str = "custom"):
        g = np.asarray(g, dtype=float)
        n = chart.n
        if g.shape != (n, n) + chart.shape:
            raise ValueError(f"metric must have shape {(n, n) + chart.shape}, got {g.shape}")
        asym = np.max(np.abs(g - np.swapaxes(g, 0, 1)))
        if asym > 1e-14 * max(1.0, np.max(np.abs(g))):
            raise ValueError(f"metric components are not symmetric (max defect {asym:.2e})")
        self.chart = chart
        self.g = 0.5 * (g + np.swapaxes(g, 0, 1))
        self.name = name
        ginv, sdet = kernels.metric_inverse(_flat(self.g, 2))
        self.ginv = ginv.reshape(self.g.shape)
        self.sqrt_det = sdet.reshape(chart.shape)

    @classmethod
    def euclidean(cls, chart: ChartGrid) -> "MetricField":
        g = np.zeros((chart.n, chart.n) + chart.shape)
        for i in range(chart.n):
            g[i, i] = 1.0
        return cls(chart, g, name="flat")

    def __repr__(self):
        return f"MetricField({self.name}, {self.chart!r})"

    # ------------------------------------------------------------------ basics
    @property
    def n(self) -> int:
        return self.chart.n

    @property
    def node_count(self) -> int:
        return self.chart.size

    @property
    def coords(self):
        return self.chart.coords

    def _own(self, *fields: Field):
        for f in fields:
            if f.manifold is not self:
                raise ChartMismatch("field does not belong to this metric")

    def scalar(self, values) -> ScalarField:
        values = np.broadcast_to(np.asarray(values, dtype=float), self.chart.shape).copy()
        return ScalarField(self, values)

    def constant(self, c: float) -> ScalarField:
        return ScalarField(self, np.full(self.chart.shape, float(c)))

    def vector(self, components) -> VectorField:
        comps = [np.broadcast_to(np.asarray(c, dtype=float), self.chart.shape) for c in components]
        if len(comps) != self.n:
            raise ValueError(f"expected {self.n} vector components")
        return VectorField(self, np.stack(comps).astype(float))

    def one_form(self, components) -> OneFormField:
        comps = [np.broadcast_to(np.asarray(c, dtype=float), self.chart.shape) for c in components]
        if len(comps) != self.n:
            raise ValueError(f"expected {self.n} components")
        return OneFormField(self, np.stack(comps).astype(float))

    def sym_tensor(self, components) -> SymTensorField:
        a = np.asarray(components, dtype=float)
        a = np.broadcast_to(a, (self.n, self.n) + self.chart.shape)
        return SymTensorField(self, 0.5 * (a + np.swapaxes(a, 0, 1)))

    @cached_property
    def metric(self) -> SymTensorField:
        return SymTensorField(self, self.g)

    @cached_property
    def volume(self) -> float:
        return float(np.sum(self.sqrt_det) * self.chart.cell_volume)

    # --------------------------------------------------------------- curvature
    def partial(self, a: np.ndarray, axis: int) -> np.ndarray:
        return self.chart.partial(a, axis)

    def _d(self, a: np.ndarray) -> np.ndarray:
        """Coordinate gradient with the new derivative index first."""
        return self.chart.gradient_components(a)

    @cached_property
    def metric_derivative(self) -> np.ndarray:
        """``dg[l, i, j] = d_l g_ij``."""
        return self._d(self.g)

    @cached_property
    def christoffel(self) -> np.ndarray:
        """``Gam[k, i, j]``, symmetric in ``i, j``."""
        gam = kernels.christoffel(_flat(self.ginv, 2), _flat(self.metric_derivative, 3))
        return gam.reshape((self.n,) * 3 + self.chart.shape)

    @cached_property
    def ricci_raw(self) -> np.ndarray:
        """Ricci components before symmetrization."""
        dgam = self._d(self.christoffel)
        ric = kernels.ricci(_flat(self.christoffel, 3), _flat(dgam, 4))
        return ric.reshape((self.n, self.n) + self.chart.shape)

    def ricci(self) -> SymTensorField:
        r = self.ricci_raw
        return SymTensorField(self, 0.5 * (r + np.swapaxes(r, 0, 1)))

    def scalar_curvature(self) -> ScalarField:
        return self.trace(self.ricci())

    # ------------------------------------------------------ tensor algebra
    def flat(self, X: VectorField) -> OneFormField:
        self._own(X)
        return OneFormField(self, np.einsum("ij...,j...->i...", self.g, X.data))

    def sharp(self, w: OneFormField) -> VectorField:
        self._own(w)
        return VectorField(self, np.einsum("ij...,j...->i...", self.ginv, w.data))

    def _lower_all(self, f: Field) -> np.ndarray:
        return self.flat(f).data if isinstance(f, VectorField) else f.data

    def inner(self, A: Field, B: Field) -> ScalarField:
        """Full metric contraction of two fields of equal rank."""
        self._own(A, B)
        if isinstance(A, ScalarField):
            return ScalarField(self, A.data * B.data)
        r = A.rank
        a = self._lower_all(A)
        b = self._lower_all(B)
        up, lo = _LETTERS[:r], _LETTERS[r:2 * r]
        spec = ",".join(f"{u}{v}..." for u, v in zip(up, lo)) + f",{up}...,{lo}...->..."
        return ScalarField(self, np.einsum(spec, *([self.ginv] * r), a, b))

    def tensor_norm2(self, T: Field) -> ScalarField:
        return self.inner(T, T)

    def pointwise_norm(self, T: Field) -> np.ndarray:
        if isinstance(T, ScalarField):
            return np.abs(T.data)
        return np.sqrt(np.maximum(self.tensor_norm2(T).data, 0.0))

    def square(self, w: OneFormField) -> SymTensorField:
        """``w ⊗ w``."""
        self._own(w)
        return SymTensorField(self, np.einsum("i...,j...->ij...", w.data, w.data))

    def sym_product(self, a: OneFormField, b: OneFormField) -> SymTensorField:
        """``a ⊗ b + b ⊗ a``."""
        self._own(a, b)
        t = np.einsum("i...,j...->ij...", a.data, b.data)
        return SymTensorField(self, t + np.swapaxes(t, 0, 1))

    def contract(self, T: Field, X: VectorField) -> OneFormField:
        """``T(X, .)`` for a covariant 2-tensor."""
        self._own(T, X)
        return OneFormField(self, np.einsum("ij...,i...->j...", T.data, X.data))

    def outer(self, A: Field, B: Field) -> TensorField:
        """Covariant tensor product ``A ⊗ B``."""
        self._own(A, B)
        a, b = self._lower_all(A), self._lower_all(B)
        ra, rb = A.rank, B.rank
        spec = f"{_LETTERS[:ra]}...,{_LETTERS[ra:ra + rb]}...->{_LETTERS[:ra + rb]}..."
        return TensorField(self, np.einsum(spec, a, b), ra + rb)

    def permute(self, T: Field, perm) -> TensorField:
        """Reorder indices: output index ``q`` is input index ``perm[q]``."""
        self._own(T)
        r = T.rank
        data = np.transpose(self._lower_all(T), tuple(perm) + tuple(range(r, T.data.ndim)))
        return TensorField(self, data, r)

    def pair(self, w: OneFormField, X: VectorField) -> ScalarField:
        """``w(X)``."""
        self._own(w, X)
        return ScalarField(self, np.einsum("i...,i...->...", w.data, X.data))

    def trace(self, T: Field) -> ScalarField:
        self._own(T)
        return ScalarField(self, np.einsum("ij...,ij...->...", self.ginv, T.data))

    # ------------------------------------------------------ differential ops
    def gradient(self, f: ScalarField) -> OneFormField:
        """``df``."""
        self._own(f)
        return OneFormField(self, self._d(f.data))

    def grad(self, f: ScalarField) -> VectorField:
        """``sharp(df)``."""
        return self.sharp(self.gradient(f))

    def directional(self, f: ScalarField, X: VectorField) -> ScalarField:
        """``X^i d_i f``."""
        self._own(f, X)
        return ScalarField(self, np.einsum("i...,i...->...", X.data, self._d(f.data)))

    def covariant_derivative(self, F: Field) -> TensorField:
        """``nabla F`` as a covariant tensor with the derivative index first."""
        self._own(F)
        gam = self.christoffel
        if isinstance(F, ScalarField):
            return TensorField(self, self._d(F.data), 1)
        if isinstance(F, (VectorField, OneFormField)):
            w = self._lower_all(F)
            out = self._d(w) - np.einsum("kij...,k...->ij...", gam, w)
            return TensorField(self, out, 2)
        if F.rank == 2:
            T = F.data
            out = (
                self._d(T)
                - np.einsum("lki...,lj...->kij...", gam, T)
                - np.einsum("lkj...,il...->kij...", gam, T)
            )
            return TensorField(self, out, 3)
        raise TypeError(f"covariant derivative of rank {F.rank} is not supported")

    def covariant_along(self, X: VectorField, Y: VectorField) -> OneFormField:
        """``(nabla_Y X)^flat``."""
        nab = self.covariant_derivative(X).data
        return OneFormField(self, np.einsum("i...,ij...->j...", Y.data, nab))

    def lie_derivative(self, X: VectorField) -> SymTensorField:
        """``(L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k``."""
        self._own(X)
        dX = self._d(X.data)  # dX[i, k] = d_i X^k
        t = np.einsum("k...,kij...->ij...", X.data, self.metric_derivative)
        s = np.einsum("kj...,ik...->ij...", self.g, dX)
        return SymTensorField(self, t + s + np.swapaxes(s, 0, 1))

    def hessian(self, f: ScalarField) -> SymTensorField:
        self._own(f)
        df = self._d(f.data)
        n = self.n
        h = np.empty((n, n) + self.chart.shape)
        for i in range(n):
            for j in range(i, n):
                h[i, j] = self.partial(df[j], i)
                h[j, i] = h[i, j]
        h -= np.einsum("kij...,k...->ij...", self.christoffel, df)
        return SymTensorField(self, h)

    def laplacian(self, f: ScalarField) -> ScalarField:
        """Divergence form ``(1/sqrt g) d_i (sqrt g g^ij d_j f)``."""
        self._own(f)
        flux = np.einsum("ij...,j...->i...", self.ginv, self._d(f.data)) * self.sqrt_det
        return ScalarField(self, self._div_density(flux))

    def _div_density(self, flux: np.ndarray) -> np.ndarray:
        return sum(self.partial(flux[i], i) for i in range(self.n)) / self.sqrt_det

    def div(self, X: VectorField) -> ScalarField:
        """``(1/sqrt g) d_i (sqrt g X^i)``."""
        self._own(X)
        return ScalarField(self, self._div_density(X.data * self.sqrt_det))

    def div_sym(self, T: SymTensorField) -> OneFormField:
        """``(div T)_j = g^ik nabla_k T_ij``."""
        nab = self.covariant_derivative(T).data
        return OneFormField(self, np.einsum("ki...,kij...->j...", self.ginv, nab))

    def periods(self, w: OneFormField) -> list[float]:
        """Integrals of a closed one-form around the coordinate loops."""
        self._own(w)
        return [float(np.mean(w.data[i]) * L) for i, L in enumerate(self.chart.periods)]

    # ------------------------------------------------------------ reductions
    def integrate(self, f) -> float:
        if isinstance(f, ScalarField):
            self._own(f)
            f = f.data
        f = np.broadcast_to(np.asarray(f, dtype=float), self.chart.shape)
        return float(np.sum(f * self.sqrt_det) * self.chart.cell_volume)

    def linf(self, T: Field) -> float:
        return float(np.max(self.pointwise_norm(T)))

    def l2(self, T: Field) -> float:
        return float(np.sqrt(max(self.integrate(self.pointwise_norm(T) ** 2), 0.0)))

    def sd(self, f: ScalarField) -> float:
        return float(np.std(f.data))

    def mean(self, f: ScalarField) -> float:
        return float(np.mean(f.data))


def curvature_package(g: MetricField) -> dict:
    """Christoffel symbols, Ricci tensor and scalar curvature of ``g``."""
    return {
        "christoffel": g.christoffel,
        "ricci": g.ricci(),
        "scalar": g.scalar_curvature(),
    }


def spectral_partial(f: ScalarField, axis: int) -> ScalarField:
    return ScalarField(f.manifold, f.manifold.partial(f.data, axis))
