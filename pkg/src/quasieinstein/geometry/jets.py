"""Lazy covariant jets of tensor fields on analytic manifolds.

A jet stands for a covariant tensor field together with all of its iterated
covariant derivatives, evaluated at a fixed set of nodes. ``jet.d(k)`` is
the array of ``nabla^k T`` with shape ``(n,)*(rank + k) + (P,)``; tensor
indices come first and derivative indices follow in the order they were
applied.

Leaves supply closed-form derivatives. Everything else is derived exactly:
sums, tensor products (Leibniz rule), metric contractions (the metric is
parallel, so contraction commutes with differentiation), index permutations,
reciprocals of scalars, and the derivative itself, which just shifts orders.
"""
from __future__ import annotations

import numbers
from itertools import combinations

import numpy as np

_L = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


class AnalyticDerivativeUnavailable(ValueError):
    """A closed-form derivative of the requested order is not known."""


class JetContext:
    def __init__(self, ginv: np.ndarray):
        self.ginv = ginv
        self.n = ginv.shape[0]
        self.P = ginv.shape[-1]

    def zeros(self, order: int) -> np.ndarray:
        return np.zeros((self.n,) * order + (self.P,))


class Jet:
    rank = 0

    def __init__(self, ctx: JetContext, rank: int):
        self.ctx = ctx
        self.rank = rank
        self._cache: dict[int, np.ndarray] = {}

    def d(self, k: int) -> np.ndarray:
        out = self._cache.get(k)
        if out is None:
            out = self.ctx.zeros(self.rank + k) if self.zero(k) else self._compute(k)
            self._cache[k] = out
        return out

    @property
    def value(self) -> np.ndarray:
        return self.d(0)

    def zero(self, k: int) -> bool:
        return False

    def _compute(self, k: int) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Jet):
            return Sum(self, other, 1.0, 1.0)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Sum(self, other, 1.0, -1.0)
        return NotImplemented

    def __neg__(self):
        return Scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, numbers.Real):
            return Scale(self, float(other))
        if isinstance(other, Jet):
            return Product(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, numbers.Real):
            return Scale(self, float(other))
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, numbers.Real):
            return Scale(self, 1.0 / float(other))
        if isinstance(other, Jet):
            return Product(self, Reciprocal(other))
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, numbers.Real):
            return Scale(Reciprocal(self), float(other))
        return NotImplemented


class Source(Jet):
    """Leaf with closed-form derivatives.

    ``derivs(k)`` returns the array for order ``k`` or ``None`` if unknown.
    Orders ``>= zero_from`` are identically zero (parallel data).
    """

    def __init__(self, ctx, rank, derivs, zero_from: int | None = None, label: str = "field"):
        super().__init__(ctx, rank)
        self._derivs = derivs
        self.zero_from = zero_from
        self.label = label

    @classmethod
    def parallel(cls, ctx, value, rank, label="parallel"):
        value = np.asarray(value, dtype=float)
        return cls(ctx, rank, lambda k: value if k == 0 else None, zero_from=1, label=label)

    @classmethod
    def values_only(cls, ctx, value, rank, label="sampled"):
        value = np.asarray(value, dtype=float)
        return cls(ctx, rank, lambda k: value if k == 0 else None, label=label)

    def zero(self, k):
        return self.zero_from is not None and k >= self.zero_from

    def _compute(self, k):
        out = self._derivs(k)
        if out is None:
            raise AnalyticDerivativeUnavailable(
                f"no closed-form derivative of order {k} for {self.label!r}"
            )
        return np.asarray(out, dtype=float)


class Sum(Jet):
    def __init__(self, a: Jet, b: Jet, ca: float, cb: float):
        if a.rank != b.rank:
            raise ValueError("cannot add jets of different rank")
        super().__init__(a.ctx, a.rank)
        self.a, self.b, self.ca, self.cb = a, b, ca, cb

    def zero(self, k):
        return self.a.zero(k) and self.b.zero(k)

    def _compute(self, k):
        return self.ca * self.a.d(k) + self.cb * self.b.d(k)


class Scale(Jet):
    def __init__(self, a: Jet, c: float):
        super().__init__(a.ctx, a.rank)
        self.a, self.c = a, c

    def zero(self, k):
        return self.c == 0.0 or self.a.zero(k)

    def _compute(self, k):
        return self.c * self.a.d(k)


def _leibniz(a: Jet, b: Jet, k: int, skip_empty_a: bool = False):
    """Terms of ``nabla^k (a ⊗ b)``, yielded as arrays in output index order."""
    ra, rb = a.rank, b.rank
    A, B, D = _L[:ra], _L[ra:ra + rb], _L[ra + rb:ra + rb + k]
    out_spec = A + B + D
    for s in range(k + 1):
        if skip_empty_a and s == 0:
            continue
        if a.zero(s) or b.zero(k - s):
            continue
        for S in combinations(range(k), s):
            C = [i for i in range(k) if i not in S]
            sa = A + "".join(D[i] for i in S)
            sb = B + "".join(D[i] for i in C)
            yield np.einsum(f"{sa}...,{sb}...->{out_spec}...", a.d(s), b.d(k - s))


class Product(Jet):
    """Tensor product ``a ⊗ b``; indices of ``a`` first."""

    def __init__(self, a: Jet, b: Jet):
        super().__init__(a.ctx, a.rank + b.rank)
        self.a, self.b = a, b

    def zero(self, k):
        return all(self.a.zero(s) or self.b.zero(k - s) for s in range(k + 1))

    def _compute(self, k):
        out = self.ctx.zeros(self.rank + k)
        for term in _leibniz(self.a, self.b, k):
            out += term
        return out


class Reciprocal(Jet):
    def __init__(self, a: Jet):
        if a.rank != 0:
            raise ValueError("only scalar jets can be inverted")
        super().__init__(a.ctx, 0)
        self.a = a

    def zero(self, k):
        return k >= 1 and self.a.zero(1)

    def _compute(self, k):
        a0 = self.a.d(0)
        if np.any(a0 == 0):
            raise ZeroDivisionError("reciprocal of a scalar field with zeros")
        if k == 0:
            return 1.0 / a0
        # d^k (a h) = 0 for k >= 1, solved for the term with all derivatives on h
        acc = self.ctx.zeros(k)
        for term in _leibniz(self.a, self, k, skip_empty_a=True):
            acc += term
        return -acc / a0


class Contract(Jet):
    """Metric contraction of pairs of tensor indices."""

    def __init__(self, a: Jet, pairs):
        pairs = [tuple(sorted(p)) for p in pairs]
        used = [i for p in pairs for i in p]
        if len(set(used)) != len(used) or any(i >= a.rank for i in used):
            raise ValueError(f"invalid contraction pairs {pairs} for rank {a.rank}")
        super().__init__(a.ctx, a.rank - 2 * len(pairs))
        self.a, self.pairs = a, pairs
        self._keep = [i for i in range(a.rank) if i not in used]

    def zero(self, k):
        return self.a.zero(k)

    def _compute(self, k):
        r = self.a.rank
        T, D = _L[:r], _L[r:r + k]
        g_specs = [f"{T[i]}{T[j]}..." for i, j in self.pairs]
        out = "".join(T[i] for i in self._keep) + D
        spec = ",".join(g_specs + [T + D + "..."]) + f"->{out}..."
        return np.einsum(spec, *([self.ctx.ginv] * len(self.pairs)), self.a.d(k))


class Permute(Jet):
    """Reorder tensor indices: output index ``q`` is input index ``perm[q]``."""

    def __init__(self, a: Jet, perm):
        perm = tuple(perm)
        if sorted(perm) != list(range(a.rank)):
            raise ValueError(f"{perm} is not a permutation of {a.rank} indices")
        super().__init__(a.ctx, a.rank)
        self.a, self.perm = a, perm

    def zero(self, k):
        return self.a.zero(k)

    def _compute(self, k):
        r = self.rank
        axes = list(self.perm) + list(range(r, r + k)) + [r + k]
        return np.transpose(self.a.d(k), axes)


class Derivative(Jet):
    """``nabla a``; the new index is the last tensor index."""

    def __init__(self, a: Jet):
        super().__init__(a.ctx, a.rank + 1)
        self.a = a

    def zero(self, k):
        return self.a.zero(k + 1)

    def _compute(self, k):
        return self.a.d(k + 1)
