"""Tensor fields tied to the manifold they were built on.

Every field holds ``data``: a numpy array with component axes first on grid
manifolds, or a :class:`~quasieinstein.geometry.jets.Jet` on analytic ones.
Component conventions on grids: vectors are contravariant, one-forms and
tensors covariant. Fields are treated as immutable values.
"""
from __future__ import annotations

import numbers

import numpy as np


class ChartMismatch(ValueError):
    pass


class Field:
    rank = 0

    def __init__(self, manifold, data):
        self.manifold = manifold
        self.data = data

    def _like(self, data):
        return type(self)(self.manifold, data)

    def _check(self, other):
        if other.manifold is not self.manifold:
            raise ChartMismatch("fields live on different manifolds")

    def values(self) -> np.ndarray:
        """Raw component values at the nodes (covariant on analytic manifolds)."""
        d = self.data
        return d if isinstance(d, np.ndarray) else d.value

    def __add__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        self._check(other)
        if type(other) is not type(self):
            raise TypeError(f"cannot add {type(self).__name__} and {type(other).__name__}")
        return self._like(self.data + other.data)

    def __sub__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        self._check(other)
        if type(other) is not type(self):
            raise TypeError(f"cannot subtract {type(other).__name__} from {type(self).__name__}")
        return self._like(self.data - other.data)

    def __neg__(self):
        return self._like(-self.data)

    def __mul__(self, other):
        if isinstance(other, numbers.Real):
            return self._like(self.data * float(other))
        if isinstance(other, ScalarField):
            self._check(other)
            return self._like(other.data * self.data)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, numbers.Real):
            return self._like(self.data * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, numbers.Real):
            return self._like(self.data * (1.0 / float(other)))
        if isinstance(other, ScalarField):
            self._check(other)
            return self._like(self.data * (1.0 / other.data))
        return NotImplemented

    def __repr__(self):
        return f"{type(self).__name__}(on {self.manifold!r})"


class ScalarField(Field):
    rank = 0

    def __mul__(self, other):
        if isinstance(other, Field) and not isinstance(other, ScalarField):
            return other.__mul__(self)
        return super().__mul__(other)

    def __radd__(self, other):
        if isinstance(other, numbers.Real):
            return self + self.manifold.constant(float(other))
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, numbers.Real):
            return self + self.manifold.constant(float(other))
        return super().__add__(other)

    def __sub__(self, other):
        if isinstance(other, numbers.Real):
            return self - self.manifold.constant(float(other))
        return super().__sub__(other)

    def __rsub__(self, other):
        if isinstance(other, numbers.Real):
            return self.manifold.constant(float(other)) - self

        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, numbers.Real):
            return self._like(float(other) * (1.0 / self.data))
        return NotImplemented


class VectorField(Field):
    rank = 1


class OneFormField(Field):
    rank = 1


class SymTensorField(Field):
    rank = 2


class TensorField(Field):
    """General covariant tensor; ``rank`` is per instance."""

    def __init__(self, manifold, data, rank: int):
        super().__init__(manifold, data)
        self.rank = rank

    def _like(self, data):
        return TensorField(self.manifold, data, self.rank)

