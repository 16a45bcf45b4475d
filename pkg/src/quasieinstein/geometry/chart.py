"""Periodic coordinate charts and Fourier collocation derivatives."""
from __future__ import annotations

from functools import cached_property

import numpy as np


class ChartGrid:
    """A periodic box ``[0, L_1) x ... x [0, L_n)`` sampled on a uniform grid.

    Parameters
    ----------
    shape : sequence of int
        Node count per axis; each must be even and at least 8.
    periods : sequence of float, optional
        Period per axis, ``2*pi`` by default.
    """

    def __init__(self, shape, periods=None):
        shape = tuple(int(s) for s in shape)
        if not shape:
            raise ValueError("a chart needs at least one axis")
        for s in shape:
            if s < 8 or s % 2:
                raise ValueError(f"node counts must be even and >= 8, got {s}")
        if periods is None:
            periods = (2 * np.pi,) * len(shape)
        periods = tuple(float(p) for p in periods)
        if len(periods) != len(shape):
            raise ValueError("one period per axis is required")
        if any(p <= 0 for p in periods):
            raise ValueError("periods must be positive")
        self.shape = shape
        self.periods = periods

    @classmethod
    def uniform(cls, n: int, N: int = 64, period: float = 2 * np.pi) -> "ChartGrid":
        return cls((N,) * n, (period,) * n)

    @property
    def n(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod([p / s for p, s in zip(self.periods, self.shape)]))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(np.arange(s) * (p / s) for s, p in zip(self.shape, self.periods))

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Node coordinates ``u_1 .. u_n`` as full grids (``indexing='ij'``)."""
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def _wavenumbers(self):
        out = []
        for s, p in zip(self.shape, self.periods):
            k = np.fft.rfftfreq(s, d=1.0 / s) * (2 * np.pi / p)
            k[-1] = 0.0  # Nyquist mode has no real derivative
            out.append(1j * k)
        return out

    def partial(self, f: np.ndarray, axis: int) -> np.ndarray:
        """Spectral derivative of ``f`` along chart axis ``axis``.

        Leading dimensions of ``f`` beyond the grid shape are treated as
        component indices.
        """
        lead = f.ndim - self.n
        if lead < 0 or f.shape[lead:] != self.shape:
            raise ValueError(f"array of shape {f.shape} does not live on grid {self.shape}")
        ax = lead + axis
        spec = np.fft.rfft(f, axis=ax)
        k = self._wavenumbers[axis]
        bshape = [1] * f.ndim
        bshape[ax] = k.size
        spec *= k.reshape(bshape)
        return np.fft.irfft(spec, n=self.shape[axis], axis=ax)

    def drop_nyquist(self, f: np.ndarray) -> np.ndarray:
        """Remove every Fourier mode that is at the Nyquist frequency on some axis."""
        lead = f.ndim - self.n
        out = f
        for a, s in enumerate(self.shape):
            spec = np.fft.rfft(out, axis=lead + a)
            idx = [slice(None)] * f.ndim
            idx[lead + a] = -1
            spec[tuple(idx)] = 0.0
            out = np.fft.irfft(spec, n=s, axis=lead + a)
        return out

    def gradient_components(self, f: np.ndarray) -> np.ndarray:
        """Stack ``d_i f`` along a new leading axis."""
        return np.stack([self.partial(f, a) for a in range(self.n)])

    def diff_matrix(self, axis: int) -> np.ndarray:
        """Dense 1D first-derivative matrix matching :meth:`partial` on ``axis``."""
        s = self.shape[axis]
        eye = np.eye(s)
        spec = np.fft.rfft(eye, axis=0) * self._wavenumbers[axis][:, None]
        return np.fft.irfft(spec, n=s, axis=0)

    def __eq__(self, other):
        return isinstance(other, ChartGrid) and self.shape == other.shape and self.periods == other.periods

    def __hash__(self):
        return hash((self.shape, self.periods))

    def __repr__(self):
        return f"ChartGrid(shape={self.shape}, periods={self.periods})"
