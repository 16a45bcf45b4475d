"""Pure numpy versions of the pointwise curvature kernels.

All arrays keep the node axis last, flattened: a metric is ``(n, n, P)``.
These are the reference implementations; ``_ckernels.pyx`` must agree with
them to round-off.
"""
from __future__ import annotations

import numpy as np


class NotPositiveDefinite(ValueError):
    """Raised when a metric fails its Cholesky factorization at some node."""

    def __init__(self, node: int, pivot: float):
        super().__init__(f"metric is not positive definite at node {node} (pivot {pivot:.3e})")
        self.node = node
        self.pivot = pivot


def metric_inverse(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(g^{-1}, sqrt(det g))`` for a stack of symmetric matrices."""
    stack = np.ascontiguousarray(np.moveaxis(g, -1, 0))
    try:
        chol = np.linalg.cholesky(stack)
    except np.linalg.LinAlgError:
        # locate the first offending node for the error message
        for p in range(stack.shape[0]):
            w = np.linalg.eigvalsh(stack[p])
            if w[0] <= 0:
                raise NotPositiveDefinite(p, float(w[0])) from None
        raise
    sqrt_det = np.prod(np.diagonal(chol, axis1=1, axis2=2), axis=1)
    inv = np.linalg.inv(stack)
    inv = 0.5 * (inv + np.swapaxes(inv, 1, 2))
    return np.moveaxis(inv, 0, -1).copy(), sqrt_det


def christoffel(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Second-kind symbols ``Gam[k, i, j]`` from ``dg[l, i, j] = d_l g_ij``."""
    lowered = dg.transpose(1, 0, 2, 3) + dg.transpose(1, 2, 0, 3) - dg
    # lowered[l, i, j] = d_i g_lj + d_j g_li - d_l g_ij
    return 0.5 * np.einsum("klp,lijp->kijp", ginv, lowered)


def ricci(gam: np.ndarray, dgam: np.ndarray) -> np.ndarray:
    """Ricci tensor from ``Gam[k, i, j]`` and ``dgam[l, k, i, j] = d_l Gam^k_ij``."""
    div_term = np.einsum("kkijp->ijp", dgam)
    grad_term = np.einsum("jkikp->ijp", dgam)
    trace = np.einsum("kklp->lp", gam)
    quad1 = np.einsum("lp,lijp->ijp", trace, gam)
    quad2 = np.einsum("kjlp,likp->ijp", gam, gam)
    return div_term - grad_term + quad1 - quad2
