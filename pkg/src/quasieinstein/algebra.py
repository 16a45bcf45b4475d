"""Left-invariant data on Lie algebras: curvature and the algebraic equation.

Conventions: ``c[k, i, j]`` holds the structure constants ``[e_i, e_j] =
c^k_ij e_k``; ``Q`` is the Gram matrix of the inner product. Covariant
2-tensors are matrices in the basis ``e_i``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

JACOBI_TOL = 1e-12
SOLVE_TOL = 1e-10
MERGE_TOL = 1e-6
KILLING_TOL = 1e-8
START_COMPONENTS = (-2.0, -1.0, 0.0, 1.0, 2.0)
START_LAMBDAS = (-2.0, -1.0, 0.0, 0.5, 1.0, 2.0)


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class LieAlgebraModel:
    """Structure constants and an inner product on a Lie algebra."""

    c: np.ndarray
    Q: np.ndarray
    label: str = ""

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        Q = np.asarray(self.Q, dtype=float)
        d = Q.shape[0]
        if Q.shape != (d, d) or c.shape != (d, d, d):
            raise AlgebraError(f"need c of shape (d, d, d) and Q of shape (d, d); got {c.shape}, {Q.shape}")
        if np.max(np.abs(c + np.swapaxes(c, 1, 2)), initial=0.0) > JACOBI_TOL:
            raise AlgebraError("structure constants are not antisymmetric")
        if np.max(np.abs(Q - Q.T), initial=0.0) > 1e-14 * max(1.0, np.max(np.abs(Q))):
            raise AlgebraError("Q is not symmetric")
        try:
            np.linalg.cholesky(Q)
        except np.linalg.LinAlgError:
            raise AlgebraError("Q is not positive definite") from None
        jac = jacobi_residual(c)
        if jac > JACOBI_TOL:
            raise AlgebraError(f"Jacobi identity fails (residual {jac:.3e})")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "Q", Q)

    @property
    def d(self) -> int:
        return self.Q.shape[0]

    @classmethod
    def abelian(cls, d: int, Q=None) -> "LieAlgebraModel":
        return cls(np.zeros((d, d, d)), np.eye(d) if Q is None else Q, "abelian")

    @classmethod
    def su2(cls, Q=None) -> "LieAlgebraModel":
        """``[e_i, e_j] = eps_ijk e_k``."""
        c = np.zeros((3, 3, 3))
        for i, j, k in itertools.permutations(range(3)):
            c[k, i, j] = np.linalg.det(np.eye(3)[[i, j, k]])
        return cls(c, np.eye(3) if Q is None else Q, "su2")


def jacobi_residual(c: np.ndarray) -> float:
    # [[e_i, e_j], e_k] = c^l_ij c^p_lk e_p, summed cyclically
    t = np.einsum("lij,plk->pijk", c, c)
    cyc = t + np.transpose(t, (0, 2, 3, 1)) + np.transpose(t, (0, 3, 1, 2))
    return float(np.max(np.abs(cyc), initial=0.0))


@dataclass
class AlgebraCurvature:
    connection: np.ndarray  # G[p, i, j]: nabla_{e_i} e_j = G^p_ij e_p
    ricci: np.ndarray
    scalar: float


def algebra_curvature(L: LieAlgebraModel) -> AlgebraCurvature:
    """Levi-Civita connection (Koszul formula) and Ricci curvature."""
    c, Q = L.c, L.Q
    Cl = np.einsum("lk,kij->lij", Q, c)  # Cl[l, i, j] = <[e_i, e_j], e_l>
    # 2 <nabla_i e_j, e_l> = Cl[l, i, j] - Cl[i, j, l] + Cl[j, l, i]
    low = 0.5 * (Cl - np.transpose(Cl, (2, 0, 1)) + np.transpose(Cl, (1, 2, 0)))
    G = np.linalg.solve(Q, low.reshape(L.d, -1)).reshape(low.shape)
    # R(e_i, e_j) e_k = R[p, i, j, k] e_p
    R = (
        np.einsum("ljk,pil->pijk", G, G)
        - np.einsum("lik,pjl->pijk", G, G)
        - np.einsum("lij,plk->pijk", c, G)
    )
    ric = np.einsum("iijk->jk", R)
    ric = 0.5 * (ric + ric.T)
    return AlgebraCurvature(G, ric, float(np.trace(np.linalg.solve(Q, ric))))


def covariant_matrix(L: LieAlgebraModel, X: np.ndarray, curv: AlgebraCurvature | None = None) -> np.ndarray:
    """``A[p, i]``: components of ``nabla_{e_i} X``."""
    curv = curv or algebra_curvature(L)
    return np.einsum("pij,j->pi", curv.connection, X)


def lie_derivative_metric(L: LieAlgebraModel, X, curv: AlgebraCurvature | None = None) -> np.ndarray:
    B = L.Q @ covariant_matrix(L, np.asarray(X, dtype=float), curv)
    return B + B.T


def q_norm(L: LieAlgebraModel, T: np.ndarray) -> float:
    """Invariant norm of a covariant 2-tensor."""
    Qi = np.linalg.inv(L.Q)
    return float(np.sqrt(max(np.trace(Qi @ T @ Qi @ T.T), 0.0)))


def algebraic_qe_residual(L: LieAlgebraModel, X, m: float, lam: float,
                          curv: AlgebraCurvature | None = None) -> np.ndarray:
    """``E = Ric + Sym(Q nabla X)/2 - (QX)(QX)^T/m - lam Q``."""
    if m == 0:
        raise ValueError("m must be nonzero")
    curv = curv or algebra_curvature(L)
    X = np.asarray(X, dtype=float)
    QX = L.Q @ X
    return curv.ricci + 0.5 * lie_derivative_metric(L, X, curv) - np.outer(QX, QX) / m - lam * L.Q


@dataclass(frozen=True)
class AlgebraSolution:
    X: tuple
    lam: float
    residual: float
    killing_norm: float

    @property
    def killing(self) -> bool:
        return self.killing_norm <= KILLING_TOL


def qe_solve(L: LieAlgebraModel, m: float, *, max_iter: int = 60) -> list[AlgebraSolution]:
    """All solutions reachable by damped Gauss-Newton from the fixed start grid."""
    if m == 0:
        raise ValueError("m must be nonzero")
    d = L.d
    if d > 4:
        raise ValueError("qe_solve supports dimension at most 4")
    curv = algebra_curvature(L)
    Q = L.Q
    iu = np.triu_indices(d)
    # E is affine-quadratic in (X, lam): E = E0 + (1/2) Sym(Q A_j) X_j - (QX)(QX)^T/m - lam Q
    S = np.stack([lie_derivative_metric(L, np.eye(d)[j], curv) for j in range(d)])  # (d, d, d)

    def resid(z):
        X, lam = z[:, :d], z[:, d]
        QX = X @ Q.T
        E = (
            curv.ricci[None]
            + 0.5 * np.einsum("jab,zj->zab", S, X)
            - np.einsum("za,zb->zab", QX, QX) / m
            - lam[:, None, None] * Q[None]
        )
        return E[:, iu[0], iu[1]]

    def jac(z):
        X = z[:, :d]
        QX = X @ Q.T
        cols = []
        for j in range(d):
            Qe = Q[:, j]
            dE = 0.5 * S[j][None] - (np.einsum("a,zb->zab", Qe, QX) + np.einsum("za,b->zab", QX, Qe)) / m
            cols.append(dE[:, iu[0], iu[1]])
        cols.append(np.broadcast_to(-Q[iu], (z.shape[0], len(iu[0]))))
        return np.stack(cols, axis=-1)

    starts = np.array(
        [list(x) + [lam] for x in itertools.product(START_COMPONENTS, repeat=d) for lam in START_LAMBDAS]
    )
    z = starts.copy()
    r = resid(z)
    nr = np.linalg.norm(r, axis=1)
    for _ in range(max_iter):
        active = nr > 1e-14
        if not np.any(active):
            break
        step = -np.einsum("zij,zj->zi", np.linalg.pinv(jac(z[active])), r[active])
        za, na = z[active], nr[active]
        t = np.ones(len(za))
        accepted = np.zeros(len(za), bool)
        best_z, best_n = za.copy(), na.copy()
        for _ in range(31):
            trial = za + t[:, None] * step
            tn = np.linalg.norm(resid(trial), axis=1)
            better = (tn < na) & ~accepted
            best_z[better], best_n[better] = trial[better], tn[better]
            accepted |= better
            if accepted.all():
                break
            t = np.where(accepted, t, 0.5 * t)
        z[active], nr[active] = best_z, best_n
        r = resid(z)
        if not accepted.any():
            break

    sols: list[AlgebraSolution] = []
    for zi in z[np.argsort(nr, kind="stable")]:
        X, lam = zi[:d], float(zi[d])
        E = algebraic_qe_residual(L, X, m, lam, curv)
        res = float(np.max(np.abs(E)))
        if res > SOLVE_TOL:
            continue
        if any(np.sum(np.abs(np.array(s.X) - X)) + abs(s.lam - lam) <= MERGE_TOL for s in sols):
            continue
        kn = q_norm(L, lie_derivative_metric(L, X, curv))
        sols.append(AlgebraSolution(tuple(float(x) + 0.0 for x in X), lam + 0.0, res, kn))
    # canonical order, insensitive to round-off in the last digits
    sols.sort(key=lambda s: (round(s.lam, 9), tuple(round(x, 9) for x in s.X)))
    return sols
