"""The Killing candidate ``K = (2/m) Gamma X + grad Gamma`` and its identities."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from quasieinstein.analysis.qe import (
    QEData,
    constant_tolerance,
    qe_defect,
    solution_tolerance,
)
from quasieinstein.analysis.report import (
    IdentityReport,
    biconditional,
    inapplicable,
    judged,
    skipped,
)
from quasieinstein.geometry.fields import ScalarField, VectorField

TOL_REWRITE = 1e-7
TOL_SECTION3 = 1e-6
TOL_DIVK_PRE = 1e-6
TOL_ENERGY = 1e-7
TOL_KILLING = 1e-6
MAX_DENSE_NODES = 8192


class SolverError(RuntimeError):
    """The near-kernel solve did not produce a usable ``Gamma``."""

    def __init__(self, message: str, mu: float | None = None, min_gamma: float | None = None):
        super().__init__(message)
        self.mu = mu
        self.min_gamma = min_gamma


def _require_positive(gamma: ScalarField):
    lo = float(np.min(gamma.values()))
    if not lo > 0:
        raise ValueError(f"Gamma must be positive (min {lo:.3e})")


def killing_candidate(M, qe: QEData, gamma: ScalarField):
    """Return ``K`` and ``div K`` for a positive ``gamma``."""
    _require_positive(gamma)
    K = qe.X * gamma * (2.0 / qe.m) + M.grad(gamma)
    return K, M.div(K)


@dataclass
class GammaSolution:
    gamma: ScalarField
    mu: float
    margin: float
    iterations: int
    residual: float
    operator_norm: float


def near_kernel_matrix(M, X: VectorField, m: float, chunk: int = 512) -> np.ndarray:
    """Dense matrix of ``Gamma -> div(grad Gamma + (2/m) Gamma X)``.

    Built by applying the spectral operator to blocks of unit vectors. The
    operator acts on fields without Nyquist content; Nyquist modes are
    annihilated by the collocation derivative and would add spurious null
    vectors, so they are mapped to the operator scale instead.
    """
    chart = M.chart
    P = chart.size
    if P > MAX_DENSE_NODES:
        raise SolverError(f"dense near-kernel solve limited to {MAX_DENSE_NODES} nodes, grid has {P}")
    shape = chart.shape
    Xc = X.data
    coef = 2.0 / m
    # largest |eigenvalue| of the Laplacian part, used for the Nyquist block
    shift = sum((np.pi * s / L) ** 2 for s, L in zip(shape, chart.periods)) * float(np.max(M.ginv))
    A = np.empty((P, P))
    for start in range(0, P, chunk):
        stop = min(start + chunk, P)
        B = stop - start
        e = np.zeros((B, P))
        e[np.arange(B), np.arange(start, stop)] = 1.0
        e = e.reshape((B,) + shape)
        f = chart.drop_nyquist(e)
        df = np.stack([chart.partial(f, a) for a in range(M.n)], axis=1)  # (B, n, ...)
        flux = np.einsum("ij...,bj...->bi...", M.ginv, df) + coef * f[:, None] * Xc[None]
        flux *= M.sqrt_det
        out = sum(chart.partial(flux[:, i], i) for i in range(M.n)) / M.sqrt_det
        out = chart.drop_nyquist(out) - shift * (e - f)
        A[:, start:stop] = out.reshape(B, P).T
    return A


def gamma_solve(M, X: VectorField, m: float, *, max_iter: int = 500, tol: float = 1e-10) -> GammaSolution:
    """Positive near-kernel element of ``div(grad . + (2/m) . X)``.

    Inverse iteration with shift 0 from the all-ones vector on a dense LU
    factorization. Succeeds when the eigenvalue is negligible against the
    operator scale and the eigenvector has one sign.

    Raises
    ------
    SolverError
        On analytic manifolds, grids above the dense limit, non-convergence,
        or when no positive near-kernel element exists at this resolution.
    """
    if getattr(M, "kind", None) != "grid":
        raise SolverError("gamma_solve needs a grid manifold")
    if m == 0:
        raise ValueError("m must be nonzero")
    A = near_kernel_matrix(M, X, m)
    P = A.shape[0]
    scale = float(np.max(np.sum(np.abs(A), axis=1)))
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            lu = scipy.linalg.lu_factor(A, check_finite=False)
        except scipy.linalg.LinAlgWarning:
            lu = None
    if lu is None or np.any(np.diag(lu[0]) == 0.0):
        # exactly singular pivot: a tiny shift keeps the iteration defined
        lu = scipy.linalg.lu_factor(A - 1e-14 * scale * np.eye(P), check_finite=False)

    v = np.ones(P) / np.sqrt(P)
    mu, res = np.nan, np.inf
    for it in range(1, max_iter + 1):
        w = scipy.linalg.lu_solve(lu, v, check_finite=False)
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0:
            raise SolverError("inverse iteration broke down")
        v = w / nw
        Av = A @ v
        mu = float(v @ Av)
        res = float(np.linalg.norm(Av - mu * v))
        if res <= tol:
            break
    else:
        raise SolverError(f"no convergence after {max_iter} iterations (residual {res:.3e})", mu=mu)

    v = v / v[np.argmax(np.abs(v))]
    lo = float(np.min(v))
    if abs(mu) > 1e-8 * scale or lo <= 0:
        raise SolverError(
            f"no positive near-kernel element at this resolution (mu = {mu:.3e}, min Gamma = {lo:.3e})",
            mu=mu,
            min_gamma=lo,
        )
    gamma = M.scalar(v.reshape(M.chart.shape))
    return GammaSolution(gamma, mu, lo, it, res, scale)


def lie_div_energy(M, K: VectorField, tol: float | None = None) -> IdentityReport:
    """``int div(L_K g)(K) = -1/2 int |L_K g|^2`` for any ``K``."""
    tol = TOL_ENERGY if tol is None else tol
    L = M.lie_derivative(K)
    lhs = M.integrate(M.pair(M.div_sym(L), K))
    rhs = -0.5 * M.integrate(M.tensor_norm2(L))
    rep = IdentityReport("lie_div_energy")
    rep.add(judged("lie_div_energy", "3.13", "energy identity", abs(lhs - rhs),
                   tol * max(1.0, abs(rhs)), lhs=lhs, rhs=rhs))
    rep.scalars.update(lhs=lhs, rhs=rhs)
    return rep


PIECE_NAMES = {
    "3.8": "divergence of K* x K* / Gamma",
    "3.9": "divergence of dGamma x dGamma / Gamma",
    "3.10": "divergence of the Ricci term",
    "3.11": "divergence of the Hessian term",
}


def _section3_fields(M, qe: QEData, gamma: ScalarField, K: VectorField):
    m, lam = qe.m, qe.lam
    E = qe_defect(M, qe)
    Kf = M.flat(K)
    dG = M.gradient(gamma)
    gradG = M.grad(gamma)
    hess = M.hessian(gamma)
    ric = M.ricci()
    rhs36 = (
        M.square(Kf) / gamma
        - M.square(dG) / gamma
        - ric * gamma * (4.0 / m)
        + 2.0 * hess
        + M.metric * gamma * (4.0 * lam / m)
    )
    return E, Kf, dG, gradG, hess, ric, rhs36


def section3_suite(
    M,
    qe: QEData,
    gamma: ScalarField,
    K: VectorField,
    tol: float | None = None,
    tol_rewrite: float | None = None,
) -> IdentityReport:
    """The rewrite of the equation in terms of ``K`` and its consequences.

    Every entry carries the defect ``E`` (and ``div K`` where it enters), so
    the relations hold for arbitrary inputs. Entries that differentiate the
    rewrite are only run when ``div K`` is small, as they compare integrals
    that rely on it.
    """
    _require_positive(gamma)
    tol = TOL_SECTION3 if tol is None else tol
    tol_rw = TOL_REWRITE if tol_rewrite is None else tol_rewrite
    m, lam, n = qe.m, qe.lam, M.n
    rep = IdentityReport("section3")
    E, Kf, dG, gradG, hess, ric, rhs36 = _section3_fields(M, qe, gamma, K)
    LK = M.lie_derivative(K)
    divK = M.div(K)
    divK_inf = M.linf(divK)
    rep.scalars.update(divK_linf=divK_inf, E_linf=M.linf(E))

    # (a) rewrite with the defect carried through
    corr = E * gamma * (4.0 / m)
    res = LK - rhs36 - corr
    rL = M.linf(res)
    scale = max(1.0, M.linf(LK), M.linf(rhs36))
    rep.add(judged("section3", "3.6", "rewrite L_K g = RHS + (4 Gamma/m) E", rL, tol_rw * scale,
                   linf=rL, l2=M.l2(res)))

    # (e) trace forms, valid for any K
    K2 = M.tensor_norm2(K)
    G2 = M.tensor_norm2(dG)
    lapG = M.laplacian(gamma)
    R = M.scalar_curvature()
    trE = M.trace(E)
    rhs316 = K2 / gamma - G2 / gamma - R * gamma * (4.0 / m) + 2.0 * lapG + gamma * (4.0 * lam * n / m)
    t16 = 2.0 * divK - rhs316 - trE * gamma * (4.0 / m)
    s16 = max(1.0, M.linf(rhs316))
    tL = M.linf(t16)
    rep.add(judged("section3", "3.16", "trace of the rewrite", tL, tol * s16, linf=tL, l2=M.l2(t16)))
    inv = 1.0 / gamma
    rhs317 = (
        K2 * inv * inv
        - G2 * inv * inv
        + 2.0 * lapG * inv
        + 4.0 * lam * n / m
        + (4.0 / m) * trE
        - 2.0 * divK * inv
    )
    t17 = (4.0 / m) * R - rhs317
    tL = M.linf(t17)
    rep.add(judged("section3", "3.17", "trace divided by Gamma", tL, tol * max(1.0, M.linf(rhs317)),
                   linf=tL, l2=M.l2(t17)))

    # (f) directional derivative of the divided trace
    lhs318 = (2.0 / m) * gamma * M.directional(R, K)
    rhs318 = 0.5 * gamma * M.directional(rhs317, K)
    t18 = lhs318 - rhs318
    tL = M.linf(t18)
    rep.add(judged("section3", "3.18", "derivative along K", tL,
                   tol * max(1.0, M.linf(lhs318), M.linf(rhs318)), linf=tL, l2=M.l2(t18)))

    # (b)-(d) divergence pieces, which assume div K = 0 for the integrals
    pieces_ok = divK_inf <= TOL_DIVK_PRE
    why = f"|div K|_inf = {divK_inf:.3e} exceeds {TOL_DIVK_PRE:g}"
    terms = {
        "3.8": M.square(Kf) / gamma,
        "3.9": -1.0 * (M.square(dG) / gamma),
        "3.10": ric * gamma * (-4.0 / m),
        "3.11": 2.0 * hess,
    }
    KK = M.covariant_along(K, K)
    GG = M.covariant_along(gradG, gradG)
    dR = M.gradient(R)
    ricG = M.contract(ric, gradG)
    KG = M.pair(dG, K)
    formulas = {
        "3.8": KK / gamma - Kf * KG * inv * inv + Kf * divK * inv,
        "3.9": -1.0 * (dG * lapG * inv) - GG * inv + dG * G2 * inv * inv,
        "3.10": ricG * (-4.0 / m) - dR * gamma * (2.0 / m),
        "3.11": 2.0 * ricG + 2.0 * M.gradient(lapG),
    }
    for tag in terms:
        direct = M.div_sym(terms[tag])
        diff = direct - formulas[tag]
        dL = M.linf(diff)
        name = PIECE_NAMES[tag]
        if pieces_ok:
            rep.add(judged("section3", tag, name, dL, tol * max(1.0, M.linf(direct)), linf=dL, l2=M.l2(diff)))
        else:
            rep.add(inapplicable("section3", tag, name, why, linf=dL))

    metric_term = M.metric * gamma * (4.0 * lam / m)
    assembled = sum((formulas[t] for t in ("3.9", "3.10", "3.11")), formulas["3.8"]) + dG * (4.0 * lam / m)
    lhs312 = M.pair(M.div_sym(LK - corr), K)
    rhs312 = M.pair(assembled, K)
    t12 = lhs312 - rhs312
    tL = M.linf(t12)
    name = "assembled divergence contracted with K"
    if pieces_ok:
        rep.add(judged("section3", "3.12", name, tL,
                       tol * max(1.0, M.linf(lhs312), M.linf(rhs312)), linf=tL, l2=M.l2(t12)))
    else:
        rep.add(inapplicable("section3", "3.12", name, why, linf=tL))

    # (d) Stokes entries
    f14 = M.pair(M.div_sym(metric_term), K)
    f15 = 2.0 * M.directional(lapG, K)
    i14, i15 = M.integrate(f14), M.integrate(f15)
    s14 = M.integrate(np.abs(f14.values()))
    s15 = M.integrate(np.abs(f15.values()))
    for tag, val, s, name in (
        ("3.14", i14, s14, "metric term integrates to zero"),
        ("3.15", i15, s15, "Laplacian term integrates to zero"),
    ):
        if pieces_ok:
            rep.add(judged("section3", tag, name, abs(val), tol * max(1.0, s), lhs=val, rhs=0.0))
        else:
            rep.add(inapplicable("section3", tag, name, why, lhs=val, rhs=0.0))
    return rep


def killing_integral_condition(
    M,
    qe: QEData,
    gamma: ScalarField,
    K: VectorField,
    tol: float | None = None,
    tol_solution: float | None = None,
) -> IdentityReport:
    """Killing criterion for ``K`` through ``(m - 2) int Ric(grad Gamma, K)``."""
    tol = TOL_KILLING if tol is None else tol
    m = qe.m
    rep = IdentityReport("killing_integral")
    E = qe_defect(M, qe)
    eL = M.linf(E)
    divK = M.linf(M.div(K))
    gmin = float(np.min(gamma.values()))
    reasons = []
    if eL > solution_tolerance(qe, tol_solution):
        reasons.append(f"not a solution (|E|_inf = {eL:.3e})")
    if divK > TOL_DIVK_PRE:
        reasons.append(f"|div K|_inf = {divK:.3e}")
    if not gmin > 0:
        reasons.append(f"Gamma not positive (min {gmin:.3e})")

    coef = (2.0 * m - 4.0) / m
    L = M.lie_derivative(K)
    energy = -0.5 * M.integrate(M.tensor_norm2(L))
    div_term = M.integrate(M.pair(M.div_sym(L), K))
    I = M.integrate(M.pair(M.contract(M.ricci(), M.grad(gamma)), K))
    lie = M.linf(L)
    rep.scalars.update(I=I, coefficient=coef, energy=energy, div_term=div_term, lie_K_linf=lie,
                       divK_linf=divK, E_linf=eL)
    if reasons:
        rep.add(inapplicable("killing_integral", "3.19", "integral balance", "; ".join(reasons),
                             lhs=energy, rhs=coef * I))
        return rep

    scale = max(1.0, abs(energy), abs(coef * I), abs(div_term))
    res = max(abs(energy - coef * I), abs(div_term - energy))
    rep.add(judged("killing_integral", "3.19", "integral balance", res, tol * scale,
                   lhs=energy, rhs=coef * I, note=f"int div(L_K g)(K) = {div_term:.6e}"))
    lie_tol = tol * max(1.0, M.linf(K))
    rep.add(biconditional("killing_integral", "T1.3", "K Killing iff (m-2) I = 0",
                          abs((m - 2.0) * I), lie, tol * scale, lie_tol,
                          note=f"(m-2) I = {(m - 2.0) * I:.3e}, |L_K g|_inf = {lie:.3e}"))
    if m == 2:
        rep.add(judged("killing_integral", "3.20", "m = 2: K is Killing", lie, lie_tol, linf=lie,
                       note=f"coefficient (2m-4)/m = {coef!r}"))
    else:
        rep.add(skipped("killing_integral", "3.20", "m = 2: K is Killing", "m != 2"))
    dX = M.linf(M.div(qe.X))
    gsd = M.sd(gamma)
    if dX <= tol and gsd <= constant_tolerance(M, gamma, tol):
        lieX = M.linf(M.lie_derivative(qe.X))
        rep.add(judged("killing_integral", "C1.4", "div X = 0 with constant Gamma: X Killing", lieX,
                       tol * max(1.0, M.linf(qe.X)), linf=lieX))
    return rep
