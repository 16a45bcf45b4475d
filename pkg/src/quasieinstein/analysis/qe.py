"""The quasi-Einstein defect and the constant-scalar-curvature checks.

All functions accept either a grid :class:`MetricField` or an
:class:`AnalyticManifold` as ``M``; both expose the same operator API.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from quasieinstein.analysis.report import (
    IdentityReport,
    biconditional,
    inapplicable,
    judged,
    skipped,
)
from quasieinstein.geometry.fields import ScalarField, SymTensorField, VectorField

TOL_SOLUTION = 1e-8
TOL_CONSTANT = 1e-8
TOL_TRACE = 1e-12
TOL_LEMMA = 1e-8
TOL_SECTION2 = 1e-8
TOL_STRUCTURE = 1e-8
TOL_EIGEN = 1e-7


@dataclass(frozen=True)
class QEData:
    """Parameters of a candidate triple: ``m``, ``lam``, ``X`` and optional ``gamma``."""

    m: float
    lam: float
    X: VectorField
    gamma: ScalarField | None = None

    def __post_init__(self):
        if self.m == 0 or not np.isfinite(self.m):
            raise ValueError("m must be a nonzero real number")
        if self.gamma is not None and not np.min(self.gamma.values()) > 0:
            raise ValueError("gamma must be positive everywhere")

    @property
    def manifold(self):
        return self.X.manifold


@dataclass
class QEResidual:
    E: SymTensorField
    trace_residual: ScalarField
    report: IdentityReport


def qe_defect(M, qe: QEData) -> SymTensorField:
    """``E = Ric + L_X g / 2 - X* ⊗ X* / m - lam g``."""
    X = qe.X
    return (
        M.ricci()
        + 0.5 * M.lie_derivative(X)
        - M.square(M.flat(X)) * (1.0 / qe.m)
        - M.metric * qe.lam
    )


def solution_tolerance(qe: QEData, tol_solution: float | None = None) -> float:
    return (TOL_SOLUTION if tol_solution is None else tol_solution) * max(1.0, abs(qe.lam))


def constant_tolerance(M, f: ScalarField, tol: float | None = None) -> float:
    return (TOL_CONSTANT if tol is None else tol) * max(1.0, abs(M.mean(f)))


def qe_residual(M, qe: QEData, tol: float | None = None) -> QEResidual:
    """Evaluate the defect ``E`` and the traced equation.

    The trace residual ``R + div X - |X|^2/m - lam n`` is computed from
    independent operators (divergence form, not the trace of ``L_X g``) and
    compared with ``tr_g E``.
    """
    X, m, lam, n = qe.X, qe.m, qe.lam, M.n
    E = qe_defect(M, qe)
    R = M.scalar_curvature()
    divX = M.div(X)
    X2 = M.tensor_norm2(X)
    tr = R + divX - X2 * (1.0 / m) - lam * n

    rep = IdentityReport("qe_residual")
    tol_E = solution_tolerance(qe, tol)
    eL, e2 = M.linf(E), M.l2(E)
    rep.add(judged("qe_residual", "1.1", "defect E", eL, tol_E, linf=eL, l2=e2))

    diff = M.trace(E) - tr
    scale = max(1.0, M.linf(R), M.linf(divX), M.linf(X2) / abs(m), abs(lam) * n)
    dL = M.linf(diff)
    rep.add(judged("qe_residual", "2.3", "trace of E vs traced equation", dL,
                   TOL_TRACE * scale, linf=dL, l2=M.l2(diff)))

    c = lam * n - R
    rep.scalars.update(
        E_linf=eL,
        E_l2=e2,
        R_mean=M.mean(R),
        R_sd=M.sd(R),
        c=M.mean(c),
        c_sd=M.sd(c),
        lie_X_linf=M.linf(M.lie_derivative(X)),
    )
    return QEResidual(E, tr, rep)


def lemma21_check(M, X: VectorField, tol: float | None = None) -> IdentityReport:
    """Integral and pointwise forms of ``int (div X)^2 = -int X(div X)``."""
    tol = TOL_LEMMA if tol is None else tol
    d = M.div(X)
    Xd = M.directional(d, X)
    lhs = M.integrate(d * d)
    rhs = -M.integrate(Xd)

    rep = IdentityReport("lemma21")
    rep.add(judged("lemma21", "2.1", "integral identity", abs(lhs - rhs),
                   tol * max(1.0, abs(lhs)), lhs=lhs, rhs=rhs))
    pw = M.div(X * d) - d * d - Xd
    pL = M.linf(pw)
    scale = max(1.0, M.linf(d) ** 2)
    rep.add(judged("lemma21", "2.2", "pointwise product rule", pL, tol * scale,
                   linf=pL, l2=M.l2(pw)))
    rep.scalars.update(int_divX_sq=lhs, minus_int_X_divX=rhs)
    return rep


def _bgkw_sides(M, X, m, lam, sqnorm: ScalarField, d: ScalarField, LL: ScalarField):
    """Both sides of the divergence identity for triples, with ``|X|^2`` given."""
    lhs = (2.0 / m) * M.laplacian(sqnorm) + (2.0 / m) * M.directional(sqnorm, X) - (1.0 / m + 0.5) * LL
    rhs = (
        -M.laplacian(d)
        + (4.0 / m + 1.0) * M.directional(d, X)
        - 2.0 * lam * d
        + (4.0 / m**2) * sqnorm * d
        + (2.0 / m) * d * d
    )
    return lhs, rhs


def section2_suite(
    M,
    qe: QEData,
    c: float | None = None,
    tol: float | None = None,
    tol_solution: float | None = None,
) -> IdentityReport:
    """Identities of the constant-scalar-curvature argument.

    Parameters
    ----------
    c : float, optional
        Constant used in the substitution check. Defaults to the mean of
        ``lam n - R``. The substitution check is pure algebra and holds for
        any ``c``; the integral entries need a solution with constant ``R``.
    """
    X, m, lam, n = qe.X, qe.m, qe.lam, M.n
    tol = TOL_SECTION2 if tol is None else tol
    rep = IdentityReport("section2")
    E = qe_defect(M, qe)
    eL = M.linf(E)
    is_solution = eL <= solution_tolerance(qe, tol_solution)
    R = M.scalar_curvature()
    cfield = lam * n - R
    c_mean, c_sd = M.mean(cfield), M.sd(cfield)
    if c is None:
        c = c_mean

    d = M.div(X)
    L = M.lie_derivative(X)
    LL = M.tensor_norm2(L)
    X2 = M.tensor_norm2(X)

    # (a) identity for triples, on the actual |X|^2
    lhs, rhs = _bgkw_sides(M, X, m, lam, X2, d, LL)
    diff = lhs - rhs
    dL, d2 = M.linf(diff), M.l2(diff)
    note = f"|E|_inf = {eL:.3e}"
    if is_solution:
        scale = max(1.0, M.linf(lhs), M.linf(rhs))
        rep.add(judged("section2", "2.4", "identity on a solution", dL, tol * scale,
                       linf=dL, l2=d2, note=note))
    else:
        rep.add(inapplicable("section2", "2.4", "identity on a solution",
                             "not a solution; " + note, linf=dL, l2=d2))

    # (b) substitution |X|^2 -> m div X - m c, valid for any fields and any c
    phi = m * d - m * c
    lhs_a, rhs_a = _bgkw_sides(M, X, m, lam, phi, d, LL)
    form_a = lhs_a - rhs_a
    lap_d, Xd = M.laplacian(d), M.directional(d, X)
    form_b = (
        3.0 * lap_d
        + (1.0 - 4.0 / m) * Xd
        - (1.0 / m + 0.5) * LL
        - (-2.0 * lam - 4.0 * c / m) * d
        - (6.0 / m) * d * d
    )
    sub = form_a - form_b
    sL = M.linf(sub)
    scale = max(1.0, M.linf(lap_d), M.linf(Xd), M.linf(LL), M.linf(d) ** 2, abs(lam * c) * M.linf(d))
    rep.add(judged("section2", "2.5", "substitution consistency", sL, tol * scale,
                   linf=sL, l2=M.l2(sub), note=f"c = {c:.6g}"))

    # (c) integrated forms, which need a solution with constant R
    const_R = M.sd(R) <= constant_tolerance(M, R, tol)
    i_Xd = M.integrate(Xd)
    i_LL = M.integrate(LL)
    i_dd = M.integrate(d * d)
    sides = {
        "2.6": ((1.0 - 4.0 / m) * i_Xd, (1.0 / m + 0.5) * i_LL + (6.0 / m) * i_dd),
        "2.7": (-(1.0 + 2.0 / m) * i_dd, (0.5 + 1.0 / m) * i_LL),
        "2.8": (-2.0 * i_dd, i_LL),
    }
    names = {
        "2.6": "integrated identity",
        "2.7": "integrated identity after integration by parts",
        "2.8": "integrated identity, normalized",
    }
    for tag, (a, b) in sides.items():
        name = names[tag]
        if tag == "2.8" and m == -2:
            rep.add(skipped("section2", tag, name, "skipped: m = -2"))
        elif not is_solution:
            rep.add(inapplicable("section2", tag, name, "not a solution; " + note, lhs=a, rhs=b))
        elif not const_R:
            rep.add(inapplicable("section2", tag, name,
                                 f"scalar curvature not constant (sd {M.sd(R):.3e})", lhs=a, rhs=b))
        else:
            rep.add(judged("section2", tag, name, abs(a - b), tol * max(1.0, abs(a), abs(b)),
                           lhs=a, rhs=b))
    rep.scalars.update(c=c_mean, c_sd=c_sd, R_sd=M.sd(R), E_linf=eL, c_used=c)
    return rep


def theorem11_check(
    M,
    qe: QEData,
    tol: float | None = None,
    tol_solution: float | None = None,
) -> IdentityReport:
    """Constant scalar curvature versus ``X`` Killing on a solution.

    With ``m = -2`` the equivalence is outside its stated range; the
    incompressible case (``div X = 0`` implies Killing) is checked instead.
    """
    tol = TOL_CONSTANT if tol is None else tol
    rep = IdentityReport("theorem11")
    X = qe.X
    E = qe_defect(M, qe)
    eL = M.linf(E)
    R = M.scalar_curvature()
    sd_R = M.sd(R)
    lie = M.linf(M.lie_derivative(X))
    normX = M.scalar(M.pointwise_norm(X))
    sd_X = M.sd(normX)
    div_X = M.linf(M.div(X))
    rep.scalars.update(R_sd=sd_R, lie_X_linf=lie, absX_sd=sd_X, divX_linf=div_X, E_linf=eL)

    name = "constant R iff X Killing"
    if eL > solution_tolerance(qe, tol_solution):
        rep.add(inapplicable("theorem11", "T1.1", name, f"not a solution: |E|_inf = {eL:.3e}"))
        return rep
    if qe.m == -2:
        rep.add(skipped("theorem11", "T1.1", name, "out of theorem scope (m = -2)"))
        if div_X <= tol:
            rep.add(judged("theorem11", "C1.4", "div X = 0 implies X Killing", lie, tol, linf=lie))
        else:
            rep.add(skipped("theorem11", "C1.4", "div X = 0 implies X Killing", "div X does not vanish"))
        return rep

    tol_R = constant_tolerance(M, R, tol)
    rep.add(biconditional("theorem11", "T1.1", name, sd_R, lie, tol_R, tol,
                          note=f"sd(R) = {sd_R:.3e}, |L_X g|_inf = {lie:.3e}"))
    if lie <= tol:
        rep.add(judged("theorem11", "T1.1", "|X| constant when Killing", sd_X,
                       constant_tolerance(M, normX, tol)))
    return rep


def _ricci_eigenvalues(M) -> np.ndarray:
    """Eigenvalues of ``Ric`` relative to ``g`` at every node, ascending."""
    n = M.n
    g = M.metric.values().reshape(n, n, -1)
    ric = M.ricci().values().reshape(n, n, -1)
    g = np.moveaxis(g, -1, 0)
    ric = np.moveaxis(ric, -1, 0)
    Linv = np.linalg.inv(np.linalg.cholesky(g))
    A = Linv @ ric @ np.swapaxes(Linv, 1, 2)
    return np.linalg.eigvalsh(0.5 * (A + np.swapaxes(A, 1, 2)))


def structure_checks(
    M,
    qe: QEData,
    tol: float | None = None,
    tol_solution: float | None = None,
) -> IdentityReport:
    """Consequences of the equation for Einstein, Killing and gradient fields."""
    tol = TOL_STRUCTURE if tol is None else tol
    rep = IdentityReport("structure")
    X, m, lam, n = qe.X, qe.m, qe.lam, M.n
    E = qe_defect(M, qe)
    eL = M.linf(E)
    if eL > solution_tolerance(qe, tol_solution):
        rep.add(inapplicable("structure", "1.1", "solution precondition", f"not a solution: |E|_inf = {eL:.3e}"))
        return rep
    ric = M.ricci()
    R = M.scalar_curvature()
    Xflat = M.flat(X)
    normX = M.linf(X)
    lie = M.linf(M.lie_derivative(X))
    scale = max(1.0, abs(lam))

    # (a) Einstein metrics carry no field unless n = 1
    traceless = M.linf(ric - M.metric * R * (1.0 / n))
    name = "Einstein implies X = 0"
    if n < 2:
        rep.add(skipped("structure", "C1.2", name, "n = 1 exemption"))
    elif traceless > tol * scale:
        rep.add(skipped("structure", "C1.2", name, f"not Einstein (|Ric - R g/n|_inf = {traceless:.3e})"))
    else:
        rep.add(judged("structure", "C1.2", name, normX, tol * scale, linf=normX))
    if lie <= tol:
        # equation without the Lie term
        red = ric - M.square(Xflat) * (1.0 / m) - M.metric * lam
        rL = M.linf(red)
        rep.add(judged("structure", "1.3", "reduced equation for Killing X", rL, tol * scale, linf=rL))

    # (b) Ricci eigenvalues lam (n-1 times) and lam + |X|^2/m
    name = "Ricci eigenvalues"
    if lie > tol:
        rep.add(skipped("structure", "R2.3", name, "X is not Killing"))
    else:
        ev = _ricci_eigenvalues(M)
        X2 = M.tensor_norm2(X).values().reshape(-1)
        expected = np.full(ev.shape, float(lam))
        expected[:, -1] += X2 / m
        expected.sort(axis=1)
        err = float(np.max(np.abs(ev - expected)))
        rep.add(judged("structure", "R2.3", name, err, TOL_EIGEN * scale, linf=err))

    # (c) parallel Ricci iff parallel X, and the derivative identity
    nab_ric = M.covariant_derivative(ric)
    nab_X = M.covariant_derivative(X)
    a, b = M.linf(nab_ric), M.linf(nab_X)
    rep.add(biconditional("structure", "R2.3", "parallel Ric iff parallel X", a, b, tol * scale, tol,
                          note=f"|nabla Ric| = {a:.3e}, |nabla X| = {b:.3e}"))
    if lie <= tol:
        ident = M.outer(nab_X, Xflat) + M.permute(M.outer(Xflat, nab_X), (1, 0, 2))
        res = nab_ric - ident * (1.0 / m)
        r = M.linf(res)
        rep.add(judged("structure", "R2.3", "derivative of Ric for Killing X", r, tol * scale, linf=r))

    # gradient solutions with Killing X are trivial
    name = "gradient Killing field is trivial"
    dX = M.linf(nab_X - M.permute(nab_X, (1, 0)))
    periods = M.periods(Xflat)
    exact = dX <= tol and all(abs(p) <= tol for p in periods)
    if not exact:
        rep.add(skipped("structure", "T1.1", name, "X is not a gradient"))
    elif lie > tol:
        rep.add(skipped("structure", "T1.1", name, "X is not Killing"))
    else:
        rep.add(judged("structure", "T1.1", name, normX, tol, linf=normX))
    rep.scalars.update(
        ricci_traceless_linf=traceless,
        nabla_ric_linf=a,
        nabla_X_linf=b,
        dX_linf=dX,
        lie_X_linf=lie,
    )
    return rep
