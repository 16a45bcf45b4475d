"""Command-line driver: read a spec file, run checks, emit JSON or CSV.

Spec files are sectioned ``key = value`` text::

    [manifold]
    generator = torus_of_revolution
    R0 = 2
    r = 1

    [field]
    X1 = cos(u2)
    X2 = 0

    [params]
    m = 3
    lambda = 1
    gamma = solve

    [checks]
    qe_residual = 1e-8
    section3

Exit codes: 0 every non-skipped entry passed, 1 some entry failed or was
inapplicable, 2 input or parse error, 3 solver non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import re
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from quasieinstein import __version__, algebra, expr, kernels, zoo
from quasieinstein.analysis import killing, qe
from quasieinstein.analysis.report import PASS, SKIPPED, IdentityReport, judged, skipped

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3
SECTIONS = ("manifold", "grid", "field", "params", "algebra", "checks")
CSV_COLUMNS = ("check", "paper_tag", "linf", "l2", "lhs", "rhs", "tolerance", "verdict")


class SpecError(ValueError):
    """Input error located at a spec section and line."""

    def __init__(self, message: str, section: str | None = None, line: int | None = None):
        where = []
        if section:
            where.append(f"[{section}]")
        if line:
            where.append(f"line {line}")
        super().__init__(f"{' '.join(where)}: {message}" if where else message)
        self.section = section
        self.line = line


# --------------------------------------------------------------------------
# spec file


@dataclass
class Item:
    key: str
    value: str | None
    line: int


@dataclass
class SpecFile:
    sections: dict[str, list[Item]] = field(default_factory=dict)
    header_lines: dict[str, int] = field(default_factory=dict)

    def items(self, name: str) -> list[Item]:
        return self.sections.get(name, [])

    def mapping(self, name: str) -> dict[str, Item]:
        out = {}
        for it in self.items(name):
            if it.value is None:
                raise SpecError(f"expected 'key = value', got {it.key!r}", name, it.line)
            out[it.key] = it
        return out


_HEADER = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")


def parse_spec(text: str) -> SpecFile:
    """Split ``text`` into sections of keyed items, keeping line numbers.

    ``#`` starts a comment. Lines without ``=`` are bare keys (used for
    check names). Duplicate sections or keys are errors.
    """
    spec = SpecFile()
    current = None
    seen: set[tuple[str, str]] = set()
    for no, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        h = _HEADER.match(line)
        if h:
            current = h.group(1).lower()
            if current not in SECTIONS:
                raise SpecError(f"unknown section {current!r}; known: {', '.join(SECTIONS)}", current, no)
            if current in spec.sections:
                raise SpecError("section appears twice", current, no)
            spec.sections[current] = []
            spec.header_lines[current] = no
            continue
        if current is None:
            raise SpecError("content before the first [section] header", None, no)
        if "=" in line:
            key, value = (s.strip() for s in line.split("=", 1))
            if not key:
                raise SpecError("empty key", current, no)
        else:
            key, value = line, None
        if (current, key) in seen:
            raise SpecError(f"duplicate key {key!r}", current, no)
        seen.add((current, key))
        spec.sections[current].append(Item(key, value, no))
    present = [s for s in ("manifold", "algebra") if s in spec.sections]
    if len(present) != 1:
        raise SpecError("exactly one of [manifold] and [algebra] must be present")
    return spec


def _number(item: Item, section: str, env: dict | None = None) -> float:
    """A real from a constant expression (parameters in ``env`` allowed)."""
    try:
        return float(expr.evaluate(expr.parse(item.value), env or {}))
    except expr.ExprError as exc:
        raise SpecError(f"{item.key}: {exc}", section, item.line) from None


def _expression(item: Item, section: str) -> expr.Expr:
    try:
        return expr.parse(item.value)
    except expr.ExprError as exc:
        raise SpecError(f"{item.key}: {exc}", section, item.line) from None


# --------------------------------------------------------------------------
# run context


@dataclass
class Context:
    """Everything a check may need, built lazily from the spec file."""

    M: object = None
    qe: qe.QEData | None = None
    gamma_item: Item | None = None
    gamma_kind: str = "const"
    algebra: algebra.LieAlgebraModel | None = None
    m: float | None = None
    lam: float | None = None
    X_alg: np.ndarray | None = None
    X_field: object = None
    _gamma: object = None
    _gamma_report: IdentityReport | None = None

    def need_qe(self, section="params"):
        if self.qe is None:
            raise SpecError("this check needs m and lambda", section)
        return self.qe

    def gamma(self):
        if self._gamma is None:
            self._resolve_gamma()
        return self._gamma

    def _resolve_gamma(self):
        data = self.need_qe()
        M = self.M
        rep = IdentityReport("gamma")
        line = self.gamma_item.line if self.gamma_item else None
        if self.gamma_kind == "solve":
            sol = killing.gamma_solve(M, data.X, data.m)
            gamma = sol.gamma
            rep.scalars.update(mu=sol.mu, min_gamma=sol.margin, iterations=float(sol.iterations),
                               operator_norm=sol.operator_norm, residual=sol.residual)
        else:
            gamma = self._gamma_from_expression(line)
        try:
            K, divK = killing.killing_candidate(M, data, gamma)
        except ValueError as exc:
            raise SpecError(str(exc), "params", line) from None
        d = M.linf(divK)
        rep.add(judged("gamma", "3.1", "div K = 0", d, killing.TOL_DIVK_PRE, linf=d, l2=M.l2(divK)))
        self._gamma = (gamma, K)
        self._gamma_report = rep

    def _gamma_from_expression(self, line):
        M = self.M
        e = expr.parse("1") if self.gamma_item is None else _expression(self.gamma_item, "params")
        if M.kind == "grid":
            env = {f"u{i + 1}": M.coords[i] for i in range(M.n)}
            try:
                val = expr.evaluate(e, env)
            except expr.ExprError as exc:
                raise SpecError(f"gamma: {exc}", "params", line) from None
            return M.scalar(np.broadcast_to(val, M.chart.shape).copy())
        try:
            return M.constant(float(expr.evaluate(e, {})))
        except expr.UnboundSymbolError as exc:
            raise SpecError(f"gamma must be constant on {M.name}: {exc}", "params", line) from None


def _build_algebra(spec: SpecFile, ctx: Context):
    sec = spec.mapping("algebra")
    preset = sec.pop("preset", None)
    d_item = sec.pop("d", None)
    Q_item = sec.pop("Q", None)
    Q = None
    if Q_item is not None:
        try:
            rows = [[float(v) for v in row.split()] for row in Q_item.value.split(";")]
            Q = np.array(rows)
        except ValueError:
            raise SpecError("Q rows are numbers separated by spaces, rows by ';'", "algebra", Q_item.line) from None
    c_items = {}
    for key, it in sec.items():
        m = re.fullmatch(r"c\.(\d+)\.(\d+)\.(\d+)", key)
        if not m:
            raise SpecError(f"unknown key {key!r}", "algebra", it.line)
        c_items[tuple(int(g) - 1 for g in m.groups())] = it
    try:
        if preset is not None:
            if c_items:
                raise SpecError("give either a preset or structure constants", "algebra", preset.line)
            if preset.value == "su2":
                L = algebra.LieAlgebraModel.su2(Q)
            elif preset.value == "abelian":
                d = int(_number(d_item, "algebra")) if d_item else (len(Q) if Q is not None else 3)
                L = algebra.LieAlgebraModel.abelian(d, Q)
            else:
                raise SpecError(f"unknown preset {preset.value!r}; known: su2, abelian", "algebra", preset.line)
        else:
            if d_item is None:
                raise SpecError("need 'd' or a preset", "algebra", spec.header_lines["algebra"])
            d = int(_number(d_item, "algebra"))
            c = np.zeros((d, d, d))
            for (i, j, k), it in c_items.items():
                if max(i, j, k) >= d or min(i, j, k) < 0:
                    raise SpecError(f"index out of range 1..{d}", "algebra", it.line)
                v = _number(it, "algebra")
                c[k, i, j], c[k, j, i] = v, -v  # key c.i.j.k: [e_i, e_j] has e_k coefficient v
            L = algebra.LieAlgebraModel(c, np.eye(d) if Q is None else Q, "custom")
    except algebra.AlgebraError as exc:
        raise SpecError(str(exc), "algebra", spec.header_lines["algebra"]) from None
    ctx.algebra = L
    params = spec.mapping("params")
    if "m" in params:
        ctx.m = _number(params["m"], "params")
        if ctx.m == 0:
            raise SpecError("m must be nonzero", "params", params["m"].line)
    if "lambda" in params:
        ctx.lam = _number(params["lambda"], "params")
    fields = spec.mapping("field")
    if fields:
        X = np.zeros(L.d)
        for key, it in fields.items():
            if not re.fullmatch(r"X\d+", key) or not 1 <= int(key[1:]) <= L.d:
                raise SpecError(f"field keys are X1..X{L.d}", "field", it.line)
            X[int(key[1:]) - 1] = _number(it, "field")
        ctx.X_alg = X


def _build_manifold(spec: SpecFile, grid_override: int | None, ctx: Context):
    sec = spec.mapping("manifold")
    if "generator" not in sec:
        raise SpecError("missing 'generator'", "manifold", spec.header_lines["manifold"])
    gen = sec.pop("generator")
    name = gen.value
    if name not in zoo.GENERATORS:
        raise SpecError(f"unknown generator {name!r}; known: {', '.join(zoo.GENERATORS)}", "manifold", gen.line)
    N = zoo.DEFAULT_N
    grid = spec.mapping("grid")
    for key, it in grid.items():
        if key != "N":
            raise SpecError(f"unknown key {key!r}", "grid", it.line)
        N = int(_number(it, "grid"))
        if N < 8 or N % 2:
            raise SpecError("N must be even and at least 8", "grid", it.line)
    if grid_override is not None:
        N = grid_override
    params, expressions = {}, {}
    for key, it in sec.items():
        if re.fullmatch(r"g\d\d", key):
            if name != "custom_chart":
                raise SpecError("metric components need generator = custom_chart", "manifold", it.line)
            _expression(it, "manifold")
            expressions[key] = it.value
        else:
            params[key] = _number(it, "manifold")
    try:
        built = zoo.construct(zoo.GeneratorSpec(name, params, N, expressions))
    except expr.ExprError as exc:
        raise SpecError(str(exc), "manifold", gen.line) from None
    except ValueError as exc:
        raise SpecError(str(exc), "manifold", gen.line) from None
    out = built if isinstance(built, zoo.Construction) else zoo.Construction(built)
    M = out.manifold
    ctx.M = M
    X = out.qe.X if out.qe else None
    m = out.qe.m if out.qe else None
    lam = out.qe.lam if out.qe else None

    fsec = spec.mapping("field")
    if fsec:
        X = _build_field(M, fsec)
    pm = spec.mapping("params")
    for key, it in pm.items():
        if key not in ("m", "lambda", "gamma"):
            raise SpecError(f"unknown key {key!r}", "params", it.line)
    if "m" in pm:
        m = _number(pm["m"], "params")
        if m == 0:
            raise SpecError("m must be nonzero", "params", pm["m"].line)
    if "lambda" in pm:
        lam = _number(pm["lambda"], "params")
    if X is None:
        X = M.zero_vector() if M.kind == "analytic" else M.vector(np.zeros((M.n,) + M.chart.shape))
    if m is not None and lam is not None:
        ctx.qe = qe.QEData(m, lam, X)
    elif "m" in pm or "lambda" in pm:
        it = pm.get("m") or pm.get("lambda")
        raise SpecError("give both m and lambda", "params", it.line)
    ctx.X_field = X
    g = pm.get("gamma")
    ctx.gamma_item = g
    if g is not None and g.value.strip() == "solve":
        if M.kind != "grid":
            raise SpecError("gamma = solve needs a grid manifold", "params", g.line)
        ctx.gamma_kind = "solve"
    elif g is None and M.kind == "grid":
        ctx.gamma_kind = "solve"
    else:
        ctx.gamma_kind = "expr"


def _build_field(M, fsec: dict[str, Item]):
    if "potential" in fsec:
        it = fsec.pop("potential")
        if fsec:
            bad = next(iter(fsec.values()))
            raise SpecError("give either 'potential' or components X1..Xn", "field", bad.line)
        if M.kind != "grid":
            raise SpecError("gradient fields need a grid manifold", "field", it.line)
        env = {f"u{i + 1}": M.coords[i] for i in range(M.n)}
        try:
            f = expr.evaluate(_expression(it, "field"), env)
        except expr.ExprError as exc:
            raise SpecError(f"potential: {exc}", "field", it.line) from None
        return M.grad(M.scalar(np.broadcast_to(f, M.chart.shape).copy()))
    comps: list = [0.0] * M.n
    for key, it in fsec.items():
        if not re.fullmatch(r"X\d+", key) or not 1 <= int(key[1:]) <= M.n:
            raise SpecError(f"field keys are X1..X{M.n} or 'potential'", "field", it.line)
        e = _expression(it, "field")
        try:
            if M.kind == "grid":
                env = {f"u{i + 1}": M.coords[i] for i in range(M.n)}
                comps[int(key[1:]) - 1] = np.broadcast_to(expr.evaluate(e, env), M.chart.shape)
            else:
                comps[int(key[1:]) - 1] = float(expr.evaluate(e, {}))
        except expr.UnboundSymbolError as exc:
            raise SpecError(f"{key}: only constant components on {M.name} ({exc})", "field", it.line) from None
        except expr.ExprError as exc:
            raise SpecError(f"{key}: {exc}", "field", it.line) from None
    if M.kind == "grid":
        return M.vector(np.array([np.asarray(c, dtype=float) * np.ones(M.chart.shape) for c in comps]))
    try:
        return M.parallel_vector(comps)
    except ValueError as exc:
        line = min(it.line for it in fsec.values())
        raise SpecError(str(exc), "field", line) from None


# --------------------------------------------------------------------------
# check registry


@dataclass(frozen=True)
class Check:
    name: str
    tags: str
    description: str
    kind: str  # "manifold" or "algebra"
    run: object


def _c_qe_residual(ctx, tol, tols):
    return qe.qe_residual(ctx.M, ctx.need_qe(), tol).report


def _c_lemma21(ctx, tol, tols):
    return qe.lemma21_check(ctx.M, ctx.X_field, tol)


def _c_section2(ctx, tol, tols):
    return qe.section2_suite(ctx.M, ctx.need_qe(), tol=tol, tol_solution=tols.get("solution"))


def _c_theorem11(ctx, tol, tols):
    return qe.theorem11_check(ctx.M, ctx.need_qe(), tol, tols.get("solution"))


def _c_structure(ctx, tol, tols):
    return qe.structure_checks(ctx.M, ctx.need_qe(), tol, tols.get("solution"))


def _c_gamma(ctx, tol, tols):
    ctx.gamma()
    rep = ctx._gamma_report
    if tol is not None:
        e = rep.entries[0]
        rep = IdentityReport(rep.check, [judged("gamma", e.tag, e.name, e.residual, tol, linf=e.linf, l2=e.l2)],
                             dict(rep.scalars))
    return rep


def _c_section3(ctx, tol, tols):
    gamma, K = ctx.gamma()
    return killing.section3_suite(ctx.M, ctx.need_qe(), gamma, K, tol, tols.get("rewrite"))


def _c_lie_div_energy(ctx, tol, tols):
    _, K = ctx.gamma()
    return killing.lie_div_energy(ctx.M, K, tol)


def _c_killing_integral(ctx, tol, tols):
    gamma, K = ctx.gamma()
    return killing.killing_integral_condition(ctx.M, ctx.need_qe(), gamma, K, tol, tols.get("solution"))


def _c_algebra_curvature(ctx, tol, tols):
    L = ctx.algebra
    curv = algebra.algebra_curvature(L)
    rep = IdentityReport("algebra_curvature")
    jac = algebra.jacobi_residual(L.c)
    rep.add(judged("algebra_curvature", "1.1", "Jacobi identity", jac, algebra.JACOBI_TOL if tol is None else tol))
    for i in range(L.d):
        for j in range(i, L.d):
            rep.scalars[f"ric_{i + 1}{j + 1}"] = float(curv.ricci[i, j])
    rep.scalars["R"] = curv.scalar
    return rep


def _c_algebra_residual(ctx, tol, tols):
    L = ctx.algebra
    if ctx.m is None or ctx.lam is None or ctx.X_alg is None:
        raise SpecError("algebra_residual needs m, lambda and a [field] X1..Xd")
    tol = algebra.SOLVE_TOL if tol is None else tol
    rep = IdentityReport("algebra_residual")
    E = algebra.algebraic_qe_residual(L, ctx.X_alg, ctx.m, ctx.lam)
    res = float(np.max(np.abs(E)))
    rep.add(judged("algebra_residual", "1.1", "defect E", res, tol, linf=res))
    kn = algebra.q_norm(L, algebra.lie_derivative_metric(L, ctx.X_alg))
    if res <= tol:
        # left-invariant data have constant scalar curvature
        rep.add(judged("algebra_residual", "T1.1", "X Killing", kn, algebra.KILLING_TOL, linf=kn))
    rep.scalars.update(lie_X_norm=kn)
    return rep


def _c_qe_solve(ctx, tol, tols):
    L = ctx.algebra
    if ctx.m is None:
        raise SpecError("qe_solve needs m")
    tol = algebra.SOLVE_TOL if tol is None else tol
    rep = IdentityReport("qe_solve")
    sols = algebra.qe_solve(L, ctx.m)
    for k, s in enumerate(sols, start=1):
        rep.add(judged("qe_solve", "1.1", f"solution {k} defect", s.residual, tol, linf=s.residual))
        rep.add(judged("qe_solve", "T1.1", f"solution {k} Killing", s.killing_norm, algebra.KILLING_TOL,
                       linf=s.killing_norm))
        rep.scalars[f"solution_{k}_lambda"] = s.lam
        for i, x in enumerate(s.X, start=1):
            rep.scalars[f"solution_{k}_X{i}"] = x
    if not sols:
        rep.add(skipped("qe_solve", "1.1", "solutions", "no solution found from the start grid"))
    rep.scalars["count"] = float(len(sols))
    return rep


REGISTRY = {
    c.name: c
    for c in (
        Check("qe_residual", "1.1 2.3", "defect E and its trace", "manifold", _c_qe_residual),
        Check("lemma21", "2.1 2.2", "integral and pointwise divergence identity", "manifold", _c_lemma21),
        Check("section2", "2.4-2.8", "constant scalar curvature identities", "manifold", _c_section2),
        Check("theorem11", "T1.1 C1.4", "constant R iff X Killing", "manifold", _c_theorem11),
        Check("structure", "C1.2 1.3 R2.3 T1.1", "Einstein, reduced and parallel-Ricci consequences",
              "manifold", _c_structure),
        Check("gamma", "3.1", "Gamma and div K of the Killing candidate", "manifold", _c_gamma),
        Check("section3", "3.6-3.18", "rewrite in terms of K and its traces", "manifold", _c_section3),
        Check("lie_div_energy", "3.13", "energy identity for K", "manifold", _c_lie_div_energy),
        Check("killing_integral", "3.19 3.20 T1.3 C1.4", "integral Killing criterion", "manifold",
              _c_killing_integral),
        Check("algebra_curvature", "1.1", "Jacobi identity and Ricci of a left-invariant metric", "algebra",
              _c_algebra_curvature),
        Check("algebra_residual", "1.1 T1.1", "algebraic defect at given X, lambda", "algebra",
              _c_algebra_residual),
        Check("qe_solve", "1.1 T1.1", "all algebraic solutions and their Killing test", "algebra", _c_qe_solve),
    )
}
DEFAULT_MANIFOLD_CHECKS = ("qe_residual", "lemma21", "section2", "theorem11", "section3", "lie_div_energy",
                           "killing_integral")
TOLERANCE_NAMES = ("solution", "rewrite")


# --------------------------------------------------------------------------
# run and emit


@dataclass
class RunReport:
    spec_sha256: str
    target: str
    options: dict
    reports: list[IdentityReport]
    timings: dict[str, float] | None = None

    @property
    def verdict(self) -> str:
        ok = all(e.verdict in (PASS, SKIPPED) for r in self.reports for e in r.entries)
        return "pass" if ok else "fail"

    def as_dict(self) -> dict:
        out = {
            "tool": "quasieinstein",
            "version": __version__,
            "spec_sha256": self.spec_sha256,
            "kernel_backend": kernels.BACKEND,
            "target": self.target,
            "options": self.options,
            "verdict": self.verdict,
            "reports": [r.as_dict() for r in self.reports],
        }
        if self.timings is not None:
            out["timings"] = self.timings
        return out


def _requested_checks(spec: SpecFile, ctx: Context, tol_flags: dict[str, float]):
    kind = "algebra" if ctx.algebra is not None else "manifold"
    items = spec.items("checks")
    if "checks" not in spec.sections:
        if kind == "manifold":
            names = [(n, None, None) for n in DEFAULT_MANIFOLD_CHECKS]
        else:
            names = [("algebra_curvature", None, None)]
            if ctx.X_alg is not None and ctx.lam is not None and ctx.m is not None:
                names.append(("algebra_residual", None, None))
            if ctx.m is not None:
                names.append(("qe_solve", None, None))
    else:
        names = []
        for it in items:
            names.append((it.key, None if it.value is None else _number(it, "checks"), it.line))
    out, seen_tols = [], {}
    for name, tol, line in names:
        if name in TOLERANCE_NAMES:
            seen_tols[name] = tol
            continue
        chk = REGISTRY.get(name)
        if chk is None:
            raise SpecError(f"unknown check {name!r}; see --list-checks", "checks", line)
        if chk.kind != kind:
            raise SpecError(f"check {name!r} needs a [{chk.kind}] section", "checks", line)
        out.append((chk, tol_flags.get(name, tol)))
    tols = {k: tol_flags.get(k, seen_tols.get(k)) for k in TOLERANCE_NAMES}
    return out, tols


def run(text: str, *, grid: int | None = None, tol_flags: dict[str, float] | None = None,
        timings: bool = False) -> RunReport:
    """Execute a spec. Raises :class:`SpecError` or :class:`killing.SolverError`."""
    tol_flags = dict(tol_flags or {})
    for name in tol_flags:
        if name not in REGISTRY and name not in TOLERANCE_NAMES:
            raise SpecError(f"--tol: unknown name {name!r}")
    spec = parse_spec(text)
    ctx = Context()
    if "algebra" in spec.sections:
        _build_algebra(spec, ctx)
        target = ctx.algebra.label
    else:
        _build_manifold(spec, grid, ctx)
        target = ctx.M.name
    checks, tols = _requested_checks(spec, ctx, tol_flags)
    reports, clock = [], {}
    for chk, tol in checks:
        t0 = time.perf_counter()
        reports.append(chk.run(ctx, tol, tols))
        clock[chk.name] = time.perf_counter() - t0
    options = {"grid": grid, "tol": {k: tol_flags[k] for k in sorted(tol_flags)}}
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return RunReport(digest, target, options, reports, clock if timings else None)


def emit(report: RunReport, fmt: str = "json") -> str:
    """Serialize a run as JSON (full) or CSV (one row per entry)."""
    if fmt == "json":
        return json.dumps(report.as_dict(), indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.reports:
        for e in r.entries:
            d = e.as_dict()
            w.writerow(["" if d[k] is None else (repr(d[k]) if isinstance(d[k], float) else d[k])
                        for k in CSV_COLUMNS])
    return buf.getvalue()


def exit_code(report: RunReport) -> int:
    return EXIT_OK if report.verdict == "pass" else EXIT_FAIL


def _tol_flag(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    try:
        if not sep:
            raise ValueError
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qe-verify", description="Check quasi-Einstein identities on test manifolds.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--list-checks", action="store_true", help="list registered checks and exit")
    sub = p.add_subparsers(dest="command")
    r = sub.add_parser("run", help="run the checks of a spec file")
    r.add_argument("spec", help="spec file (UTF-8)")
    r.add_argument("--out", help="write the report here instead of stdout")
    r.add_argument("--format", choices=("json", "csv"), default="json")
    r.add_argument("--grid", type=int, help="override the grid resolution")
    r.add_argument("--tol", type=_tol_flag, action="append", default=[], metavar="NAME=VALUE",
                   help="tolerance for a check, or 'solution' / 'rewrite' (repeatable)")
    r.add_argument("--list-checks", action="store_true", help="list registered checks and exit")
    r.add_argument("--timings", action="store_true", help="add wall-clock seconds per check to JSON")
    return p


def list_checks() -> str:
    width = max(len(n) for n in REGISTRY)
    lines = [f"{c.name:<{width}}  {c.kind:<8}  [{c.tags}]  {c.description}" for c in REGISTRY.values()]
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.list_checks:
        sys.stdout.write(list_checks())
        return EXIT_OK
    if args.command != "run":
        _parser().print_usage(sys.stderr)
        return EXIT_INPUT
    if args.grid is not None and (args.grid < 8 or args.grid % 2):
        print("error: --grid must be even and at least 8", file=sys.stderr)
        return EXIT_INPUT
    try:
        with open(args.spec, "rb") as fh:
            text = fh.read().decode("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: {args.spec}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        report = run(text, grid=args.grid, tol_flags=dict(args.tol), timings=args.timings)
    except SpecError as exc:
        print(f"error: {args.spec}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except killing.SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    doc = emit(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(doc)
    else:
        sys.stdout.write(doc)
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
