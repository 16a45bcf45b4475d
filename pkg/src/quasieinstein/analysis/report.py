"""Named residual entries and the reports that collect them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

TAGS = frozenset(
    ["1.1", "1.3"]
    + [f"2.{i}" for i in range(1, 9)]
    + ["3.1"]
    + [f"3.{i}" for i in range(5, 21)]
    + ["T1.1", "T1.3", "C1.2", "C1.4", "R2.3"]
)

PASS, FAIL, SKIPPED, INAPPLICABLE = "pass", "fail", "skipped", "inapplicable"
VERDICTS = (PASS, FAIL, SKIPPED, INAPPLICABLE)


@dataclass
class Entry:
    """One checked relation.

    ``residual`` is the number compared against ``tolerance``; ``linf``/``l2``
    are pointwise norms and ``lhs``/``rhs`` integral sides, when meaningful.
    """

    check: str
    tag: str
    name: str
    residual: float | None
    tolerance: float | None
    verdict: str
    linf: float | None = None
    l2: float | None = None
    lhs: float | None = None
    rhs: float | None = None
    note: str = ""

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown equation tag {self.tag!r}")
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "paper_tag": self.tag,
            "name": self.name,
            "residual": _clean(self.residual),
            "tolerance": _clean(self.tolerance),
            "verdict": self.verdict,
            "linf": _clean(self.linf),
            "l2": _clean(self.l2),
            "lhs": _clean(self.lhs),
            "rhs": _clean(self.rhs),
            "note": self.note,
        }


def _clean(x):
    """JSON-safe float: NaN and infinities become strings."""
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x + 0.0  # no negative zero in output


def judged(check, tag, name, residual, tolerance, **kw) -> Entry:
    """Entry whose verdict follows from ``residual <= tolerance``."""
    residual = float(residual)
    ok = residual <= tolerance  # NaN compares false
    return Entry(check, tag, name, residual, float(tolerance), PASS if ok else FAIL, **kw)


def biconditional(check, tag, name, a: float, b: float, tol_a: float, tol_b: float, **kw) -> Entry:
    """``(a <= tol_a) <=> (b <= tol_b)``, reported as a residual.

    When both sides hold the residual is the larger normalized side; when
    exactly one holds it is the larger (so it exceeds 1); when neither holds
    the equivalence is satisfied vacuously and the residual is 0.
    """
    ra, rb = a / tol_a, b / tol_b
    if ra > 1 and rb > 1:
        res, note = 0.0, "both sides false"
    else:
        res, note = max(ra, rb), ""
    note = "; ".join(s for s in (kw.pop("note", ""), note) if s)
    return judged(check, tag, name, res, 1.0, note=note, **kw)


def skipped(check, tag, name, reason, **kw) -> Entry:
    return Entry(check, tag, name, None, None, SKIPPED, note=reason, **kw)


def inapplicable(check, tag, name, reason, **kw) -> Entry:
    return Entry(check, tag, name, None, None, INAPPLICABLE, note=reason, **kw)


@dataclass
class IdentityReport:
    """Entries of one check plus derived scalars."""

    check: str
    entries: list[Entry] = field(default_factory=list)
    scalars: dict[str, float] = field(default_factory=dict)

    def add(self, entry: Entry) -> Entry:
        self.entries.append(entry)
        return entry

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, tag_or_name: str) -> Entry:
        """First entry whose name or tag matches."""
        for e in self.entries:
            if e.name == tag_or_name:
                return e
        for e in self.entries:
            if e.tag == tag_or_name:
                return e
        raise KeyError(tag_or_name)

    @property
    def ok(self) -> bool:
        """No entry failed or was inapplicable."""
        return all(e.verdict in (PASS, SKIPPED) for e in self.entries)

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "entries": [e.as_dict() for e in self.entries],
            "scalars": {k: _clean(v) for k, v in self.scalars.items()},
        }
