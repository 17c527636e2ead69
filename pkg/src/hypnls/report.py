"""Named diagnostic rows with tolerances, written as CSV."""

from __future__ import annotations

import csv
import io
import math
import operator
from dataclasses import dataclass, field

__all__ = ["Row", "DiagnosticsReport", "CSV_COLUMNS"]

CSV_COLUMNS = ("experiment", "quantity", "value", "tolerance", "pass", "meta")

_OPS = {
    "<=": operator.le,
    ">=": operator.ge,
    "<": operator.lt,
    ">": operator.gt,
}


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    try:
        xf = float(x)
    except (TypeError, ValueError):
        return str(x)
    if math.isnan(xf):
        return "nan"
    return repr(xf)


@dataclass(frozen=True)
class Row:
    """One diagnostic value.

    ``op``/``tolerance`` define the gate ``value op tolerance``; rows
    without a tolerance are advisory and never fail.
    """

    experiment: str
    quantity: str
    value: float
    tolerance: float | None = None
    op: str = "<="
    meta: str = ""
    advisory: bool = False

    @property
    def gated(self) -> bool:
        return self.tolerance is not None and not self.advisory

    @property
    def passed(self) -> bool | None:
        if self.tolerance is None:
            return None
        v = float(self.value)
        if math.isnan(v):
            return False
        return bool(_OPS[self.op](v, float(self.tolerance)))

    def flag(self) -> str:
        p = self.passed
        if p is None:
            return "info"
        if self.advisory:
            return "advisory-pass" if p else "advisory-fail"
        return "pass" if p else "fail"

    def as_csv(self) -> list[str]:
        tol = "" if self.tolerance is None else f"{self.op}{_fmt(self.tolerance)}"
        return [self.experiment, self.quantity, _fmt(self.value), tol, self.flag(), self.meta]


@dataclass
class DiagnosticsReport:
    """Ordered collection of :class:`Row` objects."""

    rows: list = field(default_factory=list)

    def add(self, experiment, quantity, value, tolerance=None, op="<=", meta="", advisory=False) -> Row:
        if op not in _OPS:
            raise ValueError(f"unknown comparison {op!r}")
        row = Row(experiment, quantity, float(value), None if tolerance is None else float(tolerance), op, meta, advisory)
        self.rows.append(row)
        return row

    def extend(self, other: "DiagnosticsReport") -> "DiagnosticsReport":
        self.rows.extend(other.rows)
        return self

    def get(self, quantity: str, experiment: str | None = None) -> Row:
        for row in self.rows:
            if row.quantity == quantity and (experiment is None or row.experiment == experiment):
                return row
        raise KeyError(quantity)

    def value(self, quantity: str) -> float:
        return self.get(quantity).value

    @property
    def failed(self) -> list:
        return [r for r in self.rows if r.gated and not r.passed]

    @property
    def all_passed(self) -> bool:
        return not self.failed

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            w.writerow(row.as_csv())
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)
