import csv
import io

import pytest

from hypnls.report import CSV_COLUMNS, DiagnosticsReport


def test_flags():
    rep = DiagnosticsReport()
    rep.add("x", "a", 1.0, 2.0)
    rep.add("x", "b", 3.0, 2.0)
    rep.add("x", "c", 3.0)
    rep.add("x", "d", 1.0, 2.0, op=">=", advisory=True)
    rep.add("x", "e", float("nan"), 1.0)
    assert [r.flag() for r in rep] == ["pass", "fail", "info", "advisory-fail", "fail"]
    assert [r.quantity for r in rep.failed] == ["b", "e"]
    assert not rep.all_passed


def test_csv_round_trip():
    rep = DiagnosticsReport()
    rep.add("exp", "q", 0.1, 1e-8, meta="has, comma")
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[1] == ["exp", "q", "0.1", "<=1e-08", "fail", "has, comma"]
    assert float(rows[1][2]) == 0.1


def test_lookup_and_ops():
    rep = DiagnosticsReport()
    rep.add("x", "a", 5.0)
    assert rep.value("a") == 5.0
    with pytest.raises(KeyError):
        rep.get("missing")
    with pytest.raises(ValueError):
        rep.add("x", "b", 1.0, 1.0, op="==")
    assert len(DiagnosticsReport().extend(rep)) == 1
