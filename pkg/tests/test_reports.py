import numpy as np
import pytest

from diagglt import Symbol
from diagglt.reports import (csv_text, dumps, read_csv, read_symbol_csv, symbol_to_csv,
                             tail_verdict, write_csv)


def test_tail_verdict_rules():
    sizes = (64, 128, 256, 512)
    assert tail_verdict(sizes, (9, 0.003, 0.001, 0.002), 0.01)        # all tail values small
    assert tail_verdict(sizes, (9, 0.5, 0.1, 0.005), 0.01)            # monotone, last small
    assert tail_verdict(sizes, (1, 0.4, 0.2, 0.1), 0.01)              # decays like n^-1
    assert not tail_verdict(sizes, (1, 0.3, 0.3, 0.3), 0.01)          # flat
    assert not tail_verdict(sizes, (1, 0.1, 0.3, 0.2), 0.01)          # not monotone
    assert not tail_verdict(sizes, (1, 1, 1, float("nan")), 0.01)
    v = tail_verdict(sizes, (0.4, 0.3, 0.28, 0.26), 0.01)             # too slow
    assert not v and v.label == "FAIL" and v.tail_window == 3


def test_csv_round_trip(tmp_path):
    p = write_csv(tmp_path / "t.csv", ["n", "v"], [(1, 0.1), (2, 1e-300)], {"b": 1, "a": [1]})
    header, cols, rows = read_csv(p)
    assert header == {"a": [1], "b": 1} and cols == ["n", "v"]
    assert [float(r[1]) for r in rows] == [0.1, 1e-300]
    assert csv_text(["a"], [(True,)]).splitlines() == ["a", "true"]


def test_json_is_stable():
    assert dumps({"b": np.float64(1.5), "a": np.arange(2), "c": 1j}) == dumps(
        {"c": 1j, "a": [0, 1], "b": 1.5})


def test_symbol_csv_round_trip(tmp_path):
    f = Symbol.from_grid([0.5, 2.0, -1.0, 3.0])
    symbol_to_csv(f, tmp_path / "s.csv")
    g = read_symbol_csv(tmp_path / "s.csv")
    assert np.array_equal(g.values, f.values)
    (tmp_path / "bad.csv").write_text("x,re,im\n0.3,1,0\n")
    with pytest.raises(ValueError):
        read_symbol_csv(tmp_path / "bad.csv")
