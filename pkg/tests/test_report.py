import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
from hypothesis import given, strategies as st

from harnacklab.report import SCHEMA_VERSION, dumps, format_csv, to_jsonable, write_json


@dataclass
class _Box:
    a: float
    b: np.ndarray


def test_conversion():
    obj = {2: np.float64(1.5), "x": np.arange(3), "nan": math.nan, "box": _Box(np.inf, np.array([True]))}
    out = to_jsonable(obj)
    assert out == {"2": 1.5, "x": [0, 1, 2], "nan": None, "box": {"a": None, "b": [True]}}
    text = dumps(obj)
    assert text == dumps(obj) and json.loads(text)["2"] == 1.5


def test_write_json_adds_schema(tmp_path):
    path = write_json(tmp_path / "r.json", {"v": 1})
    assert json.loads(path.read_text())["schema_version"] == SCHEMA_VERSION


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_csv_floats_round_trip(vals):
    text = format_csv(["i", "v"], [(i, v) for i, v in enumerate(vals)])
    rows = list(csv.reader(io.StringIO(text)))[1:]
    assert [float(r[1]) for r in rows] == vals


def test_csv_dict_rows_and_missing():
    text = format_csv(["a", "b"], [{"a": 1, "b": None}, {"a": np.int64(2), "b": 0.1}])
    assert text == "a,b\n1,\n2,0.1\n"
