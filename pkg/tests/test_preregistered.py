"""The committed reference file must match a fresh oracle run."""

import json
from pathlib import Path

import numpy as np
import pytest

import preregister


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}/{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}/{i}")
    else:
        yield prefix, obj


@pytest.mark.slow
def test_reference_file_is_reproducible():
    fresh = dict(_flatten(json.loads(json.dumps(preregister.compute()))))
    stored = dict(_flatten(json.loads((Path(__file__).parent / "preregistered.json").read_text())))
    assert fresh.keys() == stored.keys()
    for key, val in stored.items():
        if isinstance(val, float):
            assert np.isclose(fresh[key], val, rtol=1e-9, atol=0), key
        else:
            assert fresh[key] == val, key
