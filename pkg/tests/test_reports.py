"""Canonical JSON, CSV, atomic writes, and the SVG heatmap renderer."""

import json
import math
import os

import numpy as np
import pytest

import holocomp as h


# ---------------------------------------------------------------------------
# sanitize


def test_sanitize_numpy_scalars_and_arrays():
    out = h.sanitize(
        {
            "f": np.float64(2.5),
            "i": np.int32(7),
            "b": np.bool_(True),
            "arr": np.array([1, 2]),
            "nested": [np.float32(0.5), (1, 2)],
        }
    )
    assert out == {"f": 2.5, "i": 7, "b": True, "arr": [1, 2], "nested": [0.5, [1, 2]]}
    assert type(out["f"]) is float
    assert type(out["i"]) is int
    assert type(out["b"]) is bool


def test_sanitize_nonfinite_to_none():
    assert h.sanitize(math.inf) is None
    assert h.sanitize(-math.inf) is None
    assert h.sanitize(float("nan")) is None
    assert h.sanitize(complex(math.inf, 0)) is None


def test_sanitize_complex_to_pair():
    assert h.sanitize(1 + 2j) == [1.0, 2.0]
    assert h.sanitize(np.complex128(0.5 - 0.25j)) == [0.5, -0.25]


def test_sanitize_rejects_opaque_objects():
    with pytest.raises(TypeError):
        h.sanitize({"x": object()})


# ---------------------------------------------------------------------------
# canonical JSON


def test_canonical_json_sorted_compact_newline():
    b = h.canonical_json_bytes({"b": 1, "a": [1.5, None, True]})
    assert b == b'{"a":[1.5,null,true],"b":1}\n'


def test_canonical_json_nan_becomes_null():
    assert h.canonical_json_bytes({"v": float("nan")}) == b'{"v":null}\n'


def test_canonical_json_is_deterministic():
    obj = {"z": np.array([0.25, 0.5]), "a": {"k": np.float64(3.0)}}
    assert h.canonical_json_bytes(obj) == h.canonical_json_bytes(obj)


# ---------------------------------------------------------------------------
# CSV


def test_csv_bytes_cell_conventions():
    b = h.csv_bytes(["a", "b"], [[1.5, None], [True, "x"]])
    assert b == b"a,b\n1.5,\n1,x\n"


def test_csv_refuses_cells_that_need_quoting():
    with pytest.raises(ValueError):
        h.csv_bytes(["a"], [["x,y"]])


def test_write_csv_round_trip(tmp_path):
    p = tmp_path / "t.csv"
    h.write_csv(str(p), ["i", "v"], [(0, 0.5), (1, 0.25)])
    assert p.read_bytes() == b"i,v\n0,0.5\n1,0.25\n"


# ---------------------------------------------------------------------------
# atomic writes


def test_write_json_report_round_trip(tmp_path):
    p = tmp_path / "r.json"
    out = h.write_json_report(str(p), {"k": np.float32(1.25)})
    assert out == str(p)
    assert p.read_bytes() == b'{"k":1.25}\n'
    assert json.loads(p.read_text()) == {"k": 1.25}


def test_write_atomic_leaves_no_temp_files(tmp_path):
    p = tmp_path / "sub" / "r.bin"
    h.write_atomic(str(p), b"payload")
    assert p.read_bytes() == b"payload"
    leftovers = [n for n in os.listdir(p.parent) if n.startswith(".tmp")]
    assert leftovers == []


def test_write_atomic_overwrites_in_place(tmp_path):
    p = tmp_path / "r.bin"
    h.write_atomic(str(p), b"one")
    h.write_atomic(str(p), b"two")
    assert p.read_bytes() == b"two"


# ---------------------------------------------------------------------------
# heatmap


def sample_report():
    return {
        "grid": [[0.0, 1.0], [0.5, 0.25]],
        "x_label": "c",
        "y_label": "r",
    }


def test_heatmap_is_deterministic_svg(tmp_path):
    p1 = tmp_path / "a.svg"
    p2 = tmp_path / "b.svg"
    h.emit_heatmap(sample_report(), str(p1))
    h.emit_heatmap(sample_report(), str(p2))
    data = p1.read_bytes()
    assert data == p2.read_bytes()
    text = data.decode("utf-8")
    assert text.startswith("<svg")
    assert text.rstrip().endswith("</svg>")
    # darkest palette stop colors the minimum cell
    assert "#440154" in text
    assert "date" not in text.lower()


def test_heatmap_marks_flags_and_missing(tmp_path):
    rep = {
        "grid": [[0.0, None], [0.5, 0.25]],
        "flags": [[0, 0], [1, 0]],
    }
    p = tmp_path / "f.svg"
    h.emit_heatmap(rep, str(p))
    text = p.read_text()
    # two gray cells: the None and the flagged one
    assert text.count('fill="#999999"') == 2
    # unflagged maximum gets the circle marker
    assert "<circle" in text


@pytest.mark.parametrize("bad", [{}, {"grid": []}, {"grid": [[1], [2, 3]]}])
def test_heatmap_rejects_unusable_reports(bad, tmp_path):
    with pytest.raises(h.UnsupportedReportError):
        h.emit_heatmap(bad, str(tmp_path / "x.svg"))
