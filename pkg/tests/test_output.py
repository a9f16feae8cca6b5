import json
import math

import numpy as np
import pytest

from iplsim.analysis import analyze, eigenstate_map
from iplsim.eigensolver import eigh_tridiagonal
from iplsim.hamiltonian import CellParams, assemble
from iplsim.profiles import linear_profile
from iplsim.output import (
    STATE_HEADER,
    read_pgm,
    sha256_file,
    summary_document,
    write_json,
    write_pgm,
    write_spectrum_csv,
    write_state_csv,
    write_sweep_csv,
)


@pytest.fixture(scope="module")
def report():
    h = assemble(linear_profile(math.pi / 4, 1.0, 20), CellParams(1.0, 2.0, 0.2))
    return analyze(eigh_tridiagonal(h), expect_two_bands=True)


@pytest.fixture(scope="module")
def eig():
    h = assemble(linear_profile(math.pi / 4, 1.0, 20), CellParams(1.0, 2.0, 0.2))
    return eigh_tridiagonal(h)


class TestStateCsv:
    def test_header_and_row_count(self, report, tmp_path):
        path = write_state_csv(report, tmp_path / "states.csv")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == STATE_HEADER
        assert len(lines) == report.size + 1

    def test_floats_round_trip(self, report, tmp_path):
        path = write_state_csv(report, tmp_path / "states.csv")
        rows = path.read_text().splitlines()[1:]
        for k, row in enumerate(rows):
            fields = row.split(",")
            assert int(fields[0]) == k
            assert float(fields[1]) == report.values[k]
            assert float(fields[3]) == report.measures[k].ipr

    def test_last_row_has_empty_spacing(self, report, tmp_path):
        path = write_state_csv(report, tmp_path / "states.csv")
        last = path.read_text().splitlines()[-1].split(",")
        assert last[2] == ""

    def test_rewrite_is_byte_identical(self, report, tmp_path):
        a = write_state_csv(report, tmp_path / "a.csv").read_bytes()
        b = write_state_csv(report, tmp_path / "b.csv").read_bytes()
        assert a == b

    def test_lf_endings_only(self, report, tmp_path):
        raw = write_state_csv(report, tmp_path / "states.csv").read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")

    def test_subdomain_and_multiplet_columns(self, report, tmp_path):
        path = write_state_csv(report, tmp_path / "states.csv")
        rows = [r.split(",") for r in path.read_text().splitlines()[1:]]
        assert {r[10] for r in rows} <= {"A", "B", "C"}
        assert [int(r[11]) for r in rows] == sorted(int(r[11]) for r in rows)


def test_spectrum_csv(tmp_path):
    path = write_spectrum_csv(np.array([1.5, 2.25]), tmp_path / "spectrum.csv")
    assert path.read_text() == "index,eigenvalue\n0,1.5\n1,2.25\n"


class TestSweepCsv:
    def test_rows_and_error_column(self, tmp_path):
        rows = [(0.5, 0.25, ""), (1.0, None, "boom")]
        path = write_sweep_csv(rows, tmp_path / "sweep.csv")
        text = path.read_text().splitlines()
        assert text[0] == "lf,fraction,error"
        assert text[1] == "0.5,0.25,"
        assert text[2] == "1.0,,boom"


class TestPgm:
    def test_header_and_round_trip(self, eig, tmp_path):
        emap = eigenstate_map(eig, range(0, 20))
        path = write_pgm(emap, tmp_path / "map.pgm")
        raw = path.read_bytes()
        assert raw.startswith(b"P5\n40 20\n255\n")
        pixels = read_pgm(path)
        assert pixels.shape == (20, 40)
        expected = np.rint(emap.rows * 255.0).astype(np.uint8)
        assert np.array_equal(pixels, expected)

    def test_every_row_reaches_white(self, eig, tmp_path):
        # per-row renormalization puts one 255 pixel in every row
        emap = eigenstate_map(eig, range(0, 12))
        pixels = read_pgm(write_pgm(emap, tmp_path / "map.pgm"))
        assert np.all(pixels.max(axis=1) == 255)

    def test_read_rejects_other_formats(self, tmp_path):
        bad = tmp_path / "x.pgm"
        bad.write_bytes(b"P2\n2 2\n255\n0 0 0 0\n")
        with pytest.raises(ValueError):
            read_pgm(bad)


class TestJson:
    def test_canonical_form(self, tmp_path):
        path = write_json({"b": 1, "a": [1.5, None]}, tmp_path / "doc.json")
        assert path.read_text() == '{\n  "a": [\n    1.5,\n    null\n  ],\n  "b": 1\n}\n'

    def test_rejects_nan(self, tmp_path):
        with pytest.raises(ValueError):
            write_json({"x": float("nan")}, tmp_path / "doc.json")

    def test_summary_document_shape(self, report):
        doc = summary_document(report, extras={"preset": "unit-test"})
        assert doc["states"] == report.size
        assert doc["preset"] == "unit-test"
        assert sum(b["size"] for b in doc["bands"]) == report.size
        assert set(doc["subdomain_counts"]) == {"A", "B", "C"}
        assert sum(doc["subdomain_counts"].values()) == report.size
        hist = doc["multiplet_size_histogram"]
        assert sum(int(k) * v for k, v in hist.items()) == report.size
        # document must be serializable in canonical mode
        json.dumps(doc, sort_keys=True, allow_nan=False)

    def test_thresholds_included(self, report):
        doc = summary_document(report)
        assert doc["thresholds"]["tau"] == report.thresholds.tau


def test_sha256_matches_hashlib(tmp_path):
    import hashlib
    p = tmp_path / "blob.bin"
    p.write_bytes(b"isospectral")
    assert sha256_file(p) == hashlib.sha256(b"isospectral").hexdigest()
