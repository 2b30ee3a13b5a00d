import io
import json

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from ptqm.errors import SchemaError, ShapeError
from ptqm.evolution import BrachRecord, brach_sweep
from ptqm.formats import (
    MatrixPayload,
    RunManifest,
    file_digest,
    load_matrix,
    load_vector,
    matrix_to_dict,
    read_csv,
    save_matrix,
    save_vector,
    write_csv,
)


def test_matrix_round_trip(tmp_path, rng):
    m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    path = tmp_path / "m.json"
    save_matrix(path, m)
    assert_array_equal(load_matrix(path), m)
    first = path.read_bytes()
    save_matrix(path, load_matrix(path))
    assert path.read_bytes() == first


def test_vector_round_trip(tmp_path):
    path = tmp_path / "v.json"
    save_vector(path, [1 + 2j, -0.5])
    assert_array_equal(load_vector(path), [1 + 2j, -0.5])


def test_matrix_json_layout():
    data = json.loads(json.dumps(matrix_to_dict([[1, 2j], [3, 4]])))
    assert data == {"dim": 2, "entries": [[1.0, 0.0], [0.0, 2.0], [3.0, 0.0], [4.0, 0.0]]}


def test_antilinear_flag_round_trips(tmp_path):
    path = tmp_path / "a.json"
    save_matrix(path, np.eye(2), conjugates=True)
    assert json.loads(path.read_text())["conjugates"] is True
    assert_array_equal(load_matrix(path), np.eye(2))


def test_length_mismatch_names_the_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dim": 2, "entries": [[1, 0], [0, 0], [0, 0]]}))
    with pytest.raises(SchemaError) as info:
        load_matrix(path)
    assert info.value.path == str(path)
    assert "dim*dim" in str(info.value)


def test_non_finite_and_bad_field(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"dim": 1, "entries": [[NaN, 0]]}')
    with pytest.raises(SchemaError):
        load_matrix(path)
    path.write_text(json.dumps({"dim": "two", "entries": []}))
    with pytest.raises(SchemaError) as info:
        load_matrix(path)
    assert info.value.field == "dim"


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "dim": 1,\n  "entries": [[1, 0]\n}')
    with pytest.raises(SchemaError) as info:
        load_matrix(path)
    assert info.value.field.startswith("line ")


def test_missing_file(tmp_path):
    with pytest.raises(SchemaError):
        load_matrix(tmp_path / "nope.json")


def test_payload_rejects_non_square_array():
    with pytest.raises(ShapeError):
        MatrixPayload.from_array(np.zeros((2, 3)))


def test_brach_csv_round_trip(tmp_path):
    records = brach_sweep(1.0, [0.1, 0.2, 0.3])
    path = tmp_path / "brach.csv"
    write_csv(path, records)
    text = path.read_text()
    assert text.splitlines()[0] == "alpha,tau_numeric,tau_formula,hermitian_bound,gap,basis_cond"
    assert "\r" not in text
    assert read_csv(path, BrachRecord) == records


def test_csv_to_buffer():
    buf = io.StringIO()
    write_csv(buf, [BrachRecord(alpha=0.0, tau_numeric=1.0, tau_formula=1.0, hermitian_bound=1.0, gap=2.0, basis_cond=1.0)])
    assert buf.getvalue().count("\n") == 2


def test_manifest(tmp_path):
    data = tmp_path / "h.json"
    save_matrix(data, np.eye(2))
    manifest = RunManifest(command="accept", inputs={"h": file_digest(data)}, seed=0, outputs=["report.json"])
    manifest.write(tmp_path / "manifest.json")
    loaded = RunManifest.model_validate_json((tmp_path / "manifest.json").read_text())
    assert loaded == manifest
    assert len(loaded.inputs["h"]) == 64
