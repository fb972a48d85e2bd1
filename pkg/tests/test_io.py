import json

import numpy as np
import pytest

from diabatic import io


def test_csv_formatting_and_metadata(tmp_path):
    meta = io.metadata({"seed": 1}, "trace")
    path = io.write_csv(tmp_path / "t.csv", ("a", "b", "c"), [(1, 0.1 + 0.2, True), (2, float("nan"), False)], meta)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# tool=diabatic version=")
    assert "config_sha256=" in lines[0]
    assert lines[1] == "a,b,c"
    assert lines[2] == "1,0.3,true"
    assert lines[3] == "2,nan,false"
    header, rows = io.read_csv(path)
    assert header == ["a", "b", "c"] and len(rows) == 2


def test_twelve_significant_digits(tmp_path):
    path = io.write_csv(tmp_path / "x.csv", ("x",), [(1 / 3,), (12345.678901234567,)])
    assert path.read_text().splitlines()[1:] == ["0.333333333333", "12345.6789012"]


def test_config_hash_ignores_key_order_and_threads():
    a = {"seed": 1, "dt": 0.005, "threads": 1}
    b = {"threads": 4, "dt": 0.005, "seed": 1}
    assert io.config_hash(a) == io.config_hash(b)
    assert io.config_hash(a) != io.config_hash({"seed": 2, "dt": 0.005})


def test_json_handles_numpy_and_non_finite(tmp_path):
    path = io.write_json(tmp_path / "r.json", {"x": np.float64(1.5), "y": np.arange(3), "z": np.nan, "b": np.bool_(True)})
    doc = json.loads(path.read_text())
    assert doc == {"x": 1.5, "y": [0, 1, 2], "z": None, "b": True}


def test_counts_round_trip(tmp_path):
    counts = np.arange(2 * 3 * 4).reshape(2, 3, 4)
    records = io.counts_records([0, 1], [1, 5, 10], counts)
    assert records[1] == (0, 1, "01", 1)
    path = io.write_counts(tmp_path / "c.csv", records, {"tool": "diabatic"})
    assert io.read_counts(path) == records


@pytest.mark.parametrize(
    "body",
    ["circuit_id,m,bits,count\n0,1,00,3\n", "circuit_id,m,bitstring,count\n0,1,0a,3\n", "circuit_id,m,bitstring,count\n0,1,00\n",
     "circuit_id,m,bitstring,count\n0,1,00,-1\n"],
)
def test_malformed_counts_rejected(tmp_path, body):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(ValueError):
        io.read_counts(path)


def test_matrix_round_trip(tmp_path):
    u = np.array([[1, 1j], [0.5, -2]])
    assert np.array_equal(io.load_matrix(io.save_matrix(tmp_path / "u.json", u)), u)
    np.save(tmp_path / "u.npy", u)
    assert np.array_equal(io.load_matrix(tmp_path / "u.npy"), u)


@pytest.mark.parametrize("text", ['{"imag": [[0]]}', '{"real": [1, 2, 3]}', "[1, 2]"])
def test_bad_matrix_files(tmp_path, text):
    path = tmp_path / "m.json"
    path.write_text(text)
    with pytest.raises(ValueError):
        io.load_matrix(path)
