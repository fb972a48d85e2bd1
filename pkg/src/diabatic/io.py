"""File formats: CSV tables, JSON documents and bitstring-count tables.

CSV files start with one ``#`` comment line carrying metadata (tool
version, config hash), then a header row; floats use 12 significant
digits. JSON is written with sorted keys so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from diabatic import __version__


# Execution-only settings that cannot change any result.
_UNHASHED = ("threads",)


def config_hash(config: dict) -> str:
    relevant = {k: v for k, v in config.items() if k not in _UNHASHED and not k.startswith("_")}
    canonical = json.dumps(relevant, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def metadata(config: dict, command: str) -> dict[str, str]:
    return {"tool": "diabatic", "version": __version__, "command": command, "config_sha256": config_hash(config)}


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return format(value, ".12g")
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]], meta: dict | None = None) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        if meta:
            fh.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [row for row in reader if row]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def write_json(path, obj, meta: dict | None = None) -> Path:
    path = Path(path)
    doc = dict(_jsonable(obj))
    if meta:
        doc["metadata"] = meta
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


def write_series(path, m, values, stderr, meta: dict | None = None) -> Path:
    return write_csv(path, ("m", "value", "stderr"), zip(m, values, stderr), meta)


COUNT_HEADER = ("circuit_id", "m", "bitstring", "count")


def write_counts(path, records: Iterable[tuple[int, int, str, int]], meta: dict | None = None) -> Path:
    return write_csv(path, COUNT_HEADER, records, meta)


def read_counts(path) -> list[tuple[int, int, str, int]]:
    """Parse a (circuit_id, m, bitstring, count) table; raises ValueError on malformed rows."""
    header, rows = read_csv(path)
    if tuple(h.strip() for h in header) != COUNT_HEADER:
        raise ValueError(f"expected header {','.join(COUNT_HEADER)}, got {','.join(header)}")
    out = []
    for n, row in enumerate(rows, start=2):
        if len(row) != 4:
            raise ValueError(f"row {n}: expected 4 fields")
        cid, m, bits, count = (c.strip() for c in row)
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"row {n}: bitstring {bits!r} is not binary")
        if int(count) < 0:
            raise ValueError(f"row {n}: negative count")
        out.append((int(cid), int(m), bits, int(count)))
    return out


def counts_records(circuit_ids, depths, counts) -> list[tuple[int, int, str, int]]:
    """Flatten counts[circuit, depth, outcome] into records; bitstrings are qubit A first."""
    counts = np.asarray(counts)
    width = int(round(math.log2(counts.shape[-1])))
    return [
        (int(cid), int(m), format(k, f"0{width}b"), int(counts[i, j, k]))
        for i, cid in enumerate(circuit_ids)
        for j, m in enumerate(depths)
        for k in range(counts.shape[-1])
    ]


def load_matrix(path) -> np.ndarray:
    """Read a complex matrix from .npy or from JSON {"real": [[...]], "imag": [[...]]}."""
    path = Path(path)
    if path.suffix == ".npy":
        u = np.load(path, allow_pickle=False)
    else:
        doc = json.loads(path.read_text())
        if not isinstance(doc, dict) or "real" not in doc:
            raise ValueError("matrix JSON needs a 'real' array and optionally 'imag'")
        u = np.asarray(doc["real"], dtype=float) + 1j * np.asarray(doc.get("imag", 0.0), dtype=float)
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"matrix must be square, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError("matrix has non-finite entries")
    return u


def save_matrix(path, u) -> Path:
    u = np.asarray(u, dtype=complex)
    return write_json(path, {"real": u.real, "imag": u.imag})
