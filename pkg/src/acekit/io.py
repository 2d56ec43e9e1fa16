"""Bit-exact file formats and JSON report serialization.

EMB1 layout (little-endian, 28-byte header):

    offset  size  field
    0       4     magic "EMB1"
    4       4     version, u32 = 1
    8       1     dtype, u8: 0 = float32, 1 = float64
    9       3     reserved, zero
    12      8     n, u64
    20      8     d, u64
    28      -     payload, n*d values, row-major

CSV files always carry a header row ("id,x0,x1,..." when item ids are
present, "x0,x1,..." otherwise) and render floats with 17 significant
digits, enough to round-trip float64 exactly. Item ids that themselves parse
as numbers cannot be told apart from data on re-read; EMB1 is the lossless
format.

All writes go through a temp file in the destination directory followed by
an atomic rename.
"""

from __future__ import annotations

import csv
import json
import os
import struct
import tempfile
from io import StringIO
from typing import Optional

import numpy as np

from .errors import (BadMagic, CsvParseError, IoFailure, NonFiniteValue,
                     NonRepresentable, RaggedCsv, TruncatedFile)
from .matrix import EmbeddingMatrix

MAGIC = b"EMB1"
VERSION = 1
_HEADER = struct.Struct("<4sIB3sQQ")
HEADER_SIZE = _HEADER.size  # 28

_DTYPE_CODES = {"f32": 0, "f64": 1}
_DTYPE_WIDTHS = {0: 4, 1: 8}
_DTYPE_NP = {0: "<f4", 1: "<f8"}


def _atomic_write(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".acekit-", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _encode_emb1(E: EmbeddingMatrix, dtype: str) -> bytes:
    code = _DTYPE_CODES[dtype]
    if code == 0:
        with np.errstate(over="ignore"):
            payload = E.values.astype("<f4")
        if not np.isfinite(payload).all():
            bad = np.argwhere(~np.isfinite(payload))[0]
            raise NonRepresentable(
                f"value at row {bad[0]}, column {bad[1]} does not fit float32"
            )
    else:
        payload = E.values.astype("<f8")
    header = _HEADER.pack(MAGIC, VERSION, code, b"\x00\x00\x00", E.n, E.d)
    return header + np.ascontiguousarray(payload).tobytes()


def _encode_csv(E: EmbeddingMatrix, dtype: str) -> bytes:
    values = E.values
    if dtype == "f32":
        with np.errstate(over="ignore"):
            as32 = values.astype(np.float32)
        if not np.isfinite(as32).all():
            bad = np.argwhere(~np.isfinite(as32))[0]
            raise NonRepresentable(
                f"value at row {bad[0]}, column {bad[1]} does not fit float32"
            )
        values = as32.astype(np.float64)
    buf = StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = [f"x{j}" for j in range(E.d)]
    if E.item_ids is not None:
        header = ["id"] + header
    writer.writerow(header)
    for i in range(E.n):
        row = [format(v, ".17g") for v in values[i]]
        if E.item_ids is not None:
            row = [E.item_ids[i]] + row
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


def write_embeddings(E: EmbeddingMatrix, path: str, format: str = "emb1",
                     dtype: str = "f64") -> None:
    """Write E to disk as EMB1 or CSV.

    Raises:
        NonRepresentable: when dtype is f32 and a value overflows float32.
        IoFailure: on filesystem errors.
    """
    if format not in ("emb1", "csv"):
        raise IoFailure(f"unknown format {format!r}")
    if dtype not in _DTYPE_CODES:
        raise IoFailure(f"unknown dtype {dtype!r}")
    data = _encode_emb1(E, dtype) if format == "emb1" else _encode_csv(E, dtype)
    _atomic_write(path, data)


def _read_emb1(data: bytes, path: str) -> EmbeddingMatrix:
    if len(data) < HEADER_SIZE:
        raise TruncatedFile(f"{path}: {len(data)} bytes is shorter than the "
                            f"{HEADER_SIZE}-byte header")
    magic, version, code, reserved, n, d = _HEADER.unpack(data[:HEADER_SIZE])
    if magic != MAGIC:
        raise BadMagic(f"{path}: magic {magic!r} != {MAGIC!r}")
    if version != VERSION:
        raise BadMagic(f"{path}: unsupported version {version}")
    if code not in _DTYPE_WIDTHS:
        raise BadMagic(f"{path}: unknown dtype code {code}")
    if reserved != b"\x00\x00\x00":
        raise BadMagic(f"{path}: reserved bytes are not zero")
    if n < 1 or d < 1:
        raise BadMagic(f"{path}: invalid dimensions {n}x{d}")
    expected = HEADER_SIZE + n * d * _DTYPE_WIDTHS[code]
    if len(data) != expected:
        raise TruncatedFile(
            f"{path}: file is {len(data)} bytes, header implies {expected}"
        )
    flat = np.frombuffer(data, dtype=_DTYPE_NP[code], offset=HEADER_SIZE)
    values = flat.reshape(n, d).astype(np.float64)
    if not np.isfinite(values).all():
        bad = np.argwhere(~np.isfinite(values))[0]
        raise NonFiniteValue(
            f"{path}: non-finite value at row {bad[0]}, column {bad[1]}"
        )
    return EmbeddingMatrix(values)


def _is_number(field: str) -> bool:
    try:
        float(field)
        return True
    except ValueError:
        return False


def _read_csv(data: bytes, path: str) -> EmbeddingMatrix:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CsvParseError(f"{path}: not valid UTF-8 text: {exc}") from exc
    rows = [row for row in csv.reader(StringIO(text)) if row]
    if not rows:
        raise TruncatedFile(f"{path}: empty CSV")
    if all(not _is_number(f) for f in rows[0]):
        rows = rows[1:]  # header row
        if not rows:
            raise TruncatedFile(f"{path}: CSV has a header but no data rows")
    has_ids = not _is_number(rows[0][0])
    width = len(rows[0])
    item_ids = [] if has_ids else None
    values = np.empty((len(rows), width - (1 if has_ids else 0)))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise RaggedCsv(
                f"{path}: row {i} has {len(row)} fields, expected {width}"
            )
        fields = row
        if has_ids:
            item_ids.append(fields[0])
            fields = fields[1:]
        for j, field in enumerate(fields):
            try:
                values[i, j] = float(field)
            except ValueError as exc:
                raise CsvParseError(
                    f"{path}: row {i}, column {j}: cannot parse {field!r}"
                ) from exc
    if not np.isfinite(values).all():
        bad = np.argwhere(~np.isfinite(values))[0]
        raise NonFiniteValue(
            f"{path}: non-finite value at row {bad[0]}, column {bad[1]}"
        )
    return EmbeddingMatrix(values, item_ids=item_ids)


def read_embeddings(path: str, format: str = "auto") -> EmbeddingMatrix:
    """Load an embedding matrix from EMB1 or CSV.

    In auto mode the format is detected by the magic bytes, with CSV as the
    fallback. 32-bit payloads are widened to float64.

    Raises:
        BadMagic, TruncatedFile, NonFiniteValue, RaggedCsv, CsvParseError,
        IoFailure.
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if format == "auto":
        format = "emb1" if data[:4] == MAGIC else "csv"
    if format == "emb1":
        return _read_emb1(data, path)
    if format == "csv":
        return _read_csv(data, path)
    raise IoFailure(f"unknown format {format!r}")


# --- report JSON ------------------------------------------------------------

REPORT_SCHEMA_VERSION = 1


def _render_json(obj, indent: int = 0) -> str:
    """JSON with floats rendered at 17 significant digits (lossless f64)."""
    pad = "  " * indent
    if obj is None:
        return "null"
    if obj is True or obj is False:
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not np.isfinite(obj):
            raise NonFiniteValue(f"cannot serialize non-finite number {obj}")
        return format(float(obj), ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [_render_json(x, indent + 1) for x in obj]
        if not items:
            return "[]"
        inner = ",\n".join("  " * (indent + 1) + it for it in items)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = []
        for key, value in obj.items():
            parts.append("  " * (indent + 1) + json.dumps(str(key)) + ": "
                         + _render_json(value, indent + 1))
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_report(report: dict) -> str:
    return _render_json(report) + "\n"


def write_report(report: dict, path: str) -> None:
    """Serialize a report dict to pretty JSON with lossless floats."""
    _atomic_write(path, render_report(report).encode("utf-8"))


def build_report(source_path: str, E: EmbeddingMatrix, spectrum,
                 transform: Optional[dict] = None, seed: Optional[int] = None,
                 extras: Optional[dict] = None) -> dict:
    """Assemble the report dict for a SpectrumReport plus optional metrics."""
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "source": {"path": source_path, "n": E.n, "d": E.d},
        "transform": transform,
        "spectrum": {
            "eigenvalues": spectrum.eigenvalues,
            "normalized": spectrum.normalized,
            "spectral_flatness": spectrum.spectral_flatness,
            "effective_rank": spectrum.effective_rank,
            "condition_number": spectrum.condition_number,
        },
    }
    if spectrum.avg_cosine is not None:
        report["avg_cosine"] = spectrum.avg_cosine
    if extras:
        report.update(extras)
    report["seed"] = seed
    return report
