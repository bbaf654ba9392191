"""Mask file formats, report serialization, and the experiment config
parser.

Mask formats:

* 2D binary: PGM P5, maxval 255, pixels restricted to {0, 255};
* 2D probability: PGM P5, maxval 65535, big-endian (per the netpbm
  convention), value v read as v/65535;
* 3D: a one-line header ``MSK1 <nx> <ny> <nz> <u8|u16>\\n`` followed by the
  raw little-endian payload, row-major with x fastest; u8 is binary with
  pixels in {0, 255}, u16 a probability map scaled as above.

Reports are written as a CSV and a JSON mirror carrying identical values;
floats are serialized with 17 significant digits so they parse back
bit-exactly.  All files are written to a temp name and atomically renamed,
so failed commands leave no partial reports behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DataError,
    MalformedHeader,
    NonBinaryPixel,
    TruncatedPayload,
)
from .masks import BinaryMask, ProbMap

PGM2D = "pgm2d"
MSK3D = "msk3d"

_U16_MAX = 65535


@dataclass(frozen=True)
class MaskFile:
    path: str
    format: str  # PGM2D | MSK3D
    payload: BinaryMask | ProbMap


def _parse_pgm_header(blob: bytes):
    """Parse the P5 magic plus three header integers, honouring netpbm
    whitespace and # comments.  Returns (width, height, maxval, offset)."""
    if not blob.startswith(b"P5"):
        raise MalformedHeader("not a P5 PGM file")
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(blob) and blob[pos:pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos:pos + 1] == b"#":
            while pos < len(blob) and blob[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace():
            pos += 1
        token = blob[start:pos]
        if not token.isdigit():
            raise MalformedHeader(f"bad header token {token!r}")
        fields.append(int(token))
    if pos >= len(blob) or not blob[pos:pos + 1].isspace():
        raise MalformedHeader("missing whitespace after maxval")
    pos += 1  # exactly one whitespace byte before the raster
    w, h, maxval = fields
    if w < 1 or h < 1:
        raise MalformedHeader(f"bad raster size {w}x{h}")
    return w, h, maxval, pos


def _read_pgm(path: str, blob: bytes) -> MaskFile:
    w, h, maxval, pos = _parse_pgm_header(blob)
    if maxval == 255:
        need = w * h
        raw = blob[pos:]
        if len(raw) < need:
            raise TruncatedPayload(f"expected {need} bytes, found {len(raw)}")
        if len(raw) > need:
            raise MalformedHeader(f"{len(raw) - need} trailing bytes after raster")
        data = np.frombuffer(raw, dtype=np.uint8)
        bad = (data != 0) & (data != 255)
        if bad.any():
            raise NonBinaryPixel(
                f"binary mask contains value {int(data[bad][0])} (only 0/255 allowed)"
            )
        return MaskFile(path, PGM2D, BinaryMask((w, h, 1), (data == 255).astype(np.uint8)))
    if maxval == _U16_MAX:
        need = w * h * 2
        raw = blob[pos:]
        if len(raw) < need:
            raise TruncatedPayload(f"expected {need} bytes, found {len(raw)}")
        if len(raw) > need:
            raise MalformedHeader(f"{len(raw) - need} trailing bytes after raster")
        vals = np.frombuffer(raw, dtype=">u2").astype(np.float64) / _U16_MAX
        return MaskFile(path, PGM2D, ProbMap((w, h, 1), vals))
    raise MalformedHeader(f"unsupported maxval {maxval} (255 or 65535)")


def _read_msk(path: str, blob: bytes) -> MaskFile:
    nl = blob.find(b"\n")
    if nl < 0:
        raise MalformedHeader("missing header line")
    parts = blob[:nl].decode("ascii", errors="replace").split()
    if len(parts) != 5 or parts[0] != "MSK1":
        raise MalformedHeader(f"bad MSK1 header {blob[:nl]!r}")
    try:
        nx, ny, nz = (int(v) for v in parts[1:4])
    except ValueError as exc:
        raise MalformedHeader(f"bad dims in header {blob[:nl]!r}") from exc
    kind = parts[4]
    if min(nx, ny, nz) < 1:
        raise MalformedHeader(f"bad dims {nx}x{ny}x{nz}")
    d = nx * ny * nz
    raw = blob[nl + 1:]
    if kind == "u8":
        need = d
    elif kind == "u16":
        need = 2 * d
    else:
        raise MalformedHeader(f"unknown sample kind {kind!r}")
    if len(raw) < need:
        raise TruncatedPayload(f"expected {need} bytes, found {len(raw)}")
    if len(raw) > need:
        raise MalformedHeader(f"{len(raw) - need} trailing bytes after payload")
    if kind == "u8":
        data = np.frombuffer(raw, dtype=np.uint8)
        bad = (data != 0) & (data != 255)
        if bad.any():
            raise NonBinaryPixel(
                f"binary mask contains value {int(data[bad][0])} (only 0/255 allowed)"
            )
        return MaskFile(path, MSK3D, BinaryMask((nx, ny, nz), (data == 255).astype(np.uint8)))
    vals = np.frombuffer(raw, dtype="<u2").astype(np.float64) / _U16_MAX
    return MaskFile(path, MSK3D, ProbMap((nx, ny, nz), vals))


def read_mask(path: str) -> MaskFile:
    """Load a mask/probability file, detecting the format by its magic."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob.startswith(b"P5"):
        return _read_pgm(path, blob)
    if blob.startswith(b"MSK1"):
        return _read_msk(path, blob)
    raise MalformedHeader("unknown file magic (expected P5 or MSK1)")


def _atomic_write(path: str, blob: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-segloss-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_mask(payload: BinaryMask | ProbMap, path: str, format: str | None = None) -> None:
    """Write a mask or probability map; 2D payloads default to PGM, 3D to
    the MSK1 container.  Probabilities are quantized to 16 bits."""
    nx, ny, nz = payload.dims
    if format is None:
        format = PGM2D if nz == 1 else MSK3D
    if format == PGM2D:
        if nz != 1:
            raise DataError("PGM can only hold 2D payloads")
        if isinstance(payload, BinaryMask):
            header = f"P5\n{nx} {ny}\n255\n".encode("ascii")
            body = (payload.data * np.uint8(255)).tobytes()
        else:
            header = f"P5\n{nx} {ny}\n{_U16_MAX}\n".encode("ascii")
            body = np.round(payload.data * _U16_MAX).astype(">u2").tobytes()
    elif format == MSK3D:
        if isinstance(payload, BinaryMask):
            header = f"MSK1 {nx} {ny} {nz} u8\n".encode("ascii")
            body = (payload.data * np.uint8(255)).tobytes()
        else:
            header = f"MSK1 {nx} {ny} {nz} u16\n".encode("ascii")
            body = np.round(payload.data * _U16_MAX).astype("<u2").tobytes()
    else:
        raise DataError(f"unknown mask format {format!r}")
    _atomic_write(path, header + body)


@dataclass
class ReportTable:
    """A named table destined for a CSV file plus its JSON mirror."""

    name: str
    columns: list[str]
    rows: list[list]


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def parse_cell(text: str):
    if text == "":
        return None
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _csv_bytes(table: ReportTable) -> bytes:
    lines = [",".join(table.columns)]
    for row in table.rows:
        if len(row) != len(table.columns):
            raise DataError(f"row width {len(row)} != {len(table.columns)} columns")
        lines.append(",".join(format_cell(v) for v in row))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _json_bytes(table: ReportTable) -> bytes:
    def coerce(v):
        if isinstance(v, (np.floating,)):
            return float(v)
        if isinstance(v, (np.integer,)):
            return int(v)
        return v

    doc = {
        "name": table.name,
        "columns": list(table.columns),
        "rows": [[coerce(v) for v in row] for row in table.rows],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def write_report(table: ReportTable, out_dir: str, basename: str) -> tuple[str, str]:
    """Write <basename>.csv and <basename>.json atomically; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, basename + ".csv")
    json_path = os.path.join(out_dir, basename + ".json")
    _atomic_write(csv_path, _csv_bytes(table))
    _atomic_write(json_path, _json_bytes(table))
    return csv_path, json_path


def read_report_csv(path: str) -> ReportTable:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataError(f"{path}: empty report")
    columns = lines[0].split(",")
    rows = [[parse_cell(c) for c in line.split(",")] for line in lines[1:]]
    name = os.path.splitext(os.path.basename(path))[0]
    return ReportTable(name, columns, rows)


def read_report_json(path: str) -> ReportTable:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON ({exc})") from exc
    try:
        return ReportTable(doc["name"], list(doc["columns"]), [list(r) for r in doc["rows"]])
    except (KeyError, TypeError) as exc:
        raise DataError(f"{path}: not a report document") from exc


def parse_config_text(text: str, schema: dict) -> dict:
    """Parse the flat ``key = value`` config format.

    Blank lines are skipped and everything after a ``#`` is a comment.
    Unknown keys, repeated keys and unparsable values are rejected with
    their line number.
    """
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in schema:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            out[key] = schema[key](value)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return out


def load_config(path: str, schema: dict) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), schema)


def cfg_int(value: str) -> int:
    return int(value)


def cfg_float(value: str) -> float:
    return float(value)


def cfg_float_list(value: str) -> list[float]:
    items = [v.strip() for v in value.split(",") if v.strip()]
    if not items:
        raise ValueError("empty list")
    return [float(v) for v in items]


def cfg_str_list(value: str) -> list[str]:
    items = [v.strip() for v in value.split(",") if v.strip()]
    if not items:
        raise ValueError("empty list")
    return items
